//! Run configuration: an optional TOML file overridden by command-line
//! flags.

use std::path::{Path, PathBuf};

use anchored_core::pipeline::{Method, PipelineConfig, PointSolver};
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use crate::histogram::RangePolicy;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Number of cameras.
    #[arg(long = "m")]
    pub m: Option<usize>,
    /// Number of points on the line.
    #[arg(long = "p")]
    pub p: Option<usize>,
    /// Length of the noise vectors.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Benchmark iterations, EDD instances or multidegree slices.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Comma-separated method ids, e.g. L1.0,L1.1-std.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Exit with status 3 when any solve fails or a count disagrees.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// TOML file with the same keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerOverrides {
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub min_step: Option<f64>,
    pub newton_tol: Option<f64>,
    pub infinity_threshold: Option<f64>,
    pub dedup_radius: Option<f64>,
    pub singular_condition: Option<f64>,
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineOverrides {
    pub max_iterations: Option<usize>,
    pub step_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub m: Option<usize>,
    pub p: Option<usize>,
    pub epsilon: Option<f64>,
    pub iterations: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub strict: Option<bool>,
    pub threads: Option<usize>,
    /// Histogram bin count.
    pub bins: Option<usize>,
    /// Fixed histogram range `[lo, hi]` for the error histogram.
    pub error_range: Option<[f64; 2]>,
    pub line_starts: Option<usize>,
    /// `"local"` or `"homotopy"`.
    pub point_solver: Option<String>,
    pub tracker: Option<TrackerOverrides>,
    pub refine: Option<RefineOverrides>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub m: usize,
    pub p: usize,
    pub epsilon: f64,
    pub iterations: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub strict: bool,
    pub threads: Option<usize>,
    pub bins: usize,
    pub error_range: RangePolicy,
    pub pipeline: PipelineConfig,
}

/// Iteration count used when none is given: fewer for four or more views,
/// where each iteration is much slower.
pub fn default_iterations(m: usize) -> usize {
    if m <= 3 {
        1000
    } else {
        100
    }
}

fn parse_methods(ids: &[String]) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for id in ids {
        let m: Method = id.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        bail!("no methods given");
    }
    Ok(out)
}

impl RunConfig {
    /// Merges flags over the file named by `--config`, if any. Without
    /// either, the iteration count is `iterations`, or the benchmark default
    /// for `m` when that is `None`.
    pub fn from_args(args: &CommonArgs, iterations: Option<usize>) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::resolve(args, file, iterations)
    }

    pub fn resolve(args: &CommonArgs, file: FileConfig, iterations: Option<usize>) -> Result<Self> {
        let m = args.m.or(file.m).unwrap_or(3);
        let p = args.p.or(file.p).unwrap_or(5);
        let epsilon = args.epsilon.or(file.epsilon).unwrap_or(1e-12);
        let iterations = args
            .iterations
            .or(file.iterations)
            .or(iterations)
            .unwrap_or_else(|| default_iterations(m));
        if m < 2 {
            bail!("--m must be at least 2, got {m}");
        }
        if p < 1 {
            bail!("--p must be at least 1, got {p}");
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            bail!("--epsilon must be finite and nonnegative, got {epsilon}");
        }
        if iterations < 1 {
            bail!("--iterations must be at least 1");
        }
        let methods = match args.methods.as_ref().or(file.methods.as_ref()) {
            Some(ids) => {
                let methods = parse_methods(ids)?;
                if p < 3 && methods.contains(&Method::L12) {
                    bail!("L1.2 needs --p of at least 3");
                }
                methods
            }
            None => Method::ALL.iter().copied().filter(|&m| p >= 3 || m != Method::L12).collect(),
        };
        let threads = args.threads.or(file.threads);
        if threads == Some(0) {
            bail!("--threads must be positive");
        }
        let bins = file.bins.unwrap_or(30);
        if bins < 1 {
            bail!("bins must be at least 1");
        }
        let error_range = match file.error_range {
            Some([lo, hi]) if lo < hi && lo.is_finite() && hi.is_finite() => RangePolicy::Fixed(lo, hi),
            Some([lo, hi]) => bail!("error_range [{lo}, {hi}] is empty"),
            None => RangePolicy::Auto,
        };
        let mut pipeline = PipelineConfig::default();
        if let Some(n) = file.line_starts {
            if n < 1 {
                bail!("line_starts must be at least 1");
            }
            pipeline.line_starts = n;
        }
        pipeline.point_solver = match file.point_solver.as_deref() {
            None | Some("local") => PointSolver::LocalRefine,
            Some("homotopy") => PointSolver::Homotopy,
            Some(other) => bail!("point_solver must be \"local\" or \"homotopy\", got {other:?}"),
        };
        if let Some(t) = file.tracker {
            let c = &mut pipeline.tracker;
            c.initial_step = t.initial_step.unwrap_or(c.initial_step);
            c.max_step = t.max_step.unwrap_or(c.max_step);
            c.min_step = t.min_step.unwrap_or(c.min_step);
            c.newton_tol = t.newton_tol.unwrap_or(c.newton_tol);
            c.infinity_threshold = t.infinity_threshold.unwrap_or(c.infinity_threshold);
            c.dedup_radius = t.dedup_radius.unwrap_or(c.dedup_radius);
            c.singular_condition = t.singular_condition.unwrap_or(c.singular_condition);
            c.max_steps = t.max_steps.unwrap_or(c.max_steps);
            if !(c.min_step > 0.0 && c.min_step <= c.initial_step && c.initial_step <= c.max_step) {
                bail!("tracker steps must satisfy 0 < min_step <= initial_step <= max_step");
            }
        }
        if let Some(r) = file.refine {
            pipeline.refine.max_iterations = r.max_iterations.unwrap_or(pipeline.refine.max_iterations);
            pipeline.refine.step_tol = r.step_tol.unwrap_or(pipeline.refine.step_tol);
        }
        Ok(Self {
            m,
            p,
            epsilon,
            iterations,
            methods,
            seed: args.seed.or(file.seed).unwrap_or(0),
            out_dir: args.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from("out")),
            strict: args.strict || file.strict.unwrap_or(false),
            threads,
            bins,
            error_range,
            pipeline,
        })
    }
}
