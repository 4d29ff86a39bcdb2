//! Monte-Carlo Euclidean distance degree counts: critical points of the
//! fitting objectives for random complex data on random instances.

use alloc::vec::Vec;

use nalgebra::Vector2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::homotopy::{solve_system, SolutionKind, TrackerConfig};
use super::monodromy::{monodromy_complete, MonodromyConfig};
use super::system::{
    anchored_line_fit, anchored_line_fit_std, anchored_point_fit, anchored_point_fit_std,
    point_mv_fit, CriticalSystem, RationalFit, SystemKind,
};
use crate::constraints::{modal_count, LineTrack, PointTrack};
use crate::error::Result;
use crate::projective::ImageLine;
use crate::random;
use crate::reduction::{reduce_anchored_line, reduce_anchored_point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EddVariety {
    /// Points on a fixed line.
    AnchoredPoint,
    /// Lines through a fixed point.
    AnchoredLine,
    /// Unconstrained points.
    PointMultiview,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Reduced,
    Standard,
}

/// The closed-form count for `m` generic cameras.
pub fn expected_edd(variety: EddVariety, m: usize) -> usize {
    let m = m as i64;
    let twice = match variety {
        EddVariety::AnchoredPoint => 2 * (3 * m - 2),
        EddVariety::AnchoredLine => 9 * m * m - 19 * m + 6,
        EddVariety::PointMultiview => 9 * m * m * m - 21 * m * m + 16 * m - 8,
    };
    (twice / 2) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EddTrial {
    pub seed: u64,
    /// Finite nonsingular critical points.
    pub count: usize,
    pub paths: usize,
    pub near_singular: usize,
    pub at_infinity: usize,
    pub spurious: usize,
    pub path_failures: usize,
    pub duplicates: usize,
    /// Monodromy loops run after the total-degree solve.
    pub loops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EddSummary {
    pub variety: EddVariety,
    pub formulation: Formulation,
    pub m: usize,
    pub expected: usize,
    pub modal: usize,
    pub agreement: f64,
    pub trials: Vec<EddTrial>,
}

fn complex_targets<R: Rng + ?Sized>(fit: &RationalFit, rng: &mut R) -> RationalFit {
    let targets: Vec<Complex64> = (0..fit.residual_count())
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    fit.with_targets(&targets)
}

fn random_track<R: Rng + ?Sized>(m: usize, rng: &mut R) -> PointTrack {
    PointTrack::new(
        (0..m)
            .map(|_| Vector2::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect(),
    )
}

/// A random instance of the fitting problem with generic complex data.
pub fn edd_instance<R: Rng + ?Sized>(
    variety: EddVariety,
    formulation: Formulation,
    m: usize,
    rng: &mut R,
) -> Result<CriticalSystem> {
    let arrangement = random::arrangement(m, rng)?;
    let (fit, kind) = match variety {
        EddVariety::AnchoredPoint => {
            let line = random::line(rng);
            let track = random_track(m, rng);
            match formulation {
                Formulation::Reduced => (
                    anchored_point_fit(&reduce_anchored_point(&arrangement, &line, &track)?)?,
                    SystemKind::AnchoredPoint,
                ),
                Formulation::Standard => (
                    anchored_point_fit_std(&arrangement, &line, &track)?,
                    SystemKind::AnchoredPointStd,
                ),
            }
        }
        EddVariety::AnchoredLine => {
            let anchor = random::point(rng);
            let lines = LineTrack::new(
                (0..m)
                    .map(|_| ImageLine::from_patch(&Vector2::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
                    .collect(),
            )?;
            let problem = reduce_anchored_line(&arrangement, &anchor, &lines)?;
            match formulation {
                Formulation::Reduced => (anchored_line_fit(&problem)?, SystemKind::AnchoredLine),
                Formulation::Standard => (
                    anchored_line_fit_std(&problem, &lines)?,
                    SystemKind::AnchoredLineStd,
                ),
            }
        }
        EddVariety::PointMultiview => (
            point_mv_fit(&arrangement, &random_track(m, rng))?,
            SystemKind::PointMultiview,
        ),
    };
    Ok(CriticalSystem::from_fit(complex_targets(&fit, rng), kind))
}

/// Solves one random instance seeded by `seed`.
///
/// The total-degree solve is followed, for two or more variables, by
/// monodromy loops seeded with its finite nonsingular roots.
pub fn edd_trial(
    variety: EddVariety,
    formulation: Formulation,
    m: usize,
    seed: u64,
    cfg: &TrackerConfig,
) -> Result<EddTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let system = edd_instance(variety, formulation, m, &mut rng)?;
    let fit = system.fit.clone().expect("instances carry their fit");
    let n = fit.nvars();
    let set = solve_system(&system, cfg, &mut rng)?;
    let mut trial = EddTrial {
        seed,
        count: set.count(SolutionKind::FiniteNonsingular),
        paths: set.paths,
        near_singular: set.count(SolutionKind::NearSingular),
        at_infinity: set.count(SolutionKind::AtInfinity),
        spurious: set.count(SolutionKind::Spurious),
        path_failures: set.path_failures(),
        duplicates: set.duplicates,
        loops: 0,
    };
    if n >= 2 {
        let known = set.finite_nonsingular().map(|p| p.x[..n].to_vec()).collect();
        let out = monodromy_complete(&fit, known, cfg, &MonodromyConfig::default(), &mut rng);
        trial.count = out.solutions.len();
        trial.loops = out.loops;
    }
    Ok(trial)
}

pub fn summarize(
    variety: EddVariety,
    formulation: Formulation,
    m: usize,
    trials: Vec<EddTrial>,
) -> EddSummary {
    let counts: Vec<usize> = trials.iter().map(|t| t.count).collect();
    let (modal, agreement) = modal_count(&counts);
    EddSummary {
        variety,
        formulation,
        m,
        expected: expected_edd(variety, m),
        modal,
        agreement,
        trials,
    }
}

/// Runs `trials` instances sequentially, trial `k` seeded by
/// `derive_seed(seed, k)`.
pub fn count_edd(
    variety: EddVariety,
    formulation: Formulation,
    m: usize,
    trials: usize,
    seed: u64,
    cfg: &TrackerConfig,
) -> Result<EddSummary> {
    let results = (0..trials as u64)
        .map(|k| edd_trial(variety, formulation, m, random::derive_seed(seed, k), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(variety, formulation, m, results))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(
            (2..=4).map(|m| expected_edd(EddVariety::AnchoredPoint, m)).collect::<Vec<_>>(),
            [4, 7, 10]
        );
        assert_eq!(expected_edd(EddVariety::AnchoredLine, 3), 15);
        assert_eq!(expected_edd(EddVariety::AnchoredLine, 4), 37);
        assert_eq!(expected_edd(EddVariety::PointMultiview, 2), 6);
        assert_eq!(expected_edd(EddVariety::PointMultiview, 3), 47);
    }

    #[test]
    fn anchored_point_counts() {
        let cfg = TrackerConfig::default();
        for m in 2..=4 {
            for formulation in [Formulation::Reduced, Formulation::Standard] {
                let s = count_edd(EddVariety::AnchoredPoint, formulation, m, 10, 7, &cfg).unwrap();
                assert_eq!(s.modal, 3 * m - 2, "{formulation:?} m={m}");
                assert!(s.agreement >= 0.9);
            }
        }
    }

    #[test]
    fn anchored_line_count_m3() {
        let s = count_edd(
            EddVariety::AnchoredLine,
            Formulation::Reduced,
            3,
            5,
            11,
            &TrackerConfig::default(),
        )
        .unwrap();
        assert_eq!(s.modal, 15, "{:?}", s.trials);
    }

    #[test]
    fn point_multiview_count_m2() {
        let s = count_edd(
            EddVariety::PointMultiview,
            Formulation::Standard,
            2,
            3,
            13,
            &TrackerConfig::default(),
        )
        .unwrap();
        assert_eq!(s.modal, 6, "{:?}", s.trials);
    }
}
