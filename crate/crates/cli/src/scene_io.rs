//! JSON scene files: cameras, the line and the points, all homogeneous.

use std::path::Path;

use anchored_core::pipeline::Scene;
use anchored_core::projective::{Camera, CameraArrangement, HomPoint3, SpatialLine};
use anyhow::{bail, Context, Result};
use nalgebra::{Matrix3x4, Vector4};
use serde::{Deserialize, Serialize};

/// Points farther than this from the line, relative to their norm, are
/// rejected.
const ON_LINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    /// Seed for the noise and solver streams.
    #[serde(default)]
    pub seed: u64,
    /// Row-major 3x4 camera matrices.
    pub cameras: Vec<[[f64; 4]; 3]>,
    /// Two homogeneous points spanning the line.
    pub line: [[f64; 4]; 2],
    pub points: Vec<[f64; 4]>,
}

impl SceneFile {
    pub fn from_scene(scene: &Scene) -> Self {
        let rows = |m: &Matrix3x4<f64>| [0, 1, 2].map(|i| [0, 1, 2, 3].map(|j| m[(i, j)]));
        let col = |v: &Vector4<f64>| [v[0], v[1], v[2], v[3]];
        let span = scene.line.span();
        Self {
            seed: scene.seed,
            cameras: scene.arrangement.iter().map(|c| rows(c.matrix())).collect(),
            line: [col(&span.column(0).into_owned()), col(&span.column(1).into_owned())],
            points: scene.points.iter().map(|x| col(x.coords())).collect(),
        }
    }

    pub fn to_scene(&self) -> Result<Scene> {
        if self.cameras.len() < 2 {
            bail!("a scene needs at least 2 cameras, got {}", self.cameras.len());
        }
        if self.points.is_empty() {
            bail!("a scene needs at least one point");
        }
        let cameras = self
            .cameras
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                let m = Matrix3x4::from_fn(|r, c| rows[r][c]);
                Camera::new(m).with_context(|| format!("camera {i}"))
            })
            .collect::<Result<Vec<_>>>()?;
        let arrangement = CameraArrangement::new(cameras)?;
        let line = SpatialLine::from_span(&Vector4::from(self.line[0]), &Vector4::from(self.line[1])).context("line")?;
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let x = HomPoint3::new(Vector4::from(*x)).with_context(|| format!("point {i}"))?;
                if !line.contains(&x, ON_LINE_TOL) {
                    bail!("point {i} is not on the line");
                }
                if x.to_affine().is_none() {
                    bail!("point {i} is at infinity");
                }
                Ok(x)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scene {
            arrangement,
            line,
            points,
            seed: self.seed,
        })
    }

    pub fn load(path: &Path) -> Result<Scene> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: SceneFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        file.to_scene().with_context(|| format!("invalid scene in {}", path.display()))
    }

    pub fn save(scene: &Scene, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&Self::from_scene(scene))?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}
