//! Generic random instances: standard-normal cameras, points and lines.

use alloc::vec::Vec;

use nalgebra::{Matrix3x4, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::projective::{Camera, CameraArrangement, HomPoint3, SpatialLine};

const MAX_RETRIES: usize = 64;

pub fn affine_point<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    Vector3::from_fn(|_, _| rng.sample(StandardNormal))
}

/// A point with standard-normal affine coordinates.
pub fn point<R: Rng + ?Sized>(rng: &mut R) -> HomPoint3 {
    HomPoint3::from_affine(&affine_point(rng))
}

pub fn camera<R: Rng + ?Sized>(rng: &mut R) -> Result<Camera> {
    for _ in 0..MAX_RETRIES {
        let m = Matrix3x4::from_fn(|_, _| rng.sample(StandardNormal));
        if let Ok(c) = Camera::new(m) {
            return Ok(c);
        }
    }
    Err(Error::DegenerateScene(MAX_RETRIES))
}

/// `m` standard-normal cameras with distinct centers.
pub fn arrangement<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<CameraArrangement> {
    for _ in 0..MAX_RETRIES {
        let cameras = (0..m).map(|_| camera(rng)).collect::<Result<Vec<_>>>()?;
        match CameraArrangement::new(cameras) {
            Err(Error::CoincidentCenters) => continue,
            other => return other,
        }
    }
    Err(Error::DegenerateScene(MAX_RETRIES))
}

/// The line through two standard-normal points.
pub fn line<R: Rng + ?Sized>(rng: &mut R) -> SpatialLine {
    loop {
        let (a, b) = (point(rng), point(rng));
        if let Ok(l) = SpatialLine::from_span(a.coords(), b.coords()) {
            return l;
        }
    }
}

/// Independent stream seed for item `index` of a run seeded by `master`
/// (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
