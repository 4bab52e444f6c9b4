//! Vector primitives, seeded sampling on the unit sphere, and the Fibonacci
//! lattice mesh used as the discrete integration domain.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Discrete near-uniform sample of the unit sphere. Every point has unit norm
/// (to 1e-12) and represents an equal share 4π/m of the surface area.
#[derive(Debug, Clone)]
pub struct SphericalMesh {
    pub points: Vec<Vec3>,
}

impl SphericalMesh {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Area weight per point under the equal-area assumption.
    pub fn point_weight(&self) -> f64 {
        4.0 * std::f64::consts::PI / self.points.len() as f64
    }
}

/// Golden-spiral lattice of `m` points on the unit sphere. Deterministic,
/// works for any m >= 12, and keeps nearest-neighbor spacing within a small
/// constant factor of the ideal sqrt(4π/m).
pub fn fibonacci_sphere_mesh(m: usize) -> Result<SphericalMesh> {
    if m < 12 {
        return Err(Error::InvalidArgument(format!(
            "mesh needs at least 12 points, got {m}"
        )));
    }
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let mut points = Vec::with_capacity(m);
    for i in 0..m {
        // Band heights 1-(2i+1)/m are symmetric about the equator, so the
        // lattice's first moment vanishes in z exactly.
        let z = 1.0 - (2 * i + 1) as f64 / m as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden_angle * i as f64;
        points.push(Vec3::new(r * phi.cos(), r * phi.sin(), z));
    }
    Ok(SphericalMesh { points })
}

/// `n` independent uniform points on the unit sphere from a seeded generator.
/// Same seed, same output, bit for bit.
pub fn sample_unit_sphere(n: usize, seed: u64) -> Result<Vec<Vec3>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need n >= 1 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = Vec3::new(
            normal.sample(&mut rng),
            normal.sample(&mut rng),
            normal.sample(&mut rng),
        );
        let norm = v.norm();
        // Gaussian triples land this close to the origin with probability ~1e-36;
        // redraw instead of emitting a garbage direction.
        if norm > 1e-12 {
            out.push(v / norm);
        }
    }
    Ok(out)
}

/// Spectral norm (largest |eigenvalue|) of a symmetric matrix.
pub fn sym_spectral_norm(m: &Mat3) -> f64 {
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0, |acc, l| acc.max(l.abs()))
}

/// Projects p onto the unit sphere along the radial line through it.
pub fn radial_project(p: &Vec3) -> Result<Vec3> {
    let norm = p.norm();
    if norm <= 1e-15 {
        return Err(Error::DegeneratePoint { norm });
    }
    Ok(p / norm)
}
