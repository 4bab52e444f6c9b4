//! Signal fields: analytic value/gradient/Hessian oracles, a sampled
//! curvature bound for the first-order Taylor remainder, and noisy point
//! measurements drawn from an explicit per-trial generator.

use crate::error::{Error, Result};
use crate::geometry::{sym_spectral_norm, Mat3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// A C² scalar signal. `lipschitz_bound` returns an L such that the
/// first-order Taylor remainder about any c in the stated ball satisfies
/// |σ(r) - σ(c) - ∇σ(c)ᵀ(r-c)| ≤ L‖r-c‖² for r in that ball.
pub trait ScalarField {
    fn value(&self, r: &Vec3) -> f64;
    fn gradient(&self, r: &Vec3) -> Vec3;
    fn hessian(&self, r: &Vec3) -> Mat3;

    fn lipschitz_bound(&self, center: &Vec3, radius: f64) -> LipschitzEstimate {
        sampled_lipschitz(self, center, radius)
    }
}

/// A field with a known maximizer, for seeking runs and truth diagnostics.
pub trait SourceField: ScalarField {
    fn source(&self) -> Vec3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzMethod {
    /// Exact value for a pure quadratic, where the remainder constant is ‖Q‖.
    AnalyticQuadratic,
    /// Half the largest sampled Hessian norm over the ball, inflated by 10%.
    Sampled,
}

#[derive(Debug, Clone, Copy)]
pub struct LipschitzEstimate {
    pub l: f64,
    pub center: Vec3,
    pub radius: f64,
    pub method: LipschitzMethod,
}

/// Dense seeded sampling of the ball: 10⁴ interior points plus the center.
/// Deterministic; every call with the same ball returns the same estimate.
pub fn sampled_lipschitz<F: ScalarField + ?Sized>(
    field: &F,
    center: &Vec3,
    radius: f64,
) -> LipschitzEstimate {
    const SAMPLES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c69_7073);
    let normal = StandardNormal;
    let mut max_h = sym_spectral_norm(&field.hessian(center));
    for _ in 0..SAMPLES {
        let dir = Vec3::new(
            normal.sample(&mut rng),
            normal.sample(&mut rng),
            normal.sample(&mut rng),
        );
        let norm = dir.norm();
        if norm <= 1e-12 {
            continue;
        }
        // cube-root radial law gives uniform density in the ball
        let t: f64 = rng.random();
        let p = center + dir * (radius * t.cbrt() / norm);
        max_h = max_h.max(sym_spectral_norm(&field.hessian(&p)));
    }
    LipschitzEstimate {
        l: 0.5 * max_h * 1.10,
        center: *center,
        radius,
        method: LipschitzMethod::Sampled,
    }
}

/// σ(r) = A·exp(-(r-r*)ᵀ S (r-r*)), peaked at the source r* with peak value A.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianField {
    pub a: f64,
    pub s: Mat3,
    pub source: Vec3,
}

impl GaussianField {
    pub fn new(a: f64, s: Mat3, source: Vec3) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "peak amplitude must be positive, got {a}"
            )));
        }
        if (s - s.transpose()).abs().max() > 1e-12 {
            return Err(Error::InvalidArgument("shape matrix must be symmetric".into()));
        }
        let eig = s.symmetric_eigen();
        if eig.eigenvalues.min() < -1e-12 * eig.eigenvalues.max().abs().max(1.0) {
            return Err(Error::InvalidArgument(
                "shape matrix must be positive semidefinite".into(),
            ));
        }
        Ok(Self { a, s, source })
    }
}

impl ScalarField for GaussianField {
    fn value(&self, r: &Vec3) -> f64 {
        let d = r - self.source;
        self.a * (-d.dot(&(self.s * d))).exp()
    }

    fn gradient(&self, r: &Vec3) -> Vec3 {
        let d = r - self.source;
        -2.0 * self.value(r) * (self.s * d)
    }

    fn hessian(&self, r: &Vec3) -> Mat3 {
        let d = r - self.source;
        let sd = self.s * d;
        self.value(r) * (4.0 * sd * sd.transpose() - 2.0 * self.s)
    }
}

impl SourceField for GaussianField {
    fn source(&self) -> Vec3 {
        self.source
    }
}

/// Test double σ(r) = rᵀ Q r with an exact remainder constant.
#[derive(Debug, Clone)]
pub struct QuadraticField {
    pub q: Mat3,
}

impl ScalarField for QuadraticField {
    fn value(&self, r: &Vec3) -> f64 {
        r.dot(&(self.q * r))
    }

    fn gradient(&self, r: &Vec3) -> Vec3 {
        2.0 * (self.q * r)
    }

    fn hessian(&self, _r: &Vec3) -> Mat3 {
        2.0 * self.q
    }

    fn lipschitz_bound(&self, center: &Vec3, radius: f64) -> LipschitzEstimate {
        // The remainder of a quadratic is exactly (r-c)ᵀQ(r-c).
        LipschitzEstimate {
            l: sym_spectral_norm(&self.q),
            center: *center,
            radius,
            method: LipschitzMethod::AnalyticQuadratic,
        }
    }
}

/// Test double σ(r) = a0 + gᵀr; gradient estimation on it must be exact.
#[derive(Debug, Clone)]
pub struct AffineField {
    pub a0: f64,
    pub g: Vec3,
}

impl ScalarField for AffineField {
    fn value(&self, r: &Vec3) -> f64 {
        self.a0 + self.g.dot(r)
    }

    fn gradient(&self, _r: &Vec3) -> Vec3 {
        self.g
    }

    fn hessian(&self, _r: &Vec3) -> Mat3 {
        Mat3::zeros()
    }
}

/// Per-robot measurement noise: y_i = σ(r_i) + ν_i·z_i with independent
/// standard normal z_i. `seed` selects an independent noise stream when two
/// scenarios must not share draws; stream 0 is the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub nu: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless(n: usize) -> Self {
        Self {
            nu: vec![0.0; n],
            seed: 0,
        }
    }

    pub fn uniform(n: usize, nu: f64) -> Self {
        Self {
            nu: vec![nu; n],
            seed: 0,
        }
    }
}

/// Noisy measurements at the given positions. Exactly one standard normal is
/// drawn per robot regardless of its ν, so two runs sharing a generator seed
/// see identical noise realizations even if their ν vectors differ.
pub fn measure<F: ScalarField + ?Sized, R: Rng>(
    field: &F,
    positions: &[Vec3],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if positions.len() != noise.nu.len() {
        return Err(Error::InvalidArgument(format!(
            "{} positions but {} noise levels",
            positions.len(),
            noise.nu.len()
        )));
    }
    if let Some(bad) = noise.nu.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise levels must be non-negative, got {bad}"
        )));
    }
    let normal = StandardNormal;
    Ok(positions
        .iter()
        .zip(&noise.nu)
        .map(|(r, nu)| {
            let z: f64 = normal.sample(rng);
            field.value(r) + nu * z
        })
        .collect())
}

/// Central-difference gradient from field values; independent of the
/// analytic gradient.
pub fn fd_gradient<F: ScalarField + ?Sized>(field: &F, r: &Vec3, h: f64) -> Vec3 {
    let mut g = Vec3::zeros();
    for k in 0..3 {
        let mut hi = *r;
        let mut lo = *r;
        hi[k] += h;
        lo[k] -= h;
        g[k] = (field.value(&hi) - field.value(&lo)) / (2.0 * h);
    }
    g
}

/// Central differences of the analytic gradient. Valid at much smaller step
/// sizes than [`fd_hessian`] (first-order cancellation instead of second);
/// meaningful as an oracle once the gradient itself has been checked against
/// [`fd_gradient`].
pub fn fd_hessian_from_gradient<F: ScalarField + ?Sized>(field: &F, r: &Vec3, h: f64) -> Mat3 {
    let mut out = Mat3::zeros();
    for k in 0..3 {
        let mut hi = *r;
        let mut lo = *r;
        hi[k] += h;
        lo[k] -= h;
        let col = (field.gradient(&hi) - field.gradient(&lo)) / (2.0 * h);
        out.set_column(k, &col);
    }
    out
}

/// Second-order central differences of field values only, so it exercises
/// neither the analytic gradient nor the analytic Hessian.
pub fn fd_hessian<F: ScalarField + ?Sized>(field: &F, r: &Vec3, h: f64) -> Mat3 {
    let mut out = Mat3::zeros();
    for k in 0..3 {
        for l in 0..3 {
            let mut pp = *r;
            let mut pm = *r;
            let mut mp = *r;
            let mut mm = *r;
            pp[k] += h;
            pp[l] += h;
            pm[k] += h;
            pm[l] -= h;
            mp[k] -= h;
            mp[l] += h;
            mm[k] -= h;
            mm[l] -= h;
            out[(k, l)] = (field.value(&pp) - field.value(&pm) - field.value(&mp)
                + field.value(&mm))
                / (4.0 * h * h);
        }
    }
    out
}
