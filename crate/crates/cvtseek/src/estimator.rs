//! Cooperative gradient estimation from one noisy measurement per robot,
//! with the closed-form error bounds used by the experiment harness.
//!
//! Two estimators are provided. The symmetric-design estimator scales the
//! measurement-weighted offset sum by 3/(ND²), which is exact for the
//! interleaved-ring formations whose second moment is (ND²/3)I. The corrected
//! estimator removes the center-value offset and solves against the actual
//! second-moment matrix, so it tolerates formations with nonzero first moment
//! and anisotropic second moment, such as converged spherical tessellations.

use crate::error::{Error, Result};
use crate::field::LipschitzEstimate;
use crate::formation::{Formation, FormationKind, FormationMoments};
use crate::geometry::{sym_spectral_norm, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorMethod {
    /// Offset-weighted sum scaled by 3/(ND²); assumes the ideal moments.
    Symmetric,
    /// Center-corrected linear solve against the measured moment matrix.
    Corrected,
}

#[derive(Debug, Clone, Copy)]
pub struct GradientEstimate {
    pub grad_hat: Vec3,
    pub method: EstimatorMethod,
    /// Center value the corrected estimator subtracted; the symmetric
    /// estimator uses none.
    pub center_value_used: Option<f64>,
    /// Worst-case estimation error when a curvature bound was supplied.
    pub bound: Option<f64>,
}

/// Mean of the robot measurements, the practical stand-in for σ(c) when no
/// robot sits at the formation center.
pub fn center_estimate(measurements: &[f64]) -> Result<f64> {
    if measurements.is_empty() {
        return Err(Error::InvalidArgument(
            "center estimate needs at least one measurement".into(),
        ));
    }
    Ok(measurements.iter().sum::<f64>() / measurements.len() as f64)
}

fn check_sizes(f: &Formation, measurements: &[f64]) -> Result<()> {
    if measurements.len() != f.n() {
        return Err(Error::InvalidArgument(format!(
            "{} measurements for {} robots",
            measurements.len(),
            f.n()
        )));
    }
    if let Some(bad) = measurements.iter().find(|y| !y.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite measurement {bad}"
        )));
    }
    Ok(())
}

fn weighted_offset_sum(f: &Formation, measurements: &[f64]) -> Vec3 {
    f.offsets()
        .zip(measurements)
        .fold(Vec3::zeros(), |acc, (r, y)| acc + *y * r)
}

/// ∇̂σ(c) = (3/ND²) Σ y_i (r_i − c).
///
/// Valid on any formation; the 3LD error bound is attached only when the
/// formation is of the symmetric kind and a curvature estimate is supplied.
/// On other formations the caller owns the error analysis (see
/// [`alpha_error_term`]).
pub fn grad_symmetric(
    f: &Formation,
    measurements: &[f64],
    lipschitz: Option<&LipschitzEstimate>,
) -> Result<GradientEstimate> {
    check_sizes(f, measurements)?;
    let n = f.n() as f64;
    let grad_hat = (3.0 / (n * f.radius * f.radius)) * weighted_offset_sum(f, measurements);
    if !grad_hat.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("symmetric gradient estimate"));
    }
    let bound = match (f.kind, lipschitz) {
        (FormationKind::Symmetric, Some(le)) => Some(bound_symmetric(le.l, f.radius)?),
        _ => None,
    };
    Ok(GradientEstimate {
        grad_hat,
        method: EstimatorMethod::Symmetric,
        center_value_used: None,
        bound,
    })
}

/// Solve M·∇̂σ(c) = Σ y_i (r_i − c) − σ_c Σ (r_i − c) without forming M⁻¹.
pub fn grad_cvt(
    f: &Formation,
    measurements: &[f64],
    sigma_c: f64,
    moments: &FormationMoments,
    lipschitz: Option<&LipschitzEstimate>,
) -> Result<GradientEstimate> {
    check_sizes(f, measurements)?;
    if !sigma_c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite center value {sigma_c}"
        )));
    }
    if moments.cond_m > 1e6 {
        return Err(Error::DegenerateFormation(format!(
            "moment matrix condition number {:.3e} exceeds 1e6",
            moments.cond_m
        )));
    }
    let rhs = weighted_offset_sum(f, measurements) - sigma_c * moments.r_bar;
    let chol = moments.m.cholesky().ok_or_else(|| {
        Error::DegenerateFormation("moment matrix is not positive definite".into())
    })?;
    let grad_hat = chol.solve(&rhs);
    if !grad_hat.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("corrected gradient estimate"));
    }
    let bound = match lipschitz {
        Some(le) => Some(bound_cvt(moments, f.n(), le.l, f.radius)?),
        None => None,
    };
    Ok(GradientEstimate {
        grad_hat,
        method: EstimatorMethod::Corrected,
        center_value_used: Some(sigma_c),
        bound,
    })
}

/// Worst-case error 3LD of the symmetric-design estimator on its own
/// formation kind.
pub fn bound_symmetric(l: f64, d: f64) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) || !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "curvature bound and radius must be positive, got L={l}, D={d}"
        )));
    }
    Ok(3.0 * l * d)
}

/// Worst-case error of the corrected estimator: ‖(ND²/3)M⁻¹‖·3LD, which
/// equals ‖M⁻¹‖·N·L·D³.
pub fn bound_cvt(moments: &FormationMoments, n: usize, l: f64, d: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("empty formation".into()));
    }
    if moments.cond_m > 1e6 {
        return Err(Error::DegenerateFormation(format!(
            "moment matrix condition number {:.3e} exceeds 1e6",
            moments.cond_m
        )));
    }
    Ok(moments.iso_norm * bound_symmetric(l, d)?)
}

/// Extra error term paid when the symmetric-design estimator runs on a
/// formation whose moments deviate from the ideal:
/// (3/ND²)(σ(c)·‖r̄‖ + ‖M_α‖·‖∇σ(c)‖).
pub fn alpha_error_term(
    moments: &FormationMoments,
    sigma_c: f64,
    grad_norm: f64,
    n: usize,
    d: f64,
) -> Result<f64> {
    if n == 0 || !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need robots and a positive radius, got N={n}, D={d}"
        )));
    }
    if grad_norm.is_nan() || grad_norm < 0.0 || !sigma_c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bad magnitudes sigma_c={sigma_c}, grad_norm={grad_norm}"
        )));
    }
    let scale = 3.0 / (n as f64 * d * d);
    Ok(scale
        * (sigma_c.abs() * moments.r_bar.norm()
            + sym_spectral_norm(&moments.m_alpha) * grad_norm))
}
