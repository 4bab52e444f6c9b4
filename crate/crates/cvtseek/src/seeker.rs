//! Source seeking: the formation center climbs the estimated gradient with a
//! per-iteration displacement clamp, while robots hold a rigid shape around
//! it. Robots track their references exactly; no vehicle dynamics here.

use crate::cvt::{compute_cvt, LloydConfig};
use crate::error::{Error, Result};
use crate::estimator::{center_estimate, grad_cvt, grad_symmetric, EstimatorMethod};
use crate::field::{measure, NoiseModel, SourceField};
use crate::formation::{
    build_cvt_formation, build_symmetric, formation_moments, Formation, FormationKind,
    FormationMoments,
};
use crate::geometry::Vec3;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeekConfig {
    /// Gradient-ascent step size ε.
    pub epsilon: f64,
    /// Per-iteration displacement cap γ.
    pub gamma: f64,
    pub max_iters: usize,
    /// Stop once ‖∇̂σ‖ falls to this level; zero keeps the loop running for
    /// the full iteration budget.
    #[serde(default)]
    pub stop_grad_tol: f64,
    pub estimator_method: EstimatorMethod,
    /// Feed the corrected estimator the analytic σ(c) instead of the
    /// measurement mean; analysis runs only.
    #[serde(default)]
    pub use_true_center: bool,
}

impl SeekConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "displacement cap must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.stop_grad_tol >= 0.0 && self.stop_grad_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "stop tolerance must be non-negative, got {}",
                self.stop_grad_tol
            )));
        }
        Ok(())
    }
}

/// Formation shape a run instantiates once and then translates rigidly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationTemplate {
    pub kind: FormationKind,
    pub n: usize,
    pub d: f64,
    /// Seeds the tessellation initializer; ignored for the symmetric kind.
    #[serde(default)]
    pub generator_seed: u64,
}

impl FormationTemplate {
    pub fn instantiate(&self, center: Vec3) -> Result<Formation> {
        match self.kind {
            FormationKind::Symmetric => build_symmetric(self.n, center, self.d),
            FormationKind::Cvt => {
                let cfg = LloydConfig::for_n(self.n);
                let res = compute_cvt(self.n, self.generator_seed, &cfg)?;
                build_cvt_formation(&res.generators, center, self.d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub k: usize,
    pub c: Vec3,
    pub grad_hat: Vec3,
    pub grad_true: Vec3,
    pub dist_to_source: f64,
    pub est_error_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    /// Set when estimator degeneracy cut the run short; records hold the
    /// completed iterations.
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn final_record(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }
}

/// One center update: move by ε·∇̂σ, rescaled to norm γ whenever the raw
/// step is longer. Direction is always preserved.
pub fn ga_step(c: Vec3, grad_hat: Vec3, epsilon: f64, gamma: f64) -> Result<Vec3> {
    if !(epsilon > 0.0 && epsilon.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step parameters must be positive, got epsilon={epsilon}, gamma={gamma}"
        )));
    }
    if !grad_hat.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("gradient estimate in center update"));
    }
    let mut delta = epsilon * grad_hat;
    let norm = delta.norm();
    if norm > gamma {
        delta *= gamma / norm;
    }
    Ok(c + delta)
}

/// Drive the center from `c0` toward the field's source.
///
/// Each iteration measures at the current robot positions, estimates the
/// gradient, records truth diagnostics from the analytic field, and steps the
/// center. The tessellation (for the cvt kind) is computed once at the start
/// and the shape never changes afterward; second moments are likewise fixed,
/// so they are computed once. A record is appended for the final center too,
/// giving `max_iters + 1` rows on a full-length run; a zero iteration budget
/// yields the single record at `c0`.
pub fn run_seek<F, R>(
    field: &F,
    template: &FormationTemplate,
    noise: &NoiseModel,
    cfg: &SeekConfig,
    c0: Vec3,
    rng: &mut R,
) -> Result<Trajectory>
where
    F: SourceField + ?Sized,
    R: Rng,
{
    cfg.validate()?;
    if !c0.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite start center".into()));
    }
    if noise.nu.len() != template.n {
        return Err(Error::InvalidArgument(format!(
            "{} noise levels for {} robots",
            noise.nu.len(),
            template.n
        )));
    }

    let base = template.instantiate(c0)?;
    let offsets: Vec<Vec3> = base.offsets().collect();
    let moments: Option<FormationMoments> = match cfg.estimator_method {
        EstimatorMethod::Symmetric => None,
        EstimatorMethod::Corrected => match formation_moments(&base) {
            Ok(m) => Some(m),
            Err(Error::DegenerateFormation(msg)) => {
                return Ok(Trajectory {
                    records: Vec::new(),
                    aborted: Some(msg),
                })
            }
            Err(e) => return Err(e),
        },
    };

    let source = field.source();
    let mut records = Vec::with_capacity(cfg.max_iters + 1);
    let mut aborted = None;
    let mut c = c0;

    for k in 0..=cfg.max_iters {
        let formation = Formation {
            kind: template.kind,
            positions: offsets.iter().map(|o| c + o).collect(),
            center: c,
            radius: template.d,
        };
        let y = measure(field, &formation.positions, noise, rng)?;
        let est = match cfg.estimator_method {
            EstimatorMethod::Symmetric => grad_symmetric(&formation, &y, None),
            EstimatorMethod::Corrected => {
                let sigma_c = if cfg.use_true_center {
                    field.value(&c)
                } else {
                    center_estimate(&y)?
                };
                grad_cvt(&formation, &y, sigma_c, moments.as_ref().unwrap(), None)
            }
        };
        let est = match est {
            Ok(e) => e,
            Err(Error::DegenerateFormation(msg)) => {
                aborted = Some(msg);
                break;
            }
            Err(e) => return Err(e),
        };
        let grad_true = field.gradient(&c);
        records.push(TrajectoryRecord {
            k,
            c,
            grad_hat: est.grad_hat,
            grad_true,
            dist_to_source: (c - source).norm(),
            est_error_norm: (est.grad_hat - grad_true).norm(),
        });
        if k == cfg.max_iters || est.grad_hat.norm() <= cfg.stop_grad_tol {
            break;
        }
        c = ga_step(c, est.grad_hat, cfg.epsilon, cfg.gamma)?;
    }

    Ok(Trajectory { records, aborted })
}
