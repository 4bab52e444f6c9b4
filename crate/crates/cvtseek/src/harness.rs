//! Scenario definitions and experiment drivers: seeded Monte Carlo over
//! seeking runs, the radius sweep, the minimum-distance table, and paired
//! estimator traces, each with a CSV writer and a pass/fail check.

use crate::cvt::{compute_cvt, LloydConfig};
use crate::error::{Error, Result};
use crate::estimator::{center_estimate, grad_cvt, grad_symmetric, EstimatorMethod};
use crate::field::{measure, GaussianField, NoiseModel, ScalarField};
use crate::formation::{
    build_cvt_formation, formation_moments, min_pairwise_distance, symmetric_dmin, Formation,
    FormationKind,
};
use crate::geometry::{Mat3, Vec3};
use crate::seeker::{ga_step, run_seek, FormationTemplate, SeekConfig, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// JSON shape of a Gaussian signal field: peak amplitude, row-major shape
/// matrix, source position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub a: f64,
    pub s: [[f64; 3]; 3],
    pub source: [f64; 3],
}

impl FieldSpec {
    pub fn to_field(&self) -> Result<GaussianField> {
        let s = Mat3::new(
            self.s[0][0], self.s[0][1], self.s[0][2], //
            self.s[1][0], self.s[1][1], self.s[1][2], //
            self.s[2][0], self.s[2][1], self.s[2][2],
        );
        GaussianField::new(self.a, s, Vec3::from(self.source))
    }

    pub fn from_field(f: &GaussianField) -> Self {
        Self {
            a: f.a,
            s: [
                [f.s[(0, 0)], f.s[(0, 1)], f.s[(0, 2)]],
                [f.s[(1, 0)], f.s[(1, 1)], f.s[(1, 2)]],
                [f.s[(2, 0)], f.s[(2, 1)], f.s[(2, 2)]],
            ],
            source: [f.source.x, f.source.y, f.source.z],
        }
    }
}

/// A complete, self-contained experiment description. Serializes to JSON so
/// every quantity a run depends on is inspectable and replayable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub field: FieldSpec,
    pub formation: FormationTemplate,
    pub noise: NoiseModel,
    pub cfg: SeekConfig,
    pub c0: [f64; 3],
    pub trials: usize,
    pub base_seed: u64,
}

impl Scenario {
    pub fn c0_vec(&self) -> Vec3 {
        Vec3::from(self.c0)
    }

    pub fn validate(&self) -> Result<()> {
        self.field.to_field()?;
        if self.trials == 0 {
            return Err(Error::InvalidArgument("need at least one trial".into()));
        }
        if self.noise.nu.len() != self.formation.n {
            return Err(Error::InvalidArgument(format!(
                "{} noise levels for {} robots",
                self.noise.nu.len(),
                self.formation.n
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

/// First benchmark field: strongly anisotropic decay, peak amplitude 100.
pub fn sigma1() -> GaussianField {
    let s = 1e-4
        * Mat3::new(
            100.0, 1.0, 1.0, //
            1.0, 1.0, 0.0, //
            1.0, 0.0, 10.0,
        );
    GaussianField::new(100.0, s, Vec3::zeros()).expect("benchmark field is valid")
}

/// Second benchmark field: gentle decay, peak amplitude 1, used for the
/// noise experiments.
pub fn sigma2() -> GaussianField {
    let s = 1e-4
        * Mat3::new(
            20.0, 5.0, 2.0, //
            5.0, 20.0, 2.0, //
            2.0, 2.0, 100.0,
        );
    GaussianField::new(1.0, s, Vec3::zeros()).expect("benchmark field is valid")
}

/// Start point along `dir` where the field has decayed to A·e⁻²: far enough
/// to make the run nontrivial, close enough that the gradient still carries
/// usable signal.
pub fn decay_start(field: &GaussianField, dir: Vec3) -> Vec3 {
    let u = dir.normalize();
    let t = (2.0 / u.dot(&(field.s * u))).sqrt();
    field.source + t * u
}

fn vec_array(v: Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// The named benchmark scenarios. Every quantity a run depends on (start
/// points, radii, seeds, noise levels) is pinned here so results are
/// attributable and reproducible.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let f1 = sigma1();
    let f2 = sigma2();
    let base_cfg = SeekConfig {
        epsilon: 1.0,
        gamma: 0.1,
        max_iters: 5000,
        stop_grad_tol: 0.0,
        estimator_method: EstimatorMethod::Corrected,
        use_true_center: false,
    };
    // start along the slowest-decay axis, at distance ~141 from the source
    let c0_sigma1 = vec_array(decay_start(&f1, Vec3::new(0.0, 1.0, 0.0)));
    // start along a mixed direction, at distance ~22 from the source
    let c0_sigma2 = vec_array(decay_start(&f2, Vec3::new(100.0, 80.0, 60.0)));

    let fig1 = Scenario {
        name: "fig1".into(),
        field: FieldSpec::from_field(&f1),
        formation: FormationTemplate {
            kind: FormationKind::Cvt,
            n: 7,
            d: 4.0,
            generator_seed: 1,
        },
        noise: NoiseModel::noiseless(7),
        cfg: base_cfg,
        c0: c0_sigma1,
        trials: 1,
        base_seed: 1,
    };

    let fig3 = Scenario {
        name: "fig3".into(),
        ..fig1.clone()
    };

    let mut fig4 = Scenario {
        name: "fig4".into(),
        ..fig1.clone()
    };
    fig4.formation.d = 1.0;

    let fig5_uniform = Scenario {
        name: "fig5-uniform".into(),
        field: FieldSpec::from_field(&f2),
        formation: FormationTemplate {
            kind: FormationKind::Cvt,
            n: 8,
            d: 4.0,
            generator_seed: 7,
        },
        noise: NoiseModel::uniform(8, 0.1),
        cfg: SeekConfig {
            max_iters: 3000,
            ..base_cfg
        },
        c0: c0_sigma2,
        trials: 100,
        base_seed: 1,
    };

    let mut fig5_faulty = Scenario {
        name: "fig5-faulty".into(),
        ..fig5_uniform.clone()
    };
    fig5_faulty.noise.nu[0] = 0.5;

    vec![fig1, fig3, fig4, fig5_uniform, fig5_faulty]
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

/// The same noise study run on the interleaved-ring design: swap the
/// formation kind and the matching estimator, keep every seed and noise
/// level so the two arms share random realizations trial for trial.
pub fn symmetric_twin(s: &Scenario) -> Scenario {
    let mut twin = s.clone();
    twin.name = format!("{}-sym", s.name);
    twin.formation.kind = FormationKind::Symmetric;
    twin.cfg.estimator_method = EstimatorMethod::Symmetric;
    twin
}

/// Generator for trial `i`: one seed apart per trial, on the noise model's
/// stream so distinct noise configurations can be decorrelated on demand.
fn trial_rng(s: &Scenario, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(s.base_seed.wrapping_add(trial));
    rng.set_stream(s.noise.seed);
    rng
}

/// Run one trial of the scenario (trial indices start at 0).
pub fn run_trial(s: &Scenario, trial: u64) -> Result<Trajectory> {
    let field = s.field.to_field()?;
    let mut rng = trial_rng(s, trial);
    run_seek(
        &field,
        &s.formation,
        &s.noise,
        &s.cfg,
        s.c0_vec(),
        &mut rng,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterStat {
    pub k: usize,
    pub mean_dist: f64,
    pub std_dist: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub per_iter: Vec<IterStat>,
    /// Trials cut short by estimator degeneracy; they contribute to the
    /// statistics only for the iterations they completed.
    pub aborted_trials: Vec<u64>,
}

impl RunStats {
    pub fn final_stat(&self) -> Option<&IterStat> {
        self.per_iter.last()
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    // identical samples (deterministic noise-free trials) must report
    // exactly zero spread, not summation roundoff
    if values.windows(2).all(|w| w[0] == w[1]) {
        return (values[0], 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-iteration distance statistics across the scenario's trials. A pure
/// function of the scenario: trial seeds are `base_seed + index`, and the
/// aggregation over the trial set is order-independent.
pub fn monte_carlo(s: &Scenario) -> Result<RunStats> {
    s.validate()?;
    let mut trials = Vec::with_capacity(s.trials);
    let mut aborted_trials = Vec::new();
    for trial in 0..s.trials as u64 {
        let traj = run_trial(s, trial)?;
        if traj.aborted.is_some() {
            aborted_trials.push(trial);
        }
        trials.push(
            traj.records
                .iter()
                .map(|r| r.dist_to_source)
                .collect::<Vec<f64>>(),
        );
    }
    let max_len = trials.iter().map(Vec::len).max().unwrap_or(0);
    let mut per_iter = Vec::with_capacity(max_len);
    let mut at_k = Vec::with_capacity(s.trials);
    for k in 0..max_len {
        at_k.clear();
        at_k.extend(trials.iter().filter_map(|t| t.get(k).copied()));
        let (mean_dist, std_dist) = mean_and_std(&at_k);
        per_iter.push(IterStat {
            k,
            mean_dist,
            std_dist,
        });
    }
    Ok(RunStats {
        per_iter,
        aborted_trials,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusTrace {
    pub d: f64,
    /// Estimation error norm per iteration.
    pub err: Vec<f64>,
}

impl RadiusTrace {
    pub fn time_averaged_err(&self) -> f64 {
        self.err.iter().sum::<f64>() / self.err.len() as f64
    }
}

/// One noise-free seek per radius, recording the gradient estimation error
/// at every iteration.
pub fn radius_sweep(base: &Scenario, radii: &[f64]) -> Result<Vec<RadiusTrace>> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    if let Some(bad) = radii.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "radii must be positive, got {bad}"
        )));
    }
    let mut traces = Vec::with_capacity(radii.len());
    for &d in radii {
        let mut s = base.clone();
        s.formation.d = d;
        s.noise = NoiseModel::noiseless(s.formation.n);
        let traj = run_trial(&s, 0)?;
        traces.push(RadiusTrace {
            d,
            err: traj.records.iter().map(|r| r.est_error_norm).collect(),
        });
    }
    Ok(traces)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DminRow {
    pub n: usize,
    pub sym_dmin: f64,
    pub cvt_dmin: f64,
}

const DMIN_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Closed-form ring-gap distance next to the tessellation's converged
/// minimum pairwise distance (mean over five Lloyd seeds), per robot count.
pub fn dmin_table(d: f64, ns: &[usize]) -> Result<Vec<DminRow>> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {d}"
        )));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let sym = symmetric_dmin(n, d)?;
        let mut acc = 0.0;
        for seed in DMIN_SEEDS {
            let res = compute_cvt(n, seed, &LloydConfig::for_n(n))?;
            let f = build_cvt_formation(&res.generators, Vec3::zeros(), d)?;
            acc += min_pairwise_distance(&f);
        }
        rows.push(DminRow {
            n,
            sym_dmin: sym,
            cvt_dmin: acc / DMIN_SEEDS.len() as f64,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRecord {
    pub k: usize,
    pub grad_true: Vec3,
    /// Symmetric-design estimate evaluated on the same measurements.
    pub sym: Vec3,
    /// Corrected estimate; this one drives the trajectory.
    pub cor: Vec3,
}

/// Both estimators evaluated side by side on the identical noise-free
/// trajectory, which the corrected estimate steers.
pub fn estimator_comparison(s: &Scenario) -> Result<Vec<ComparisonRecord>> {
    s.validate()?;
    if s.noise.nu.iter().any(|v| *v != 0.0) {
        return Err(Error::InvalidArgument(
            "estimator comparison requires a noise-free scenario".into(),
        ));
    }
    let field = s.field.to_field()?;
    let base = s.formation.instantiate(s.c0_vec())?;
    let offsets: Vec<Vec3> = base.offsets().collect();
    let moments = formation_moments(&base)?;
    let mut rng = trial_rng(s, 0);
    let mut records = Vec::with_capacity(s.cfg.max_iters + 1);
    let mut c = s.c0_vec();
    for k in 0..=s.cfg.max_iters {
        let formation = Formation {
            kind: s.formation.kind,
            positions: offsets.iter().map(|o| c + o).collect(),
            center: c,
            radius: s.formation.d,
        };
        let y = measure(&field, &formation.positions, &s.noise, &mut rng)?;
        let sym = grad_symmetric(&formation, &y, None)?.grad_hat;
        let sigma_c = if s.cfg.use_true_center {
            field.value(&c)
        } else {
            center_estimate(&y)?
        };
        let cor = grad_cvt(&formation, &y, sigma_c, &moments, None)?.grad_hat;
        records.push(ComparisonRecord {
            k,
            grad_true: field.gradient(&c),
            sym,
            cor,
        });
        if k == s.cfg.max_iters || cor.norm() <= s.cfg.stop_grad_tol {
            break;
        }
        c = ga_step(c, cor, s.cfg.epsilon, s.cfg.gamma)?;
    }
    Ok(records)
}

pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "k", "cx", "cy", "cz", "ghx", "ghy", "ghz", "gtx", "gty", "gtz", "dist", "err",
    ])?;
    for r in &traj.records {
        wtr.serialize((
            r.k,
            r.c.x,
            r.c.y,
            r.c.z,
            r.grad_hat.x,
            r.grad_hat.y,
            r.grad_hat.z,
            r.grad_true.x,
            r.grad_true.y,
            r.grad_true.z,
            r.dist_to_source,
            r.est_error_norm,
        ))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_monte_carlo_csv<W: Write>(mut w: W, stats: &RunStats) -> Result<()> {
    // comment line first: csv proper has no comment syntax
    writeln!(
        w,
        "# std_dist is the unbiased (n-1) sample standard deviation over trials"
    )?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["k", "mean_dist", "std_dist"])?;
    for s in &stats.per_iter {
        wtr.serialize((s.k, s.mean_dist, s.std_dist))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_radius_sweep_csv<W: Write>(w: W, traces: &[RadiusTrace]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["k", "D", "err"])?;
    for t in traces {
        for (k, err) in t.err.iter().enumerate() {
            wtr.serialize((k, t.d, err))?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_dmin_table_csv<W: Write>(w: W, rows: &[DminRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["N", "sym_dmin", "cvt_dmin"])?;
    for r in rows {
        wtr.serialize((r.n, r.sym_dmin, r.cvt_dmin))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(w: W, records: &[ComparisonRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "k", "gtx", "gty", "gtz", "symx", "symy", "symz", "corx", "cory", "corz",
    ])?;
    for r in records {
        wtr.serialize((
            r.k,
            r.grad_true.x,
            r.grad_true.y,
            r.grad_true.z,
            r.sym.x,
            r.sym.y,
            r.sym.z,
            r.cor.x,
            r.cor.y,
            r.cor.z,
        ))?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            pass,
            detail,
        }
    }
}

/// Reference minimum-distance values: ring-gap column and tessellation
/// column per robot count, at unit radius.
const TABLE1: [(usize, f64, f64); 4] = [
    (6, 1.00, 1.41),
    (8, 0.81, 1.14),
    (10, 0.68, 1.06),
    (20, 0.37, 0.76),
];

pub fn check_table1(rows: &[DminRow]) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for (n, sym_ref, cvt_ref) in TABLE1 {
        let Some(row) = rows.iter().find(|r| r.n == n) else {
            out.push(CheckOutcome::new(
                &format!("table1 N={n}"),
                false,
                "row missing".into(),
            ));
            continue;
        };
        let sym_ok = (row.sym_dmin - sym_ref).abs() <= 0.02;
        let cvt_ok = (row.cvt_dmin - cvt_ref).abs() <= 0.05;
        out.push(CheckOutcome::new(
            &format!("table1 N={n}"),
            sym_ok && cvt_ok,
            format!(
                "sym {:.4} vs {:.2} (tol 0.02), cvt {:.4} vs {:.2} (tol 0.05)",
                row.sym_dmin, sym_ref, row.cvt_dmin, cvt_ref
            ),
        ));
    }
    out
}

pub fn check_fig4(traces: &[RadiusTrace]) -> Vec<CheckOutcome> {
    let mut sorted: Vec<&RadiusTrace> = traces.iter().collect();
    sorted.sort_by(|a, b| a.d.total_cmp(&b.d));
    let tavg: Vec<f64> = sorted.iter().map(|t| t.time_averaged_err()).collect();
    let finals: Vec<f64> = sorted
        .iter()
        .map(|t| *t.err.last().unwrap_or(&f64::NAN))
        .collect();
    let mut out = Vec::new();
    let ordered = tavg.windows(2).all(|w| w[0] < w[1]);
    out.push(CheckOutcome::new(
        "fig4 time-averaged error grows with radius",
        ordered,
        format!("{tavg:.6?}"),
    ));
    let final_min_first = finals.iter().skip(1).all(|e| finals[0] < *e);
    out.push(CheckOutcome::new(
        "fig4 final error minimal at the smallest radius",
        final_min_first,
        format!("{finals:.6?}"),
    ));
    out
}

pub fn check_fig3(records: &[ComparisonRecord]) -> Vec<CheckOutcome> {
    let n = records.len() as f64;
    let tavg_sym = records
        .iter()
        .map(|r| (r.sym - r.grad_true).norm())
        .sum::<f64>()
        / n;
    let tavg_cor = records
        .iter()
        .map(|r| (r.cor - r.grad_true).norm())
        .sum::<f64>()
        / n;
    let mut out = Vec::new();
    out.push(CheckOutcome::new(
        "fig3 corrected estimate tracks the gradient more closely",
        tavg_cor <= tavg_sym,
        format!("time-averaged error: corrected {tavg_cor:.6}, symmetric {tavg_sym:.6}"),
    ));
    if let Some(last) = records.last() {
        let sym_final = (last.sym - last.grad_true).norm();
        let cor_final = (last.cor - last.grad_true).norm();
        let peak = records
            .iter()
            .map(|r| r.grad_true.norm())
            .fold(0.0f64, f64::max);
        out.push(CheckOutcome::new(
            "fig3 both estimates settle near the vanishing gradient",
            sym_final <= 0.05 * peak && cor_final <= 0.05 * peak,
            format!(
                "final errors {sym_final:.6} / {cor_final:.6} against peak gradient {peak:.6}"
            ),
        ));
    }
    out
}

pub fn check_fig5_uniform(cvt: &RunStats, sym: &RunStats) -> Vec<CheckOutcome> {
    let (Some(a), Some(b)) = (cvt.final_stat(), sym.final_stat()) else {
        return vec![CheckOutcome::new("fig5-uniform", false, "empty stats".into())];
    };
    let gap = (a.mean_dist - b.mean_dist).abs();
    let allowed = 0.2 * a.mean_dist.max(b.mean_dist);
    vec![CheckOutcome::new(
        "fig5-uniform final mean distances within 20%",
        gap <= allowed,
        format!(
            "cvt {:.4}, sym {:.4}, gap {gap:.4} vs allowed {allowed:.4}",
            a.mean_dist, b.mean_dist
        ),
    )]
}

pub fn check_fig5_faulty(cvt: &RunStats, sym: &RunStats) -> Vec<CheckOutcome> {
    let (Some(a), Some(b)) = (cvt.final_stat(), sym.final_stat()) else {
        return vec![CheckOutcome::new("fig5-faulty", false, "empty stats".into())];
    };
    vec![
        CheckOutcome::new(
            "fig5-faulty corrected design ends no farther out",
            a.mean_dist <= b.mean_dist,
            format!("final mean: cvt {:.4}, sym {:.4}", a.mean_dist, b.mean_dist),
        ),
        CheckOutcome::new(
            "fig5-faulty corrected design ends no more spread out",
            a.std_dist <= b.std_dist,
            format!("final std: cvt {:.4}, sym {:.4}", a.std_dist, b.std_dist),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_scenario() -> Scenario {
        Scenario {
            name: "tiny".into(),
            field: FieldSpec::from_field(&sigma1()),
            formation: FormationTemplate {
                kind: FormationKind::Symmetric,
                n: 6,
                d: 1.0,
                generator_seed: 0,
            },
            noise: NoiseModel::noiseless(6),
            cfg: SeekConfig {
                epsilon: 1.0,
                gamma: 0.1,
                max_iters: 15,
                stop_grad_tol: 0.0,
                estimator_method: EstimatorMethod::Symmetric,
                use_true_center: false,
            },
            c0: [10.0, 0.0, 0.0],
            trials: 10,
            base_seed: 7,
        }
    }

    #[test]
    fn builtins_match_the_reference_setup() {
        let all = builtin_scenarios();
        let names: Vec<&str> = all.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            ["fig1", "fig3", "fig4", "fig5-uniform", "fig5-faulty"]
        );
        for s in &all {
            s.validate().unwrap();
        }
        let fig1 = builtin_scenario("fig1").unwrap();
        assert_eq!(fig1.formation.n, 7);
        assert_eq!(fig1.formation.d, 4.0);
        assert!(fig1.noise.nu.iter().all(|v| *v == 0.0));
        let fig5 = builtin_scenario("fig5-uniform").unwrap();
        assert_eq!(fig5.trials, 100);
        assert_eq!(fig5.field.a, 1.0);
        assert_eq!(fig5.noise.nu, vec![0.1; 8]);
        let faulty = builtin_scenario("fig5-faulty").unwrap();
        assert_eq!(faulty.noise.nu[0], 0.5);
        assert_eq!(&faulty.noise.nu[1..], &[0.1; 7]);
        assert!(builtin_scenario("fig9000").is_none());
    }

    #[test]
    fn start_points_sit_on_the_decay_shell() {
        let fig1 = builtin_scenario("fig1").unwrap();
        let f1 = fig1.field.to_field().unwrap();
        let v = f1.value(&fig1.c0_vec());
        assert!((v - 100.0 * (-2.0f64).exp()).abs() <= 1e-9, "{v}");
        let fig5 = builtin_scenario("fig5-uniform").unwrap();
        let f2 = fig5.field.to_field().unwrap();
        let v = f2.value(&fig5.c0_vec());
        assert!((v - (-2.0f64).exp()).abs() <= 1e-12, "{v}");
    }

    #[test]
    fn scenarios_round_trip_through_json() {
        for s in builtin_scenarios() {
            let text = s.to_json().unwrap();
            let back = Scenario::from_json(&text).unwrap();
            assert_eq!(s, back);
        }
    }

    #[test]
    fn malformed_scenarios_are_rejected() {
        let mut s = tiny_scenario();
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = tiny_scenario();
        s.noise = NoiseModel::noiseless(5);
        assert!(s.validate().is_err());
        let mut s = tiny_scenario();
        s.field.s[0][1] = 99.0; // breaks symmetry
        assert!(s.validate().is_err());
        assert!(Scenario::from_json("{").is_err());
    }

    #[test]
    fn noiseless_trials_have_exactly_zero_spread() {
        let stats = monte_carlo(&tiny_scenario()).unwrap();
        assert_eq!(stats.per_iter.len(), 16);
        assert!(stats.aborted_trials.is_empty());
        for s in &stats.per_iter {
            assert_eq!(s.std_dist, 0.0, "k={}", s.k);
        }
    }

    #[test]
    fn monte_carlo_is_a_pure_function_of_the_scenario() {
        let mut s = tiny_scenario();
        s.noise = NoiseModel::uniform(6, 0.2);
        let a = monte_carlo(&s).unwrap();
        let b = monte_carlo(&s).unwrap();
        assert_eq!(a, b);
        s.base_seed += 1;
        let c = monte_carlo(&s).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn twin_swaps_design_but_keeps_the_randomness() {
        let s = builtin_scenario("fig5-faulty").unwrap();
        let twin = symmetric_twin(&s);
        assert_eq!(twin.formation.kind, FormationKind::Symmetric);
        assert_eq!(twin.cfg.estimator_method, EstimatorMethod::Symmetric);
        assert_eq!(twin.base_seed, s.base_seed);
        assert_eq!(twin.noise, s.noise);
        assert_eq!(twin.c0, s.c0);
        assert_eq!(twin.name, "fig5-faulty-sym");
    }

    #[test]
    fn radius_sweep_orders_time_averaged_error() {
        let mut base = tiny_scenario();
        base.formation = FormationTemplate {
            kind: FormationKind::Cvt,
            n: 7,
            d: 1.0,
            generator_seed: 1,
        };
        base.noise = NoiseModel::noiseless(7);
        base.cfg.estimator_method = EstimatorMethod::Corrected;
        base.cfg.max_iters = 300;
        base.c0 = [0.0, 30.0, 0.0];
        let traces = radius_sweep(&base, &[1.0, 4.0]).unwrap();
        assert!(traces[0].time_averaged_err() < traces[1].time_averaged_err());

        let twice = radius_sweep(&base, &[2.0, 2.0]).unwrap();
        assert_eq!(twice[0], twice[1]);

        assert!(radius_sweep(&base, &[]).is_err());
        assert!(radius_sweep(&base, &[0.0]).is_err());
    }

    #[test]
    fn comparison_favors_the_corrected_estimator() {
        let mut s = tiny_scenario();
        s.formation = FormationTemplate {
            kind: FormationKind::Cvt,
            n: 7,
            d: 4.0,
            generator_seed: 1,
        };
        s.noise = NoiseModel::noiseless(7);
        s.cfg.estimator_method = EstimatorMethod::Corrected;
        s.cfg.max_iters = 300;
        s.c0 = [0.0, 30.0, 0.0];
        let records = estimator_comparison(&s).unwrap();
        assert_eq!(records.len(), 301);
        let outcomes = check_fig3(&records);
        assert!(
            outcomes[0].pass,
            "corrected should beat symmetric: {}",
            outcomes[0].detail
        );

        s.noise = NoiseModel::uniform(7, 0.1);
        assert!(estimator_comparison(&s).is_err());
    }

    #[test]
    fn dmin_rows_match_the_reference_values() {
        let rows = dmin_table(1.0, &[6]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].sym_dmin - 1.0).abs() <= 1e-12);
        assert!((rows[0].cvt_dmin - 1.41).abs() <= 0.05);
        assert!(dmin_table(1.0, &[7]).is_err());
        assert!(dmin_table(0.0, &[6]).is_err());
    }

    #[test]
    fn csv_outputs_are_byte_deterministic() {
        let s = tiny_scenario();
        let traj = run_trial(&s, 0).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trajectory_csv(&mut a, &traj).unwrap();
        write_trajectory_csv(&mut b, &traj).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("k,cx,cy,cz,ghx,ghy,ghz,gtx,gty,gtz,dist,err\n"));
        assert_eq!(text.lines().count(), 1 + traj.records.len());

        let stats = monte_carlo(&s).unwrap();
        let mut buf = Vec::new();
        write_monte_carlo_csv(&mut buf, &stats).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# std_dist is the unbiased"));
        assert!(text.contains("k,mean_dist,std_dist"));
    }

    #[test]
    fn table_and_sweep_csv_columns() {
        let rows = [DminRow {
            n: 6,
            sym_dmin: 1.0,
            cvt_dmin: 1.41,
        }];
        let mut buf = Vec::new();
        write_dmin_table_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "N,sym_dmin,cvt_dmin\n6,1.0,1.41\n"
        );

        let traces = [RadiusTrace {
            d: 2.0,
            err: vec![0.5, 0.25],
        }];
        let mut buf = Vec::new();
        write_radius_sweep_csv(&mut buf, &traces).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "k,D,err\n0,2.0,0.5\n1,2.0,0.25\n"
        );
    }

    #[test]
    fn fig5_checks_judge_synthetic_stats_correctly() {
        let stats = |mean: f64, std: f64| RunStats {
            per_iter: vec![IterStat {
                k: 0,
                mean_dist: mean,
                std_dist: std,
            }],
            aborted_trials: vec![],
        };
        let ok = check_fig5_uniform(&stats(5.0, 1.0), &stats(5.5, 1.0));
        assert!(ok[0].pass);
        let bad = check_fig5_uniform(&stats(5.0, 1.0), &stats(9.0, 1.0));
        assert!(!bad[0].pass);

        let ok = check_fig5_faulty(&stats(4.0, 1.0), &stats(5.0, 2.0));
        assert!(ok.iter().all(|c| c.pass));
        let bad = check_fig5_faulty(&stats(6.0, 1.0), &stats(5.0, 2.0));
        assert!(!bad[0].pass && bad[1].pass);
    }

    #[test]
    fn table1_check_flags_out_of_tolerance_rows() {
        let good = dmin_table_reference();
        assert!(check_table1(&good).iter().all(|c| c.pass));
        let mut bad = good.clone();
        bad[0].cvt_dmin = 1.6;
        let outcomes = check_table1(&bad);
        assert!(!outcomes[0].pass);
        assert!(outcomes[1..].iter().all(|c| c.pass));
    }

    fn dmin_table_reference() -> Vec<DminRow> {
        vec![
            DminRow {
                n: 6,
                sym_dmin: 1.0,
                cvt_dmin: 1.41,
            },
            DminRow {
                n: 8,
                sym_dmin: 0.8165,
                cvt_dmin: 1.14,
            },
            DminRow {
                n: 10,
                sym_dmin: 0.6788,
                cvt_dmin: 1.06,
            },
            DminRow {
                n: 20,
                sym_dmin: 0.3568,
                cvt_dmin: 0.76,
            },
        ]
    }
}
