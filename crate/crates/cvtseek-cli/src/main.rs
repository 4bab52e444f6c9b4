//! `cvtseek`: formation generation, diagnostics, seeking runs, and named
//! experiment reproduction. Stdout is for humans; files under --out are the
//! machine-readable record. Every command is deterministic in its flags.
//!
//! Exit codes: 0 success, 1 i/o trouble, 2 bad arguments or inputs,
//! 3 tessellation hit its iteration cap, 4 estimator degeneracy,
//! 5 experiment assertion failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cvtseek::cvt::{compute_cvt, LloydConfig};
use cvtseek::formation::{
    build_cvt_formation, formation_moments, min_pairwise_distance, Formation, FormationKind,
};
use cvtseek::harness::{
    builtin_scenario, builtin_scenarios, check_fig3, check_fig4, check_fig5_faulty,
    check_fig5_uniform, check_table1, dmin_table, estimator_comparison, monte_carlo, radius_sweep,
    run_trial, symmetric_twin, write_comparison_csv, write_dmin_table_csv, write_monte_carlo_csv,
    write_radius_sweep_csv, write_trajectory_csv, CheckOutcome, Scenario,
};
use cvtseek::seeker::FormationTemplate;
use cvtseek::{Error, Vec3};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cvtseek", version, about = "Spherical-formation source seeking toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KindArg {
    Symmetric,
    Cvt,
}

impl From<KindArg> for FormationKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Symmetric => FormationKind::Symmetric,
            KindArg::Cvt => FormationKind::Cvt,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a converged generator set on the unit sphere
    Cvt {
        /// Number of generators (at least 4)
        #[arg(long)]
        n: usize,
        /// Initialization seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build a formation at the origin and write its positions
    Formation {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Number of robots
        #[arg(long)]
        n: usize,
        /// Formation radius
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        /// Generator seed (cvt kind only)
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run one source-seeking trial of a scenario (builtin name or JSON path)
    Run {
        /// Builtin scenario name (fig1, fig3, fig4, fig5-uniform, fig5-faulty)
        /// or path to a scenario JSON file
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's iteration budget
        #[arg(long)]
        max_iters: Option<usize>,
        /// Override the scenario's base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Feed the corrected estimator the analytic center value instead of
        /// the measurement mean
        #[arg(long)]
        true_center_value: bool,
    },
    /// Reproduce a named experiment, write its CSVs, check its assertions
    Experiment {
        /// One of: table1, fig3, fig4, fig5-uniform, fig5-faulty
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the trial count (fig5 experiments)
        #[arg(long)]
        trials: Option<usize>,
        /// Override the base seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the second-moment diagnostics of a formation
    Diagnose {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Number of robots
        #[arg(long)]
        n: usize,
        /// Formation radius
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        /// Generator seed (cvt kind only)
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Failure that carries its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::DegeneratePoint { .. } | Error::Json(_) => 2,
            Error::DegenerateFormation(_) => 4,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Cvt { n, seed, out } => cmd_cvt(n, seed, &out),
        Cmd::Formation {
            kind,
            n,
            d,
            seed,
            out,
        } => cmd_formation(kind.into(), n, d, seed, &out),
        Cmd::Run {
            scenario,
            out,
            max_iters,
            seed,
            true_center_value,
        } => cmd_run(&scenario, &out, max_iters, seed, true_center_value),
        Cmd::Experiment {
            name,
            out,
            trials,
            seed,
        } => cmd_experiment(&name, &out, trials, seed),
        Cmd::Diagnose { kind, n, d, seed } => cmd_diagnose(kind.into(), n, d, seed),
    }
}

fn ensure_out(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| {
        Failure::new(1, format!("cannot create output directory {}: {e}", out.display()))
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn triple(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn kind_slug(kind: FormationKind) -> &'static str {
    match kind {
        FormationKind::Symmetric => "symmetric",
        FormationKind::Cvt => "cvt",
    }
}

#[derive(Serialize)]
struct CvtArtifact {
    n: usize,
    seed: u64,
    iterations: usize,
    converged: bool,
    final_displacement: f64,
    energy: f64,
    d_min_unit_radius: f64,
    generators: Vec<[f64; 3]>,
}

fn cmd_cvt(n: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    let res = compute_cvt(n, seed, &LloydConfig::for_n(n))?;
    let formation = build_cvt_formation(&res.generators, Vec3::zeros(), 1.0)?;
    let d_min = min_pairwise_distance(&formation);
    let artifact = CvtArtifact {
        n,
        seed,
        iterations: res.iterations,
        converged: res.converged,
        final_displacement: res.final_displacement,
        energy: res.energy,
        d_min_unit_radius: d_min,
        generators: res.generators.generators.iter().map(triple).collect(),
    };
    println!(
        "cvt N={n} seed={seed}: converged={} after {} iterations, final displacement {:.3e}, energy {:.6}, d_min {:.4} at unit radius",
        res.converged, res.iterations, res.final_displacement, res.energy, d_min
    );
    ensure_out(out)?;
    let path = out.join(format!("cvt_n{n}_seed{seed}.json"));
    let mut text = serde_json::to_string_pretty(&artifact).map_err(Error::from)?;
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    if !res.converged {
        return Err(Failure::new(
            3,
            format!(
                "tessellation did not reach the displacement tolerance within {} iterations",
                res.iterations
            ),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct FormationArtifact {
    kind: FormationKind,
    n: usize,
    d: f64,
    seed: u64,
    center: [f64; 3],
    d_min: f64,
    positions: Vec<[f64; 3]>,
}

fn build_formation(kind: FormationKind, n: usize, d: f64, seed: u64) -> Result<Formation, Failure> {
    let template = FormationTemplate {
        kind,
        n,
        d,
        generator_seed: seed,
    };
    Ok(template.instantiate(Vec3::zeros())?)
}

fn cmd_formation(
    kind: FormationKind,
    n: usize,
    d: f64,
    seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let f = build_formation(kind, n, d, seed)?;
    let d_min = min_pairwise_distance(&f);
    let artifact = FormationArtifact {
        kind,
        n,
        d,
        seed,
        center: triple(&f.center),
        d_min,
        positions: f.positions.iter().map(triple).collect(),
    };
    println!("formation {} N={n} D={d}: d_min {d_min:.4}", kind_slug(kind));
    ensure_out(out)?;
    let path = out.join(format!("formation_{}_n{n}_seed{seed}.json", kind_slug(kind)));
    let mut text = serde_json::to_string_pretty(&artifact).map_err(Error::from)?;
    text.push('\n');
    write_file(&path, text.as_bytes())
}

/// `--scenario` accepts a builtin name first, a file path second.
fn resolve_scenario(arg: &str) -> Result<Scenario, Failure> {
    if let Some(s) = builtin_scenario(arg) {
        return Ok(s);
    }
    let path = Path::new(arg);
    if !path.exists() {
        let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
        return Err(Failure::new(
            2,
            format!(
                "'{arg}' is neither a builtin scenario ({}) nor an existing file",
                names.join(", ")
            ),
        ));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))?;
    Ok(Scenario::from_json(&text)?)
}

fn cmd_run(
    scenario: &str,
    out: &Path,
    max_iters: Option<usize>,
    seed: Option<u64>,
    true_center_value: bool,
) -> Result<(), Failure> {
    let mut s = resolve_scenario(scenario)?;
    if let Some(m) = max_iters {
        s.cfg.max_iters = m;
    }
    if let Some(b) = seed {
        s.base_seed = b;
    }
    if true_center_value {
        s.cfg.use_true_center = true;
    }
    s.validate()?;

    let traj = run_trial(&s, 0)?;
    ensure_out(out)?;
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &traj).map_err(Failure::from)?;
    let path = out.join(format!("{}-trajectory.csv", s.name));
    write_file(&path, &buf)?;

    if let Some(rec) = traj.final_record() {
        let mean_err = traj
            .records
            .iter()
            .map(|r| r.est_error_norm)
            .sum::<f64>()
            / traj.records.len() as f64;
        println!(
            "run {}: {} records, final distance {:.4}, mean estimation error {:.6}",
            s.name,
            traj.records.len(),
            rec.dist_to_source,
            mean_err
        );
    }
    if let Some(reason) = &traj.aborted {
        return Err(Failure::new(4, format!("run aborted: {reason}")));
    }
    Ok(())
}

fn report(checks: &[CheckOutcome]) -> Result<(), Failure> {
    let mut failures = 0;
    for c in checks {
        let tag = if c.pass { "[PASS]" } else { "[FAIL]" };
        println!("{tag} {}: {}", c.name, c.detail);
        if !c.pass {
            failures += 1;
        }
    }
    if failures > 0 {
        Err(Failure::new(5, format!("{failures} check(s) failed")))
    } else {
        Ok(())
    }
}

fn cmd_experiment(
    name: &str,
    out: &Path,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    ensure_out(out)?;
    let override_scenario = |mut s: Scenario| {
        if let Some(t) = trials {
            s.trials = t;
        }
        if let Some(b) = seed {
            s.base_seed = b;
        }
        s
    };
    let must = |n: &str| {
        builtin_scenario(n).ok_or_else(|| Failure::new(2, format!("missing builtin scenario {n}")))
    };
    match name {
        "table1" => {
            let rows = dmin_table(1.0, &[6, 8, 10, 20])?;
            let mut buf = Vec::new();
            write_dmin_table_csv(&mut buf, &rows).map_err(Failure::from)?;
            write_file(&out.join("table1-dmin.csv"), &buf)?;
            report(&check_table1(&rows))
        }
        "fig3" => {
            let s = override_scenario(must("fig3")?);
            let records = estimator_comparison(&s)?;
            let mut buf = Vec::new();
            write_comparison_csv(&mut buf, &records).map_err(Failure::from)?;
            write_file(&out.join("fig3-estimators.csv"), &buf)?;
            report(&check_fig3(&records))
        }
        "fig4" => {
            let s = override_scenario(must("fig4")?);
            let traces = radius_sweep(&s, &[1.0, 4.0, 7.0])?;
            let mut buf = Vec::new();
            write_radius_sweep_csv(&mut buf, &traces).map_err(Failure::from)?;
            write_file(&out.join("fig4-radius-sweep.csv"), &buf)?;
            report(&check_fig4(&traces))
        }
        "fig5-uniform" | "fig5-faulty" => {
            let s = override_scenario(must(name)?);
            let twin = symmetric_twin(&s);
            let cvt_stats = monte_carlo(&s)?;
            let sym_stats = monte_carlo(&twin)?;
            for (stats, arm) in [(&cvt_stats, "cvt"), (&sym_stats, "sym")] {
                let mut buf = Vec::new();
                write_monte_carlo_csv(&mut buf, stats).map_err(Failure::from)?;
                write_file(&out.join(format!("{name}-{arm}.csv")), &buf)?;
            }
            let checks = if name == "fig5-uniform" {
                check_fig5_uniform(&cvt_stats, &sym_stats)
            } else {
                check_fig5_faulty(&cvt_stats, &sym_stats)
            };
            report(&checks)
        }
        other => Err(Failure::new(
            2,
            format!("unknown experiment '{other}'; expected table1, fig3, fig4, fig5-uniform, or fig5-faulty"),
        )),
    }
}

fn cmd_diagnose(kind: FormationKind, n: usize, d: f64, seed: u64) -> Result<(), Failure> {
    let f = build_formation(kind, n, d, seed)?;
    let m = formation_moments(&f)?;
    println!("formation {} N={n} D={d} seed={seed}", kind_slug(kind));
    println!("  d_min            {:.6}", min_pairwise_distance(&f));
    println!(
        "  r_bar            [{:.3e}, {:.3e}, {:.3e}]  (norm {:.3e})",
        m.r_bar.x,
        m.r_bar.y,
        m.r_bar.z,
        m.r_bar.norm()
    );
    for (i, label) in ["M row 0", "M row 1", "M row 2"].iter().enumerate() {
        println!(
            "  {label}          [{:+.6}, {:+.6}, {:+.6}]",
            m.m[(i, 0)],
            m.m[(i, 1)],
            m.m[(i, 2)]
        );
    }
    println!(
        "  anisotropy norm  {:.6}  (ideal 0)",
        cvtseek::geometry::sym_spectral_norm(&m.m_alpha)
    );
    println!("  iso norm         {:.6}  (ideal 1)", m.iso_norm);
    println!("  condition of M   {:.6}", m.cond_m);
    Ok(())
}
