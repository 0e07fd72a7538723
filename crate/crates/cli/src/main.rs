//! Config-driven command line for the modular-function toolkit: structural
//! checks, conjugate tables, operator verification, parabolic solves, the
//! theta/n continuation and run diagnostics, all emitting CSV reports plus a
//! run manifest.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use orlicz::diagnostics::{
    apriori_bounds, energy_residual, measure_decay, radiation_profile, renormalized_suite,
};
use orlicz::grid::Domain;
use orlicz::mollify::truncate_field;
use orlicz::nfunction::{
    build_minorant, check_condition_m, check_delta2, check_nfunction, x_lattice, ConditionMParams,
};
use orlicz::operators::{
    check_coercivity_a2, check_conjugate_domination, check_fenchel_young_equality,
    check_monotonicity_a3, Regularizer,
};
use orlicz::report::{fmt_f64, DiagnosticsReport, Table, Verdict};
use orlicz::solver::{solve_parabolic, staircase};
use orlicz::{OrliczError, Result};

#[derive(Parser)]
#[command(name = "orlicz", version, about = "Modular-function toolkit and parabolic solver")]
struct Cli {
    /// Path to the experiment TOML file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker cap for concurrent sub-experiments.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Verify the modular-function axioms and growth conditions.
    CheckNfunction,
    /// Tabulate the numerical conjugate along the first axis.
    Conjugate,
    /// Verify coercivity, monotonicity and conjugate domination.
    CheckOperator,
    /// Run one implicit-Euler solve and export the solution.
    Solve,
    /// Run the theta/n continuation with Cauchy-trend bookkeeping.
    Staircase,
    /// Solve and evaluate every enabled diagnostic.
    Diagnose,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckNfunction => "check-nfunction",
            Command::Conjugate => "conjugate",
            Command::CheckOperator => "check-operator",
            Command::Solve => "solve",
            Command::Staircase => "staircase",
            Command::Diagnose => "diagnose",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("configuration error: --config <path> is required");
            return ExitCode::from(2);
        }
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("configuration error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match config::load_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("configuration error: cannot create {}: {e}", out_dir.display());
        return ExitCode::from(2);
    }
    match run(cli.command, &cfg, &out_dir) {
        Ok(reports) => {
            let all_pass = reports.iter().all(|r| r.passed());
            for r in &reports {
                println!("{}: {}", r.name, r.verdict);
                if let Err(e) = write_report(&out_dir, r) {
                    eprintln!("error writing report {}: {e}", r.name);
                    return ExitCode::from(1);
                }
            }
            if let Err(e) = write_manifest(&out_dir, cli.command, &cfg, &text, cli.jobs, started) {
                eprintln!("error writing manifest: {e}");
                return ExitCode::from(1);
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ OrliczError::Config(_)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_report(dir: &Path, report: &DiagnosticsReport) -> Result<()> {
    let path = dir.join(format!("{}.csv", report.name));
    std::fs::write(path, report.to_csv_string())?;
    Ok(())
}

/// FNV-1a over the raw config text, hex-encoded.
fn digest(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn write_manifest(
    dir: &Path,
    command: Command,
    cfg: &ExperimentConfig,
    text: &str,
    jobs: usize,
    started: Instant,
) -> Result<()> {
    let wall_ms = started.elapsed().as_millis();
    let unix_secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let body = format!(
        "key,value\ncommand,{}\nconfig_digest,{}\nversion,{}\nseed,{}\njobs,{}\nwall_ms,{}\nunix_time,{}\n",
        command.name(),
        digest(text),
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        jobs,
        wall_ms,
        unix_secs,
    );
    std::fs::write(dir.join("manifest.csv"), body)?;
    Ok(())
}

fn run(command: Command, cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<DiagnosticsReport>> {
    match command {
        Command::CheckNfunction => run_check_nfunction(cfg),
        Command::Conjugate => run_conjugate(cfg),
        Command::CheckOperator => run_check_operator(cfg),
        Command::Solve => run_solve(cfg, out_dir),
        Command::Staircase => run_staircase(cfg),
        Command::Diagnose => run_diagnose(cfg),
    }
}

fn unit_domain(dim: usize) -> Domain {
    if dim == 1 {
        Domain::line(1.0)
    } else {
        Domain::rect(1.0, 1.0)
    }
}

fn run_check_nfunction(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsReport>> {
    let m = cfg.build_nfunction()?;
    let domain = unit_domain(m.dim);
    let samples = x_lattice(&domain, 8);
    let mut reports = vec![check_nfunction(&m, &samples)];
    reports.push(check_delta2(&m, &samples, 1e3));
    if m.is_radial() && m.is_x_dependent() {
        reports.push(check_condition_m(&m, &domain, &ConditionMParams::default())?);
    }
    Ok(reports)
}

fn run_conjugate(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsReport>> {
    let m = cfg.build_nfunction()?;
    let x = [0.5, 0.5];
    let mut rep = DiagnosticsReport::new("conjugate_table");
    let mut table = Table::new("conjugate", &["eta", "m_star"]);
    let pts = cfg.conjugate.points;
    for i in 1..=pts {
        let eta = cfg.conjugate.eta_max * i as f64 / pts as f64;
        table.push(vec![eta, m.conjugate_value(x, [eta, 0.0])?]);
    }
    rep.tables.push(table);
    rep.verdict = Verdict::Informational;
    Ok(vec![rep])
}

fn run_check_operator(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsReport>> {
    let a = cfg.build_operator()?;
    let samples = x_lattice(&unit_domain(a.governing_m.dim), 6);
    let mut reports = vec![
        check_coercivity_a2(&a, &samples)?,
        check_monotonicity_a3(&a, 200, cfg.seed),
        check_conjugate_domination(&a, &samples, a.c_a, 10.0)?,
    ];
    let reg = Regularizer::default_for(&a.governing_m, &samples);
    reports.push(check_fenchel_young_equality(&reg, &[0.1, 1.0, 5.0]));
    Ok(reports)
}

fn truncated_data(spec: &orlicz::solver::ProblemSpec, n: f64) -> (orlicz::SpatialField, orlicz::SpatialField) {
    let g = spec.grid();
    let f_n = truncate_field(&spec.f, n);
    let mut u0_n = truncate_field(&spec.u0, n);
    for i in 0..g.num_nodes() {
        if g.is_boundary(i) {
            u0_n.values[i] = 0.0;
        }
    }
    (f_n, u0_n)
}

fn run_solve(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<DiagnosticsReport>> {
    let spec = cfg.build_problem()?;
    let s = &cfg.solver;
    let (u, solve_rep) = solve_parabolic(&spec, s.theta, s.n, s.tol)?;
    write_solution_csv(&out_dir.join("solution.csv"), &u)?;
    let a_theta = spec.regularized(s.theta)?;
    let (f_n, u0_n) = truncated_data(&spec, s.n);
    let mut reports = vec![energy_residual(&u, &a_theta, &f_n, &u0_n)];
    let mut run_rep = DiagnosticsReport::new("solve_run");
    run_rep.metric("max_step_residual", solve_rep.max_residual());
    run_rep.metric(
        "max_newton_iters",
        solve_rep.newton_iters.iter().copied().max().unwrap_or(0) as f64,
    );
    run_rep.tolerance("tol", s.tol);
    run_rep.verdict = if solve_rep.max_residual() <= s.tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    reports.push(run_rep);
    Ok(reports)
}

fn write_solution_csv(path: &Path, u: &orlicz::GridFunction) -> Result<()> {
    let g = u.space;
    let dt = u.time.dt();
    let mut body = String::new();
    if g.dim() == 1 {
        body.push_str("t,x1,u\n");
    } else {
        body.push_str("t,x1,x2,u\n");
    }
    for (k, lv) in u.levels.iter().enumerate() {
        let t = k as f64 * dt;
        for i in 0..g.num_nodes() {
            let p = g.node_pos(i);
            if g.dim() == 1 {
                body.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(t),
                    fmt_f64(p[0]),
                    fmt_f64(lv.values[i])
                ));
            } else {
                body.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(t),
                    fmt_f64(p[0]),
                    fmt_f64(p[1]),
                    fmt_f64(lv.values[i])
                ));
            }
        }
    }
    std::fs::write(path, body)?;
    Ok(())
}

fn run_staircase(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsReport>> {
    let spec = cfg.build_problem()?;
    let s = &cfg.solver;
    if s.theta_list.is_empty() {
        return Err(OrliczError::Config(
            "solver.theta_list is required for the staircase command".into(),
        ));
    }
    let n_list = if s.n_list.is_empty() { vec![s.n] } else { s.n_list.clone() };
    let k_list = if s.k_list.is_empty() { vec![1.0, 2.0] } else { s.k_list.clone() };
    let rep = staircase(&spec, &s.theta_list, &n_list, &k_list, s.tol)?;
    let mut out = DiagnosticsReport::new("staircase");
    let mut theta_table = Table::new("theta_distances", &["n", "step", "distance"]);
    let mut monotone = true;
    for (n, dists) in &rep.theta_distances {
        for (i, d) in dists.iter().enumerate() {
            theta_table.push(vec![*n, i as f64, *d]);
        }
        if dists.windows(2).any(|w| w[1] > w[0]) {
            monotone = false;
        }
    }
    let mut trunc_table = Table::new("truncation_distances", &["k", "step", "distance"]);
    for (k, dists) in &rep.truncation_distances {
        for (i, d) in dists.iter().enumerate() {
            trunc_table.push(vec![*k, i as f64, *d]);
        }
    }
    out.tables.push(theta_table);
    out.tables.push(trunc_table);
    out.tables.push(rep.modular_bounds.clone());
    out.metric("max_modular_slack", rep.max_slack);
    out.metric("theta_distances_monotone", if monotone { 1.0 } else { 0.0 });
    out.tolerance("modular_slack", 1.0);
    out.verdict = if rep.max_slack <= 1.0 && monotone { Verdict::Pass } else { Verdict::Fail };
    Ok(vec![out])
}

fn run_diagnose(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsReport>> {
    let spec = cfg.build_problem()?;
    let s = &cfg.solver;
    let d = &cfg.diagnostics;
    let (u, _) = solve_parabolic(&spec, s.theta, s.n, s.tol)?;
    let a_theta = spec.regularized(s.theta)?;
    let (f_n, u0_n) = truncated_data(&spec, s.n);
    let mut reports = Vec::new();
    if d.energy {
        reports.push(energy_residual(&u, &a_theta, &f_n, &u0_n));
    }
    if d.apriori {
        reports.push(apriori_bounds(&u, &spec, s.theta, s.n)?);
    }
    if d.radiation {
        reports.push(radiation_profile(&u, &a_theta, d.l_max, d.tail_fraction));
    }
    if d.renormalized {
        reports.push(renormalized_suite(&u, &a_theta, &f_n, &u0_n, d.renorm_level)?);
    }
    if d.measure {
        let minorant = build_minorant(
            &spec.a.governing_m,
            &x_lattice(&spec.grid().domain, 4),
            2.0,
        )?;
        let l_list: Vec<f64> = (1..=d.l_max.max(2)).map(|l| l as f64).collect();
        reports.push(measure_decay(&u, &l_list, &minorant));
    }
    Ok(reports)
}
