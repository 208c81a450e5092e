//! `sweep`: run, converge, verify, crowd and field subcommands over JSON
//! scenario files.
//!
//! Exit codes: 0 success, 1 invalid input (parse errors, step counts below
//! the step rule, too few step counts), 2 solver failure, 3 failed audit or
//! verification.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use sweep_core::analysis::{audit_trajectory, check_equation_equivalence, check_stability, run_suite, CheckReport, SUITES};
use sweep_core::catchup::{convergence_study, integrate};
use sweep_core::crowd::simulate_crowd;
use sweep_core::output::{convergence_csv, field_csv, frames_csv, trajectory_csv};
use sweep_core::scenario::Scenario;
use sweep_core::{Error, SolverOptions};

#[derive(Parser)]
#[command(name = "sweep", version, about = "Catching-up integrator for sweeping processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (JSON, schema sweep-scenario/1).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and audit the run.
    Run {
        #[command(flatten)]
        common: Common,
        /// Overrides the scenario step count.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Convergence study over the scenario's n_list.
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Run a named verification suite.
    Verify {
        /// Suite name.
        suite: String,
        /// Directory for the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Crowd simulation on a disk-configuration scenario.
    Crowd {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Export the fast-marching distance field of a scenario's room.
    Field {
        #[command(flatten)]
        common: Common,
    },
}

/// Order-of-1/n threshold for `converge` to succeed.
const MIN_ORDER: f64 = 0.9;

enum Failure {
    Input(String),
    Solver(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Check(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Solver(m) | Failure::Check(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Scenario { .. }
            | Error::InvalidInput(_)
            | Error::StepRule { .. }
            | Error::DimensionMismatch { .. }
            | Error::EmptySet(_)
            | Error::NoExit => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { common, n } => cmd_run(&common, n),
        Command::Converge { common } => cmd_converge(&common),
        Command::Verify { suite, out, seed } => cmd_verify(&suite, out.as_deref(), seed),
        Command::Crowd { common, n } => cmd_crowd(&common, n),
        Command::Field { common } => cmd_field(&common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load(common: &Common) -> Result<(Scenario, SolverOptions), Failure> {
    let text = fs::read_to_string(&common.scenario)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", common.scenario.display())))?;
    let sc = Scenario::from_json(&text)?;
    let mut opts = sc.options(SolverOptions::default()).from_env()?;
    if let Some(seed) = common.seed {
        opts.seed = seed;
    }
    Ok((sc, opts))
}

fn write(dir: &Path, name: &str, contents: &str) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::Solver(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Solver(format!("cannot write {}: {e}", path.display())))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    write(dir, name, &text)
}

fn steps(sc: &Scenario, n: Option<usize>) -> Result<usize, Failure> {
    n.or(sc.n).ok_or_else(|| Failure::Input("scenario has no `n`; pass --n".into()))
}

fn summarize(checks: &[CheckReport]) {
    for c in checks {
        let worst = c.worst_margin.map_or("-".to_string(), |m| format!("{m:.3e}"));
        println!(
            "{:<28} {} samples={} violations={} worst_margin={}",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.samples,
            c.violation_count,
            worst
        );
    }
}

fn cmd_run(common: &Common, n: Option<usize>) -> Outcome {
    let (sc, opts) = load(common)?;
    let n = steps(&sc, n)?;
    let p = sc.problem()?;
    let traj = match integrate(&p, n, &opts) {
        Ok(t) => t,
        Err(Error::StepFailed { step, reason, partial }) => {
            write(&common.out, "trajectory_partial.csv", &trajectory_csv(&partial))?;
            return Err(Failure::Solver(format!("step {step} failed: {reason}")));
        }
        Err(e) => return Err(e.into()),
    };
    let mut checks = vec![audit_trajectory(&traj, &p, &opts)?];
    if let Some(c_eq) = sc.bounds.c_eq {
        if p.set.is_fixed() && p.set.base().is_analytic() {
            checks.push(check_equation_equivalence(&traj, p.set.base(), &p.f, c_eq, &opts)?);
        }
    }
    if let (Some(v0), Some(a)) = (sc.v0()?, sc.bounds.stability) {
        checks.push(check_stability(&p, &v0, n, a, &opts)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    write(&common.out, "trajectory.csv", &trajectory_csv(&traj))?;
    write_json(
        &common.out,
        "audit.json",
        &json!({
            "scenario": sc.name,
            "n": n,
            "h": traj.h,
            "flagged_steps": traj.flagged_steps,
            "pass": pass,
            "checks": checks,
        }),
    )?;
    summarize(&checks);
    if !traj.flagged_steps.is_empty() {
        eprintln!("warning: {} step(s) had multivalued projections", traj.flagged_steps.len());
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Check("audit failed".into()))
    }
}

fn cmd_converge(common: &Common) -> Outcome {
    let (sc, opts) = load(common)?;
    let list = sc.n_list.clone().ok_or_else(|| Failure::Input("scenario has no `n_list`".into()))?;
    if list.len() < 3 {
        return Err(Failure::Input(format!("n_list needs at least 3 step counts to fit an order, got {}", list.len())));
    }
    let p = sc.problem()?;
    let reference = sc.reference(&p)?;
    let study = convergence_study(&p, &list, &reference, &opts)?;
    write(&common.out, "convergence.csv", &convergence_csv(&study))?;
    write_json(&common.out, "convergence.json", &json!({ "scenario": sc.name, "study": study }))?;
    for row in &study.rows {
        println!("n={:<6} gap={:e}", row.n, row.gap);
    }
    println!("fitted order: {}", study.order_label());
    match study.fitted_order {
        _ if study.exact => Ok(()),
        Some(order) if order >= MIN_ORDER => Ok(()),
        _ => Err(Failure::Check(format!("fitted order {} is below {MIN_ORDER}", study.order_label()))),
    }
}

fn cmd_verify(suite: &str, out: Option<&Path>, seed: Option<u64>) -> Outcome {
    if !SUITES.contains(&suite) {
        return Err(Failure::Input(format!("unknown suite {suite:?}; known suites: {}", SUITES.join(", "))));
    }
    let mut opts = SolverOptions::default().from_env()?;
    if let Some(s) = seed {
        opts.seed = s;
    }
    let report = run_suite(suite, &opts)?;
    if let Some(dir) = out {
        write_json(dir, &format!("{suite}.json"), &serde_json::to_value(&report).expect("serializable report"))?;
    }
    summarize(&report.checks);
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("suite {suite} failed")))
    }
}

fn cmd_crowd(common: &Common, n: Option<usize>) -> Outcome {
    let (sc, opts) = load(common)?;
    let n = steps(&sc, n)?;
    let set = sc.constraint_set()?;
    if set.as_disks().is_none() {
        return Err(Failure::Input("crowd scenarios need a `disks` set".into()));
    }
    if !sc.moving_set()?.is_fixed() {
        return Err(Failure::Input("crowd scenarios take a fixed disk configuration".into()));
    }
    let q0 = sweep_core::Vector::from_slice(&sc.u0)?;
    let rule = sc.crowd_rule()?;
    let p = sc.problem()?;
    let run = simulate_crowd(&p.set.base().clone(), &q0, &rule, p.horizon, n, &opts)?;
    let audit = audit_trajectory(&run.sweeping, &run.problem, &opts)?;
    write(&common.out, "frames.csv", &frames_csv(&run.sweeping))?;
    write(&common.out, "velocity_frames.csv", &frames_csv(&run.velocity))?;
    write_json(
        &common.out,
        "crowd.json",
        &json!({
            "scenario": sc.name,
            "n": n,
            "h": run.sweeping.h,
            "scheme_gap": run.scheme_gap,
            "flagged_steps": run.sweeping.flagged_steps,
            "multipliers": run.sweeping.multipliers,
            "velocity_multipliers": run.velocity.multipliers,
            "pass": audit.pass,
            "audit": audit,
        }),
    )?;
    summarize(std::slice::from_ref(&audit));
    println!("scheme gap: {:e}", run.scheme_gap);
    if audit.pass {
        Ok(())
    } else {
        Err(Failure::Check("crowd audit failed".into()))
    }
}

fn cmd_field(common: &Common) -> Outcome {
    let (sc, _) = load(common)?;
    let field = sc.exit_field()?.ok_or_else(|| Failure::Input("scenario has no exit_field room".into()))?;
    write(&common.out, "field.csv", &field_csv(&field))?;
    let m = &field.mask;
    let reachable = field.values().iter().filter(|v| v.is_finite()).count();
    println!("grid {}×{}, {} reachable cells", m.nx, m.ny, reachable);
    Ok(())
}
