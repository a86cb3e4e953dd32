//! Command-line front end: `measure`, `pump`, `plan`, `sweep`, `verify`.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 flag error, 3 domain
//! error, 4 I/O error. `RNP_THREADS` caps the worker threads.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rnp::markov::RestartMode;
use rnp::measurement::{optimal_m, DEFAULT_M_MAX};
use rnp::model::{ErrorParams, NoiseKind, PhysicalTimings, PumpSchedule, DEFAULT_SEARCH_BOUND};
use rnp::planner::{plan_with, PlannerOptions, PumpLevels};
use rnp::presets::{Scenario, ETA, PURCELL_C, TAU, T_LOCAL};
use rnp::pumping::{run_standard, run_two_level, PumpTrace};
use rnp::sweep::{run_sweep, write_csv, write_json_lines, SweepConfig};
use rnp::timing::memory_check;
use rnp::verify::{run_verification, VerifyConfig};

const EXIT_VERIFY: u8 = 1;
const EXIT_FLAGS: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "rnp",
    version,
    about = "Robust measurement and entanglement-pumping planner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal majority-vote readout: m*, eps_M and its duration.
    Measure(MeasureArgs),
    /// Step-by-step pumping trace.
    Pump(PumpArgs),
    /// Full plan: schedule, raw-pair budget, clock cycle and gate error.
    Plan(PlanArgs),
    /// Plans over a (p_L, F) grid, written as CSV.
    Sweep(SweepArgs),
    /// Cross-checks against the density-matrix and Monte-Carlo oracles.
    Verify(VerifyArgs),
}

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not a probability in [0, 1]"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be a positive finite number"))
    }
}

#[derive(Args, Clone)]
struct ErrorFlags {
    /// Local gate error probability.
    #[arg(long = "p-l", value_parser = probability)]
    p_l: Option<f64>,
    /// Initialization error probability.
    #[arg(long = "p-i", value_parser = probability)]
    p_i: Option<f64>,
    /// Single-readout error probability.
    #[arg(long = "p-m", value_parser = probability)]
    p_m: Option<f64>,
    /// Raw Bell-pair fidelity.
    #[arg(long = "f", value_parser = probability)]
    fidelity: Option<f64>,
    /// Raw-pair noise: depolarizing or dephasing.
    #[arg(long)]
    noise: Option<NoiseKind>,
}

impl ErrorFlags {
    fn over(&self, base: ErrorParams) -> ErrorParams {
        ErrorParams {
            p_l: self.p_l.unwrap_or(base.p_l),
            p_i: self.p_i.unwrap_or(base.p_i),
            p_m: self.p_m.unwrap_or(base.p_m),
            fidelity: self.fidelity.unwrap_or(base.fidelity),
            noise: self.noise.unwrap_or(base.noise),
        }
    }
}

#[derive(Args, Clone)]
struct TimingFlags {
    /// Optical lifetime tau, seconds.
    #[arg(long, value_parser = positive)]
    tau: Option<f64>,
    /// Photon collection and detection efficiency.
    #[arg(long, value_parser = positive)]
    eta: Option<f64>,
    /// Cavity Purcell factor C.
    #[arg(long = "cavity-c", value_parser = positive)]
    cavity_c: Option<f64>,
    /// Local gate time, seconds.
    #[arg(long = "t-local", value_parser = positive)]
    t_local: Option<f64>,
    /// Storage memory time, seconds.
    #[arg(long = "t-mem", value_parser = positive)]
    t_mem: Option<f64>,
}

impl TimingFlags {
    fn over(&self, p_m: f64, base: &PhysicalTimings) -> rnp::Result<PhysicalTimings> {
        PhysicalTimings::from_optics(
            p_m,
            self.t_local.unwrap_or(base.t_local),
            self.tau.unwrap_or(base.tau),
            self.eta.unwrap_or(base.eta),
            self.cavity_c.unwrap_or(base.purcell_c),
            self.t_mem.or(base.t_mem),
        )
    }
}

fn default_params() -> ErrorParams {
    Scenario::ion_depolarizing().params
}

fn default_timings(p_m: f64) -> rnp::Result<PhysicalTimings> {
    PhysicalTimings::from_optics(p_m, T_LOCAL, TAU, ETA, PURCELL_C, None)
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    errors: ErrorFlags,
    #[command(flatten)]
    timing: TimingFlags,
    /// Largest vote half-width searched.
    #[arg(long = "m-max", default_value_t = DEFAULT_M_MAX)]
    m_max: u32,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PumpArgs {
    #[command(flatten)]
    errors: ErrorFlags,
    /// Bit-pumping steps (two-level scheme).
    #[arg(long = "n-b", default_value_t = 4)]
    n_b: u32,
    /// Phase-pumping steps (two-level scheme).
    #[arg(long = "n-p", default_value_t = 5)]
    n_p: u32,
    /// Alternate bit and phase steps on raw pairs for this many steps
    /// instead of the two-level scheme.
    #[arg(long)]
    standard: Option<u32>,
    /// Comparison error; defaults to the optimal majority vote.
    #[arg(long = "eps-m", value_parser = probability)]
    eps_m: Option<f64>,
    /// One JSON object per step.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PlanArgs {
    /// ion-depolarizing or nv-dephasing.
    #[arg(long)]
    preset: Option<String>,
    #[command(flatten)]
    errors: ErrorFlags,
    #[command(flatten)]
    timing: TimingFlags,
    /// Restart rule after a failed comparison: full or level.
    #[arg(long)]
    restart: Option<RestartMode>,
    /// Pumping levels: one or two.
    #[arg(long)]
    levels: Option<PumpLevels>,
    /// Largest n_b and n_p searched.
    #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
    bound: u32,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "p-l-min", value_parser = probability, default_value_t = 1e-6)]
    p_l_min: f64,
    #[arg(long = "p-l-max", value_parser = probability, default_value_t = 1e-3)]
    p_l_max: f64,
    #[arg(long = "p-l-points", default_value_t = 13)]
    p_l_points: usize,
    #[arg(long = "f-min", value_parser = probability, default_value_t = 0.90)]
    f_min: f64,
    #[arg(long = "f-max", value_parser = probability, default_value_t = 0.99)]
    f_max: f64,
    #[arg(long = "f-points", default_value_t = 10)]
    f_points: usize,
    #[arg(long, default_value_t = NoiseKind::Depolarizing)]
    noise: NoiseKind,
    #[arg(long = "p-i", value_parser = probability, default_value_t = 0.05)]
    p_i: f64,
    #[arg(long = "p-m", value_parser = probability, default_value_t = 0.05)]
    p_m: f64,
    #[arg(long, default_value_t = RestartMode::FullRestart)]
    restart: RestartMode,
    #[arg(long)]
    levels: Option<PumpLevels>,
    #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
    bound: u32,
    /// JSON lines instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Monte-Carlo trials per configuration.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

enum Failure {
    Verify,
    Domain(rnp::Error),
    Io(String),
}

impl From<rnp::Error> for Failure {
    fn from(e: rnp::Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn print_json(value: &impl serde::Serialize) -> CmdResult {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_measure(args: &MeasureArgs) -> CmdResult {
    let params = args.errors.over(default_params()).validate()?;
    let plan = optimal_m(&params, args.m_max)?;
    // Error-free optical readout would take forever, so there is no
    // duration to report at p_M = 0.
    let duration = if params.p_m > 0.0 {
        let timings = args
            .timing
            .over(params.p_m, &default_timings(params.p_m)?)?;
        Some(plan.timed(&timings).t_robust_meas)
    } else {
        None
    };
    if args.json {
        return print_json(&json!({
            "m": plan.m,
            "readouts": 2 * plan.m + 1,
            "eps_M": plan.eps_m,
            "t_robust_meas": duration,
            "p_L": params.p_l,
            "p_I": params.p_i,
            "p_M": params.p_m,
        }));
    }
    println!("m*             {}", plan.m);
    println!("readouts       {}", 2 * plan.m + 1);
    println!("eps_M          {:.4e}", plan.eps_m);
    match duration {
        Some(t) => println!("t_robust_meas  {t:.4e} s"),
        None => println!("t_robust_meas  n/a (p_M = 0)"),
    }
    Ok(())
}

fn print_trace(trace: &PumpTrace, json: bool) -> CmdResult {
    let mut out = io::stdout().lock();
    if json {
        for (i, s) in trace.steps.iter().enumerate() {
            let line = json!({
                "step": i + 1,
                "kind": s.kind,
                "success_prob": s.success_prob,
                "state": s.state_after_success.as_array(),
                "infidelity": s.state_after_success.infidelity(),
            });
            writeln!(out, "{line}")?;
        }
        return Ok(());
    }
    writeln!(
        out,
        "{:>4}  {:<5}  {:>10}  {:>11}  {:>11}  {:>11}  {:>11}  {:>11}",
        "step", "kind", "p_success", "Phi+", "Phi-", "Psi+", "Psi-", "infidelity"
    )?;
    let r = trace
        .steps
        .first()
        .map(|s| s.state_before)
        .unwrap_or(trace.final_state);
    let [a, b, c, d] = r.as_array();
    writeln!(
        out,
        "{:>4}  {:<5}  {:>10}  {a:>11.4e}  {b:>11.4e}  {c:>11.4e}  {d:>11.4e}  {:>11.4e}",
        0,
        "raw",
        "",
        r.infidelity()
    )?;
    for (i, s) in trace.steps.iter().enumerate() {
        let [a, b, c, d] = s.state_after_success.as_array();
        writeln!(
            out,
            "{:>4}  {:<5}  {:>10.6}  {a:>11.4e}  {b:>11.4e}  {c:>11.4e}  {d:>11.4e}  {:>11.4e}",
            i + 1,
            s.kind.to_string(),
            s.success_prob,
            s.state_after_success.infidelity()
        )?;
    }
    Ok(())
}

fn cmd_pump(args: &PumpArgs) -> CmdResult {
    let params = args.errors.over(default_params()).require_purifiable()?;
    let eps_m = match args.eps_m {
        Some(e) => e,
        None => optimal_m(&params, DEFAULT_M_MAX)?.eps_m,
    };
    let trace = match args.standard {
        Some(steps) => run_standard(steps, &params, eps_m)?,
        None => run_two_level(PumpSchedule::new(args.n_b, args.n_p), &params, eps_m)?,
    };
    print_trace(&trace, args.json)
}

fn cmd_plan(args: &PlanArgs) -> CmdResult {
    let base = match &args.preset {
        Some(name) => Scenario::by_name(name).ok_or_else(|| {
            Failure::Domain(rnp::Error::Inconsistent(format!(
                "unknown preset `{name}` (expected one of {})",
                Scenario::NAMES.join(", ")
            )))
        })?,
        None => Scenario::ion_depolarizing(),
    };
    let params = args.errors.over(base.params).require_purifiable()?;
    let base_timings = if args.preset.is_some() {
        base.timings
    } else {
        default_timings(params.p_m)?
    };
    let timings = args.timing.over(params.p_m, &base_timings)?;
    let meas = optimal_m(&params, base.m_max)?.timed(&timings);
    let opts = PlannerOptions {
        bound: args.bound,
        restart_mode: args.restart.unwrap_or(base.options.restart_mode),
        levels: args.levels.or(if args.errors.noise.is_some() {
            None
        } else {
            base.options.levels
        }),
        ..base.options
    };
    let plan = plan_with(&params, &timings, &meas, &opts)?;
    let memory = timings
        .t_mem
        .map(|t| memory_check(plan.t_c, t))
        .transpose()?;

    if args.json {
        let mut value = serde_json::to_value(plan).map_err(io::Error::from)?;
        if let Some(m) = memory {
            value["memory_ratio"] = json!(m.ratio);
            value["memory_warning"] = json!(m.warning);
        }
        value["m"] = json!(meas.m);
        return print_json(&value);
    }
    println!("schedule (n_b, n_p)    {}", plan.schedule);
    println!("restart mode           {}", plan.restart_mode);
    println!("m* / eps_M             {} / {:.4e}", meas.m, plan.eps_m);
    println!("delta_min              {:.4e}", plan.delta_min);
    println!("eps_fail               {:.4e}", plan.eps_fail);
    println!("eps_E                  {:.4e}", plan.eps_e);
    println!("n_tot (budget)         {}", plan.n_tot_budget);
    println!("<n_tot> (mean)         {:.2}", plan.expected_pairs);
    println!("t_C                    {:.1} us", plan.t_c * 1e6);
    println!("t_C from mean          {:.1} us", plan.t_c_expected * 1e6);
    println!("gamma                  {:.3e}", plan.gamma);
    println!("p_cnot (no pumping)    {:.3e}", plan.p_cnot_raw);
    if let Some(m) = memory {
        let flag = if m.warning {
            "  WARNING: cycle is a large fraction of memory time"
        } else {
            ""
        };
        println!("t_C / t_mem            {:.2e}{flag}", m.ratio);
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let cfg = SweepConfig {
        p_l_min: args.p_l_min,
        p_l_max: args.p_l_max,
        p_l_points: args.p_l_points,
        f_min: args.f_min,
        f_max: args.f_max,
        f_points: args.f_points,
        noise: args.noise,
        p_i: args.p_i,
        p_m: args.p_m,
        options: PlannerOptions {
            bound: args.bound,
            restart_mode: args.restart,
            levels: args.levels,
            ..PlannerOptions::default()
        },
        ..SweepConfig::default()
    };
    // Open the output before the work so a bad path fails fast.
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    let rows = run_sweep(&cfg)?;
    if args.json {
        write_json_lines(&rows, sink)?;
    } else {
        write_csv(&rows, sink)?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let report = run_verification(&VerifyConfig {
        trials: args.trials,
        seed: args.seed,
    });
    if args.json {
        print_json(&report)?;
    } else {
        println!("trials={} seed={}", report.trials, report.seed);
        for c in &report.checks {
            println!(
                "{:<4}  {:<22}  worst={:.3e}  tol={:.1e}  {}",
                c.status.as_str(),
                c.name,
                c.worst,
                c.tolerance,
                c.detail
            );
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("RNP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("RNP_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("RNP_THREADS: {e}"))
}

/// Maps a library field name to the flag that sets it.
fn flag_for(field: &str) -> Option<&'static str> {
    Some(match field {
        "p_L" => "--p-l",
        "p_I" => "--p-i",
        "p_M" => "--p-m",
        "F" => "--f",
        "eps_M" => "--eps-m",
        "tau" => "--tau",
        "eta" => "--eta",
        "purcell_C" => "--cavity-c",
        "t_L" => "--t-local",
        "t_mem" => "--t-mem",
        _ => return None,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_FLAGS } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_FLAGS);
    }
    let result = match &cli.command {
        Command::Measure(a) => cmd_measure(a),
        Command::Pump(a) => cmd_pump(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => {
            eprintln!("error: verification failed");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Domain(e)) => {
            match e.field().and_then(flag_for) {
                Some(flag) => eprintln!("error: {e} (flag {flag})"),
                None => eprintln!("error: {e}"),
            }
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
