//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure (including failed gadget
//! verification), 2 invalid usage or arguments, 3 workload unsatisfiable
//! within the error budget.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use latsurg::distill::{exact_bad_rate, sample_distillation, DistillationCode};
use latsurg::estimate::{
    estimate, sensitivity_grid, BudgetSplit, EstimateError, EstimatorConfig,
};
use latsurg::factory::FactoryModel;
use latsurg::model::{CodeDistance, ModelError, PhysicalAssumptions};
use latsurg::rates::{
    cascade, distill_output_error, distill_reject_prob, RateError, RejectModel,
};
use latsurg::report::{
    schema, CheckRow, DistillReport, EstimateReport, FactorySummary, MonteCarloRow,
    SensitivityReport, VerifyReport,
};
use latsurg::surgery::{Basis, Cell, Fragment, Schedule, ScheduleBuilder, SurgeryError};
use latsurg::verify::{
    verify_cnot, verify_cz, verify_hadamard, verify_multibody, verify_swap, verify_t_gadget,
    GadgetCheck, VerifyError,
};

#[derive(Parser)]
#[command(
    name = "latsurg",
    version,
    about = "Lattice-surgery schedules and resource estimates for surface-code machines"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// human: aligned text; records: deterministic JSON.
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Records,
}

#[derive(Subcommand)]
enum Cmd {
    /// Distances, qubit counts, runtime, and error ledger for a workload.
    Estimate(EstimateArgs),
    /// 15-to-1 distillation: closed forms against exhaustive enumeration,
    /// optionally against sampling.
    DistillAnalyze(DistillArgs),
    /// Replay every gadget against its ideal channel.
    Verify(VerifyArgs),
    /// Build one gadget schedule and print it.
    Schedule(ScheduleArgs),
    /// Sweep physical error rate and T count around a base workload.
    Sensitivity(SensitivityArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Physical error rate per operation.
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    /// Error detection round duration in microseconds.
    #[arg(long, default_value_t = 1.0)]
    round_us: f64,
    /// T gates in the program (scientific notation accepted).
    #[arg(long, default_value = "1e8", value_parser = parse_count)]
    t_count: f64,
    #[arg(long, default_value_t = 100)]
    logical_qubits: u64,
    /// Total acceptable failure probability for the run.
    #[arg(long, default_value_t = 1e-2)]
    budget: f64,
}

#[derive(Args)]
struct DistillArgs {
    /// Input magic-state error rate.
    #[arg(long, default_value_t = 1e-2)]
    p: f64,
    /// Distillation levels to chain in the closed-form summary.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    levels: u8,
    /// Monte-Carlo trials (0 skips sampling).
    #[arg(long, default_value = "0", value_parser = parse_count_u64)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Distance to build the gadget schedules at.
    #[arg(long, default_value_t = 5, value_parser = parse_distance)]
    d: u32,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(value_enum)]
    gadget: GadgetArg,
    #[arg(long, default_value_t = 15, value_parser = parse_distance)]
    d: u32,
    /// Fan-out for cnot/cz.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=8))]
    targets: u32,
    /// Route the hadamard back to its home cell.
    #[arg(long)]
    return_home: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GadgetArg {
    Cnot,
    Cz,
    T,
    TDagger,
    Hadamard,
    Swap,
    Multibody,
}

#[derive(Args)]
struct SensitivityArgs {
    /// Physical error rates to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-4, 3e-4, 1e-3, 3e-3])]
    ps: Vec<f64>,
    /// T counts to sweep (scientific notation accepted).
    #[arg(long, value_delimiter = ',', default_values = ["1e6", "1e8", "1e10", "1e12"], value_parser = parse_count)]
    t_counts: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    logical_qubits: u64,
    #[arg(long, default_value_t = 1.0)]
    round_us: f64,
    #[arg(long, default_value_t = 1e-2)]
    budget: f64,
}

fn parse_count(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("count must be finite and nonnegative, got {s}"))
    }
}

fn parse_count_u64(s: &str) -> Result<u64, String> {
    let v = parse_count(s)?;
    if v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(format!("count too large: {s}"))
    }
}

fn parse_distance(s: &str) -> Result<u32, String> {
    let v: u32 = s.parse().map_err(|_| format!("not an integer: {s}"))?;
    CodeDistance::new(v).map_err(|e| e.to_string())?;
    Ok(v)
}

struct CliError {
    code: u8,
    message: String,
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        invalid(e.to_string())
    }
}

impl From<RateError> for CliError {
    fn from(e: RateError) -> Self {
        invalid(e.to_string())
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        let code = match e {
            EstimateError::Unsatisfiable { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SurgeryError> for CliError {
    fn from(e: SurgeryError) -> Self {
        CliError {
            code: 1,
            message: format!("schedule construction failed: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text).map_err(|e| {
                    eprintln!("error: cannot write {}: {e}", path.display());
                }),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(code),
                Err(()) => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Renders the full report before anything is written, so a failure can
/// never leave a half-emitted document behind.
fn run(cli: &Cli) -> Result<(String, u8), CliError> {
    match &cli.cmd {
        Cmd::Estimate(a) => Ok((run_estimate(a, cli.format)?, 0)),
        Cmd::DistillAnalyze(a) => Ok((run_distill(a, cli.format)?, 0)),
        Cmd::Verify(a) => run_verify(a, cli.format),
        Cmd::Schedule(a) => Ok((run_schedule(a, cli.format)?, 0)),
        Cmd::Sensitivity(a) => Ok((run_sensitivity(a, cli.format)?, 0)),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError {
        code: 1,
        message: format!("serialization failed: {e}"),
    })?;
    text.push('\n');
    Ok(text)
}

// ---- estimate ----

fn run_estimate(a: &EstimateArgs, format: Format) -> Result<String, CliError> {
    if !(a.budget > 0.0 && a.budget < 1.0) {
        return Err(invalid(format!(
            "budget must be in (0, 1), got {}",
            a.budget
        )));
    }
    let assumptions = PhysicalAssumptions::new(a.p, a.round_us * 1e-6)?;
    let cfg = EstimatorConfig {
        assumptions,
        logical_qubits: a.logical_qubits,
        t_count: a.t_count,
        total_budget: a.budget,
        split: BudgetSplit::default(),
    };
    let est = estimate(&cfg)?;
    let factory = if cfg.t_count > 0.0 {
        let model = FactoryModel::new(assumptions, est.d_factory)
            .map_err(|e| invalid(e.to_string()))?;
        Some(FactorySummary::of(&model).map_err(|e| invalid(e.to_string()))?)
    } else {
        None
    };
    let report = EstimateReport {
        schema: schema(),
        baseline: est.baseline(),
        factory,
        estimate: est,
    };
    match format {
        Format::Records => to_json(&report),
        Format::Human => Ok(render_estimate(&report)),
    }
}

fn render_estimate(r: &EstimateReport) -> String {
    let e = &r.estimate;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "workload        {} logical qubits, {:.4e} T gates",
        e.config.logical_qubits, e.config.t_count
    );
    let _ = writeln!(
        s,
        "assumptions     p = {:.1e}, {:.2} us rounds, budget {:.1e}",
        e.config.assumptions.p,
        e.config.assumptions.t_round_seconds * 1e6,
        e.config.total_budget
    );
    let _ = writeln!(
        s,
        "distances       data {}   level-1 {}   level-2 required {}   factory {}",
        e.d_data, e.d1, e.d2_required, e.d_factory
    );
    let _ = writeln!(
        s,
        "qubits          {} data + {} ancilla + {} factory = {}",
        e.qubits_data, e.qubits_ancilla, e.qubits_factory, e.qubits_total
    );
    if e.rounds_per_t > 0.0 {
        let _ = writeln!(
            s,
            "runtime         {:.2} s ({:.3} h) at {:.1} T/s ({:.2} rounds per T)",
            e.runtime_seconds,
            e.runtime_hours(),
            e.t_per_second,
            e.rounds_per_t
        );
    } else {
        let _ = writeln!(s, "runtime         no T gates: nothing to schedule");
    }
    let _ = writeln!(
        s,
        "error ledger    storage {:.2e} + distillation {:.2e} + injection {:.2e} = {:.2e}",
        e.ledger.storage,
        e.ledger.distillation,
        e.ledger.injection,
        e.ledger.total()
    );
    if let Some(f) = &r.factory {
        let _ = writeln!(
            s,
            "factory         {}x{} cells ({}), window {} rounds / {} ops / {} cell-rounds",
            f.grid_cols,
            f.grid_rows,
            f.cells,
            f.window_rounds,
            f.window_ops,
            f.window_spacetime_volume
        );
        let _ = writeln!(
            s,
            "latency         level-1 output {:.1} rounds; T state {:.1} ({:.1} with rejects)",
            f.level1_latency_rounds, f.output_latency_rounds, f.output_latency_adjusted_rounds
        );
    }
    let b = &r.baseline;
    let _ = writeln!(
        s,
        "baseline        defect encoding {:.1e} qubits / {:.1} h -> {:.1}x fewer qubits at {:.2}x the time",
        b.defect_qubits, b.defect_hours, b.qubit_ratio, b.runtime_ratio
    );
    s
}

// ---- distill-analyze ----

fn run_distill(a: &DistillArgs, format: Format) -> Result<String, CliError> {
    let code = DistillationCode::fifteen_to_one();
    let rows = code.enumerate_undetected();
    let undetected: u64 = rows.iter().map(|r| r.undetected).sum();
    let leading = code
        .leading_error_coefficient()
        .expect("the 15-to-1 block has undetected errors");
    let exact_bad = exact_bad_rate(&rows, a.p);
    let first_bad = distill_output_error(a.p)?;
    let exact_rej = distill_reject_prob(a.p, RejectModel::ExactIid)?;
    let first_rej = distill_reject_prob(a.p, RejectModel::FirstOrder)?;
    let chain = cascade(a.levels, a.p, &vec![0.0; a.levels as usize])?;
    let monte_carlo = if a.trials > 0 {
        let stats = sample_distillation(&code, a.p, a.trials, a.seed)
            .map_err(|e| invalid(e.to_string()))?;
        Some(MonteCarloRow::of(&stats, a.seed))
    } else {
        None
    };
    let report = DistillReport {
        schema: schema(),
        p_in: a.p,
        levels: a.levels,
        chain,
        undetected_codewords: undetected,
        leading_error: leading,
        exact_bad_rate: exact_bad,
        first_order_bad_rate: first_bad,
        bad_rate_gap: first_bad / exact_bad - 1.0,
        exact_reject_rate: exact_rej,
        first_order_reject_rate: first_rej,
        reject_gap: first_rej / exact_rej - 1.0,
        monte_carlo,
    };
    match format {
        Format::Records => to_json(&report),
        Format::Human => Ok(render_distill(&report)),
    }
}

fn render_distill(r: &DistillReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "15-to-1 block   {} undetected codewords; lightest error weight {} x {}",
        r.undetected_codewords, r.leading_error.0, r.leading_error.1
    );
    let _ = writeln!(s, "input error     {:.4e}", r.p_in);
    let _ = writeln!(
        s,
        "output error    exact {:.4e} | 35 p^3 {:.4e} | gap {:+.2}%",
        r.exact_bad_rate,
        r.first_order_bad_rate,
        100.0 * r.bad_rate_gap
    );
    let _ = writeln!(
        s,
        "reject prob     exact {:.4e} | 15 p {:.4e} | gap {:+.2}%",
        r.exact_reject_rate,
        r.first_order_reject_rate,
        100.0 * r.reject_gap
    );
    for (i, level) in r.chain.iter().enumerate() {
        let _ = writeln!(
            s,
            "level {}         in {:.4e} -> out {:.4e}, reject {:.4e}",
            i + 1,
            level.p_in,
            level.p_out,
            level.p_reject
        );
    }
    if let Some(mc) = &r.monte_carlo {
        let _ = writeln!(
            s,
            "monte carlo     {} trials (seed {}): reject {:.4e}, bad among accepted {:.4e}",
            mc.trials, mc.seed, mc.reject_rate, mc.bad_rate_among_accepted
        );
    }
    s
}

// ---- verify ----

fn run_verify(a: &VerifyArgs, format: Format) -> Result<(String, u8), CliError> {
    let d = CodeDistance::new(a.d).expect("validated by the parser");
    let checks = gadget_checks(d);
    let all_passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        schema: schema(),
        distance: a.d,
        all_passed,
        checks,
    };
    let text = match format {
        Format::Records => to_json(&report)?,
        Format::Human => render_verify(&report),
    };
    Ok((text, if all_passed { 0 } else { 1 }))
}

fn check_row(
    label: &str,
    build: impl FnOnce() -> Result<GadgetCheck, CheckFailure>,
) -> CheckRow {
    match build() {
        Ok(check) => CheckRow {
            gadget: label.to_string(),
            passed: true,
            branches: check.branches,
            max_deviation: check.max_deviation,
            detail: String::new(),
        },
        Err(e) => CheckRow {
            gadget: label.to_string(),
            passed: false,
            branches: 0,
            max_deviation: f64::NAN,
            detail: e.0,
        },
    }
}

struct CheckFailure(String);

impl From<SurgeryError> for CheckFailure {
    fn from(e: SurgeryError) -> Self {
        CheckFailure(format!("build: {e}"))
    }
}

impl From<VerifyError> for CheckFailure {
    fn from(e: VerifyError) -> Self {
        CheckFailure(e.to_string())
    }
}

fn gadget_checks(d: CodeDistance) -> Vec<CheckRow> {
    vec![
        check_row("cnot", || {
            let (sched, frag, c, ts) = build_controlled(d, 1, false)?;
            Ok(verify_cnot(&sched, &frag, c, &ts)?)
        }),
        check_row("cnot x3", || {
            let (sched, frag, c, ts) = build_controlled(d, 3, false)?;
            Ok(verify_cnot(&sched, &frag, c, &ts)?)
        }),
        check_row("cz", || {
            let (sched, frag, c, ts) = build_controlled(d, 1, true)?;
            Ok(verify_cz(&sched, &frag, c, &ts)?)
        }),
        check_row("swap", || {
            let mut b = ScheduleBuilder::new(2, 2);
            let p = b.add_data(d, Cell::new(0, 0))?;
            let q = b.add_data(d, Cell::new(1, 0))?;
            let frag = b.build_swap(p, q)?;
            Ok(verify_swap(&b.finish(), &frag, p, q)?)
        }),
        check_row("hadamard", || {
            let mut b = ScheduleBuilder::new(2, 2);
            let q = b.add_data(d, Cell::new(0, 0))?;
            let frag = b.build_hadamard(q, false)?;
            Ok(verify_hadamard(&b.finish(), &frag, q)?)
        }),
        check_row("hadamard (return)", || {
            let mut b = ScheduleBuilder::new(2, 2);
            let q = b.add_data(d, Cell::new(0, 0))?;
            let frag = b.build_hadamard(q, true)?;
            Ok(verify_hadamard(&b.finish(), &frag, q)?)
        }),
        check_row("multibody XXZ", || {
            let mut b = ScheduleBuilder::new(6, 3);
            let p1 = b.add_data(d, Cell::new(0, 0))?;
            let p2 = b.add_data(d, Cell::new(2, 0))?;
            let p3 = b.add_data(d, Cell::new(4, 0))?;
            let ops = [(p1, Basis::X), (p2, Basis::X), (p3, Basis::Z)];
            let frag = b.build_multibody(&ops)?;
            Ok(verify_multibody(&b.finish(), &frag, &ops)?)
        }),
        check_row("t", || {
            let (sched, frag, q, m) = build_t(d, false)?;
            Ok(verify_t_gadget(&sched, &frag, q, m, false, None, None)?)
        }),
        check_row("t-dagger", || {
            let (sched, frag, q, m) = build_t(d, true)?;
            Ok(verify_t_gadget(&sched, &frag, q, m, true, None, None)?)
        }),
    ]
}

type Controlled = (
    Schedule,
    Fragment,
    latsurg::surgery::PatchId,
    Vec<latsurg::surgery::PatchId>,
);

fn build_controlled(d: CodeDistance, targets: u32, cz: bool) -> Result<Controlled, CheckFailure> {
    let mut b = ScheduleBuilder::new(2 * targets + 2, 3);
    let c = b.add_data(d, Cell::new(0, 0))?;
    let ts: Vec<_> = (0..targets)
        .map(|i| b.add_data(d, Cell::new(2 * i + 2, 0)))
        .collect::<Result<_, _>>()?;
    let frag = if cz {
        b.build_cz(c, &ts)?
    } else {
        b.build_cnot(c, &ts)?
    };
    Ok((b.finish(), frag, c, ts))
}

type TSetup = (
    Schedule,
    Fragment,
    latsurg::surgery::PatchId,
    latsurg::surgery::PatchId,
);

fn build_t(d: CodeDistance, adjoint: bool) -> Result<TSetup, CheckFailure> {
    let mut b = ScheduleBuilder::new(2, 2);
    let q = b.add_data(d, Cell::new(0, 0))?;
    let m = b.add_magic(d, Cell::new(1, 0))?;
    let frag = b.build_t_gadget(q, m, adjoint)?;
    Ok((b.finish(), frag, q, m))
}

fn render_verify(r: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:>8} {:>15}   result",
        "gadget", "branches", "max deviation"
    );
    for c in &r.checks {
        if c.passed {
            let _ = writeln!(
                s,
                "{:<20} {:>8} {:>15.3e}   ok",
                c.gadget, c.branches, c.max_deviation
            );
        } else {
            let _ = writeln!(s, "{:<20} {:>8} {:>15}   FAIL: {}", c.gadget, "-", "-", c.detail);
        }
    }
    let passed = r.checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(
        s,
        "{} of {} gadget channels match their ideals at distance {}",
        passed,
        r.checks.len(),
        r.distance
    );
    s
}

// ---- schedule ----

fn run_schedule(a: &ScheduleArgs, format: Format) -> Result<String, CliError> {
    let d = CodeDistance::new(a.d).expect("validated by the parser");
    let (sched, label) = build_gadget_schedule(a, d)?;
    match format {
        Format::Records => to_json(&sched.to_records()),
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{label} at distance {}: {} rounds, {} ops, {} cell-rounds",
                d,
                sched.total_rounds(),
                sched.ops.len(),
                sched.spacetime_volume()
            );
            let conflicts = sched.validate();
            if conflicts.is_empty() {
                let _ = writeln!(s, "validation: clean");
            } else {
                for c in &conflicts {
                    let _ = writeln!(s, "conflict: {c:?}");
                }
            }
            s.push('\n');
            s.push_str(&sched.render_gantt(72));
            Ok(s)
        }
    }
}

fn build_gadget_schedule(a: &ScheduleArgs, d: CodeDistance) -> Result<(Schedule, String), CliError> {
    let build = || -> Result<(Schedule, String), SurgeryError> {
        Ok(match a.gadget {
            GadgetArg::Cnot | GadgetArg::Cz => {
                let mut b = ScheduleBuilder::new(2 * a.targets + 2, 3);
                let c = b.add_data(d, Cell::new(0, 0))?;
                let ts: Vec<_> = (0..a.targets)
                    .map(|i| b.add_data(d, Cell::new(2 * i + 2, 0)))
                    .collect::<Result<_, _>>()?;
                let label = if a.gadget == GadgetArg::Cnot {
                    b.build_cnot(c, &ts)?;
                    format!("cnot x{}", a.targets)
                } else {
                    b.build_cz(c, &ts)?;
                    format!("cz x{}", a.targets)
                };
                (b.finish(), label)
            }
            GadgetArg::T | GadgetArg::TDagger => {
                let adjoint = a.gadget == GadgetArg::TDagger;
                let mut b = ScheduleBuilder::new(2, 2);
                let q = b.add_data(d, Cell::new(0, 0))?;
                let m = b.add_magic(d, Cell::new(1, 0))?;
                b.build_t_gadget(q, m, adjoint)?;
                (
                    b.finish(),
                    if adjoint { "t-dagger".into() } else { "t".into() },
                )
            }
            GadgetArg::Hadamard => {
                let mut b = ScheduleBuilder::new(2, 2);
                let q = b.add_data(d, Cell::new(0, 0))?;
                b.build_hadamard(q, a.return_home)?;
                (b.finish(), "hadamard".into())
            }
            GadgetArg::Swap => {
                let mut b = ScheduleBuilder::new(2, 2);
                let p = b.add_data(d, Cell::new(0, 0))?;
                let q = b.add_data(d, Cell::new(1, 0))?;
                b.build_swap(p, q)?;
                (b.finish(), "swap".into())
            }
            GadgetArg::Multibody => {
                let mut b = ScheduleBuilder::new(6, 3);
                let p1 = b.add_data(d, Cell::new(0, 0))?;
                let p2 = b.add_data(d, Cell::new(2, 0))?;
                let p3 = b.add_data(d, Cell::new(4, 0))?;
                b.build_multibody(&[(p1, Basis::X), (p2, Basis::X), (p3, Basis::Z)])?;
                (b.finish(), "multibody XXZ".into())
            }
        })
    };
    Ok(build()?)
}

// ---- sensitivity ----

fn run_sensitivity(a: &SensitivityArgs, format: Format) -> Result<String, CliError> {
    if !(a.budget > 0.0 && a.budget < 1.0) {
        return Err(invalid(format!(
            "budget must be in (0, 1), got {}",
            a.budget
        )));
    }
    if a.ps.is_empty() || a.t_counts.is_empty() {
        return Err(invalid("need at least one p and one t-count"));
    }
    let base = EstimatorConfig {
        assumptions: PhysicalAssumptions::new(a.ps[0], a.round_us * 1e-6)?,
        logical_qubits: a.logical_qubits,
        t_count: a.t_counts[0],
        total_budget: a.budget,
        split: BudgetSplit::default(),
    };
    let points = sensitivity_grid(&base, &a.ps, &a.t_counts)?;
    let report = SensitivityReport {
        schema: schema(),
        base,
        points,
    };
    match format {
        Format::Records => to_json(&report),
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{:>9} {:>10} {:>7} {:>7} {:>9} {:>12} {:>10}",
                "p", "t_count", "d_data", "d2_req", "d_factory", "qubits", "hours"
            );
            for r in &report.points {
                let _ = writeln!(
                    s,
                    "{:>9.1e} {:>10.1e} {:>7} {:>7} {:>9} {:>12} {:>10.3}",
                    r.p, r.t_count, r.d_data, r.d2_required, r.d_factory, r.qubits_total,
                    r.runtime_hours
                );
            }
            Ok(s)
        }
    }
}
