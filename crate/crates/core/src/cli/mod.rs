//! Command-line harness: `solve`, `classify`, `verify` and `lemma5`.
//!
//! Exit codes are [`EXIT_OK`], [`EXIT_CONFIG`] for anything wrong with the
//! input (including unreadable files and bad flags) and [`EXIT_ABORT`] when
//! a run produced non-finite values.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    distance_to_solution_set, lemma5_simulate, max_pairwise_distance, solve_oracle, solve_oracle_or_numeric,
    LemmaFiveInstance, LongRunOptions, SequenceKind, SolutionOracle,
};
use crate::error::Error;
use crate::objectives::Regularizer;
use crate::schedules::Verdict;
use crate::solver::{
    fejer_audit, phi_monotonicity_violations, run, step_tail_share, FejerReference, LogSchedule, Mode,
    ProblemInstance, RunStatus, RunTrace, StopRule, Target,
};

pub use config::{ExperimentConfig, VerifyThresholds};
pub use report::{Regime, ReportRow, ReproductionReport, RowStatus, RunSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ABORT: i32 = 2;

/// Largest share of the step-length energy allowed in the second half of
/// the audit run.
pub const STEP_TAIL_SHARE_MAX: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "gradproj", version, about = "Gradient projection with a vanishing Tikhonov term")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the iteration from every start and write one CSV trace per start.
    Solve(RunArgs),
    /// Print which convergence hypotheses the schedule satisfies.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run, audit and compare against the exact oracle; write a report.
    Verify(RunArgs),
    /// Simulate `u_{n+1} = (1 - eps_n) u_n + r_n eps_n + delta_n`.
    Lemma5(Lemma5Args),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<u64>,
    #[arg(long = "log-every")]
    pub log_every: Option<u64>,
}

/// Sequence generator on the command line: `zero`, `const:C`,
/// `power:SCALE:EXP`, `invlog:SCALE` or `geom:SCALE:RATIO`.
#[derive(Debug, Clone, Copy)]
pub struct SequenceArg(pub SequenceKind);

impl FromStr for SequenceArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64, String> {
            parts
                .get(i)
                .ok_or_else(|| format!("{s:?} is missing a parameter"))?
                .parse::<f64>()
                .map_err(|e| format!("{s:?}: {e}"))
        };
        let kind = match (parts[0], parts.len()) {
            ("zero", 1) => SequenceKind::Zero,
            ("const", 2) => SequenceKind::Constant(num(1)?),
            ("power", 3) => SequenceKind::Power {
                scale: num(1)?,
                exponent: num(2)?,
            },
            ("invlog", 2) => SequenceKind::InverseLog { scale: num(1)? },
            ("geom", 3) => SequenceKind::Geometric {
                scale: num(1)?,
                ratio: num(2)?,
            },
            _ => {
                return Err(format!(
                    "unrecognized sequence {s:?} (zero, const:C, power:SCALE:EXP, invlog:SCALE, geom:SCALE:RATIO)"
                ))
            }
        };
        Ok(SequenceArg(kind))
    }
}

#[derive(Debug, Args)]
pub struct Lemma5Args {
    #[arg(long, default_value = "power:1:1")]
    pub eps: SequenceArg,
    #[arg(long, default_value = "invlog:1")]
    pub r: SequenceArg,
    #[arg(long, default_value = "power:1:2")]
    pub delta: SequenceArg,
    #[arg(long, default_value_t = 1.0)]
    pub u0: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub horizon: u64,
    /// Index carried by `u0`.
    #[arg(long = "first-index", default_value_t = 1)]
    pub first_index: u64,
    /// Scale each step by a random factor in [0.5, 1] instead of saturating.
    #[arg(long = "sub-equality")]
    pub sub_equality: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Abort(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("cannot write {}: {e}", path.display()))
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(args) => load(&args).and_then(|cfg| cmd_solve(&cfg, out)),
        Command::Classify { config } => ExperimentConfig::load(&config)
            .map_err(Failure::from)
            .and_then(|cfg| cmd_classify(&cfg, out)),
        Command::Verify(args) => load(&args).and_then(|cfg| cmd_verify(&cfg, out).map(|_| ())),
        Command::Lemma5(args) => cmd_lemma5(&args, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Abort(msg)) => {
            let _ = writeln!(err, "numerical abort: {msg}");
            EXIT_ABORT
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.max_iter {
        if n == 0 {
            return Err(Failure::Config("invalid `--max-iter`: must be at least 1".into()));
        }
        cfg.stop.max_iterations = n;
    }
    if let Some(k) = args.log_every {
        if k == 0 {
            return Err(Failure::Config("invalid `--log-every`: must be at least 1".into()));
        }
        cfg.log_every = Some(k);
    }
    Ok(cfg)
}

/// The oracle for the configured problem; `y*` is taken with respect to the
/// configured regularizer, or the minimum-norm element without one.
/// `Ok(Err(reason))` when no oracle applies.
fn oracle_for(cfg: &ExperimentConfig) -> Result<Result<SolutionOracle, String>, Failure> {
    let set = cfg.require_set()?;
    let phi = cfg
        .regularizer
        .clone()
        .unwrap_or_else(|| Regularizer::half_squared_norm(set.dim()));
    let result = if cfg.verify.oracle_fallback {
        let options = LongRunOptions {
            seed: cfg.seed,
            ..LongRunOptions::default()
        };
        solve_oracle_or_numeric(&cfg.objective, set, &phi, &options)
    } else {
        solve_oracle(&cfg.objective, set, &phi)
    };
    match result {
        Ok(o) => Ok(Ok(o)),
        Err(Error::OracleUnavailable(reason)) => Ok(Err(reason)),
        Err(e) => Err(e.into()),
    }
}

/// Runs every problem concurrently; traces come back in input order.
pub fn run_all(
    problems: &[ProblemInstance],
    mode: Mode,
    stop: &StopRule,
    logging: LogSchedule,
    target: Option<&Target>,
) -> crate::Result<Vec<RunTrace>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = problems
            .iter()
            .map(|p| scope.spawn(move || run(p, mode, stop, logging, target)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}

fn problems(cfg: &ExperimentConfig) -> Result<Vec<ProblemInstance>, Failure> {
    Ok(cfg
        .all_starts()?
        .into_iter()
        .map(|s| cfg.problem(s))
        .collect::<crate::Result<Vec<_>>>()?)
}

fn abort_message(traces: &[RunTrace]) -> Option<String> {
    traces.iter().enumerate().find_map(|(i, t)| match &t.status {
        RunStatus::Aborted { n, reason } => Some(format!("run {} at iteration {n}: {reason}", i + 1)),
        _ => None,
    })
}

fn status_label(status: &RunStatus) -> String {
    match status {
        RunStatus::MaxIterations => "max_iterations".into(),
        RunStatus::StepToleranceReached => "step_tolerance".into(),
        RunStatus::TimeLimit => "time_limit".into(),
        RunStatus::Aborted { n, .. } => format!("aborted at {n}"),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.3e}"))
}

fn cmd_solve(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let problems = problems(cfg)?;
    let oracle = oracle_for(cfg)?;
    let target = oracle.as_ref().ok().map(SolutionOracle::target);
    let traces = run_all(&problems, cfg.mode, &cfg.stop, cfg.logging(), target.as_ref())?;

    fs::create_dir_all(&cfg.output_dir).map_err(|e| io_failure(&cfg.output_dir, e))?;
    for (i, (p, t)) in problems.iter().zip(&traces).enumerate() {
        let path = cfg.output_dir.join(format!("run_{}.csv", i + 1));
        let file = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
        t.write_csv(std::io::BufWriter::new(file)).map_err(|e| io_failure(&path, e))?;
        let _ = writeln!(
            out,
            "run {}: x0 = {} -> x = {} after {} iterations [{}], f_gap = {}, dist_to_target = {} ({})",
            i + 1,
            p.x0(),
            t.final_x(),
            t.final_state.n - 1,
            status_label(&t.status),
            opt(t.final_state.f_gap),
            opt(t.final_state.dist_to_target),
            path.display()
        );
    }
    match abort_message(&traces) {
        Some(msg) => Err(Failure::Abort(msg)),
        None => Ok(()),
    }
}

fn cmd_classify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let l_f = cfg.objective.lipschitz();
    let l_phi = cfg.regularizer.as_ref().map_or(0.0, Regularizer::lipschitz);
    let report = cfg.schedule.classify(l_f);
    let _ = writeln!(out, "L_f = {l_f:e}, L_phi = {l_phi:e}");
    let horizon = cfg.schedule.len().unwrap_or(crate::schedules::XU_FINITE_SCAN);
    match cfg.schedule.first_positive_nu(l_f, l_phi, horizon) {
        Some(n0) => {
            let _ = writeln!(out, "n0 (first n with nu_n > 0) = {n0}");
        }
        None => {
            let _ = writeln!(out, "nu_n <= 0 for every n <= {horizon}");
        }
    }
    let _ = writeln!(out, "\n{report}");
    Ok(())
}

fn regime(cfg: &ExperimentConfig, report: &crate::schedules::ConditionReport) -> Regime {
    match cfg.mode {
        Mode::Ggp if report.satisfies_thm2_strong.is_yes() => Regime::Selection,
        Mode::Ggp if report.satisfies_thm2_weak.is_yes() => Regime::SomeMinimizer,
        Mode::Gp if report.satisfies_c2.is_yes() => Regime::SomeMinimizer,
        _ => Regime::Undetermined,
    }
}

/// Runs the full verification and writes `report.txt` and `report.json`.
pub fn verify(cfg: &ExperimentConfig) -> crate::Result<(ReproductionReport, Vec<RunTrace>)> {
    match build_report(cfg) {
        Ok(r) => Ok(r),
        Err(Failure::Config(msg)) | Err(Failure::Abort(msg)) => Err(Error::invalid("verify", msg)),
    }
}

fn build_report(cfg: &ExperimentConfig) -> Result<(ReproductionReport, Vec<RunTrace>), Failure> {
    let set = cfg.require_set()?;
    let classification = cfg.schedule.classify(cfg.objective.lipschitz());
    let regime = regime(cfg, &classification);
    let mut rows = Vec::new();

    for (name, verdict) in [
        ("schedule.c2", classification.satisfies_c2),
        ("schedule.thm2_strong", classification.satisfies_thm2_strong),
        ("schedule.thm2_weak", classification.satisfies_thm2_weak),
        ("schedule.xu_th0", classification.satisfies_xu_th0),
        ("schedule.xu_exponent_regime", classification.xu_exponent_regime),
    ] {
        let status = if verdict == Verdict::Undecidable {
            RowStatus::Skip
        } else {
            RowStatus::Info
        };
        rows.push(ReportRow::status(name, status, verdict.to_string()));
    }
    rows.push(ReportRow::info("regime", regime.to_string()));

    let oracle = oracle_for(cfg)?;
    match &oracle {
        Ok(o) => rows.push(ReportRow::info(
            "oracle",
            format!("{}: f* = {:e}, y* = {}", o.method, o.f_star, o.y_star),
        )),
        Err(reason) => rows.push(ReportRow::status("oracle", RowStatus::Skip, format!("oracle unavailable: {reason}"))),
    }
    let oracle = oracle.ok();
    let target = oracle.as_ref().map(SolutionOracle::target);

    let problems = problems(cfg)?;
    let traces = run_all(&problems, cfg.mode, &cfg.stop, cfg.logging(), target.as_ref())?;
    let claims = regime != Regime::Undetermined;
    let claim_status = |row: ReportRow| if claims { row } else { row.with_status(RowStatus::Info) };

    let mut runs = Vec::new();
    for (i, (p, t)) in problems.iter().zip(&traces).enumerate() {
        let run_id = Some(i + 1);
        let x = t.final_x();
        let dist_to_set = match distance_to_solution_set(&cfg.objective, set, x) {
            Ok(d) => Some(d),
            Err(Error::OracleUnavailable(_)) => None,
            Err(e) => return Err(e.into()),
        };
        match t.final_state.f_gap {
            Some(g) => rows.push(claim_status(ReportRow::at_most("f_gap", run_id, g, cfg.verify.f_gap_max))),
            None => rows.push(ReportRow { run: run_id, ..ReportRow::status("f_gap", RowStatus::Skip, "no oracle") }),
        }
        match dist_to_set {
            Some(d) => rows.push(claim_status(ReportRow::at_most("dist_to_set", run_id, d, cfg.verify.dist_to_set_max))),
            None => rows.push(ReportRow { run: run_id, ..ReportRow::status("dist_to_set", RowStatus::Skip, "no oracle") }),
        }
        match t.final_state.dist_to_target {
            Some(d) => {
                let row = ReportRow::at_most("dist_to_target", run_id, d, cfg.verify.dist_to_target_max);
                rows.push(match regime {
                    Regime::Selection => row,
                    Regime::SomeMinimizer => row
                        .with_status(RowStatus::NotApplicable)
                        .with_note("limit depends on the start"),
                    Regime::Undetermined => row.with_status(RowStatus::Info),
                });
            }
            None => rows.push(ReportRow { run: run_id, ..ReportRow::status("dist_to_target", RowStatus::Skip, "no oracle") }),
        }
        runs.push(RunSummary {
            run: i + 1,
            start: p.x0().as_slice().to_vec(),
            final_x: x.as_slice().to_vec(),
            iterations: t.final_state.n - 1,
            status: status_label(&t.status),
            f_gap: t.final_state.f_gap,
            dist_to_target: t.final_state.dist_to_target,
            dist_to_set,
        });
    }

    let finals: Vec<_> = traces.iter().map(|t| t.final_x().clone()).collect();
    let spread = max_pairwise_distance(&finals);
    let spread_row = ReportRow::at_most("spread", None, spread, cfg.verify.spread_max);
    rows.push(match regime {
        Regime::Selection => spread_row,
        _ => spread_row.with_status(RowStatus::Info).with_note("no common limit claimed"),
    });

    rows.extend(audit_rows(cfg, &problems[0], target.as_ref())?);

    let report = ReproductionReport {
        regime,
        classification,
        oracle,
        runs,
        spread,
        rows,
    };
    Ok((report, traces))
}

/// Audits on a densely logged run from the first start.
fn audit_rows(cfg: &ExperimentConfig, p: &ProblemInstance, target: Option<&Target>) -> Result<Vec<ReportRow>, Failure> {
    let n = cfg.stop.max_iterations.min(cfg.verify.audit_iterations);
    let stop = StopRule::iterations(n);
    let t = run(p, cfg.mode, &stop, LogSchedule::Every(1), target)?;
    let mut rows = Vec::new();
    let note = format!("dense run of {n} iterations");
    let Some(n0) = t.n0 else {
        for name in ["audit.phi_monotone", "audit.fejer", "audit.step_tail_share"] {
            rows.push(ReportRow::status(name, RowStatus::Skip, "nu_n never positive"));
        }
        return Ok(rows);
    };
    let phi_violations = phi_monotonicity_violations(&t).len() as f64;
    rows.push(ReportRow::at_most("audit.phi_monotone", None, phi_violations, 0.0).with_note(format!("{note}, n >= {n0}")));
    match target {
        Some(target) => {
            let reference = match cfg.mode {
                Mode::Ggp => FejerReference::for_problem(p, target.point.clone(), target.f_star)?,
                Mode::Gp => FejerReference {
                    x: target.point.clone(),
                    phi_excess: 0.0,
                    f_star: target.f_star,
                },
            };
            let violations = fejer_audit(&t, &reference)?.iter().filter(|v| v.n >= n0).count() as f64;
            rows.push(ReportRow::at_most("audit.fejer", None, violations, 0.0).with_note(format!("{note}, n >= {n0}")));
        }
        None => rows.push(ReportRow::status("audit.fejer", RowStatus::Skip, "no oracle")),
    }
    let share = step_tail_share(&t, n / 2)?;
    rows.push(
        ReportRow::at_most("audit.step_tail_share", None, share, STEP_TAIL_SHARE_MAX)
            .with_note(format!("share of sum |dx|^2 from n >= {}", n / 2)),
    );
    Ok(rows)
}

fn cmd_verify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<ReproductionReport, Failure> {
    let (report, traces) = build_report(cfg)?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| io_failure(&cfg.output_dir, e))?;
    let text = report.to_string();
    let txt = cfg.output_dir.join("report.txt");
    fs::write(&txt, format!("{text}\n")).map_err(|e| io_failure(&txt, e))?;
    let json = cfg.output_dir.join("report.json");
    fs::write(&json, report.to_json()).map_err(|e| io_failure(&json, e))?;
    let _ = writeln!(out, "{text}");
    match abort_message(&traces) {
        Some(msg) => Err(Failure::Abort(msg)),
        None => Ok(report),
    }
}

fn cmd_lemma5(args: &Lemma5Args, out: &mut dyn Write) -> Result<(), Failure> {
    let inst = LemmaFiveInstance::new(args.eps.0, args.r.0, args.delta.0, args.u0)?
        .starting_at(args.first_index)?
        .with_seed(args.seed);
    let r = lemma5_simulate(&inst, args.horizon, !args.sub_equality)?;
    let yes = |b: bool| if b { "YES" } else { "NO" };
    let h = &r.hypotheses;
    let _ = writeln!(out, "eps = {}, r = {}, delta = {}, u0 = {}", inst.eps, inst.r, inst.delta, inst.u0);
    let _ = writeln!(
        out,
        "hypotheses: sum eps = inf {}, r -> 0 {}, sum delta < inf {}",
        yes(h.eps_sum_diverges),
        yes(h.r_tends_to_zero),
        yes(h.delta_summable)
    );
    let _ = writeln!(out, "u at n = {}: {:e}", args.first_index + args.horizon, r.final_u);
    let _ = writeln!(out, "max u over last 10%: {:e}", r.tail_max);
    let _ = writeln!(
        out,
        "explicit bound respected: {} (max relative excess {:e})",
        yes(r.bound_respected),
        r.max_bound_excess
    );
    let _ = writeln!(
        out,
        "empirical constant tail_max / sup r~: {}",
        r.empirical_constant.map_or_else(|| "n/a".into(), |c| format!("{c:.4}"))
    );
    let _ = writeln!(out, "tail_max <= e * sup r~: {}", yes(r.within_factor_e));
    Ok(())
}
