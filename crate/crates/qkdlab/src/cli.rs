//! Command-line front end: configuration loading, experiment execution and
//! report emission.
//!
//! Exit codes: 0 success, 2 config error, 3 verification failure, 4 I/O
//! failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::adversaries::AttackKind;
use crate::analysis::{
    detection_curve, efficiency_curve, run_experiment_jobs, CheckSchedule, CiMethod,
    EfficiencyBlock, ExperimentPlan, ExperimentReport,
};
use crate::error::{Error, Result};
use crate::protocols::{Family, ProtocolConfig};
use crate::verify::{run_filtered, VerifyParams};

/// Documented default master seed; overridable with the QKDLAB_SEED
/// environment variable or --seed.
pub const DEFAULT_SEED: u64 = 7;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "qkdlab",
    about = "Simulation laboratory for entanglement-encrypted key distribution",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo experiment and emit the aggregated report.
    Run(RunArgs),
    /// Check every protocol state construction against the exact oracle.
    Verify(VerifyArgs),
    /// Print efficiency figures and scheme crossover points.
    Efficiency(EfficiencyArgs),
    /// Emit detection or practical-efficiency curves.
    Curves(CurvesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat JSON config file; inline flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub protocol: Option<String>,
    /// Key dimension (d); for the d-level family this also sets the carrier.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Key dimension (D), overriding --dim.
    #[arg(long)]
    pub key_dim: Option<usize>,
    #[arg(long)]
    pub carrier_dim: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub attack: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Probability that a round is publicly compared.
    #[arg(long)]
    pub check_fraction: Option<f64>,
    /// Explicit comma-separated check positions (1-based), overriding the
    /// fraction.
    #[arg(long, value_delimiter = ',')]
    pub check_positions: Option<Vec<usize>>,
    /// Compare every round.
    #[arg(long, default_value_t = false)]
    pub check_all: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for trials (serial by default; the report is identical
    /// either way).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the first trial's per-round transcript (one JSON object per
    /// round) to this path.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Abort each trial at the first detected mismatch.
    #[arg(long, default_value_t = false)]
    pub stop_on_detection: bool,
    /// Count the error rate only for rounds after this index.
    #[arg(long, default_value_t = 0)]
    pub qber_skip: usize,
    /// Exact Clopper-Pearson intervals instead of the normal approximation.
    #[arg(long, default_value_t = false)]
    pub exact_ci: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check only equations whose id starts with this prefix (e.g. eq7).
    #[arg(long)]
    pub only: Option<String>,
    /// Dimension for the d-level checks.
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Even key dimension for the repaired-protocol checks.
    #[arg(long, default_value_t = 4)]
    pub hd_dim: usize,
    #[arg(long, default_value_t = 0.6)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.8)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Pretty)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    /// Transmittance grid rows; defaults to 0.1 .. 1.0.
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Pretty)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Curve family: detection probability vs check count, or practical
    /// efficiency vs transmittance.
    #[arg(long, default_value = "detection")]
    pub kind: String,
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub attack: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub check_counts: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flat key-value config file contents. Every field optional; inline flags
/// win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    protocol: Option<String>,
    dim: Option<usize>,
    key_dim: Option<usize>,
    carrier_dim: Option<usize>,
    theta: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    attack: Option<String>,
    trials: Option<usize>,
    rounds: Option<usize>,
    check_fraction: Option<f64>,
    check_positions: Option<Vec<usize>>,
    check_all: Option<bool>,
    seed: Option<u64>,
    stop_on_detection: Option<bool>,
    qber_skip: Option<usize>,
    exact_ci: Option<bool>,
    exact_mode_counts: Option<bool>,
}

fn env_seed() -> Option<u64> {
    std::env::var("QKDLAB_SEED").ok().and_then(|v| v.parse().ok())
}

fn build_plan(args: &RunArgs) -> Result<ExperimentPlan> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("config file: {e}")))?
        }
        None => FileConfig::default(),
    };

    let family_name = args
        .protocol
        .clone()
        .or(file.protocol.clone())
        .ok_or_else(|| Error::Config("protocol: required (flag or config file)".into()))?;
    let family = Family::parse(&family_name)?;
    let mut config = ProtocolConfig::new(family);
    if let Some(d) = args.dim.or(file.dim) {
        config = config.with_key_dim(d);
    }
    if let Some(d) = args.key_dim.or(file.key_dim) {
        config.key_dim = d;
    }
    if let Some(k) = args.carrier_dim.or(file.carrier_dim) {
        config.carrier_dim = k;
    }
    if let Some(t) = args.theta.or(file.theta) {
        config.theta = t;
    }
    if let Some(a) = args.alpha.or(file.alpha) {
        config.alpha = Some(a);
    }
    if let Some(b) = args.beta.or(file.beta) {
        config.beta = Some(b);
    }
    if let Some(x) = file.exact_mode_counts {
        config.exact_mode_counts = x;
    }

    let attack_name = args
        .attack
        .clone()
        .or(file.attack.clone())
        .unwrap_or_else(|| "passive".into());
    let attack = AttackKind::parse(&attack_name)?;

    let check = if args.check_all || file.check_all == Some(true) {
        CheckSchedule::All
    } else if let Some(p) = args.check_positions.clone().or(file.check_positions.clone()) {
        CheckSchedule::Positions { positions: p }
    } else if let Some(f) = args.check_fraction.or(file.check_fraction) {
        CheckSchedule::Fraction { fraction: f }
    } else {
        CheckSchedule::Fraction { fraction: 0.25 }
    };

    let plan = ExperimentPlan {
        config,
        attack,
        trials: args.trials.or(file.trials).unwrap_or(100),
        rounds: args.rounds.or(file.rounds).unwrap_or(20),
        check,
        seed: args
            .seed
            .or(file.seed)
            .or_else(env_seed)
            .unwrap_or(DEFAULT_SEED),
        stop_on_detection: args.stop_on_detection || file.stop_on_detection.unwrap_or(false),
        qber_skip_rounds: if args.qber_skip > 0 {
            args.qber_skip
        } else {
            file.qber_skip.unwrap_or(0)
        },
        ci_method: if args.exact_ci || file.exact_ci.unwrap_or(false) {
            CiMethod::ClopperPearson
        } else {
            CiMethod::Normal3Sigma
        },
    };
    plan.validate()?;
    Ok(plan)
}

fn write_output(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn report_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("key,value\n");
    s.push_str(&format!("schema_version,{}\n", report.schema_version));
    s.push_str(&format!("protocol,{}\n", report.plan.config.family.as_str()));
    s.push_str(&format!("attack,{}\n", report.plan.attack.as_str()));
    s.push_str(&format!("trials,{}\n", report.trials));
    s.push_str(&format!("success_rate,{}\n", report.success.rate));
    s.push_str(&format!("success_ci_low,{}\n", report.success.ci_low));
    s.push_str(&format!("success_ci_high,{}\n", report.success.ci_high));
    s.push_str(&format!("detection_rate,{}\n", report.detection.rate));
    s.push_str(&format!("qber,{}\n", report.qber));
    s.push_str(&format!("eve_leak_fraction,{}\n", report.eve_leak_fraction));
    if let Some(m) = report.mean_rounds_to_detection {
        s.push_str(&format!("mean_rounds_to_detection,{m}\n"));
    }
    s
}

fn report_pretty(report: &ExperimentReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "experiment: {} + {} | trials {} rounds {} seed {}\n",
        report.plan.config.family.as_str(),
        report.plan.attack.as_str(),
        report.trials,
        report.plan.rounds,
        report.plan.seed,
    ));
    s.push_str(&format!(
        "success    {:.4}  [{:.4}, {:.4}]\n",
        report.success.rate, report.success.ci_low, report.success.ci_high
    ));
    s.push_str(&format!(
        "detection  {:.4}  [{:.4}, {:.4}]\n",
        report.detection.rate, report.detection.ci_low, report.detection.ci_high
    ));
    s.push_str(&format!("qber       {:.4}\n", report.qber));
    s.push_str(&format!("eve leak   {:.4}\n", report.eve_leak_fraction));
    if let Some(m) = report.mean_rounds_to_detection {
        s.push_str(&format!("mean rounds to detection {m:.2}\n"));
    }
    if let Some(r) = report.min_key_rank_after_round1 {
        s.push_str(&format!("min key rank after round 1: {r}\n"));
    }
    s
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let plan = build_plan(args)?;
    let report = run_experiment_jobs(&plan, args.jobs.max(1))?;
    if let Some(path) = &args.transcript {
        let first = crate::analysis::run_trial(&plan, 0)?;
        let mut buf = Vec::new();
        first.transcript.write_ndjson(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    let body = match args.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
        OutputFormat::Csv => report_csv(&report),
        OutputFormat::Pretty => report_pretty(&report),
    };
    write_output(&args.out, &body)?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    if args.dim < 2 {
        return Err(Error::Config("dim: must be at least 2".into()));
    }
    if args.hd_dim < 4 || args.hd_dim % 2 != 0 {
        return Err(Error::Config("hd_dim: must be even and at least 4".into()));
    }
    let params = VerifyParams {
        d: args.dim,
        hd_dim: args.hd_dim,
        alpha: args.alpha,
        beta: args.beta,
    };
    let checks = run_filtered(&params, args.only.as_deref())?;
    if checks.is_empty() {
        return Err(Error::Config(format!(
            "only: no equation id starts with `{}`",
            args.only.as_deref().unwrap_or("")
        )));
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let body = match args.format {
        OutputFormat::Json => serde_json::to_string_pretty(&checks)? + "\n",
        OutputFormat::Csv => {
            let mut s = String::from("equation,pass,max_deviation\n");
            for c in &checks {
                s.push_str(&format!("{},{},{:e}\n", c.id, c.pass, c.max_deviation));
            }
            s
        }
        OutputFormat::Pretty => {
            let mut s = String::new();
            for c in &checks {
                s.push_str(&format!(
                    "{:<14} {}  max_dev={:9.3e}{}\n",
                    c.id,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.max_deviation,
                    c.info
                        .as_deref()
                        .map(|i| format!("  ({i})"))
                        .unwrap_or_default()
                ));
            }
            s.push_str(if all_pass {
                "all checks passed\n"
            } else {
                "CHECK FAILURES PRESENT\n"
            });
            s
        }
    };
    write_output(&args.out, &body)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY })
}

pub fn cmd_efficiency(args: &EfficiencyArgs) -> Result<i32> {
    let taus: Vec<f64> = args
        .tau
        .clone()
        .unwrap_or_else(|| (1..=10).map(|i| i as f64 / 10.0).collect());
    for &t in &taus {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Config(format!("tau: must lie in (0, 1], got {t}")));
        }
    }
    let rows = efficiency_curve(&taus)?;
    let block = EfficiencyBlock::standard();
    let body = match args.format {
        OutputFormat::Json => {
            #[derive(serde::Serialize)]
            struct EffOut<'a> {
                summary: &'a EfficiencyBlock,
                rows: &'a [crate::analysis::EfficiencyRow],
            }
            serde_json::to_string_pretty(&EffOut {
                summary: &block,
                rows: &rows,
            })? + "\n"
        }
        OutputFormat::Csv => {
            let mut s = String::from("tau,scheme,bb84,lucamarini_mancini\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.tau, r.scheme, r.bb84, r.lucamarini_mancini
                ));
            }
            s
        }
        OutputFormat::Pretty => {
            let mut s = String::new();
            s.push_str(&format!(
                "epsilon: scheme {:.4}, bb84 {:.4}, lucamarini-mancini {:.4}\n",
                block.scheme_epsilon, block.bb84_epsilon, block.lucamarini_mancini_epsilon
            ));
            s.push_str(&format!(
                "crossover vs bb84: tau = {:.4}\ncrossover vs lucamarini-mancini: tau = {:.4}\n",
                block.crossover_vs_bb84, block.crossover_vs_lucamarini_mancini
            ));
            s.push_str("tau    scheme   bb84     lucamarini-mancini\n");
            for r in &rows {
                s.push_str(&format!(
                    "{:<6.3} {:<8.5} {:<8.5} {:<8.5}\n",
                    r.tau, r.scheme, r.bb84, r.lucamarini_mancini
                ));
            }
            s
        }
    };
    write_output(&args.out, &body)?;
    Ok(EXIT_OK)
}

pub fn cmd_curves(args: &CurvesArgs) -> Result<i32> {
    let body = match args.kind.as_str() {
        "detection" => {
            let family = Family::parse(args.protocol.as_deref().unwrap_or("zlg"))?;
            let mut config = ProtocolConfig::new(family);
            if let Some(d) = args.dim {
                config = config.with_key_dim(d);
            }
            if let Some(t) = args.theta {
                config.theta = t;
            }
            let attack = AttackKind::parse(args.attack.as_deref().unwrap_or("cnot-ancilla"))?;
            let mut plan = ExperimentPlan::new(config, attack);
            plan.trials = args.trials.unwrap_or(2000);
            plan.seed = args.seed.or_else(env_seed).unwrap_or(DEFAULT_SEED);
            plan.rounds = 2;
            let counts = args
                .check_counts
                .clone()
                .unwrap_or_else(|| vec![1, 2, 3, 4, 5, 6]);
            let points = detection_curve(&plan, &counts, args.jobs.max(1))?;
            match args.format {
                OutputFormat::Json => serde_json::to_string_pretty(&points)? + "\n",
                _ => {
                    let mut s = String::from("checks,detection_probability\n");
                    for p in &points {
                        s.push_str(&format!("{},{}\n", p.checks, p.detection_probability));
                    }
                    s
                }
            }
        }
        "efficiency" => {
            let taus: Vec<f64> = args
                .taus
                .clone()
                .unwrap_or_else(|| (1..=20).map(|i| i as f64 / 20.0).collect());
            let rows = efficiency_curve(&taus)?;
            match args.format {
                OutputFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
                _ => {
                    let mut s = String::from("tau,scheme,bb84,lucamarini_mancini\n");
                    for r in &rows {
                        s.push_str(&format!(
                            "{},{},{},{}\n",
                            r.tau, r.scheme, r.bb84, r.lucamarini_mancini
                        ));
                    }
                    s
                }
            }
        }
        other => {
            return Err(Error::Config(format!(
                "kind: expected `detection` or `efficiency`, got `{other}`"
            )))
        }
    };
    write_output(&args.out, &body)?;
    Ok(EXIT_OK)
}

/// Maps an error to its documented exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Efficiency(args) => cmd_efficiency(args),
        Command::Curves(args) => cmd_curves(args),
    }
}
