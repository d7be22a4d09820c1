//! Monte Carlo experiment runner and statistics.
//!
//! Trials are independent: each owns its session, protocol instance,
//! interceptor and random stream, seeded from the master seed and the trial
//! index alone. Aggregation is ordered by trial index, so serial and
//! parallel runs produce identical reports.

mod curves;
mod efficiency;
mod report;
mod stats;

pub use curves::{detection_curve, efficiency_curve, CurvePoint, EfficiencyRow};
pub use efficiency::{
    crossover_tau, efficiency, practical_efficiency, EfficiencyBlock, EfficiencyInput,
};
pub use report::ExperimentReport;
pub use stats::{binomial_rate, splitmix64, trial_seed, CiMethod, RateWithCi};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::adversaries::{build_interceptor, AttackKind, AttackReport};
use crate::error::{Error, Result};
use crate::protocols::{build_protocol, CheckComparison, ProtocolConfig, RoundKind};
use crate::runtime::{PartyId, Payload, RoundRecord, SessionRng, Transcript};

/// When rounds are publicly compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckSchedule {
    /// Every round is compared.
    All,
    /// No comparisons at all.
    NoChecks,
    /// Each round is a check independently with this probability.
    Fraction { fraction: f64 },
    /// Explicit check-round positions (1-based).
    Positions { positions: Vec<usize> },
}

impl CheckSchedule {
    fn validate(&self) -> Result<()> {
        if let CheckSchedule::Fraction { fraction } = self {
            if !(0.0..=1.0).contains(fraction) {
                return Err(Error::Config(format!(
                    "check_fraction: must lie in [0, 1], got {fraction}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub config: ProtocolConfig,
    pub attack: AttackKind,
    pub trials: usize,
    pub rounds: usize,
    pub check: CheckSchedule,
    pub seed: u64,
    /// Abort a trial at the first detected mismatch (the parties discard the
    /// key, per the protocol contract). Off by default so detection
    /// statistics over longer schedules can be measured.
    #[serde(default)]
    pub stop_on_detection: bool,
    /// Count the error rate only for rounds after this index. Used to probe
    /// the per-round error rate an attack induces on an already-touched key.
    #[serde(default)]
    pub qber_skip_rounds: usize,
    #[serde(default)]
    pub ci_method: CiMethod,
}

impl ExperimentPlan {
    pub fn new(config: ProtocolConfig, attack: AttackKind) -> Self {
        ExperimentPlan {
            config,
            attack,
            trials: 1,
            rounds: 10,
            check: CheckSchedule::Fraction { fraction: 0.25 },
            seed: crate::cli::DEFAULT_SEED,
            stop_on_detection: false,
            qber_skip_rounds: 0,
            ci_method: CiMethod::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        // Surface pairing errors before any trial runs.
        build_interceptor(self.attack, &self.config)?;
        if self.trials == 0 {
            return Err(Error::Config("trials: must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Config("rounds: must be at least 1".into()));
        }
        self.check.validate()
    }
}

/// Everything measured about one trial.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial: usize,
    pub rounds_run: usize,
    pub message_rounds: usize,
    pub qber_rounds: usize,
    pub qber_errors: usize,
    pub detected_at: Option<usize>,
    pub attack: AttackReport,
    /// Message symbols Eve's final estimates got right.
    pub eve_correct_messages: usize,
    /// Reduced rank of Alice's key subsystem right after round one
    /// (attacked runs only).
    pub key_rank_after_round1: Option<usize>,
    /// Every completed message round had all receivers equal to Alice.
    pub message_rounds_match: bool,
    /// Bob and Charlie agreed in every round (three-party runs; true
    /// otherwise).
    pub receivers_agree: bool,
    pub transcript: Transcript,
}

/// Runs a single trial of the plan. Deterministic in (plan, trial_index).
pub fn run_trial(plan: &ExperimentPlan, trial_index: usize) -> Result<TrialResult> {
    let mut protocol = build_protocol(&plan.config)?;
    let interceptor = build_interceptor(plan.attack, &plan.config)?;
    let rng = SessionRng::seed_from_u64(trial_seed(plan.seed, trial_index as u64));
    let mut session = protocol.init_session(
        crate::runtime::QuantumChannel::with_interceptor(interceptor),
        rng,
    )?;
    protocol.begin_trial(&mut session, plan.rounds)?;

    // Check positions are drawn before any round so the schedule does not
    // depend on measurement outcomes.
    let scheduled_check: Vec<bool> = match &plan.check {
        CheckSchedule::All => vec![true; plan.rounds],
        CheckSchedule::NoChecks => vec![false; plan.rounds],
        CheckSchedule::Positions { positions } => (1..=plan.rounds)
            .map(|r| positions.contains(&r))
            .collect(),
        CheckSchedule::Fraction { fraction } => {
            let f = *fraction;
            (0..plan.rounds)
                .map(|_| session.rng.gen::<f64>() < f)
                .collect()
        }
    };
    let symbol_dim = plan.config.symbol_dim();
    let comparison = protocol.check_comparison();
    let attacked = plan.attack != AttackKind::Passive;
    let key_labels = protocol.key_labels();

    let mut detected_at: Option<usize> = None;
    let mut qber_rounds = 0usize;
    let mut qber_errors = 0usize;
    let mut message_rounds: Vec<(usize, u32)> = Vec::new();
    let mut message_rounds_match = true;
    let mut receivers_agree = true;
    let mut key_rank_after_round1 = None;
    let mut records: Vec<RoundRecord> = Vec::new();

    for r in 1..=plan.rounds {
        let symbol = session.rng.gen_range(0..symbol_dim);
        let scheduled = if scheduled_check[r - 1] {
            RoundKind::Check
        } else {
            RoundKind::Message
        };
        let outcome = protocol.run_round(&mut session, symbol, scheduled)?;
        debug_assert_eq!(outcome.round, r);

        if r == 1 && attacked {
            key_rank_after_round1 =
                Some(session.state.partial_trace_rank(&key_labels[..1])?);
        }

        let error = outcome.bob_symbol != symbol
            || outcome.charlie_symbol.is_some_and(|c| c != symbol);
        if r > plan.qber_skip_rounds {
            qber_rounds += 1;
            if outcome.bob_symbol != symbol {
                qber_errors += 1;
            }
        }
        if let Some(c) = outcome.charlie_symbol {
            if c != outcome.bob_symbol {
                receivers_agree = false;
            }
        }

        let mut detected_this_round = false;
        match (comparison, outcome.round_kind) {
            (CheckComparison::Immediate, RoundKind::Check) => {
                session.announce(
                    PartyId::Alice,
                    Payload::CheckValue {
                        position: r,
                        value: symbol,
                    },
                );
                session.announce(
                    PartyId::Bob,
                    Payload::CheckValue {
                        position: r,
                        value: outcome.bob_symbol,
                    },
                );
                if error && detected_at.is_none() {
                    detected_at = Some(r);
                }
                detected_this_round = error;
            }
            _ => {
                if outcome.round_kind == RoundKind::Message {
                    message_rounds.push((r, symbol));
                    if error {
                        message_rounds_match = false;
                    }
                }
            }
        }
        if comparison == CheckComparison::Immediate && outcome.round_kind == RoundKind::Message {
            message_rounds.push((r, symbol));
            if error {
                message_rounds_match = false;
            }
        }

        let ann_from = session.board.len();
        records.push(RoundRecord {
            round: r,
            kind: match outcome.round_kind {
                RoundKind::Message => "message".into(),
                RoundKind::Check => "check".into(),
            },
            alice_symbol: symbol,
            bob_symbol: outcome.bob_symbol,
            charlie_symbol: outcome.charlie_symbol,
            eve_symbol: None,
            detected: detected_this_round,
            transits: session
                .channel
                .transit_log
                .iter()
                .filter(|t| t.round == r)
                .cloned()
                .collect(),
            announcements: session.board.entries()[ann_from.min(session.board.len())..]
                .to_vec(),
        });

        if plan.stop_on_detection && detected_at.is_some() {
            break;
        }
    }

    // The classical-communication variants reveal their check choices only
    // after the full run; compare them on the board now.
    if comparison == CheckComparison::Batched {
        // Collect first to keep announcement order by round.
        let checks: Vec<(usize, u32, u32)> = records
            .iter()
            .filter(|rec| rec.kind == "check")
            .map(|rec| (rec.round, rec.alice_symbol, rec.bob_symbol))
            .collect();
        for (round, alice, bob) in checks {
            session.announce(
                PartyId::Alice,
                Payload::CheckValue {
                    position: round,
                    value: alice,
                },
            );
            session.announce(
                PartyId::Bob,
                Payload::CheckValue {
                    position: round,
                    value: bob,
                },
            );
            if alice != bob && detected_at.is_none() {
                detected_at = Some(round);
                if let Some(rec) = records.iter_mut().find(|rec| rec.round == round) {
                    rec.detected = true;
                }
            }
        }
    }

    let summary = session
        .channel
        .interceptor
        .as_mut()
        .map(|i| i.finish())
        .unwrap_or_default();

    for rec in records.iter_mut() {
        if let Some(v) = summary.inferred_symbols.get(&rec.round) {
            rec.eve_symbol = Some(*v);
        }
    }

    let eve_correct_messages = message_rounds
        .iter()
        .filter(|(r, sym)| summary.inferred_symbols.get(r) == Some(sym))
        .count();
    let succeeded = detected_at.is_none()
        && summary.resolved
        && summary.fault.is_none()
        && !message_rounds.is_empty()
        && eve_correct_messages == message_rounds.len();

    let rounds_run = records.len();
    Ok(TrialResult {
        trial: trial_index,
        rounds_run,
        message_rounds: message_rounds.len(),
        qber_rounds,
        qber_errors,
        detected_at,
        attack: AttackReport {
            succeeded,
            detected_at,
            inferred_symbols: summary.inferred_symbols,
        },
        eve_correct_messages,
        key_rank_after_round1,
        message_rounds_match,
        receivers_agree,
        transcript: Transcript { rounds: records },
    })
}

/// Runs the whole plan serially.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    run_experiment_jobs(plan, 1)
}

/// Runs the plan with `jobs` worker threads. Per-trial seeding makes the
/// report identical to the serial one.
pub fn run_experiment_jobs(plan: &ExperimentPlan, jobs: usize) -> Result<ExperimentReport> {
    plan.validate()?;
    let results: Vec<TrialResult> = if jobs <= 1 {
        (0..plan.trials)
            .map(|i| run_trial(plan, i))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("jobs: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            (0..plan.trials)
                .into_par_iter()
                .map(|i| run_trial(plan, i))
                .collect::<Result<Vec<_>>>()
        })?
    };
    Ok(report::aggregate(plan, &results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::Family;

    fn base_plan() -> ExperimentPlan {
        let mut plan = ExperimentPlan::new(ProtocolConfig::new(Family::Zlg), AttackKind::Passive);
        plan.trials = 20;
        plan.rounds = 30;
        plan.seed = 99;
        plan
    }

    #[test]
    fn passive_run_has_no_errors_or_detections() {
        let report = run_experiment(&base_plan()).unwrap();
        assert_eq!(report.qber, 0.0);
        assert_eq!(report.detection.rate, 0.0);
        assert_eq!(report.success.rate, 0.0);
        assert_eq!(report.eve_leak_fraction, 0.0);
    }

    #[test]
    fn reports_are_reproducible_and_parallel_identical() {
        let plan = base_plan();
        let a = serde_json::to_string(&run_experiment(&plan).unwrap()).unwrap();
        let b = serde_json::to_string(&run_experiment(&plan).unwrap()).unwrap();
        let c = serde_json::to_string(&run_experiment_jobs(&plan, 4).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn invalid_pairing_rejected() {
        let plan = ExperimentPlan::new(ProtocolConfig::new(Family::Bk), AttackKind::CnotAncilla);
        assert!(matches!(plan.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn passive_interceptor_matches_unhooked_channel() {
        // With equal seeds, a passive-intercepted run and a hook-free run
        // produce byte-identical transcripts.
        use crate::adversaries::PassiveInterceptor;
        use crate::protocols::build_protocol;
        use crate::runtime::QuantumChannel;
        use rand::SeedableRng;

        for hooked in [true, false] {
            let config = ProtocolConfig::new(Family::Zlg);
            let mut protocol = build_protocol(&config).unwrap();
            let channel = if hooked {
                QuantumChannel::with_interceptor(Box::new(PassiveInterceptor::default()))
            } else {
                QuantumChannel::unhooked()
            };
            let mut session = protocol
                .init_session(channel, SessionRng::seed_from_u64(4242))
                .unwrap();
            let mut outs = Vec::new();
            let mut sym_rng = SessionRng::seed_from_u64(5);
            for _ in 0..50 {
                let q = sym_rng.gen_range(0..2u32);
                let out = protocol.run_round(&mut session, q, RoundKind::Message).unwrap();
                outs.push((out.alice_symbol, out.bob_symbol));
            }
            let bytes = serde_json::to_string(&outs).unwrap();
            if hooked {
                // store for comparison via thread-local pattern: simpler to
                // recompute; assert against the unhooked run below.
                UNHOOKED_REFERENCE.with(|r| *r.borrow_mut() = Some(bytes));
            } else {
                UNHOOKED_REFERENCE.with(|r| {
                    let stored = r.borrow();
                    assert_eq!(stored.as_deref(), Some(bytes.as_str()));
                });
            }
        }
    }

    thread_local! {
        static UNHOOKED_REFERENCE: std::cell::RefCell<Option<String>> =
            const { std::cell::RefCell::new(None) };
    }
}
