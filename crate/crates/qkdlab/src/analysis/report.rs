//! Aggregated experiment reports.

use serde::Serialize;

use super::efficiency::EfficiencyBlock;
use super::stats::{binomial_rate, RateWithCi};
use super::{ExperimentPlan, TrialResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    /// Effective plan, echoed for provenance.
    pub plan: ExperimentPlan,
    pub trials: usize,
    pub total_rounds_run: usize,
    /// Attack success rate with its binomial interval.
    pub success: RateWithCi,
    /// Fraction of trials with at least one detected mismatch.
    pub detection: RateWithCi,
    /// Receiver error rate over the counted rounds.
    pub qber: f64,
    /// Fraction of message symbols Eve's final estimates got right.
    pub eve_leak_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rounds_to_detection: Option<f64>,
    /// Smallest reduced key rank observed right after round one across
    /// attacked trials.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_key_rank_after_round1: Option<usize>,
    pub efficiency: EfficiencyBlock,
}

pub(crate) fn aggregate(plan: &ExperimentPlan, results: &[TrialResult]) -> ExperimentReport {
    let trials = results.len();
    let successes = results.iter().filter(|t| t.attack.succeeded).count();
    let detections = results.iter().filter(|t| t.detected_at.is_some()).count();
    let qber_rounds: usize = results.iter().map(|t| t.qber_rounds).sum();
    let qber_errors: usize = results.iter().map(|t| t.qber_errors).sum();
    let messages: usize = results.iter().map(|t| t.message_rounds).sum();
    let eve_correct: usize = results.iter().map(|t| t.eve_correct_messages).sum();
    let detection_rounds: Vec<usize> = results.iter().filter_map(|t| t.detected_at).collect();
    ExperimentReport {
        schema_version: SCHEMA_VERSION,
        plan: plan.clone(),
        trials,
        total_rounds_run: results.iter().map(|t| t.rounds_run).sum(),
        success: binomial_rate(successes, trials, plan.ci_method),
        detection: binomial_rate(detections, trials, plan.ci_method),
        qber: if qber_rounds == 0 {
            0.0
        } else {
            qber_errors as f64 / qber_rounds as f64
        },
        eve_leak_fraction: if messages == 0 {
            0.0
        } else {
            eve_correct as f64 / messages as f64
        },
        mean_rounds_to_detection: if detection_rounds.is_empty() {
            None
        } else {
            Some(detection_rounds.iter().sum::<usize>() as f64 / detection_rounds.len() as f64)
        },
        min_key_rank_after_round1: results
            .iter()
            .filter_map(|t| t.key_rank_after_round1)
            .min(),
        efficiency: EfficiencyBlock::standard(),
    }
}
