//! Detection-probability and practical-efficiency curves.

use serde::Serialize;

use crate::error::Result;

use super::efficiency::{practical_efficiency, EfficiencyInput};
use super::{run_experiment_jobs, CheckSchedule, ExperimentPlan};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub checks: usize,
    pub detection_probability: f64,
}

/// Monte Carlo detection probability as a function of the number of check
/// rounds. Checks occupy consecutive rounds starting at round two (round one
/// is undisturbed by every strategy modeled here).
pub fn detection_curve(
    base: &ExperimentPlan,
    check_counts: &[usize],
    jobs: usize,
) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::with_capacity(check_counts.len());
    for &n in check_counts {
        let mut plan = base.clone();
        plan.rounds = base.rounds.max(n + 1);
        plan.check = CheckSchedule::Positions {
            positions: (2..2 + n).collect(),
        };
        let report = run_experiment_jobs(&plan, jobs)?;
        out.push(CurvePoint {
            checks: n,
            detection_probability: report.detection.rate,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EfficiencyRow {
    pub tau: f64,
    pub scheme: f64,
    pub bb84: f64,
    pub lucamarini_mancini: f64,
}

/// Practical efficiency of the three compared schemes over a transmittance
/// grid.
pub fn efficiency_curve(taus: &[f64]) -> Result<Vec<EfficiencyRow>> {
    taus.iter()
        .map(|&tau| {
            Ok(EfficiencyRow {
                tau,
                scheme: practical_efficiency(&EfficiencyInput::scheme(tau))?,
                bb84: practical_efficiency(&EfficiencyInput::bb84(tau))?,
                lucamarini_mancini: practical_efficiency(&EfficiencyInput::lucamarini_mancini(
                    tau,
                ))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::AttackKind;
    use crate::protocols::{Family, ProtocolConfig};

    #[test]
    fn passive_curve_is_zero() {
        let mut plan = ExperimentPlan::new(ProtocolConfig::new(Family::Zlg), AttackKind::Passive);
        plan.trials = 10;
        plan.rounds = 8;
        plan.seed = 3;
        let curve = detection_curve(&plan, &[1, 3, 5], 1).unwrap();
        assert!(curve.iter().all(|p| p.detection_probability == 0.0));
    }

    #[test]
    fn efficiency_rows_at_unit_transmittance() {
        let rows = efficiency_curve(&[1.0]).unwrap();
        assert!((rows[0].scheme - 1.0).abs() < 1e-12);
        assert!((rows[0].bb84 - 1.0 / 6.0).abs() < 1e-12);
        assert!((rows[0].lucamarini_mancini - 0.5).abs() < 1e-12);
    }
}
