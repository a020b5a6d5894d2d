//! Summary measurements over a set of test outcomes.

use serde::{Deserialize, Serialize};

use super::TestOutcome;

/// One summary line: the share of test instances improved by streamlining
/// (percent), the mean cost reduction on those improved instances
/// (percent), and the ratio of mean baseline cost to mean TotalTime.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mode: String,
    pub selector: String,
    pub pct_imp: f64,
    pub pct_red: f64,
    pub speedup: f64,
}

/// Aggregate outcomes into one summary row.
pub fn summarize(mode: &str, selector: &str, outcomes: &[TestOutcome]) -> SummaryRow {
    let n = outcomes.len().max(1) as f64;
    let improved: Vec<&TestOutcome> =
        outcomes.iter().filter(|o| o.total_cost < o.baseline_cost).collect();
    let pct_imp = 100.0 * improved.len() as f64 / n;
    let pct_red = if improved.is_empty() {
        0.0
    } else {
        100.0
            * improved
                .iter()
                .map(|o| (o.baseline_cost - o.total_cost) as f64 / o.baseline_cost as f64)
                .sum::<f64>()
            / improved.len() as f64
    };
    let mean_base = outcomes.iter().map(|o| o.baseline_cost as f64).sum::<f64>() / n;
    let mean_total = outcomes.iter().map(|o| o.total_cost as f64).sum::<f64>() / n;
    let speedup = if mean_total > 0.0 { mean_base / mean_total } else { 0.0 };
    SummaryRow { mode: mode.to_string(), selector: selector.to_string(), pct_imp, pct_red, speedup }
}

/// Per-instance best outcome over the per-entry protocol runs: the
/// Virtual Best Solver.
pub fn virtual_best(per_entry: &[Vec<TestOutcome>]) -> Vec<TestOutcome> {
    if per_entry.is_empty() {
        return Vec::new();
    }
    let n = per_entry[0].len();
    let mut best = Vec::with_capacity(n);
    for i in 0..n {
        let winner = per_entry
            .iter()
            .map(|entry_outcomes| &entry_outcomes[i])
            .min_by_key(|o| o.total_cost)
            .expect("at least one entry");
        best.push(winner.clone());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SolveStatus;

    fn outcome(id: &str, total: u64, baseline: u64) -> TestOutcome {
        TestOutcome {
            instance_id: id.into(),
            chosen_entry: 0,
            streamlined_status: SolveStatus::Sat,
            total_cost: total,
            baseline_cost: baseline,
            solved: true,
            events: vec![],
        }
    }

    #[test]
    fn all_improved_at_half_cost() {
        let outcomes: Vec<TestOutcome> =
            (0..4).map(|i| outcome(&format!("i{i}"), 500, 1000)).collect();
        let row = summarize("mm", "selector", &outcomes);
        assert_eq!(row.pct_imp, 100.0);
        assert_eq!(row.pct_red, 50.0);
        assert_eq!(row.speedup, 2.0);
    }

    #[test]
    fn no_improvement_anywhere() {
        let outcomes: Vec<TestOutcome> =
            (0..4).map(|i| outcome(&format!("i{i}"), 1200, 1000)).collect();
        let row = summarize("mm", "selector", &outcomes);
        assert_eq!(row.pct_imp, 0.0);
        assert_eq!(row.pct_red, 0.0);
        assert!(row.speedup <= 1.0);
    }

    #[test]
    fn vbs_takes_the_per_instance_minimum_and_dominates() {
        let entry_a = vec![outcome("i0", 100, 1000), outcome("i1", 900, 1000)];
        let entry_b = vec![outcome("i0", 900, 1000), outcome("i1", 100, 1000)];
        let vbs = virtual_best(&[entry_a.clone(), entry_b]);
        assert_eq!(vbs[0].total_cost, 100);
        assert_eq!(vbs[1].total_cost, 100);
        let vbs_row = summarize("mm", "vbs", &vbs);
        let sel_row = summarize("mm", "selector", &entry_a);
        assert!(vbs_row.speedup >= sel_row.speedup);
    }
}
