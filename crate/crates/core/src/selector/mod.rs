//! Per-instance selection of a portfolio entry for unseen instances.
//!
//! A k-nearest-neighbour selector over z-normalised instance features:
//! k is chosen from {1, 3, 5} by 10-fold cross-validated mean TotalTime,
//! and a single-entry pre-solving schedule (the entry with the highest
//! training applicability, at a tenth of the test budget) is added when it
//! improves the cross-validated TotalTime.

mod protocol;
mod report;

pub use protocol::{run_entry_protocol, run_test_protocol, CostEvent, ProtocolConfig, TestOutcome};
pub use report::{summarize, virtual_best, SummaryRow};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SolveStatus;
use crate::mcts::Portfolio;
use crate::race::EvalOutcome;

/// Multiplier on the training cap used as the imputed TotalTime of an
/// entry that was UNSAT or capped on a training instance.
pub const IMPUTED_PENALTY: u64 = 10;

/// Candidate neighbour counts for cross-validation.
pub const K_CANDIDATES: [usize; 3] = [1, 3, 5];

/// Budget fraction given to the pre-solving schedule entry.
pub const PRE_SCHEDULE_FRACTION: f64 = 0.1;

/// A trained selector, serialisable next to the portfolio it selects from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectorModel {
    pub k: usize,
    pub feature_means: Vec<f64>,
    /// Per-dimension standard deviation; zero marks a dimension excluded
    /// from the distance.
    pub feature_stds: Vec<f64>,
    pub train_ids: Vec<String>,
    /// Normalised training feature matrix, row-aligned with `train_ids`.
    pub train_features: Vec<Vec<f64>>,
    /// Raw per-entry outcomes on the training instances.
    pub entry_outcomes: Vec<BTreeMap<String, EvalOutcome>>,
    /// Pre-solving schedule: (entry index, budget fraction), possibly empty.
    pub pre_schedule: Vec<(usize, f64)>,
    /// Training cap that anchors the imputation penalty.
    pub training_cap: u64,
    /// Hash of the portfolio this selector was trained against.
    pub portfolio_hash: String,
}

impl SelectorModel {
    /// Imputed TotalTime of running entry `e` on training instance `id`.
    pub fn imputed_cost(&self, e: usize, id: &str) -> f64 {
        match self.entry_outcomes[e].get(id) {
            Some(out) if out.status == SolveStatus::Sat => out.cost as f64,
            _ => (self.training_cap.saturating_mul(IMPUTED_PENALTY)) as f64,
        }
    }

    fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.feature_means)
            .zip(&self.feature_stds)
            .map(|((x, m), s)| if *s > 0.0 { (x - m) / s } else { 0.0 })
            .collect()
    }

    /// Indices of the k nearest training instances, restricted to
    /// `allowed` when given (used by cross-validation).
    fn nearest(&self, normed: &[f64], allowed: Option<&[usize]>, k: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = match allowed {
            Some(a) => a.to_vec(),
            None => (0..self.train_ids.len()).collect(),
        };
        let dist = |row: usize| -> f64 {
            self.train_features[row]
                .iter()
                .zip(normed)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        rows.sort_by(|&a, &b| {
            dist(a)
                .partial_cmp(&dist(b))
                .expect("finite distances")
                .then(self.train_ids[a].cmp(&self.train_ids[b]))
        });
        rows.truncate(k);
        rows
    }

    fn select_among(&self, normed: &[f64], allowed: Option<&[usize]>, k: usize) -> usize {
        let neighbours = self.nearest(normed, allowed, k);
        let mut best = 0usize;
        let mut best_cost = f64::INFINITY;
        for e in 0..self.entry_outcomes.len() {
            let summed: f64 =
                neighbours.iter().map(|&r| self.imputed_cost(e, &self.train_ids[r])).sum();
            // ties break towards the lower portfolio rank
            if summed < best_cost {
                best_cost = summed;
                best = e;
            }
        }
        best
    }

    /// Pick the portfolio entry for an unseen instance's raw features.
    pub fn select(&self, raw_features: &[f64]) -> Result<usize> {
        if raw_features.len() != self.feature_means.len() {
            return Err(Error::Validation(format!(
                "feature dimension {} does not match the trained {}",
                raw_features.len(),
                self.feature_means.len()
            )));
        }
        Ok(self.select_among(&self.normalize(raw_features), None, self.k))
    }
}

fn cross_validated_cost(model: &SelectorModel, k: usize, with_schedule: bool) -> f64 {
    let n = model.train_ids.len();
    let folds = 10.min(n);
    let mut total = 0.0;
    for fold in 0..folds {
        let train_rows: Vec<usize> = (0..n).filter(|i| i % folds != fold).collect();
        let val_rows: Vec<usize> = (0..n).filter(|i| i % folds == fold).collect();
        if train_rows.is_empty() {
            continue;
        }
        for &v in &val_rows {
            let id = &model.train_ids[v];
            let feats = model.train_features[v].clone();
            let mut consumed = 0.0;
            let mut solved = false;
            if with_schedule {
                for &(e, frac) in &model.pre_schedule {
                    let pre_budget = (model.training_cap as f64 * frac).floor();
                    match model.entry_outcomes[e].get(id) {
                        Some(out)
                            if out.status == SolveStatus::Sat && (out.cost as f64) <= pre_budget =>
                        {
                            consumed += out.cost as f64;
                            solved = true;
                            break;
                        }
                        Some(out) => consumed += (out.cost as f64).min(pre_budget),
                        None => consumed += pre_budget,
                    }
                }
            }
            if !solved {
                let chosen = model.select_among(&feats, Some(&train_rows), k);
                consumed += model.imputed_cost(chosen, id);
            }
            total += consumed;
        }
    }
    total / n as f64
}

/// Train the selector: z-normalise features, choose k by cross-validated
/// mean TotalTime, and add the pre-solving schedule when it helps.
pub fn train_selector(
    portfolio: &Portfolio,
    features: &BTreeMap<String, Vec<f64>>,
    training_cap: u64,
    portfolio_hash: String,
) -> Result<SelectorModel> {
    if portfolio.entries.is_empty() {
        return Err(Error::Validation("empty portfolio".into()));
    }
    let train_ids: Vec<String> = features.keys().cloned().collect();
    if train_ids.is_empty() {
        return Err(Error::Validation("no training features".into()));
    }
    let dim = features[&train_ids[0]].len();
    if features.values().any(|f| f.len() != dim) {
        return Err(Error::Validation("inconsistent feature dimensionality".into()));
    }
    let n = train_ids.len() as f64;
    let mut means = vec![0.0; dim];
    for id in &train_ids {
        for (m, x) in means.iter_mut().zip(&features[id]) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0; dim];
    for id in &train_ids {
        for ((s, x), m) in stds.iter_mut().zip(&features[id]).zip(&means) {
            *s += (x - m) * (x - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
    }

    let mut model = SelectorModel {
        k: 1,
        feature_means: means,
        feature_stds: stds,
        train_features: Vec::new(),
        entry_outcomes: portfolio.entries.iter().map(|e| e.outcomes.clone()).collect(),
        pre_schedule: Vec::new(),
        training_cap,
        portfolio_hash,
        train_ids,
    };
    model.train_features =
        model.train_ids.iter().map(|id| model.normalize(&features[id])).collect();

    if model.train_ids.len() == 1 {
        return Ok(model); // k = 1, no schedule
    }

    let mut best_k = K_CANDIDATES[0];
    let mut best_cost = f64::INFINITY;
    for k in K_CANDIDATES {
        let cost = cross_validated_cost(&model, k, false);
        if cost < best_cost {
            best_cost = cost;
            best_k = k;
        }
    }
    model.k = best_k;

    // pre-schedule candidate: highest training applicability, ties by rank
    let applicability = |e: usize| -> usize {
        model.entry_outcomes[e]
            .values()
            .filter(|o| o.status == SolveStatus::Sat)
            .count()
    };
    let candidate = (0..portfolio.entries.len())
        .max_by_key(|&e| (applicability(e), std::cmp::Reverse(e)))
        .expect("portfolio is nonempty");
    model.pre_schedule = vec![(candidate, PRE_SCHEDULE_FRACTION)];
    let with_schedule = cross_validated_cost(&model, best_k, true);
    if with_schedule >= best_cost {
        model.pre_schedule.clear();
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::{PortfolioEntry, RewardVector};
    use crate::model::HeuristicName;
    use crate::streamliner::StreamlinerSet;

    fn outcome(status: SolveStatus, cost: u64) -> EvalOutcome {
        EvalOutcome { status, cost }
    }

    fn entry(
        key: u32,
        outcomes: BTreeMap<String, EvalOutcome>,
        app: f64,
    ) -> PortfolioEntry {
        PortfolioEntry {
            set: StreamlinerSet::from_ids([key]),
            descriptions: vec![],
            recipe: HeuristicName::Compact,
            reward: RewardVector { applicability: app, search_reduction: 0.0 },
            round: 1,
            outcomes,
        }
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i:02}")).collect()
    }

    /// Two feature clusters; entry 0 is fast on cluster A, entry 1 on
    /// cluster B.
    fn two_cluster_fixture() -> (Portfolio, BTreeMap<String, Vec<f64>>) {
        let ids = ids(20);
        let mut feats = BTreeMap::new();
        let mut out0 = BTreeMap::new();
        let mut out1 = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            let in_a = i < 10;
            feats.insert(
                id.clone(),
                vec![if in_a { 0.0 } else { 10.0 }, (i % 10) as f64 * 0.05],
            );
            out0.insert(
                id.clone(),
                outcome(SolveStatus::Sat, if in_a { 100 } else { 900 }),
            );
            out1.insert(
                id.clone(),
                outcome(SolveStatus::Sat, if in_a { 900 } else { 100 }),
            );
        }
        let portfolio = Portfolio {
            rounds: 1,
            max_level: 1,
            baseline: ids.iter().map(|i| (i.clone(), 1000)).collect(),
            entries: vec![entry(1, out0, 1.0), entry(2, out1, 1.0)],
        };
        (portfolio, feats)
    }

    #[test]
    fn single_entry_portfolio_always_selects_it() {
        let ids = ids(6);
        let outcomes: BTreeMap<String, EvalOutcome> =
            ids.iter().map(|i| (i.clone(), outcome(SolveStatus::Sat, 100))).collect();
        let portfolio = Portfolio {
            rounds: 1,
            max_level: 1,
            baseline: ids.iter().map(|i| (i.clone(), 1000)).collect(),
            entries: vec![entry(1, outcomes, 1.0)],
        };
        let feats: BTreeMap<String, Vec<f64>> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), vec![i as f64])).collect();
        let model = train_selector(&portfolio, &feats, 10_000, "h".into()).unwrap();
        assert_eq!(model.select(&[3.0]).unwrap(), 0);
        assert_eq!(model.select(&[100.0]).unwrap(), 0);
    }

    #[test]
    fn per_cluster_selection_matches_the_niches() {
        let (portfolio, feats) = two_cluster_fixture();
        let model = train_selector(&portfolio, &feats, 10_000, "h".into()).unwrap();
        // a test point inside cluster A picks entry 0, inside B entry 1
        assert_eq!(model.select(&[0.1, 0.2]).unwrap(), 0);
        assert_eq!(model.select(&[9.9, 0.2]).unwrap(), 1);
    }

    #[test]
    fn never_sat_entries_are_never_selected() {
        let ids = ids(8);
        let sat: BTreeMap<String, EvalOutcome> =
            ids.iter().map(|i| (i.clone(), outcome(SolveStatus::Sat, 500))).collect();
        let unsat: BTreeMap<String, EvalOutcome> =
            ids.iter().map(|i| (i.clone(), outcome(SolveStatus::Unsat, 5))).collect();
        let portfolio = Portfolio {
            rounds: 1,
            max_level: 1,
            baseline: ids.iter().map(|i| (i.clone(), 1000)).collect(),
            entries: vec![entry(1, unsat, 0.0), entry(2, sat, 1.0)],
        };
        let feats: BTreeMap<String, Vec<f64>> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), vec![i as f64])).collect();
        let model = train_selector(&portfolio, &feats, 10_000, "h".into()).unwrap();
        for i in 0..8 {
            assert_eq!(model.select(&[i as f64]).unwrap(), 1);
        }
    }

    #[test]
    fn test_point_equal_to_a_training_point_uses_its_best_entry() {
        let (portfolio, feats) = two_cluster_fixture();
        let mut model = train_selector(&portfolio, &feats, 10_000, "h".into()).unwrap();
        model.k = 1;
        let probe = feats["t03"].clone();
        assert_eq!(model.select(&probe).unwrap(), 0);
        let probe_b = feats["t15"].clone();
        assert_eq!(model.select(&probe_b).unwrap(), 1);
    }

    #[test]
    fn zero_variance_features_are_excluded_from_the_distance() {
        let ids = ids(6);
        // first dimension is constant; only the second carries signal
        let feats: BTreeMap<String, Vec<f64>> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), vec![7.0, i as f64]))
            .collect();
        let mut out0 = BTreeMap::new();
        let mut out1 = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            out0.insert(id.clone(), outcome(SolveStatus::Sat, if i < 3 { 10 } else { 990 }));
            out1.insert(id.clone(), outcome(SolveStatus::Sat, if i < 3 { 990 } else { 10 }));
        }
        let portfolio = Portfolio {
            rounds: 1,
            max_level: 1,
            baseline: ids.iter().map(|i| (i.clone(), 1000)).collect(),
            entries: vec![entry(1, out0, 1.0), entry(2, out1, 1.0)],
        };
        let model = train_selector(&portfolio, &feats, 10_000, "h".into()).unwrap();
        assert_eq!(model.feature_stds[0], 0.0);
        // a wild value in the constant dimension must not disturb selection
        assert_eq!(model.select(&[-1000.0, 0.0]).unwrap(), 0);
        assert_eq!(model.select(&[1000.0, 5.0]).unwrap(), 1);
    }

    #[test]
    fn selector_is_deterministic() {
        let (portfolio, feats) = two_cluster_fixture();
        let a = train_selector(&portfolio, &feats, 10_000, "h".into()).unwrap();
        let b = train_selector(&portfolio, &feats, 10_000, "h".into()).unwrap();
        assert_eq!(a.k, b.k);
        assert_eq!(a.pre_schedule, b.pre_schedule);
        assert_eq!(a.select(&[4.0, 0.1]).unwrap(), b.select(&[4.0, 0.1]).unwrap());
    }
}
