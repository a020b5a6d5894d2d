//! Racing a model portfolio over a training set.
//!
//! Three mechanisms bound the cost of evaluating a streamliner set:
//! rho-capping terminates a run once it reaches rho times the best
//! completed cost on the same instance; paired t-tests with Bonferroni
//! correction eliminate models that are statistically worse than the
//! current best; and adaptive capping bounds every run by the pace the
//! elite models of the previous level set. Levels double the portfolio
//! size (1, 2, 4, 8), carrying the fully evaluated survivors forward as
//! elites, and everything already computed is served from the evaluator
//! cache.

mod evaluate;
mod ttest;

pub use evaluate::{EvalOutcome, Evaluator, KernelEvaluator, SyntheticEvaluator};
pub use ttest::{paired_one_sided, ttest_eliminate, PairedComparison};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SolveStatus;
use crate::model::{portfolio, HeuristicName};
use crate::seeds;
use crate::streamliner::StreamlinerSet;

/// Racing parameters. Defaults: rho = 2, alpha = 0.05, T_first = 10,
/// T_next = 5.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RaceConfig {
    pub rho: f64,
    pub alpha: f64,
    pub t_first: usize,
    pub t_next: usize,
    pub global_cap: u64,
    pub shuffle_seed: u64,
    /// When set, a rho-dominated run also removes the model from the race
    /// instead of only ending that instance's run.
    pub rho_eliminates: bool,
}

impl Default for RaceConfig {
    fn default() -> Self {
        RaceConfig {
            rho: 2.0,
            alpha: 0.05,
            t_first: 10,
            t_next: 5,
            global_cap: u64::MAX,
            shuffle_seed: 0,
            rho_eliminates: false,
        }
    }
}

/// Cost cap implied by rho-domination: a run reaching `rho` times the
/// best completed cost on the instance is dominated there.
pub fn rho_cap(best_cost_on_instance: u64, rho: f64) -> u64 {
    (best_cost_on_instance as f64 * rho).ceil() as u64
}

/// Adaptive-capping bound for the next instance: the cumulative total the
/// elite pace allows at `k + 1` instances minus the model's cumulative
/// total over the first `k`, floored at zero. `elite_means_next` are the
/// elite models' mean costs over the first `k + 1` instances of the
/// current shuffled order.
pub fn adaptive_bound(elite_means_next: &[f64], k: usize, model_mean_k: f64) -> f64 {
    if elite_means_next.is_empty() {
        return f64::INFINITY;
    }
    let mut means = elite_means_next.to_vec();
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let median = if means.len() % 2 == 1 {
        means[means.len() / 2]
    } else {
        (means[means.len() / 2 - 1] + means[means.len() / 2]) / 2.0
    };
    (median * (k as f64 + 1.0) - model_mean_k * k as f64).max(0.0)
}

/// Why a model left the race.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElimReason {
    TTest,
    AdaptiveCap,
    RhoDominated,
}

impl std::fmt::Display for ElimReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElimReason::TTest => write!(f, "ttest"),
            ElimReason::AdaptiveCap => write!(f, "adaptive-cap"),
            ElimReason::RhoDominated => write!(f, "rho-dominated"),
        }
    }
}

/// One race-log record: either an evaluation or an elimination event.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RaceRow {
    pub set_key: String,
    pub level: u32,
    pub recipe: HeuristicName,
    pub instance_id: String,
    pub cap: u64,
    pub status: String,
    pub cost: u64,
    pub elimination: Option<ElimReason>,
}

/// An elite model: fully evaluated at the previous level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElitePerf {
    pub recipe: HeuristicName,
    pub costs: BTreeMap<String, u64>,
}

/// Per-recipe outcome of one race.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecipeRace {
    pub recipe: HeuristicName,
    pub outcomes: BTreeMap<String, EvalOutcome>,
    pub complete: bool,
    pub eliminated_at: Option<(usize, ElimReason)>,
}

/// Everything one race produced.
#[derive(Debug, Clone)]
pub struct RaceReport {
    pub level: u32,
    pub order: Vec<String>,
    pub results: Vec<RecipeRace>,
    pub rows: Vec<RaceRow>,
}

impl RaceReport {
    pub fn survivors(&self) -> impl Iterator<Item = &RecipeRace> {
        self.results.iter().filter(|r| r.complete)
    }
}

/// Race the level's portfolio over the training instances.
///
/// Instances are shuffled per race. Models run in rank order on each
/// instance under `min(global cap, rho cap, adaptive bound)`; the adaptive
/// bound applies only to models that are not themselves elites (an elite's
/// own pace would otherwise cap it on its first instance). t-test
/// elimination fires once `t_first` instances are seen and every `t_next`
/// thereafter.
pub fn run_race(
    set: &StreamlinerSet,
    level: u32,
    training: &[String],
    cfg: &RaceConfig,
    evaluator: &dyn Evaluator,
    elites: &[ElitePerf],
) -> Result<RaceReport> {
    if level == 0 || level > 4 {
        return Err(Error::Validation(format!("race level {level} outside 1..=4")));
    }
    if training.is_empty() {
        return Err(Error::Validation("empty training set".into()));
    }
    let models = portfolio(1 << (level - 1))?;
    let mut order: Vec<String> = training.to_vec();
    let mut rng = seeds::rng(cfg.shuffle_seed, &format!("race/{}/{}", set.key(), level));
    order.shuffle(&mut rng);

    // elite prefix sums over the shuffled order
    for e in elites {
        for inst in &order {
            if !e.costs.contains_key(inst) {
                return Err(Error::Validation(format!(
                    "elite {} lacks a cost for instance {inst}",
                    e.recipe
                )));
            }
        }
    }
    let elite_prefix_mean = |k: usize| -> Vec<f64> {
        elites
            .iter()
            .map(|e| order[..k].iter().map(|i| e.costs[i] as f64).sum::<f64>() / k as f64)
            .collect()
    };

    let mut rows: Vec<RaceRow> = Vec::new();
    let mut results: Vec<RecipeRace> = models
        .iter()
        .map(|m| RecipeRace {
            recipe: m.heuristic,
            outcomes: BTreeMap::new(),
            complete: false,
            eliminated_at: None,
        })
        .collect();
    let mut alive: Vec<usize> = (0..models.len()).collect();
    let mut totals: Vec<u64> = vec![0; models.len()];

    for (idx, inst) in order.iter().enumerate() {
        let seen = idx; // instances completed before this one
        let elite_means_next = elite_prefix_mean(seen + 1);
        let mut best_on_inst: Option<u64> = None;
        let mut eliminated_now: Vec<usize> = Vec::new();
        for &m in &alive {
            let recipe = models[m].heuristic;
            let is_elite = elites.iter().any(|e| e.recipe == recipe);
            let adaptive = if is_elite {
                f64::INFINITY
            } else {
                let mean_k =
                    if seen == 0 { 0.0 } else { totals[m] as f64 / seen as f64 };
                adaptive_bound(&elite_means_next, seen, mean_k)
            };
            let adaptive_cap =
                if adaptive.is_finite() { adaptive.floor() as u64 } else { u64::MAX };
            let rho_c = best_on_inst.map(|b| rho_cap(b, cfg.rho)).unwrap_or(u64::MAX);
            let cap = cfg.global_cap.min(rho_c).min(adaptive_cap);
            let out = evaluator.evaluate(set, recipe, inst, cap)?;
            totals[m] += out.cost;
            results[m].outcomes.insert(inst.clone(), out);
            let mut elimination = None;
            if out.status == SolveStatus::Capped {
                if adaptive_cap <= rho_c && adaptive_cap <= cfg.global_cap && adaptive_cap == cap {
                    elimination = Some(ElimReason::AdaptiveCap);
                } else if cfg.rho_eliminates && rho_c == cap {
                    elimination = Some(ElimReason::RhoDominated);
                }
            } else {
                best_on_inst = Some(best_on_inst.map_or(out.cost, |b| b.min(out.cost)));
            }
            if let Some(reason) = elimination {
                results[m].eliminated_at = Some((idx, reason));
                eliminated_now.push(m);
            }
            rows.push(RaceRow {
                set_key: set.key(),
                level,
                recipe,
                instance_id: inst.clone(),
                cap,
                status: out.status.to_string(),
                cost: out.cost,
                elimination,
            });
        }
        alive.retain(|m| !eliminated_now.contains(m));

        let k = idx + 1;
        let at_boundary =
            k >= cfg.t_first && (k == cfg.t_first || (k - cfg.t_first) % cfg.t_next == 0);
        if at_boundary && alive.len() >= 2 && k >= 2 {
            let cost_rows: Vec<(HeuristicName, Vec<f64>)> = alive
                .iter()
                .map(|&m| {
                    (
                        models[m].heuristic,
                        order[..k].iter().map(|i| results[m].outcomes[i].cost as f64).collect(),
                    )
                })
                .collect();
            let losers = ttest_eliminate(&cost_rows, cfg.alpha)?;
            for loser in losers {
                let m = models.iter().position(|r| r.heuristic == loser).expect("raced model");
                results[m].eliminated_at = Some((idx, ElimReason::TTest));
                alive.retain(|&a| a != m);
                rows.push(RaceRow {
                    set_key: set.key(),
                    level,
                    recipe: loser,
                    instance_id: inst.clone(),
                    cap: 0,
                    status: "eliminated".to_string(),
                    cost: 0,
                    elimination: Some(ElimReason::TTest),
                });
            }
        }
    }

    for m in alive {
        results[m].complete = true;
    }
    Ok(RaceReport { level, order, results, rows })
}

/// Multi-level model generation: race portfolios of size 1, 2, 4, 8 in
/// succession, re-using everything already computed and carrying the
/// fully evaluated survivors forward as elites.
#[derive(Debug, Clone)]
pub struct MultiLevelReport {
    pub levels: Vec<RaceReport>,
}

impl MultiLevelReport {
    /// Fully evaluated survivors of the deepest level.
    pub fn final_survivors(&self) -> Vec<&RecipeRace> {
        self.levels.last().map(|l| l.survivors().collect()).unwrap_or_default()
    }

    pub fn all_rows(&self) -> impl Iterator<Item = &RaceRow> {
        self.levels.iter().flat_map(|l| l.rows.iter())
    }
}

pub fn run_levels(
    set: &StreamlinerSet,
    training: &[String],
    cfg: &RaceConfig,
    evaluator: &dyn Evaluator,
    max_level: u32,
) -> Result<MultiLevelReport> {
    if max_level == 0 || max_level > 4 {
        return Err(Error::Validation(format!("max level {max_level} outside 1..=4")));
    }
    let mut elites: Vec<ElitePerf> = Vec::new();
    let mut levels = Vec::new();
    for level in 1..=max_level {
        let report = run_race(set, level, training, cfg, evaluator, &elites)?;
        elites = report
            .survivors()
            .map(|r| ElitePerf {
                recipe: r.recipe,
                costs: r.outcomes.iter().map(|(k, v)| (k.clone(), v.cost)).collect(),
            })
            .collect();
        levels.push(report);
    }
    Ok(MultiLevelReport { levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SolveStatus;

    fn instances(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("i{i:02}")).collect()
    }

    #[test]
    fn rho_cap_examples() {
        assert_eq!(rho_cap(5, 2.0), 10);
        assert_eq!(rho_cap(5, 1.0), 5);
        assert_eq!(rho_cap(0, 2.0), 0);
        assert_eq!(rho_cap(7, 1.5), 11); // ceil(10.5)
    }

    #[test]
    fn adaptive_bound_formula() {
        // median elite mean at k+1 = 10, k = 2, model mean = 8:
        // 10*3 - 8*2 = 14
        assert_eq!(adaptive_bound(&[10.0], 2, 8.0), 14.0);
        // model already behind the elite pace: 10*3 - 12*2 = 6
        assert_eq!(adaptive_bound(&[10.0], 2, 12.0), 6.0);
        // single elite: median is that elite's mean
        assert_eq!(adaptive_bound(&[4.0], 0, 0.0), 4.0);
        // floored at zero
        assert_eq!(adaptive_bound(&[1.0], 3, 100.0), 0.0);
        // even count: mean of the middle two
        assert_eq!(adaptive_bound(&[2.0, 4.0, 6.0, 8.0], 0, 0.0), 5.0);
        // no elites: no bound
        assert!(adaptive_bound(&[], 2, 8.0).is_infinite());
    }

    #[test]
    fn level_one_runs_uncapped_on_everything() {
        let ev = SyntheticEvaluator::new(|_, _, _| (SolveStatus::Sat, 50));
        let cfg = RaceConfig { global_cap: 1_000, ..Default::default() };
        let training = instances(12);
        let report =
            run_race(&StreamlinerSet::empty(), 1, &training, &cfg, &ev, &[]).unwrap();
        assert_eq!(report.results.len(), 1);
        assert!(report.results[0].complete);
        assert_eq!(report.results[0].outcomes.len(), 12);
        assert!(report.rows.iter().all(|r| r.cap == 1_000));
    }

    #[test]
    fn rho_caps_the_slower_model_per_instance() {
        // recipe 2 is uniformly 3x slower; rho = 2 caps it at 2 * 100
        let ev = SyntheticEvaluator::new(|_, recipe, _| {
            if recipe == HeuristicName::Compact {
                (SolveStatus::Sat, 100)
            } else {
                (SolveStatus::Sat, 300)
            }
        });
        let cfg = RaceConfig { global_cap: 100_000, t_first: 50, ..Default::default() };
        let training = instances(5);
        let report =
            run_race(&StreamlinerSet::empty(), 2, &training, &cfg, &ev, &[]).unwrap();
        let slow = &report.results[1];
        for out in slow.outcomes.values() {
            assert_eq!(out.status, SolveStatus::Capped);
            assert_eq!(out.cost, 200);
        }
        // per-instance capping alone does not remove the model
        assert!(slow.complete);
    }

    #[test]
    fn ttest_fires_at_the_first_boundary() {
        let ev = SyntheticEvaluator::new(|_, recipe, inst| {
            let i: u64 = inst[1..].parse().unwrap();
            let base = 100 + (i * 7) % 13;
            if recipe == HeuristicName::Compact {
                (SolveStatus::Sat, base)
            } else {
                (SolveStatus::Sat, base + 120) // uniformly worse, below the rho cap
            }
        });
        let cfg = RaceConfig { global_cap: 100_000, ..Default::default() };
        let training = instances(20);
        let report =
            run_race(&StreamlinerSet::empty(), 2, &training, &cfg, &ev, &[]).unwrap();
        let slow = &report.results[1];
        let (at, reason) = slow.eliminated_at.expect("eliminated");
        assert_eq!(reason, ElimReason::TTest);
        assert_eq!(at + 1, cfg.t_first);
        assert_eq!(slow.outcomes.len(), cfg.t_first);
        assert!(!slow.complete);
    }

    #[test]
    fn adaptive_cap_eliminates_a_model_behind_the_elite_pace() {
        // elite completes every instance in 10; the challenger needs 100.
        // bound on the first instance = 10, so the challenger is capped at
        // 10 and eliminated immediately.
        let ev = SyntheticEvaluator::new(|_, recipe, _| {
            if recipe == HeuristicName::Compact {
                (SolveStatus::Sat, 10)
            } else {
                (SolveStatus::Sat, 100)
            }
        });
        let cfg = RaceConfig { global_cap: 100_000, ..Default::default() };
        let training = instances(8);
        let elites = vec![ElitePerf {
            recipe: HeuristicName::Compact,
            costs: training.iter().map(|i| (i.clone(), 10)).collect(),
        }];
        let report =
            run_race(&StreamlinerSet::empty(), 2, &training, &cfg, &ev, &elites).unwrap();
        let challenger = &report.results[1];
        let (at, reason) = challenger.eliminated_at.expect("eliminated");
        assert_eq!(reason, ElimReason::AdaptiveCap);
        assert_eq!(at, 0);
        // the elite itself is exempt from its own pace
        assert!(report.results[0].complete);
    }

    #[test]
    fn adaptive_bounds_replay_on_a_hand_computed_fixture() {
        // elite costs over the shuffled order are constant 10, challenger
        // costs 8 everywhere: bounds must follow the formula
        // b_{k+1} = 10 * (k+1) - 8k = 10 + 2k, never capping it.
        let ev = SyntheticEvaluator::new(|_, recipe, _| {
            if recipe == HeuristicName::Compact {
                (SolveStatus::Sat, 10)
            } else {
                (SolveStatus::Sat, 8)
            }
        });
        let cfg = RaceConfig { global_cap: 100_000, ..Default::default() };
        let training = instances(5);
        let elites = vec![ElitePerf {
            recipe: HeuristicName::Compact,
            costs: training.iter().map(|i| (i.clone(), 10)).collect(),
        }];
        let report =
            run_race(&StreamlinerSet::empty(), 2, &training, &cfg, &ev, &elites).unwrap();
        let caps: Vec<u64> = report
            .rows
            .iter()
            .filter(|r| r.recipe == HeuristicName::CompactChannelled)
            .map(|r| r.cap)
            .collect();
        assert_eq!(caps, vec![10, 12, 14, 16, 18]);
        assert!(report.results[1].complete);
    }

    #[test]
    fn levels_double_the_portfolio_and_reuse_results() {
        let ev = SyntheticEvaluator::new(|_, recipe, inst| {
            let i: u64 = inst[1..].parse().unwrap();
            (SolveStatus::Sat, 50 + (recipe.rank() as u64) * 3 + i % 5)
        });
        let cfg = RaceConfig { global_cap: 100_000, ..Default::default() };
        let training = instances(12);
        let report =
            run_levels(&StreamlinerSet::empty(), &training, &cfg, &ev, 4).unwrap();
        let sizes: Vec<usize> =
            report.levels.iter().map(|l| l.results.len()).collect();
        assert_eq!(sizes, vec![1, 2, 4, 8]);
    }

    #[test]
    fn shuffle_depends_on_set_and_level_but_not_on_input_order() {
        let ev = SyntheticEvaluator::new(|_, _, _| (SolveStatus::Sat, 10));
        let cfg = RaceConfig { global_cap: 1_000, ..Default::default() };
        let training = instances(10);
        let a = run_race(&StreamlinerSet::empty(), 1, &training, &cfg, &ev, &[]).unwrap();
        let b = run_race(&StreamlinerSet::empty(), 2, &training, &cfg, &ev, &[]).unwrap();
        assert_ne!(a.order, b.order);
        // permuting the training list leaves the full-evaluation stats intact
        let mut reversed = training.clone();
        reversed.reverse();
        let c = run_race(&StreamlinerSet::empty(), 1, &reversed, &cfg, &ev, &[]).unwrap();
        assert_eq!(
            a.results[0].outcomes, c.results[0].outcomes,
            "level-1 statistics must not depend on the input permutation"
        );
    }
}
