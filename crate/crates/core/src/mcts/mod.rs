//! Multi-objective Monte Carlo tree search over the streamliner lattice.
//!
//! Four phases per iteration: UCT selection through the explored lattice,
//! uniform expansion of an admissible child, simulation via the
//! multi-level race, and back-propagation of a cumulative discounted
//! dominance reward (the node accumulator decays by `delta` and gains 1
//! whenever the simulation changed the Pareto archive).

mod archive;
mod lattice;
mod rounds;

pub use archive::{reward_from_outcomes, ArchiveEntry, ParetoArchive, RewardVector};
pub use lattice::{Lattice, LatticeNode};
pub use rounds::{multi_round, Portfolio, PortfolioEntry, RoundsOutput};

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::race::{run_levels, Evaluator, RaceConfig, RaceRow};
use crate::seeds;
use crate::streamliner::{Streamliner, StreamlinerSet};

/// Search parameters. The UCT constant and the discount are not pinned by
/// the method itself; the defaults here are sqrt(2) and 0.95.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MctsConfig {
    pub uct_constant: f64,
    pub cdd_discount: f64,
    /// Simulations per round.
    pub simulations: usize,
    pub rounds: usize,
    /// Deepest race level; level l races a portfolio of 2^(l-1) models.
    pub max_level: u32,
    pub max_combination_size: Option<usize>,
    pub seed: u64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            uct_constant: std::f64::consts::SQRT_2,
            cdd_discount: 0.95,
            simulations: 100,
            rounds: 3,
            max_level: 4,
            max_combination_size: None,
            seed: 0,
        }
    }
}

impl MctsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.uct_constant <= 0.0 {
            return Err(Error::Validation("uct constant must be positive".into()));
        }
        if !(self.cdd_discount > 0.0 && self.cdd_discount <= 1.0) {
            return Err(Error::Validation("discount must lie in (0, 1]".into()));
        }
        if self.rounds == 0 || self.simulations == 0 {
            return Err(Error::Validation("rounds and simulations must be positive".into()));
        }
        if self.max_level == 0 || self.max_level > 4 {
            return Err(Error::Validation("max level outside 1..=4".into()));
        }
        if self.max_combination_size == Some(0) {
            return Err(Error::Validation("combination size cap must be positive".into()));
        }
        Ok(())
    }
}

/// The UCT score of a child: exploitation (mean discounted value) plus the
/// exploration bonus.
pub fn uct_score(value: f64, visits: u64, parent_visits: u64, c: f64) -> f64 {
    if visits == 0 {
        return f64::INFINITY;
    }
    let mean = value / visits as f64;
    mean + c * ((parent_visits.max(1) as f64).ln() / visits as f64).sqrt()
}

/// One line of the search trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub iteration: usize,
    pub set_key: String,
    /// `recipe:applicability:reduction` triplets joined by ';'.
    pub rewards: String,
    pub archive_size: usize,
}

/// Output of one search round.
pub struct RoundOutput {
    pub archive: ParetoArchive,
    pub trace: Vec<TraceRow>,
    pub race_rows: Vec<RaceRow>,
    pub lattice: Lattice,
}

/// Run one MOMCTS round: `cfg.simulations` iterations against fixed
/// per-instance reference costs.
pub fn search_round(
    round: usize,
    cfg: &MctsConfig,
    race_cfg: &RaceConfig,
    candidates: &[Streamliner],
    training: &[String],
    refs: &BTreeMap<String, f64>,
    evaluator: &dyn Evaluator,
) -> Result<RoundOutput> {
    cfg.validate()?;
    let mut rng: ChaCha12Rng = seeds::rng(cfg.seed, &format!("mcts/round-{round}"));
    let mut lattice = Lattice::new(cfg.max_combination_size);
    let mut archive = ParetoArchive::new();
    let mut trace = Vec::new();
    let mut race_rows = Vec::new();

    for iteration in 0..cfg.simulations {
        // selection: descend while fully expanded, stop where an
        // unexpanded admissible child exists
        let mut path = vec![StreamlinerSet::empty()];
        let simulate_at = loop {
            let current = path.last().expect("path is never empty").clone();
            lattice.initialize(&current, candidates);
            let node = lattice.node(&current).expect("initialized node exists");
            if !node.unexpanded.is_empty() {
                // expansion: uniformly select an unexpanded admissible child
                let pick = rng.gen_range(0..node.unexpanded.len());
                let node = lattice.node_mut(&current);
                let added = node.unexpanded.remove(pick);
                node.expanded.push(added);
                node.expanded.sort_unstable();
                let child = current.insert(added);
                lattice.initialize(&child, candidates);
                path.push(child.clone());
                break child;
            }
            if node.expanded.is_empty() {
                // terminal node: re-simulate it
                break current;
            }
            let parent_visits = node.visits;
            let mut best: Option<(f64, u32)> = None;
            for &added in &node.expanded {
                let child = current.insert(added);
                let child_node = lattice.node(&child).expect("expanded child exists");
                let score =
                    uct_score(child_node.value, child_node.visits, parent_visits, cfg.uct_constant);
                let better = match best {
                    None => true,
                    // ties break towards the lower added candidate id
                    Some((s, _)) => score > s,
                };
                if better {
                    best = Some((score, added));
                }
            }
            let (_, added) = best.expect("non-terminal node has children");
            path.push(current.insert(added));
        };

        // simulation: multi-level race at the chosen combination
        let report = run_levels(&simulate_at, training, race_cfg, evaluator, cfg.max_level)?;
        race_rows.extend(report.all_rows().cloned());
        let survivor_rewards: Vec<(crate::model::HeuristicName, RewardVector, BTreeMap<String, crate::race::EvalOutcome>)> =
            report
                .final_survivors()
                .iter()
                .map(|r| (r.recipe, reward_from_outcomes(&r.outcomes, refs), r.outcomes.clone()))
                .collect();

        // back-propagation: binary dominance reward, discounted accumulator
        let mut changed = false;
        for (recipe, reward, outcomes) in &survivor_rewards {
            let inserted = archive.offer(ArchiveEntry {
                set: simulate_at.clone(),
                recipe: *recipe,
                reward: *reward,
                round,
                outcomes: outcomes.clone(),
            });
            changed = changed || inserted;
        }
        let r = if changed { 1.0 } else { 0.0 };
        for set in &path {
            let node = lattice.node_mut(set);
            node.visits += 1;
            node.value = node.value * cfg.cdd_discount + r;
        }

        let rewards = survivor_rewards
            .iter()
            .map(|(recipe, reward, _)| {
                format!("{}:{:.6}:{:.6}", recipe, reward.applicability, reward.search_reduction)
            })
            .collect::<Vec<_>>()
            .join(";");
        trace.push(TraceRow {
            round,
            iteration,
            set_key: simulate_at.key(),
            rewards,
            archive_size: archive.len(),
        });
    }

    Ok(RoundOutput { archive, trace, race_rows, lattice })
}
