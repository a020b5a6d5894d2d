//! The two-objective reward and the Pareto archive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::kernel::SolveStatus;
use crate::model::HeuristicName;
use crate::race::EvalOutcome;
use crate::streamliner::StreamlinerSet;

/// The 2-dimensional reward of one streamliner/model combination, both
/// coordinates maximised. Applicability is the fraction of training
/// instances still admitting a solution; search reduction is the mean
/// relative cost decrease against the round's reference costs, over the
/// solved instances only (no solved instances contributes 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardVector {
    pub applicability: f64,
    pub search_reduction: f64,
}

impl RewardVector {
    /// Pareto dominance: at least as good on both coordinates and
    /// strictly better on one.
    pub fn dominates(&self, other: &RewardVector) -> bool {
        self.applicability >= other.applicability
            && self.search_reduction >= other.search_reduction
            && (self.applicability > other.applicability
                || self.search_reduction > other.search_reduction)
    }
}

/// Compute the reward of a fully evaluated combination against per-instance
/// reference costs.
pub fn reward_from_outcomes(
    outcomes: &BTreeMap<String, EvalOutcome>,
    refs: &BTreeMap<String, f64>,
) -> RewardVector {
    let n = refs.len().max(1);
    let mut sat = 0usize;
    let mut reduction_sum = 0.0;
    for (inst, reference) in refs {
        if let Some(out) = outcomes.get(inst) {
            if out.status == SolveStatus::Sat {
                sat += 1;
                let r = reference.max(1.0);
                reduction_sum += (r - out.cost as f64) / r;
            }
        }
    }
    RewardVector {
        applicability: sat as f64 / n as f64,
        search_reduction: if sat == 0 { 0.0 } else { reduction_sum / sat as f64 },
    }
}

/// One archive entry: a streamliner set, the recipe it was evaluated with,
/// its reward against the round references, and the raw per-instance
/// outcomes kept for the selector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub set: StreamlinerSet,
    pub recipe: HeuristicName,
    pub reward: RewardVector,
    pub round: usize,
    pub outcomes: BTreeMap<String, EvalOutcome>,
}

/// The set of mutually non-dominated entries found so far.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        ParetoArchive::default()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Try to insert, evicting strictly dominated incumbents. Returns true
    /// iff the archive changed: a dominated offer is rejected, and
    /// re-offering an entry with an unchanged reward is a no-op.
    pub fn offer(&mut self, entry: ArchiveEntry) -> bool {
        if let Some(existing) = self
            .entries
            .iter()
            .position(|e| e.set == entry.set && e.recipe == entry.recipe)
        {
            if self.entries[existing].reward == entry.reward {
                return false;
            }
            if self.entries[existing].reward.dominates(&entry.reward) {
                return false;
            }
            self.entries.remove(existing);
        }
        if self.entries.iter().any(|e| e.reward.dominates(&entry.reward)) {
            return false;
        }
        self.entries.retain(|e| !entry.reward.dominates(&e.reward));
        self.entries.push(entry);
        true
    }

    /// Pairwise non-domination check, used by tests and assertions.
    pub fn is_antichain(&self) -> bool {
        for a in &self.entries {
            for b in &self.entries {
                if !std::ptr::eq(a, b) && a.reward.dominates(&b.reward) {
                    return false;
                }
            }
        }
        true
    }

    /// Best solved cost per instance over all entries.
    pub fn best_sat_costs(&self) -> BTreeMap<String, u64> {
        let mut best: BTreeMap<String, u64> = BTreeMap::new();
        for e in &self.entries {
            for (inst, out) in &e.outcomes {
                if out.status == SolveStatus::Sat {
                    best.entry(inst.clone())
                        .and_modify(|b| *b = (*b).min(out.cost))
                        .or_insert(out.cost);
                }
            }
        }
        best
    }
}
