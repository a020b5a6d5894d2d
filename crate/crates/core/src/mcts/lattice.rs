//! The explored part of the streamliner-combination lattice.
//!
//! Nodes live in a transposition table keyed by the canonical set, so the
//! same combination reached through different insertion orders shares one
//! statistics record.

use std::collections::HashMap;

use crate::streamliner::{contradicts, Streamliner, StreamlinerSet};

#[derive(Debug, Clone, Default)]
pub struct LatticeNode {
    pub visits: u64,
    /// Discounted dominance-reward accumulator.
    pub value: f64,
    /// Admissible children expanded so far, by added candidate id.
    pub expanded: Vec<u32>,
    /// Admissible children not yet expanded, sorted by candidate id.
    pub unexpanded: Vec<u32>,
    pub initialized: bool,
}

impl LatticeNode {
    pub fn is_terminal(&self) -> bool {
        self.initialized && self.expanded.is_empty() && self.unexpanded.is_empty()
    }
}

pub struct Lattice {
    nodes: HashMap<StreamlinerSet, LatticeNode>,
    max_combination_size: Option<usize>,
}

impl Lattice {
    pub fn new(max_combination_size: Option<usize>) -> Self {
        let mut nodes = HashMap::new();
        nodes.insert(StreamlinerSet::empty(), LatticeNode::default());
        Lattice { nodes, max_combination_size }
    }

    pub fn node(&self, set: &StreamlinerSet) -> Option<&LatticeNode> {
        self.nodes.get(set)
    }

    pub fn node_mut(&mut self, set: &StreamlinerSet) -> &mut LatticeNode {
        self.nodes.entry(set.clone()).or_default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Candidate ids whose addition to `set` yields an admissible child:
    /// not already a member, within the size cap, and not contradicting
    /// any member.
    pub fn admissible_additions(
        &self,
        set: &StreamlinerSet,
        candidates: &[Streamliner],
    ) -> Vec<u32> {
        if let Some(cap) = self.max_combination_size {
            if set.len() >= cap {
                return Vec::new();
            }
        }
        let members: Vec<&Streamliner> = candidates
            .iter()
            .filter(|s| set.contains(s.id))
            .collect();
        candidates
            .iter()
            .filter(|s| !set.contains(s.id))
            .filter(|s| members.iter().all(|m| !contradicts(s, m)))
            .map(|s| s.id)
            .collect()
    }

    /// Make sure the node's admissible-children list is computed.
    pub fn initialize(&mut self, set: &StreamlinerSet, candidates: &[Streamliner]) {
        if self.nodes.get(set).map(|n| n.initialized).unwrap_or(false) {
            return;
        }
        let additions = self.admissible_additions(set, candidates);
        let node = self.node_mut(set);
        node.unexpanded = additions;
        node.initialized = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bacp::BacpClass;
    use crate::streamliner::{generate_candidates, CandidateConfig};

    fn candidates() -> Vec<Streamliner> {
        generate_candidates(&BacpClass, &CandidateConfig::default())
    }

    #[test]
    fn root_has_every_candidate_as_a_child() {
        let cands = candidates();
        let mut lattice = Lattice::new(None);
        lattice.initialize(&StreamlinerSet::empty(), &cands);
        let root = lattice.node(&StreamlinerSet::empty()).unwrap();
        assert_eq!(root.unexpanded.len(), cands.len());
    }

    #[test]
    fn contradictory_children_are_inadmissible() {
        let cands = candidates();
        let all_even = cands
            .iter()
            .find(|s| s.description == "all of the courses map to even periods")
            .unwrap()
            .id;
        let all_odd = cands
            .iter()
            .find(|s| s.description == "all of the courses map to odd periods")
            .unwrap()
            .id;
        let lattice = Lattice::new(None);
        let additions =
            lattice.admissible_additions(&StreamlinerSet::from_ids([all_even]), &cands);
        assert!(!additions.contains(&all_odd));
        assert!(!additions.contains(&all_even));
        // excluded: the member itself, all-odd, and all-range-odd
        assert_eq!(additions.len(), cands.len() - 3);
    }

    #[test]
    fn size_cap_makes_nodes_terminal() {
        let cands = candidates();
        let mut lattice = Lattice::new(Some(1));
        let set = StreamlinerSet::from_ids([1]);
        lattice.initialize(&set, &cands);
        assert!(lattice.node(&set).unwrap().is_terminal());
    }

    #[test]
    fn transposition_shares_one_record() {
        let mut lattice = Lattice::new(None);
        let via_a = StreamlinerSet::from_ids([1]).insert(2);
        let via_b = StreamlinerSet::from_ids([2]).insert(1);
        lattice.node_mut(&via_a).visits += 1;
        lattice.node_mut(&via_b).visits += 1;
        assert_eq!(lattice.node(&via_a).unwrap().visits, 2);
    }
}
