//! The ranked portfolio of model encodings.
//!
//! A recipe fixes how the decision function is represented (1-d integer
//! array, 2-d boolean matrix, or a pair-list relation with a cardinality
//! marker or per-slot flags), whether a channelled boolean view is added,
//! and on which representation the base and streamliner constraints are
//! posted. Rank 1 is the default-analogue: the compact integer array with
//! no channelling.

mod compile;

pub use compile::{compile, CompiledModel, Provenance};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primary representation of the course -> period function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// `x[c] in 1..P`
    IntArray,
    /// `b[c][p] in 0..1` with exactly-one rows
    BoolMatrix,
    /// pair list `(fst[i], snd[i])` with an integer cardinality marker
    MarkerRelation,
    /// pair list with per-slot boolean flags
    FlagRelation,
}

/// Where base and streamliner constraints are posted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintSide {
    /// On the primary representation's machinery.
    Primary,
    /// On the cheapest available representation: integer views for
    /// ordering constraints, boolean cells for counting constraints.
    ChannelledBest,
}

/// Names of the eight ranked heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicName {
    Compact,
    CompactChannelled,
    CompactChannelledBest,
    ExplicitBool,
    ExplicitBoolChannelled,
    MarkerRelation,
    FlagRelation,
    MarkerRelationChannelled,
}

impl HeuristicName {
    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicName::Compact => "compact",
            HeuristicName::CompactChannelled => "compact-channelled",
            HeuristicName::CompactChannelledBest => "compact-channelled-best",
            HeuristicName::ExplicitBool => "explicit-bool",
            HeuristicName::ExplicitBoolChannelled => "explicit-bool-channelled",
            HeuristicName::MarkerRelation => "marker-relation",
            HeuristicName::FlagRelation => "flag-relation",
            HeuristicName::MarkerRelationChannelled => "marker-relation-channelled",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        RANKED_TABLE
            .iter()
            .find(|r| r.heuristic.as_str() == s)
            .map(|r| r.heuristic)
            .ok_or_else(|| Error::Validation(format!("unknown heuristic '{s}'")))
    }

    /// 1-based rank in the table.
    pub fn rank(self) -> usize {
        RANKED_TABLE
            .iter()
            .position(|r| r.heuristic == self)
            .expect("every heuristic is in the table")
            + 1
    }
}

impl std::fmt::Display for HeuristicName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One complete set of encoding choices, identified by its heuristic name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRecipe {
    pub heuristic: HeuristicName,
    pub primary: Representation,
    pub channelling: bool,
    pub side: ConstraintSide,
}

/// The ranked heuristic table, rank 1 first. Rank 1 is the
/// default-analogue; channelling off always posts on the primary side.
pub const RANKED_TABLE: [ModelRecipe; 8] = [
    ModelRecipe {
        heuristic: HeuristicName::Compact,
        primary: Representation::IntArray,
        channelling: false,
        side: ConstraintSide::Primary,
    },
    ModelRecipe {
        heuristic: HeuristicName::CompactChannelled,
        primary: Representation::IntArray,
        channelling: true,
        side: ConstraintSide::Primary,
    },
    ModelRecipe {
        heuristic: HeuristicName::CompactChannelledBest,
        primary: Representation::IntArray,
        channelling: true,
        side: ConstraintSide::ChannelledBest,
    },
    ModelRecipe {
        heuristic: HeuristicName::ExplicitBool,
        primary: Representation::BoolMatrix,
        channelling: false,
        side: ConstraintSide::Primary,
    },
    ModelRecipe {
        heuristic: HeuristicName::ExplicitBoolChannelled,
        primary: Representation::BoolMatrix,
        channelling: true,
        side: ConstraintSide::ChannelledBest,
    },
    ModelRecipe {
        heuristic: HeuristicName::MarkerRelation,
        primary: Representation::MarkerRelation,
        channelling: false,
        side: ConstraintSide::Primary,
    },
    ModelRecipe {
        heuristic: HeuristicName::FlagRelation,
        primary: Representation::FlagRelation,
        channelling: false,
        side: ConstraintSide::Primary,
    },
    ModelRecipe {
        heuristic: HeuristicName::MarkerRelationChannelled,
        primary: Representation::MarkerRelation,
        channelling: true,
        side: ConstraintSide::ChannelledBest,
    },
];

/// The first `n` entries of the ranked table, most promising first.
pub fn portfolio(n: usize) -> Result<Vec<ModelRecipe>> {
    if n == 0 || n > RANKED_TABLE.len() {
        return Err(Error::Validation(format!(
            "portfolio size {n} outside 1..={}",
            RANKED_TABLE.len()
        )));
    }
    Ok(RANKED_TABLE[..n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portfolio_prefixes() {
        assert_eq!(portfolio(1).unwrap()[0].heuristic, HeuristicName::Compact);
        let two = portfolio(2).unwrap();
        assert_eq!(two[1].heuristic, HeuristicName::CompactChannelled);
        assert_eq!(portfolio(8).unwrap().len(), 8);
        assert!(portfolio(0).is_err());
        assert!(portfolio(9).is_err());
    }

    #[test]
    fn rank_one_is_the_default_analogue() {
        let r = &RANKED_TABLE[0];
        assert_eq!(r.primary, Representation::IntArray);
        assert!(!r.channelling);
        assert_eq!(r.side, ConstraintSide::Primary);
    }

    #[test]
    fn table_is_bijective_and_honours_the_off_invariant() {
        let mut names: Vec<_> = RANKED_TABLE.iter().map(|r| r.heuristic).collect();
        names.dedup();
        assert_eq!(names.len(), 8);
        for r in &RANKED_TABLE {
            if !r.channelling {
                assert_eq!(r.side, ConstraintSide::Primary);
            }
            assert_eq!(HeuristicName::parse(r.heuristic.as_str()).unwrap(), r.heuristic);
            assert_eq!(RANKED_TABLE[r.heuristic.rank() - 1].heuristic, r.heuristic);
        }
    }
}
