//! Candidate streamliner constraints derived from the decision variable's
//! type structure.
//!
//! A streamliner is a conjectured, possibly unsound constraint added to
//! focus search on a structured subspace. First-order rules act on a value
//! or on the whole function; higher-order rules lift an inner rule through
//! a quantifier or an accessor (range / defined / prefix / postfix).

mod generate;
mod semantics;

pub use generate::{generate_candidates, CandidateConfig};
pub use semantics::{
    contradicts, satisfies, streamliner_semantics, CourseSpan, RangeMode, SemanticConstraint,
    ValuePredicate,
};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names of the rules applicable to the BACP decision signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RuleName {
    Odd,
    Even,
    LowerHalf,
    UpperHalf,
    MonotonicIncreasing,
    MonotonicDecreasing,
    LargestFirst,
    LargestLast,
    SmallestFirst,
    SmallestLast,
    All,
    Most,
    Half,
    ApproxHalf,
    AllBut,
    Range,
    Defined,
    Prefix,
    Postfix,
}

/// First-order rules act on values or whole functions; higher-order rules
/// take another rule as an argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    FirstOrder,
    HigherOrder,
}

impl RuleName {
    pub fn kind(self) -> RuleKind {
        use RuleName::*;
        match self {
            Odd | Even | LowerHalf | UpperHalf | MonotonicIncreasing | MonotonicDecreasing
            | LargestFirst | LargestLast | SmallestFirst | SmallestLast => RuleKind::FirstOrder,
            All | Most | Half | ApproxHalf | AllBut | Range | Defined | Prefix | Postfix => {
                RuleKind::HigherOrder
            }
        }
    }

    /// The starred rule families: each member is defined by an integer
    /// softness parameter.
    pub fn takes_softness(self) -> bool {
        use RuleName::*;
        matches!(self, Most | ApproxHalf | AllBut | Prefix | Postfix)
    }
}

/// One rule application inside a streamliner chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamlinerRule {
    pub name: RuleName,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub softness: Option<u32>,
}

impl StreamlinerRule {
    pub fn plain(name: RuleName) -> Self {
        StreamlinerRule { name, softness: None }
    }

    pub fn soft(name: RuleName, softness: u32) -> Self {
        StreamlinerRule { name, softness: Some(softness) }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.name.takes_softness(), self.softness) {
            (true, Some(k)) if k > 0 => Ok(()),
            (true, Some(_)) => Err(Error::Validation(format!(
                "{:?} requires a positive softness parameter",
                self.name
            ))),
            (true, None) => Err(Error::Validation(format!(
                "{:?} requires a softness parameter",
                self.name
            ))),
            (false, None) => Ok(()),
            (false, Some(_)) => Err(Error::Validation(format!(
                "{:?} does not take a softness parameter",
                self.name
            ))),
        }
    }
}

/// One generated candidate: a chain of rule applications from the
/// outermost quantifier or lift to the innermost value rule, plus a
/// human-readable rendering. Ids are assigned by position in the
/// generated list and are stable for a fixed configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Streamliner {
    pub id: u32,
    pub chain: Vec<StreamlinerRule>,
    pub description: String,
}

impl Streamliner {
    /// Check that the chain is one of the well-typed shapes for a total
    /// int -> int function decision.
    pub fn validate(&self) -> Result<()> {
        for rule in &self.chain {
            rule.validate()?;
        }
        semantics::chain_shape(&self.chain).map(|_| ())
    }
}

/// A lattice node: a set of candidate ids in canonical (sorted) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct StreamlinerSet {
    members: BTreeSet<u32>,
}

impl StreamlinerSet {
    pub fn empty() -> Self {
        StreamlinerSet::default()
    }

    pub fn from_ids(ids: impl IntoIterator<Item = u32>) -> Self {
        StreamlinerSet { members: ids.into_iter().collect() }
    }

    pub fn insert(&self, id: u32) -> Self {
        let mut members = self.members.clone();
        members.insert(id);
        StreamlinerSet { members }
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.contains(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Canonical key, unique per set: "-" for the empty set, otherwise the
    /// sorted ids joined by '+'.
    pub fn key(&self) -> String {
        if self.members.is_empty() {
            "-".to_string()
        } else {
            self.members
                .iter()
                .map(|id| id.to_string())
                .collect::<Vec<_>>()
                .join("+")
        }
    }
}

impl std::fmt::Display for StreamlinerSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_key_is_canonical() {
        let a = StreamlinerSet::from_ids([4, 1, 9]);
        let b = StreamlinerSet::from_ids([9, 4, 1]);
        assert_eq!(a.key(), "1+4+9");
        assert_eq!(a, b);
        assert_eq!(StreamlinerSet::empty().key(), "-");
    }

    #[test]
    fn softness_invariant_enforced() {
        assert!(StreamlinerRule::plain(RuleName::Most).validate().is_err());
        assert!(StreamlinerRule::soft(RuleName::Most, 1).validate().is_ok());
        assert!(StreamlinerRule::soft(RuleName::All, 1).validate().is_err());
        assert!(StreamlinerRule::soft(RuleName::Prefix, 0).validate().is_err());
        assert!(StreamlinerRule::soft(RuleName::Postfix, 3).validate().is_ok());
    }
}
