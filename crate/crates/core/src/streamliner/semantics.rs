//! Exact constraint semantics of streamliner chains, independent of any
//! model encoding. `satisfies` evaluates a chain directly on a concrete
//! assignment and is the oracle against which all kernel encodings are
//! cross-checked.

use serde::{Deserialize, Serialize};

use super::{RuleName, Streamliner, StreamlinerRule};
use crate::bacp::{BacpInstance, BacpSolution};
use crate::error::{Error, Result};

/// Inner value rules over an integer domain `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValuePredicate {
    Odd,
    Even,
    /// value <= ceil(n/2)
    LowerHalf,
    /// value >= ceil(n/2) + 1
    UpperHalf,
}

impl ValuePredicate {
    /// Does `value` (in `1..=n`) satisfy the predicate?
    pub fn admits(self, value: u32, n: u32) -> bool {
        let mid = n.div_ceil(2);
        match self {
            ValuePredicate::Odd => value % 2 == 1,
            ValuePredicate::Even => value % 2 == 0,
            ValuePredicate::LowerHalf => value <= mid,
            ValuePredicate::UpperHalf => value > mid,
        }
    }

    /// Two predicates that admit disjoint value sets over any `1..=n`.
    pub fn disjoint_with(self, other: ValuePredicate) -> bool {
        use ValuePredicate::*;
        matches!(
            (self, other),
            (Odd, Even) | (Even, Odd) | (LowerHalf, UpperHalf) | (UpperHalf, LowerHalf)
        )
    }
}

/// Which courses a counting constraint quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CourseSpan {
    All,
    First(u32),
    Last(u32),
}

impl CourseSpan {
    pub fn courses(self, n_courses: u32) -> std::ops::RangeInclusive<u32> {
        match self {
            CourseSpan::All => 1..=n_courses,
            CourseSpan::First(k) => 1..=k.min(n_courses),
            CourseSpan::Last(k) => (n_courses - k.min(n_courses) + 1)..=n_courses,
        }
    }

    pub fn size(self, n_courses: u32) -> u32 {
        match self {
            CourseSpan::All => n_courses,
            CourseSpan::First(k) | CourseSpan::Last(k) => k.min(n_courses),
        }
    }
}

/// Quantification over the set of distinct attained periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RangeMode {
    /// Every attained period satisfies the predicate.
    All,
    /// Exactly floor(m/2) of the m attained periods satisfy it.
    Half,
}

/// Solver-independent description of one streamliner's constraint over the
/// abstract decision `curr`. Model recipes encode these per representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SemanticConstraint {
    /// curr(c) <= curr(c+1) for all consecutive courses.
    MonotoneNonDecreasing,
    /// curr(c) >= curr(c+1) for all consecutive courses.
    MonotoneNonIncreasing,
    /// The first/last course takes the maximum/minimum assigned period.
    Extremal { at_last: bool, maximum: bool },
    /// Between `lo` and `hi` (inclusive) of the courses in `span` map to a
    /// period satisfying `predicate`.
    CourseCount { span: CourseSpan, predicate: ValuePredicate, lo: u32, hi: u32 },
    /// Counting constraint over the distinct attained periods.
    RangeCount { predicate: ValuePredicate, mode: RangeMode },
    /// Instance-determined truth value (defined-set lifts on total
    /// functions quantify over the fixed course set).
    Constant(bool),
}

/// The recognised chain shapes.
pub(super) enum ChainShape {
    FunctionRule(RuleName),
    CourseLift { quantifier: StreamlinerRule, value: ValuePredicate },
    Window { rule: StreamlinerRule, value: ValuePredicate },
    SetLift { accessor: RuleName, quantifier: RuleName, value: ValuePredicate },
}

fn as_value_predicate(rule: &StreamlinerRule) -> Option<ValuePredicate> {
    match rule.name {
        RuleName::Odd => Some(ValuePredicate::Odd),
        RuleName::Even => Some(ValuePredicate::Even),
        RuleName::LowerHalf => Some(ValuePredicate::LowerHalf),
        RuleName::UpperHalf => Some(ValuePredicate::UpperHalf),
        _ => None,
    }
}

pub(super) fn chain_shape(chain: &[StreamlinerRule]) -> Result<ChainShape> {
    use RuleName::*;
    let bad = || Error::Validation(format!("ill-typed streamliner chain {chain:?}"));
    match chain {
        [only] => match only.name {
            MonotonicIncreasing | MonotonicDecreasing | LargestFirst | LargestLast
            | SmallestFirst | SmallestLast => Ok(ChainShape::FunctionRule(only.name)),
            _ => Err(bad()),
        },
        [outer, inner] => {
            let value = as_value_predicate(inner).ok_or_else(bad)?;
            match outer.name {
                All | Half | Most | ApproxHalf | AllBut => {
                    Ok(ChainShape::CourseLift { quantifier: *outer, value })
                }
                Prefix | Postfix => Ok(ChainShape::Window { rule: *outer, value }),
                _ => Err(bad()),
            }
        }
        [accessor, quantifier, inner] => {
            let value = as_value_predicate(inner).ok_or_else(bad)?;
            if !matches!(accessor.name, Range | Defined) {
                return Err(bad());
            }
            if !matches!(quantifier.name, All | Half) {
                return Err(bad());
            }
            Ok(ChainShape::SetLift {
                accessor: accessor.name,
                quantifier: quantifier.name,
                value,
            })
        }
        _ => Err(bad()),
    }
}

/// Count bounds for a quantifier over a collection of size `m`.
fn count_bounds(quantifier: &StreamlinerRule, m: u32) -> Option<(u32, u32)> {
    match (quantifier.name, quantifier.softness) {
        (RuleName::All, _) => Some((m, m)),
        (RuleName::Half, _) => Some((m / 2, m / 2)),
        (RuleName::Most, Some(k)) => Some((m.saturating_sub(k), m)),
        (RuleName::ApproxHalf, Some(k)) => {
            Some(((m / 2).saturating_sub(k), (m / 2 + k).min(m)))
        }
        (RuleName::AllBut, Some(k)) => {
            if k > m {
                None // impossible count; the caller folds this to Constant(false)
            } else {
                Some((m - k, m - k))
            }
        }
        _ => None,
    }
}

/// Resolve a streamliner chain against an instance into its abstract
/// constraint description.
pub fn streamliner_semantics(s: &Streamliner, inst: &BacpInstance) -> Result<SemanticConstraint> {
    for rule in &s.chain {
        rule.validate()?;
    }
    let c = inst.n_courses;
    match chain_shape(&s.chain)? {
        ChainShape::FunctionRule(name) => Ok(match name {
            RuleName::MonotonicIncreasing => SemanticConstraint::MonotoneNonDecreasing,
            RuleName::MonotonicDecreasing => SemanticConstraint::MonotoneNonIncreasing,
            RuleName::LargestFirst => SemanticConstraint::Extremal { at_last: false, maximum: true },
            RuleName::LargestLast => SemanticConstraint::Extremal { at_last: true, maximum: true },
            RuleName::SmallestFirst => {
                SemanticConstraint::Extremal { at_last: false, maximum: false }
            }
            RuleName::SmallestLast => SemanticConstraint::Extremal { at_last: true, maximum: false },
            _ => unreachable!("chain_shape admits only function rules here"),
        }),
        ChainShape::CourseLift { quantifier, value } => match count_bounds(&quantifier, c) {
            Some((lo, hi)) => Ok(SemanticConstraint::CourseCount {
                span: CourseSpan::All,
                predicate: value,
                lo,
                hi,
            }),
            None => Ok(SemanticConstraint::Constant(false)),
        },
        ChainShape::Window { rule, value } => {
            let k = rule.softness.expect("validated above").min(c);
            let span = match rule.name {
                RuleName::Prefix => CourseSpan::First(k),
                RuleName::Postfix => CourseSpan::Last(k),
                _ => unreachable!(),
            };
            Ok(SemanticConstraint::CourseCount { span, predicate: value, lo: k, hi: k })
        }
        ChainShape::SetLift { accessor, quantifier, value } => match accessor {
            RuleName::Range => Ok(SemanticConstraint::RangeCount {
                predicate: value,
                mode: if quantifier == RuleName::All { RangeMode::All } else { RangeMode::Half },
            }),
            RuleName::Defined => {
                // defined(curr) = 1..n_courses for a total function, so the
                // lift collapses to an instance-determined constant
                let holds = (1..=c).filter(|&i| value.admits(i, c)).count() as u32;
                let truth = match quantifier {
                    RuleName::All => holds == c,
                    RuleName::Half => holds == c / 2,
                    _ => unreachable!(),
                };
                Ok(SemanticConstraint::Constant(truth))
            }
            _ => unreachable!(),
        },
    }
}

/// Evaluate a streamliner directly on a concrete assignment. Used as the
/// brute-force oracle for encoding correctness.
pub fn satisfies(s: &Streamliner, inst: &BacpInstance, sol: &BacpSolution) -> Result<bool> {
    let semantic = streamliner_semantics(s, inst)?;
    Ok(constraint_holds(&semantic, inst, sol))
}

/// Evaluate an abstract constraint on a concrete assignment.
pub fn constraint_holds(
    semantic: &SemanticConstraint,
    inst: &BacpInstance,
    sol: &BacpSolution,
) -> bool {
    let c = inst.n_courses;
    let p = inst.n_periods;
    match *semantic {
        SemanticConstraint::MonotoneNonDecreasing => {
            (1..c).all(|i| sol.period_of(i) <= sol.period_of(i + 1))
        }
        SemanticConstraint::MonotoneNonIncreasing => {
            (1..c).all(|i| sol.period_of(i) >= sol.period_of(i + 1))
        }
        SemanticConstraint::Extremal { at_last, maximum } => {
            let pos = if at_last { c } else { 1 };
            let pivot = sol.period_of(pos);
            if maximum {
                (1..=c).all(|i| sol.period_of(i) <= pivot)
            } else {
                (1..=c).all(|i| sol.period_of(i) >= pivot)
            }
        }
        SemanticConstraint::CourseCount { span, predicate, lo, hi } => {
            let count = span
                .courses(c)
                .filter(|&i| predicate.admits(sol.period_of(i), p))
                .count() as u32;
            lo <= count && count <= hi
        }
        SemanticConstraint::RangeCount { predicate, mode } => {
            let mut attained = vec![false; p as usize + 1];
            for i in 1..=c {
                attained[sol.period_of(i) as usize] = true;
            }
            let total = attained.iter().filter(|&&b| b).count() as u32;
            let good = (1..=p)
                .filter(|&v| attained[v as usize] && predicate.admits(v, p))
                .count() as u32;
            match mode {
                RangeMode::All => good == total,
                RangeMode::Half => good == total / 2,
            }
        }
        SemanticConstraint::Constant(b) => b,
    }
}

/// Mutually contradictory candidate pairs: two universal value
/// restrictions (over all courses or over all attained periods) with
/// disjoint predicates empty the assignment space and are inadmissible as
/// a combination.
pub fn contradicts(a: &Streamliner, b: &Streamliner) -> bool {
    fn universal_predicate(s: &Streamliner) -> Option<ValuePredicate> {
        match chain_shape(&s.chain).ok()? {
            ChainShape::CourseLift { quantifier, value }
                if quantifier.name == RuleName::All =>
            {
                Some(value)
            }
            ChainShape::SetLift { accessor: RuleName::Range, quantifier: RuleName::All, value } => {
                Some(value)
            }
            _ => None,
        }
    }
    match (universal_predicate(a), universal_predicate(b)) {
        (Some(x), Some(y)) => x.disjoint_with(y),
        _ => false,
    }
}
