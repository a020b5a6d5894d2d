//! Deterministic candidate list construction from the decision signature.

use serde::{Deserialize, Serialize};

use super::{RuleName, Streamliner, StreamlinerRule, ValuePredicate};
use crate::bacp::BacpClass;

/// Softness values per starred rule family plus pruning switches.
///
/// Window rules (prefix/postfix) are emitted only when explicit softness
/// values are supplied: the candidate list is built at class level, where
/// the number of courses is unknown, so there is no usable default window
/// size. Defined-set lifts collapse to instance constants on total
/// functions and are pruned by default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateConfig {
    pub most_softness: Vec<u32>,
    pub all_but_softness: Vec<u32>,
    pub approx_half_softness: Vec<u32>,
    pub prefix_softness: Vec<u32>,
    pub postfix_softness: Vec<u32>,
    pub prune_constant_rules: bool,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        CandidateConfig {
            most_softness: vec![1, 2],
            all_but_softness: vec![1, 2],
            approx_half_softness: vec![1],
            prefix_softness: vec![],
            postfix_softness: vec![],
            prune_constant_rules: true,
        }
    }
}

const VALUE_RULES: [(RuleName, ValuePredicate); 4] = [
    (RuleName::Odd, ValuePredicate::Odd),
    (RuleName::Even, ValuePredicate::Even),
    (RuleName::LowerHalf, ValuePredicate::LowerHalf),
    (RuleName::UpperHalf, ValuePredicate::UpperHalf),
];

fn predicate_phrase(p: ValuePredicate) -> &'static str {
    match p {
        ValuePredicate::Odd => "odd",
        ValuePredicate::Even => "even",
        ValuePredicate::LowerHalf => "lower-half",
        ValuePredicate::UpperHalf => "upper-half",
    }
}

fn range_phrase(p: ValuePredicate) -> &'static str {
    match p {
        ValuePredicate::Odd => "are odd",
        ValuePredicate::Even => "are even",
        ValuePredicate::LowerHalf => "are in the lower half",
        ValuePredicate::UpperHalf => "are in the upper half",
    }
}

/// Generate the deterministic candidate list for the class: function-level
/// rules, mapping-lifted cardinality rules, range-set rules and (unless
/// pruned) defined-set rules. Ids are assigned by position, starting at 1.
pub fn generate_candidates(_class: &BacpClass, config: &CandidateConfig) -> Vec<Streamliner> {
    let mut out: Vec<Streamliner> = Vec::new();
    let mut push = |chain: Vec<StreamlinerRule>, description: String| {
        let id = out.len() as u32 + 1;
        out.push(Streamliner { id, chain, description });
    };

    // (a) function-level rules
    push(
        vec![StreamlinerRule::plain(RuleName::MonotonicIncreasing)],
        "curr is monotonically increasing".into(),
    );
    push(
        vec![StreamlinerRule::plain(RuleName::MonotonicDecreasing)],
        "curr is monotonically decreasing".into(),
    );
    push(
        vec![StreamlinerRule::plain(RuleName::LargestFirst)],
        "the first course takes the largest period".into(),
    );
    push(
        vec![StreamlinerRule::plain(RuleName::LargestLast)],
        "the last course takes the largest period".into(),
    );
    push(
        vec![StreamlinerRule::plain(RuleName::SmallestFirst)],
        "the first course takes the smallest period".into(),
    );
    push(
        vec![StreamlinerRule::plain(RuleName::SmallestLast)],
        "the last course takes the smallest period".into(),
    );

    // (b) mapping-lifted cardinality rules over the course set
    let mut quantifiers: Vec<(StreamlinerRule, String)> = vec![
        (StreamlinerRule::plain(RuleName::All), "all of the courses".into()),
        (StreamlinerRule::plain(RuleName::Half), "half of the courses".into()),
    ];
    for &k in &config.most_softness {
        quantifiers.push((
            StreamlinerRule::soft(RuleName::Most, k),
            format!("all but at most {k} of the courses"),
        ));
    }
    for &k in &config.approx_half_softness {
        quantifiers.push((
            StreamlinerRule::soft(RuleName::ApproxHalf, k),
            format!("within {k} of half of the courses"),
        ));
    }
    for &k in &config.all_but_softness {
        quantifiers.push((
            StreamlinerRule::soft(RuleName::AllBut, k),
            format!("all but exactly {k} of the courses"),
        ));
    }
    for (quantifier, phrase) in &quantifiers {
        for (rule, predicate) in VALUE_RULES {
            push(
                vec![*quantifier, StreamlinerRule::plain(rule)],
                format!("{phrase} map to {} periods", predicate_phrase(predicate)),
            );
        }
    }

    // window rules, only with explicit softness values
    for &k in &config.prefix_softness {
        for (rule, predicate) in VALUE_RULES {
            push(
                vec![StreamlinerRule::soft(RuleName::Prefix, k), StreamlinerRule::plain(rule)],
                format!("the first {k} courses map to {} periods", predicate_phrase(predicate)),
            );
        }
    }
    for &k in &config.postfix_softness {
        for (rule, predicate) in VALUE_RULES {
            push(
                vec![StreamlinerRule::soft(RuleName::Postfix, k), StreamlinerRule::plain(rule)],
                format!("the last {k} courses map to {} periods", predicate_phrase(predicate)),
            );
        }
    }

    // (c) range-set rules over the distinct attained periods
    for quantifier in [RuleName::All, RuleName::Half] {
        for (rule, predicate) in VALUE_RULES {
            let q = if quantifier == RuleName::All { "all" } else { "half" };
            push(
                vec![
                    StreamlinerRule::plain(RuleName::Range),
                    StreamlinerRule::plain(quantifier),
                    StreamlinerRule::plain(rule),
                ],
                format!("{q} of the range values of curr {}", range_phrase(predicate)),
            );
        }
    }

    // (d) defined-set rules: constant lifts on total functions, kept only
    // for grammar fidelity when pruning is disabled
    if !config.prune_constant_rules {
        for quantifier in [RuleName::All, RuleName::Half] {
            for (rule, predicate) in VALUE_RULES {
                let q = if quantifier == RuleName::All { "all" } else { "half" };
                push(
                    vec![
                        StreamlinerRule::plain(RuleName::Defined),
                        StreamlinerRule::plain(quantifier),
                        StreamlinerRule::plain(rule),
                    ],
                    format!("{q} of the defined values of curr {}", range_phrase(predicate)),
                );
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_list_covers_the_rule_families() {
        let list = generate_candidates(&BacpClass, &CandidateConfig::default());
        // 6 function-level + 7 quantifiers x 4 predicates + 2 x 4 range rules
        assert_eq!(list.len(), 6 + 28 + 8);
        let descriptions: Vec<&str> = list.iter().map(|s| s.description.as_str()).collect();
        assert!(descriptions.contains(&"curr is monotonically increasing"));
        assert!(descriptions.contains(&"half of the range values of curr are even"));
        assert!(descriptions.contains(&"half of the courses map to even periods"));
    }

    #[test]
    fn generation_is_deterministic_with_positional_ids() {
        let a = generate_candidates(&BacpClass, &CandidateConfig::default());
        let b = generate_candidates(&BacpClass, &CandidateConfig::default());
        assert_eq!(a, b);
        for (i, s) in a.iter().enumerate() {
            assert_eq!(s.id, i as u32 + 1);
        }
    }

    #[test]
    fn every_candidate_is_well_typed() {
        let mut config = CandidateConfig { prune_constant_rules: false, ..Default::default() };
        config.prefix_softness = vec![2];
        config.postfix_softness = vec![2];
        for s in generate_candidates(&BacpClass, &config) {
            s.validate().unwrap();
        }
    }

    #[test]
    fn constant_rules_appear_only_when_unpruned() {
        let pruned = generate_candidates(&BacpClass, &CandidateConfig::default());
        assert!(pruned.iter().all(|s| !s.description.contains("defined")));
        let config = CandidateConfig { prune_constant_rules: false, ..Default::default() };
        let full = generate_candidates(&BacpClass, &config);
        assert_eq!(full.len(), pruned.len() + 8);
    }
}
