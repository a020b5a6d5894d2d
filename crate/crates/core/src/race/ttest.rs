//! Paired Student t-test elimination with Bonferroni correction.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::HeuristicName;

/// Result of one paired comparison of `other` against `best`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairedComparison {
    /// Regular case: the one-sided p-value for "other is worse".
    Stat { t: f64, p_worse: f64 },
    /// All paired differences are equal and nonzero.
    ConstantDifference { worse: bool },
    /// All paired differences are zero.
    Identical,
}

/// Paired one-sided comparison: positive differences mean `other` has the
/// higher (worse) cost.
pub fn paired_one_sided(best: &[f64], other: &[f64]) -> Result<PairedComparison> {
    if best.len() != other.len() || best.len() < 2 {
        return Err(Error::Validation(format!(
            "paired test needs two equal-length samples of at least 2, got {} and {}",
            best.len(),
            other.len()
        )));
    }
    let n = best.len() as f64;
    let diffs: Vec<f64> = other.iter().zip(best).map(|(o, b)| o - b).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            PairedComparison::Identical
        } else {
            PairedComparison::ConstantDifference { worse: mean > 0.0 }
        });
    }
    let t = mean / (var.sqrt() / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| Error::Internal(format!("t distribution: {e}")))?;
    let p_worse = 1.0 - dist.cdf(t);
    Ok(PairedComparison::Stat { t, p_worse })
}

/// One round of statistical elimination: identify the survivor with the
/// best mean cost over the instances seen so far, compare every other
/// survivor against it with a paired one-sided t-test, and eliminate those
/// significantly worse at the Bonferroni-adjusted level
/// `alpha / (survivors - 1)`.
///
/// Cost rows must be aligned (same instances, same order). Returns the
/// eliminated recipe names.
pub fn ttest_eliminate(
    survivors: &[(HeuristicName, Vec<f64>)],
    alpha: f64,
) -> Result<Vec<HeuristicName>> {
    if survivors.len() < 2 {
        return Ok(Vec::new());
    }
    let k = survivors[0].1.len();
    if survivors.iter().any(|(_, costs)| costs.len() != k) {
        return Err(Error::Validation("misaligned cost rows in t-test".into()));
    }
    if k < 2 {
        return Ok(Vec::new());
    }
    let mean = |costs: &[f64]| costs.iter().sum::<f64>() / costs.len() as f64;
    let best_idx = survivors
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| mean(&a.1).partial_cmp(&mean(&b.1)).expect("finite means"))
        .map(|(i, _)| i)
        .expect("at least two survivors");
    let threshold = alpha / (survivors.len() - 1) as f64;
    let mut eliminated = Vec::new();
    for (i, (name, costs)) in survivors.iter().enumerate() {
        if i == best_idx {
            continue;
        }
        let verdict = paired_one_sided(&survivors[best_idx].1, costs)?;
        let worse = match verdict {
            PairedComparison::Stat { p_worse, .. } => p_worse < threshold,
            PairedComparison::ConstantDifference { worse } => worse,
            PairedComparison::Identical => false,
        };
        if worse {
            eliminated.push(*name);
        }
    }
    Ok(eliminated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_the_reference_statistic() {
        // reference values computed independently with scipy:
        // d = [4,5,6,4,5,6,4,5,6,5], t = 19.364916731037088,
        // one-sided p = 6.033327986473805e-09
        let a: Vec<f64> = vec![10.0, 11.0, 9.0, 10.0, 12.0, 8.0, 10.0, 11.0, 9.0, 10.0];
        let d = [4.0, 5.0, 6.0, 4.0, 5.0, 6.0, 4.0, 5.0, 6.0, 5.0];
        let b: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
        match paired_one_sided(&a, &b).unwrap() {
            PairedComparison::Stat { t, p_worse } => {
                assert_relative_eq!(t, 19.364916731037088, max_relative = 1e-12);
                assert_relative_eq!(p_worse, 6.033327986473805e-09, max_relative = 1e-6);
            }
            other => panic!("expected a statistic, got {other:?}"),
        }
    }

    #[test]
    fn eliminates_the_uniformly_worse_model() {
        let a: Vec<f64> = vec![10.0, 11.0, 9.0, 10.0, 12.0, 8.0, 10.0, 11.0, 9.0, 10.0];
        let d = [4.0, 5.0, 6.0, 4.0, 5.0, 6.0, 4.0, 5.0, 6.0, 5.0];
        let b: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
        let out = ttest_eliminate(
            &[(HeuristicName::Compact, a), (HeuristicName::ExplicitBool, b)],
            0.05,
        )
        .unwrap();
        assert_eq!(out, vec![HeuristicName::ExplicitBool]);
    }

    #[test]
    fn identical_cost_vectors_are_both_retained() {
        let a: Vec<f64> = vec![5.0, 6.0, 7.0, 5.0];
        let out = ttest_eliminate(
            &[(HeuristicName::Compact, a.clone()), (HeuristicName::ExplicitBool, a)],
            0.05,
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn constant_nonzero_difference_eliminates() {
        let a: Vec<f64> = vec![5.0, 6.0, 7.0, 5.0];
        let b: Vec<f64> = a.iter().map(|x| x + 3.0).collect();
        let out = ttest_eliminate(
            &[(HeuristicName::Compact, a), (HeuristicName::ExplicitBool, b)],
            0.05,
        )
        .unwrap();
        assert_eq!(out, vec![HeuristicName::ExplicitBool]);
    }

    #[test]
    fn bonferroni_divides_by_survivor_count_minus_one() {
        // three survivors: per-comparison threshold 0.05 / 2 = 0.025.
        // craft a contender whose one-sided p sits between 0.025 and 0.05:
        // it survives under Bonferroni but would fall alone.
        // d alternates 2.5 / -0.5: t = 2.0, one-sided p = 0.038276 (scipy)
        let base: Vec<f64> = vec![10.0; 10];
        let mid: Vec<f64> =
            base.iter().enumerate().map(|(i, x)| x + if i % 2 == 0 { 2.5 } else { -0.5 }).collect();
        let worse: Vec<f64> = base.iter().map(|x| x + 50.0).collect();
        match paired_one_sided(&base, &mid).unwrap() {
            PairedComparison::Stat { p_worse, .. } => {
                assert!(p_worse > 0.025 && p_worse < 0.05, "fixture p = {p_worse}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let three = ttest_eliminate(
            &[
                (HeuristicName::Compact, base.clone()),
                (HeuristicName::ExplicitBool, mid.clone()),
                (HeuristicName::FlagRelation, worse),
            ],
            0.05,
        )
        .unwrap();
        assert_eq!(three, vec![HeuristicName::FlagRelation]);
        let two = ttest_eliminate(
            &[(HeuristicName::Compact, base), (HeuristicName::ExplicitBool, mid)],
            0.05,
        )
        .unwrap();
        assert_eq!(two, vec![HeuristicName::ExplicitBool]);
    }
}
