//! The test-time evaluation protocol and its TotalTime accounting.
//!
//! Pre-schedule entries run first inside their budget fractions; the
//! selected entry gets the remaining budget; a failed (UNSAT or capped)
//! streamlined run falls back to the original unstreamlined model.
//! TotalTime is the sum of every cost actually consumed.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::SolveStatus;
use crate::mcts::Portfolio;
use crate::model::HeuristicName;
use crate::race::Evaluator;
use crate::streamliner::StreamlinerSet;

use super::SelectorModel;

/// Node budgets of the test protocol.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Budget for the streamlined attempt (schedule + selected entry).
    pub budget: u64,
    /// Separate cap for the unstreamlined fallback solve.
    pub fallback_budget: u64,
}

/// One cost-consuming step, for the audit trail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostEvent {
    /// "pre", "selected" or "fallback".
    pub phase: String,
    /// Portfolio entry index for pre/selected phases.
    pub entry: Option<usize>,
    pub status: String,
    pub cost: u64,
}

/// Outcome of one test instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestOutcome {
    pub instance_id: String,
    pub chosen_entry: usize,
    /// Status of the selected entry's run (SAT means no fallback needed).
    pub streamlined_status: SolveStatus,
    /// Sum of all costs consumed for this instance.
    pub total_cost: u64,
    pub baseline_cost: u64,
    /// False only when even the fallback was capped.
    pub solved: bool,
    pub events: Vec<CostEvent>,
}

fn run_one(
    portfolio: &Portfolio,
    entry: usize,
    instance_id: &str,
    cap: u64,
    evaluator: &dyn Evaluator,
) -> Result<(SolveStatus, u64)> {
    let e = &portfolio.entries[entry];
    let out = evaluator.evaluate(&e.set, e.recipe, instance_id, cap)?;
    Ok((out.status, out.cost))
}

fn fallback(
    instance_id: &str,
    cap: u64,
    evaluator: &dyn Evaluator,
) -> Result<(SolveStatus, u64)> {
    let out =
        evaluator.evaluate(&StreamlinerSet::empty(), HeuristicName::Compact, instance_id, cap)?;
    Ok((out.status, out.cost))
}

/// Run the full protocol with the trained selector.
pub fn run_test_protocol(
    model: &SelectorModel,
    portfolio: &Portfolio,
    raw_features: &[f64],
    instance_id: &str,
    baseline_cost: u64,
    cfg: &ProtocolConfig,
    evaluator: &dyn Evaluator,
) -> Result<TestOutcome> {
    let chosen = model.select(raw_features)?;
    let mut events = Vec::new();
    let mut consumed = 0u64;

    for &(entry, fraction) in &model.pre_schedule {
        let cap = ((cfg.budget as f64 * fraction).floor() as u64).max(1);
        let (status, cost) = run_one(portfolio, entry, instance_id, cap, evaluator)?;
        events.push(CostEvent {
            phase: "pre".into(),
            entry: Some(entry),
            status: status.to_string(),
            cost,
        });
        consumed += cost;
        if status == SolveStatus::Sat {
            return Ok(TestOutcome {
                instance_id: instance_id.to_string(),
                chosen_entry: chosen,
                streamlined_status: SolveStatus::Sat,
                total_cost: consumed,
                baseline_cost,
                solved: true,
                events,
            });
        }
    }

    let remaining = cfg.budget.saturating_sub(consumed).max(1);
    let (status, cost) = run_one(portfolio, chosen, instance_id, remaining, evaluator)?;
    events.push(CostEvent {
        phase: "selected".into(),
        entry: Some(chosen),
        status: status.to_string(),
        cost,
    });
    consumed += cost;
    if status == SolveStatus::Sat {
        return Ok(TestOutcome {
            instance_id: instance_id.to_string(),
            chosen_entry: chosen,
            streamlined_status: status,
            total_cost: consumed,
            baseline_cost,
            solved: true,
            events,
        });
    }

    // revert to the original model
    let (fb_status, fb_cost) = fallback(instance_id, cfg.fallback_budget, evaluator)?;
    events.push(CostEvent {
        phase: "fallback".into(),
        entry: None,
        status: fb_status.to_string(),
        cost: fb_cost,
    });
    consumed += fb_cost;
    Ok(TestOutcome {
        instance_id: instance_id.to_string(),
        chosen_entry: chosen,
        streamlined_status: status,
        total_cost: consumed,
        baseline_cost,
        solved: fb_status == SolveStatus::Sat,
        events,
    })
}

/// Run the protocol with a forced entry and no pre-schedule. This is the
/// per-entry evaluation backing the Virtual Best Solver.
pub fn run_entry_protocol(
    portfolio: &Portfolio,
    entry: usize,
    instance_id: &str,
    baseline_cost: u64,
    cfg: &ProtocolConfig,
    evaluator: &dyn Evaluator,
) -> Result<TestOutcome> {
    let mut events = Vec::new();
    let (status, cost) = run_one(portfolio, entry, instance_id, cfg.budget, evaluator)?;
    events.push(CostEvent {
        phase: "selected".into(),
        entry: Some(entry),
        status: status.to_string(),
        cost,
    });
    let mut consumed = cost;
    let solved;
    if status == SolveStatus::Sat {
        solved = true;
    } else {
        let (fb_status, fb_cost) = fallback(instance_id, cfg.fallback_budget, evaluator)?;
        events.push(CostEvent {
            phase: "fallback".into(),
            entry: None,
            status: fb_status.to_string(),
            cost: fb_cost,
        });
        consumed += fb_cost;
        solved = fb_status == SolveStatus::Sat;
    }
    Ok(TestOutcome {
        instance_id: instance_id.to_string(),
        chosen_entry: entry,
        streamlined_status: status,
        total_cost: consumed,
        baseline_cost,
        solved,
        events,
    })
}
