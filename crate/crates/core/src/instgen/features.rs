//! The per-instance feature vector.
//!
//! Thirteen numeric features in a fixed, documented order: instance shape
//! (courses, periods, ratio), prerequisite structure (density, DAG depth),
//! load statistics (mean, population std, min, max), slack of the load and
//! cardinality bounds, and two probe features from a 1000-node capped
//! unstreamlined solve (nodes consumed and maximum search depth).

use crate::bacp::BacpInstance;
use crate::error::Result;
use crate::kernel::{solve, SolveBudget};
use crate::model::{compile, RANKED_TABLE};
use crate::streamliner::StreamlinerSet;

/// Node cap of the probe solve.
pub const PROBE_CAP: u64 = 1000;

/// Feature names, index-aligned with [`extract_features`].
pub const FEATURE_NAMES: [&str; 13] = [
    "n_courses",
    "n_periods",
    "course_period_ratio",
    "prereq_density",
    "prereq_depth",
    "load_mean",
    "load_std",
    "load_min",
    "load_max",
    "load_slack",
    "card_slack",
    "probe_nodes",
    "probe_depth",
];

/// Longest prerequisite chain, in edges. Cyclic inputs (legal but
/// unsatisfiable) are capped at the course count.
fn prereq_depth(inst: &BacpInstance) -> u32 {
    let n = inst.n_courses as usize;
    let mut adj = vec![Vec::new(); n];
    let mut indeg = vec![0u32; n];
    for &(a, b) in &inst.prerequisite {
        adj[(a - 1) as usize].push((b - 1) as usize);
        indeg[(b - 1) as usize] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut depth = vec![0u32; n];
    let mut seen = 0;
    let mut best = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &w in &adj[v] {
            depth[w] = depth[w].max(depth[v] + 1);
            best = best.max(depth[w]);
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }
    if seen < n {
        inst.n_courses
    } else {
        best
    }
}

/// Extract the feature vector. Pure and deterministic; the probe runs the
/// rank-1 unstreamlined model under a fixed node cap.
pub fn extract_features(inst: &BacpInstance) -> Result<Vec<f64>> {
    let c = inst.n_courses as f64;
    let p = inst.n_periods as f64;
    let pairs = if inst.n_courses >= 2 { c * (c - 1.0) / 2.0 } else { 1.0 };
    let density = inst.prerequisite.len() as f64 / pairs;

    let loads: Vec<f64> = inst.course_load.iter().map(|&l| l as f64).collect();
    let mean = loads.iter().sum::<f64>() / c;
    let std = (loads.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / c).sqrt();
    let min = loads.iter().copied().fold(f64::INFINITY, f64::min);
    let max = loads.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let total: f64 = loads.iter().sum();
    let load_span = (inst.load_per_period_ub - inst.load_per_period_lb + 1) as f64;
    let load_slack = (p * inst.load_per_period_ub as f64 - total) / (p * load_span);
    let card_span = (inst.courses_per_period_ub - inst.courses_per_period_lb + 1) as f64;
    let card_slack = (p * inst.courses_per_period_ub as f64 - c) / (p * card_span);

    let model = compile(inst, &StreamlinerSet::empty(), &RANKED_TABLE[0], &[])?;
    let probe = solve(&model.csp, &SolveBudget::nodes(PROBE_CAP))?;

    Ok(vec![
        c,
        p,
        c / p,
        density,
        prereq_depth(inst) as f64,
        mean,
        std,
        min,
        max,
        load_slack,
        card_slack,
        probe.cost as f64,
        probe.max_depth as f64,
    ])
}
