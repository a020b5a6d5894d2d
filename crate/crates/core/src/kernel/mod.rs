//! A small deterministic finite-domain constraint solver with metered
//! search cost.
//!
//! Variables have contiguous integer range domains (booleans are 0..1
//! variables). Propagation is bounds consistency on linear constraints and
//! full propagation on reified equality, channelling and exactly-one rows.
//! Search is depth-first with smallest-domain-first variable selection
//! (ties by variable index) and ascending value order, branching only on
//! the designated search variables. Cost is the number of search nodes
//! expanded, fully deterministic and independent of wall clock.

mod solve;

pub use solve::{enumerate_all, solve};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a variable inside one [`Csp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub(crate) fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Comparison operator of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// Constraint forms understood by the kernel.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// `sum a_i * v_i  (<= | >= | =)  rhs`
    Linear { terms: Vec<(i64, VarId)>, cmp: Cmp, rhs: i64 },
    /// `lhs < rhs`
    Less { lhs: VarId, rhs: VarId },
    /// `flag <=> var = value` (flag is a 0..1 variable)
    ReifiedEq { flag: VarId, var: VarId, value: i64 },
    /// Row channelling: `flags[j] <=> var = first_value + j`, and `var`
    /// takes exactly one of the covered values. The initial domain of
    /// `var` must lie inside the covered span.
    Channel { var: VarId, first_value: i64, flags: Vec<VarId> },
    /// Exactly one of the 0..1 variables is 1.
    ExactlyOne { flags: Vec<VarId> },
}

/// A constraint satisfaction problem in kernel form.
#[derive(Debug, Clone, Default)]
pub struct Csp {
    pub(crate) lb: Vec<i64>,
    pub(crate) ub: Vec<i64>,
    pub(crate) names: Vec<String>,
    pub(crate) search: Vec<VarId>,
    pub(crate) constraints: Vec<Constraint>,
}

impl Csp {
    pub fn new() -> Self {
        Csp::default()
    }

    /// Declare a named integer variable with an inclusive, nonempty range
    /// domain.
    pub fn new_named_var(&mut self, lb: i64, ub: i64, name: String) -> VarId {
        assert!(lb <= ub, "empty domain for {name}");
        self.lb.push(lb);
        self.ub.push(ub);
        self.names.push(name);
        VarId((self.lb.len() - 1) as u32)
    }

    /// Declare a 0..1 variable.
    pub fn new_bool(&mut self, name: String) -> VarId {
        self.new_named_var(0, 1, name)
    }

    /// Mark a variable as a decision (search) variable. Branching happens
    /// only on marked variables; everything else must be fixed by
    /// propagation once the decisions are made.
    pub fn mark_search(&mut self, v: VarId) {
        self.search.push(v);
    }

    pub fn post(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn num_vars(&self) -> usize {
        self.lb.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.names[v.idx()]
    }

    /// Check variable references and domain sanity.
    pub fn check_well_formed(&self) -> Result<()> {
        let n = self.lb.len() as u32;
        let check = |v: VarId, what: &str| -> Result<()> {
            if v.0 >= n {
                return Err(Error::MalformedCsp(format!(
                    "{what} references variable {} of {n}",
                    v.0
                )));
            }
            Ok(())
        };
        for v in &self.search {
            check(*v, "search list")?;
        }
        for c in &self.constraints {
            match c {
                Constraint::Linear { terms, .. } => {
                    for (_, v) in terms {
                        check(*v, "linear")?;
                    }
                }
                Constraint::Less { lhs, rhs } => {
                    check(*lhs, "less")?;
                    check(*rhs, "less")?;
                }
                Constraint::ReifiedEq { flag, var, .. } => {
                    check(*flag, "reified")?;
                    check(*var, "reified")?;
                }
                Constraint::Channel { var, first_value, flags } => {
                    check(*var, "channel")?;
                    for f in flags {
                        check(*f, "channel")?;
                    }
                    let span_hi = first_value + flags.len() as i64 - 1;
                    if self.lb[var.idx()] < *first_value || self.ub[var.idx()] > span_hi {
                        return Err(Error::MalformedCsp(format!(
                            "channel span {}..{} does not cover the domain of {}",
                            first_value,
                            span_hi,
                            self.names[var.idx()]
                        )));
                    }
                }
                Constraint::ExactlyOne { flags } => {
                    for f in flags {
                        check(*f, "exactly-one")?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Human-readable constraint listing, one per line, for golden-file
    /// tests and debugging.
    pub fn listing(&self) -> String {
        let name = |v: &VarId| -> String {
            let n = &self.names[v.idx()];
            if n.is_empty() {
                format!("v{}", v.0)
            } else {
                n.clone()
            }
        };
        let mut out = String::new();
        for (i, (lb, ub)) in self.lb.iter().zip(&self.ub).enumerate() {
            let v = VarId(i as u32);
            let tag = if self.search.contains(&v) { " search" } else { "" };
            out.push_str(&format!("var {} in {}..{}{}\n", name(&v), lb, ub, tag));
        }
        for c in &self.constraints {
            match c {
                Constraint::Linear { terms, cmp, rhs } => {
                    let body = terms
                        .iter()
                        .map(|(a, v)| {
                            if *a == 1 {
                                name(v)
                            } else {
                                format!("{}*{}", a, name(v))
                            }
                        })
                        .collect::<Vec<_>>()
                        .join(" + ");
                    let op = match cmp {
                        Cmp::Le => "<=",
                        Cmp::Ge => ">=",
                        Cmp::Eq => "=",
                    };
                    out.push_str(&format!("linear: {body} {op} {rhs}\n"));
                }
                Constraint::Less { lhs, rhs } => {
                    out.push_str(&format!("less: {} < {}\n", name(lhs), name(rhs)));
                }
                Constraint::ReifiedEq { flag, var, value } => {
                    out.push_str(&format!("reified: {} <=> {} = {}\n", name(flag), name(var), value));
                }
                Constraint::Channel { var, first_value, flags } => {
                    let fl = flags.iter().map(|f| name(f)).collect::<Vec<_>>().join(",");
                    out.push_str(&format!("channel: {} = {}.. <-> [{}]\n", name(var), first_value, fl));
                }
                Constraint::ExactlyOne { flags } => {
                    let fl = flags.iter().map(|f| name(f)).collect::<Vec<_>>().join(",");
                    out.push_str(&format!("exactly-one: [{fl}]\n"));
                }
            }
        }
        out
    }

    /// Evaluate every constraint under a full assignment. Used to
    /// cross-check leaves and in tests.
    pub fn assignment_satisfies(&self, values: &[i64]) -> bool {
        self.constraints.iter().all(|c| match c {
            Constraint::Linear { terms, cmp, rhs } => {
                let s: i64 = terms.iter().map(|(a, v)| a * values[v.idx()]).sum();
                match cmp {
                    Cmp::Le => s <= *rhs,
                    Cmp::Ge => s >= *rhs,
                    Cmp::Eq => s == *rhs,
                }
            }
            Constraint::Less { lhs, rhs } => values[lhs.idx()] < values[rhs.idx()],
            Constraint::ReifiedEq { flag, var, value } => {
                (values[flag.idx()] == 1) == (values[var.idx()] == *value)
            }
            Constraint::Channel { var, first_value, flags } => {
                let mut ones = 0;
                let mut ok = true;
                for (j, f) in flags.iter().enumerate() {
                    let expect = values[var.idx()] == first_value + j as i64;
                    if (values[f.idx()] == 1) != expect {
                        ok = false;
                    }
                    if values[f.idx()] == 1 {
                        ones += 1;
                    }
                }
                ok && ones == 1
            }
            Constraint::ExactlyOne { flags } => {
                flags.iter().filter(|f| values[f.idx()] == 1).count() == 1
            }
        })
    }
}

/// Search budget. The effective node cap is `min(max_nodes, max_cost)`;
/// `max_cost` is the knob racing manipulates while `max_nodes` acts as a
/// hard guard. The optional wall-clock cap is defensive only and never
/// used by the toolkit's own decision logic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveBudget {
    pub max_nodes: u64,
    pub max_cost: u64,
    pub wall_clock_cap: Option<f64>,
}

impl SolveBudget {
    pub fn nodes(cap: u64) -> Self {
        SolveBudget { max_nodes: u64::MAX, max_cost: cap, wall_clock_cap: None }
    }

    pub fn unlimited() -> Self {
        SolveBudget { max_nodes: u64::MAX, max_cost: u64::MAX, wall_clock_cap: None }
    }

    pub fn effective_cap(&self) -> u64 {
        self.max_nodes.min(self.max_cost)
    }
}

/// Status of a finished solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Capped,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveStatus::Sat => write!(f, "SAT"),
            SolveStatus::Unsat => write!(f, "UNSAT"),
            SolveStatus::Capped => write!(f, "CAPPED"),
        }
    }
}

/// Outcome of one solve. `cost` is the number of search nodes expanded;
/// for capped runs it equals the cap that was in force. `wall_time` and
/// `max_depth` are informational only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub cost: u64,
    pub solution: Option<Vec<i64>>,
    pub wall_time: f64,
    pub max_depth: u32,
}
