//! Depth-first search with propagation to fixpoint at every node.

use std::time::Instant;

use super::{Cmp, Constraint, Csp, SolveBudget, SolveOutcome, SolveStatus, VarId};
use crate::error::Result;

struct Conflict;

struct State<'a> {
    csp: &'a Csp,
    lb: Vec<i64>,
    ub: Vec<i64>,
    // (var, old_lb, old_ub) records, pushed once per variable per decision level
    trail: Vec<(u32, i64, i64)>,
    trailed_at: Vec<usize>, // trail length at which var was last trailed, per var
    level_marks: Vec<usize>,
    // (constraint, coefficient) watchers per variable; coefficient 0 marks
    // a non-linear watcher
    watchers: Vec<Vec<(u32, i64)>>,
    queue: Vec<u32>,
    in_queue: Vec<bool>,
    // constraint currently propagating; single-pass propagators skip
    // waking themselves
    active: u32,
    // constraints that do need to re-run on their own changes
    self_wake: Vec<bool>,
    // incrementally maintained linear sums: min contribution uses the lb
    // of positive terms and the ub of negative ones, max the opposite
    min_sum: Vec<i64>,
    max_sum: Vec<i64>,
    // largest |coefficient| per linear constraint: when the slack exceeds
    // it no term can be pruned and the scan is skipped
    max_coeff: Vec<i64>,
    // linear constraints over 0..1 variables only (spans never exceed 1),
    // the precondition of the quick reject
    bool_only: Vec<bool>,
}

impl<'a> State<'a> {
    fn new(csp: &'a Csp) -> Self {
        let n = csp.lb.len();
        let m = csp.constraints.len();
        let mut watchers: Vec<Vec<(u32, i64)>> = vec![Vec::new(); n];
        let mut min_sum = vec![0i64; m];
        let mut max_sum = vec![0i64; m];
        let mut max_coeff = vec![0i64; m];
        let mut bool_only = vec![false; m];
        for (ci, c) in csp.constraints.iter().enumerate() {
            let ci32 = ci as u32;
            match c {
                Constraint::Linear { terms, .. } => {
                    bool_only[ci] = terms
                        .iter()
                        .all(|(_, v)| csp.lb[v.idx()] >= 0 && csp.ub[v.idx()] <= 1);
                    for &(a, v) in terms {
                        watchers[v.idx()].push((ci32, a));
                        if a > 0 {
                            min_sum[ci] += a * csp.lb[v.idx()];
                            max_sum[ci] += a * csp.ub[v.idx()];
                        } else {
                            min_sum[ci] += a * csp.ub[v.idx()];
                            max_sum[ci] += a * csp.lb[v.idx()];
                        }
                        max_coeff[ci] = max_coeff[ci].max(a.abs());
                    }
                }
                Constraint::Less { lhs, rhs } => {
                    watchers[lhs.idx()].push((ci32, 0));
                    watchers[rhs.idx()].push((ci32, 0));
                }
                Constraint::ReifiedEq { flag, var, .. } => {
                    watchers[flag.idx()].push((ci32, 0));
                    watchers[var.idx()].push((ci32, 0));
                }
                Constraint::Channel { var, flags, .. } => {
                    watchers[var.idx()].push((ci32, 0));
                    for f in flags {
                        watchers[f.idx()].push((ci32, 0));
                    }
                }
                Constraint::ExactlyOne { flags } => {
                    for f in flags {
                        watchers[f.idx()].push((ci32, 0));
                    }
                }
            }
        }
        let self_wake = csp
            .constraints
            .iter()
            .map(|c| matches!(c, Constraint::Linear { cmp: Cmp::Eq, .. }))
            .collect();
        State {
            csp,
            lb: csp.lb.clone(),
            ub: csp.ub.clone(),
            trail: Vec::with_capacity(4 * n),
            trailed_at: vec![usize::MAX; n],
            level_marks: Vec::new(),
            watchers,
            queue: Vec::with_capacity(m),
            in_queue: vec![false; m],
            active: u32::MAX,
            self_wake,
            min_sum,
            max_sum,
            max_coeff,
            bool_only,
        }
    }

    #[inline]
    fn fixed(&self, v: usize) -> bool {
        self.lb[v] == self.ub[v]
    }

    #[inline]
    fn trail_var(&mut self, v: usize) {
        // one trail record per variable per level is enough to restore
        let mark = *self.level_marks.last().unwrap_or(&0);
        if self.trailed_at[v] == usize::MAX || self.trailed_at[v] < mark {
            self.trail.push((v as u32, self.lb[v], self.ub[v]));
            self.trailed_at[v] = self.trail.len() - 1;
        }
    }

    /// Apply a lower-bound change to the cached sums and enqueue watchers.
    #[inline]
    fn lb_moved(&mut self, v: usize, old: i64, new: i64) {
        let delta = new - old;
        for i in 0..self.watchers[v].len() {
            let (ci, a) = self.watchers[v][i];
            let cu = ci as usize;
            if a > 0 {
                self.min_sum[cu] += a * delta;
            } else if a < 0 {
                self.max_sum[cu] += a * delta;
            }
            if ci == self.active && !self.self_wake[cu] {
                continue;
            }
            if !self.in_queue[cu] {
                self.in_queue[cu] = true;
                self.queue.push(ci);
            }
        }
    }

    /// Apply an upper-bound change to the cached sums and enqueue watchers.
    #[inline]
    fn ub_moved(&mut self, v: usize, old: i64, new: i64) {
        let delta = new - old;
        for i in 0..self.watchers[v].len() {
            let (ci, a) = self.watchers[v][i];
            let cu = ci as usize;
            if a > 0 {
                self.max_sum[cu] += a * delta;
            } else if a < 0 {
                self.min_sum[cu] += a * delta;
            }
            if ci == self.active && !self.self_wake[cu] {
                continue;
            }
            if !self.in_queue[cu] {
                self.in_queue[cu] = true;
                self.queue.push(ci);
            }
        }
    }

    /// Silent sum restoration during undo: no enqueueing.
    #[inline]
    fn restore_sums(&mut self, v: usize, lb_old: i64, lb_new: i64, ub_old: i64, ub_new: i64) {
        for i in 0..self.watchers[v].len() {
            let (ci, a) = self.watchers[v][i];
            let cu = ci as usize;
            if a > 0 {
                self.min_sum[cu] += a * (lb_new - lb_old);
                self.max_sum[cu] += a * (ub_new - ub_old);
            } else if a < 0 {
                self.min_sum[cu] += a * (ub_new - ub_old);
                self.max_sum[cu] += a * (lb_new - lb_old);
            }
        }
    }

    fn set_lb(&mut self, v: VarId, val: i64) -> std::result::Result<(), Conflict> {
        let v = v.idx();
        if val > self.ub[v] {
            return Err(Conflict);
        }
        if val > self.lb[v] {
            self.trail_var(v);
            let old = self.lb[v];
            self.lb[v] = val;
            self.lb_moved(v, old, val);
        }
        Ok(())
    }

    fn set_ub(&mut self, v: VarId, val: i64) -> std::result::Result<(), Conflict> {
        let v = v.idx();
        if val < self.lb[v] {
            return Err(Conflict);
        }
        if val < self.ub[v] {
            self.trail_var(v);
            let old = self.ub[v];
            self.ub[v] = val;
            self.ub_moved(v, old, val);
        }
        Ok(())
    }

    fn assign(&mut self, v: VarId, val: i64) -> std::result::Result<(), Conflict> {
        self.set_lb(v, val)?;
        self.set_ub(v, val)
    }

    fn push_level(&mut self) {
        self.level_marks.push(self.trail.len());
    }

    /// Undo all changes made since the most recent level mark, keeping the
    /// level open so another value can be tried.
    fn undo_level(&mut self) {
        let mark = *self.level_marks.last().expect("no level to undo");
        while self.trail.len() > mark {
            let (v, lb, ub) = self.trail.pop().unwrap();
            let v = v as usize;
            let (cur_lb, cur_ub) = (self.lb[v], self.ub[v]);
            self.lb[v] = lb;
            self.ub[v] = ub;
            self.restore_sums(v, cur_lb, lb, cur_ub, ub);
            self.trailed_at[v] = usize::MAX;
        }
        self.drain_queue();
    }

    #[inline]
    fn drain_queue(&mut self) {
        for ci in self.queue.drain(..) {
            self.in_queue[ci as usize] = false;
        }
    }

    fn pop_level(&mut self) {
        self.undo_level();
        self.level_marks.pop();
    }

    fn enqueue_all(&mut self) {
        for ci in 0..self.csp.constraints.len() {
            if !self.in_queue[ci] {
                self.in_queue[ci] = true;
                self.queue.push(ci as u32);
            }
        }
    }

    fn propagate(&mut self) -> std::result::Result<(), Conflict> {
        while let Some(ci) = self.queue.pop() {
            self.in_queue[ci as usize] = false;
            self.active = ci;
            let res = self.run_propagator(ci as usize);
            self.active = u32::MAX;
            if res.is_err() {
                self.drain_queue();
                return res;
            }
        }
        Ok(())
    }

    fn run_propagator(&mut self, ci: usize) -> std::result::Result<(), Conflict> {
        // the constraint store lives behind the 'a borrow, so propagators
        // can take slices from it while mutating the bounds
        let csp: &'a Csp = self.csp;
        match &csp.constraints[ci] {
            Constraint::Linear { terms, cmp, rhs } => match cmp {
                Cmp::Le => self.prop_linear_le(ci, terms, *rhs),
                Cmp::Ge => self.prop_linear_ge(ci, terms, *rhs),
                Cmp::Eq => {
                    self.prop_linear_le(ci, terms, *rhs)?;
                    self.prop_linear_ge(ci, terms, *rhs)
                }
            },
            Constraint::Less { lhs, rhs } => {
                let (l, r) = (*lhs, *rhs);
                self.set_ub(l, self.ub[r.idx()] - 1)?;
                self.set_lb(r, self.lb[l.idx()] + 1)
            }
            Constraint::ReifiedEq { flag, var, value } => {
                let (b, v, k) = (*flag, *var, *value);
                if self.lb[b.idx()] == 1 {
                    return self.assign(v, k);
                }
                if self.ub[b.idx()] == 0 {
                    if self.fixed(v.idx()) && self.lb[v.idx()] == k {
                        return Err(Conflict);
                    }
                    if self.lb[v.idx()] == k {
                        return self.set_lb(v, k + 1);
                    }
                    if self.ub[v.idx()] == k {
                        return self.set_ub(v, k - 1);
                    }
                    return Ok(());
                }
                if k < self.lb[v.idx()] || k > self.ub[v.idx()] {
                    return self.assign(b, 0);
                }
                if self.fixed(v.idx()) && self.lb[v.idx()] == k {
                    return self.assign(b, 1);
                }
                Ok(())
            }
            Constraint::Channel { var, first_value, flags } => {
                self.prop_channel(*var, *first_value, flags)
            }
            Constraint::ExactlyOne { flags } => self.prop_exactly_one(flags),
        }
    }

    #[cfg(debug_assertions)]
    fn check_cached_sums(&self, ci: usize, terms: &[(i64, VarId)]) {
        let mut min_sum = 0i64;
        let mut max_sum = 0i64;
        for &(a, v) in terms {
            if a > 0 {
                min_sum += a * self.lb[v.idx()];
                max_sum += a * self.ub[v.idx()];
            } else {
                min_sum += a * self.ub[v.idx()];
                max_sum += a * self.lb[v.idx()];
            }
        }
        debug_assert_eq!(min_sum, self.min_sum[ci], "cached min sum out of sync");
        debug_assert_eq!(max_sum, self.max_sum[ci], "cached max sum out of sync");
    }

    fn prop_linear_le(
        &mut self,
        ci: usize,
        terms: &[(i64, VarId)],
        rhs: i64,
    ) -> std::result::Result<(), Conflict> {
        #[cfg(debug_assertions)]
        self.check_cached_sums(ci, terms);
        let min_sum = self.min_sum[ci];
        if min_sum > rhs {
            return Err(Conflict);
        }
        // over 0..1 variables no term can move the sum by more than its
        // coefficient; when the slack covers that, nothing can be pruned
        let slack = rhs - min_sum;
        if self.bool_only[ci] && slack >= self.max_coeff[ci] {
            return Ok(());
        }
        for &(a, v) in terms {
            if a > 0 {
                let contrib = a * self.lb[v.idx()];
                let allowed = rhs - (self.min_sum[ci] - contrib);
                let new_ub = allowed.div_euclid(a);
                if new_ub < self.ub[v.idx()] {
                    self.set_ub(v, new_ub)?;
                }
            } else {
                let contrib = a * self.ub[v.idx()];
                let allowed = rhs - (self.min_sum[ci] - contrib);
                // a*x <= allowed with a < 0  =>  x >= ceil(allowed / a)
                let new_lb = div_ceil(allowed, a);
                if new_lb > self.lb[v.idx()] {
                    self.set_lb(v, new_lb)?;
                }
            }
        }
        Ok(())
    }

    fn prop_linear_ge(
        &mut self,
        ci: usize,
        terms: &[(i64, VarId)],
        rhs: i64,
    ) -> std::result::Result<(), Conflict> {
        #[cfg(debug_assertions)]
        self.check_cached_sums(ci, terms);
        let max_sum = self.max_sum[ci];
        if max_sum < rhs {
            return Err(Conflict);
        }
        let slack = max_sum - rhs;
        if self.bool_only[ci] && slack >= self.max_coeff[ci] {
            return Ok(());
        }
        for &(a, v) in terms {
            if a > 0 {
                let contrib = a * self.ub[v.idx()];
                let gap = rhs - (self.max_sum[ci] - contrib);
                // a*x >= gap  =>  x >= ceil(gap / a)
                let new_lb = div_ceil(gap, a);
                if new_lb > self.lb[v.idx()] {
                    self.set_lb(v, new_lb)?;
                }
            } else {
                let contrib = a * self.lb[v.idx()];
                let gap = rhs - (self.max_sum[ci] - contrib);
                // a*x >= gap with a < 0  =>  x <= floor(gap / a)
                let new_ub = div_floor(gap, a);
                if new_ub < self.ub[v.idx()] {
                    self.set_ub(v, new_ub)?;
                }
            }
        }
        Ok(())
    }


    fn prop_channel(
        &mut self,
        x: VarId,
        first: i64,
        flags: &[VarId],
    ) -> std::result::Result<(), Conflict> {
        if self.fixed(x.idx()) {
            let val = self.lb[x.idx()];
            for (j, f) in flags.iter().enumerate() {
                let want = if first + j as i64 == val { 1 } else { 0 };
                self.assign(*f, want)?;
            }
            return Ok(());
        }
        // zero flags outside the current bounds
        for (j, f) in flags.iter().enumerate() {
            let val = first + j as i64;
            if val < self.lb[x.idx()] || val > self.ub[x.idx()] {
                self.assign(*f, 0)?;
            }
        }
        // a set flag pins the variable
        for (j, f) in flags.iter().enumerate() {
            if self.lb[f.idx()] == 1 {
                self.assign(x, first + j as i64)?;
                return self.prop_channel(x, first, flags);
            }
        }
        // walk bounds past flags fixed to 0
        loop {
            let j = (self.lb[x.idx()] - first) as usize;
            if self.ub[flags[j].idx()] == 0 {
                self.set_lb(x, self.lb[x.idx()] + 1)?;
            } else {
                break;
            }
        }
        loop {
            let j = (self.ub[x.idx()] - first) as usize;
            if self.ub[flags[j].idx()] == 0 {
                self.set_ub(x, self.ub[x.idx()] - 1)?;
            } else {
                break;
            }
        }
        // if a single candidate value remains, pin it
        let lo = (self.lb[x.idx()] - first) as usize;
        let hi = (self.ub[x.idx()] - first) as usize;
        let mut candidates = 0;
        let mut last = lo;
        for j in lo..=hi {
            if self.ub[flags[j].idx()] != 0 {
                candidates += 1;
                last = j;
            }
        }
        match candidates {
            0 => Err(Conflict),
            1 => {
                self.assign(x, first + last as i64)?;
                self.prop_channel(x, first, flags)
            }
            _ => Ok(()),
        }
    }

    fn prop_exactly_one(&mut self, flags: &[VarId]) -> std::result::Result<(), Conflict> {
        let mut ones = 0;
        let mut unfixed = 0;
        let mut last_unfixed = None;
        for f in flags {
            if self.lb[f.idx()] == 1 {
                ones += 1;
            } else if self.ub[f.idx()] != 0 {
                unfixed += 1;
                last_unfixed = Some(*f);
            }
        }
        if ones > 1 {
            return Err(Conflict);
        }
        if ones == 1 {
            if unfixed > 0 {
                for f in flags {
                    if self.lb[f.idx()] == 0 && self.ub[f.idx()] == 1 {
                        self.assign(*f, 0)?;
                    }
                }
            }
            return Ok(());
        }
        match unfixed {
            0 => Err(Conflict),
            1 => self.assign(last_unfixed.unwrap(), 1),
            _ => Ok(()),
        }
    }

    /// Smallest current domain among unfixed search variables, ties by
    /// variable index (declaration order of the search list).
    fn pick_branch_var(&self) -> Option<VarId> {
        let mut best: Option<(i64, VarId)> = None;
        for &v in &self.csp.search {
            let size = self.ub[v.idx()] - self.lb[v.idx()];
            if size == 0 {
                continue;
            }
            match best {
                Some((s, bv)) if (size, v.0) >= (s, bv.0) => {}
                _ => best = Some((size, v)),
            }
        }
        if let Some((_, v)) = best {
            return Some(v);
        }
        // fallback: any unfixed auxiliary (encodings normally fix these by
        // propagation once all decisions are made)
        (0..self.lb.len())
            .find(|&v| !self.fixed(v))
            .map(|v| VarId(v as u32))
    }
}

#[inline]
fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

#[inline]
fn div_ceil(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

struct Frame {
    var: VarId,
    next: i64,
    max: i64,
}

enum Walk {
    Sat(Vec<i64>),
    Unsat,
    Capped,
}

fn search<F>(state: &mut State<'_>, cap: u64, nodes: &mut u64, max_depth: &mut u32, mut on_sat: F) -> Walk
where
    F: FnMut(&[i64]) -> bool, // return true to keep searching (enumeration)
{
    state.enqueue_all();
    if state.propagate().is_err() {
        return Walk::Unsat;
    }
    let mut frames: Vec<Frame> = Vec::new();
    match state.pick_branch_var() {
        None => {
            debug_assert!(state.csp.assignment_satisfies(&state.lb));
            if on_sat(&state.lb) {
                return Walk::Unsat; // nothing left to branch on
            }
            return Walk::Sat(state.lb.clone());
        }
        Some(v) => {
            state.push_level();
            frames.push(Frame { var: v, next: state.lb[v.idx()], max: state.ub[v.idx()] });
        }
    }

    loop {
        let exhausted = {
            let f = frames.last().expect("frame stack underflow");
            f.next > f.max
        };
        if exhausted {
            state.pop_level();
            frames.pop();
            match frames.last_mut() {
                None => return Walk::Unsat,
                Some(parent) => {
                    state.undo_level();
                    parent.next += 1;
                    continue;
                }
            }
        }
        *nodes += 1;
        *max_depth = (*max_depth).max(frames.len() as u32);
        if *nodes >= cap {
            return Walk::Capped;
        }
        let (var, val) = {
            let f = frames.last().unwrap();
            (f.var, f.next)
        };
        state.undo_level();
        let ok = state.assign(var, val).is_ok() && state.propagate().is_ok();
        if !ok {
            frames.last_mut().unwrap().next += 1;
            continue;
        }
        match state.pick_branch_var() {
            None => {
                debug_assert!(state.csp.assignment_satisfies(&state.lb));
                if on_sat(&state.lb) {
                    frames.last_mut().unwrap().next += 1;
                    continue;
                }
                return Walk::Sat(state.lb.clone());
            }
            Some(v) => {
                state.push_level();
                frames.push(Frame { var: v, next: state.lb[v.idx()], max: state.ub[v.idx()] });
            }
        }
    }
}

/// Solve to the first solution (or exhaustive refutation) within budget.
pub fn solve(csp: &Csp, budget: &SolveBudget) -> Result<SolveOutcome> {
    csp.check_well_formed()?;
    let start = Instant::now();
    let cap = budget.effective_cap();
    let mut state = State::new(csp);
    let mut nodes = 0u64;
    let mut max_depth = 0u32;
    let walk = search(&mut state, cap, &mut nodes, &mut max_depth, |_| false);
    let wall_time = start.elapsed().as_secs_f64();
    Ok(match walk {
        Walk::Sat(solution) => SolveOutcome {
            status: SolveStatus::Sat,
            cost: nodes,
            solution: Some(solution),
            wall_time,
            max_depth,
        },
        Walk::Unsat => SolveOutcome {
            status: SolveStatus::Unsat,
            cost: nodes,
            solution: None,
            wall_time,
            max_depth,
        },
        Walk::Capped => SolveOutcome {
            status: SolveStatus::Capped,
            cost: cap,
            solution: None,
            wall_time,
            max_depth,
        },
    })
}

/// Enumerate all solutions within budget. Returns the solutions, the node
/// cost, and whether the enumeration ran to completion.
pub fn enumerate_all(csp: &Csp, budget: &SolveBudget, limit: usize) -> Result<(Vec<Vec<i64>>, u64, bool)> {
    csp.check_well_formed()?;
    let cap = budget.effective_cap();
    let mut state = State::new(csp);
    let mut nodes = 0u64;
    let mut max_depth = 0u32;
    let mut solutions: Vec<Vec<i64>> = Vec::new();
    let mut truncated = false;
    let walk = search(&mut state, cap, &mut nodes, &mut max_depth, |values| {
        solutions.push(values.to_vec());
        if solutions.len() >= limit {
            truncated = true;
            false
        } else {
            true
        }
    });
    let _ = truncated;
    // hitting the requested limit still counts as finishing the job;
    // only a budget cap leaves the enumeration incomplete
    let complete = !matches!(walk, Walk::Capped);
    Ok((solutions, nodes, complete))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var_csp() -> Csp {
        // x1, x2 in 1..2, x1 < x2: unique solution (1, 2)
        let mut csp = Csp::new();
        let x1 = csp.new_named_var(1, 2, "x1".into());
        let x2 = csp.new_named_var(1, 2, "x2".into());
        csp.mark_search(x1);
        csp.mark_search(x2);
        csp.post(Constraint::Less { lhs: x1, rhs: x2 });
        csp
    }

    #[test]
    fn solves_by_propagation_alone() {
        let csp = two_var_csp();
        let out = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.status, SolveStatus::Sat);
        assert_eq!(out.solution, Some(vec![1, 2]));
        assert_eq!(out.cost, 0);
    }

    #[test]
    fn unsat_by_propagation_has_zero_cost() {
        let mut csp = Csp::new();
        let x = csp.new_named_var(1, 2, "x".into());
        csp.mark_search(x);
        csp.post(Constraint::Less { lhs: x, rhs: x });
        let out = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.status, SolveStatus::Unsat);
        assert_eq!(out.cost, 0);
    }

    #[test]
    fn capped_at_budget_boundary() {
        // 3 free variables force branching; cap 1 stops at the first node
        let mut csp = Csp::new();
        let vars: Vec<_> = (0..3).map(|i| csp.new_named_var(1, 3, format!("x{i}"))).collect();
        for v in &vars {
            csp.mark_search(*v);
        }
        // a constraint too weak to propagate: x0 + x1 + x2 <= 9
        csp.post(Constraint::Linear {
            terms: vars.iter().map(|v| (1, *v)).collect(),
            cmp: Cmp::Le,
            rhs: 9,
        });
        let out = solve(&csp, &SolveBudget::nodes(1)).unwrap();
        assert_eq!(out.status, SolveStatus::Capped);
        assert_eq!(out.cost, 1);
    }

    #[test]
    fn determinism_identical_costs() {
        let csp = two_var_csp();
        let a = solve(&csp, &SolveBudget::unlimited()).unwrap();
        let b = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.cost, b.cost);
        assert_eq!(a.solution, b.solution);
    }

    #[test]
    fn linear_eq_fixes_remaining_variable() {
        let mut csp = Csp::new();
        let x = csp.new_named_var(0, 10, "x".into());
        let y = csp.new_named_var(3, 3, "y".into());
        csp.mark_search(x);
        csp.post(Constraint::Linear { terms: vec![(1, x), (2, y)], cmp: Cmp::Eq, rhs: 9 });
        let out = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.solution, Some(vec![3, 3]));
    }

    #[test]
    fn reified_eq_both_directions() {
        let mut csp = Csp::new();
        let x = csp.new_named_var(1, 5, "x".into());
        let b = csp.new_bool("b".into());
        csp.mark_search(x);
        csp.post(Constraint::ReifiedEq { flag: b, var: x, value: 3 });
        csp.post(Constraint::Linear { terms: vec![(1, b)], cmp: Cmp::Eq, rhs: 1 });
        let out = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.solution, Some(vec![3, 1]));

        let mut csp = Csp::new();
        let x = csp.new_named_var(3, 3, "x".into());
        let b = csp.new_bool("b".into());
        csp.mark_search(x);
        csp.post(Constraint::ReifiedEq { flag: b, var: x, value: 3 });
        let out = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.solution, Some(vec![3, 1]));
    }

    #[test]
    fn exactly_one_forces_last_candidate() {
        let mut csp = Csp::new();
        let flags: Vec<_> = (0..3).map(|i| csp.new_bool(format!("b{i}"))).collect();
        csp.post(Constraint::ExactlyOne { flags: flags.clone() });
        csp.post(Constraint::Linear { terms: vec![(1, flags[0])], cmp: Cmp::Eq, rhs: 0 });
        csp.post(Constraint::Linear { terms: vec![(1, flags[1])], cmp: Cmp::Eq, rhs: 0 });
        let out = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.solution, Some(vec![0, 0, 1]));
    }

    #[test]
    fn channel_links_flags_and_variable() {
        let mut csp = Csp::new();
        let x = csp.new_named_var(1, 3, "x".into());
        let flags: Vec<_> = (1..=3).map(|p| csp.new_bool(format!("f{p}"))).collect();
        csp.mark_search(x);
        csp.post(Constraint::Channel { var: x, first_value: 1, flags: flags.clone() });
        csp.post(Constraint::Linear { terms: vec![(1, flags[1])], cmp: Cmp::Eq, rhs: 1 });
        let out = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.solution, Some(vec![2, 0, 1, 0]));
    }

    #[test]
    fn channel_interior_zero_prunes_via_candidate_count() {
        let mut csp = Csp::new();
        let x = csp.new_named_var(1, 3, "x".into());
        let flags: Vec<_> = (1..=3).map(|p| csp.new_bool(format!("f{p}"))).collect();
        csp.mark_search(x);
        csp.post(Constraint::Channel { var: x, first_value: 1, flags: flags.clone() });
        // zero the outer candidates: the interior one must be pinned
        csp.post(Constraint::Linear { terms: vec![(1, flags[0])], cmp: Cmp::Eq, rhs: 0 });
        csp.post(Constraint::Linear { terms: vec![(1, flags[2])], cmp: Cmp::Eq, rhs: 0 });
        let out = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.solution, Some(vec![2, 0, 1, 0]));
    }

    #[test]
    fn enumerate_counts_assignments() {
        // x1, x2 in 1..2 with x1 + x2 <= 4: all four assignments
        let mut csp = Csp::new();
        let x1 = csp.new_named_var(1, 2, "x1".into());
        let x2 = csp.new_named_var(1, 2, "x2".into());
        csp.mark_search(x1);
        csp.mark_search(x2);
        csp.post(Constraint::Linear { terms: vec![(1, x1), (1, x2)], cmp: Cmp::Le, rhs: 4 });
        let (sols, _, complete) = enumerate_all(&csp, &SolveBudget::unlimited(), 100).unwrap();
        assert!(complete);
        assert_eq!(sols.len(), 4);
        assert_eq!(sols[0], vec![1, 1]);
        assert_eq!(sols[3], vec![2, 2]);
    }

    #[test]
    fn raising_budget_never_changes_the_solution_found() {
        let mut csp = Csp::new();
        let vars: Vec<_> = (0..4).map(|i| csp.new_named_var(1, 3, format!("x{i}"))).collect();
        for v in &vars {
            csp.mark_search(*v);
        }
        csp.post(Constraint::Linear {
            terms: vars.iter().map(|v| (1, *v)).collect(),
            cmp: Cmp::Ge,
            rhs: 9,
        });
        let full = solve(&csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(full.status, SolveStatus::Sat);
        for cap in 1..full.cost {
            let partial = solve(&csp, &SolveBudget::nodes(cap)).unwrap();
            assert_eq!(partial.status, SolveStatus::Capped);
            assert_eq!(partial.cost, cap);
        }
        let exact = solve(&csp, &SolveBudget::nodes(full.cost + 1)).unwrap();
        assert_eq!(exact.status, SolveStatus::Sat);
        assert_eq!(exact.solution, full.solution);
    }

    #[test]
    fn malformed_csp_is_reported() {
        let mut csp = Csp::new();
        let x = csp.new_named_var(1, 2, "x".into());
        csp.post(Constraint::Less { lhs: x, rhs: VarId(99) });
        assert!(solve(&csp, &SolveBudget::unlimited()).is_err());
    }
}
