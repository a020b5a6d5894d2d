//! Compilation of (instance, streamliner set, recipe) into a kernel CSP.
//!
//! Channelled recipes declare the boolean view before the primary
//! representation, so smallest-domain branching explores the boolean grid
//! first; this is the concrete realisation of the channelling toggle as a
//! search-order choice in addition to a propagation choice.

use serde::{Deserialize, Serialize};

use super::{ConstraintSide, HeuristicName, ModelRecipe, Representation};
use crate::bacp::{BacpInstance, BacpSolution};
use crate::error::{Error, Result};
use crate::kernel::{Cmp, Constraint, Csp, VarId};
use crate::streamliner::{
    streamliner_semantics, SemanticConstraint, Streamliner, StreamlinerSet, ValuePredicate,
};

/// Where a compiled model came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub instance_id: String,
    pub streamliner_set: String,
    pub heuristic: HeuristicName,
}

/// How to read a course -> period assignment back out of a kernel solution.
#[derive(Debug, Clone)]
enum DecodePlan {
    /// Per-course integer variables.
    Ints(Vec<VarId>),
    /// Per-course boolean rows over the periods.
    BoolRows(Vec<Vec<VarId>>),
    /// Pair-list slots: course `fst[i]` maps to period `snd[i]`.
    Slots { fst: Vec<VarId>, snd: Vec<VarId> },
}

/// A kernel CSP plus provenance and the decision-reconstruction plan.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    pub csp: Csp,
    pub provenance: Provenance,
    decode_plan: DecodePlan,
    n_courses: u32,
}

impl CompiledModel {
    /// Reconstruct the total course -> period mapping from a satisfying
    /// kernel assignment.
    pub fn decode(&self, values: &[i64]) -> BacpSolution {
        let c = self.n_courses as usize;
        let mut assignment = vec![0u32; c];
        match &self.decode_plan {
            DecodePlan::Ints(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    assignment[i] = values[x.idx()] as u32;
                }
            }
            DecodePlan::BoolRows(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    for (j, cell) in row.iter().enumerate() {
                        if values[cell.idx()] == 1 {
                            assignment[i] = j as u32 + 1;
                        }
                    }
                }
            }
            DecodePlan::Slots { fst, snd } => {
                for (f, s) in fst.iter().zip(snd) {
                    let course = values[f.idx()] as usize;
                    assignment[course - 1] = values[s.idx()] as u32;
                }
            }
        }
        BacpSolution::new(assignment)
    }

    /// Human-readable constraint listing for golden-file tests.
    pub fn listing(&self) -> String {
        self.csp.listing()
    }
}

/// Period values in `1..=n` admitted by a value predicate.
fn admitted_periods(predicate: ValuePredicate, n_periods: u32) -> Vec<u32> {
    (1..=n_periods).filter(|&p| predicate.admits(p, n_periods)).collect()
}

struct Encoder<'a> {
    csp: Csp,
    inst: &'a BacpInstance,
    /// Per-course integer view of the assigned period, if materialised.
    int_view: Vec<Option<VarId>>,
    /// Per-course, per-period 0..1 cells used by counting constraints.
    cells: Vec<Vec<VarId>>,
    /// Occurrence flags per period, built on demand for range rules.
    occ: Option<Vec<VarId>>,
    /// Derived period-index integers are linked to these boolean rows.
    derived_rows: Option<Vec<Vec<VarId>>>,
}

impl<'a> Encoder<'a> {
    fn course_range(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.inst.n_courses
    }

    /// Integer view of course `c`'s period, deriving one from the boolean
    /// row when the representation has no native integer variable.
    fn int_view(&mut self, c: u32) -> VarId {
        let i = (c - 1) as usize;
        if let Some(v) = self.int_view[i] {
            return v;
        }
        let rows = self.derived_rows.as_ref().expect("no source for a derived integer view");
        let row = rows[i].clone();
        let p = self.inst.n_periods as i64;
        let y = self.csp.new_named_var(1, p, format!("y[{c}]"));
        let mut terms = vec![(1, y)];
        for (j, cell) in row.iter().enumerate() {
            terms.push((-(j as i64 + 1), *cell));
        }
        self.csp.post(Constraint::Linear { terms, cmp: Cmp::Eq, rhs: 0 });
        self.int_view[i] = Some(y);
        y
    }

    fn cell(&self, c: u32, p: u32) -> VarId {
        self.cells[(c - 1) as usize][(p - 1) as usize]
    }

    /// Occurrence flag per period: occ[p] = 1 iff some course maps to p.
    fn occ_flags(&mut self) -> Vec<VarId> {
        if let Some(occ) = &self.occ {
            return occ.clone();
        }
        let c_count = self.inst.n_courses as i64;
        let mut occ = Vec::new();
        for p in 1..=self.inst.n_periods {
            let flag = self.csp.new_bool(format!("occ[{p}]"));
            // occ <= sum of the column, sum of the column <= C * occ
            let mut low = vec![(1, flag)];
            let mut high = Vec::new();
            for c in self.course_range() {
                low.push((-1, self.cell(c, p)));
                high.push((1, self.cell(c, p)));
            }
            high.push((-c_count, flag));
            self.csp.post(Constraint::Linear { terms: low, cmp: Cmp::Le, rhs: 0 });
            self.csp.post(Constraint::Linear { terms: high, cmp: Cmp::Le, rhs: 0 });
            occ.push(flag);
        }
        self.occ = Some(occ.clone());
        occ
    }

    fn post_prerequisites(&mut self) {
        for &(c1, c2) in &self.inst.prerequisite.clone() {
            let a = self.int_view(c1);
            let b = self.int_view(c2);
            self.csp.post(Constraint::Less { lhs: a, rhs: b });
        }
    }

    fn post_load_and_cardinality(&mut self) {
        let inst = self.inst;
        for p in 1..=inst.n_periods {
            let load_terms: Vec<(i64, VarId)> = self
                .course_range()
                .map(|c| (inst.load_of(c) as i64, self.cell(c, p)))
                .collect();
            self.csp.post(Constraint::Linear {
                terms: load_terms.clone(),
                cmp: Cmp::Le,
                rhs: inst.load_per_period_ub as i64,
            });
            self.csp.post(Constraint::Linear {
                terms: load_terms,
                cmp: Cmp::Ge,
                rhs: inst.load_per_period_lb as i64,
            });
            let card_terms: Vec<(i64, VarId)> =
                self.course_range().map(|c| (1, self.cell(c, p))).collect();
            self.csp.post(Constraint::Linear {
                terms: card_terms.clone(),
                cmp: Cmp::Le,
                rhs: inst.courses_per_period_ub as i64,
            });
            self.csp.post(Constraint::Linear {
                terms: card_terms,
                cmp: Cmp::Ge,
                rhs: inst.courses_per_period_lb as i64,
            });
        }
    }

    fn post_streamliner(&mut self, semantic: &SemanticConstraint) {
        let n_periods = self.inst.n_periods;
        match *semantic {
            SemanticConstraint::MonotoneNonDecreasing => {
                for c in 1..self.inst.n_courses {
                    let a = self.int_view(c);
                    let b = self.int_view(c + 1);
                    self.csp.post(Constraint::Linear {
                        terms: vec![(1, a), (-1, b)],
                        cmp: Cmp::Le,
                        rhs: 0,
                    });
                }
            }
            SemanticConstraint::MonotoneNonIncreasing => {
                for c in 1..self.inst.n_courses {
                    let a = self.int_view(c);
                    let b = self.int_view(c + 1);
                    self.csp.post(Constraint::Linear {
                        terms: vec![(-1, a), (1, b)],
                        cmp: Cmp::Le,
                        rhs: 0,
                    });
                }
            }
            SemanticConstraint::Extremal { at_last, maximum } => {
                let pos = if at_last { self.inst.n_courses } else { 1 };
                let pivot = self.int_view(pos);
                for c in self.course_range() {
                    if c == pos {
                        continue;
                    }
                    let v = self.int_view(c);
                    let terms = if maximum {
                        vec![(1, v), (-1, pivot)]
                    } else {
                        vec![(1, pivot), (-1, v)]
                    };
                    self.csp.post(Constraint::Linear { terms, cmp: Cmp::Le, rhs: 0 });
                }
            }
            SemanticConstraint::CourseCount { span, predicate, lo, hi } => {
                let courses: Vec<u32> = span.courses(self.inst.n_courses).collect();
                let m = courses.len() as u32;
                if lo == m && hi == m {
                    // universal: exclude the complementary periods pointwise
                    for &c in &courses {
                        for p in 1..=n_periods {
                            if !predicate.admits(p, n_periods) {
                                let cell = self.cell(c, p);
                                self.csp.post(Constraint::Linear {
                                    terms: vec![(1, cell)],
                                    cmp: Cmp::Eq,
                                    rhs: 0,
                                });
                            }
                        }
                    }
                    return;
                }
                let terms: Vec<(i64, VarId)> = courses
                    .iter()
                    .flat_map(|&c| {
                        admitted_periods(predicate, n_periods)
                            .into_iter()
                            .map(move |p| (c, p))
                    })
                    .map(|(c, p)| (1, self.cell(c, p)))
                    .collect();
                if lo == hi {
                    self.csp.post(Constraint::Linear { terms, cmp: Cmp::Eq, rhs: lo as i64 });
                } else {
                    if lo > 0 {
                        self.csp.post(Constraint::Linear {
                            terms: terms.clone(),
                            cmp: Cmp::Ge,
                            rhs: lo as i64,
                        });
                    }
                    if hi < m {
                        self.csp.post(Constraint::Linear { terms, cmp: Cmp::Le, rhs: hi as i64 });
                    }
                }
            }
            SemanticConstraint::RangeCount { predicate, mode } => {
                let occ = self.occ_flags();
                match mode {
                    crate::streamliner::RangeMode::All => {
                        for p in 1..=n_periods {
                            if !predicate.admits(p, n_periods) {
                                self.csp.post(Constraint::Linear {
                                    terms: vec![(1, occ[(p - 1) as usize])],
                                    cmp: Cmp::Eq,
                                    rhs: 0,
                                });
                            }
                        }
                    }
                    crate::streamliner::RangeMode::Half => {
                        // exactly floor(m/2) of the m attained periods are
                        // admitted: sum(adm) - sum(rest) <= 0 and
                        // sum(rest) - sum(adm) <= 1
                        let signed = |sign: i64| -> Vec<(i64, VarId)> {
                            (1..=n_periods)
                                .map(|p| {
                                    let s = if predicate.admits(p, n_periods) { sign } else { -sign };
                                    (s, occ[(p - 1) as usize])
                                })
                                .collect()
                        };
                        self.csp.post(Constraint::Linear { terms: signed(1), cmp: Cmp::Le, rhs: 0 });
                        self.csp.post(Constraint::Linear { terms: signed(-1), cmp: Cmp::Le, rhs: 1 });
                    }
                }
            }
            SemanticConstraint::Constant(true) => {}
            SemanticConstraint::Constant(false) => {
                // an unconditionally false constraint
                self.csp.post(Constraint::Linear { terms: vec![], cmp: Cmp::Le, rhs: -1 });
            }
        }
    }
}

/// Declare a course-major boolean grid; every cell becomes a search
/// variable when `search` is set.
fn declare_grid(csp: &mut Csp, inst: &BacpInstance, name: &str, search: bool) -> Vec<Vec<VarId>> {
    (1..=inst.n_courses)
        .map(|c| {
            (1..=inst.n_periods)
                .map(|p| {
                    let v = csp.new_bool(format!("{name}[{c},{p}]"));
                    if search {
                        csp.mark_search(v);
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Reify `cell[c][p] <=> source[c] = p` over a fresh grid.
fn reify_grid(csp: &mut Csp, inst: &BacpInstance, source: &[VarId]) -> Vec<Vec<VarId>> {
    (1..=inst.n_courses)
        .map(|c| {
            (1..=inst.n_periods)
                .map(|p| {
                    let flag = csp.new_bool(format!("ind[{c},{p}]"));
                    csp.post(Constraint::ReifiedEq {
                        flag,
                        var: source[(c - 1) as usize],
                        value: p as i64,
                    });
                    flag
                })
                .collect()
        })
        .collect()
}

/// Compile an instance, a streamliner set and a recipe into a kernel CSP.
///
/// Every streamliner in the set must exist in `candidates`. Compilation is
/// pure and deterministic; identical inputs produce identical CSPs.
pub fn compile(
    inst: &BacpInstance,
    set: &StreamlinerSet,
    recipe: &ModelRecipe,
    candidates: &[Streamliner],
) -> Result<CompiledModel> {
    let chosen: Vec<&Streamliner> = set
        .ids()
        .map(|id| {
            candidates
                .iter()
                .find(|s| s.id == id)
                .ok_or_else(|| Error::Validation(format!("streamliner id {id} not generated")))
        })
        .collect::<Result<Vec<_>>>()?;
    let semantics: Vec<SemanticConstraint> = chosen
        .iter()
        .map(|s| streamliner_semantics(s, inst))
        .collect::<Result<Vec<_>>>()?;

    let mut csp = Csp::new();
    let c_count = inst.n_courses;
    let p_count = inst.n_periods as i64;

    // channelled boolean view first, so it leads the search order
    let channel_grid = if recipe.channelling {
        Some(declare_grid(&mut csp, inst, "b", true))
    } else {
        None
    };

    let (int_view, cells, decode_plan, derived_rows): (
        Vec<Option<VarId>>,
        Vec<Vec<VarId>>,
        DecodePlan,
        Option<Vec<Vec<VarId>>>,
    );
    match recipe.primary {
        Representation::IntArray => {
            let xs: Vec<VarId> = (1..=c_count)
                .map(|c| {
                    let v = csp.new_named_var(1, p_count, format!("x[{c}]"));
                    csp.mark_search(v);
                    v
                })
                .collect();
            if let Some(grid) = &channel_grid {
                for (c, row) in grid.iter().enumerate() {
                    csp.post(Constraint::Channel {
                        var: xs[c],
                        first_value: 1,
                        flags: row.clone(),
                    });
                }
            }
            let use_channel_cells =
                recipe.channelling && recipe.side == ConstraintSide::ChannelledBest;
            let grid = if use_channel_cells {
                channel_grid.clone().expect("channelled recipe has a grid")
            } else {
                reify_grid(&mut csp, inst, &xs)
            };
            int_view = xs.iter().map(|v| Some(*v)).collect();
            cells = grid;
            decode_plan = DecodePlan::Ints(xs);
            derived_rows = None;
        }
        Representation::BoolMatrix => {
            let grid = declare_grid(&mut csp, inst, "m", true);
            if recipe.channelling {
                let xs: Vec<VarId> = (1..=c_count)
                    .map(|c| {
                        let v = csp.new_named_var(1, p_count, format!("x[{c}]"));
                        csp.mark_search(v);
                        v
                    })
                    .collect();
                for (c, row) in grid.iter().enumerate() {
                    csp.post(Constraint::Channel {
                        var: xs[c],
                        first_value: 1,
                        flags: row.clone(),
                    });
                }
                int_view = xs.into_iter().map(Some).collect();
                derived_rows = None;
            } else {
                for row in &grid {
                    csp.post(Constraint::ExactlyOne { flags: row.clone() });
                }
                int_view = vec![None; c_count as usize];
                derived_rows = Some(grid.clone());
            }
            cells = grid.clone();
            decode_plan = DecodePlan::BoolRows(grid);
        }
        Representation::MarkerRelation | Representation::FlagRelation => {
            let mut fst = Vec::new();
            let mut snd = Vec::new();
            for i in 1..=c_count {
                let f = csp.new_named_var(1, c_count as i64, format!("fst[{i}]"));
                csp.mark_search(f);
                let s = csp.new_named_var(1, p_count, format!("snd[{i}]"));
                csp.mark_search(s);
                fst.push(f);
                snd.push(s);
            }
            // slots strictly ordered by course: functionality plus a
            // canonical slot assignment (propagation pins fst[i] = i)
            for w in fst.windows(2) {
                csp.post(Constraint::Less { lhs: w[0], rhs: w[1] });
            }
            match recipe.primary {
                Representation::MarkerRelation => {
                    let marker =
                        csp.new_named_var(c_count as i64, c_count as i64, "marker".into());
                    csp.mark_search(marker);
                    // totality: the marker counts all slots
                    csp.post(Constraint::Linear {
                        terms: vec![(1, marker)],
                        cmp: Cmp::Eq,
                        rhs: c_count as i64,
                    });
                }
                Representation::FlagRelation => {
                    let flags: Vec<VarId> = (1..=c_count)
                        .map(|i| {
                            let v = csp.new_bool(format!("flag[{i}]"));
                            csp.mark_search(v);
                            v
                        })
                        .collect();
                    // totality: every slot is active
                    csp.post(Constraint::Linear {
                        terms: flags.iter().map(|f| (1, *f)).collect(),
                        cmp: Cmp::Eq,
                        rhs: c_count as i64,
                    });
                }
                _ => unreachable!(),
            }
            if let Some(grid) = &channel_grid {
                for (i, row) in grid.iter().enumerate() {
                    csp.post(Constraint::Channel {
                        var: snd[i],
                        first_value: 1,
                        flags: row.clone(),
                    });
                }
            }
            let use_channel_cells =
                recipe.channelling && recipe.side == ConstraintSide::ChannelledBest;
            let grid = if use_channel_cells {
                channel_grid.clone().expect("channelled recipe has a grid")
            } else {
                reify_grid(&mut csp, inst, &snd)
            };
            int_view = snd.iter().map(|v| Some(*v)).collect();
            cells = grid;
            decode_plan = DecodePlan::Slots { fst, snd };
            derived_rows = None;
        }
    }

    let mut encoder = Encoder { csp, inst, int_view, cells, occ: None, derived_rows };
    encoder.post_prerequisites();
    encoder.post_load_and_cardinality();
    for semantic in &semantics {
        encoder.post_streamliner(semantic);
    }

    encoder.csp.check_well_formed()?;
    Ok(CompiledModel {
        csp: encoder.csp,
        provenance: Provenance {
            instance_id: inst.id.clone(),
            streamliner_set: set.key(),
            heuristic: recipe.heuristic,
        },
        decode_plan,
        n_courses: c_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use crate::bacp::{enumerate_solutions, BacpClass};
    use crate::kernel::{enumerate_all, solve, SolveBudget, SolveStatus};
    use crate::model::{portfolio, RANKED_TABLE};
    use crate::streamliner::{generate_candidates, satisfies, CandidateConfig};

    fn tiny() -> BacpInstance {
        BacpInstance::new(2, 2, 1, 1, 1, 1, vec![(1, 2)], vec![1, 1], 0).unwrap()
    }

    fn candidates() -> Vec<Streamliner> {
        generate_candidates(&BacpClass, &CandidateConfig::default())
    }

    fn find_id(cands: &[Streamliner], description: &str) -> u32 {
        cands
            .iter()
            .find(|s| s.description == description)
            .unwrap_or_else(|| panic!("no candidate '{description}'"))
            .id
    }

    /// Decoded kernel solution set for one compiled model.
    fn kernel_solutions(model: &CompiledModel) -> BTreeSet<Vec<u32>> {
        let (sols, _, complete) =
            enumerate_all(&model.csp, &SolveBudget::unlimited(), 100_000).unwrap();
        assert!(complete);
        sols.iter().map(|s| model.decode(s).assignment).collect()
    }

    #[test]
    fn compact_tiny_finds_the_oracle_solution() {
        let inst = tiny();
        let model =
            compile(&inst, &StreamlinerSet::empty(), &RANKED_TABLE[0], &candidates()).unwrap();
        let out = solve(&model.csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.status, SolveStatus::Sat);
        let decoded = model.decode(&out.solution.unwrap());
        assert_eq!(decoded.assignment, vec![1, 2]);
    }

    #[test]
    fn all_even_with_two_periods_is_unsat_by_propagation() {
        let inst = tiny();
        let cands = candidates();
        let id = find_id(&cands, "all of the courses map to even periods");
        let model =
            compile(&inst, &StreamlinerSet::from_ids([id]), &RANKED_TABLE[0], &cands).unwrap();
        let out = solve(&model.csp, &SolveBudget::unlimited()).unwrap();
        assert_eq!(out.status, SolveStatus::Unsat);
        assert_eq!(out.cost, 0);
    }

    #[test]
    fn explicit_bool_matches_compact_solution_set() {
        let inst = BacpInstance::new(3, 2, 0, 10, 0, 3, vec![(1, 3)], vec![2, 1, 2], 0).unwrap();
        let cands = candidates();
        let compact =
            compile(&inst, &StreamlinerSet::empty(), &RANKED_TABLE[0], &cands).unwrap();
        let explicit =
            compile(&inst, &StreamlinerSet::empty(), &RANKED_TABLE[3], &cands).unwrap();
        assert_eq!(kernel_solutions(&compact), kernel_solutions(&explicit));
    }

    #[test]
    fn every_recipe_agrees_with_the_brute_force_oracle() {
        let inst = BacpInstance::new(3, 3, 0, 5, 0, 2, vec![(1, 2)], vec![2, 1, 1], 0).unwrap();
        let cands = candidates();
        let sets = [
            StreamlinerSet::empty(),
            StreamlinerSet::from_ids([find_id(&cands, "curr is monotonically increasing")]),
            StreamlinerSet::from_ids([find_id(&cands, "half of the courses map to even periods")]),
            StreamlinerSet::from_ids([find_id(&cands, "half of the range values of curr are even")]),
            StreamlinerSet::from_ids([
                find_id(&cands, "curr is monotonically increasing"),
                find_id(&cands, "all of the courses map to lower-half periods"),
            ]),
        ];
        let base = enumerate_solutions(&inst, 100_000).unwrap();
        for set in &sets {
            let chosen: Vec<&Streamliner> =
                set.ids().map(|id| cands.iter().find(|s| s.id == id).unwrap()).collect();
            let expected: BTreeSet<Vec<u32>> = base
                .iter()
                .filter(|sol| chosen.iter().all(|s| satisfies(s, &inst, sol).unwrap()))
                .map(|sol| sol.assignment.clone())
                .collect();
            for recipe in portfolio(8).unwrap() {
                let model = compile(&inst, set, &recipe, &cands).unwrap();
                assert_eq!(
                    kernel_solutions(&model),
                    expected,
                    "recipe {} disagrees on set {}",
                    recipe.heuristic,
                    set.key()
                );
            }
        }
    }

    #[test]
    fn compile_is_deterministic() {
        let inst = tiny();
        let cands = candidates();
        let set = StreamlinerSet::from_ids([1, 7]);
        let a = compile(&inst, &set, &RANKED_TABLE[2], &cands).unwrap();
        let b = compile(&inst, &set, &RANKED_TABLE[2], &cands).unwrap();
        assert_eq!(a.listing(), b.listing());
    }

    #[test]
    fn unknown_streamliner_id_is_rejected() {
        let inst = tiny();
        assert!(compile(&inst, &StreamlinerSet::from_ids([999]), &RANKED_TABLE[0], &candidates())
            .is_err());
    }

    #[test]
    fn compact_listing_golden() {
        let inst = tiny();
        let model =
            compile(&inst, &StreamlinerSet::empty(), &RANKED_TABLE[0], &candidates()).unwrap();
        let expected = "\
var x[1] in 1..2 search
var x[2] in 1..2 search
var ind[1,1] in 0..1
var ind[1,2] in 0..1
var ind[2,1] in 0..1
var ind[2,2] in 0..1
reified: ind[1,1] <=> x[1] = 1
reified: ind[1,2] <=> x[1] = 2
reified: ind[2,1] <=> x[2] = 1
reified: ind[2,2] <=> x[2] = 2
less: x[1] < x[2]
linear: ind[1,1] + ind[2,1] <= 1
linear: ind[1,1] + ind[2,1] >= 1
linear: ind[1,1] + ind[2,1] <= 1
linear: ind[1,1] + ind[2,1] >= 1
linear: ind[1,2] + ind[2,2] <= 1
linear: ind[1,2] + ind[2,2] >= 1
linear: ind[1,2] + ind[2,2] <= 1
linear: ind[1,2] + ind[2,2] >= 1
";
        assert_eq!(model.listing(), expected);
    }

    #[test]
    fn channelled_recipes_search_the_boolean_grid_first() {
        let inst = tiny();
        let model =
            compile(&inst, &StreamlinerSet::empty(), &RANKED_TABLE[1], &candidates()).unwrap();
        let listing = model.listing();
        let b_pos = listing.find("var b[1,1]").unwrap();
        let x_pos = listing.find("var x[1]").unwrap();
        assert!(b_pos < x_pos);
    }
}
