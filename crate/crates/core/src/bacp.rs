//! The Balanced Academic Curriculum Problem as a fixed abstract problem class.
//!
//! The class asks for a total function from courses `1..=n_courses` to
//! periods `1..=n_periods` such that prerequisite courses are taught in
//! strictly earlier periods, the academic load of every period stays within
//! bounds, and the number of courses per period stays within bounds.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The abstract problem class: a fixed decision signature plus the three
/// BACP constraint families. Instances supply the concrete parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct BacpClass;

impl BacpClass {
    /// Type descriptor of the single decision variable.
    pub fn decision_signature(&self) -> &'static str {
        "total function int(1..n_courses) -> int(1..n_periods)"
    }

    /// Names of the constraint families every solution must satisfy.
    pub fn constraint_templates(&self) -> [&'static str; 3] {
        ["prerequisites", "load bounds", "cardinality bounds"]
    }
}

/// Concrete parameters of one BACP instance.
///
/// Field names follow the problem statement (`n_courses`, `n_periods`, ...),
/// and the on-disk JSON schema uses them verbatim. `course_load[c-1]` is the
/// load of course `c`; `prerequisite` holds ordered pairs `(before, after)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacpInstance {
    pub n_courses: u32,
    pub n_periods: u32,
    pub load_per_period_lb: u32,
    pub load_per_period_ub: u32,
    pub courses_per_period_lb: u32,
    pub courses_per_period_ub: u32,
    pub prerequisite: Vec<(u32, u32)>,
    pub course_load: Vec<u32>,
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub seed: u64,
}

impl BacpInstance {
    /// Build an instance, validate it, and assign its content-addressed id.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_courses: u32,
        n_periods: u32,
        load_per_period_lb: u32,
        load_per_period_ub: u32,
        courses_per_period_lb: u32,
        courses_per_period_ub: u32,
        mut prerequisite: Vec<(u32, u32)>,
        course_load: Vec<u32>,
        seed: u64,
    ) -> Result<Self> {
        prerequisite.sort_unstable();
        prerequisite.dedup();
        let mut inst = BacpInstance {
            n_courses,
            n_periods,
            load_per_period_lb,
            load_per_period_ub,
            courses_per_period_lb,
            courses_per_period_ub,
            prerequisite,
            course_load,
            id: String::new(),
            seed,
        };
        inst.validate()?;
        inst.id = inst.content_id();
        Ok(inst)
    }

    /// Check the instance invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n_courses == 0 || self.n_periods == 0 {
            return Err(Error::Validation("n_courses and n_periods must be positive".into()));
        }
        if self.load_per_period_lb > self.load_per_period_ub {
            return Err(Error::Validation("load_per_period_lb > load_per_period_ub".into()));
        }
        if self.courses_per_period_lb > self.courses_per_period_ub {
            return Err(Error::Validation(
                "courses_per_period_lb > courses_per_period_ub".into(),
            ));
        }
        if self.course_load.len() != self.n_courses as usize {
            return Err(Error::Validation(format!(
                "course_load has {} entries for {} courses",
                self.course_load.len(),
                self.n_courses
            )));
        }
        if self.course_load.iter().any(|&l| l == 0) {
            return Err(Error::Validation("course loads must be positive".into()));
        }
        for &(a, b) in &self.prerequisite {
            if a == 0 || b == 0 || a > self.n_courses || b > self.n_courses {
                return Err(Error::Validation(format!(
                    "prerequisite ({a},{b}) references a course outside 1..={}",
                    self.n_courses
                )));
            }
            if a == b {
                return Err(Error::Validation(format!("prerequisite self-loop on course {a}")));
            }
        }
        Ok(())
    }

    /// Content-addressed identifier: hash of the canonical serialisation of
    /// every field except `id` itself. Stable across runs, used as cache key
    /// and file name.
    pub fn content_id(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.n_courses.to_le_bytes());
        hasher.update(self.n_periods.to_le_bytes());
        hasher.update(self.load_per_period_lb.to_le_bytes());
        hasher.update(self.load_per_period_ub.to_le_bytes());
        hasher.update(self.courses_per_period_lb.to_le_bytes());
        hasher.update(self.courses_per_period_ub.to_le_bytes());
        let mut prereq = self.prerequisite.clone();
        prereq.sort_unstable();
        for (a, b) in prereq {
            hasher.update(a.to_le_bytes());
            hasher.update(b.to_le_bytes());
        }
        for &l in &self.course_load {
            hasher.update(l.to_le_bytes());
        }
        hasher.update(self.seed.to_le_bytes());
        hex::encode(&hasher.finalize()[..12])
    }

    /// Load of course `c` (1-based).
    pub fn load_of(&self, course: u32) -> u32 {
        self.course_load[(course - 1) as usize]
    }

    /// Total load over all courses.
    pub fn total_load(&self) -> u64 {
        self.course_load.iter().map(|&l| l as u64).sum()
    }
}

/// A candidate solution: a total mapping course -> period.
/// `assignment[c-1]` is the period of course `c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BacpSolution {
    pub assignment: Vec<u32>,
}

impl BacpSolution {
    pub fn new(assignment: Vec<u32>) -> Self {
        BacpSolution { assignment }
    }

    /// Period of course `c` (1-based).
    pub fn period_of(&self, course: u32) -> u32 {
        self.assignment[(course - 1) as usize]
    }
}

/// Check a solution against the original (unstreamlined) constraints.
///
/// Returns `Ok(false)` on a genuine constraint violation, and an error
/// (distinct from `false`) when the solution references courses or periods
/// out of range.
pub fn validate_solution(inst: &BacpInstance, sol: &BacpSolution) -> Result<bool> {
    if sol.assignment.len() != inst.n_courses as usize {
        return Err(Error::Validation(format!(
            "solution covers {} courses, instance has {}",
            sol.assignment.len(),
            inst.n_courses
        )));
    }
    if let Some(&p) = sol.assignment.iter().find(|&&p| p == 0 || p > inst.n_periods) {
        return Err(Error::Validation(format!(
            "assigned period {p} outside 1..={}",
            inst.n_periods
        )));
    }

    // (a) prerequisites: earlier course strictly earlier period
    for &(c1, c2) in &inst.prerequisite {
        if sol.period_of(c1) >= sol.period_of(c2) {
            return Ok(false);
        }
    }
    // (b) per-period load bounds, (c) per-period cardinality bounds
    for p in 1..=inst.n_periods {
        let mut load = 0u64;
        let mut count = 0u64;
        for c in 1..=inst.n_courses {
            if sol.period_of(c) == p {
                load += inst.load_of(c) as u64;
                count += 1;
            }
        }
        if load < inst.load_per_period_lb as u64 || load > inst.load_per_period_ub as u64 {
            return Ok(false);
        }
        if count < inst.courses_per_period_lb as u64 || count > inst.courses_per_period_ub as u64 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `n_courses * log2(n_periods)` accepted by [`enumerate_solutions`].
pub const ENUMERATION_GUARD_BITS: f64 = 26.0;

/// Brute-force enumeration of all solutions in lexicographic assignment
/// order, truncated at `limit`. Refuses instances whose assignment space
/// exceeds the guard.
pub fn enumerate_solutions(inst: &BacpInstance, limit: usize) -> Result<Vec<BacpSolution>> {
    let bits = inst.n_courses as f64 * (inst.n_periods as f64).log2();
    if bits > ENUMERATION_GUARD_BITS {
        return Err(Error::Guard(format!(
            "enumeration over {}^{} assignments exceeds 2^{} states",
            inst.n_periods, inst.n_courses, ENUMERATION_GUARD_BITS
        )));
    }
    let mut out = Vec::new();
    let c = inst.n_courses as usize;
    let mut assignment = vec![1u32; c];
    loop {
        let sol = BacpSolution::new(assignment.clone());
        if validate_solution(inst, &sol)? {
            out.push(sol);
            if out.len() >= limit {
                break;
            }
        }
        // lexicographic successor
        let mut i = c;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if assignment[i] < inst.n_periods {
                assignment[i] += 1;
                for a in assignment.iter_mut().skip(i + 1) {
                    *a = 1;
                }
                break;
            }
        }
    }
    Ok(out)
}
