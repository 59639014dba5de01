//! Relaxed master problem: minimize `θ = max(0, max_k cut_k(y))` over the
//! feasible binaries.
//!
//! `θ` is the only continuous variable and every cut is affine in `y`, so a
//! depth-first search over `y` in index order with the bound
//! `max(0, max_k a₀ + Σ_fixed aₑyₑ + Σ_free min(aₑ, 0))` is exact without an
//! LP relaxation. Rows are pruned by their smallest and largest reachable
//! left-hand side over the unfixed variables.

use crate::cuts::{eval_cut, Cut};
use crate::error::{Error, Result};
use crate::instance::{all_selections, ConstraintSet, Row, Selection, Sense, DEFAULT_ENUMERATION_LIMIT};

/// Below this many fragile edges the master simply enumerates.
pub const EXHAUSTIVE_MAX_Z: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterResult {
    pub status: MasterStatus,
    pub y: Selection,
    /// `+∞` when infeasible.
    pub theta: f64,
    pub nodes_explored: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MasterStrategy {
    /// Enumerate up to [`EXHAUSTIVE_MAX_Z`], branch and bound above.
    #[default]
    Auto,
    BranchAndBound,
    Exhaustive,
}

/// `max(0, max_k cut_k(y))`.
pub fn master_objective(cuts: &[Cut], y: &Selection) -> Result<f64> {
    cuts.iter()
        .try_fold(0.0_f64, |acc, c| Ok(acc.max(eval_cut(c, y)?)))
}

/// Global minimizer; ties go to the lexicographically smallest `y`.
pub fn solve_master(cuts: &[Cut], constraints: &ConstraintSet, z_count: usize) -> Result<MasterResult> {
    solve_master_with(cuts, constraints, z_count, MasterStrategy::Auto)
}

pub fn solve_master_with(
    cuts: &[Cut],
    constraints: &ConstraintSet,
    z_count: usize,
    strategy: MasterStrategy,
) -> Result<MasterResult> {
    for cut in cuts {
        if cut.coeffs.len() != z_count {
            return Err(Error::DimensionMismatch {
                expected: z_count,
                actual: cut.coeffs.len(),
            });
        }
    }
    constraints.check_dims(z_count)?;
    let exhaustive = match strategy {
        MasterStrategy::Auto => z_count <= EXHAUSTIVE_MAX_Z,
        MasterStrategy::Exhaustive => true,
        MasterStrategy::BranchAndBound => false,
    };
    if exhaustive {
        solve_exhaustive(cuts, constraints, z_count)
    } else {
        Ok(BranchAndBound::new(cuts, constraints, z_count).run())
    }
}

/// Bound at the search root, with every variable free.
pub fn root_bound(cuts: &[Cut]) -> f64 {
    cuts.iter()
        .map(|c| c.a0 + c.coeffs.iter().map(|&a| a.min(0.0)).sum::<f64>())
        .fold(0.0, f64::max)
}

fn solve_exhaustive(cuts: &[Cut], constraints: &ConstraintSet, z_count: usize) -> Result<MasterResult> {
    if z_count > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::TooLargeToEnumerate {
            count: z_count,
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }
    let mut best: Option<(f64, Selection)> = None;
    let mut nodes = 0;
    for y in all_selections(z_count) {
        nodes += 1;
        if !constraints.is_feasible(&y)? {
            continue;
        }
        let theta = master_objective(cuts, &y)?;
        if best.as_ref().is_none_or(|(b, _)| theta < *b) {
            best = Some((theta, y));
        }
    }
    Ok(finish(best, z_count, nodes))
}

fn finish(best: Option<(f64, Selection)>, z_count: usize, nodes: usize) -> MasterResult {
    match best {
        Some((theta, y)) => MasterResult {
            status: MasterStatus::Optimal,
            y,
            theta,
            nodes_explored: nodes,
        },
        None => MasterResult {
            status: MasterStatus::Infeasible,
            y: Selection::zeros(z_count),
            theta: f64::INFINITY,
            nodes_explored: nodes,
        },
    }
}

struct BranchAndBound<'a> {
    cuts: &'a [Cut],
    rows: Vec<Row>,
    z: usize,
    /// `neg_tail[k][d] = Σ_{e≥d} min(a_ke, 0)`.
    neg_tail: Vec<Vec<f64>>,
    /// Per row, smallest / largest LHS reachable from variables `≥ d`.
    row_min_tail: Vec<Vec<i64>>,
    row_max_tail: Vec<Vec<i64>>,
    /// Partial cut values and row LHS sums per depth.
    cut_partial: Vec<Vec<f64>>,
    row_partial: Vec<Vec<i64>>,
    bits: Vec<bool>,
    best: Option<(f64, Selection)>,
    nodes: usize,
}

impl<'a> BranchAndBound<'a> {
    fn new(cuts: &'a [Cut], constraints: &ConstraintSet, z: usize) -> Self {
        let rows = constraints.compiled_rows(z);
        let tails = |f: &dyn Fn(usize) -> f64| {
            let mut t = vec![0.0; z + 1];
            for d in (0..z).rev() {
                t[d] = t[d + 1] + f(d);
            }
            t
        };
        let neg_tail = cuts
            .iter()
            .map(|c| tails(&|d| c.coeffs[d].min(0.0)))
            .collect();
        let int_tails = |row: &Row, pick: fn(i64) -> i64| {
            let mut t = vec![0i64; z + 1];
            for d in (0..z).rev() {
                t[d] = t[d + 1] + pick(row.coeffs[d]);
            }
            t
        };
        let row_min_tail = rows.iter().map(|r| int_tails(r, |a| a.min(0))).collect();
        let row_max_tail = rows.iter().map(|r| int_tails(r, |a| a.max(0))).collect();
        let mut cut_partial = vec![vec![0.0; cuts.len()]; z + 1];
        cut_partial[0] = cuts.iter().map(|c| c.a0).collect();
        BranchAndBound {
            cuts,
            row_partial: vec![vec![0; rows.len()]; z + 1],
            rows,
            z,
            neg_tail,
            row_min_tail,
            row_max_tail,
            cut_partial,
            bits: vec![false; z],
            best: None,
            nodes: 0,
        }
    }

    fn run(mut self) -> MasterResult {
        self.descend(0);
        finish(self.best, self.z, self.nodes)
    }

    fn rows_reachable(&self, d: usize) -> bool {
        self.rows.iter().enumerate().all(|(r, row)| {
            let lhs = self.row_partial[d][r];
            let lo = lhs + self.row_min_tail[r][d];
            let hi = lhs + self.row_max_tail[r][d];
            match row.sense {
                Sense::Le => lo <= row.rhs,
                Sense::Ge => hi >= row.rhs,
                Sense::Eq => lo <= row.rhs && row.rhs <= hi,
            }
        })
    }

    fn bound(&self, d: usize) -> f64 {
        self.cut_partial[d]
            .iter()
            .zip(&self.neg_tail)
            .map(|(p, tail)| p + tail[d])
            .fold(0.0, f64::max)
    }

    fn descend(&mut self, d: usize) {
        self.nodes += 1;
        if !self.rows_reachable(d) {
            return;
        }
        let bound = self.bound(d);
        // y = 0 is explored first, so an earlier incumbent is
        // lexicographically smaller and wins ties.
        if self.best.as_ref().is_some_and(|(b, _)| bound >= *b) {
            return;
        }
        if d == self.z {
            self.best = Some((bound, Selection::new(self.bits.clone())));
            return;
        }
        for on in [false, true] {
            self.bits[d] = on;
            for k in 0..self.cuts.len() {
                let base = self.cut_partial[d][k];
                self.cut_partial[d + 1][k] = if on { base + self.cuts[k].coeffs[d] } else { base };
            }
            for r in 0..self.rows.len() {
                let base = self.row_partial[d][r];
                self.row_partial[d + 1][r] = if on { base + self.rows[r].coeffs[d] } else { base };
            }
            self.descend(d + 1);
        }
        self.bits[d] = false;
    }
}
