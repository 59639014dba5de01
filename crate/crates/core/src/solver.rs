//! Exact cutting-plane loop.
//!
//! The master is first solved with an empty pool to obtain an incumbent.
//! Each iteration then separates one cut at the current incumbent, re-solves
//! the master for a new lower bound and incumbent, and evaluates the new
//! incumbent's return time as an upper-bound candidate. The loop stops once
//! `UB − LB ≤ ε`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::chain::first_return_time;
use crate::cuts::{l_shaped_cut, lifted_cut, new_cut, Cut, CutFamily, LiftOrdering, OrderingStrategy};
use crate::error::{Error, Result};
use crate::instance::{ConstraintSet, Instance, Selection};
use crate::master::{solve_master_with, MasterStatus, MasterStrategy};
use crate::oracle::min_unconstrained;

pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub family: CutFamily,
    pub ordering: OrderingStrategy,
    pub eps: f64,
    pub max_iters: usize,
    pub master: MasterStrategy,
}

impl SolveOptions {
    pub fn new(family: CutFamily) -> Self {
        SolveOptions {
            family,
            ordering: OrderingStrategy::Index,
            eps: DEFAULT_EPS,
            max_iters: DEFAULT_MAX_ITERS,
            master: MasterStrategy::Auto,
        }
    }

    pub fn with_ordering(mut self, ordering: OrderingStrategy) -> Self {
        self.ordering = ordering;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    IterLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub family: CutFamily,
    pub best_y: Selection,
    pub best_value: f64,
    /// Master optimum after each iteration.
    pub lower_bounds: Vec<f64>,
    /// Best return time seen after each iteration.
    pub upper_bounds: Vec<f64>,
    pub cuts_added: usize,
    pub gamma_calls_total: usize,
    pub iterations: usize,
    /// Incumbent at which each cut was separated.
    pub incumbents: Vec<Selection>,
}

impl SolveReport {
    pub fn gap(&self) -> f64 {
        match (self.upper_bounds.last(), self.lower_bounds.last()) {
            (Some(u), Some(l)) => u - l,
            _ => f64::INFINITY,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// One cut of `family` at `incumbent`, plus the oracle calls spent on it
/// (including any spent building the lift ordering).
pub fn separate(
    instance: &Instance,
    incumbent: &Selection,
    family: CutFamily,
    ordering: OrderingStrategy,
    lower: f64,
) -> Result<(Cut, usize)> {
    let cut = match (family, ordering) {
        (CutFamily::LShaped, _) => l_shaped_cut(instance, incumbent, lower)?,
        (CutFamily::New, _) => new_cut(instance, incumbent)?,
        (CutFamily::Lifted, OrderingStrategy::Index) => {
            lifted_cut(instance, incumbent, &LiftOrdering::by_index(incumbent))?
        }
        (CutFamily::Lifted, OrderingStrategy::Gamma) => {
            let base = new_cut(instance, incumbent)?;
            let order = LiftOrdering::by_gamma_ascending(&base)?;
            let cut = lifted_cut(instance, incumbent, &order)?;
            let calls = cut.gamma_calls + base.gamma_calls;
            return Ok((cut, calls));
        }
    };
    let calls = cut.gamma_calls;
    Ok((cut, calls))
}

pub fn solve(instance: &Instance, constraints: &ConstraintSet, options: &SolveOptions) -> Result<SolveReport> {
    let z = instance.fragile_count();
    constraints.check_dims(z)?;
    if instance.damping() >= 1.0 {
        return Err(Error::UnsupportedDamping(instance.damping()));
    }
    let mut gamma_calls = 0;
    let lower = if options.family == CutFamily::LShaped {
        gamma_calls += 1;
        min_unconstrained(instance)?
    } else {
        0.0
    };

    let first = solve_master_with(&[], constraints, z, options.master)?;
    if first.status == MasterStatus::Infeasible {
        return Err(Error::Infeasible);
    }
    let mut incumbent = first.y;
    let mut best_value = first_return_time(instance, &incumbent)?;
    let mut best_y = incumbent.clone();
    let mut seen = HashSet::from([incumbent.clone()]);

    let mut cuts = Vec::new();
    let mut report = SolveReport {
        status: SolveStatus::IterLimit,
        family: options.family,
        best_y: best_y.clone(),
        best_value,
        lower_bounds: Vec::new(),
        upper_bounds: Vec::new(),
        cuts_added: 0,
        gamma_calls_total: gamma_calls,
        iterations: 0,
        incumbents: Vec::new(),
    };

    for iteration in 1..=options.max_iters {
        let (cut, calls) = separate(instance, &incumbent, options.family, options.ordering, lower)?;
        gamma_calls += calls;
        cuts.push(cut);
        report.incumbents.push(incumbent.clone());

        let master = solve_master_with(&cuts, constraints, z, options.master)?;
        let lb = master.theta;
        let fr = first_return_time(instance, &master.y)?;
        if fr < best_value {
            best_value = fr;
            best_y = master.y.clone();
        }
        report.lower_bounds.push(lb);
        report.upper_bounds.push(best_value);
        report.iterations = iteration;
        report.cuts_added = cuts.len();
        report.gamma_calls_total = gamma_calls;
        report.best_y = best_y.clone();
        report.best_value = best_value;

        let gap = best_value - lb;
        if gap <= options.eps {
            report.status = SolveStatus::Optimal;
            return Ok(report);
        }
        if !seen.insert(master.y.clone()) {
            return Err(Error::Stalled {
                incumbent: master.y.to_string(),
                gap,
            });
        }
        incumbent = master.y;
    }
    Ok(report)
}
