//! Exhaustive reference computations. Deliberately naive: every result is a
//! plain minimum over an enumerated set, ties broken lexicographically.

use crate::chain::first_return_time;
use crate::cuts::{Cut, CutFamily, LiftOrdering};
use crate::error::{Error, Result};
use crate::instance::{all_selections, enumerate_feasible, ConstraintSet, Instance, Selection};
use crate::oracle::GammaQuery;

/// Optimal selection over the feasible set and its return time.
pub fn bf_min(instance: &Instance, constraints: &ConstraintSet, limit: usize) -> Result<(Selection, f64)> {
    let mut best: Option<(Selection, f64)> = None;
    for y in enumerate_feasible(constraints, instance.fragile_count(), limit)? {
        let fr = first_return_time(instance, &y)?;
        if best.as_ref().is_none_or(|(_, b)| fr < *b) {
            best = Some((y, fr));
        }
    }
    best.ok_or(Error::Infeasible)
}

/// `γ(S̄, N̄)` by enumerating the free edges.
pub fn bf_gamma(instance: &Instance, query: &GammaQuery, limit: usize) -> Result<f64> {
    let z = instance.fragile_count();
    query.check(z)?;
    let free: Vec<_> = (0..z).filter(|&e| query.is_free(e)).collect();
    if free.len() > limit {
        return Err(Error::TooLargeToEnumerate {
            count: free.len(),
            limit,
        });
    }
    let mut y = Selection::zeros(z);
    for &e in &query.forced_on {
        y.set(e, true);
    }
    let mut best = f64::INFINITY;
    for bits in all_selections(free.len()) {
        for (k, &e) in free.iter().enumerate() {
            y.set(e, bits.get(k));
        }
        best = best.min(first_return_time(instance, &y)?);
    }
    Ok(best)
}

/// Exact sequential lifting problems at one incumbent, with every return
/// time over the cube precomputed.
pub struct ExactLifter {
    incumbent: Selection,
    order: Vec<usize>,
    fr_incumbent: f64,
    /// `min{0, γ(∅,{e}) − fr(ȳ)}` for `e ∈ Ȳ`, zero elsewhere.
    support_coeffs: Vec<f64>,
    points: Vec<(Selection, f64)>,
}

impl ExactLifter {
    pub fn new(
        instance: &Instance,
        constraints: &ConstraintSet,
        incumbent: &Selection,
        ordering: &LiftOrdering,
        limit: usize,
    ) -> Result<Self> {
        let z = instance.fragile_count();
        incumbent.check_len(z)?;
        ordering.check(incumbent)?;
        let points: Vec<(Selection, f64)> = enumerate_feasible(constraints, z, limit)?
            .map(|y| first_return_time(instance, &y).map(|fr| (y, fr)))
            .collect::<Result<_>>()?;
        let fr_incumbent = first_return_time(instance, incumbent)?;
        let mut support_coeffs = vec![0.0; z];
        for e in incumbent.support() {
            let g = bf_gamma(instance, &GammaQuery::edge_off(e), limit)?;
            support_coeffs[e] = (g - fr_incumbent).min(0.0);
        }
        Ok(ExactLifter {
            incumbent: incumbent.clone(),
            order: ordering.order.clone(),
            fr_incumbent,
            support_coeffs,
            points,
        })
    }

    pub fn fr_incumbent(&self) -> f64 {
        self.fr_incumbent
    }

    /// `π` for ordering position `r` (0-based) given the coefficients
    /// already lifted at positions `0..r`.
    pub fn lift(&self, r: usize, prior: &[f64]) -> Result<f64> {
        if prior.len() != r || r >= self.order.len() {
            return Err(Error::DimensionMismatch {
                expected: r,
                actual: prior.len(),
            });
        }
        let lifted = self.order[r];
        let tail = &self.order[r + 1..];
        let mut best = f64::INFINITY;
        for (y, fr) in &self.points {
            if !y.get(lifted) || tail.iter().any(|&e| y.get(e)) {
                continue;
            }
            let support: f64 = self
                .incumbent
                .support()
                .into_iter()
                .filter(|&e| !y.get(e))
                .map(|e| self.support_coeffs[e])
                .sum();
            let earlier: f64 = self.order[..r]
                .iter()
                .zip(prior)
                .filter(|(&e, _)| y.get(e))
                .map(|(_, &p)| p)
                .sum();
            best = best.min(fr - support - earlier);
        }
        if best.is_infinite() {
            return Err(Error::Infeasible);
        }
        Ok(best - self.fr_incumbent)
    }

    /// Lifts every position in order with exact priors. Positions whose
    /// lifting problem is empty get `None` and coefficient 0 in the cut.
    pub fn lifted_cut(&self) -> Result<(Cut, Vec<Option<f64>>)> {
        let mut exact = Vec::with_capacity(self.order.len());
        let mut used = Vec::with_capacity(self.order.len());
        for r in 0..self.order.len() {
            match self.lift(r, &used) {
                Ok(p) => {
                    exact.push(Some(p));
                    used.push(p);
                }
                Err(Error::Infeasible) => {
                    exact.push(None);
                    used.push(0.0);
                }
                Err(e) => return Err(e),
            }
        }
        let z = self.incumbent.len();
        let mut a0 = self.fr_incumbent;
        let mut coeffs = vec![0.0; z];
        for e in self.incumbent.support() {
            a0 += self.support_coeffs[e];
            coeffs[e] = -self.support_coeffs[e];
        }
        for (&e, &p) in self.order.iter().zip(&used) {
            coeffs[e] = p;
        }
        let cut = Cut {
            family: CutFamily::Lifted,
            a0,
            coeffs,
            incumbent: self.incumbent.clone(),
            gamma_calls: 0,
            gamma_values: Vec::new(),
        };
        Ok((cut, exact))
    }
}

/// The `r`-th exact lifting coefficient (0-based position in `ordering`).
pub fn bf_exact_lift(
    instance: &Instance,
    constraints: &ConstraintSet,
    incumbent: &Selection,
    ordering: &LiftOrdering,
    prior_coeffs: &[f64],
    r: usize,
    limit: usize,
) -> Result<f64> {
    ExactLifter::new(instance, constraints, incumbent, ordering, limit)?.lift(r, prior_coeffs)
}
