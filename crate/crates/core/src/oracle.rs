//! Minimum return time over the free fragile edges with some edges forced
//! on and some forced off.
//!
//! Minimizing the return time to `v` is a stochastic shortest path problem:
//! each node picks the subset of its free fragile out-edges, and the expected
//! cost-to-go from node `i` under out-set `O` is
//!
//! ```text
//! q_i(O) = 1 + (1-c)·mean(h) + c·mean_{j∈O}(h_j)    (O ≠ ∅)
//! q_i(∅) = 1 + mean(h)                                (dangling)
//! ```
//!
//! with `h_v = 0`. The per-node step therefore minimizes a mean over a set
//! containing the mandatory heads, which is solved exactly by adding free
//! heads in ascending order of `h` while each one lies strictly below the
//! running mean. With `c < 1` every policy is proper, so policy iteration
//! converges to a configuration that minimizes every hitting time and the
//! return time at once.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::chain::hitting_times;
use crate::error::{Error, Result};
use crate::instance::{FragileEdgeId, Instance, Selection};

/// Strict-improvement threshold when comparing means and node costs.
pub const IMPROVE_TOL: f64 = 1e-12;

/// Edges forced on (`S̄`) and forced off (`N̄`); the rest are free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GammaQuery {
    pub forced_on: BTreeSet<FragileEdgeId>,
    pub forced_off: BTreeSet<FragileEdgeId>,
}

impl GammaQuery {
    pub fn unconstrained() -> Self {
        Self::default()
    }

    pub fn new(
        forced_on: impl IntoIterator<Item = FragileEdgeId>,
        forced_off: impl IntoIterator<Item = FragileEdgeId>,
    ) -> Self {
        GammaQuery {
            forced_on: forced_on.into_iter().collect(),
            forced_off: forced_off.into_iter().collect(),
        }
    }

    /// `γ({e}, ∅)`.
    pub fn edge_on(e: FragileEdgeId) -> Self {
        Self::new([e], [])
    }

    /// `γ(∅, {e})`.
    pub fn edge_off(e: FragileEdgeId) -> Self {
        Self::new([], [e])
    }

    /// Checks disjointness and id ranges.
    pub fn check(&self, z_count: usize) -> Result<()> {
        if let Some(&id) = self
            .forced_on
            .iter()
            .chain(&self.forced_off)
            .find(|&&id| id >= z_count)
        {
            return Err(Error::EdgeId { id, z: z_count });
        }
        if let Some(&e) = self.forced_on.intersection(&self.forced_off).next() {
            return Err(Error::ForcedOverlap(e));
        }
        Ok(())
    }

    pub fn is_free(&self, e: FragileEdgeId) -> bool {
        !self.forced_on.contains(&e) && !self.forced_off.contains(&e)
    }

    /// Whether `y` agrees with every forcing.
    pub fn admits(&self, y: &Selection) -> bool {
        self.forced_on.iter().all(|&e| y.get(e)) && self.forced_off.iter().all(|&e| !y.get(e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaResult {
    pub value: f64,
    pub argmin: Selection,
    /// Policy-improvement sweeps that changed the configuration.
    pub iterations: usize,
    /// Return time of the configuration evaluated at each sweep.
    pub trace: Vec<f64>,
}

/// Sweep guard: `10 · 2^min(|Z|, 20)`.
fn max_sweeps(z_count: usize) -> usize {
    10usize << z_count.min(20)
}

/// Cost-to-go from a node choosing out-set heads `set`, without the leading 1.
fn node_cost(set_sum: f64, set_len: usize, damping: f64, mean_all: f64) -> f64 {
    if set_len == 0 {
        mean_all
    } else {
        damping * (set_sum / set_len as f64) + (1.0 - damping) * mean_all
    }
}

/// Exact minimizer of the mean of `h` over `mandatory ∪ S`, `S ⊆ free`.
/// `free` holds `(h of head, edge id)`; returns the chosen edge ids.
fn best_free_subset(
    mandatory: &[f64],
    free: &mut [(f64, FragileEdgeId)],
    damping: f64,
    mean_all: f64,
) -> (Vec<FragileEdgeId>, f64) {
    free.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut sum: f64 = mandatory.iter().sum();
    let mut len = mandatory.len();
    let mut chosen = Vec::new();
    let mut rest = &free[..];
    if len == 0 {
        // Nonempty options start from the single smallest head.
        let Some((&(h0, e0), tail)) = rest.split_first() else {
            return (chosen, mean_all);
        };
        sum = h0;
        len = 1;
        chosen.push(e0);
        rest = tail;
    }
    for &(hf, e) in rest {
        if hf < sum / len as f64 - IMPROVE_TOL {
            sum += hf;
            len += 1;
            chosen.push(e);
        } else {
            break;
        }
    }
    if mandatory.is_empty() && !((sum / len as f64) < mean_all - IMPROVE_TOL) {
        // Dangling wins or ties: keep everything off.
        return (Vec::new(), mean_all);
    }
    (chosen, node_cost(sum, len, damping, mean_all))
}

/// `γ(S̄, N̄)` by policy iteration from the all-free-on configuration.
pub fn gamma(instance: &Instance, query: &GammaQuery) -> Result<GammaResult> {
    let c = instance.damping();
    if c >= 1.0 {
        return Err(Error::UnsupportedDamping(c));
    }
    let z = instance.fragile_count();
    query.check(z)?;
    let n = instance.node_count();

    let mut y = Selection::new((0..z).map(|e| !query.forced_off.contains(&e)).collect());
    let guard = max_sweeps(z);
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let profile = hitting_times(instance, &y)?;
        trace.push(profile.fr);
        let h = &profile.h;
        let mean_all = h.iter().sum::<f64>() / n as f64;

        let mut next = y.clone();
        let mut changed = false;
        for node in 0..n {
            let out = instance.fragile_out(node);
            if !out.iter().any(|&e| query.is_free(e)) {
                continue;
            }
            let mut mandatory: Vec<f64> = instance.fixed_out(node).iter().map(|&j| h[j]).collect();
            let mut free = Vec::new();
            let (mut cur_sum, mut cur_len) = (mandatory.iter().sum::<f64>(), mandatory.len());
            for &e in out {
                let head_h = h[instance.fragile_edge(e).1];
                if query.forced_on.contains(&e) {
                    mandatory.push(head_h);
                    cur_sum += head_h;
                    cur_len += 1;
                } else if query.is_free(e) {
                    free.push((head_h, e));
                    if y.get(e) {
                        cur_sum += head_h;
                        cur_len += 1;
                    }
                }
            }
            let current = node_cost(cur_sum, cur_len, c, mean_all);
            let (chosen, best) = best_free_subset(&mandatory, &mut free, c, mean_all);
            if best < current - IMPROVE_TOL * current.abs().max(1.0) {
                for &(_, e) in &free {
                    next.set(e, false);
                }
                for e in chosen {
                    next.set(e, true);
                }
                changed = true;
            }
        }
        if !changed {
            return Ok(GammaResult {
                value: profile.fr,
                argmin: y,
                iterations,
                trace,
            });
        }
        y = next;
        iterations += 1;
        if iterations > guard {
            return Err(Error::NonConvergence { sweeps: guard });
        }
    }
}

/// `min_y fr(y)` over the whole cube.
pub fn min_unconstrained(instance: &Instance) -> Result<f64> {
    gamma(instance, &GammaQuery::unconstrained()).map(|r| r.value)
}
