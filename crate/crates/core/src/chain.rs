//! The damped random walk induced by a selection, its hitting times to the
//! target, and its stationary distribution.
//!
//! From node `i` with out-neighbour set `O` (fixed heads plus heads of the
//! activated fragile edges) the walk moves to `j` with probability
//! `c/|O|·[j ∈ O] + (1-c)/n`; a node with `O = ∅` jumps uniformly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Selection};
use crate::linalg::DenseMatrix;

pub const DEFAULT_STATIONARY_TOL: f64 = 1e-12;
pub const DEFAULT_STATIONARY_MAX_ITERS: usize = 1_000_000;

/// Expected hitting times of the target and its expected first return time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingProfile {
    /// `h[j]` = expected steps from `j` to first reach the target; `h[v] = 0`.
    pub h: Vec<f64>,
    /// Expected first return time to the target.
    pub fr: f64,
}

/// Heads of the out-edges of `node` under `y`.
pub fn out_targets(instance: &Instance, y: &Selection, node: usize) -> Vec<usize> {
    let mut out = instance.fixed_out(node).to_vec();
    out.extend(
        instance
            .fragile_out(node)
            .iter()
            .filter(|&&e| y.get(e))
            .map(|&e| instance.fragile_edge(e).1),
    );
    out
}

fn row_from_targets(n: usize, damping: f64, targets: &[usize]) -> Vec<f64> {
    if targets.is_empty() {
        return vec![1.0 / n as f64; n];
    }
    let mut row = vec![(1.0 - damping) / n as f64; n];
    let share = damping / targets.len() as f64;
    for &j in targets {
        row[j] += share;
    }
    row
}

/// Row `node` of the transition matrix under `y`.
pub fn transition_row(instance: &Instance, y: &Selection, node: usize) -> Result<Vec<f64>> {
    y.check_len(instance.fragile_count())?;
    Ok(row_from_targets(
        instance.node_count(),
        instance.damping(),
        &out_targets(instance, y, node),
    ))
}

/// Full transition matrix under `y`, row-major by source node.
pub fn transition_matrix(instance: &Instance, y: &Selection) -> Result<Vec<Vec<f64>>> {
    (0..instance.node_count())
        .map(|i| transition_row(instance, y, i))
        .collect()
}

/// Solves `h_j = 1 + Σ_{k≠v} P_jk h_k` for `j ≠ v` by a dense direct solve
/// and reads off the return time from the target's row.
pub fn hitting_times(instance: &Instance, y: &Selection) -> Result<HittingProfile> {
    y.check_len(instance.fragile_count())?;
    let n = instance.node_count();
    let v = instance.target();
    let c = instance.damping();
    // Reduced index: nodes other than v, in order.
    let reduced = |j: usize| if j < v { j } else { j - 1 };

    let mut a = DenseMatrix::identity(n - 1);
    for j in (0..n).filter(|&j| j != v) {
        let row = row_from_targets(n, c, &out_targets(instance, y, j));
        for (k, p) in row.into_iter().enumerate() {
            if k != v {
                a[(reduced(j), reduced(k))] -= p;
            }
        }
    }
    let sol = a.solve(vec![1.0; n - 1])?;

    let mut h = vec![0.0; n];
    for j in (0..n).filter(|&j| j != v) {
        h[j] = sol[reduced(j)];
    }
    let fr = return_time(n, c, &out_targets(instance, y, v), &h);
    Ok(HittingProfile { h, fr })
}

/// `1 + Σ_j P_vj h_j` for the target row given by `targets`.
pub(crate) fn return_time(n: usize, damping: f64, targets: &[usize], h: &[f64]) -> f64 {
    1.0 + row_from_targets(n, damping, targets)
        .iter()
        .zip(h)
        .map(|(p, hj)| p * hj)
        .sum::<f64>()
}

/// Expected first return time to the target under `y`.
pub fn first_return_time(instance: &Instance, y: &Selection) -> Result<f64> {
    hitting_times(instance, y).map(|p| p.fr)
}

/// Power iteration from the uniform vector until `‖πP − π‖₁ < tol`.
pub fn stationary(
    instance: &Instance,
    y: &Selection,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>> {
    y.check_len(instance.fragile_count())?;
    let c = instance.damping();
    if c >= 1.0 {
        return Err(Error::UnsupportedDamping(c));
    }
    let n = instance.node_count();
    let outs: Vec<Vec<usize>> = (0..n).map(|i| out_targets(instance, y, i)).collect();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        // Mass spread uniformly: teleportation plus dangling nodes.
        let mut uniform = 0.0;
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, out) in outs.iter().enumerate() {
            if out.is_empty() {
                uniform += pi[i];
            } else {
                uniform += (1.0 - c) * pi[i];
                let share = c * pi[i] / out.len() as f64;
                for &j in out {
                    next[j] += share;
                }
            }
        }
        let base = uniform / n as f64;
        next.iter_mut().for_each(|x| *x += base);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if residual < tol {
            let total: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|x| *x /= total);
            return Ok(pi);
        }
    }
    Err(Error::NoConvergence {
        iters: max_iters,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random, validate, GeneratorSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize, c: f64) -> Instance {
        validate(n, 0, (0..n).map(|i| (i, (i + 1) % n)).collect(), vec![], c).unwrap()
    }

    #[test]
    fn transition_row_examples() {
        let single = validate(1, 0, vec![(0, 0)], vec![], 0.7).unwrap();
        assert_eq!(transition_row(&single, &Selection::zeros(0), 0).unwrap(), vec![1.0]);

        let two = validate(2, 0, vec![(0, 1)], vec![], 0.85).unwrap();
        let row = transition_row(&two, &Selection::zeros(0), 0).unwrap();
        assert!((row[0] - 0.075).abs() < 1e-15 && (row[1] - 0.925).abs() < 1e-15);

        let dangling = validate(4, 0, vec![], vec![], 0.85).unwrap();
        assert_eq!(
            transition_row(&dangling, &Selection::zeros(0), 2).unwrap(),
            vec![0.25; 4]
        );
    }

    #[test]
    fn fragile_edges_enter_the_out_set_only_when_active() {
        let inst = validate(3, 0, vec![(1, 2)], vec![(1, 0)], 0.5).unwrap();
        let off = transition_row(&inst, &Selection::zeros(1), 1).unwrap();
        let on = transition_row(&inst, &Selection::ones(1), 1).unwrap();
        let t = 0.5 / 3.0;
        assert_eq!(off, vec![t, t, t + 0.5]);
        assert_eq!(on, vec![t + 0.25, t, t + 0.25]);
    }

    #[test]
    fn return_time_examples() {
        let single = validate(1, 0, vec![(0, 0)], vec![], 1.0).unwrap();
        assert_eq!(first_return_time(&single, &Selection::zeros(0)).unwrap(), 1.0);
        let fr3 = first_return_time(&cycle(3, 1.0), &Selection::zeros(0)).unwrap();
        assert!((fr3 - 3.0).abs() < 1e-12);
        for c in [0.5, 0.85, 0.99] {
            let fr2 = first_return_time(&cycle(2, c), &Selection::zeros(0)).unwrap();
            assert!((fr2 - 2.0).abs() < 1e-12, "c = {c}: {fr2}");
        }
    }

    #[test]
    fn unreachable_target_with_full_damping_is_singular() {
        // 1 <-> 2 never reaches 0 when c = 1.
        let inst = validate(3, 0, vec![(0, 1), (1, 2), (2, 1)], vec![], 1.0).unwrap();
        assert!(matches!(
            hitting_times(&inst, &Selection::zeros(0)),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn stationary_examples() {
        let single = validate(1, 0, vec![(0, 0)], vec![], 0.85).unwrap();
        let pi = stationary(&single, &Selection::zeros(0), 1e-12, 1000).unwrap();
        assert!((pi[0] - 1.0).abs() < 1e-15);
        let pi = stationary(&cycle(2, 0.85), &Selection::zeros(0), 1e-12, 10_000).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12);
        assert!(matches!(
            stationary(
                &validate(3, 0, vec![(0, 1)], vec![], 0.85).unwrap(),
                &Selection::zeros(0),
                1e-300,
                5
            ),
            Err(Error::NoConvergence { iters: 5, .. })
        ));
    }

    #[test]
    fn hitting_profile_invariants_on_random_instances() {
        for seed in 0..40 {
            let p = generate_random(&GeneratorSpec::new(3 + seed as usize % 8, 0.3, 3, seed))
                .unwrap();
            let inst = &p.instance;
            let y = Selection::from_index(seed % 8, 3);
            let prof = hitting_times(inst, &y).unwrap();
            assert_eq!(prof.h[inst.target()], 0.0);
            for (j, &hj) in prof.h.iter().enumerate() {
                if j != inst.target() {
                    assert!(hj >= 1.0 - 1e-12);
                }
            }
            assert!(prof.fr >= 1.0);
            for i in 0..inst.node_count() {
                let row = transition_row(inst, &y, i).unwrap();
                assert!(row.iter().all(|&p| p >= 0.0));
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            // Kac: π_v · fr = 1.
            let pi = stationary(inst, &y, 1e-12, 1_000_000).unwrap();
            assert!((pi[inst.target()] * prof.fr - 1.0).abs() < 1e-8);
        }
    }

    fn sample_next(row: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (j, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        row.len() - 1
    }

    /// Rollouts of the walk from the target; mean return time within three
    /// standard errors of the linear solve.
    #[test]
    fn return_time_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for seed in 0..4 {
            let p = generate_random(&GeneratorSpec::new(3 + seed as usize, 0.35, 3, 100 + seed))
                .unwrap();
            let inst = &p.instance;
            let y = Selection::from_index(seed % 8, 3);
            let rows = transition_matrix(inst, &y).unwrap();
            let v = inst.target();
            let rollouts = 100_000;
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..rollouts {
                let mut node = v;
                let mut steps = 0u64;
                loop {
                    node = sample_next(&rows[node], &mut rng);
                    steps += 1;
                    if node == v {
                        break;
                    }
                }
                sum += steps as f64;
                sum_sq += (steps * steps) as f64;
            }
            let mean = sum / rollouts as f64;
            let var = sum_sq / rollouts as f64 - mean * mean;
            let se = (var / rollouts as f64).sqrt();
            let fr = first_return_time(inst, &y).unwrap();
            assert!(
                (mean - fr).abs() <= 3.0 * se,
                "seed {seed}: MC {mean} ± {se} vs solve {fr}"
            );
        }
    }
}
