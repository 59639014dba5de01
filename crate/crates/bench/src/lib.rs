//! Fixed benchmark corpus shared by the criterion targets.

use prcut::{generate_random, ConstraintSpec, GeneratorSpec, Problem, Sense};

/// Seeded instance with `n` nodes and `z` fragile edges under a
/// cardinality budget of `z / 2`.
pub fn budgeted(n: usize, z: usize, seed: u64) -> Problem {
    let spec = GeneratorSpec::new(n, 0.25, z, seed).with_constraints(ConstraintSpec::Cardinality {
        sense: Sense::Le,
        k: (z / 2) as i64,
    });
    generate_random(&spec).expect("benchmark spec is feasible")
}
