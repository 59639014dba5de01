//! Seeded test corpora.
#![allow(dead_code)]

use prcut::{generate_random, ConstraintSet, ConstraintSpec, Error, GammaQuery, GeneratorSpec, Problem, Selection, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct CorpusSpec {
    pub n_min: usize,
    pub n_max: usize,
    pub z_max: usize,
    pub damping: (f64, f64),
}

/// Instance `index` of a corpus, reproducible from `(salt, index)`. Draws
/// that ask for more fragile edges than there are non-edges are redrawn.
pub fn corpus_instance(spec: &CorpusSpec, salt: u64, index: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(salt.wrapping_mul(1_000_003).wrapping_add(index));
    loop {
        let n = rng.gen_range(spec.n_min..=spec.n_max);
        let z = rng.gen_range(0..=spec.z_max.min(n * (n - 1)));
        let density = rng.gen_range(0.1..0.5);
        let damping = rng.gen_range(spec.damping.0..=spec.damping.1);
        let gen = GeneratorSpec::new(n, density, z, rng.gen()).with_damping(damping);
        match generate_random(&gen) {
            Ok(p) => return p,
            Err(Error::InfeasibleSpec(_)) => continue,
            Err(e) => panic!("generator failed: {e}"),
        }
    }
}

/// Random disjoint forcing: each edge independently on, off or free.
pub fn random_query(rng: &mut impl Rng, z: usize) -> GammaQuery {
    let p_on = rng.gen_range(0.0..0.5);
    let p_off = rng.gen_range(0.0..(1.0 - p_on));
    let mut on = Vec::new();
    let mut off = Vec::new();
    for e in 0..z {
        let u: f64 = rng.gen();
        if u < p_on {
            on.push(e);
        } else if u < p_on + p_off {
            off.push(e);
        }
    }
    GammaQuery::new(on, off)
}

pub fn random_selection(rng: &mut impl Rng, z: usize) -> Selection {
    Selection::new((0..z).map(|_| rng.gen_bool(0.5)).collect())
}

/// The three constraint regimes: none, `Σy ≤ ⌈|Z|/2⌉`, one covering row.
pub fn regimes(problem: &Problem, rng: &mut impl Rng) -> Vec<(&'static str, ConstraintSet)> {
    let z = problem.instance.fragile_count();
    let mut cover = vec![0i64; z];
    if z > 0 {
        let size = rng.gen_range(1..=z);
        let mut ids: Vec<usize> = (0..z).collect();
        for k in 0..size {
            let j = rng.gen_range(k..z);
            ids.swap(k, j);
            cover[ids[k]] = 1;
        }
    }
    let covering = if z > 0 {
        ConstraintSet::unconstrained().with_row(cover, Sense::Ge, 1)
    } else {
        ConstraintSet::unconstrained()
    };
    vec![
        ("unconstrained", ConstraintSet::unconstrained()),
        ("cardinality", ConstraintSet::cardinality(Sense::Le, z.div_ceil(2) as i64)),
        ("covering", covering),
    ]
}

pub fn generated_with(spec: ConstraintSpec, n: usize, z: usize, seed: u64) -> Problem {
    generate_random(&GeneratorSpec::new(n, 0.3, z, seed).with_constraints(spec)).unwrap()
}
