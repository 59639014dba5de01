//! Problem data: the graph with its fragile edges, binary selections over
//! the fragile edges, and the linear constraint system restricting them.
//!
//! Fragile edges are identified by their position in the fragile list
//! (`FragileEdgeId`). Every coefficient vector in the crate, whether in a
//! constraint row or a cut, is aligned to that order.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, InvalidInstance, Result, Violation};

/// Index into [`Instance::fragile_edges`].
pub type FragileEdgeId = usize;

pub const DEFAULT_DAMPING: f64 = 0.85;

/// Largest number of free binaries any exhaustive enumeration will accept.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// A validated problem graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    target: usize,
    fixed: Vec<(usize, usize)>,
    fragile: Vec<(usize, usize)>,
    damping: f64,
    fixed_out: Vec<Vec<usize>>,
    fragile_out: Vec<Vec<FragileEdgeId>>,
}

/// Unchecked instance data, as found in a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInstance {
    pub n: usize,
    pub target: usize,
    #[serde(default)]
    pub edges: Vec<(usize, usize)>,
    #[serde(default)]
    pub fragile: Vec<(usize, usize)>,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default)]
    pub constraints: ConstraintSet,
}

fn default_damping() -> f64 {
    DEFAULT_DAMPING
}

/// Checks every instance invariant, collecting all violations.
pub fn validate(
    n: usize,
    target: usize,
    fixed: Vec<(usize, usize)>,
    fragile: Vec<(usize, usize)>,
    damping: f64,
) -> std::result::Result<Instance, InvalidInstance> {
    let mut violations = Vec::new();
    if n == 0 {
        violations.push(Violation::EmptyGraph);
    }
    if target >= n {
        violations.push(Violation::Index {
            what: "target".into(),
            index: target,
            n,
        });
    }
    if !(damping > 0.0 && damping <= 1.0) {
        violations.push(Violation::DampingRange(damping));
    }
    for (list, edges) in [("edges", &fixed), ("fragile", &fragile)] {
        let mut seen = HashSet::new();
        for &(i, j) in edges {
            for (end, idx) in [("tail", i), ("head", j)] {
                if idx >= n {
                    violations.push(Violation::Index {
                        what: format!("{list} ({i}, {j}) {end}"),
                        index: idx,
                        n,
                    });
                }
            }
            if !seen.insert((i, j)) {
                violations.push(Violation::DuplicateEdge { list, edge: (i, j) });
            }
        }
    }
    let fixed_set: HashSet<_> = fixed.iter().copied().collect();
    for &e in &fragile {
        if fixed_set.contains(&e) {
            violations.push(Violation::Overlap { edge: e });
        }
    }
    if !violations.is_empty() {
        return Err(InvalidInstance(violations));
    }

    let mut fixed_out = vec![Vec::new(); n];
    for &(i, j) in &fixed {
        fixed_out[i].push(j);
    }
    let mut fragile_out = vec![Vec::new(); n];
    for (id, &(i, _)) in fragile.iter().enumerate() {
        fragile_out[i].push(id);
    }
    Ok(Instance {
        n,
        target,
        fixed,
        fragile,
        damping,
        fixed_out,
        fragile_out,
    })
}

impl Instance {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn fixed_edges(&self) -> &[(usize, usize)] {
        &self.fixed
    }

    pub fn fragile_edges(&self) -> &[(usize, usize)] {
        &self.fragile
    }

    /// `|Z|`.
    pub fn fragile_count(&self) -> usize {
        self.fragile.len()
    }

    pub fn fragile_edge(&self, id: FragileEdgeId) -> (usize, usize) {
        self.fragile[id]
    }

    /// Heads of the fixed out-edges of `node`.
    pub fn fixed_out(&self, node: usize) -> &[usize] {
        &self.fixed_out[node]
    }

    /// Ids of the fragile edges leaving `node`.
    pub fn fragile_out(&self, node: usize) -> &[FragileEdgeId] {
        &self.fragile_out[node]
    }

    pub fn to_raw(&self, constraints: &ConstraintSet) -> RawInstance {
        RawInstance {
            n: self.n,
            target: self.target,
            edges: self.fixed.clone(),
            fragile: self.fragile.clone(),
            damping: self.damping,
            constraints: constraints.clone(),
        }
    }
}

/// Binary activation vector over the fragile edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selection(Vec<bool>);

impl Selection {
    pub fn new(bits: Vec<bool>) -> Self {
        Selection(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Selection(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Selection(vec![true; len])
    }

    /// Bits of `index` with position 0 as the most significant bit, so that
    /// counting `0..2^len` walks selections in lexicographic order.
    pub fn from_index(index: u64, len: usize) -> Self {
        Selection((0..len).map(|k| (index >> (len - 1 - k)) & 1 == 1).collect())
    }

    pub fn from_support(len: usize, support: &[FragileEdgeId]) -> Self {
        let mut bits = vec![false; len];
        for &e in support {
            bits[e] = true;
        }
        Selection(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, e: FragileEdgeId) -> bool {
        self.0[e]
    }

    pub fn set(&mut self, e: FragileEdgeId, on: bool) {
        self.0[e] = on;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// The activated edge ids, ascending.
    pub fn support(&self) -> Vec<FragileEdgeId> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(e, &b)| b.then_some(e))
            .collect()
    }

    /// Number of coordinates where the two selections differ.
    pub fn hamming(&self, other: &Selection) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Selection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&b| b as u8))
    }
}

impl<'de> Deserialize<'de> for Selection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        raw.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!(
                    "selection entries must be 0 or 1, got {other}"
                ))),
            })
            .collect::<std::result::Result<_, _>>()
            .map(Selection)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
            Sense::Ge => lhs >= rhs,
        }
    }
}

/// `coeffs · y  (sense)  rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<i64>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Row {
    pub fn lhs(&self, y: &Selection) -> i64 {
        self.coeffs
            .iter()
            .zip(y.bits())
            .filter(|(_, &b)| b)
            .map(|(&a, _)| a)
            .sum()
    }

    pub fn is_satisfied(&self, y: &Selection) -> bool {
        self.sense.holds(self.lhs(y), self.rhs)
    }
}

/// `Σ y  (sense)  k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cardinality {
    pub sense: Sense,
    pub k: i64,
}

/// The feasible set over the fragile-edge binaries. Empty means the whole
/// cube.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(default)]
    pub rows: Vec<Row>,
    #[serde(default)]
    pub cardinality: Option<Cardinality>,
}

impl ConstraintSet {
    pub fn unconstrained() -> Self {
        Self::default()
    }

    pub fn cardinality(sense: Sense, k: i64) -> Self {
        ConstraintSet {
            rows: Vec::new(),
            cardinality: Some(Cardinality { sense, k }),
        }
    }

    pub fn with_row(mut self, coeffs: Vec<i64>, sense: Sense, rhs: i64) -> Self {
        self.rows.push(Row { coeffs, sense, rhs });
        self
    }

    pub fn is_unconstrained(&self) -> bool {
        self.rows.is_empty() && self.cardinality.is_none()
    }

    /// Every row has one coefficient per fragile edge.
    pub fn check_dims(&self, z_count: usize) -> Result<()> {
        for row in &self.rows {
            if row.coeffs.len() != z_count {
                return Err(Error::DimensionMismatch {
                    expected: z_count,
                    actual: row.coeffs.len(),
                });
            }
        }
        Ok(())
    }

    /// The rows with the cardinality shortcut expanded into an all-ones row.
    pub fn compiled_rows(&self, z_count: usize) -> Vec<Row> {
        let mut rows = self.rows.clone();
        if let Some(card) = self.cardinality {
            rows.push(Row {
                coeffs: vec![1; z_count],
                sense: card.sense,
                rhs: card.k,
            });
        }
        rows
    }

    pub fn is_feasible(&self, y: &Selection) -> Result<bool> {
        self.check_dims(y.len())?;
        let rows_ok = self.rows.iter().all(|r| r.is_satisfied(y));
        let card_ok = self.cardinality.is_none_or(|c| {
            let ones = y.bits().iter().filter(|&&b| b).count() as i64;
            c.sense.holds(ones, c.k)
        });
        Ok(rows_ok && card_ok)
    }
}

/// Membership test for the feasible set.
pub fn is_feasible(constraints: &ConstraintSet, y: &Selection) -> Result<bool> {
    constraints.is_feasible(y)
}

/// Feasible selections of length `z_count`, in lexicographic order.
pub fn enumerate_feasible(
    constraints: &ConstraintSet,
    z_count: usize,
    limit: usize,
) -> Result<impl Iterator<Item = Selection> + '_> {
    if z_count > limit {
        return Err(Error::TooLargeToEnumerate {
            count: z_count,
            limit,
        });
    }
    constraints.check_dims(z_count)?;
    Ok(all_selections(z_count).filter(move |y| {
        constraints
            .is_feasible(y)
            .expect("dimensions checked above")
    }))
}

/// Every point of the cube, lexicographically. Callers bound `len`.
pub(crate) fn all_selections(len: usize) -> impl Iterator<Item = Selection> {
    (0..1u64 << len).map(move |k| Selection::from_index(k, len))
}

/// A validated instance together with its constraint system.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub instance: Instance,
    pub constraints: ConstraintSet,
}

impl Problem {
    pub fn from_raw(raw: RawInstance) -> Result<Problem> {
        let instance = validate(raw.n, raw.target, raw.edges, raw.fragile, raw.damping)?;
        raw.constraints.check_dims(instance.fragile_count())?;
        Ok(Problem {
            instance,
            constraints: raw.constraints,
        })
    }

    pub fn from_json(text: &str) -> Result<Problem> {
        let raw: RawInstance =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Problem::from_raw(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.instance.to_raw(&self.constraints))
            .expect("instance serialization is infallible")
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Problem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Problem::from_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_instance(path: impl AsRef<Path>, problem: &Problem) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, problem.to_json() + "\n").map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// What constraint system the generator attaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSpec {
    None,
    Cardinality { sense: Sense, k: i64 },
    /// One covering row `Σ_{e∈S} y_e ≥ 1` over a random set of `size` fragile
    /// edges (clamped to `[1, |Z|]`).
    Cover { size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub fixed_edge_prob: f64,
    pub fragile_count: usize,
    pub constraints: ConstraintSpec,
    pub seed: u64,
    pub damping: f64,
}

impl GeneratorSpec {
    pub fn new(n: usize, fixed_edge_prob: f64, fragile_count: usize, seed: u64) -> Self {
        GeneratorSpec {
            n,
            fixed_edge_prob,
            fragile_count,
            constraints: ConstraintSpec::None,
            seed,
            damping: DEFAULT_DAMPING,
        }
    }

    pub fn with_constraints(mut self, constraints: ConstraintSpec) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn with_damping(mut self, damping: f64) -> Self {
        self.damping = damping;
        self
    }
}

/// Seeded random instance: fixed edges are Bernoulli over ordered pairs
/// without self-loops, fragile edges are a uniform sample of the remaining
/// non-edges.
pub fn generate_random(spec: &GeneratorSpec) -> Result<Problem> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InfeasibleSpec("n must be positive".into()));
    }
    let slots = n * (n - 1);
    if spec.fragile_count > slots {
        return Err(Error::InfeasibleSpec(format!(
            "{} fragile edges requested but only {slots} ordered pairs exist",
            spec.fragile_count
        )));
    }
    if !(0.0..=1.0).contains(&spec.fixed_edge_prob) {
        return Err(Error::InfeasibleSpec(format!(
            "edge probability {} is not in [0, 1]",
            spec.fixed_edge_prob
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let target = rng.gen_range(0..n);
    let mut fixed = Vec::new();
    let mut non_edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if rng.gen_bool(spec.fixed_edge_prob) {
                fixed.push((i, j));
            } else {
                non_edges.push((i, j));
            }
        }
    }
    if spec.fragile_count > non_edges.len() {
        return Err(Error::InfeasibleSpec(format!(
            "{} fragile edges requested but only {} non-edges remain",
            spec.fragile_count,
            non_edges.len()
        )));
    }
    let mut fragile: Vec<_> = non_edges
        .choose_multiple(&mut rng, spec.fragile_count)
        .copied()
        .collect();
    fragile.sort_unstable();
    let z = fragile.len();

    let constraints = match spec.constraints {
        ConstraintSpec::None => ConstraintSet::unconstrained(),
        ConstraintSpec::Cardinality { sense, k } => ConstraintSet::cardinality(sense, k),
        ConstraintSpec::Cover { size } => {
            let size = size.clamp(1, z.max(1));
            let mut coeffs = vec![0; z];
            let ids: Vec<_> = (0..z).collect();
            for &e in ids.choose_multiple(&mut rng, size.min(z)) {
                coeffs[e] = 1;
            }
            ConstraintSet::unconstrained().with_row(coeffs, Sense::Ge, 1)
        }
    };

    let instance = validate(n, target, fixed, fragile, spec.damping)?;
    Ok(Problem {
        instance,
        constraints,
    })
}
