//! The three families of valid inequalities `θ ≥ a₀ + Σ aₑ yₑ` separated at
//! an incumbent `ȳ` with support `Ȳ`.
//!
//! All three are built in "incumbent form"
//!
//! ```text
//! θ ≥ fr(ȳ) + Σ_{e∈Ȳ} pₑ (1 − yₑ) + Σ_{e∉Ȳ} pₑ yₑ
//! ```
//!
//! and stored normalized: `a₀ = fr(ȳ) + Σ_{e∈Ȳ} pₑ`, `aₑ = −pₑ` on `Ȳ` and
//! `aₑ = pₑ` elsewhere. The incumbent coefficients `pₑ` are
//!
//! * L-shaped: `L − fr(ȳ)` for every edge.
//! * New: `min{0, γ(∅,{e}) − fr(ȳ)}` on `Ȳ`, `min{0, γ({e},∅) − fr(ȳ)}` off it.
//! * Lifted: the new-cut values on `Ȳ`; along an ordering `e¹,…,eᵐ` of
//!   `Z∖Ȳ`, `min{0, γ({eʳ}, {eʳ⁺¹,…,eᵐ}) − fr(ȳ)}`.

use serde::{Deserialize, Serialize};

use crate::chain::first_return_time;
use crate::error::{Error, Result};
use crate::instance::{FragileEdgeId, Instance, Selection};
use crate::oracle::{gamma, GammaQuery};

/// Slack allowed between a supplied `L` and `fr(ȳ)`.
pub const L_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutFamily {
    LShaped,
    New,
    Lifted,
}

impl CutFamily {
    pub const ALL: [CutFamily; 3] = [CutFamily::LShaped, CutFamily::New, CutFamily::Lifted];

    pub fn name(self) -> &'static str {
        match self {
            CutFamily::LShaped => "lshaped",
            CutFamily::New => "new",
            CutFamily::Lifted => "lifted",
        }
    }
}

impl std::fmt::Display for CutFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `θ ≥ a0 + Σ coeffs[e]·y[e]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub family: CutFamily,
    pub a0: f64,
    pub coeffs: Vec<f64>,
    pub incumbent: Selection,
    pub gamma_calls: usize,
    /// γ value behind each incumbent-form coefficient (empty for L-shaped).
    #[serde(skip)]
    pub gamma_values: Vec<f64>,
}

impl Cut {
    fn from_incumbent_form(
        family: CutFamily,
        incumbent: &Selection,
        fr: f64,
        raw: Vec<f64>,
        gamma_calls: usize,
        gamma_values: Vec<f64>,
    ) -> Cut {
        let mut a0 = fr;
        let coeffs = raw
            .iter()
            .enumerate()
            .map(|(e, &p)| {
                if incumbent.get(e) {
                    a0 += p;
                    -p
                } else {
                    p
                }
            })
            .collect();
        Cut {
            family,
            a0,
            coeffs,
            incumbent: incumbent.clone(),
            gamma_calls,
            gamma_values,
        }
    }

    /// The `pₑ` coefficients: `−aₑ` on the incumbent's support, `aₑ` off it.
    pub fn incumbent_form_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(e, &a)| if self.incumbent.get(e) { -a } else { a })
            .collect()
    }

    /// Right-hand side at `y`.
    pub fn eval(&self, y: &Selection) -> Result<f64> {
        eval_cut(self, y)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cut serialization is infallible")
    }
}

/// `a₀ + Σ aₑ yₑ`.
pub fn eval_cut(cut: &Cut, y: &Selection) -> Result<f64> {
    y.check_len(cut.coeffs.len())?;
    Ok(cut
        .coeffs
        .iter()
        .zip(y.bits())
        .fold(cut.a0, |acc, (&a, &b)| if b { acc + a } else { acc }))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingStrategy {
    /// Ascending edge id.
    #[default]
    Index,
    /// Ascending `γ({e}, ∅)`, ties by id.
    Gamma,
}

/// The order in which the edges of `Z∖Ȳ` are lifted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftOrdering {
    pub order: Vec<FragileEdgeId>,
    pub strategy: OrderingStrategy,
}

impl LiftOrdering {
    pub fn by_index(incumbent: &Selection) -> Self {
        LiftOrdering {
            order: (0..incumbent.len()).filter(|&e| !incumbent.get(e)).collect(),
            strategy: OrderingStrategy::Index,
        }
    }

    /// Sorts `Z∖Ȳ` by the single-edge values of a new cut at the same
    /// incumbent, so no additional oracle calls are needed.
    pub fn by_gamma_ascending(new_cut: &Cut) -> Result<Self> {
        if new_cut.family != CutFamily::New || new_cut.gamma_values.len() != new_cut.coeffs.len() {
            return Err(Error::InvalidOrdering(
                "gamma ordering needs the oracle values of a new cut".into(),
            ));
        }
        let y = &new_cut.incumbent;
        let mut order: Vec<_> = (0..y.len()).filter(|&e| !y.get(e)).collect();
        order.sort_by(|&a, &b| {
            new_cut.gamma_values[a]
                .total_cmp(&new_cut.gamma_values[b])
                .then(a.cmp(&b))
        });
        Ok(LiftOrdering {
            order,
            strategy: OrderingStrategy::Gamma,
        })
    }

    /// Must be a permutation of `Z∖Ȳ`.
    pub fn check(&self, incumbent: &Selection) -> Result<()> {
        let mut seen = vec![false; incumbent.len()];
        for &e in &self.order {
            if e >= incumbent.len() {
                return Err(Error::InvalidOrdering(format!("edge id {e} out of range")));
            }
            if incumbent.get(e) {
                return Err(Error::InvalidOrdering(format!(
                    "edge {e} belongs to the incumbent's support"
                )));
            }
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::InvalidOrdering(format!("edge {e} listed twice")));
            }
        }
        let off_support = (0..incumbent.len()).filter(|&e| !incumbent.get(e)).count();
        if self.order.len() != off_support {
            return Err(Error::InvalidOrdering(format!(
                "ordering has {} edges, expected {off_support}",
                self.order.len()
            )));
        }
        Ok(())
    }
}

/// `min{0, d}` with no tolerance.
fn clip(d: f64) -> f64 {
    if d < 0.0 {
        d
    } else {
        0.0
    }
}

/// L-shaped cut with global lower bound `l` (any `l ≤ min fr`; 0 is legal).
pub fn l_shaped_cut(instance: &Instance, incumbent: &Selection, l: f64) -> Result<Cut> {
    incumbent.check_len(instance.fragile_count())?;
    let fr = first_return_time(instance, incumbent)?;
    if l > fr + L_SLACK {
        return Err(Error::LTooLarge { l, fr });
    }
    let raw = vec![l - fr; incumbent.len()];
    Ok(Cut::from_incumbent_form(
        CutFamily::LShaped,
        incumbent,
        fr,
        raw,
        0,
        Vec::new(),
    ))
}

/// One single-edge oracle call per fragile edge.
pub fn new_cut(instance: &Instance, incumbent: &Selection) -> Result<Cut> {
    incumbent.check_len(instance.fragile_count())?;
    let fr = first_return_time(instance, incumbent)?;
    let mut raw = Vec::with_capacity(incumbent.len());
    let mut gammas = Vec::with_capacity(incumbent.len());
    for e in 0..incumbent.len() {
        let query = if incumbent.get(e) {
            GammaQuery::edge_off(e)
        } else {
            GammaQuery::edge_on(e)
        };
        let g = gamma(instance, &query)?.value;
        gammas.push(g);
        raw.push(clip(g - fr));
    }
    let calls = incumbent.len();
    Ok(Cut::from_incumbent_form(
        CutFamily::New,
        incumbent,
        fr,
        raw,
        calls,
        gammas,
    ))
}

/// Sequentially lifted cut: `|Ȳ|` calls for the support plus one per
/// lifted edge.
pub fn lifted_cut(instance: &Instance, incumbent: &Selection, ordering: &LiftOrdering) -> Result<Cut> {
    incumbent.check_len(instance.fragile_count())?;
    ordering.check(incumbent)?;
    let fr = first_return_time(instance, incumbent)?;
    let z = incumbent.len();
    let mut raw = vec![0.0; z];
    let mut gammas = vec![0.0; z];
    let mut calls = 0;
    for e in incumbent.support() {
        let g = gamma(instance, &GammaQuery::edge_off(e))?.value;
        calls += 1;
        gammas[e] = g;
        raw[e] = clip(g - fr);
    }
    for (r, &e) in ordering.order.iter().enumerate() {
        let query = GammaQuery::new([e], ordering.order[r + 1..].iter().copied());
        let g = gamma(instance, &query)?.value;
        calls += 1;
        gammas[e] = g;
        raw[e] = clip(g - fr);
    }
    Ok(Cut::from_incumbent_form(
        CutFamily::Lifted,
        incumbent,
        fr,
        raw,
        calls,
        gammas,
    ))
}
