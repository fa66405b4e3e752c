//! Two binary variables under the global flip `(a, b) -> (-a, -b)`.
//!
//! Physical histories are the orbits labelled by `W = ab`; a description
//! must emit a concrete representative, and the number of admissible
//! representatives per orbit multiplies the exponential weight.

use serde::{Deserialize, Serialize};

use crate::numeric::normalize;
use crate::{Error, Result};

pub type Spin = i8;
pub type Pair = (Spin, Spin);

const ALL_PAIRS: [Pair; 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

fn check_spin(s: Spin) -> Result<()> {
    if s == 1 || s == -1 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("spin {s} must be +1 or -1")))
    }
}

pub fn orbit_label(a: Spin, b: Spin) -> Result<Spin> {
    check_spin(a)?;
    check_spin(b)?;
    Ok(a * b)
}

/// Both members of the orbit with label `w`.
pub fn orbit(w: Spin) -> Result<[Pair; 2]> {
    check_spin(w)?;
    Ok([(1, w), (-1, -w)])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Keep the representative with `a = +1`.
    RuleA,
    /// Keep `a = b` when possible, both choices otherwise.
    RuleB,
    /// Explicit list of admissible pairs.
    Custom { admissible: Vec<Pair> },
}

impl SelectionRule {
    pub fn from_predicate(pred: impl Fn(Spin, Spin) -> bool) -> Self {
        SelectionRule::Custom { admissible: ALL_PAIRS.into_iter().filter(|&(a, b)| pred(a, b)).collect() }
    }

    pub fn admits(&self, (a, b): Pair) -> bool {
        match self {
            SelectionRule::RuleA => a == 1,
            SelectionRule::RuleB => a == 1 || b == 1,
            SelectionRule::Custom { admissible } => admissible.contains(&(a, b)),
        }
    }

    pub fn admissible(&self) -> Vec<Pair> {
        ALL_PAIRS.into_iter().filter(|&p| self.admits(p)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representatives {
    pub w: Spin,
    pub pairs: Vec<Pair>,
    pub g: usize,
}

pub fn representatives(rule: &SelectionRule, w: Spin) -> Result<Representatives> {
    if let SelectionRule::Custom { admissible } = rule {
        for &(a, b) in admissible {
            orbit_label(a, b)?;
        }
    }
    let pairs: Vec<Pair> = orbit(w)?.into_iter().filter(|&p| rule.admits(p)).collect();
    if pairs.is_empty() {
        return Err(Error::OrbitUncovered { w });
    }
    let mut pairs = pairs;
    pairs.sort_by(|x, y| y.cmp(x));
    Ok(Representatives { w, g: pairs.len(), pairs })
}

/// Minimal representative cost over the whole orbit, independent of any rule.
pub fn orbit_cost(cost: impl Fn(Spin, Spin) -> f64, w: Spin) -> Result<f64> {
    Ok(orbit(w)?.into_iter().map(|(a, b)| cost(a, b)).fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedWeight {
    pub p_plus: f64,
    pub p_minus: f64,
    pub g_plus: usize,
    pub g_minus: usize,
    /// `g(W) exp(-Lambda l(W))` before normalization.
    pub unnormalized_plus: f64,
    pub unnormalized_minus: f64,
}

/// `P(W) ~ g(W) exp(-Lambda l(W))` over `W = +1, -1`.
pub fn induced_weight(rule: &SelectionRule, ell_plus: f64, ell_minus: f64, lambda: f64) -> Result<InducedWeight> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("Lambda {lambda} must be positive")));
    }
    let g_plus = representatives(rule, 1)?.g;
    let g_minus = representatives(rule, -1)?.g;
    let unnormalized_plus = g_plus as f64 * (-lambda * ell_plus).exp();
    let unnormalized_minus = g_minus as f64 * (-lambda * ell_minus).exp();
    // normalize relative to the smaller cost so large costs do not underflow
    let shift = ell_plus.min(ell_minus);
    let mut p =
        [g_plus as f64 * (-lambda * (ell_plus - shift)).exp(), g_minus as f64 * (-lambda * (ell_minus - shift)).exp()];
    normalize(&mut p);
    Ok(InducedWeight { p_plus: p[0], p_minus: p[1], g_plus, g_minus, unnormalized_plus, unnormalized_minus })
}
