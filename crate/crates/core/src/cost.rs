//! Built-in local segment costs `l(a, b)` with analytic gradients.
//!
//! Costs are small expression trees over a handful of primitives so that
//! both descriptive costs and reference Lagrangians can be written as JSON
//! and differentiated exactly.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Single-variable potential, applied to every coordinate and summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    /// `V(x) = k x^2 / 2`.
    Harmonic {
        k: f64,
    },
    /// `V(x) = sum_i coeffs[i] x^i`.
    Polynomial {
        coeffs: Vec<f64>,
    },
}

impl Potential {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { k } => 0.5 * k * x * x,
            Potential::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { k } => k * x,
            Potential::Polynomial { coeffs } => {
                coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
            }
        }
    }

    /// Even potentials are symmetric under `x -> -x`.
    pub fn is_even(&self) -> bool {
        match self {
            Potential::Zero | Potential::Harmonic { .. } => true,
            Potential::Polynomial { coeffs } => coeffs.iter().skip(1).step_by(2).all(|c| *c == 0.0),
        }
    }

    fn sum(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.value(xi)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalCost {
    /// `m |b - a|^2 / (2 eps)`.
    QuadraticKinetic {
        mass: f64,
        step: f64,
    },
    /// Kinetic term plus `eps * V((a + b) / 2)`.
    KineticPotential {
        mass: f64,
        step: f64,
        potential: Potential,
    },
    /// Natural cubic spline through `(u, value)` knots, `u = |b - a|^2`.
    Table {
        knots: Vec<[f64; 2]>,
    },
    Constant {
        value: f64,
    },
    Scaled {
        factor: f64,
        inner: Box<LocalCost>,
    },
    Shifted {
        offset: f64,
        inner: Box<LocalCost>,
    },
    Squared {
        inner: Box<LocalCost>,
    },
    /// `inner(a, b) + G(b) - G(a)` with `G` a per-coordinate potential.
    Boundary {
        inner: Box<LocalCost>,
        gauge: Potential,
    },
    Sum {
        terms: Vec<LocalCost>,
    },
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum()
}

impl LocalCost {
    pub fn kinetic(mass: f64, step: f64) -> Self {
        LocalCost::QuadraticKinetic { mass, step }
    }

    pub fn scaled(self, factor: f64) -> Self {
        LocalCost::Scaled { factor, inner: Box::new(self) }
    }

    pub fn shifted(self, offset: f64) -> Self {
        LocalCost::Shifted { offset, inner: Box::new(self) }
    }

    pub fn squared(self) -> Self {
        LocalCost::Squared { inner: Box::new(self) }
    }

    pub fn with_boundary(self, gauge: Potential) -> Self {
        LocalCost::Boundary { inner: Box::new(self), gauge }
    }

    /// Parses either inline JSON or a path to a JSON file.
    pub fn from_json_or_path(arg: &str) -> Result<Self> {
        let text = if arg.trim_start().starts_with('{') {
            arg.to_string()
        } else {
            std::fs::read_to_string(arg).map_err(|e| Error::InvalidInput(format!("{arg}: {e}")))?
        };
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("cost spec: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LocalCost::QuadraticKinetic { mass, step } | LocalCost::KineticPotential { mass, step, .. } => {
                if !(*mass > 0.0 && *step > 0.0) {
                    return Err(Error::InvalidInput("mass and step must be positive".into()));
                }
                Ok(())
            }
            LocalCost::Table { knots } => {
                if knots.len() < 2 || knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::InvalidInput("table needs >= 2 strictly increasing knots".into()));
                }
                Ok(())
            }
            LocalCost::Constant { .. } => Ok(()),
            LocalCost::Scaled { inner, .. }
            | LocalCost::Shifted { inner, .. }
            | LocalCost::Squared { inner }
            | LocalCost::Boundary { inner, .. } => inner.validate(),
            LocalCost::Sum { terms } => terms.iter().try_for_each(|t| t.validate()),
        }
    }

    pub fn value(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            LocalCost::QuadraticKinetic { mass, step } => 0.5 * mass * squared_distance(a, b) / step,
            LocalCost::KineticPotential { mass, step, potential } => {
                let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
                0.5 * mass * squared_distance(a, b) / step + step * potential.sum(&mid)
            }
            LocalCost::Table { knots } => Spline::new(knots).value(squared_distance(a, b)),
            LocalCost::Constant { value } => *value,
            LocalCost::Scaled { factor, inner } => factor * inner.value(a, b),
            LocalCost::Shifted { offset, inner } => inner.value(a, b) + offset,
            LocalCost::Squared { inner } => inner.value(a, b).powi(2),
            LocalCost::Boundary { inner, gauge } => inner.value(a, b) + gauge.sum(b) - gauge.sum(a),
            LocalCost::Sum { terms } => terms.iter().map(|t| t.value(a, b)).sum(),
        }
    }

    /// `(d/da, d/db)`.
    pub fn gradient(&self, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = a.len();
        match self {
            LocalCost::QuadraticKinetic { mass, step } => {
                let gb: Vec<f64> = a.iter().zip(b).map(|(x, y)| mass * (y - x) / step).collect();
                (gb.iter().map(|g| -g).collect(), gb)
            }
            LocalCost::KineticPotential { mass, step, potential } => {
                let mut ga = vec![0.0; d];
                let mut gb = vec![0.0; d];
                for i in 0..d {
                    let kinetic = mass * (b[i] - a[i]) / step;
                    let force = 0.5 * step * potential.derivative(0.5 * (a[i] + b[i]));
                    ga[i] = -kinetic + force;
                    gb[i] = kinetic + force;
                }
                (ga, gb)
            }
            LocalCost::Table { knots } => {
                let slope = Spline::new(knots).derivative(squared_distance(a, b));
                let gb: Vec<f64> = a.iter().zip(b).map(|(x, y)| 2.0 * slope * (y - x)).collect();
                (gb.iter().map(|g| -g).collect(), gb)
            }
            LocalCost::Constant { .. } => (vec![0.0; d], vec![0.0; d]),
            LocalCost::Scaled { factor, inner } => {
                let (ga, gb) = inner.gradient(a, b);
                (scale(ga, *factor), scale(gb, *factor))
            }
            LocalCost::Shifted { inner, .. } => inner.gradient(a, b),
            LocalCost::Squared { inner } => {
                let v = inner.value(a, b);
                let (ga, gb) = inner.gradient(a, b);
                (scale(ga, 2.0 * v), scale(gb, 2.0 * v))
            }
            LocalCost::Boundary { inner, gauge } => {
                let (mut ga, mut gb) = inner.gradient(a, b);
                for i in 0..d {
                    ga[i] -= gauge.derivative(a[i]);
                    gb[i] += gauge.derivative(b[i]);
                }
                (ga, gb)
            }
            LocalCost::Sum { terms } => {
                let mut ga = vec![0.0; d];
                let mut gb = vec![0.0; d];
                for t in terms {
                    let (ta, tb) = t.gradient(a, b);
                    ga.iter_mut().zip(ta).for_each(|(g, x)| *g += x);
                    gb.iter_mut().zip(tb).for_each(|(g, x)| *g += x);
                }
                (ga, gb)
            }
        }
    }
}

fn scale(mut v: Vec<f64>, factor: f64) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x *= factor);
    v
}

/// Natural cubic spline with linear extrapolation.
struct Spline<'a> {
    knots: &'a [[f64; 2]],
    second: Vec<f64>,
}

impl<'a> Spline<'a> {
    fn new(knots: &'a [[f64; 2]]) -> Self {
        let n = knots.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for interior second derivatives
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = knots[i][0] - knots[i - 1][0];
                let h1 = knots[i + 1][0] - knots[i][0];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((knots[i + 1][1] - knots[i][1]) / h1 - (knots[i][1] - knots[i - 1][1]) / h0);
                if i > 1 {
                    let lower = h0;
                    let m = lower / diag[i - 1];
                    diag[i] -= m * upper[i - 1];
                    rhs[i] -= m * rhs[i - 1];
                }
            }
            for i in (1..n - 1).rev() {
                let next = if i + 1 < n - 1 { second[i + 1] } else { 0.0 };
                second[i] = (rhs[i] - upper[i] * next) / diag[i];
            }
        }
        Self { knots, second }
    }

    fn interval(&self, u: f64) -> usize {
        let n = self.knots.len();
        match self.knots.partition_point(|k| k[0] <= u) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    fn value(&self, u: f64) -> f64 {
        let k = self.knots;
        let n = k.len();
        if u < k[0][0] {
            return k[0][1] + self.derivative(k[0][0]) * (u - k[0][0]);
        }
        if u > k[n - 1][0] {
            return k[n - 1][1] + self.derivative(k[n - 1][0]) * (u - k[n - 1][0]);
        }
        let i = self.interval(u);
        let h = k[i + 1][0] - k[i][0];
        let t0 = k[i + 1][0] - u;
        let t1 = u - k[i][0];
        self.second[i] * t0.powi(3) / (6.0 * h)
            + self.second[i + 1] * t1.powi(3) / (6.0 * h)
            + (k[i][1] / h - self.second[i] * h / 6.0) * t0
            + (k[i + 1][1] / h - self.second[i + 1] * h / 6.0) * t1
    }

    fn derivative(&self, u: f64) -> f64 {
        let k = self.knots;
        let n = k.len();
        let u = u.clamp(k[0][0], k[n - 1][0]);
        let i = self.interval(u);
        let h = k[i + 1][0] - k[i][0];
        let t0 = k[i + 1][0] - u;
        let t1 = u - k[i][0];
        -self.second[i] * t0 * t0 / (2.0 * h) + self.second[i + 1] * t1 * t1 / (2.0 * h) + (k[i + 1][1] - k[i][1]) / h
            - (self.second[i + 1] - self.second[i]) * h / 6.0
    }
}
