//! Exhaustive Euclidean path sums on small lattices, used as an independent
//! oracle for the redundancy-induced weights.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{LocalCost, Potential};
use crate::numeric::{normalize, pairwise_sum};
use crate::redundancy::{weight_table, RedundancyProfile};
use crate::{Error, Result};

pub const HISTORY_LIMIT: u128 = 10_000_000;

/// Scalar lattice: `steps` segments of width `epsilon`, fixed endpoints,
/// every interior node ranging over `grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub steps: usize,
    pub epsilon: f64,
    pub grid: Vec<f64>,
    pub x_initial: f64,
    pub x_final: f64,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<usize> {
        if self.steps == 0 || !(self.epsilon > 0.0) || self.grid.is_empty() {
            return Err(Error::InvalidInput("lattice needs steps >= 1, epsilon > 0 and a nonempty grid".into()));
        }
        let count = (self.grid.len() as u128).checked_pow(self.steps as u32 - 1).unwrap_or(u128::MAX);
        if count > HISTORY_LIMIT {
            return Err(Error::TooLarge { count, limit: HISTORY_LIMIT });
        }
        Ok(count as usize)
    }

    pub fn interior(&self) -> usize {
        self.steps - 1
    }

    /// History number `index`; the first interior node is the most significant digit.
    pub fn history(&self, index: usize) -> Vec<f64> {
        let m = self.grid.len();
        let k = self.interior();
        let mut nodes = vec![0.0; k + 2];
        nodes[0] = self.x_initial;
        nodes[k + 1] = self.x_final;
        let mut code = index;
        for slot in (1..=k).rev() {
            nodes[slot] = self.grid[code % m];
            code /= m;
        }
        nodes
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// `V((x_{k-1} + x_k) / 2)`.
    #[default]
    Midpoint,
    /// `(V(x_{k-1}) + V(x_k)) / 2`.
    Endpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub mass: f64,
    #[serde(default = "zero_potential")]
    pub potential: Potential,
    #[serde(default)]
    pub rule: Discretization,
}

fn zero_potential() -> Potential {
    Potential::Zero
}

impl ActionSpec {
    pub fn free(mass: f64) -> Self {
        Self { mass, potential: Potential::Zero, rule: Discretization::Midpoint }
    }

    pub fn step_action(&self, a: f64, b: f64, epsilon: f64) -> f64 {
        let v = (b - a) / epsilon;
        let pot = match self.rule {
            Discretization::Midpoint => self.potential.value(0.5 * (a + b)),
            Discretization::Endpoint => 0.5 * (self.potential.value(a) + self.potential.value(b)),
        };
        (0.5 * self.mass * v * v + pot) * epsilon
    }

    /// The same action as a local segment cost (midpoint rule only).
    pub fn local_cost(&self, epsilon: f64) -> Result<LocalCost> {
        match self.rule {
            Discretization::Midpoint => {
                Ok(LocalCost::KineticPotential { mass: self.mass, step: epsilon, potential: self.potential.clone() })
            }
            Discretization::Endpoint => Err(Error::InvalidInput("endpoint rule has no built-in local cost".into())),
        }
    }
}

/// `sum_k [ (m/2) ((x_k - x_{k-1}) / eps)^2 + V(.) ] eps`.
pub fn euclidean_action(history: &[f64], action: &ActionSpec, epsilon: f64) -> f64 {
    history.windows(2).map(|w| action.step_action(w[0], w[1], epsilon)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveMeasure {
    pub lattice: LatticeSpec,
    pub hbar: f64,
    /// `S_E` of history `i`, in `LatticeSpec::history` order.
    pub actions: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// `ln sum_x exp(-S_E[x] / hbar)`.
    pub log_partition: f64,
}

pub fn lattice_actions(lattice: &LatticeSpec, action: &ActionSpec) -> Result<Vec<f64>> {
    let count = lattice.validate()?;
    if !(action.mass > 0.0) {
        return Err(Error::InvalidInput("mass must be positive".into()));
    }
    let m = lattice.grid.len();
    let chunk = (count / m).max(1);
    // one task per leading node value; results concatenate in index order
    let parts: Vec<Vec<f64>> = (0..count.div_ceil(chunk))
        .into_par_iter()
        .map(|part| {
            let end = ((part + 1) * chunk).min(count);
            (part * chunk..end).map(|i| euclidean_action(&lattice.history(i), action, lattice.epsilon)).collect()
        })
        .collect();
    Ok(parts.concat())
}

pub fn exhaustive_measure(lattice: &LatticeSpec, action: &ActionSpec, hbar: f64) -> Result<ExhaustiveMeasure> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidInput(format!("hbar {hbar} must be positive")));
    }
    let actions = lattice_actions(lattice, action)?;
    let s_min = actions.iter().copied().fold(f64::INFINITY, f64::min);
    let mut probabilities: Vec<f64> = actions.iter().map(|s| (-(s - s_min) / hbar).exp()).collect();
    let total = normalize(&mut probabilities);
    Ok(ExhaustiveMeasure {
        lattice: lattice.clone(),
        hbar,
        log_partition: total.ln() - s_min / hbar,
        actions,
        probabilities,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbarFit {
    pub hbar_eff: f64,
    /// Slope of `-ln P` against `S_E`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares fit of `-ln P = S_E / hbar + const`.
pub fn hbar_eff_fit(samples: &[(f64, f64)]) -> Result<HbarFit> {
    if let Some((s, p)) = samples.iter().find(|(s, p)| !(*p > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidInput(format!("sample (S={s}, P={p}) needs finite S and P > 0")));
    }
    let mut distinct: Vec<f64> = samples.iter().map(|(s, _)| *s).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Unidentifiable("need at least two distinct action values".into()));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|(s, _)| *s).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, p)| -p.ln()).collect();
    let mx = pairwise_sum(&xs) / n;
    let my = pairwise_sum(&ys) / n;
    let sxx = pairwise_sum(&xs.iter().map(|x| (x - mx) * (x - mx)).collect::<Vec<_>>());
    let sxy = pairwise_sum(&xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).collect::<Vec<_>>());
    let syy = pairwise_sum(&ys.iter().map(|y| (y - my) * (y - my)).collect::<Vec<_>>());
    if !(sxx > 0.0) {
        return Err(Error::Unidentifiable("zero variance in action values".into()));
    }
    let slope = sxy / sxx;
    if slope == 0.0 {
        return Err(Error::Unidentifiable("probabilities do not depend on the action".into()));
    }
    let intercept = my - slope * mx;
    let sse = pairwise_sum(&xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).collect::<Vec<_>>());
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(HbarFit { hbar_eff: 1.0 / slope, slope, intercept, r_squared, samples: samples.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureRow {
    pub index: usize,
    pub s_e: f64,
    pub p_redundancy: f64,
    pub p_euclidean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    pub ceiling: f64,
    pub alpha: f64,
    pub boundary: f64,
    pub lambda: f64,
    pub hbar_eff: f64,
    pub max_cost: f64,
    /// `floor(K - max l)`.
    pub min_budget: u64,
    pub tv_distance: f64,
    pub tail_bound: f64,
    pub within_bound: bool,
    #[serde(skip)]
    pub rows: Vec<ClosureRow>,
}

/// Lattice costs `l[x] = alpha S_E[x] + boundary` and the matching Euclidean measure.
#[derive(Debug, Clone)]
pub struct ClosureSetup {
    pub measure: ExhaustiveMeasure,
    pub alpha: f64,
    pub boundary: f64,
}

impl ClosureSetup {
    pub fn new(
        lattice: &LatticeSpec,
        action: &ActionSpec,
        alpha: f64,
        boundary: f64,
        profile: &RedundancyProfile,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!("alpha {alpha} must be positive")));
        }
        let measure = exhaustive_measure(lattice, action, 1.0 / (alpha * profile.lambda()))?;
        let setup = Self { measure, alpha, boundary };
        if let Some(neg) = setup.costs().into_iter().find(|l| *l < 0.0) {
            return Err(Error::InvalidInput(format!("cost {neg} is negative; raise the boundary term")));
        }
        Ok(setup)
    }

    pub fn costs(&self) -> Vec<f64> {
        self.measure.actions.iter().map(|s| self.alpha * s + self.boundary).collect()
    }

    pub fn max_cost(&self) -> f64 {
        self.costs().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check(&self, profile: &RedundancyProfile, ceiling: f64) -> Result<ClosureReport> {
        let costs: Vec<(String, f64)> = self.costs().into_iter().enumerate().map(|(i, l)| (i.to_string(), l)).collect();
        let max_cost = costs.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        let table = weight_table(profile, &costs, Some(ceiling), true)?;
        let rows: Vec<ClosureRow> = table
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| ClosureRow {
                index: i,
                s_e: self.measure.actions[i],
                p_redundancy: e.probability,
                p_euclidean: self.measure.probabilities[i],
            })
            .collect();
        let diffs: Vec<f64> = rows.iter().map(|r| (r.p_redundancy - r.p_euclidean).abs()).collect();
        let tv_distance = 0.5 * pairwise_sum(&diffs);
        let min_budget = (ceiling - max_cost).floor() as u64;
        let tail_bound = profile.tail_bound(min_budget)?;
        Ok(ClosureReport {
            ceiling,
            alpha: self.alpha,
            boundary: self.boundary,
            lambda: profile.lambda(),
            hbar_eff: self.measure.hbar,
            max_cost,
            min_budget,
            tv_distance,
            tail_bound,
            within_bound: tv_distance <= tail_bound,
            rows,
        })
    }
}

pub fn closure_check(
    lattice: &LatticeSpec,
    action: &ActionSpec,
    alpha: f64,
    boundary: f64,
    profile: &RedundancyProfile,
    ceiling: f64,
) -> Result<ClosureReport> {
    ClosureSetup::new(lattice, action, alpha, boundary, profile)?.check(profile, ceiling)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureSweep {
    pub points: Vec<ClosureReport>,
    /// TV distance never increases with K (up to rounding at the 1e-15 level).
    pub monotone: bool,
}

pub fn closure_sweep(setup: &ClosureSetup, profile: &RedundancyProfile, ceilings: &[f64]) -> Result<ClosureSweep> {
    let points: Vec<ClosureReport> = ceilings.iter().map(|&k| setup.check(profile, k)).collect::<Result<_>>()?;
    let mut sorted: Vec<&ClosureReport> = points.iter().collect();
    sorted.sort_by(|a, b| a.ceiling.total_cmp(&b.ceiling));
    let monotone = sorted.windows(2).all(|w| w[1].tv_distance <= w[0].tv_distance + 1e-15);
    Ok(ClosureSweep { points, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferCheck {
    pub log_partition_enumerated: f64,
    pub log_partition_transfer: f64,
    pub relative_deviation: f64,
}

/// Compares the enumerated partition function with `(T^N)[x_i, x_f]` for the
/// one-step kernel `T[a, b] = exp(-S_step(a, b) / hbar)` on the grid.
pub fn transfer_check(lattice: &LatticeSpec, action: &ActionSpec, hbar: f64) -> Result<TransferCheck> {
    let find = |x: f64| lattice.grid.iter().position(|g| *g == x);
    let (Some(i), Some(f)) = (find(lattice.x_initial), find(lattice.x_final)) else {
        return Err(Error::InvalidInput("endpoints must be grid values for the transfer check".into()));
    };
    let measure = exhaustive_measure(lattice, action, hbar)?;
    let m = lattice.grid.len();
    let kernel = DMatrix::from_fn(m, m, |a, b| {
        (-action.step_action(lattice.grid[a], lattice.grid[b], lattice.epsilon) / hbar).exp()
    });
    let mut power = DMatrix::identity(m, m);
    for _ in 0..lattice.steps {
        power = &power * &kernel;
    }
    let log_partition_transfer = power[(i, f)].ln();
    Ok(TransferCheck {
        log_partition_enumerated: measure.log_partition,
        log_partition_transfer,
        relative_deviation: (measure.log_partition - log_partition_transfer).exp_m1().abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::JunkRule;

    fn lattice(steps: usize, grid: Vec<f64>, xi: f64, xf: f64) -> LatticeSpec {
        LatticeSpec { steps, epsilon: 1.0, grid, x_initial: xi, x_final: xf }
    }

    #[test]
    fn action_examples() {
        let free = ActionSpec::free(1.0);
        assert_eq!(euclidean_action(&[0.0, 1.0, 2.0], &free, 1.0), 1.0);
        assert_eq!(euclidean_action(&[0.7, 0.7, 0.7], &free, 1.0), 0.0);
        let harmonic =
            ActionSpec { mass: 1.0, potential: Potential::Harmonic { k: 1.0 }, rule: Discretization::Midpoint };
        assert_eq!(euclidean_action(&[0.0, 1.0], &harmonic, 1.0), 0.625);
        let lc = harmonic.local_cost(1.0).unwrap();
        assert_eq!(lc.value(&[0.0], &[1.0]), 0.625);
    }

    #[test]
    fn measure_examples() {
        let single = exhaustive_measure(&lattice(3, vec![0.4], 0.0, 0.0), &ActionSpec::free(1.0), 1.0).unwrap();
        assert_eq!(single.probabilities, vec![1.0]);

        let quartic = ActionSpec {
            mass: 1.0,
            potential: Potential::Polynomial { coeffs: vec![0.0, 0.0, -1.0, 0.0, 1.0] },
            rule: Discretization::Midpoint,
        };
        let sym = exhaustive_measure(&lattice(2, vec![-0.5, 0.5], 0.0, 0.0), &quartic, 0.7).unwrap();
        assert!((sym.probabilities[0] - sym.probabilities[1]).abs() < 1e-15);

        let grid = vec![-1.0, 0.0, 1.0];
        let m = exhaustive_measure(&lattice(2, grid.clone(), 0.0, 1.0), &ActionSpec::free(1.0), 1.0).unwrap();
        let weights: Vec<f64> = grid.iter().map(|y| (-(0.5 * y * y + 0.5 * (1.0 - y) * (1.0 - y))).exp()).collect();
        let z: f64 = weights.iter().sum();
        for (p, w) in m.probabilities.iter().zip(&weights) {
            assert!((p - w / z).abs() < 1e-15);
        }
        assert!((m.log_partition - z.ln()).abs() < 1e-14);
    }

    #[test]
    fn guard_rejects_large_lattices() {
        let big = lattice(9, (0..11).map(f64::from).collect(), 0.0, 0.0);
        assert!(matches!(big.validate(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn hbar_fit_examples() {
        let samples: Vec<(f64, f64)> =
            [0.1, 0.4, 1.3, 2.2, 3.0].iter().map(|&s: &f64| (s, (-s / 0.5f64).exp() * 0.3)).collect();
        let fit = hbar_eff_fit(&samples).unwrap();
        assert!((fit.hbar_eff - 0.5).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let two = hbar_eff_fit(&[(0.0, 1.0), (1.0, (-1.0f64).exp())]).unwrap();
        assert!((two.hbar_eff - 1.0).abs() < 1e-12);

        assert!(matches!(hbar_eff_fit(&[(1.0, 0.5), (1.0, 0.2)]), Err(Error::Unidentifiable(_))));
        assert!(matches!(hbar_eff_fit(&[(1.0, 0.5), (2.0, 0.0)]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn hbar_fit_through_redundancy_weights() {
        let profile = RedundancyProfile::from_rule(JunkRule::unconstrained(3)).unwrap();
        let lat = lattice(3, vec![-1.0, -0.5, 0.0, 0.5, 1.0], 0.0, 0.5);
        let actions = lattice_actions(&lat, &ActionSpec::free(1.0)).unwrap();
        let costs: Vec<(String, f64)> = actions.iter().enumerate().map(|(i, s)| (i.to_string(), 2.0 * s)).collect();
        let table = weight_table(&profile, &costs, None, true).unwrap();
        let samples: Vec<(f64, f64)> = actions.iter().zip(table.probabilities()).map(|(s, p)| (*s, p)).collect();
        let fit = hbar_eff_fit(&samples).unwrap();
        assert!((fit.hbar_eff - 1.0 / (2.0 * 3f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn closure_examples() {
        let profile = RedundancyProfile::from_rule(JunkRule::unconstrained(2)).unwrap();
        let lat = lattice(3, vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5], 0.0, 0.5);
        let action = ActionSpec::free(1.0);
        let setup = ClosureSetup::new(&lat, &action, 1.0, 0.0, &profile).unwrap();
        let k = setup.max_cost() + 60.0;
        let report = setup.check(&profile, k).unwrap();
        assert!(report.tv_distance < 1e-15, "{}", report.tv_distance);
        assert!(report.within_bound);

        let shifted = closure_check(&lat, &action, 1.0, 7.0, &profile, k + 7.0).unwrap();
        for (a, b) in report.rows.iter().zip(&shifted.rows) {
            assert!((a.p_redundancy - b.p_redundancy).abs() < 1e-15);
        }

        let ks: Vec<f64> = (0..=12).map(|i| setup.max_cost() + i as f64 * 2.0).collect();
        let sweep = closure_sweep(&setup, &profile, &ks).unwrap();
        assert!(sweep.monotone);
        assert!(sweep.points[0].tv_distance > sweep.points[12].tv_distance);
        assert!(sweep.points.iter().all(|p| p.within_bound));
    }

    #[test]
    fn transfer_matrix_matches_enumeration() {
        let grid: Vec<f64> = (-3..=3).map(|i| i as f64 * 0.5).collect();
        let lat = LatticeSpec { steps: 4, epsilon: 0.5, grid, x_initial: 0.0, x_final: 1.0 };
        let r = transfer_check(&lat, &ActionSpec::free(1.0), 0.8).unwrap();
        assert!(r.relative_deviation < 1e-13);
    }

    #[test]
    fn reflection_symmetry() {
        let grid: Vec<f64> = (-2..=2).map(|i| i as f64 * 0.5).collect();
        let harmonic =
            ActionSpec { mass: 1.0, potential: Potential::Harmonic { k: 2.0 }, rule: Discretization::Midpoint };
        let lat = lattice(4, grid.clone(), 0.0, 0.0);
        let m = exhaustive_measure(&lat, &harmonic, 1.0).unwrap();
        let n = grid.len();
        for i in 0..m.probabilities.len() {
            let h = lat.history(i);
            // index of the mirrored history: digit d -> n - 1 - d
            let mirror = h[1..h.len() - 1].iter().fold(0, |acc, x| {
                let d = grid.iter().position(|g| *g == -x).unwrap();
                acc * n + d
            });
            assert!((m.probabilities[i] - m.probabilities[mirror]).abs() < 1e-15);
        }
    }
}
