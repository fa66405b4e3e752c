//! Junk-sector multiplicities under a length ceiling and the weights they induce.
//!
//! For a history of cost `l` and ceiling `K` the admissible junk lengths are
//! `L <= K - l`, so the multiplicity is the cumulative count
//! `W = sum_{L <= floor(K - l)} N(L)`, kept as an exact integer. When `K - l`
//! has a fractional part `f` the remaining budget is spent at the asymptotic
//! branching rate, i.e. the effective multiplicity is `W(floor) * gamma^f`.
//! For integer costs this factor is exactly 1.

use std::sync::Mutex;

use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::LocalCost;
use crate::grammar::JunkRule;
use crate::numeric::{big_ratio, ln_big, normalize, pairwise_sum, ratio_to_f64, rational_to_f64};
use crate::variational::{stationary_set, NewtonOptions, StationarySolver};
use crate::{Error, Result};

/// Growth data of a junk sector plus memoized exact counts.
#[derive(Debug)]
pub struct RedundancyProfile {
    rule: Option<JunkRule>,
    gamma: f64,
    lambda: f64,
    // cumulative[m] = sum_{L <= m} N(L)
    cumulative: Mutex<Vec<BigUint>>,
}

impl Clone for RedundancyProfile {
    fn clone(&self) -> Self {
        Self {
            rule: self.rule.clone(),
            gamma: self.gamma,
            lambda: self.lambda,
            cumulative: Mutex::new(self.cumulative.lock().expect("cache lock").clone()),
        }
    }
}

impl RedundancyProfile {
    pub fn from_rule(rule: JunkRule) -> Result<Self> {
        let growth = rule.growth_rate()?;
        Ok(Self { rule: Some(rule), gamma: growth.gamma, lambda: growth.lambda, cumulative: Mutex::new(Vec::new()) })
    }

    /// A profile known only through its exponent; exact counts are unavailable.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("redundancy exponent {lambda} must be positive")));
        }
        Ok(Self { rule: None, gamma: lambda.exp(), lambda, cumulative: Mutex::new(Vec::new()) })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rule(&self) -> Option<&JunkRule> {
        self.rule.as_ref()
    }

    fn require_rule(&self) -> Result<&JunkRule> {
        self.rule
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("profile has no junk rule, exact counts unavailable".into()))
    }

    /// Exact `sum_{L <= max_length} N(L)`.
    pub fn cumulative(&self, max_length: u64) -> Result<BigUint> {
        let rule = self.require_rule()?;
        let m = usize::try_from(max_length).map_err(|_| Error::InvalidInput("junk length too large".into()))?;
        let mut cache = self.cumulative.lock().expect("cache lock");
        if cache.len() <= m {
            let counts = rule.counts_up_to(m);
            let mut acc = BigUint::default();
            cache.clear();
            for c in counts {
                acc += c;
                cache.push(acc.clone());
            }
        }
        Ok(cache[m].clone())
    }

    /// Splits the junk budget `K - l` into whole symbols and a remainder.
    pub fn budget(&self, ell: f64, ceiling: f64) -> Result<(u64, f64)> {
        if !(ell >= 0.0) || !ell.is_finite() {
            return Err(Error::InvalidInput(format!("cost {ell} must be finite and nonnegative")));
        }
        if !(ceiling >= ell) {
            return Err(Error::CeilingTooSmall { ceiling, cost: ell });
        }
        let budget = ceiling - ell;
        let whole = budget.floor();
        Ok((whole as u64, budget - whole))
    }

    pub fn junk_weight(&self, ell: f64, ceiling: f64) -> Result<JunkWeight> {
        let (whole, fraction) = self.budget(ell, ceiling)?;
        let exact = self.cumulative(whole)?;
        let ln_approx = (whole as f64 + 1.0) * self.lambda - (self.gamma - 1.0).ln();
        let ln_exact = ln_big(&exact);
        Ok(JunkWeight {
            ell,
            ceiling,
            max_junk_length: whole,
            fraction,
            approx: ln_approx.exp(),
            exact_over_approx: (ln_exact - ln_approx).exp(),
            ln_effective: ln_exact + fraction * self.lambda,
            exact,
        })
    }

    pub fn relative_weight(&self, ell1: f64, ell2: f64, ceiling: f64) -> Result<WeightRatio> {
        let w1 = self.junk_weight(ell1, ceiling)?;
        let w2 = self.junk_weight(ell2, ceiling)?;
        let integer_ratio = big_ratio(&w1.exact, &w2.exact);
        let fractional_factor = ((w1.fraction - w2.fraction) * self.lambda).exp();
        let value = ratio_to_f64(&w1.exact, &w2.exact) * fractional_factor;
        Ok(WeightRatio { integer_ratio, fractional_factor, value, limit: ((ell2 - ell1) * self.lambda).exp() })
    }

    /// `sup` over `m' >= m` (sampled) of `|W(m') / (A gamma^{m'}) - 1|`,
    /// with the amplitude `A` read off far out in the tail.
    pub fn asymptotic_deviation(&self, max_junk_length: u64) -> Result<f64> {
        let reference = max_junk_length + 160;
        let ln_amp = ln_big(&self.cumulative(reference)?) - reference as f64 * self.lambda;
        let mut worst: f64 = 0.0;
        for m in max_junk_length..=max_junk_length + 8 {
            let ln_w = ln_big(&self.cumulative(m)?) - m as f64 * self.lambda;
            worst = worst.max((ln_w - ln_amp).exp_m1().abs());
        }
        Ok(worst)
    }

    /// Bound on the total-variation distance between junk-count weights and
    /// pure `exp(-Lambda l)` weights when every budget is at least `min_budget`.
    pub fn tail_bound(&self, min_budget: u64) -> Result<f64> {
        let delta = self.asymptotic_deviation(min_budget)?;
        // floor for the log-domain evaluation of the amplitude
        let floor = 64.0 * f64::EPSILON * (min_budget as f64 + 160.0) * self.lambda.max(1.0);
        Ok(2.0 * delta / (1.0 - delta).max(f64::MIN_POSITIVE) + floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JunkWeight {
    pub ell: f64,
    pub ceiling: f64,
    pub max_junk_length: u64,
    pub fraction: f64,
    #[serde(serialize_with = "big_as_string")]
    pub exact: BigUint,
    /// `gamma^{L_max + 1} / (gamma - 1)`; may overflow to infinity.
    pub approx: f64,
    pub exact_over_approx: f64,
    /// `ln W + fraction * Lambda`.
    pub ln_effective: f64,
}

fn big_as_string<S: serde::Serializer>(n: &BigUint, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&n.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightRatio {
    /// `W(floor(K - l1)) / W(floor(K - l2))`.
    pub integer_ratio: BigRational,
    /// `gamma^{f1 - f2}`; exactly 1 when the fractional budgets agree.
    pub fractional_factor: f64,
    pub value: f64,
    /// `gamma^{l2 - l1}`.
    pub limit: f64,
}

impl WeightRatio {
    /// Exact `|integer_ratio - limit|` for an exactly known limit.
    pub fn exact_deviation(&self, limit: &BigRational) -> f64 {
        rational_to_f64(&(&self.integer_ratio - limit)).abs()
    }

    pub fn relative_deviation(&self) -> f64 {
        (self.value / self.limit - 1.0).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightEntry {
    pub id: String,
    pub ell: f64,
    /// Exact junk multiplicity when a ceiling was given.
    #[serde(serialize_with = "opt_big_as_string")]
    pub w_exact: Option<BigUint>,
    /// `exp(-Lambda l)`.
    pub gibbs: f64,
    /// Weight relative to the heaviest entry.
    pub relative: f64,
    pub probability: f64,
}

fn opt_big_as_string<S: serde::Serializer>(n: &Option<BigUint>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match n {
        Some(n) => ser.serialize_some(&n.to_string()),
        None => ser.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightTable {
    pub lambda: f64,
    pub ceiling: Option<f64>,
    pub entries: Vec<WeightEntry>,
}

impl WeightTable {
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }
}

/// Weights for a set of costed histories.
///
/// Without a ceiling the weights are `exp(-Lambda l)`; with one they are the
/// exact junk multiplicities. When `normalize` is false, `probability`
/// carries the relative weight instead.
pub fn weight_table(
    profile: &RedundancyProfile,
    costs: &[(String, f64)],
    ceiling: Option<f64>,
    normalize_weights: bool,
) -> Result<WeightTable> {
    if costs.is_empty() {
        return Err(Error::InvalidInput("empty cost table".into()));
    }
    if let Some((id, ell)) = costs.iter().find(|(_, l)| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidInput(format!("history {id} has invalid cost {ell}")));
    }
    let lambda = profile.lambda();
    let ell_min = costs.iter().map(|(_, l)| *l).fold(f64::INFINITY, f64::min);

    let (w_exact, relative): (Vec<Option<BigUint>>, Vec<f64>) = match ceiling {
        None => costs.iter().map(|(_, l)| (None, (-lambda * (l - ell_min)).exp())).unzip(),
        Some(k) => {
            let weights: Vec<JunkWeight> =
                costs.par_iter().map(|(_, l)| profile.junk_weight(*l, k)).collect::<Result<_>>()?;
            let heaviest = weights
                .iter()
                .max_by(|a, b| a.max_junk_length.cmp(&b.max_junk_length).then(a.fraction.total_cmp(&b.fraction)))
                .expect("nonempty");
            let rel = weights
                .iter()
                .map(|w| ratio_to_f64(&w.exact, &heaviest.exact) * ((w.fraction - heaviest.fraction) * lambda).exp())
                .collect();
            (weights.into_iter().map(|w| Some(w.exact)).collect(), rel)
        }
    };
    let mut probability = relative.clone();
    if normalize_weights {
        normalize(&mut probability);
    }
    let entries = costs
        .iter()
        .zip(w_exact)
        .zip(relative.into_iter().zip(probability))
        .map(|(((id, ell), w_exact), (relative, probability))| WeightEntry {
            id: id.clone(),
            ell: *ell,
            w_exact,
            gibbs: (-lambda * ell).exp(),
            relative,
            probability,
        })
        .collect();
    Ok(WeightTable { lambda, ceiling, entries })
}

/// Normalized `exp(-Lambda l)` over a slice of costs.
pub fn gibbs_distribution(lambda: f64, costs: &[f64]) -> Vec<f64> {
    if lambda.is_infinite() {
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let mut w: Vec<f64> =
            costs.iter().map(|&l| if l <= min + 1e-12 * min.abs().max(1.0) { 1.0 } else { 0.0 }).collect();
        normalize(&mut w);
        return w;
    }
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = costs.iter().map(|&l| (-lambda * (l - min)).exp()).collect();
    normalize(&mut w);
    w
}

/// `hbar_eff = 1 / (alpha Lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmergentScale {
    pub alpha: f64,
    pub lambda: f64,
    pub hbar_eff: f64,
}

impl EmergentScale {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.0 && lambda > 0.0) {
            return Err(Error::InvalidInput(format!("alpha {alpha} and Lambda {lambda} must be positive")));
        }
        Ok(Self { alpha, lambda, hbar_eff: 1.0 / (alpha * lambda) })
    }

    /// `(c alpha, Lambda / c)`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        Self::new(c * self.alpha, self.lambda / c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleRedundancyReport {
    pub c: f64,
    pub max_weight_deviation: f64,
    pub hbar_eff_before: f64,
    pub hbar_eff_after: f64,
    pub hbar_relative_deviation: f64,
}

/// Compares the pipeline at `(l, Lambda, alpha)` with `(c l, Lambda / c, c alpha)`.
pub fn scale_redundancy_check(scale: &EmergentScale, costs: &[f64], c: f64) -> Result<ScaleRedundancyReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("rescaling factor {c} must be positive")));
    }
    let before = gibbs_distribution(scale.lambda, costs);
    let scaled_costs: Vec<f64> = costs.iter().map(|l| c * l).collect();
    let after_scale = scale.rescaled(c)?;
    let after = gibbs_distribution(after_scale.lambda, &scaled_costs);
    let max_weight_deviation = before.iter().zip(&after).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(ScaleRedundancyReport {
        c,
        max_weight_deviation,
        hbar_eff_before: scale.hbar_eff,
        hbar_eff_after: after_scale.hbar_eff,
        hbar_relative_deviation: (after_scale.hbar_eff / scale.hbar_eff - 1.0).abs(),
    })
}

/// Scalar lattice of histories with fixed endpoints and `interior` free nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSetup {
    pub cost: LocalCost,
    pub grid: Vec<f64>,
    pub x_initial: f64,
    pub x_final: f64,
    pub interior: usize,
    /// Neighborhood radius around each stationary configuration (max-norm).
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationPoint {
    pub lambda: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationCurve {
    pub histories: usize,
    pub stationary: Vec<Vec<f64>>,
    pub points: Vec<ConcentrationPoint>,
    pub nondecreasing: bool,
}

pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Probability mass near the stationary set as the weight strength grows.
pub fn concentration_experiment(setup: &ConcentrationSetup, lambdas: &[f64]) -> Result<ConcentrationCurve> {
    let m = setup.grid.len();
    if m == 0 || setup.interior == 0 {
        return Err(Error::InvalidInput("grid and interior node count must be nonempty".into()));
    }
    let count = (m as u128).checked_pow(setup.interior as u32).unwrap_or(u128::MAX);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { count, limit: ENUMERATION_LIMIT });
    }
    let lo = setup.grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = setup.grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let options = NewtonOptions { box_lo: Some(lo), box_hi: Some(hi), ..NewtonOptions::default() };
    let stationary: Vec<Vec<f64>> = stationary_set(
        &setup.cost,
        &[setup.x_initial],
        &[setup.x_final],
        setup.interior + 1,
        &StationarySolver::Newton(options),
    )?
    .into_iter()
    .map(|config| config.into_iter().map(|node| node[0]).collect())
    .collect();

    let count = count as usize;
    let (costs, near): (Vec<f64>, Vec<bool>) = (0..count)
        .into_par_iter()
        .map(|index| {
            let mut code = index;
            let mut path = Vec::with_capacity(setup.interior + 2);
            path.push(setup.x_initial);
            for _ in 0..setup.interior {
                path.push(setup.grid[code % m]);
                code /= m;
            }
            path.push(setup.x_final);
            let ell: f64 = path.windows(2).map(|w| setup.cost.value(&[w[0]], &[w[1]])).sum();
            let interior = &path[1..=setup.interior];
            let near =
                stationary.iter().any(|s| s.iter().zip(interior).all(|(a, b)| (a - b).abs() <= setup.radius + 1e-9));
            (ell, near)
        })
        .unzip();

    let points: Vec<ConcentrationPoint> = lambdas
        .iter()
        .map(|&lambda| {
            let p = gibbs_distribution(lambda, &costs);
            let inside: Vec<f64> = p.iter().zip(&near).filter(|(_, &n)| n).map(|(w, _)| *w).collect();
            ConcentrationPoint { lambda, mass: pairwise_sum(&inside) }
        })
        .collect();
    let mut order: Vec<&ConcentrationPoint> = points.iter().collect();
    order.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let nondecreasing = order.windows(2).all(|w| w[1].mass >= w[0].mass - 1e-12);
    Ok(ConcentrationCurve { histories: count, stationary, points, nondecreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use std::f64::consts::LN_2;

    fn binary() -> RedundancyProfile {
        RedundancyProfile::from_rule(JunkRule::unconstrained(2)).unwrap()
    }

    #[test]
    fn junk_weight_examples() {
        let p = binary();
        let w = p.junk_weight(4.0, 10.0).unwrap();
        assert_eq!(w.exact, BigUint::from(127u32));
        assert!((w.approx - 128.0).abs() < 1e-9);
        assert_eq!(w.fraction, 0.0);

        let w = p.junk_weight(7.5, 7.5).unwrap();
        assert_eq!(w.exact, BigUint::from(1u32));

        let fib = RedundancyProfile::from_rule(JunkRule::no_consecutive_ones()).unwrap();
        let oracle: BigUint = JunkRule::no_consecutive_ones().counts_up_to(5).into_iter().sum();
        assert_eq!(fib.junk_weight(0.0, 5.0).unwrap().exact, oracle);
    }

    #[test]
    fn ceiling_below_cost_is_rejected() {
        assert_eq!(binary().junk_weight(5.0, 4.0).unwrap_err(), Error::CeilingTooSmall { ceiling: 4.0, cost: 5.0 });
    }

    #[test]
    fn relative_weight_examples() {
        let p = binary();
        let r = p.relative_weight(4.0, 6.0, 10.0).unwrap();
        assert_eq!(r.integer_ratio, BigRational::new(BigInt::from(127), BigInt::from(31)));
        assert!((r.value - 127.0 / 31.0).abs() < 1e-15);
        assert!((r.limit - 4.0).abs() < 1e-12);

        for k in [6.0, 10.0, 37.0] {
            assert_eq!(p.relative_weight(6.0, 6.0, k).unwrap().value, 1.0);
        }

        let four = BigRational::from_integer(BigInt::from(4));
        let far = p.relative_weight(4.0, 6.0, 200.0).unwrap();
        assert!(far.exact_deviation(&four) < 1e-40);
        assert!(far.exact_deviation(&four) > 0.0);
    }

    #[test]
    fn fractional_budgets_follow_the_exponential() {
        let p = RedundancyProfile::from_rule(JunkRule::unconstrained(3)).unwrap();
        let r = p.relative_weight(1.3, 2.9, 80.0).unwrap();
        assert!(r.relative_deviation() < 1e-14, "{}", r.relative_deviation());
    }

    #[test]
    fn weight_table_examples() {
        let p = RedundancyProfile::from_lambda(LN_2).unwrap();
        let costs: Vec<(String, f64)> =
            [1.0, 2.0, 3.0].iter().enumerate().map(|(i, &l)| (format!("h{i}"), l)).collect();
        let t = weight_table(&p, &costs, None, true).unwrap();
        let gibbs: Vec<f64> = t.entries.iter().map(|e| e.gibbs).collect();
        for (g, want) in gibbs.iter().zip([0.5, 0.25, 0.125]) {
            assert!((g - want).abs() < 1e-15);
        }
        for (pr, want) in t.probabilities().iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert!((pr - want).abs() < 1e-15);
        }

        let two = weight_table(&p, &[("a".into(), 0.0), ("b".into(), 1.0)], None, true).unwrap();
        assert!((two.entries[0].probability / two.entries[1].probability - 2.0).abs() < 1e-14);

        let flat = weight_table(&p, &[("a".into(), 3.0), ("b".into(), 3.0), ("c".into(), 3.0)], None, true).unwrap();
        assert!(flat.probabilities().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn boundary_shift_cancels() {
        let p = binary();
        let costs = [("a".to_string(), 1.0), ("b".to_string(), 2.5), ("c".to_string(), 4.0)];
        let shifted: Vec<(String, f64)> = costs.iter().map(|(id, l)| (id.clone(), l + 3.0)).collect();
        let t1 = weight_table(&p, &costs, Some(60.0), true).unwrap();
        let t2 = weight_table(&p, &shifted, Some(63.0), true).unwrap();
        for (a, b) in t1.probabilities().iter().zip(t2.probabilities()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn scale_redundancy_examples() {
        let scale = EmergentScale::new(2.0, LN_2).unwrap();
        let costs = [0.0, 0.4, 1.7, 3.2];
        let same = scale_redundancy_check(&scale, &costs, 1.0).unwrap();
        assert_eq!(same.max_weight_deviation, 0.0);
        assert_eq!(same.hbar_relative_deviation, 0.0);
        let r = scale_redundancy_check(&scale, &costs, 3.7).unwrap();
        assert!(r.max_weight_deviation < 1e-12);
        assert!(r.hbar_relative_deviation < 1e-12);
        assert!((scale.hbar_eff * scale.alpha * scale.lambda - 1.0).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn tail_bound_shrinks_with_budget() {
        let p = RedundancyProfile::from_rule(JunkRule::no_consecutive_ones()).unwrap();
        let b10 = p.tail_bound(10).unwrap();
        let b30 = p.tail_bound(30).unwrap();
        assert!(b30 < b10);
        assert!(b10 < 0.1);
    }

    #[test]
    fn zero_strength_is_uniform() {
        let p = gibbs_distribution(0.0, &[0.0, 5.0, 2.0, 9.0]);
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-15));
    }

    fn lattice() -> ConcentrationSetup {
        ConcentrationSetup {
            cost: LocalCost::kinetic(1.0, 0.125),
            grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            x_initial: 0.0,
            x_final: 0.8,
            interior: 3,
            radius: 0.1,
        }
    }

    #[test]
    fn concentration_on_small_lattice() {
        let curve = concentration_experiment(&lattice(), &[0.0, 1.0, 2.0, 5.0, 10.0, 50.0, f64::INFINITY]).unwrap();
        assert_eq!(curve.histories, 1331);
        assert_eq!(curve.stationary.len(), 1);
        for (x, want) in curve.stationary[0].iter().zip([0.2, 0.4, 0.6]) {
            assert!((x - want).abs() < 1e-9);
        }
        assert!(curve.nondecreasing);
        // uniform: 3^3 of the 11^3 configurations sit in the box around (.2, .4, .6)
        assert!((curve.points[0].mass - 27.0 / 1331.0).abs() < 1e-14);
        assert_eq!(curve.points.last().unwrap().mass, 1.0);
        let at5 = curve.points[3].mass;
        assert!((at5 - oracle_mass(5.0)).abs() < 1e-12, "{at5}");
    }

    // independent enumeration with plain nested loops
    fn oracle_mass(lambda: f64) -> f64 {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let (mut inside, mut total) = (0.0, 0.0);
        for &a in &grid {
            for &b in &grid {
                for &c in &grid {
                    let path = [0.0, a, b, c, 0.8];
                    let ell: f64 = path.windows(2).map(|w| 4.0 * (w[1] - w[0]) * (w[1] - w[0])).sum();
                    let w = (-lambda * (ell - 0.64)).exp();
                    total += w;
                    if (a - 0.2).abs() <= 0.1 + 1e-9 && (b - 0.4).abs() <= 0.1 + 1e-9 && (c - 0.6).abs() <= 0.1 + 1e-9 {
                        inside += w;
                    }
                }
            }
        }
        inside / total
    }
}
