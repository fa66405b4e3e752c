//! Discrete Euler-Lagrange operators, stationary sets and the check that two
//! local costs with the same stationary histories differ only by a scale and
//! a telescoping boundary term.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cost::LocalCost;
use crate::{Error, Result};

/// A history is a list of nodes, each a d-vector.
pub type History = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElMethod {
    Analytic,
    CentralDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElOperatorResult {
    pub j: usize,
    pub value: Vec<f64>,
    pub method: ElMethod,
    pub step: Option<f64>,
}

fn fd_step(x: f64) -> f64 {
    1e-5 * (1.0 + x.abs())
}

/// `E_j = d/dx_j [ l(x_{j-1}, x_j) + l(x_j, x_{j+1}) ]` for `1 <= j <= N-1`.
pub fn el_operator(cost: &LocalCost, history: &[Vec<f64>], j: usize, method: ElMethod) -> Result<ElOperatorResult> {
    if history.len() < 3 || j == 0 || j + 1 >= history.len() {
        return Err(Error::IndexError { index: j, max: history.len().saturating_sub(2) });
    }
    let (prev, node, next) = (&history[j - 1], &history[j], &history[j + 1]);
    let (value, step) = match method {
        ElMethod::Analytic => (local_el(cost, prev, node, next), None),
        ElMethod::CentralDifference => {
            let mut x = node.clone();
            let value = (0..node.len())
                .map(|k| {
                    let h = fd_step(node[k]);
                    x[k] = node[k] + h;
                    let up = cost.value(prev, &x) + cost.value(&x, next);
                    x[k] = node[k] - h;
                    let down = cost.value(prev, &x) + cost.value(&x, next);
                    x[k] = node[k];
                    (up - down) / (2.0 * h)
                })
                .collect();
            (value, Some(fd_step(node.iter().fold(0.0, |m: f64, v| m.max(v.abs())))))
        }
    };
    Ok(ElOperatorResult { j, value, method, step })
}

/// EL operator on the local triple `(a, b, c)`, differentiated in `b`.
pub fn local_el(cost: &LocalCost, a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let (_, left) = cost.gradient(a, b);
    let (right, _) = cost.gradient(b, c);
    left.iter().zip(&right).map(|(x, y)| x + y).collect()
}

/// Jacobian of `local_el` in `b` by central differences of the analytic operator.
fn local_el_jacobian(cost: &LocalCost, a: &[f64], b: &[f64], c: &[f64]) -> DMatrix<f64> {
    let d = b.len();
    let mut jac = DMatrix::zeros(d, d);
    let mut x = b.to_vec();
    for k in 0..d {
        let h = 1e-6 * (1.0 + b[k].abs());
        x[k] = b[k] + h;
        let up = local_el(cost, a, &x, c);
        x[k] = b[k] - h;
        let down = local_el(cost, a, &x, c);
        x[k] = b[k];
        for r in 0..d {
            jac[(r, k)] = (up[r] - down[r]) / (2.0 * h);
        }
    }
    jac
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonOptions {
    pub points_per_axis: usize,
    pub max_starts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Search box for starts and accepted roots; derived from the endpoints if absent.
    pub box_lo: Option<f64>,
    pub box_hi: Option<f64>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            points_per_axis: 5,
            max_starts: 4096,
            max_iterations: 100,
            tolerance: 1e-9,
            seed: 0x5eed,
            box_lo: None,
            box_hi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StationarySolver {
    Newton(NewtonOptions),
    /// Every interior coordinate ranges over `grid`.
    ExhaustiveGrid {
        grid: Vec<f64>,
    },
}

pub const GRID_LIMIT: u128 = 10_000_000;
const MERGE_TOLERANCE: f64 = 1e-7;

fn interior_residual(cost: &LocalCost, x_initial: &[f64], x_final: &[f64], flat: &[f64], d: usize) -> Vec<f64> {
    let nodes = flat.len() / d;
    let node = |k: usize| -> &[f64] {
        if k == 0 {
            x_initial
        } else if k == nodes + 1 {
            x_final
        } else {
            &flat[(k - 1) * d..k * d]
        }
    };
    (1..=nodes).flat_map(|k| local_el(cost, node(k - 1), node(k), node(k + 1))).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn newton_solve(
    cost: &LocalCost,
    x_initial: &[f64],
    x_final: &[f64],
    start: Vec<f64>,
    d: usize,
    opts: &NewtonOptions,
) -> Option<Vec<f64>> {
    let n = start.len();
    let mut x = start;
    let mut f = interior_residual(cost, x_initial, x_final, &x, d);
    let mut norm = max_abs(&f);
    for _ in 0..opts.max_iterations {
        if norm < opts.tolerance * 0.01 {
            break;
        }
        let mut jac = DMatrix::zeros(n, n);
        let mut probe = x.clone();
        for k in 0..n {
            let h = 1e-6 * (1.0 + x[k].abs());
            probe[k] = x[k] + h;
            let up = interior_residual(cost, x_initial, x_final, &probe, d);
            probe[k] = x[k] - h;
            let down = interior_residual(cost, x_initial, x_final, &probe, d);
            probe[k] = x[k];
            for r in 0..n {
                jac[(r, k)] = (up[r] - down[r]) / (2.0 * h);
            }
        }
        let rhs = -DVector::from_vec(f.clone());
        let delta = match jac.lu().solve(&rhs) {
            Some(step) if step.iter().all(|v| v.is_finite()) => step,
            _ => return None,
        };
        // backtracking on the max-norm of the residual
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-4 {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(xi, di)| xi + t * di).collect();
            let ft = interior_residual(cost, x_initial, x_final, &trial, d);
            let nt = max_abs(&ft);
            if nt.is_finite() && nt < norm {
                x = trial;
                f = ft;
                norm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (norm < opts.tolerance).then_some(x)
}

fn merge_configurations(mut roots: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    roots.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut merged: Vec<Vec<f64>> = Vec::new();
    for root in roots {
        let duplicate = merged.iter().any(|m| m.iter().zip(&root).all(|(x, y)| (x - y).abs() <= MERGE_TOLERANCE));
        if !duplicate {
            merged.push(root);
        }
    }
    merged
}

fn unflatten(flat: &[f64], d: usize) -> Vec<Vec<f64>> {
    flat.chunks(d).map(|c| c.to_vec()).collect()
}

/// Interior configurations (`segments - 1` nodes each) at which every EL
/// operator vanishes.
pub fn stationary_set(
    cost: &LocalCost,
    x_initial: &[f64],
    x_final: &[f64],
    segments: usize,
    solver: &StationarySolver,
) -> Result<Vec<History>> {
    let d = x_initial.len();
    if d == 0 || x_final.len() != d {
        return Err(Error::InvalidInput("endpoints must be nonempty vectors of equal dimension".into()));
    }
    if segments < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 segments, got {segments}")));
    }
    cost.validate()?;
    let unknowns = (segments - 1) * d;
    let roots: Vec<Vec<f64>> = match solver {
        StationarySolver::Newton(opts) => {
            let lo_end = x_initial.iter().chain(x_final).copied().fold(f64::INFINITY, f64::min);
            let hi_end = x_initial.iter().chain(x_final).copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = 0.5 * (hi_end - lo_end).max(1.0);
            let lo = opts.box_lo.unwrap_or(lo_end - pad);
            let hi = opts.box_hi.unwrap_or(hi_end + pad);
            let starts = multistart(unknowns, lo, hi, opts);
            let slop = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
            let found: Vec<Option<Vec<f64>>> =
                starts.into_par_iter().map(|s| newton_solve(cost, x_initial, x_final, s, d, opts)).collect();
            found.into_iter().flatten().filter(|r| r.iter().all(|v| *v >= lo - slop && *v <= hi + slop)).collect()
        }
        StationarySolver::ExhaustiveGrid { grid } => exhaustive_grid(cost, x_initial, x_final, unknowns, d, grid)?,
    };
    let merged = merge_configurations(roots);
    if merged.is_empty() {
        return Err(Error::EmptyResult("no stationary configuration found".into()));
    }
    Ok(merged.into_iter().map(|r| unflatten(&r, d)).collect())
}

fn multistart(unknowns: usize, lo: f64, hi: f64, opts: &NewtonOptions) -> Vec<Vec<f64>> {
    let p = opts.points_per_axis.max(1);
    let full = (p as u128).checked_pow(unknowns as u32);
    let axis: Vec<f64> =
        (0..p).map(|i| if p == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (p - 1) as f64 }).collect();
    match full {
        Some(count) if count <= opts.max_starts as u128 => (0..count as usize)
            .map(|mut code| {
                (0..unknowns)
                    .map(|_| {
                        let v = axis[code % p];
                        code /= p;
                        v
                    })
                    .collect()
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..opts.max_starts).map(|_| (0..unknowns).map(|_| rng.random_range(lo..=hi)).collect()).collect()
        }
    }
}

fn exhaustive_grid(
    cost: &LocalCost,
    x_initial: &[f64],
    x_final: &[f64],
    unknowns: usize,
    d: usize,
    grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let m = grid.len();
    if m == 0 {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let count = (m as u128).checked_pow(unknowns as u32).unwrap_or(u128::MAX);
    if count > GRID_LIMIT {
        return Err(Error::TooLarge { count, limit: GRID_LIMIT });
    }
    let count = count as usize;
    let decode = |mut code: usize| -> Vec<usize> {
        (0..unknowns)
            .map(|_| {
                let i = code % m;
                code /= m;
                i
            })
            .collect()
    };
    let norms: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|code| {
            let x: Vec<f64> = decode(code).into_iter().map(|i| grid[i]).collect();
            max_abs(&interior_residual(cost, x_initial, x_final, &x, d))
        })
        .collect();
    let strides: Vec<usize> = (0..unknowns).map(|k| m.pow(k as u32)).collect();
    Ok((0..count)
        .into_par_iter()
        .filter(|&code| {
            let digits = decode(code);
            digits.iter().enumerate().all(|(k, &i)| {
                let down = i > 0 && norms[code - strides[k]] < norms[code];
                let up = i + 1 < m && norms[code + strides[k]] < norms[code];
                !down && !up
            })
        })
        .map(|code| decode(code).into_iter().map(|i| grid[i]).collect())
        .collect())
}

/// Box from which local triples are drawn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharedStationarityReport {
    pub samples: usize,
    /// Roots of either operator at which the other was evaluated.
    pub zero_checks: usize,
    pub disagreements: usize,
    pub max_disagreement: f64,
    /// Triples where the root solve failed or the Jacobian was singular.
    pub degenerate: usize,
    /// Range of the proportionality ratio between the operators' normals at shared zeros.
    pub normal_ratio_min: f64,
    pub normal_ratio_max: f64,
}

pub const ZERO_TOLERANCE: f64 = 1e-9;

fn solve_local_zero(cost: &LocalCost, a: &[f64], c: &[f64], start: &[f64]) -> Option<Vec<f64>> {
    let mut b = start.to_vec();
    let mut f = local_el(cost, a, &b, c);
    for _ in 0..100 {
        if max_abs(&f) < 1e-13 {
            break;
        }
        let jac = local_el_jacobian(cost, a, &b, c);
        let step = jac.lu().solve(&(-DVector::from_vec(f.clone())))?;
        let mut t = 1.0;
        let norm = max_abs(&f);
        loop {
            let trial: Vec<f64> = b.iter().zip(step.iter()).map(|(x, s)| x + t * s).collect();
            let ft = local_el(cost, a, &trial, c);
            if max_abs(&ft) < norm {
                b = trial;
                f = ft;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                return (norm < ZERO_TOLERANCE * 1e-2).then_some(b);
            }
        }
    }
    (max_abs(&f) < ZERO_TOLERANCE * 1e-2).then_some(b)
}

/// Compares where the local EL operators of `ell` and `reference` vanish.
pub fn shared_stationarity(
    ell: &LocalCost,
    reference: &LocalCost,
    sample_box: &SampleBox,
) -> Result<SharedStationarityReport> {
    if !(sample_box.hi > sample_box.lo) || sample_box.dim == 0 {
        return Err(Error::InvalidInput("sample box must have hi > lo and dim >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sample_box.seed);
    let triples: Vec<[Vec<f64>; 3]> = (0..sample_box.samples)
        .map(|_| {
            std::array::from_fn(|_| {
                (0..sample_box.dim).map(|_| rng.random_range(sample_box.lo..=sample_box.hi)).collect()
            })
        })
        .collect();

    struct Outcome {
        checks: usize,
        disagreement: Option<f64>,
        degenerate: bool,
        ratio: Option<f64>,
    }
    let outcomes: Vec<Outcome> = triples
        .par_iter()
        .map(|[a, b0, c]| {
            let mut out = Outcome { checks: 0, disagreement: None, degenerate: false, ratio: None };
            for (solve_for, other) in [(reference, ell), (ell, reference)] {
                match solve_local_zero(solve_for, a, c, b0) {
                    None => out.degenerate = true,
                    Some(b) => {
                        out.checks += 1;
                        let residual = max_abs(&local_el(other, a, &b, c));
                        if residual > ZERO_TOLERANCE {
                            out.disagreement = Some(out.disagreement.unwrap_or(0.0).max(residual));
                        } else if std::ptr::eq(solve_for, reference) {
                            let js = local_el_jacobian(reference, a, &b, c);
                            let jl = local_el_jacobian(ell, a, &b, c);
                            let denom = js.norm_squared();
                            if denom > 1e-12 {
                                out.ratio = Some(jl.dot(&js) / denom);
                            } else {
                                out.degenerate = true;
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();

    let mut report = SharedStationarityReport {
        samples: sample_box.samples,
        zero_checks: 0,
        disagreements: 0,
        max_disagreement: 0.0,
        degenerate: 0,
        normal_ratio_min: f64::INFINITY,
        normal_ratio_max: f64::NEG_INFINITY,
    };
    for o in outcomes {
        report.zero_checks += o.checks;
        if let Some(r) = o.disagreement {
            report.disagreements += 1;
            report.max_disagreement = report.max_disagreement.max(r);
        }
        report.degenerate += o.degenerate as usize;
        if let Some(r) = o.ratio {
            report.normal_ratio_min = report.normal_ratio_min.min(r);
            report.normal_ratio_max = report.normal_ratio_max.max(r);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElFit {
    pub c_hat: f64,
    pub reference: Vec<f64>,
    /// Distinct node values, sorted, with `g_hat[i]` the fitted `G(nodes[i])`.
    pub nodes: Vec<Vec<f64>>,
    pub g_hat: Vec<f64>,
    /// Max over sampled segments of `|l - c L - (G(b) - G(a))|`.
    pub residual: f64,
    pub singular_min: f64,
    pub singular_max: f64,
}

impl ElFit {
    pub fn g_at(&self, x: &[f64]) -> Option<f64> {
        self.nodes.iter().position(|n| n.as_slice() == x).map(|i| self.g_hat[i])
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len()))
}

/// Every ordered pair of distinct grid values, as scalar segments.
pub fn grid_segments(values: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for &a in values {
        for &b in values {
            if a != b {
                out.push((vec![a], vec![b]));
            }
        }
    }
    out
}

/// Least-squares fit of `l(a, b) = c L(a, b) + G(b) - G(a)` with `G(reference) = 0`.
pub fn el_locality_fit(
    ell: &LocalCost,
    reference_cost: &LocalCost,
    segments: &[(Vec<f64>, Vec<f64>)],
    reference: Option<&[f64]>,
) -> Result<ElFit> {
    let mut nodes: Vec<Vec<f64>> = segments.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    nodes.sort_by(|a, b| lexicographic(a, b));
    nodes.dedup();
    if nodes.is_empty() {
        return Err(Error::InvalidInput("no sampled segments".into()));
    }
    if segments.len() < 3 * nodes.len() {
        return Err(Error::InvalidInput(format!(
            "{} segments over {} node values; need at least {}",
            segments.len(),
            nodes.len(),
            3 * nodes.len()
        )));
    }
    let reference = reference.map(|r| r.to_vec()).unwrap_or_else(|| nodes[0].clone());
    let ref_index = nodes
        .iter()
        .position(|n| *n == reference)
        .ok_or_else(|| Error::InvalidInput("gauge reference is not a sampled node value".into()))?;
    let index = |x: &Vec<f64>| nodes.binary_search_by(|n| lexicographic(n, x)).expect("node present");
    // unknowns: c, then G at every node except the reference
    let column = |i: usize| -> Option<usize> {
        match i.cmp(&ref_index) {
            std::cmp::Ordering::Less => Some(1 + i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i),
        }
    };
    let cols = nodes.len();
    let mut design = DMatrix::zeros(segments.len(), cols);
    let mut rhs = DVector::zeros(segments.len());
    for (row, (a, b)) in segments.iter().enumerate() {
        design[(row, 0)] = reference_cost.value(a, b);
        if let Some(k) = column(index(b)) {
            design[(row, k)] += 1.0;
        }
        if let Some(k) = column(index(a)) {
            design[(row, k)] -= 1.0;
        }
        rhs[row] = ell.value(a, b);
    }
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (s_max, s_min) = (sv.max(), sv.min());
    if !(s_min > 1e-10 * s_max) {
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let k = sv.imin();
        let null = v_t.row(k);
        let mut parts: Vec<String> = Vec::new();
        if null[0].abs() > 1e-8 {
            parts.push(format!("c:{:.3}", null[0]));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Some(col) = column(i) {
                if null[col].abs() > 1e-8 {
                    parts.push(format!("G({n:?}):{:.3}", null[col]));
                }
            }
        }
        return Err(Error::Unidentifiable(format!(
            "design rank-deficient (sigma_min/sigma_max = {:.2e}); null direction {}",
            s_min / s_max,
            parts.join(" ")
        )));
    }
    let solution = svd.solve(&rhs, 0.0).map_err(|e| Error::Unidentifiable(e.to_string()))?;
    let c_hat = solution[0];
    let g_hat: Vec<f64> = (0..nodes.len()).map(|i| column(i).map_or(0.0, |k| solution[k])).collect();
    let fitted = &design * &solution;
    let residual = (fitted - rhs).amax();
    Ok(ElFit { c_hat, reference, nodes, g_hat, residual, singular_min: s_min, singular_max: s_max })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalDecompositionReport {
    pub histories: usize,
    /// Max of `|l[x] - c S[x] - (G(x_N) - G(x_0))|`.
    pub max_residual: f64,
    /// Max of `|(l[x] - l[y]) - c (S[x] - S[y])|` over histories sharing endpoints.
    pub max_shared_endpoint_residual: f64,
    pub shared_endpoint_pairs: usize,
}

pub fn path_cost(cost: &LocalCost, history: &[Vec<f64>]) -> f64 {
    history.windows(2).map(|w| cost.value(&w[0], &w[1])).sum()
}

/// Checks the fitted local identity summed over whole histories.
pub fn global_decomposition_check(
    ell: &LocalCost,
    reference_cost: &LocalCost,
    fit: &ElFit,
    histories: &[History],
) -> Result<GlobalDecompositionReport> {
    let mut rows = Vec::with_capacity(histories.len());
    for h in histories {
        if h.len() < 2 {
            return Err(Error::InvalidTrajectory("history needs at least two nodes".into()));
        }
        let (first, last) = (&h[0], &h[h.len() - 1]);
        let g0 = fit
            .g_at(first)
            .ok_or_else(|| Error::InvalidInput(format!("endpoint {first:?} outside fitted node values")))?;
        let g1 = fit
            .g_at(last)
            .ok_or_else(|| Error::InvalidInput(format!("endpoint {last:?} outside fitted node values")))?;
        let (l, s) = (path_cost(ell, h), path_cost(reference_cost, h));
        rows.push((first, last, l, s, l - fit.c_hat * s - (g1 - g0)));
    }
    let max_residual = rows.iter().fold(0.0, |m: f64, r| m.max(r.4.abs()));
    let mut pairs = 0;
    let mut shared: f64 = 0.0;
    for (i, x) in rows.iter().enumerate() {
        for y in &rows[i + 1..] {
            if x.0 == y.0 && x.1 == y.1 {
                pairs += 1;
                shared = shared.max(((x.2 - y.2) - fit.c_hat * (x.3 - y.3)).abs());
            }
        }
    }
    Ok(GlobalDecompositionReport {
        histories: histories.len(),
        max_residual,
        max_shared_endpoint_residual: shared,
        shared_endpoint_pairs: pairs,
    })
}

/// Random scalar histories whose endpoints are drawn from `endpoints` and
/// whose interior nodes are uniform in `[lo, hi]`.
pub fn random_histories(endpoints: &[f64], lo: f64, hi: f64, segments: usize, count: usize, seed: u64) -> Vec<History> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut h = Vec::with_capacity(segments + 1);
            h.push(vec![endpoints[rng.random_range(0..endpoints.len())]]);
            for _ in 1..segments {
                h.push(vec![rng.random_range(lo..=hi)]);
            }
            h.push(vec![endpoints[rng.random_range(0..endpoints.len())]]);
            h
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Potential;

    fn square() -> LocalCost {
        LocalCost::kinetic(2.0, 1.0)
    }

    fn hist(xs: &[f64]) -> History {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn el_operator_examples() {
        let e = el_operator(&square(), &hist(&[0.0, 1.0, 2.0]), 1, ElMethod::Analytic).unwrap();
        assert_eq!(e.value, vec![0.0]);
        let e = el_operator(&square(), &hist(&[0.0, 1.0, 3.0]), 1, ElMethod::Analytic).unwrap();
        assert_eq!(e.value, vec![-2.0]);
        let fd = el_operator(&square(), &hist(&[0.0, 1.0, 3.0]), 1, ElMethod::CentralDifference).unwrap();
        assert!((fd.value[0] + 2.0).abs() < 1e-8);
        let flat = LocalCost::Constant { value: 2.5 };
        let e = el_operator(&flat, &hist(&[0.3, -1.0, 4.0, 2.0]), 2, ElMethod::Analytic).unwrap();
        assert_eq!(e.value, vec![0.0]);
        assert!(matches!(
            el_operator(&square(), &hist(&[0.0, 1.0, 2.0]), 0, ElMethod::Analytic),
            Err(Error::IndexError { .. })
        ));
        assert!(matches!(
            el_operator(&square(), &hist(&[0.0, 1.0, 2.0]), 2, ElMethod::Analytic),
            Err(Error::IndexError { .. })
        ));
    }

    #[test]
    fn finite_differences_converge_quadratically() {
        // non-polynomial enough that the O(h^2) term is visible
        let cost = LocalCost::kinetic(1.0, 1.0)
            .squared()
            .with_boundary(Potential::Polynomial { coeffs: vec![0.0, 0.0, 0.0, 1.0] });
        let h = hist(&[0.1, 0.7, 1.9]);
        let exact = el_operator(&cost, &h, 1, ElMethod::Analytic).unwrap().value[0];
        let err = |scale: f64| {
            let x = h[1][0];
            let step = scale * fd_step(x);
            let f = |v: f64| cost.value(&h[0], &[v]) + cost.value(&[v], &h[2]);
            ((f(x + step) - f(x - step)) / (2.0 * step) - exact).abs()
        };
        let ratio = err(1000.0) / err(500.0);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
        let fd = el_operator(&cost, &h, 1, ElMethod::CentralDifference).unwrap().value[0];
        assert!((fd - exact).abs() < 1e-8);
    }

    #[test]
    fn free_particle_is_evenly_spaced() {
        let set =
            stationary_set(&square(), &[0.0], &[1.0], 4, &StationarySolver::Newton(NewtonOptions::default())).unwrap();
        assert_eq!(set.len(), 1);
        for (node, want) in set[0].iter().zip([0.25, 0.5, 0.75]) {
            assert!((node[0] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn potential_profile_matches_grid_and_residual() {
        let cost = LocalCost::KineticPotential { mass: 1.0, step: 0.25, potential: Potential::Harmonic { k: 4.0 } };
        let newton =
            stationary_set(&cost, &[1.0], &[1.0], 4, &StationarySolver::Newton(NewtonOptions::default())).unwrap();
        assert_eq!(newton.len(), 1);
        let mut h = vec![vec![1.0]];
        h.extend(newton[0].clone());
        h.push(vec![1.0]);
        for j in 1..4 {
            assert!(el_operator(&cost, &h, j, ElMethod::Analytic).unwrap().value[0].abs() < 1e-9);
        }
        // sagging cosh-like profile: symmetric and below the endpoints
        assert!((h[1][0] - h[3][0]).abs() < 1e-9);
        assert!(h[2][0] < h[1][0] && h[1][0] < 1.0);

        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let coarse = stationary_set(&cost, &[1.0], &[1.0], 4, &StationarySolver::ExhaustiveGrid { grid }).unwrap();
        assert!(coarse.iter().any(|c| c.iter().zip(&newton[0]).all(|(g, n)| (g[0] - n[0]).abs() <= 0.01 + 1e-12)));
    }

    #[test]
    fn single_interior_node_matches_bisection() {
        let cost = LocalCost::KineticPotential {
            mass: 1.0,
            step: 0.5,
            potential: Potential::Polynomial { coeffs: vec![0.0, 0.0, 1.0, 0.0, 0.5] },
        };
        let set =
            stationary_set(&cost, &[-0.8], &[0.8], 2, &StationarySolver::Newton(NewtonOptions::default())).unwrap();
        let e = |x: f64| local_el(&cost, &[-0.8], &[x], &[0.8])[0];
        let (mut lo, mut hi) = (-0.8, 0.8);
        assert!(e(lo) * e(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if e(lo) * e(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert_eq!(set.len(), 1);
        assert!((set[0][0][0] - 0.5 * (lo + hi)).abs() < 1e-9);
    }

    #[test]
    fn scaling_keeps_stationary_set() {
        let cost = LocalCost::KineticPotential { mass: 1.0, step: 0.25, potential: Potential::Harmonic { k: 4.0 } };
        let solver = StationarySolver::Newton(NewtonOptions::default());
        let a = stationary_set(&cost, &[0.0], &[1.0], 3, &solver).unwrap();
        let b = stationary_set(&cost.clone().scaled(-2.5), &[0.0], &[1.0], 3, &solver).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            assert!((x[0] - y[0]).abs() < 1e-9);
        }
    }

    fn cubic() -> Potential {
        Potential::Polynomial { coeffs: vec![0.0, 0.0, 0.0, 1.0] }
    }

    fn sample_box() -> SampleBox {
        SampleBox { lo: -2.0, hi: 2.0, dim: 1, samples: 200, seed: 7 }
    }

    #[test]
    fn shared_stationarity_examples() {
        let l = LocalCost::kinetic(1.0, 1.0);
        let member = l.clone().scaled(3.0).with_boundary(cubic());
        let r = shared_stationarity(&member, &l, &sample_box()).unwrap();
        assert_eq!(r.disagreements, 0);
        assert!((r.normal_ratio_min - 3.0).abs() < 1e-6 && (r.normal_ratio_max - 3.0).abs() < 1e-6);
        assert_eq!(shared_stationarity(&l, &l, &sample_box()).unwrap().disagreements, 0);

        let with_potential =
            LocalCost::KineticPotential { mass: 1.0, step: 1.0, potential: Potential::Harmonic { k: 1.0 } };
        assert!(shared_stationarity(&with_potential, &l, &sample_box()).unwrap().disagreements > 0);
    }

    #[test]
    fn quartic_pair_shares_zeros_but_not_proportionally() {
        // u -> u^3 is injective, so (b-a)^4/4 + 1 vanishes with (b-a)^2/2's
        // operator; the normals are not proportional by a fixed constant.
        let l = LocalCost::kinetic(1.0, 1.0);
        let quartic = l.clone().squared().shifted(1.0);
        let r = shared_stationarity(&quartic, &l, &sample_box()).unwrap();
        assert_eq!(r.disagreements, 0);
        assert!(r.normal_ratio_max - r.normal_ratio_min > 0.1);
        let segs = grid_segments(&[-1.0, -0.5, 0.0, 0.5, 1.0, 1.5]);
        let fit = el_locality_fit(&quartic, &l, &segs, None).unwrap();
        assert!(fit.residual > 1e-3);
    }

    #[test]
    fn locality_fit_examples() {
        let l = LocalCost::kinetic(1.0, 1.0);
        let grid = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];
        let segs = grid_segments(&grid);

        let fit = el_locality_fit(&l.clone().scaled(3.0).with_boundary(cubic()), &l, &segs, Some(&[0.0])).unwrap();
        assert!((fit.c_hat - 3.0).abs() < 1e-10);
        assert!(fit.residual < 1e-8);
        for (n, g) in fit.nodes.iter().zip(&fit.g_hat) {
            assert!((g - n[0].powi(3)).abs() < 1e-9);
        }

        let fit = el_locality_fit(&l, &l, &segs, None).unwrap();
        assert!((fit.c_hat - 1.0).abs() < 1e-12);
        assert!(fit.g_hat.iter().all(|g| g.abs() < 1e-12));

        let linear = l.clone().with_boundary(Potential::Polynomial { coeffs: vec![0.0, 1.0] });
        let fit = el_locality_fit(&linear, &l, &segs, Some(&[0.0])).unwrap();
        assert!((fit.c_hat - 1.0).abs() < 1e-10);
        for (n, g) in fit.nodes.iter().zip(&fit.g_hat) {
            assert!((g - n[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_reference_is_unidentifiable() {
        // L(a, b) = b - a lies in the span of boundary terms
        let affine = LocalCost::Constant { value: 0.0 }.with_boundary(Potential::Polynomial { coeffs: vec![0.0, 1.0] });
        let segs = grid_segments(&[0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(el_locality_fit(&affine, &affine, &segs, None), Err(Error::Unidentifiable(_))));
        assert!(matches!(el_locality_fit(&affine, &affine, &segs[..3], None), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn global_decomposition_examples() {
        let l = LocalCost::kinetic(1.0, 1.0);
        let member = l.clone().scaled(3.0).with_boundary(cubic());
        let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let fit = el_locality_fit(&member, &l, &grid_segments(&grid), None).unwrap();
        let histories = random_histories(&grid, -1.0, 1.0, 6, 100, 11);
        let r = global_decomposition_check(&member, &l, &fit, &histories).unwrap();
        assert!(r.max_residual < 1e-7);
        assert!(r.shared_endpoint_pairs > 0);
        assert!(r.max_shared_endpoint_residual < 1e-9);

        let single = vec![hist(&[0.5, -1.0])];
        let r = global_decomposition_check(&member, &l, &fit, &single).unwrap();
        let local = member.value(&[0.5], &[-1.0]) - 3.0 * l.value(&[0.5], &[-1.0]) - (-1.0f64 - 0.125);
        assert!((r.max_residual - local.abs()).abs() < 1e-12);
    }
}
