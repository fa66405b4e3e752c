//! The reproduction suite: one experiment per acceptance criterion.
//!
//! Reports contain only deterministic data. Wall time is measured by the
//! caller and never enters a report, so two runs serialize identically.

use std::time::Duration;

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use synlab_core::cosmo::{calibrate, CosmoParams};
use synlab_core::gauge::{induced_weight, orbit_label, representatives, SelectionRule};
use synlab_core::grammar::{
    all_parses, check_prefix_free, decode_stream, dual_parse, find_embedding, HeaderDef, Symbol,
};
use synlab_core::pathint::{
    closure_sweep, hbar_eff_fit, transfer_check, ActionSpec, ClosureSetup, Discretization, LatticeSpec,
};
use synlab_core::redundancy::{
    concentration_experiment, scale_redundancy_check, ConcentrationSetup, EmergentScale, RedundancyProfile,
};
use synlab_core::variational::{
    el_locality_fit, global_decomposition_check, grid_segments, random_histories, shared_stationarity, SampleBox,
};
use synlab_core::{Grammar, JunkRule, LocalCost, Potential};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub criterion: u32,
    pub name: String,
    pub inputs_digest: String,
    pub inputs: Value,
    pub outputs: Value,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 20_240_601 }
    }
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    /// Runtime budget on commodity hardware.
    pub budget: Duration,
    run: fn(&SuiteConfig) -> anyhow::Result<ExperimentReport>,
}

impl Criterion {
    pub fn run(&self, config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
        (self.run)(config)
    }

    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.to_ascii_lowercase();
        self.name.contains(&f) || self.tags.iter().any(|t| t.contains(&f)) || self.id.to_string() == f
    }
}

pub fn criteria() -> Vec<Criterion> {
    let secs = Duration::from_secs;
    vec![
        Criterion {
            id: 1,
            name: "prefix-free",
            tags: &["grammar", "decode"],
            budget: secs(5),
            run: prefix_free_necessity,
        },
        Criterion {
            id: 2,
            name: "exponential-redundancy",
            tags: &["grammar", "growth"],
            budget: secs(2),
            run: exponential_redundancy,
        },
        Criterion {
            id: 3,
            name: "k-independence",
            tags: &["redundancy", "weight"],
            budget: secs(1),
            run: k_independence,
        },
        Criterion { id: 4, name: "el-locality", tags: &["variational", "el"], budget: secs(10), run: el_locality },
        Criterion {
            id: 5,
            name: "euclidean-closure",
            tags: &["pathint", "closure"],
            budget: secs(30),
            run: euclidean_closure,
        },
        Criterion {
            id: 6,
            name: "scale-redundancy",
            tags: &["redundancy", "scale"],
            budget: secs(1),
            run: scale_redundancy,
        },
        Criterion { id: 7, name: "gauge-toy", tags: &["gauge"], budget: secs(1), run: gauge_toy },
        Criterion {
            id: 8,
            name: "cosmological-calibration",
            tags: &["cosmo"],
            budget: secs(1),
            run: cosmological_calibration,
        },
        Criterion {
            id: 9,
            name: "concentration",
            tags: &["redundancy", "variational"],
            budget: secs(5),
            run: concentration,
        },
        Criterion { id: 10, name: "determinism", tags: &["reproduce"], budget: secs(120), run: determinism },
    ]
}

pub fn select(filter: Option<&str>) -> Vec<Criterion> {
    criteria().into_iter().filter(|c| filter.is_none_or(|f| c.matches(f))).collect()
}

/// Canonical JSON (sorted keys, shortest round-trip floats).
pub fn canonical_json(value: &impl Serialize) -> String {
    serde_json::to_value(value).and_then(|v| serde_json::to_string(&v)).expect("serializable report")
}

struct Builder {
    criterion: u32,
    name: &'static str,
    inputs: Value,
    outputs: Map<String, Value>,
    assertions: Vec<Assertion>,
}

impl Builder {
    fn new(criterion: u32, name: &'static str, inputs: Value) -> Self {
        Self { criterion, name, inputs, outputs: Map::new(), assertions: Vec::new() }
    }

    fn check(&mut self, invariant: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { invariant: invariant.into(), passed, detail: detail.into() });
    }

    fn output(&mut self, key: &str, value: impl Serialize) {
        self.outputs.insert(key.into(), serde_json::to_value(value).expect("serializable output"));
    }

    fn finish(self) -> ExperimentReport {
        let digest = Sha256::digest(canonical_json(&self.inputs).as_bytes());
        let passed = !self.assertions.is_empty() && self.assertions.iter().all(|a| a.passed);
        ExperimentReport {
            criterion: self.criterion,
            name: self.name.into(),
            inputs_digest: hex::encode(digest),
            inputs: self.inputs,
            outputs: Value::Object(self.outputs),
            assertions: self.assertions,
            passed,
        }
    }
}

fn rng_for(config: &SuiteConfig, criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed ^ criterion.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

// ---------------------------------------------------------------- criterion 1

fn random_header_set(rng: &mut ChaCha8Rng) -> (usize, Vec<HeaderDef>) {
    let b = rng.random_range(3..=6usize);
    let n = rng.random_range(2..=4usize);
    let codewords: Vec<Vec<Symbol>> =
        (0..n).map(|_| (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..b) as Symbol).collect()).collect();
    let used: Vec<Symbol> = codewords.iter().flatten().copied().collect();
    let defs = codewords
        .into_iter()
        .enumerate()
        .map(|(i, cw)| {
            let p = rng.random_range(0..=3usize);
            // mostly draw payload digits away from header symbols, so valid sets are common
            let avoid = rng.random_bool(0.7);
            let mut alphabet: Vec<Symbol> =
                (0..b as Symbol).filter(|s| !(avoid && used.contains(s)) && rng.random_bool(0.6)).collect();
            if alphabet.is_empty() {
                alphabet.push(rng.random_range(0..b) as Symbol);
            }
            HeaderDef::new(cw, format!("t{i}"), p, &alphabet)
        })
        .collect();
    (b, defs)
}

fn random_payload(rng: &mut ChaCha8Rng, def: &HeaderDef, len: usize) -> Vec<Symbol> {
    (0..len).map(|_| def.payload_alphabet[rng.random_range(0..def.payload_alphabet.len())]).collect()
}

/// A header set with one violation added on purpose, plus a string that exposes it.
fn inject(
    rng: &mut ChaCha8Rng,
    defs: &[HeaderDef],
    prefer_prefix: bool,
) -> (&'static str, Vec<HeaderDef>, Vec<Symbol>) {
    let extendable: Vec<usize> = (0..defs.len()).filter(|&i| defs[i].payload_length > 0).collect();
    if prefer_prefix && !extendable.is_empty() {
        let h = &defs[extendable[rng.random_range(0..extendable.len())]];
        let r_len = rng.random_range(1..=h.payload_length);
        let r = random_payload(rng, h, r_len);
        let mut longer = h.codeword.clone();
        longer.extend_from_slice(&r);
        let extra = HeaderDef::new(longer.clone(), "injected", h.payload_length - r_len, &h.payload_alphabet);
        let mut witness = longer;
        witness.extend(random_payload(rng, &extra, extra.payload_length));
        let mut out = defs.to_vec();
        out.push(extra);
        return ("prefix", out, witness);
    }
    let src = rng.random_range(0..defs.len());
    let holder = (src + 1 + rng.random_range(0..defs.len() - 1)) % defs.len();
    let mut out = defs.to_vec();
    let code = out[src].codeword.clone();
    let k = &mut out[holder];
    let mut alphabet = k.payload_alphabet.clone();
    alphabet.extend_from_slice(&code);
    *k = HeaderDef::new(k.codeword.clone(), k.segment_type.clone(), k.payload_length.max(code.len()), &alphabet);
    let mut witness = k.codeword.clone();
    witness.extend_from_slice(&code);
    let fill = k.payload_length - code.len();
    let k = k.clone();
    witness.extend(random_payload(rng, &k, fill));
    ("embedding", out, witness)
}

fn prefix_free_necessity(config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    const SETS: usize = 200;
    let mut rng = rng_for(config, 1);
    let mut b =
        Builder::new(1, "prefix-free", json!({"header_sets": SETS, "seed": config.seed, "programs_per_valid_set": 5}));
    let (mut valid, mut invalid, mut iff_failures, mut decode_failures) = (0, 0, 0, 0);
    let (mut injected, mut detected, mut rejected) = (0, 0, 0);
    let mut kinds = std::collections::BTreeMap::<&str, usize>::new();
    for set in 0..SETS {
        let (alphabet, defs) = random_header_set(&mut rng);
        let codewords: Vec<Vec<Symbol>> = defs.iter().map(|d| d.codeword.clone()).collect();
        let structural = check_prefix_free(&codewords)?.is_ok() && find_embedding(&defs).is_none();
        let grammar = Grammar::new(alphabet, defs.clone(), JunkRule::unconstrained(alphabet));
        if grammar.is_ok() != structural {
            iff_failures += 1;
        }
        let Ok(grammar) = grammar else {
            invalid += 1;
            continue;
        };
        valid += 1;
        for _ in 0..5 {
            let picks: Vec<usize> = (0..rng.random_range(1..=6)).map(|_| rng.random_range(0..defs.len())).collect();
            let mut stream = Vec::new();
            let mut payloads = Vec::new();
            for &h in &picks {
                stream.extend_from_slice(&defs[h].codeword);
                let p = random_payload(&mut rng, &defs[h], defs[h].payload_length);
                stream.extend_from_slice(&p);
                payloads.push(p);
            }
            let unique = match decode_stream(&grammar, &stream) {
                Ok(list) => {
                    list.segments.iter().map(|s| s.header).eq(picks.iter().copied())
                        && list.segments.iter().map(|s| &s.payload).eq(payloads.iter())
                }
                Err(_) => false,
            };
            if !unique || all_parses(&defs, &stream, 2).len() != 1 || dual_parse(&defs, &stream).ambiguous {
                decode_failures += 1;
            }
        }
        let (kind, broken, witness) = inject(&mut rng, &defs, set % 2 == 0);
        injected += 1;
        *kinds.entry(kind).or_default() += 1;
        if Grammar::new(alphabet, broken.clone(), JunkRule::unconstrained(alphabet)).is_err() {
            rejected += 1;
        }
        if dual_parse(&broken, &witness).ambiguous {
            detected += 1;
        }
    }
    b.output("valid_sets", valid);
    b.output("invalid_sets", invalid);
    b.output("injected", &kinds);
    b.check(
        "grammar accepted iff prefix-free and no embedding",
        iff_failures == 0,
        format!("{iff_failures} disagreements over {SETS} sets ({valid} valid, {invalid} invalid)"),
    );
    b.check(
        "valid sets decode uniquely in one pass",
        decode_failures == 0 && valid > 0,
        format!("{decode_failures} failures over {} programs", 5 * valid),
    );
    b.check("injected violations are rejected", rejected == injected, format!("{rejected}/{injected}"));
    b.check(
        "injected violations are flagged ambiguous by the dual parse",
        detected == injected,
        format!("{detected}/{injected}"),
    );
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 2

fn exponential_redundancy(_config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    let rule = JunkRule::no_consecutive_ones();
    let mut b = Builder::new(
        2,
        "exponential-redundancy",
        json!({"rule": rule.to_spec(), "brute_force_max": 12, "fit_length": 200}),
    );
    let counts = rule.counts_up_to(12);
    let mut mismatches = Vec::new();
    for (len, count) in counts.iter().enumerate() {
        let brute = (0u32..1 << len)
            .filter(|bits| {
                let word: Vec<Symbol> = (0..len).map(|i| ((bits >> i) & 1) as Symbol).collect();
                rule.accepts(&word)
            })
            .count();
        if *count != BigUint::from(brute) {
            mismatches.push(len);
        }
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let fitted = rule.log_growth_at(200).exp();
    let growth = rule.growth_rate()?;
    b.output("counts", counts.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    b.output("fitted_gamma_200", fitted);
    b.output("power_iteration", growth);
    b.check(
        "count_strings equals brute force for L <= 12",
        mismatches.is_empty(),
        format!("mismatched lengths {mismatches:?}"),
    );
    b.check(
        "fitted growth at L = 200 equals the golden ratio within 1e-6",
        (fitted - phi).abs() < 1e-6,
        format!("|{fitted} - phi| = {:.3e}", (fitted - phi).abs()),
    );
    b.check(
        "transfer-matrix gamma equals the golden ratio within 1e-9",
        (growth.gamma - phi).abs() < 1e-9,
        format!("{:.3e}", (growth.gamma - phi).abs()),
    );
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 3

fn k_independence(_config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    let profile = RedundancyProfile::from_rule(JunkRule::unconstrained(2))?;
    let mut b = Builder::new(3, "k-independence", json!({"gamma": 2, "ell": [4, 6], "k_range": [10, 200]}));
    let at10 = profile.relative_weight(4.0, 6.0, 10.0)?;
    let want = BigRational::new(127.into(), 31.into());
    b.output("ratio_k10", at10.integer_ratio.to_string());
    b.check("exact ratio at K = 10 is 127/31", at10.integer_ratio == want, at10.integer_ratio.to_string());
    let mut errors = Vec::new();
    for k in 10..=200 {
        errors.push((k, (profile.relative_weight(4.0, 6.0, k as f64)?.value - 4.0).abs()));
    }
    let worst_late = errors.iter().filter(|(k, _)| *k >= 40).map(|e| e.1).fold(0.0, f64::max);
    let monotone = errors.windows(2).all(|w| w[1].1 <= w[0].1);
    b.output("max_error_k_ge_40", worst_late);
    b.check("error < 1e-9 for every K >= 40", worst_late < 1e-9, format!("{worst_late:.3e}"));
    b.check("error nonincreasing in K", monotone, "K = 10..200");
    let four = BigRational::from_integer(4.into());
    let far = profile.relative_weight(4.0, 6.0, 200.0)?.exact_deviation(&four);
    b.check("exact deviation at K = 200 below 1e-40", far < 1e-40 && far > 0.0, format!("{far:.3e}"));
    let k0 = 6.0 + 30.0 / profile.lambda();
    let r1 = profile.relative_weight(4.0, 6.0, k0.ceil())?.value;
    let r2 = profile.relative_weight(4.0, 6.0, k0.ceil() + 57.0)?.value;
    b.check(
        "K-independence beyond max l + 30/Lambda",
        (r1 - r2).abs() <= 1e-9 * r2,
        format!("{:.3e}", (r1 - r2).abs() / r2),
    );
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 4

fn el_locality(config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    const TRIALS: usize = 50;
    let mut rng = rng_for(config, 4);
    let grid: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
    let x_ref = [0.0];
    let reference = LocalCost::kinetic(1.0, 1.0);
    let mut b = Builder::new(
        4,
        "el-locality",
        json!({"trials": TRIALS, "seed": config.seed, "grid": grid, "reference": reference, "gauge_reference": x_ref}),
    );
    let segments = grid_segments(&grid);
    let (mut worst_c, mut worst_g, mut worst_res, mut worst_global, mut shared_disagreements): (
        f64,
        f64,
        f64,
        f64,
        usize,
    ) = (0.0, 0.0, 0.0, 0.0, 0);
    for trial in 0..TRIALS {
        let magnitude = rng.random_range(0.1..=5.0);
        let c: f64 = if rng.random_bool(0.5) { magnitude } else { -magnitude };
        let coeffs: Vec<f64> = std::iter::once(0.0).chain((0..3).map(|_| rng.random_range(-1.0..=1.0))).collect();
        let gauge = Potential::Polynomial { coeffs };
        let ell = reference.clone().scaled(c).with_boundary(gauge.clone());
        let fit = el_locality_fit(&ell, &reference, &segments, Some(&x_ref))?;
        worst_c = worst_c.max((fit.c_hat - c).abs());
        worst_res = worst_res.max(fit.residual);
        for (n, g) in fit.nodes.iter().zip(&fit.g_hat) {
            worst_g = worst_g.max((g - (gauge.value(n[0]) - gauge.value(x_ref[0]))).abs());
        }
        let histories = random_histories(&grid, -1.0, 1.0, 5, 20, config.seed.wrapping_add(trial as u64));
        worst_global = worst_global.max(global_decomposition_check(&ell, &reference, &fit, &histories)?.max_residual);
        let sample = SampleBox { lo: -1.0, hi: 1.0, dim: 1, samples: 20, seed: config.seed.wrapping_add(trial as u64) };
        shared_disagreements += shared_stationarity(&ell, &reference, &sample)?.disagreements;
    }
    b.output("max_c_error", worst_c);
    b.output("max_g_error", worst_g);
    b.output("max_fit_residual", worst_res);
    b.output("max_global_residual", worst_global);
    b.check("c recovered within 1e-8 in every trial", worst_c < 1e-8, format!("{worst_c:.3e}"));
    b.check("G recovered within 1e-7 sup-norm after gauge fixing", worst_g < 1e-7, format!("{worst_g:.3e}"));
    b.check("fit residual below 1e-8 for EL-class members", worst_res < 1e-8, format!("{worst_res:.3e}"));
    b.check(
        "global decomposition holds to 1e-7 on random histories",
        worst_global < 1e-7,
        format!("{worst_global:.3e}"),
    );
    b.check(
        "EL-class members share every stationary triple",
        shared_disagreements == 0,
        format!("{shared_disagreements} disagreements"),
    );

    let box_ = SampleBox { lo: -2.0, hi: 2.0, dim: 1, samples: 200, seed: config.seed };
    let potential = LocalCost::KineticPotential { mass: 1.0, step: 1.0, potential: Potential::Harmonic { k: 1.0 } };
    let counter = shared_stationarity(&potential, &reference, &box_)?;
    b.output("counterexample", &counter);
    b.check(
        "kinetic+potential vs kinetic has nonzero disagreements",
        counter.disagreements > 0,
        format!("{}/{}", counter.disagreements, counter.samples),
    );
    let quartic = shared_stationarity(&reference.clone().squared().shifted(1.0), &reference, &box_)?;
    b.output("quartic_pair", &quartic);
    b.check(
        "quartic pair: identical zero sets, non-constant normal ratio",
        quartic.disagreements == 0 && quartic.normal_ratio_max - quartic.normal_ratio_min > 0.1,
        format!("ratio range [{:.4}, {:.4}]", quartic.normal_ratio_min, quartic.normal_ratio_max),
    );
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 5

pub fn closure_lattice() -> LatticeSpec {
    LatticeSpec {
        steps: 4,
        epsilon: 1.0,
        grid: (0..7).map(|i| -1.5 + 0.5 * i as f64).collect(),
        x_initial: 0.0,
        x_final: 0.5,
    }
}

fn euclidean_closure(_config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    let lattice = closure_lattice();
    let alpha = 2.0;
    let profile = RedundancyProfile::from_rule(JunkRule::unconstrained(3))?;
    let hbar = 1.0 / (alpha * 3f64.ln());
    let actions = [
        ("free", ActionSpec::free(1.0)),
        (
            "harmonic",
            ActionSpec { mass: 1.0, potential: Potential::Harmonic { k: 1.0 }, rule: Discretization::Midpoint },
        ),
    ];
    let mut b = Builder::new(
        5,
        "euclidean-closure",
        json!({"lattice": lattice, "actions": actions.iter().map(|a| &a.1).collect::<Vec<_>>(), "alpha": alpha, "gamma": 3, "budget": 60}),
    );
    for (name, action) in &actions {
        let setup = ClosureSetup::new(&lattice, action, alpha, 0.0, &profile)?;
        let max_cost = setup.max_cost();
        let report = setup.check(&profile, max_cost + 60.0)?;
        b.check(&format!("{name}: 343 histories enumerated"), report.rows.len() == 343, report.rows.len().to_string());
        b.check(
            &format!("{name}: TV distance < 1e-12 at K - max l = 60"),
            report.tv_distance < 1e-12,
            format!("{:.3e}", report.tv_distance),
        );
        b.check(
            &format!("{name}: TV within the geometric tail bound"),
            report.within_bound,
            format!("{:.3e} <= {:.3e}", report.tv_distance, report.tail_bound),
        );
        let samples: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.s_e, r.p_redundancy)).collect();
        let fit = hbar_eff_fit(&samples)?;
        b.check(
            &format!("{name}: fitted hbar_eff = 1/(2 ln 3) within 1e-9"),
            (fit.hbar_eff - hbar).abs() < 1e-9,
            format!("{:.3e}", (fit.hbar_eff - hbar).abs()),
        );
        let budgets: Vec<f64> = (0..=12).map(|i| max_cost + 5.0 * i as f64).collect();
        let sweep = closure_sweep(&setup, &profile, &budgets)?;
        b.check(&format!("{name}: TV nonincreasing in K"), sweep.monotone, "K - max l = 0..60 step 5");
        let shifted = ClosureSetup::new(&lattice, action, alpha, 2.5, &profile)?.check(&profile, max_cost + 62.5)?;
        let shift_dev = shifted
            .rows
            .iter()
            .zip(&report.rows)
            .map(|(x, y)| (x.p_redundancy - y.p_redundancy).abs())
            .fold(0.0, f64::max);
        b.check(&format!("{name}: endpoint-only boundary term cancels"), shift_dev < 1e-15, format!("{shift_dev:.3e}"));
        b.output(
            name,
            json!({
                "tv_distance": report.tv_distance,
                "tail_bound": report.tail_bound,
                "hbar_fit": fit,
                "sweep_tv": sweep.points.iter().map(|p| p.tv_distance).collect::<Vec<_>>(),
            }),
        );
    }
    let grid_lattice = LatticeSpec { x_final: 1.0, ..lattice.clone() };
    let ck = transfer_check(&grid_lattice, &ActionSpec::free(1.0), hbar)?;
    b.output("transfer_check", &ck);
    b.check(
        "enumerated partition function matches the transfer-kernel power",
        ck.relative_deviation < 1e-12,
        format!("{:.3e}", ck.relative_deviation),
    );
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 6

fn scale_redundancy(_config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    let scale = EmergentScale::new(2.0, 3f64.ln())?;
    let lattice = closure_lattice();
    let costs: Vec<f64> =
        synlab_core::pathint::lattice_actions(&lattice, &ActionSpec::free(1.0))?.iter().map(|s| 2.0 * s).collect();
    let cs = [0.1, 3.7, 42.0];
    let mut b =
        Builder::new(6, "scale-redundancy", json!({"alpha": 2.0, "gamma": 3, "c": cs, "histories": costs.len()}));
    for c in cs {
        let r = scale_redundancy_check(&scale, &costs, c)?;
        b.check(
            &format!("c = {c}: weights unchanged within 1e-12"),
            r.max_weight_deviation < 1e-12,
            format!("{:.3e}", r.max_weight_deviation),
        );
        b.check(
            &format!("c = {c}: hbar_eff unchanged within 1e-12"),
            r.hbar_relative_deviation < 1e-12,
            format!("{:.3e}", r.hbar_relative_deviation),
        );
        b.output(&format!("c={c}"), r);
    }
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 7

fn gauge_toy(_config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    let mut b = Builder::new(7, "gauge-toy", json!({"rules": ["rule_a", "rule_b"]}));
    b.check("W(+1,+1) = +1", orbit_label(1, 1)? == 1, "");
    b.check("W(+1,-1) = -1", orbit_label(1, -1)? == -1, "");
    let ga = [representatives(&SelectionRule::RuleA, 1)?, representatives(&SelectionRule::RuleA, -1)?];
    let gb = [representatives(&SelectionRule::RuleB, 1)?, representatives(&SelectionRule::RuleB, -1)?];
    b.check("g_A = 1 on both orbits", ga.iter().all(|r| r.g == 1), format!("{} {}", ga[0].g, ga[1].g));
    b.check(
        "rule A representatives",
        ga[0].pairs == vec![(1, 1)] && ga[1].pairs == vec![(1, -1)],
        format!("{:?} {:?}", ga[0].pairs, ga[1].pairs),
    );
    b.check("g_B(+1) = 1, g_B(-1) = 2", gb[0].g == 1 && gb[1].g == 2, format!("{} {}", gb[0].g, gb[1].g));
    b.check(
        "rule B representatives",
        gb[0].pairs == vec![(1, 1)] && gb[1].pairs == vec![(1, -1), (-1, 1)],
        format!("{:?} {:?}", gb[0].pairs, gb[1].pairs),
    );
    let equal = induced_weight(&SelectionRule::RuleB, 1.0, 1.0, 1.0)?;
    b.check(
        "equal costs: P_B(-1)/P_B(+1) = 2 exactly",
        equal.p_minus / equal.p_plus == 2.0,
        format!("{}", equal.p_minus / equal.p_plus),
    );
    let uniform = induced_weight(&SelectionRule::RuleA, 1.0, 1.0, 1.0)?;
    b.check("equal costs: rule A uniform", uniform.p_plus == 0.5 && uniform.p_minus == 0.5, "");
    let mut worst: f64 = 0.0;
    for lp in [0.0, 0.5, 1.0, 3.0] {
        for lm in [0.0, 0.25, 2.0, 7.0] {
            for lambda in [0.1, 1.0, 2f64.ln(), 4.0] {
                let a = induced_weight(&SelectionRule::RuleA, lp, lm, lambda)?;
                let bb = induced_weight(&SelectionRule::RuleB, lp, lm, lambda)?;
                worst = worst.max((bb.unnormalized_plus / a.unnormalized_plus - 1.0).abs());
                worst = worst.max((bb.unnormalized_minus / a.unnormalized_minus - 2.0).abs());
            }
        }
    }
    b.check("P_B/P_A = g_B/g_A, exponential parts rule-independent", worst == 0.0, format!("{worst:.3e}"));
    b.output("rule_b_equal_costs", equal);
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 8

fn cosmological_calibration(config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    const DRAWS: usize = 1000;
    let mut rng = rng_for(config, 8);
    let mut b = Builder::new(8, "cosmological-calibration", json!({"draws": DRAWS, "seed": config.seed}));
    let (mut action, mut hbar_eta, mut cost, mut units): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    for _ in 0..DRAWS {
        let p = CosmoParams::new(
            log_uniform(&mut rng, -20.0, 2.0),
            log_uniform(&mut rng, -12.0, 2.0),
            log_uniform(&mut rng, -36.0, 2.0),
            rng.random_range(0.01..=1.0),
            log_uniform(&mut rng, -2.0, 1.0),
        )?;
        let r = calibrate(&p)?;
        action = action.max(r.action_identity_error);
        hbar_eta = hbar_eta.max((r.hbar_eff * p.eta / p.hbar - 1.0).abs());
        cost = cost.max(r.cost_identity_error);
        let q = p.rescale_time(log_uniform(&mut rng, -3.0, 3.0))?;
        let rq = calibrate(&q)?;
        units = units.max(((rq.hbar_eff / q.hbar) / (r.hbar_eff / p.hbar) - 1.0).abs());
    }
    b.output("max_action_identity_error", action);
    b.output("max_hbar_eta_error", hbar_eta);
    b.check("S_E = hbar I_holo to 1e-14", action <= 1e-14, format!("{action:.3e}"));
    b.check("hbar_eff = hbar/eta to 1e-14", hbar_eta <= 1e-14, format!("{hbar_eta:.3e}"));
    b.check("l_univ = alpha S_E to 1e-14", cost <= 1e-14, format!("{cost:.3e}"));
    b.check("hbar_eff/hbar invariant under time-unit rescaling", units <= 1e-14, format!("{units:.3e}"));
    let unit = calibrate(&CosmoParams::new(1.0, 1.0, 1.0, 1.0, 0.693)?)?;
    b.check("eta = 1: hbar_eff = hbar exactly", unit.hbar_eff == 1.0, format!("{}", unit.hbar_eff));
    let half = calibrate(&CosmoParams::new(1.0, 1.0, 1.7, 0.5, 0.693)?)?;
    b.check("eta = 0.5: hbar_eff = 2 hbar", half.hbar_eff == 3.4, format!("{}", half.hbar_eff));
    let mut lambda_spread: f64 = 0.0;
    for e in -4..=4 {
        let r = calibrate(&CosmoParams::new(1.0, 1.0, 1.7, 0.8, 10f64.powi(e))?)?;
        lambda_spread = lambda_spread.max((r.hbar_eff_chain / (1.7 / 0.8) - 1.0).abs());
    }
    b.check("Lambda_syn cancels from hbar_eff", lambda_spread < 1e-14, format!("{lambda_spread:.3e}"));
    let si = calibrate(&CosmoParams::from_si(2.2e-18, 6.674e-11, 1.055e-34, 1.0, 2f64.ln())?)?;
    b.output("si_example", si);
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 9

pub fn concentration_lattice() -> ConcentrationSetup {
    ConcentrationSetup {
        cost: LocalCost::kinetic(1.0, 0.125),
        grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
        x_initial: 0.0,
        x_final: 0.8,
        interior: 3,
        radius: 0.1,
    }
}

fn concentration(_config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    let setup = concentration_lattice();
    let lambdas = [0.0, 1.0, 2.0, 5.0, 10.0, 50.0];
    let mut b = Builder::new(9, "concentration", json!({"setup": setup, "lambdas": lambdas}));
    let curve = concentration_experiment(&setup, &lambdas)?;
    let at50 = curve.points.last().map_or(0.0, |p| p.mass);
    b.check("single stationary configuration", curve.stationary.len() == 1, format!("{:?}", curve.stationary));
    b.check("mass nondecreasing in Lambda", curve.nondecreasing, "");
    b.check("mass > 0.99 at Lambda = 50", at50 > 0.99, format!("{at50}"));
    b.check(
        "Lambda = 0 is uniform",
        (curve.points[0].mass - 27.0 / 1331.0).abs() < 1e-14,
        format!("{}", curve.points[0].mass),
    );
    b.output("curve", curve);
    Ok(b.finish())
}

// ---------------------------------------------------------------- criterion 10

/// Runs every other criterion on a pool of `workers` threads.
pub fn run_on_workers(
    criteria: &[Criterion],
    config: &SuiteConfig,
    workers: usize,
) -> anyhow::Result<Vec<ExperimentReport>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| criteria.iter().map(|c| c.run(config)).collect())
}

fn determinism(config: &SuiteConfig) -> anyhow::Result<ExperimentReport> {
    let others: Vec<Criterion> = criteria().into_iter().filter(|c| c.id != 10).collect();
    let mut b = Builder::new(
        10,
        "determinism",
        json!({"workers": [1, 8], "criteria": others.iter().map(|c| c.id).collect::<Vec<_>>()}),
    );
    let one = canonical_json(&run_on_workers(&others, config, 1)?);
    let eight = canonical_json(&run_on_workers(&others, config, 8)?);
    let again = canonical_json(&run_on_workers(&others, config, 8)?);
    b.output("digest", hex::encode(Sha256::digest(one.as_bytes())));
    b.check("1 vs 8 workers byte-identical", one == eight, format!("{} vs {} bytes", one.len(), eight.len()));
    b.check("repeat run byte-identical", eight == again, "");
    Ok(b.finish())
}
