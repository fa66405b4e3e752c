//! Argument definitions and command dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use synlab_core::cosmo::{calibrate, CosmoParams};
use synlab_core::encoder::{decode_history, encode, minimal_cost, Classifier, CostSpec, DiscreteHistory, Quantizer};
use synlab_core::gauge::{induced_weight, SelectionRule};
use synlab_core::grammar::{check_prefix_free, decode_stream, find_embedding, kraft_sum, parse_symbols};
use synlab_core::numeric::{big_ratio, decimal_string};
use synlab_core::pathint::{exhaustive_measure, ActionSpec, ClosureSetup, LatticeSpec};
use synlab_core::redundancy::{concentration_experiment, weight_table, ConcentrationSetup, RedundancyProfile};
use synlab_core::variational::{
    el_locality_fit, global_decomposition_check, grid_segments, random_histories, shared_stationarity, stationary_set,
    NewtonOptions, SampleBox, StationarySolver,
};
use synlab_core::{Grammar, GrammarSpec, JunkRule, LocalCost};

use crate::suite::{self, canonical_json, SuiteConfig};

pub const DEFAULT_PRECISION: u32 = 256;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "synlab", version, about = "Prefix-free grammars, redundancy weights and their Euclidean closure")]
pub struct Cli {
    /// Human-readable output instead of compact machine output.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Write data here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for parallel kernels (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Bits of precision for exact-ratio decimal output (env SYNLAB_PRECISION, default 256).
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grammar checks, string counts and growth rates.
    Grammar {
        #[command(subcommand)]
        action: GrammarCmd,
    },
    /// Encode a history CSV (columns t, x1..xd) as a program.
    Encode(EncodeArgs),
    /// Minimal descriptive cost of a history CSV.
    Cost(CostArgs),
    /// Redundancy weights for a cost table (CSV columns: history_id, ell).
    ///
    /// With --k-sweep the output is CSV with columns history_id, K, W_exact, P.
    Weight(WeightArgs),
    /// Concentration of the weight near the stationary set (CSV columns: lambda, mass).
    Concentrate(ConcentrateArgs),
    /// Discrete Euler-Lagrange tools.
    El {
        #[command(subcommand)]
        action: ElCmd,
    },
    /// Exhaustive Euclidean lattice path sums.
    Pathint {
        #[command(subcommand)]
        action: PathintCmd,
    },
    /// The two-site Z2 orbit model.
    Gauge {
        #[command(subcommand)]
        action: GaugeCmd,
    },
    /// Holographic calibration of alpha and hbar_eff (c = 1 units unless --si).
    Cosmo(CosmoArgs),
    /// Run the acceptance experiments and emit one report per criterion.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Subcommand)]
pub enum GrammarCmd {
    /// Prefix-freeness, boundary delimitation and the Kraft sum.
    Check { grammar: PathBuf },
    /// Exact number of junk strings of length L.
    Count {
        grammar: PathBuf,
        #[arg(long = "L")]
        length: usize,
    },
    /// Junk growth rate gamma and Lambda = ln gamma.
    Gamma {
        grammar: PathBuf,
        /// Also report the count ratio N(L+1)/N(L).
        #[arg(long = "L")]
        length: Option<usize>,
    },
    /// Segment a symbol string (0-9a-z spelling).
    Decode { grammar: PathBuf, symbols: String },
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub grammar: PathBuf,
    pub history: PathBuf,
    /// Resolution n (time step 2^-n).
    #[arg(long)]
    pub n: u32,
    /// Quantizer box; defaults to the data range.
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    /// Predicate table JSON mapping segments to types; default admits every type.
    #[arg(long)]
    pub classifier: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    pub grammar: PathBuf,
    pub history: PathBuf,
    /// Cost spec: {"local_cost": ..., "per_type_offsets": {...}} or a bare local cost (inline JSON or path).
    #[arg(long)]
    pub cost: String,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long)]
    pub classifier: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    pub grammar: PathBuf,
    #[arg(long)]
    pub costs: PathBuf,
    /// Length ceiling; without it weights are exp(-Lambda l).
    #[arg(long = "K", conflicts_with = "k_sweep")]
    pub ceiling: Option<f64>,
    /// K1:K2:step
    #[arg(long = "k-sweep")]
    pub k_sweep: Option<String>,
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Args)]
pub struct ConcentrateArgs {
    /// Comma list or lo:hi:step; "inf" allowed.
    #[arg(long = "lambda-sweep", default_value = "0,1,2,5,10,50")]
    pub lambda_sweep: String,
    /// Lattice setup JSON; defaults to the 11-point, 3-interior-node quadratic lattice.
    #[arg(long)]
    pub setup: Option<PathBuf>,
    /// Emit the full JSON curve instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum ElCmd {
    /// Fit l = c L + G(b) - G(a) on a node grid and check it on random histories.
    Fit {
        /// Local cost to decompose (inline JSON or path).
        #[arg(long)]
        ell: String,
        /// Reference Lagrangian L_loc.
        #[arg(long, alias = "reference")]
        lagrangian: String,
        /// lo:hi:count node grid for the fit.
        #[arg(long, default_value = "-1:1:9", allow_hyphen_values = true)]
        grid: String,
        /// Gauge reference node value (default: smallest grid value).
        #[arg(long, allow_hyphen_values = true)]
        x_ref: Option<f64>,
        /// Random histories used for the global check.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Stationary interior configurations between fixed endpoints.
    Stationary {
        #[arg(long)]
        cost: String,
        /// Scalar endpoints `a,b`.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "from")]
        endpoints: Option<String>,
        /// Vector initial endpoint (comma-separated), with --to.
        #[arg(long, allow_hyphen_values = true, requires = "to", conflicts_with = "endpoints")]
        from: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "from")]
        to: Option<String>,
        /// Number of segments.
        #[arg(long = "N")]
        segments: usize,
        /// lo:hi:count grid for the exhaustive solver (default: Newton multistart).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Compare where two local EL operators vanish.
    Shared {
        #[arg(long)]
        ell: String,
        #[arg(long)]
        reference: String,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum PathintCmd {
    /// Compare redundancy weights at ceiling K with exp(-S_E / hbar_eff).
    ///
    /// The JSON report goes to stdout/--output; --csv writes rows (S_E, P_redundancy, P_euclidean).
    Closure {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        grammar: PathBuf,
        /// Lattice JSON: steps, epsilon, grid, x_initial, x_final, action {mass, potential, rule}.
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long = "K", required_unless_present = "budget")]
        ceiling: Option<f64>,
        /// Alternative to --K: ceiling = max l + budget.
        #[arg(long, conflicts_with = "ceiling")]
        budget: Option<f64>,
        /// Endpoint-only boundary term added to every cost.
        #[arg(long, default_value_t = 0.0)]
        boundary: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Normalized exp(-S_E / hbar) over every lattice history (CSV columns: index, S_E, P).
    Measure {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        hbar: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleName {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Debug, Subcommand)]
pub enum GaugeCmd {
    /// Induced orbit weights P(W) ~ g(W) exp(-Lambda l(W)).
    Toy {
        #[arg(long, value_enum)]
        rule: RuleName,
        #[arg(long)]
        ell_plus: f64,
        #[arg(long)]
        ell_minus: f64,
        #[arg(long)]
        lambda: f64,
    },
}

#[derive(Debug, Args)]
pub struct CosmoArgs {
    #[arg(long = "H0")]
    pub h0: f64,
    #[arg(long = "G")]
    pub g: f64,
    #[arg(long)]
    pub hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long)]
    pub lambda: f64,
    /// Inputs are SI (1/s, m^3 kg^-1 s^-2, J s); convert to c = 1.
    #[arg(long)]
    pub si: bool,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Run only criteria whose name, tag or number matches.
    #[arg(long)]
    pub filter: Option<String>,
}

/// Outcome of a successful dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    AssertionFailed,
}

struct Context_ {
    pretty: bool,
    output: Option<PathBuf>,
    seed: u64,
    precision: u32,
}

impl Context_ {
    fn write(&self, text: &str) -> anyhow::Result<()> {
        match &self.output {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }

    fn json(&self, value: &impl Serialize) -> anyhow::Result<()> {
        let v = serde_json::to_value(value)?;
        if self.pretty {
            return self.write(&human_table(&v));
        }
        let mut text = serde_json::to_string(&v)?;
        text.push('\n');
        self.write(&text)
    }
}

pub fn precision_from_env(flag: Option<u32>) -> anyhow::Result<u32> {
    if let Some(p) = flag {
        return Ok(p);
    }
    match std::env::var("SYNLAB_PRECISION") {
        Ok(v) => v.trim().parse().with_context(|| format!("SYNLAB_PRECISION={v} is not an integer")),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

pub fn run(cli: Cli) -> anyhow::Result<Status> {
    let ctx = Context_ {
        pretty: cli.pretty,
        output: cli.output.clone(),
        seed: cli.seed,
        precision: precision_from_env(cli.precision)?,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            bail!("--workers must be at least 1");
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build()?;
    pool.install(|| dispatch(&ctx, cli.command))
}

fn dispatch(ctx: &Context_, command: Command) -> anyhow::Result<Status> {
    match command {
        Command::Grammar { action } => grammar_cmd(ctx, action),
        Command::Encode(args) => encode_cmd(ctx, args),
        Command::Cost(args) => cost_cmd(ctx, args),
        Command::Weight(args) => weight_cmd(ctx, args),
        Command::Concentrate(args) => concentrate_cmd(ctx, args),
        Command::El { action } => el_cmd(ctx, action),
        Command::Pathint { action } => pathint_cmd(ctx, action),
        Command::Gauge { action } => gauge_cmd(ctx, action),
        Command::Cosmo(args) => cosmo_cmd(ctx, args),
        Command::Reproduce(args) => reproduce_cmd(ctx, args),
    }
}

fn load_spec(path: &Path) -> anyhow::Result<GrammarSpec> {
    Ok(GrammarSpec::load(path)?)
}

fn junk_rule(spec: &GrammarSpec) -> anyhow::Result<JunkRule> {
    Ok(JunkRule::from_spec(&spec.junk_rule, spec.alphabet_size)?)
}

fn grammar_cmd(ctx: &Context_, action: GrammarCmd) -> anyhow::Result<Status> {
    match action {
        GrammarCmd::Check { grammar } => {
            let spec = load_spec(&grammar)?;
            let defs = spec.header_defs()?;
            let codewords: Vec<_> = defs.iter().map(|d| d.codeword.clone()).collect();
            let prefix = check_prefix_free(&codewords)?;
            let embedding = find_embedding(&defs);
            let kraft = kraft_sum(&codewords, spec.alphabet_size);
            let verdict = Grammar::from_spec(&spec);
            let valid = verdict.is_ok();
            ctx.json(&json!({
                "valid": valid,
                "error": verdict.err().map(|e| e.to_string()),
                "prefix_free": prefix,
                "embedding": embedding,
                "kraft_sum": kraft.sum.to_string(),
                "kraft_decimal": decimal_string(&kraft.sum, ctx.precision),
                "kraft_complete": kraft.complete,
            }))?;
            Ok(if valid { Status::Ok } else { Status::AssertionFailed })
        }
        GrammarCmd::Count { grammar, length } => {
            let rule = junk_rule(&load_spec(&grammar)?)?;
            let counts = rule.counts_up_to(length);
            let cumulative: num_bigint::BigUint = counts.iter().sum();
            ctx.json(&json!({"L": length, "count": counts[length].to_string(), "cumulative": cumulative.to_string()}))?;
            Ok(Status::Ok)
        }
        GrammarCmd::Gamma { grammar, length } => {
            let rule = junk_rule(&load_spec(&grammar)?)?;
            let growth = rule.growth_rate()?;
            let mut v = serde_json::to_value(growth)?;
            if let Some(l) = length {
                v["L"] = json!(l);
                v["count_ratio"] = json!(rule.log_growth_at(l).exp());
            }
            ctx.json(&v)?;
            Ok(Status::Ok)
        }
        GrammarCmd::Decode { grammar, symbols } => {
            let g = Grammar::load(&grammar)?;
            let list = decode_stream(&g, &parse_symbols(&symbols)?)?;
            ctx.json(&list)?;
            Ok(Status::Ok)
        }
    }
}

fn load_history(path: &Path, n: u32) -> anyhow::Result<DiscreteHistory> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(DiscreteHistory::from_csv(file, n)?)
}

fn load_classifier(path: Option<&Path>, grammar: &Grammar) -> anyhow::Result<Classifier> {
    match path {
        None => Ok(Classifier::permissive(grammar)),
        Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)
            .with_context(|| format!("classifier {}", p.display()))?),
    }
}

fn encode_cmd(ctx: &Context_, args: EncodeArgs) -> anyhow::Result<Status> {
    let grammar = Grammar::load(&args.grammar)?;
    let history = load_history(&args.history, args.n)?;
    let d = history.dimension();
    let values = history.nodes().iter().flatten().copied();
    let (data_lo, data_hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let lo = args.lo.unwrap_or(data_lo);
    let hi = args.hi.unwrap_or(if data_hi > lo { data_hi } else { lo + 1.0 });
    let payload = grammar.headers()[0].payload_length;
    if payload == 0 || payload % (2 * d) != 0 {
        bail!("payload length {payload} is not a multiple of 2 x dimension {d}");
    }
    let quantizer = Quantizer::new(lo, hi, (payload / (2 * d)) as u32)?;
    let classifier = load_classifier(args.classifier.as_deref(), &grammar)?;
    let program = encode(&history, &grammar, &quantizer, &classifier)?;
    let decoded = decode_history(&grammar, &quantizer, d, &program.symbols)?;
    ctx.json(&json!({
        "program": program,
        "raw_length": program.raw_length(),
        "quantizer": {"lo": lo, "hi": hi, "digits": quantizer.digits},
        "decoded_nodes": decoded,
    }))?;
    Ok(Status::Ok)
}

fn load_cost_spec(arg: &str) -> anyhow::Result<CostSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| arg.to_string())?
    };
    match CostSpec::from_json(&text) {
        Ok(spec) => Ok(spec),
        Err(_) => {
            let local = LocalCost::from_json_or_path(&text)?;
            local.validate()?;
            Ok(CostSpec::new(local))
        }
    }
}

fn cost_cmd(ctx: &Context_, args: CostArgs) -> anyhow::Result<Status> {
    let grammar = Grammar::load(&args.grammar)?;
    let history = load_history(&args.history, args.n)?;
    let spec = load_cost_spec(&args.cost)?;
    let classifier = load_classifier(args.classifier.as_deref(), &grammar)?;
    ctx.json(&minimal_cost(&history, &grammar, &spec, &classifier)?)?;
    Ok(Status::Ok)
}

fn read_costs(path: &Path) -> anyhow::Result<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let id = record.get(0).context("missing history_id column")?.to_string();
        let ell: f64 =
            record.get(1).context("missing ell column")?.parse().with_context(|| format!("row {}: bad cost", i + 1))?;
        out.push((id, ell));
    }
    Ok(out)
}

/// `lo:hi:step` (inclusive) or a comma list.
pub fn parse_sweep(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi, step): (f64, f64, f64) =
            (parts[0].trim().parse()?, parts[1].trim().parse()?, parts[2].trim().parse()?);
        if !(step > 0.0) || hi < lo {
            bail!("sweep {text}: need lo <= hi and step > 0");
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| lo + step * i as f64).collect());
    }
    text.split(',').map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number {t:?}"))).collect()
}

fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("grid {text}: expected lo:hi:count");
    }
    let (lo, hi): (f64, f64) = (parts[0].parse()?, parts[1].parse()?);
    let count: usize = parts[2].parse()?;
    if count < 2 {
        bail!("grid needs at least two points");
    }
    Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
}

fn parse_point(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',').map(|t| Ok(t.trim().parse::<f64>()?)).collect()
}

fn weight_cmd(ctx: &Context_, args: WeightArgs) -> anyhow::Result<Status> {
    let profile = RedundancyProfile::from_rule(junk_rule(&load_spec(&args.grammar)?)?)?;
    let costs = read_costs(&args.costs)?;
    if let Some(sweep) = args.k_sweep {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["history_id", "K", "W_exact", "P"])?;
        for k in parse_sweep(&sweep)? {
            let table = weight_table(&profile, &costs, Some(k), !args.no_normalize)?;
            for e in &table.entries {
                let exact = e.w_exact.as_ref().map(|w| w.to_string()).unwrap_or_default();
                w.write_record([e.id.clone(), k.to_string(), exact, e.probability.to_string()])?;
            }
        }
        ctx.write(&String::from_utf8(w.into_inner()?)?)?;
        return Ok(Status::Ok);
    }
    let table = weight_table(&profile, &costs, args.ceiling, !args.no_normalize)?;
    let mut v = serde_json::to_value(&table)?;
    v["gamma"] = json!(profile.gamma());
    if let Some(heaviest) = table.entries.iter().filter_map(|e| e.w_exact.as_ref()).max() {
        for (entry, json_entry) in table.entries.iter().zip(v["entries"].as_array_mut().expect("entries array")) {
            if let Some(w) = &entry.w_exact {
                json_entry["count_ratio"] = json!(decimal_string(&big_ratio(w, heaviest), ctx.precision));
            }
        }
    }
    ctx.json(&v)?;
    Ok(Status::Ok)
}

fn concentrate_cmd(ctx: &Context_, args: ConcentrateArgs) -> anyhow::Result<Status> {
    let setup: ConcentrationSetup = match &args.setup {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => suite::concentration_lattice(),
    };
    let lambdas: Vec<f64> = args
        .lambda_sweep
        .split(',')
        .map(|t| if t.trim() == "inf" { Ok(vec![f64::INFINITY]) } else { parse_sweep(t) })
        .collect::<anyhow::Result<Vec<_>>>()?
        .concat();
    let curve = concentration_experiment(&setup, &lambdas)?;
    if args.json {
        ctx.json(&curve)?;
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lambda", "mass"])?;
        for p in &curve.points {
            w.write_record([p.lambda.to_string(), p.mass.to_string()])?;
        }
        ctx.write(&String::from_utf8(w.into_inner()?)?)?;
    }
    Ok(if curve.nondecreasing { Status::Ok } else { Status::AssertionFailed })
}

fn el_cmd(ctx: &Context_, action: ElCmd) -> anyhow::Result<Status> {
    match action {
        ElCmd::Fit { ell, lagrangian: reference, grid, x_ref, samples: histories } => {
            let (ell, reference) = (LocalCost::from_json_or_path(&ell)?, LocalCost::from_json_or_path(&reference)?);
            let grid = parse_grid(&grid)?;
            let x_ref = x_ref.map(|x| vec![x]);
            let fit = el_locality_fit(&ell, &reference, &grid_segments(&grid), x_ref.as_deref())?;
            let (lo, hi) = (grid[0], grid[grid.len() - 1]);
            let sample = random_histories(&grid, lo, hi, 5, histories, ctx.seed);
            let global = global_decomposition_check(&ell, &reference, &fit, &sample)?;
            ctx.json(&json!({"fit": fit, "global": global}))?;
            Ok(Status::Ok)
        }
        ElCmd::Stationary { cost, endpoints, from, to, segments, grid } => {
            let cost = LocalCost::from_json_or_path(&cost)?;
            let (from, to) = match (endpoints, from, to) {
                (Some(e), _, _) => {
                    let ab = parse_point(&e)?;
                    if ab.len() != 2 {
                        bail!("--endpoints expects two values a,b");
                    }
                    (vec![ab[0]], vec![ab[1]])
                }
                (None, Some(f), Some(t)) => (parse_point(&f)?, parse_point(&t)?),
                _ => bail!("give --endpoints a,b or --from/--to"),
            };
            let solver = match grid {
                Some(g) => StationarySolver::ExhaustiveGrid { grid: parse_grid(&g)? },
                None => StationarySolver::Newton(NewtonOptions { seed: ctx.seed, ..NewtonOptions::default() }),
            };
            let set = stationary_set(&cost, &from, &to, segments, &solver)?;
            ctx.json(&json!({"configurations": set}))?;
            Ok(Status::Ok)
        }
        ElCmd::Shared { ell, reference, lo, hi, dim, samples } => {
            let (ell, reference) = (LocalCost::from_json_or_path(&ell)?, LocalCost::from_json_or_path(&reference)?);
            let report = shared_stationarity(&ell, &reference, &SampleBox { lo, hi, dim, samples, seed: ctx.seed })?;
            ctx.json(&report)?;
            Ok(Status::Ok)
        }
    }
}

#[derive(Debug, Deserialize)]
struct LatticeFile {
    #[serde(flatten)]
    lattice: LatticeSpec,
    action: ActionSpec,
}

fn load_lattice(path: &Path) -> anyhow::Result<LatticeFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("lattice {}", path.display()))
}

fn pathint_cmd(ctx: &Context_, action: PathintCmd) -> anyhow::Result<Status> {
    match action {
        PathintCmd::Closure { alpha, grammar, lattice, ceiling, budget, boundary, csv } => {
            let file = load_lattice(&lattice)?;
            let profile = RedundancyProfile::from_rule(junk_rule(&load_spec(&grammar)?)?)?;
            let setup = ClosureSetup::new(&file.lattice, &file.action, alpha, boundary, &profile)?;
            let k = match (ceiling, budget) {
                (Some(k), _) => k,
                (None, Some(b)) => setup.max_cost() + b,
                (None, None) => bail!("one of --K or --budget is required"),
            };
            let report = setup.check(&profile, k)?;
            if let Some(path) = csv {
                let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
                w.write_record(["S_E", "P_redundancy", "P_euclidean"])?;
                for r in &report.rows {
                    w.write_record([r.s_e.to_string(), r.p_redundancy.to_string(), r.p_euclidean.to_string()])?;
                }
                w.flush()?;
            }
            ctx.json(&report)?;
            Ok(if report.within_bound { Status::Ok } else { Status::AssertionFailed })
        }
        PathintCmd::Measure { lattice, hbar } => {
            let file = load_lattice(&lattice)?;
            let m = exhaustive_measure(&file.lattice, &file.action, hbar)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["index", "S_E", "P"])?;
            for (i, (s, p)) in m.actions.iter().zip(&m.probabilities).enumerate() {
                w.write_record([i.to_string(), s.to_string(), p.to_string()])?;
            }
            ctx.write(&String::from_utf8(w.into_inner()?)?)?;
            Ok(Status::Ok)
        }
    }
}

fn gauge_cmd(ctx: &Context_, action: GaugeCmd) -> anyhow::Result<Status> {
    let GaugeCmd::Toy { rule, ell_plus, ell_minus, lambda } = action;
    let rule = match rule {
        RuleName::A => SelectionRule::RuleA,
        RuleName::B => SelectionRule::RuleB,
    };
    let w = induced_weight(&rule, ell_plus, ell_minus, lambda)?;
    ctx.json(&json!({
        "P(+1)": w.p_plus,
        "P(-1)": w.p_minus,
        "g": {"+1": w.g_plus, "-1": w.g_minus},
        "ratio": w.p_minus / w.p_plus,
    }))?;
    Ok(Status::Ok)
}

fn cosmo_cmd(ctx: &Context_, args: CosmoArgs) -> anyhow::Result<Status> {
    let params = if args.si {
        CosmoParams::from_si(args.h0, args.g, args.hbar, args.eta, args.lambda)?
    } else {
        CosmoParams::new(args.h0, args.g, args.hbar, args.eta, args.lambda)?
    };
    ctx.json(&calibrate(&params)?)?;
    Ok(Status::Ok)
}

fn reproduce_cmd(ctx: &Context_, args: ReproduceArgs) -> anyhow::Result<Status> {
    let config = SuiteConfig { seed: ctx.seed };
    let selected = suite::select(args.filter.as_deref());
    if selected.is_empty() {
        bail!("no criterion matches {:?}", args.filter.unwrap_or_default());
    }
    let mut reports = Vec::new();
    for c in &selected {
        let start = Instant::now();
        let report = c.run(&config).with_context(|| format!("criterion {} ({})", c.id, c.name))?;
        let elapsed = start.elapsed();
        eprintln!(
            "[{}] {:>2} {:<26} {:>8.2?}{}",
            if report.passed { "pass" } else { "FAIL" },
            c.id,
            c.name,
            elapsed,
            if elapsed > c.budget { format!("  over budget {:?}", c.budget) } else { String::new() }
        );
        reports.push(report);
    }
    let passed = reports.iter().all(|r| r.passed);
    let bundle = json!({"seed": config.seed, "passed": passed, "reports": reports});
    if ctx.pretty {
        let mut text = String::new();
        for r in &reports {
            text.push_str(&format!(
                "criterion {:>2}  {:<26} {}\n",
                r.criterion,
                r.name,
                if r.passed { "pass" } else { "FAIL" }
            ));
            for a in &r.assertions {
                text.push_str(&format!("    [{}] {}  {}\n", if a.passed { "ok" } else { "!!" }, a.invariant, a.detail));
            }
        }
        ctx.write(&text)?;
    } else {
        let mut text = canonical_json(&bundle);
        text.push('\n');
        ctx.write(&text)?;
    }
    Ok(if passed { Status::Ok } else { Status::AssertionFailed })
}

/// Two-column `field  value` table with nested keys joined by dots.
pub fn human_table(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) if !map.is_empty() => {
                for (k, x) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, rows);
                }
            }
            Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
                for (i, x) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, rows);
                }
            }
            Value::String(s) => rows.push((prefix.to_string(), s.clone())),
            other => rows.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, x)| format!("{k:<width$}  {x}\n")).collect()
}
