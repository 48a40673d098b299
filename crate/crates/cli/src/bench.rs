use std::time::Instant;

use clap::Args;
use hyperdisc::solver::{random_baseline, Baseline};
use hyperdisc::{Error, Scalar};
use serde_json::{Map, Value};

use crate::gen::{generate, GenArgs};
use crate::instance::{Inst, Instance, View};
use crate::output::{self, num};
use crate::solve::{solve_instance, Method, SearchArgs};
use crate::{Backend, CliError, Format, Global, Outcome};

pub const MAX_COUNT: usize = 1000;

#[derive(Clone, Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub instance: GenArgs,
    /// Number of instances; instance `i` uses seed `--seed + i`.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Random assignments drawn for the baseline; 0 leaves its columns empty.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Append wall-clock columns (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
}

const COLUMNS: [&str; 18] = [
    "index",
    "seed",
    "kind",
    "n",
    "sigma",
    "eps",
    "bound",
    "brute",
    "blocked",
    "blocked_bound",
    "root_max_root",
    "within_bound",
    "baseline_min",
    "baseline_q25",
    "baseline_median",
    "baseline_q75",
    "baseline_max",
    "baseline_mean",
];
const TIMING_COLUMNS: [&str; 3] = ["brute_ms", "blocked_ms", "baseline_ms"];

fn baseline_inst<T: Scalar>(inst: &Inst<T>, trials: usize, seed: u64) -> hyperdisc::Result<Option<Baseline>> {
    match inst {
        Inst::Kls(k) => random_baseline(k, trials, seed),
        Inst::Sr { inst, .. } => random_baseline(inst, trials, seed),
    }
}

fn baseline(inst: &Instance, trials: usize, seed: u64, backend: Backend) -> hyperdisc::Result<Option<Baseline>> {
    match inst.view(backend)? {
        View::Exact(i) => baseline_inst(i, trials, seed),
        View::Float(i) => baseline_inst(&*i, trials, seed),
    }
}

fn f(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn ms(start: Instant) -> Value {
    f(start.elapsed().as_secs_f64() * 1e3)
}

fn row(a: &BenchArgs, g: &Global, index: usize) -> Result<Vec<(&'static str, Value)>, CliError> {
    let seed = g.seed + index as u64;
    let (exact, meta) = generate(&a.instance, seed)?;
    let cfg = a.search.config(seed);
    // Scale-free bound: 4σ, or 4ε + 2ε² with ε = ε₁ + ε₂.
    let (sigma, eps, bound) = match &exact {
        Inst::Kls(k) => (Some(k.sigma()), None, 4.0 * k.sigma()),
        Inst::Sr { inst, .. } => {
            let e = inst.eps1().to_f64() + inst.eps2().to_f64();
            (None, Some(e), inst.bound().to_f64())
        }
    };
    let inst = Instance::Exact(exact);
    let t = Instant::now();
    let brute = solve_instance(&inst, Method::Brute, &cfg, g.backend)?;
    let brute_ms = ms(t);
    let t = Instant::now();
    let blocked = match solve_instance(&inst, Method::Blocked, &cfg, g.backend) {
        Ok(r) => Some(r),
        Err(Error::CertificationFailed { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let blocked_ms = ms(t);
    let t = Instant::now();
    let base = baseline(&inst, a.trials, seed, g.backend)?;
    let baseline_ms = ms(t);

    let limit = (1.0 + a.search.delta) * bound;
    let within = blocked.as_ref().map(|r| r.certified <= limit + 1e-9 * limit.max(1.0));
    let q = |pick: fn(&Baseline) -> f64| base.as_ref().map_or(Value::Null, |b| f(pick(b)));
    let mut cells = vec![
        ("index", Value::from(index)),
        ("seed", Value::from(seed)),
        ("kind", Value::from(meta.kind)),
        ("n", Value::from(inst.n())),
        ("sigma", sigma.map_or(Value::Null, f)),
        ("eps", eps.map_or(Value::Null, f)),
        ("bound", f(bound)),
        ("brute", f(brute.certified)),
        ("blocked", blocked.as_ref().map_or(Value::Null, |r| f(r.certified))),
        ("blocked_bound", blocked.as_ref().and_then(|r| r.bound).map_or(Value::Null, f)),
        ("root_max_root", f(brute.root_max_root)),
        ("within_bound", within.map_or(Value::Null, Value::Bool)),
        ("baseline_min", q(|b| b.min)),
        ("baseline_q25", q(|b| b.q25)),
        ("baseline_median", q(|b| b.median)),
        ("baseline_q75", q(|b| b.q75)),
        ("baseline_max", q(|b| b.max)),
        ("baseline_mean", q(|b| b.mean)),
    ];
    if a.timings {
        cells.extend([("brute_ms", brute_ms), ("blocked_ms", blocked_ms), ("baseline_ms", baseline_ms)]);
    }
    Ok(cells)
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().filter(|_| n.is_f64()).map_or_else(|| n.to_string(), num),
        other => other.to_string(),
    }
}

pub fn run(a: &BenchArgs, g: &Global) -> Result<Outcome, CliError> {
    if a.count == 0 || a.count > MAX_COUNT {
        return Err(CliError::Core(Error::InvalidParams(format!("count must lie in 1..={MAX_COUNT}"))));
    }
    let rows = (0..a.count).map(|i| row(a, g, i)).collect::<Result<Vec<_>, _>>()?;
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if a.timings {
        header.extend(TIMING_COLUMNS);
    }
    let text = match g.format {
        Format::Json => {
            let objects: Vec<Value> = rows
                .into_iter()
                .map(|r| Value::Object(r.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>()))
                .collect();
            output::json(&serde_json::json!({ "columns": header, "rows": objects }))?
        }
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|(_, v)| cell_text(v)).collect()).collect();
            output::csv(&header, &cells)?
        }
    };
    Ok(Outcome::ok(text))
}
