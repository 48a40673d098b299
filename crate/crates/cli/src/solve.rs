use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hyperdisc::mixedchar::InterlacingFamily;
use hyperdisc::solver::{brute_force, kadison_singer_search, KRule, Oracle, SolverConfig};
use hyperdisc::unipoly::{real_roots, DEFAULT_TOL};
use hyperdisc::{Error, Scalar};
use serde::Serialize;

use crate::instance::{self, Inst, Instance, View};
use crate::output::{self, num};
use crate::{Backend, CliError, Format, Global, Outcome};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Brute,
    #[default]
    Blocked,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    #[default]
    Enumeration,
    DetMinor,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    #[default]
    Proof,
    Stated,
}

#[derive(Clone, Debug, Args)]
pub struct SearchArgs {
    /// Slack of the certificate `(1 + δ)·(root-node max root)`.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Coordinates fixed per round; `⌈√n⌉` by default.
    #[arg(long)]
    pub block: Option<usize>,
    /// Number of top coefficients (even); derived from `--rule` by default.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = OracleArg::Enumeration)]
    pub oracle: OracleArg,
    #[arg(long, value_enum, default_value_t = RuleArg::Proof)]
    pub rule: RuleArg,
}

impl SearchArgs {
    pub fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            delta: self.delta,
            block: self.block,
            k: self.k,
            rule: match self.rule {
                RuleArg::Proof => KRule::Proof,
                RuleArg::Stated => KRule::Stated,
            },
            seed,
            oracle: match self.oracle {
                OracleArg::Enumeration => Oracle::Enumeration,
                OracleArg::DetMinor => Oracle::DetMinor,
            },
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct SolveArgs {
    /// Instance file.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Blocked)]
    pub method: Method,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub status: &'static str,
    pub method: &'static str,
    pub backend: &'static str,
    pub assignment: Vec<usize>,
    pub labels: Vec<String>,
    /// Norm of the chosen leaf's discrepancy vector.
    pub certified: f64,
    pub root_max_root: f64,
    /// Certificate threshold (blocked search only).
    pub bound: Option<f64>,
    pub estimate: Option<f64>,
    pub oracle_calls: Option<usize>,
    pub block: Option<usize>,
    pub k: Option<usize>,
    pub delta: Option<f64>,
    pub seed: u64,
}

pub fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Rational => "rational",
        Backend::Float => "float",
    }
}

fn solve_family<T: Scalar, F: InterlacingFamily<T>>(
    fam: &F,
    method: Method,
    cfg: &SolverConfig,
    backend: Backend,
) -> Result<SolveReport, Error> {
    let root_max_root = real_roots(&fam.node_poly(&[])?, DEFAULT_TOL)?.max();
    let base = SolveReport {
        status: "certified",
        method: "brute",
        backend: backend_name(backend),
        assignment: Vec::new(),
        labels: Vec::new(),
        certified: f64::NAN,
        root_max_root,
        bound: None,
        estimate: None,
        oracle_calls: None,
        block: None,
        k: None,
        delta: None,
        seed: cfg.seed,
    };
    match method {
        Method::Brute => {
            let (leaf, norm) = brute_force(fam)?;
            let labels = leaf.iter().enumerate().map(|(i, &c)| fam.choice_label(i, c)).collect();
            Ok(SolveReport { assignment: leaf, labels, certified: norm, ..base })
        }
        Method::Blocked => {
            let r = kadison_singer_search(fam, cfg)?;
            Ok(SolveReport {
                method: "blocked",
                assignment: r.assignment,
                labels: r.labels,
                certified: r.certified,
                bound: Some(r.bound),
                estimate: Some(r.estimate),
                oracle_calls: Some(r.oracle_calls),
                block: Some(r.block),
                k: Some(r.k),
                delta: Some(cfg.delta),
                ..base
            })
        }
    }
}

fn solve_inst<T: Scalar>(inst: &Inst<T>, method: Method, cfg: &SolverConfig, backend: Backend) -> Result<SolveReport, Error> {
    match inst {
        Inst::Kls(k) => solve_family(k, method, cfg, backend),
        Inst::Sr { inst, .. } => solve_family(inst, method, cfg, backend),
    }
}

/// Runs the search in the requested arithmetic.
pub fn solve_instance(inst: &Instance, method: Method, cfg: &SolverConfig, backend: Backend) -> Result<SolveReport, Error> {
    match inst.view(backend)? {
        View::Exact(i) => solve_inst(i, method, cfg, backend),
        View::Float(i) => solve_inst(&*i, method, cfg, backend),
    }
}

const HEADER: [&str; 13] = [
    "status",
    "method",
    "backend",
    "assignment",
    "labels",
    "certified",
    "root_max_root",
    "bound",
    "estimate",
    "oracle_calls",
    "block",
    "k",
    "seed",
];

fn csv_row(r: &SolveReport) -> Vec<String> {
    let join = |v: Vec<String>| v.join(" ");
    let opt = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
    vec![
        r.status.into(),
        r.method.into(),
        r.backend.into(),
        join(r.assignment.iter().map(|x| x.to_string()).collect()),
        join(r.labels.clone()),
        num(r.certified),
        num(r.root_max_root),
        r.bound.map_or(String::new(), num),
        r.estimate.map_or(String::new(), num),
        opt(r.oracle_calls),
        opt(r.block),
        opt(r.k),
        r.seed.to_string(),
    ]
}

#[derive(Serialize)]
struct FailureReport {
    status: &'static str,
    certified: f64,
    bound: f64,
}

pub fn run(a: &SolveArgs, g: &Global) -> Result<Outcome, CliError> {
    let inst = instance::load(&a.file)?;
    let cfg = a.search.config(g.seed);
    match solve_instance(&inst, a.method, &cfg, g.backend) {
        Ok(report) => Ok(Outcome::ok(match g.format {
            Format::Json => output::json(&report)?,
            Format::Csv => output::csv(&HEADER, &[csv_row(&report)])?,
        })),
        Err(Error::CertificationFailed { certified, bound }) => {
            let text = match g.format {
                Format::Json => output::json(&FailureReport { status: "certification-failed", certified, bound })?,
                Format::Csv => output::csv(&["status", "certified", "bound"], &[vec![
                    "certification-failed".into(),
                    num(certified),
                    num(bound),
                ]])?,
            };
            Ok(Outcome { text, code: 2 })
        }
        Err(e) => Err(e.into()),
    }
}
