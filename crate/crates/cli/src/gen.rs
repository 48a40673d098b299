use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hyperdisc::generate::{kls_det, kls_lorentz, sr_ust, VarMix};
use hyperdisc::graph::Graph;
use hyperdisc::mixedchar::SrInstance;
use hyperdisc::seeded;
use hyperdisc::srdist::{effective_resistance_family_exact, SrDistribution};
use hyperdisc::{Error, Rational, Scalar};
use rand::Rng;
use serde_json::{json, Value};

use crate::instance::{graph_dto, Generator, GraphDto, Inst, InstanceFile};
use crate::{output, CliError, Format, Global, Outcome};

pub const MAX_N: usize = 24;
pub const MAX_MPRIME: usize = 6;
pub const MAX_LORENTZ: usize = 12;
pub const MAX_EDGES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Rank-one `u uᵀ` under the determinant.
    KlsDet,
    /// Boundary vectors of the Lorentz cone.
    KlsLorentz,
    /// Uniform spanning trees with the effective-resistance family.
    SrUst,
    /// Spanning trees weighted by seeded edge weights `k/4`, `k ∈ 1..=8`.
    SrWst,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Vars {
    Rademacher,
    #[default]
    Mixed,
}

#[derive(Clone, Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Number of vectors (kls kinds).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Matrix size for kls-det.
    #[arg(long, default_value_t = 2)]
    pub mprime: usize,
    /// Ambient dimension for kls-lorentz.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = Vars::Mixed)]
    pub vars: Vars,
    /// Graph name for sr kinds: k3, k4, kN, pN, cN, diamond.
    #[arg(long)]
    pub graph: Option<String>,
    /// Graph JSON file `{vertices, edges, labels?}` for sr kinds.
    #[arg(long, conflicts_with = "graph")]
    pub graph_file: Option<PathBuf>,
}

impl From<Vars> for VarMix {
    fn from(v: Vars) -> Self {
        match v {
            Vars::Rademacher => VarMix::Rademacher,
            Vars::Mixed => VarMix::Mixed,
        }
    }
}

fn invalid(msg: String) -> CliError {
    CliError::Core(Error::InvalidParams(msg))
}

fn load_graph(a: &GenArgs) -> Result<(Graph, GraphDto), CliError> {
    let (g, dto) = match (&a.graph, &a.graph_file) {
        (Some(name), None) => {
            let g = Graph::by_name(name)?;
            let dto = graph_dto(&g);
            (g, dto)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let dto: GraphDto = serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            let g = Graph::new(dto.vertices, dto.edges.iter().map(|&[u, v]| (u, v)).collect())?;
            (g, dto)
        }
        _ => return Err(invalid("sr kinds need --graph or --graph-file".into())),
    };
    if g.num_edges() > MAX_EDGES {
        return Err(invalid(format!("graph has {} edges, limit {MAX_EDGES}", g.num_edges())));
    }
    Ok((g, dto))
}

/// The instance and the generator metadata recorded with it.
pub fn generate(a: &GenArgs, seed: u64) -> Result<(Inst<Rational>, Generator), CliError> {
    let mut params = BTreeMap::new();
    let inst = match a.kind {
        GenKind::KlsDet | GenKind::KlsLorentz => {
            if a.n == 0 || a.n > MAX_N {
                return Err(invalid(format!("n must lie in 1..={MAX_N} (got {})", a.n)));
            }
            params.insert("n".into(), json!(a.n));
            params.insert("vars".into(), json!(format!("{:?}", a.vars).to_lowercase()));
            if a.kind == GenKind::KlsDet {
                if a.mprime == 0 || a.mprime > MAX_MPRIME {
                    return Err(invalid(format!("mprime must lie in 1..={MAX_MPRIME} (got {})", a.mprime)));
                }
                params.insert("mprime".into(), json!(a.mprime));
                Inst::Kls(kls_det(a.n, a.mprime, a.vars.into(), seed)?)
            } else {
                if a.m < 2 || a.m > MAX_LORENTZ {
                    return Err(invalid(format!("m must lie in 2..={MAX_LORENTZ} (got {})", a.m)));
                }
                params.insert("m".into(), json!(a.m));
                Inst::Kls(kls_lorentz(a.n, a.m, a.vars.into(), seed)?)
            }
        }
        GenKind::SrUst | GenKind::SrWst => {
            let (g, dto) = load_graph(a)?;
            params.insert("graph".into(), a.graph.clone().map_or(Value::String("file".into()), Value::String));
            let inst = if a.kind == GenKind::SrUst {
                sr_ust(&g)?
            } else {
                let mut rng = seeded::named(seed, "weights", 0);
                let w: Vec<Rational> = (0..g.num_edges()).map(|_| Rational::from_ratio(rng.gen_range(1..=8), 4)).collect();
                SrInstance::new(SrDistribution::weighted_spanning_tree(&g, &w)?, effective_resistance_family_exact(&g)?)?
            };
            Inst::Sr { inst, graph: Some(dto) }
        }
    };
    let kind = a.kind.to_possible_value().expect("named variant").get_name().to_string();
    Ok((inst, Generator { kind, seed, params }))
}

pub fn run(a: &GenArgs, g: &Global) -> Result<Outcome, CliError> {
    if g.format != Format::Json {
        return Err(CliError::Usage("gen writes JSON only".into()));
    }
    let (inst, meta) = generate(a, g.seed)?;
    let file: InstanceFile = inst.to_file(g.backend, Some(meta));
    Ok(Outcome::ok(output::json(&file)?))
}
