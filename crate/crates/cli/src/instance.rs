//! `hyperdisc-instance/1` files: the JSON shape, and conversion to and from
//! core instances. Everything is parsed into exact rationals; floats in a file
//! are taken at their exact binary value.

use std::borrow::Cow;
use std::collections::BTreeMap;

use hyperdisc::graph::Graph;
use hyperdisc::hyperbolic::{HyperbolicInstance, HyperbolicKind};
use hyperdisc::mixedchar::{exact_trace, KlsInstance, RandomVariable, SrInstance};
use hyperdisc::realstable::MultiPoly;
use hyperdisc::scalar::{format_rational, parse_rational, rational_from_f64_exact, rational_to_f64};
use hyperdisc::srdist::{effective_resistance_family_exact, mask_of, set_of, IsotropicFamily, SrDistribution};
use hyperdisc::{Error, Rational, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Backend, CliError};

pub const SCHEMA: &str = "hyperdisc-instance/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Kls,
    Sr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kls: Option<KlsPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sr: Option<SrPayload>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub kind: String,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HDto {
    Determinant { size: usize, e: Vec<Value> },
    Lorentz { dim: usize, e: Vec<Value> },
    ElemSym { n: usize, k: usize, e: Vec<Value> },
    Custom { nvars: usize, terms: Vec<(Vec<u32>, Value)>, e: Vec<Value> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarDto {
    pub support: Vec<Value>,
    pub probs: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlsPayload {
    pub h: HDto,
    pub vectors: Vec<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<Value>>>,
    pub variables: Vec<VarDto>,
    /// `‖Σ τᵢ² tr[vᵢ] vᵢ‖_h`; checked against a recomputation when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDto {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportDto {
    pub set: Vec<usize>,
    pub prob: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistDto {
    pub n: usize,
    pub support: Vec<SupportDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrPayload {
    pub distribution: DistDto,
    /// Effective-resistance family of this graph, or else `h` plus `vectors`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<HDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps2: Option<Value>,
}

/// An instance in one scalar type, with the graph it was built from if any.
#[derive(Clone, Debug, PartialEq)]
pub enum Inst<T> {
    Kls(KlsInstance<T>),
    Sr { inst: SrInstance<T>, graph: Option<GraphDto> },
}

/// A parsed instance. Files written with `p/q` strings load exactly; files
/// holding JSON numbers load as floats, validated with float tolerances.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Exact(Inst<Rational>),
    Float(Inst<f64>),
}

/// An instance in the arithmetic a command asked for.
pub enum View<'a> {
    Exact(&'a Inst<Rational>),
    Float(Cow<'a, Inst<f64>>),
}

impl<T: Scalar> Inst<T> {
    pub fn kind(&self) -> Kind {
        match self {
            Self::Kls(_) => Kind::Kls,
            Self::Sr { .. } => Kind::Sr,
        }
    }

    /// Depth of the interlacing family.
    pub fn n(&self) -> usize {
        match self {
            Self::Kls(k) => k.n(),
            Self::Sr { inst, .. } => inst.n(),
        }
    }

    pub fn convert<U: Scalar>(&self) -> hyperdisc::Result<Inst<U>> {
        Ok(match self {
            Self::Kls(k) => Inst::Kls(k.convert()?),
            Self::Sr { inst, graph } => Inst::Sr { inst: inst.convert()?, graph: graph.clone() },
        })
    }
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Self::Exact(i) => i.n(),
            Self::Float(i) => i.n(),
        }
    }

    pub fn view(&self, backend: Backend) -> hyperdisc::Result<View<'_>> {
        match (self, backend) {
            (Self::Exact(i), Backend::Rational) => Ok(View::Exact(i)),
            (Self::Exact(i), Backend::Float) => Ok(View::Float(Cow::Owned(i.convert()?))),
            (Self::Float(i), Backend::Float) => Ok(View::Float(Cow::Borrowed(i))),
            (Self::Float(_), Backend::Rational) => Err(Error::InvalidParams(
                "the instance file holds floating-point numbers; run with --backend float".into(),
            )),
        }
    }

    /// Floats always stay floats; exact instances follow `backend`.
    #[cfg(test)]
    pub fn to_file(&self, backend: Backend, generator: Option<Generator>) -> InstanceFile {
        match self {
            Self::Exact(i) => i.to_file(backend, generator),
            Self::Float(i) => i.to_file(Backend::Float, generator),
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

pub fn encode(r: &Rational, backend: Backend) -> Value {
    match backend {
        Backend::Rational => Value::String(format_rational(r)),
        Backend::Float => serde_json::Number::from_f64(rational_to_f64(r)).map_or(Value::Null, Value::Number),
    }
}

fn encode_vec<T: Scalar>(v: &[T], backend: Backend) -> Vec<Value> {
    v.iter().map(|c| encode(&c.to_rational(), backend)).collect()
}

fn conv<T: Scalar>(v: Vec<Rational>) -> Vec<T> {
    v.iter().map(T::from_rational).collect()
}

pub fn decode(v: &Value, what: &str) -> Result<Rational, CliError> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| bad(format!("{what}: `{s}` is not a rational number"))),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(Rational::from_i64(i));
            }
            n.as_f64()
                .and_then(rational_from_f64_exact)
                .ok_or_else(|| bad(format!("{what}: `{n}` is not a finite number")))
        }
        other => Err(bad(format!("{what}: expected a number or \"p/q\" string, found {other}"))),
    }
}

fn decode_vec(v: &[Value], what: &str) -> Result<Vec<Rational>, CliError> {
    v.iter().enumerate().map(|(i, c)| decode(c, &format!("{what}[{i}]"))).collect()
}

fn decode_vecs(v: &[Vec<Value>], what: &str) -> Result<Vec<Vec<Rational>>, CliError> {
    v.iter().enumerate().map(|(i, row)| decode_vec(row, &format!("{what}[{i}]"))).collect()
}

/// Probabilities written as floats are rescaled to sum to exactly one when
/// they already do up to rounding.
fn decode_probs(v: &[&Value], what: &str) -> Result<Vec<Rational>, CliError> {
    let mut p = v.iter().enumerate().map(|(i, c)| decode(c, &format!("{what}[{i}]"))).collect::<Result<Vec<_>, _>>()?;
    let sum = p.iter().fold(Rational::from_i64(0), |a, b| a + b);
    let one = Rational::from_i64(1);
    if v.iter().any(|c| c.is_number()) && sum != one && (rational_to_f64(&(sum.clone() - &one))).abs() <= 1e-9 {
        p = p.into_iter().map(|x| x / &sum).collect();
    }
    Ok(p)
}

fn encode_h<T: Scalar>(h: &HyperbolicInstance<T>, backend: Backend) -> HDto {
    let e = encode_vec(h.e(), backend);
    match h.kind() {
        HyperbolicKind::Determinant { size } => HDto::Determinant { size: *size, e },
        HyperbolicKind::Lorentz { dim } => HDto::Lorentz { dim: *dim, e },
        HyperbolicKind::ElemSym { n, k } => HDto::ElemSym { n: *n, k: *k, e },
        HyperbolicKind::Custom(p) => HDto::Custom {
            nvars: p.nvars(),
            terms: p.terms().iter().map(|(m, c)| (m.clone(), encode(&c.to_rational(), backend))).collect(),
            e,
        },
    }
}

fn decode_h<T: Scalar>(h: &HDto) -> Result<HyperbolicInstance<T>, CliError> {
    let (kind, e) = match h {
        HDto::Determinant { size, e } => (HyperbolicKind::Determinant { size: *size }, e),
        HDto::Lorentz { dim, e } => (HyperbolicKind::Lorentz { dim: *dim }, e),
        HDto::ElemSym { n, k, e } => (HyperbolicKind::ElemSym { n: *n, k: *k }, e),
        HDto::Custom { nvars, terms, e } => {
            let terms = terms
                .iter()
                .enumerate()
                .map(|(i, (m, c))| {
                    if m.len() != *nvars {
                        return Err(bad(format!("h.terms[{i}]: exponent vector has length {}, expected {nvars}", m.len())));
                    }
                    Ok((m.clone(), decode(c, &format!("h.terms[{i}]"))?))
                })
                .collect::<Result<Vec<_>, _>>()?;
            (HyperbolicKind::Custom(MultiPoly::from_terms(*nvars, terms).convert()), e)
        }
    };
    Ok(HyperbolicInstance::new(kind, conv(decode_vec(e, "h.e")?))?)
}

fn graph_of(g: &GraphDto) -> Result<Graph, CliError> {
    if let Some(labels) = &g.labels {
        if labels.len() != g.vertices {
            return Err(bad(format!("graph.labels has {} entries for {} vertices", labels.len(), g.vertices)));
        }
    }
    Ok(Graph::new(g.vertices, g.edges.iter().map(|&[u, v]| (u, v)).collect())?)
}

pub fn graph_dto(g: &Graph) -> GraphDto {
    GraphDto { vertices: g.vertices(), edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(), labels: None }
}

impl<T: Scalar> Inst<T> {
    pub fn to_file(&self, backend: Backend, generator: Option<Generator>) -> InstanceFile {
        let mut file = InstanceFile { schema: SCHEMA.into(), kind: self.kind(), generator, kls: None, sr: None };
        match self {
            Self::Kls(k) => {
                file.kls = Some(KlsPayload {
                    h: encode_h(k.h(), backend),
                    vectors: k.vectors().iter().map(|v| encode_vec(v, backend)).collect(),
                    factors: k.factors().map(|f| f.iter().map(|u| encode_vec(u, backend)).collect()),
                    variables: k
                        .vars()
                        .iter()
                        .map(|x| VarDto { support: encode_vec(x.support(), backend), probs: encode_vec(x.probs(), backend) })
                        .collect(),
                    sigma2: Some(k.sigma2()),
                });
            }
            Self::Sr { inst, graph } => {
                let distribution = DistDto {
                    n: inst.n(),
                    support: inst
                        .mu()
                        .support()
                        .iter()
                        .map(|(s, p)| SupportDto { set: set_of(*s), prob: encode(&p.to_rational(), backend) })
                        .collect(),
                };
                let (h, vectors) = match graph {
                    Some(_) => (None, None),
                    None => (
                        Some(encode_h(inst.h(), backend)),
                        Some(inst.vectors().iter().map(|v| encode_vec(v, backend)).collect()),
                    ),
                };
                file.sr = Some(SrPayload {
                    distribution,
                    graph: graph.clone(),
                    h,
                    vectors,
                    eps1: Some(encode(&inst.eps1().to_rational(), backend)),
                    eps2: Some(encode(&inst.eps2().to_rational(), backend)),
                });
            }
        }
        file
    }
}

/// Reads and validates an instance file.
pub fn load(path: &std::path::Path) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path)?;
    InstanceFile::parse(&text)
        .and_then(|f| f.to_instance())
        .map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            CliError::Core(c) => CliError::Parse(format!("{}: {c}", path.display())),
            other => other,
        })
}

fn any_number<'a>(mut vals: impl Iterator<Item = &'a Value>) -> bool {
    vals.any(Value::is_number)
}

fn h_has_numbers(h: &HDto) -> bool {
    match h {
        HDto::Determinant { e, .. } | HDto::Lorentz { e, .. } | HDto::ElemSym { e, .. } => any_number(e.iter()),
        HDto::Custom { terms, e, .. } => any_number(e.iter().chain(terms.iter().map(|(_, c)| c))),
    }
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    /// Whether any numeric payload entry is a JSON number rather than a string.
    pub fn holds_floats(&self) -> bool {
        let rows = |v: &Vec<Vec<Value>>| v.iter().flatten().any(Value::is_number);
        if let Some(k) = &self.kls {
            return h_has_numbers(&k.h)
                || rows(&k.vectors)
                || k.factors.as_ref().is_some_and(rows)
                || k.variables.iter().any(|x| any_number(x.support.iter().chain(&x.probs)));
        }
        if let Some(s) = &self.sr {
            return any_number(s.distribution.support.iter().map(|x| &x.prob))
                || s.h.as_ref().is_some_and(h_has_numbers)
                || s.vectors.as_ref().is_some_and(rows);
        }
        false
    }

    pub fn to_instance(&self) -> Result<Instance, CliError> {
        if self.schema != SCHEMA {
            return Err(bad(format!("schema `{}` is not supported (expected `{SCHEMA}`)", self.schema)));
        }
        if self.holds_floats() {
            self.build::<f64>().map(Instance::Float)
        } else {
            self.build::<Rational>().map(Instance::Exact)
        }
    }

    fn build<T: Scalar>(&self) -> Result<Inst<T>, CliError> {
        match (self.kind, &self.kls, &self.sr) {
            (Kind::Kls, Some(k), None) => kls_from(k).map(Inst::Kls),
            (Kind::Sr, None, Some(s)) => sr_from(s),
            (kind, _, _) => Err(bad(format!("kind `{kind:?}` needs exactly the matching payload object"))),
        }
    }
}

fn kls_from<T: Scalar>(p: &KlsPayload) -> Result<KlsInstance<T>, CliError> {
    let h = decode_h(&p.h)?;
    let vectors = decode_vecs(&p.vectors, "vectors")?.into_iter().map(conv).collect();
    let vars = p
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let what = format!("variables[{i}]");
            Ok(RandomVariable::new(
                conv(decode_vec(&v.support, &format!("{what}.support"))?),
                conv(decode_probs(&v.probs.iter().collect::<Vec<_>>(), &format!("{what}.probs"))?),
            )?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut inst = KlsInstance::new(h, vectors, vars)?;
    if let Some(f) = &p.factors {
        inst = inst.with_factors(decode_vecs(f, "factors")?.into_iter().map(conv).collect())?;
    }
    if let Some(s) = p.sigma2 {
        inst.check_sigma2(s)?;
    }
    Ok(inst)
}

fn sr_from<T: Scalar>(p: &SrPayload) -> Result<Inst<T>, CliError> {
    let d = &p.distribution;
    let mut masks = Vec::with_capacity(d.support.len());
    for (i, s) in d.support.iter().enumerate() {
        if let Some(&bad_el) = s.set.iter().find(|&&x| x >= d.n) {
            return Err(bad(format!("distribution.support[{i}]: element {bad_el} is not below n = {}", d.n)));
        }
        masks.push(mask_of(&s.set));
    }
    let probs = decode_probs(&d.support.iter().map(|s| &s.prob).collect::<Vec<_>>(), "distribution.support.prob")?;
    let support: Vec<(u64, T)> = masks.into_iter().zip(conv(probs)).collect();
    let mu = SrDistribution::new(d.n, support)?;
    let family = match (&p.graph, &p.h, &p.vectors) {
        (Some(g), None, None) => effective_resistance_family_exact(&graph_of(g)?)?.convert(),
        (None, Some(h), Some(v)) => {
            let h: HyperbolicInstance<T> = decode_h(h)?;
            let vectors: Vec<Vec<T>> = decode_vecs(v, "vectors")?.into_iter().map(conv).collect();
            let mut epsilon2 = T::zero();
            for v in &vectors {
                if v.len() != h.dim() {
                    return Err(bad(format!("vectors: length {} does not match h of dimension {}", v.len(), h.dim())));
                }
                epsilon2 = T::max_of(epsilon2, exact_trace(&h, v)?);
            }
            IsotropicFamily { h, vectors, factors: None, epsilon2, basis: None }
        }
        _ => return Err(bad("sr payload needs either `graph` or both `h` and `vectors`")),
    };
    let inst = SrInstance::new(mu, family)?;
    for (name, stored, actual) in [("eps1", &p.eps1, inst.eps1()), ("eps2", &p.eps2, inst.eps2())] {
        if let Some(v) = stored {
            let s = decode(v, name)?;
            let ok = match v {
                Value::String(_) if T::EXACT => s == actual.to_rational(),
                _ => (rational_to_f64(&s) - actual.to_f64()).abs() <= 1e-12 * actual.to_f64().abs().max(1.0),
            };
            if !ok {
                return Err(bad(format!("{name} = {} does not match the recomputed {}", format_rational(&s), actual.to_f64())));
            }
        }
    }
    Ok(Inst::Sr { inst, graph: p.graph.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyperdisc::generate::{kls_det, kls_lorentz, sr_ust, VarMix};

    fn emit(inst: &Instance, backend: Backend) -> String {
        serde_json::to_string_pretty(&inst.to_file(backend, None)).unwrap()
    }

    fn parse(text: &str) -> Instance {
        InstanceFile::parse(text).unwrap().to_instance().unwrap()
    }

    fn exact_cases() -> Vec<Instance> {
        let g = Graph::complete(3);
        vec![
            Instance::Exact(Inst::Kls(kls_det(3, 2, VarMix::Mixed, 1).unwrap())),
            Instance::Exact(Inst::Kls(kls_lorentz(3, 3, VarMix::Mixed, 2).unwrap())),
            Instance::Exact(Inst::Sr { inst: sr_ust(&g).unwrap(), graph: Some(graph_dto(&g)) }),
            Instance::Exact(Inst::Sr { inst: sr_ust(&Graph::diamond()).unwrap(), graph: None }),
        ]
    }

    #[test]
    fn exact_files_round_trip() {
        for inst in exact_cases() {
            let text = emit(&inst, Backend::Rational);
            let back = parse(&text);
            assert_eq!(back, inst);
            assert_eq!(emit(&back, Backend::Rational), text);
        }
    }

    #[test]
    fn float_files_load_as_floats_and_settle() {
        for inst in exact_cases() {
            let first = parse(&emit(&inst, Backend::Float));
            assert!(matches!(first, Instance::Float(_)));
            assert!(first.view(Backend::Rational).is_err());
            let text = emit(&first, Backend::Rational);
            assert_eq!(emit(&parse(&text), Backend::Float), text);
        }
    }

    #[test]
    fn numbers_decode_exactly() {
        assert_eq!(decode(&Value::String("2/4".into()), "x").unwrap(), Rational::from_ratio(1, 2));
        assert_eq!(decode(&serde_json::json!(0.25), "x").unwrap(), Rational::from_ratio(1, 4));
        assert_eq!(decode(&serde_json::json!(-3), "x").unwrap(), Rational::from_i64(-3));
        assert!(decode(&Value::String("1/0".into()), "x").is_err());
        assert!(decode(&Value::Bool(true), "x").is_err());
    }

    #[test]
    fn inconsistent_files_are_rejected() {
        let g = Graph::complete(3);
        let inst = Instance::Exact(Inst::Sr { inst: sr_ust(&g).unwrap(), graph: Some(graph_dto(&g)) });
        let mut file = inst.to_file(Backend::Rational, None);
        file.sr.as_mut().unwrap().eps1 = Some(Value::String("1/2".into()));
        assert!(file.to_instance().is_err());
        let mut file = inst.to_file(Backend::Rational, None);
        file.schema = "hyperdisc-instance/0".into();
        assert!(file.to_instance().is_err());
        let kls = Instance::Exact(Inst::Kls(kls_det(2, 2, VarMix::Rademacher, 3).unwrap()));
        let mut file = kls.to_file(Backend::Rational, None);
        file.kls.as_mut().unwrap().sigma2 = Some(123.0);
        assert!(file.to_instance().is_err());
    }
}
