//! Mixed characteristic polynomials of the two discrepancy families, by
//! expectation enumeration and by the multilinear operator collapse, with
//! interlacing-family checks and exact greedy descent.

mod family;

use std::collections::{BTreeSet, HashMap};

pub use family::{
    check_family, common_interlacing_check, descend_family, Descent, FamilyReport, InterlacingFamily,
    InterlacingVerdict, DESCENT_TOL,
};

use crate::error::{Error, Result};
use crate::hyperbolic::{ConeStatus, HyperbolicInstance};
use crate::linalg;
use crate::realstable::MultiPoly;
use crate::scalar::Scalar;
use crate::srdist::{set_of, IsotropicFamily, SrDistribution};
use crate::unipoly::{UniPoly, DEFAULT_TOL};

/// Largest number of completions a single node polynomial may enumerate.
pub const MAX_BRANCHES: u128 = 1 << 12;

/// Finite-support random variable. Support values are kept in increasing
/// order, so value order and index order agree.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomVariable<T> {
    support: Vec<T>,
    probs: Vec<T>,
}

impl<T: Scalar> RandomVariable<T> {
    pub fn new(support: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if support.len() != probs.len() || support.is_empty() {
            return Err(Error::InvalidDistribution("support and probabilities differ in length".into()));
        }
        let mut pairs: Vec<(T, T)> = support.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("support values are comparable"));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("repeated support value".into()));
        }
        if pairs.iter().any(|(_, p)| !p.is_positive()) {
            return Err(Error::InvalidDistribution("probabilities must be positive".into()));
        }
        let total = pairs.iter().fold(T::zero(), |a, (_, p)| a + p.clone());
        let off = (total - T::one()).abs();
        if (T::EXACT && !off.is_zero()) || off.to_f64() > 1e-12 {
            return Err(Error::InvalidDistribution("probabilities do not sum to 1".into()));
        }
        let (support, probs) = pairs.into_iter().unzip();
        Ok(Self { support, probs })
    }

    /// Uniform on `{−1, 1}`.
    pub fn rademacher() -> Self {
        let h = T::from_ratio(1, 2);
        Self { support: vec![-T::one(), T::one()], probs: vec![h.clone(), h] }
    }

    /// `{0, 1}` with `Pr[1] = p`.
    pub fn bernoulli(p: T) -> Result<Self> {
        Self::new(vec![T::zero(), T::one()], vec![T::one() - p.clone(), p])
    }

    pub fn constant(c: T) -> Self {
        Self { support: vec![c], probs: vec![T::one()] }
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn index_of(&self, value: &T) -> Option<usize> {
        self.support.iter().position(|s| s == value)
    }

    pub fn mean(&self) -> T {
        self.support
            .iter()
            .zip(&self.probs)
            .fold(T::zero(), |a, (s, p)| a + s.clone() * p.clone())
    }

    /// `E[(ξ − E ξ)^k]`.
    pub fn centered_moment(&self, k: usize) -> T {
        let mu = self.mean();
        self.support.iter().zip(&self.probs).fold(T::zero(), |a, (s, p)| {
            let c = s.clone() - mu.clone();
            let mut pw = T::one();
            for _ in 0..k {
                pw = pw * c.clone();
            }
            a + pw * p.clone()
        })
    }

    pub fn variance(&self) -> T {
        self.centered_moment(2)
    }

    pub fn convert<U: Scalar>(&self) -> RandomVariable<U> {
        let c = |v: &T| U::from_rational(&v.to_rational());
        RandomVariable {
            support: self.support.iter().map(c).collect(),
            probs: self.probs.iter().map(c).collect(),
        }
    }
}

/// Exact hyperbolic trace `−c_{d−1}/c_d` of `t ↦ h(te − v)`.
pub fn exact_trace<T: Scalar>(h: &HyperbolicInstance<T>, v: &[T]) -> Result<T> {
    let neg: Vec<T> = v.iter().map(|c| -c.clone()).collect();
    let p = h.restrict_line(&neg, h.e())?;
    let d = h.degree();
    if d == 0 {
        return Ok(T::zero());
    }
    Ok(-p.coeff(d - 1) / p.coeff(d))
}

fn axpy<T: Scalar>(acc: &mut [T], a: &T, v: &[T]) {
    for (x, y) in acc.iter_mut().zip(v) {
        *x = x.clone() + a.clone() * y.clone();
    }
}

fn check_vectors<T: Scalar>(h: &HyperbolicInstance<T>, vectors: &[Vec<T>]) -> Result<()> {
    for v in vectors {
        if v.len() != h.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), got: v.len() });
        }
        if h.cone_membership(v, DEFAULT_TOL)?.status == ConeStatus::Outside {
            return Err(Error::InvalidInstance("vector lies outside the hyperbolicity cone".into()));
        }
    }
    h.certify_rank_one(vectors)
}

/// Instance of the signed-sum family: independent `ξᵢ` and rank-one `vᵢ ∈ Γ₊`.
#[derive(Clone, Debug, PartialEq)]
pub struct KlsInstance<T> {
    h: HyperbolicInstance<T>,
    vectors: Vec<Vec<T>>,
    /// `uᵢ` with `vᵢ = vec(uᵢuᵢᵀ)`, for determinant instances with `e = vec(I)`.
    factors: Option<Vec<Vec<T>>>,
    vars: Vec<RandomVariable<T>>,
    means: Vec<T>,
    variances: Vec<T>,
    traces: Vec<T>,
    sigma2: f64,
}

impl<T: Scalar> KlsInstance<T> {
    pub fn new(h: HyperbolicInstance<T>, vectors: Vec<Vec<T>>, vars: Vec<RandomVariable<T>>) -> Result<Self> {
        if vectors.len() != vars.len() {
            return Err(Error::DimensionMismatch { expected: vectors.len(), got: vars.len() });
        }
        check_vectors(&h, &vectors)?;
        let means: Vec<T> = vars.iter().map(RandomVariable::mean).collect();
        let variances: Vec<T> = vars.iter().map(RandomVariable::variance).collect();
        let traces = vectors.iter().map(|v| exact_trace(&h, v)).collect::<Result<Vec<T>>>()?;
        let mut inst = Self { h, vectors, factors: None, vars, means, variances, traces, sigma2: 0.0 };
        inst.sigma2 = inst.h.norm(&inst.weighted_sum(), DEFAULT_TOL)?;
        Ok(inst)
    }

    /// Attaches `uᵢ` with `vᵢ = vec(uᵢuᵢᵀ)`; checked exactly for rationals.
    pub fn with_factors(mut self, factors: Vec<Vec<T>>) -> Result<Self> {
        if factors.len() != self.vectors.len() {
            return Err(Error::NotDeterminantInstance("one factor per vector is required".into()));
        }
        for (u, v) in factors.iter().zip(&self.vectors) {
            let w = linalg::rank_one_vec(u);
            let off = w.iter().zip(v).map(|(a, b)| (a.clone() - b.clone()).to_f64().abs()).fold(0.0, f64::max);
            if w.len() != v.len() || (T::EXACT && off != 0.0) || off > 1e-12 {
                return Err(Error::NotDeterminantInstance("vᵢ differs from vec(uᵢuᵢᵀ)".into()));
            }
        }
        self.factors = Some(factors);
        Ok(self)
    }

    /// `Σ τᵢ² tr_h[vᵢ] vᵢ`, exactly.
    pub fn weighted_sum(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.h.dim()];
        for i in 0..self.n() {
            axpy(&mut acc, &(self.variances[i].clone() * self.traces[i].clone()), &self.vectors[i]);
        }
        acc
    }

    /// Fails unless `stored` matches the recomputed `σ²` to `1e−9`.
    pub fn check_sigma2(&self, stored: f64) -> Result<()> {
        if (stored - self.sigma2).abs() > 1e-9 * self.sigma2.max(1.0) {
            return Err(Error::InvalidInstance(format!(
                "stored σ² = {stored} but the data give {}",
                self.sigma2
            )));
        }
        Ok(())
    }

    pub fn h(&self) -> &HyperbolicInstance<T> {
        &self.h
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn factors(&self) -> Option<&[Vec<T>]> {
        self.factors.as_deref()
    }

    pub fn vars(&self) -> &[RandomVariable<T>] {
        &self.vars
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    /// `τᵢ²`.
    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    /// `tr_h[vᵢ]`.
    pub fn traces(&self) -> &[T] {
        &self.traces
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    /// `σ² = ‖Σ τᵢ² tr_h[vᵢ] vᵢ‖_h`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Number of full assignments.
    pub fn branch_count(&self) -> u128 {
        self.vars.iter().map(|v| v.len() as u128).product()
    }

    /// `Σ (sᵢ − μᵢ) vᵢ` for an assignment given as support indices.
    pub fn discrepancy_vector(&self, leaf: &[usize]) -> Vec<T> {
        let mut w = vec![T::zero(); self.h.dim()];
        for (i, &k) in leaf.iter().enumerate() {
            let c = self.vars[i].support[k].clone() - self.means[i].clone();
            axpy(&mut w, &c, &self.vectors[i]);
        }
        w
    }

    /// Every `vᵢ` multiplied by `c`; `σ²` rescales by `c²`.
    pub fn scaled(&self, c: &T) -> Result<Self> {
        let vectors = self.vectors.iter().map(|v| v.iter().map(|x| x.clone() * c.clone()).collect()).collect();
        Self::new(self.h.clone(), vectors, self.vars.clone())
    }

    /// The same instance with `vᵢ/σ`, so that `σ = 1`. Floating point.
    pub fn normalized(&self) -> Result<KlsInstance<f64>> {
        let f = self.convert::<f64>()?;
        let s = self.sigma();
        if s == 0.0 {
            return Err(Error::InvalidInstance("σ = 0 cannot be normalized".into()));
        }
        f.scaled(&(1.0 / s))
    }

    pub fn convert<U: Scalar>(&self) -> Result<KlsInstance<U>> {
        let c = |v: &Vec<T>| v.iter().map(|x| U::from_rational(&x.to_rational())).collect::<Vec<U>>();
        let inst = KlsInstance::new(
            self.h.convert(),
            self.vectors.iter().map(c).collect(),
            self.vars.iter().map(RandomVariable::convert).collect(),
        )?;
        match &self.factors {
            Some(f) => inst.with_factors(f.iter().map(c).collect()),
            None => Ok(inst),
        }
    }

    fn leaf_pair(&self, w: &[T]) -> Result<UniPoly<T>> {
        let neg: Vec<T> = w.iter().map(|c| -c.clone()).collect();
        Ok(&self.h.restrict_line(w, self.h.e())? * &self.h.restrict_line(&neg, self.h.e())?)
    }

    /// Node polynomial for a prefix of support indices.
    pub fn node_poly_indexed(&self, prefix: &[usize]) -> Result<UniPoly<T>> {
        let n = self.n();
        if prefix.len() > n {
            return Err(Error::InvalidParams(format!("prefix of length {} exceeds n = {n}", prefix.len())));
        }
        let mut weight = T::one();
        let mut w = vec![T::zero(); self.h.dim()];
        for (i, &k) in prefix.iter().enumerate() {
            let var = &self.vars[i];
            if k >= var.len() {
                return Err(Error::ValueNotInSupport { index: i, value: format!("#{k}") });
            }
            weight = weight * var.probs[k].clone();
            axpy(&mut w, &(var.support[k].clone() - self.means[i].clone()), &self.vectors[i]);
        }
        let count: u128 = self.vars[prefix.len()..].iter().map(|v| v.len() as u128).product();
        if count > MAX_BRANCHES {
            return Err(Error::TooLarge { count, limit: MAX_BRANCHES });
        }
        let mut acc = UniPoly::zero();
        self.enumerate(prefix.len(), weight, &mut w, &mut acc)?;
        Ok(acc)
    }

    fn enumerate(&self, i: usize, weight: T, w: &mut Vec<T>, acc: &mut UniPoly<T>) -> Result<()> {
        if i == self.n() {
            *acc = &*acc + &self.leaf_pair(w)?.scale(&weight);
            return Ok(());
        }
        let var = &self.vars[i];
        for (s, p) in var.support.iter().zip(&var.probs) {
            let c = s.clone() - self.means[i].clone();
            axpy(w, &c, &self.vectors[i]);
            self.enumerate(i + 1, weight.clone() * p.clone(), w, acc)?;
            axpy(w, &-c, &self.vectors[i]);
        }
        Ok(())
    }
}

/// `(Π prefix probs) · E[h(xe + Σ(ξᵢ−μᵢ)vᵢ)·h(xe − Σ(ξᵢ−μᵢ)vᵢ)]` over the
/// variables not fixed by `prefix`.
pub fn kls_node_poly<T: Scalar>(inst: &KlsInstance<T>, prefix: &[T]) -> Result<UniPoly<T>> {
    let idx = prefix
        .iter()
        .enumerate()
        .map(|(i, v)| {
            inst.vars
                .get(i)
                .and_then(|var| var.index_of(v))
                .ok_or_else(|| Error::ValueNotInSupport { index: i, value: v.to_string() })
        })
        .collect::<Result<Vec<usize>>>()?;
    inst.node_poly_indexed(&idx)
}

/// `(Π_{i∈S} D_{vᵢ}) h(xe)` for every `S ⊆ [n]`, indexed by bitmask, via the
/// subset Möbius transform of `A ↦ h(xe + Σ_{i∈A} vᵢ)`. Exact for rank-one
/// vectors, where `h` is multilinear along them.
fn rank1_derivative_table<T: Scalar>(h: &HyperbolicInstance<T>, vectors: &[Vec<T>]) -> Result<Vec<UniPoly<T>>> {
    let n = vectors.len();
    if (1u128 << n) > MAX_BRANCHES {
        return Err(Error::TooLarge { count: 1 << n, limit: MAX_BRANCHES });
    }
    let mut table = Vec::with_capacity(1 << n);
    for mask in 0usize..1 << n {
        let mut base = vec![T::zero(); h.dim()];
        for i in set_of(mask as u64) {
            axpy(&mut base, &T::one(), &vectors[i]);
        }
        table.push(h.restrict_line(&base, h.e())?);
    }
    for i in 0..n {
        for mask in 0..1usize << n {
            if mask >> i & 1 == 1 {
                table[mask] = &table[mask] - &table[mask ^ (1 << i)];
            }
        }
    }
    Ok(table)
}

/// `Σ_S (−1)^{|S|} (Π_{i∈S} τᵢ²) [(Π_{i∈S} D_{vᵢ}) h(xe)]²`, the collapse of
/// `Π(1 − ½∂²_{zᵢ}) h(xe + Σ zᵢτᵢvᵢ)²` at `z = 0`.
pub fn kls_operator_form<T: Scalar>(inst: &KlsInstance<T>) -> Result<UniPoly<T>> {
    inst.h.certify_rank_one(&inst.vectors)?;
    let table = rank1_derivative_table(&inst.h, &inst.vectors)?;
    let d = inst.h.degree();
    let mut out = UniPoly::zero();
    for (mask, ds) in table.iter().enumerate() {
        let set = set_of(mask as u64);
        if set.len() > d || ds.is_zero() {
            continue;
        }
        let w = set.iter().fold(T::one(), |a, &i| a * inst.variances[i].clone());
        if w.is_zero() {
            continue;
        }
        let term = (ds * ds).scale(&w);
        out = if set.len().is_multiple_of(2) { &out + &term } else { &out - &term };
    }
    Ok(out)
}

/// `(kls_node_poly(∅), kls_operator_form)`; equal coefficient-wise.
pub fn kls_identity_sides<T: Scalar>(inst: &KlsInstance<T>) -> Result<(UniPoly<T>, UniPoly<T>)> {
    Ok((inst.node_poly_indexed(&[])?, kls_operator_form(inst)?))
}

/// Instance of the selection family: a homogeneous distribution `μ` and an
/// isotropic rank-one family with `Σ vᵢ = e`.
#[derive(Clone, Debug, PartialEq)]
pub struct SrInstance<T> {
    mu: SrDistribution<T>,
    family: IsotropicFamily<T>,
    eps1: T,
    eps2: T,
}

impl<T: Scalar> SrInstance<T> {
    pub fn new(mu: SrDistribution<T>, family: IsotropicFamily<T>) -> Result<Self> {
        if mu.n() != family.vectors.len() {
            return Err(Error::DimensionMismatch { expected: mu.n(), got: family.vectors.len() });
        }
        let defect = family.sum_defect();
        if (T::EXACT && defect != 0.0) || defect > 1e-9 {
            return Err(Error::InvalidInstance(format!("Σ vᵢ differs from e by {defect:e}")));
        }
        check_vectors(&family.h, &family.vectors)?;
        let eps1 = mu.max_marginal();
        let mut eps2 = T::zero();
        for v in &family.vectors {
            eps2 = T::max_of(eps2, exact_trace(&family.h, v)?);
        }
        Ok(Self { mu, family, eps1, eps2 })
    }

    pub fn mu(&self) -> &SrDistribution<T> {
        &self.mu
    }

    pub fn family(&self) -> &IsotropicFamily<T> {
        &self.family
    }

    pub fn h(&self) -> &HyperbolicInstance<T> {
        &self.family.h
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.family.vectors
    }

    pub fn n(&self) -> usize {
        self.mu.n()
    }

    /// Largest element marginal.
    pub fn eps1(&self) -> &T {
        &self.eps1
    }

    /// Largest `‖vᵢ‖_h`, computed exactly as the trace of a rank-one vector.
    pub fn eps2(&self) -> &T {
        &self.eps2
    }

    /// `4ε + 2ε²` with `ε = ε₁ + ε₂`.
    pub fn bound(&self) -> T {
        let eps = self.eps1.clone() + self.eps2.clone();
        T::from_i64(4) * eps.clone() + T::from_i64(2) * eps.clone() * eps
    }

    /// `Σ_{i∈S} vᵢ`.
    pub fn selection_vector(&self, set: u64) -> Vec<T> {
        let mut w = vec![T::zero(); self.h().dim()];
        for i in set_of(set) {
            axpy(&mut w, &T::one(), &self.family.vectors[i]);
        }
        w
    }

    pub fn convert<U: Scalar>(&self) -> Result<SrInstance<U>> {
        SrInstance::new(self.mu.convert(), self.family.convert())
    }

    fn leaf(&self, set: u64) -> Result<UniPoly<T>> {
        let neg: Vec<T> = self.selection_vector(set).into_iter().map(|c| -c).collect();
        self.h().restrict_line(&neg, self.h().e())
    }

    /// `Σ μ(S) h(xe − Σ_{i∈S} vᵢ)` over support sets agreeing with `prefix`.
    pub fn node_poly(&self, prefix: &[bool]) -> Result<UniPoly<T>> {
        if prefix.len() > self.n() {
            return Err(Error::InvalidParams("prefix longer than the ground set".into()));
        }
        let window = if prefix.len() >= 64 { u64::MAX } else { (1u64 << prefix.len()) - 1 };
        let target = prefix.iter().enumerate().fold(0u64, |m, (i, &b)| m | (b as u64) << i);
        let mut acc = UniPoly::zero();
        let mut any = false;
        for (set, p) in self.mu.support() {
            if set & window == target {
                any = true;
                acc = &acc + &self.leaf(*set)?.scale(p);
            }
        }
        if !any {
            return Err(Error::EmptyBranch);
        }
        Ok(acc)
    }
}

pub fn ag_node_poly<T: Scalar>(inst: &SrInstance<T>, prefix: &[bool]) -> Result<UniPoly<T>> {
    inst.node_poly(prefix)
}

/// `Σ_S (−1)^{|S|} (Π_{i∈S} D_{vᵢ}) h(xe) · Σ_{T⊇S} μ(T) x^{|T|−|S|}`, the
/// collapse of `Π(1 − ½∂²_{zᵢ}) h(xe + Σ zᵢvᵢ) g_μ(x·1 + z)` at `z = 0`.
/// Only sets contained in some support set contribute.
pub fn ag_operator_form<T: Scalar>(inst: &SrInstance<T>) -> Result<UniPoly<T>> {
    let h = inst.h();
    h.certify_rank_one(inst.vectors())?;
    let d = h.degree();
    let mut subsets = BTreeSet::new();
    for (set, _) in inst.mu.support() {
        // every submask of `set`
        let mut s = *set;
        loop {
            if (s.count_ones() as usize) <= d {
                subsets.insert(s);
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & set;
        }
    }
    let mut lines: HashMap<u64, UniPoly<T>> = HashMap::new();
    let mut line = |a: u64| -> Result<UniPoly<T>> {
        if let Some(p) = lines.get(&a) {
            return Ok(p.clone());
        }
        let p = h.restrict_line(&inst.selection_vector(a), h.e())?;
        lines.insert(a, p.clone());
        Ok(p)
    };
    let d_mu = inst.mu.d_mu();
    let mut out = UniPoly::zero();
    for &s in &subsets {
        let mut ds = UniPoly::zero();
        let mut a = s;
        loop {
            let term = line(a)?;
            ds = if (s ^ a).count_ones() % 2 == 0 { &ds + &term } else { &ds - &term };
            if a == 0 {
                break;
            }
            a = (a - 1) & s;
        }
        if ds.is_zero() {
            continue;
        }
        let mass = inst
            .mu
            .support()
            .iter()
            .filter(|(t, _)| t & s == s)
            .fold(T::zero(), |acc, (_, p)| acc + p.clone());
        let k = s.count_ones() as usize;
        let term = &ds * &UniPoly::monomial(mass, d_mu - k);
        out = if k.is_multiple_of(2) { &out + &term } else { &out - &term };
    }
    Ok(out)
}

/// `(x^{d_μ}·q_∅(x²), x^d·ag_operator_form(x))`; equal coefficient-wise.
pub fn ag_identity_sides<T: Scalar>(inst: &SrInstance<T>) -> Result<(UniPoly<T>, UniPoly<T>)> {
    let q = inst.node_poly(&[])?;
    let lhs = q.compose_square().shift_up(inst.mu.d_mu());
    let rhs = ag_operator_form(inst)?.shift_up(inst.h().degree());
    Ok((lhs, rhs))
}

/// `h(xe + Σ zᵢvᵢ)²` in variables `(x, z₁, …, z_n)`. The operator variables
/// are the `zᵢτᵢ` of the barrier argument rescaled by `1/τᵢ`, which keeps
/// the polynomial rational without changing its stability.
pub fn kls_barrier_poly<T: Scalar>(inst: &KlsInstance<T>) -> Result<MultiPoly<T>> {
    let mut dirs = vec![inst.h.e().to_vec()];
    dirs.extend(inst.vectors.iter().cloned());
    let p = inst.h.pullback(&dirs)?;
    Ok(p.mul(&p))
}

/// `h(xe + Σ zᵢvᵢ)·g_μ(x·1 + z)` in variables `(x, z₁, …, z_n)`.
pub fn ag_barrier_poly<T: Scalar>(inst: &SrInstance<T>) -> Result<MultiPoly<T>> {
    let n = inst.n();
    let mut dirs = vec![inst.h().e().to_vec()];
    dirs.extend(inst.vectors().iter().cloned());
    let hp = inst.h().pullback(&dirs)?;
    let mut g = MultiPoly::zero(n + 1);
    for (set, p) in inst.mu.support() {
        let mut term = MultiPoly::constant(n + 1, p.clone());
        for i in set_of(*set) {
            term = term.mul(&MultiPoly::var(n + 1, 0).add(&MultiPoly::var(n + 1, i + 1)));
        }
        g = g.add(&term);
    }
    Ok(hp.mul(&g))
}
