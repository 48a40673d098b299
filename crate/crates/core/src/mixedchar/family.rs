use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{KlsInstance, SrInstance};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeded;
use crate::unipoly::{is_real_rooted, real_roots, UniPoly, DEFAULT_TOL};

/// Slack allowed when comparing a child's largest root to its parent's.
pub const DESCENT_TOL: f64 = 1e-8;

/// A tree of polynomials indexed by choice prefixes. Choices at each level
/// are numbered `0..arity(level)` in increasing value order.
pub trait InterlacingFamily<T: Scalar> {
    fn depth(&self) -> usize;

    fn arity(&self, level: usize) -> usize;

    /// [`Error::EmptyBranch`] for prefixes with no completion.
    fn node_poly(&self, prefix: &[usize]) -> Result<UniPoly<T>>;

    /// Exact hyperbolic norm of the discrepancy vector of a full assignment.
    fn leaf_norm(&self, leaf: &[usize]) -> Result<f64>;

    /// Degree of every node polynomial.
    fn node_degree(&self) -> usize;

    /// Human-readable value of choice `k` at `level`.
    fn choice_label(&self, level: usize, k: usize) -> String;

    /// Draws a full assignment from the family's own distribution.
    fn sample_leaf(&self, rng: &mut ChaCha8Rng) -> Vec<usize>;

    /// Top-`k` monic node coefficients by the principal-minor formula, where
    /// the family supports it.
    fn top_coeffs_by_minors(&self, _k: usize, _prefix: &[usize]) -> Result<Vec<T>> {
        Err(Error::NotDeterminantInstance("family has no minor-formula oracle".into()))
    }
}

fn draw(rng: &mut ChaCha8Rng, weights: impl Iterator<Item = f64>) -> usize {
    let w: Vec<f64> = weights.collect();
    let total: f64 = w.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, p) in w.iter().enumerate() {
        if x < *p {
            return i;
        }
        x -= p;
    }
    w.len() - 1
}

impl<T: Scalar> InterlacingFamily<T> for KlsInstance<T> {
    fn depth(&self) -> usize {
        self.n()
    }

    fn arity(&self, level: usize) -> usize {
        self.vars()[level].len()
    }

    fn node_poly(&self, prefix: &[usize]) -> Result<UniPoly<T>> {
        self.node_poly_indexed(prefix)
    }

    fn leaf_norm(&self, leaf: &[usize]) -> Result<f64> {
        self.h().norm(&self.discrepancy_vector(leaf), DEFAULT_TOL)
    }

    fn node_degree(&self) -> usize {
        2 * self.h().degree()
    }

    fn choice_label(&self, level: usize, k: usize) -> String {
        self.vars()[level].support()[k].to_string()
    }

    fn sample_leaf(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        self.vars().iter().map(|v| draw(rng, v.probs().iter().map(Scalar::to_f64))).collect()
    }

    fn top_coeffs_by_minors(&self, k: usize, prefix: &[usize]) -> Result<Vec<T>> {
        let c = crate::solver::maxcoeff_det(self, k.div_ceil(2), prefix)?;
        Ok(c[..k].to_vec())
    }
}

impl<T: Scalar> InterlacingFamily<T> for SrInstance<T> {
    fn depth(&self) -> usize {
        self.n()
    }

    fn arity(&self, _level: usize) -> usize {
        2
    }

    fn node_poly(&self, prefix: &[usize]) -> Result<UniPoly<T>> {
        let bits: Vec<bool> = prefix.iter().map(|&k| k == 1).collect();
        SrInstance::node_poly(self, &bits)
    }

    fn leaf_norm(&self, leaf: &[usize]) -> Result<f64> {
        let set = leaf.iter().enumerate().fold(0u64, |m, (i, &k)| m | ((k == 1) as u64) << i);
        if self.mu().prob(set).is_zero() {
            return Err(Error::EmptyBranch);
        }
        self.h().norm(&self.selection_vector(set), DEFAULT_TOL)
    }

    fn node_degree(&self) -> usize {
        self.h().degree()
    }

    fn choice_label(&self, _level: usize, k: usize) -> String {
        k.to_string()
    }

    fn sample_leaf(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let support = self.mu().support();
        let set = support[draw(rng, support.iter().map(|(_, p)| p.to_f64()))].0;
        (0..self.n()).map(|i| (set >> i & 1) as usize).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InterlacingVerdict<T> {
    Passed { combinations: usize },
    /// Convex weights whose combination is not real-rooted.
    Refuted { weights: Vec<T> },
}

impl<T> InterlacingVerdict<T> {
    pub fn passed(&self) -> bool {
        matches!(self, Self::Passed { .. })
    }
}

/// Checks real-rootedness of convex combinations of `polys`: every vertex,
/// every pairwise midpoint, then random weights until `samples` combinations
/// have been tried. Weights are rationals `kᵢ / Σk` with `kᵢ ∈ 0..=16`.
pub fn common_interlacing_check<T: Scalar>(
    polys: &[UniPoly<T>],
    samples: usize,
    seed: u64,
) -> Result<InterlacingVerdict<T>> {
    let Some(first) = polys.first() else {
        return Err(Error::InvalidParams("no polynomials to check".into()));
    };
    let d = first.degree();
    if polys.iter().any(|p| p.degree() != d || !p.leading().is_positive()) {
        return Err(Error::DegreeMismatch);
    }
    let m = polys.len();
    let mut weight_sets: Vec<Vec<T>> = Vec::new();
    for i in 0..m {
        weight_sets.push((0..m).map(|j| if i == j { T::one() } else { T::zero() }).collect());
    }
    for i in 0..m {
        for j in i + 1..m {
            let h = T::from_ratio(1, 2);
            weight_sets.push((0..m).map(|k| if k == i || k == j { h.clone() } else { T::zero() }).collect());
        }
    }
    let mut rng = seeded::named(seed, "interlacing", 0);
    while weight_sets.len() < samples && m > 1 {
        let ks: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=16)).collect();
        let total: i64 = ks.iter().sum();
        if total == 0 {
            continue;
        }
        weight_sets.push(ks.iter().map(|&k| T::from_ratio(k, total)).collect());
    }
    for w in &weight_sets {
        let combo = polys
            .iter()
            .zip(w)
            .fold(UniPoly::zero(), |acc, (p, c)| &acc + &p.scale(c));
        if !is_real_rooted(&combo, DEFAULT_TOL)? {
            return Ok(InterlacingVerdict::Refuted { weights: w.clone() });
        }
    }
    Ok(InterlacingVerdict::Passed { combinations: weight_sets.len() })
}

fn max_root<T: Scalar>(p: &UniPoly<T>) -> Result<f64> {
    Ok(real_roots(p, DEFAULT_TOL)?.max())
}

/// Children of `prefix` that have at least one completion.
fn children<T: Scalar, F: InterlacingFamily<T> + ?Sized>(
    fam: &F,
    prefix: &[usize],
) -> Result<Vec<(usize, UniPoly<T>)>> {
    let mut out = Vec::new();
    let mut next = prefix.to_vec();
    next.push(0);
    for k in 0..fam.arity(prefix.len()) {
        *next.last_mut().expect("nonempty") = k;
        match fam.node_poly(&next) {
            Ok(p) => out.push((k, p)),
            Err(Error::EmptyBranch) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Descent<T: Scalar> {
    pub leaf: Vec<usize>,
    pub leaf_poly: UniPoly<T>,
    pub leaf_max_root: f64,
    pub root_max_root: f64,
}

/// Greedy descent from the root: at each node move to the child with the
/// smallest largest root, provided it does not exceed the parent's largest
/// root by more than `tol`. Ties go to the smaller choice index.
pub fn descend_family<T: Scalar, F: InterlacingFamily<T> + ?Sized>(fam: &F, tol: f64) -> Result<Descent<T>> {
    let root = fam.node_poly(&[])?;
    let root_max_root = max_root(&root)?;
    let mut prefix = Vec::new();
    let mut parent = root_max_root;
    let mut poly = root;
    for depth in 0..fam.depth() {
        let mut best: Option<(f64, usize, UniPoly<T>)> = None;
        for (k, p) in children(fam, &prefix)? {
            let r = max_root(&p)?;
            if best.as_ref().is_none_or(|b| r < b.0) {
                best = Some((r, k, p));
            }
        }
        let Some((r, k, p)) = best else {
            return Err(Error::EmptyBranch);
        };
        if r > parent + tol {
            return Err(Error::NoAdmissibleChild { depth, best: r, parent });
        }
        prefix.push(k);
        parent = r;
        poly = p;
    }
    Ok(Descent { leaf: prefix, leaf_poly: poly, leaf_max_root: parent, root_max_root })
}

/// Outcome of walking a whole family tree.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FamilyReport {
    pub nodes: usize,
    pub internal: usize,
    /// Prefixes whose node polynomial is not real-rooted.
    pub not_real_rooted: Vec<Vec<usize>>,
    /// Prefixes whose children fail the convex-combination check.
    pub not_interlacing: Vec<Vec<usize>>,
    /// Whether the bottom-up root polynomial matches the directly computed one
    /// (exactly, or to relative `1e−9` for floats).
    pub root_consistent: bool,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.not_real_rooted.is_empty() && self.not_interlacing.is_empty() && self.root_consistent
    }
}

/// Builds every node polynomial bottom-up (a node is the sum of its
/// children), checks each for real-rootedness and each sibling set with
/// [`common_interlacing_check`] using `samples` combinations.
pub fn check_family<T: Scalar, F: InterlacingFamily<T> + ?Sized>(
    fam: &F,
    samples: usize,
    seed: u64,
) -> Result<FamilyReport> {
    let mut report = FamilyReport::default();
    let mut prefix = Vec::new();
    let root = walk(fam, &mut prefix, samples, seed, &mut report)?;
    let direct = fam.node_poly(&[])?;
    report.root_consistent = match &root {
        Some(r) if T::EXACT => *r == direct,
        Some(r) => r.approx_eq(&direct, 1e-9),
        None => false,
    };
    Ok(report)
}

fn walk<T: Scalar, F: InterlacingFamily<T> + ?Sized>(
    fam: &F,
    prefix: &mut Vec<usize>,
    samples: usize,
    seed: u64,
    report: &mut FamilyReport,
) -> Result<Option<UniPoly<T>>> {
    let poly = if prefix.len() == fam.depth() {
        match fam.node_poly(prefix) {
            Ok(p) => p,
            Err(Error::EmptyBranch) => return Ok(None),
            Err(e) => return Err(e),
        }
    } else {
        let mut kids = Vec::new();
        for k in 0..fam.arity(prefix.len()) {
            prefix.push(k);
            let child = walk(fam, prefix, samples, seed, report)?;
            prefix.pop();
            kids.extend(child);
        }
        if kids.is_empty() {
            return Ok(None);
        }
        report.internal += 1;
        let node_seed = seed ^ (report.nodes as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        if !common_interlacing_check(&kids, samples, node_seed)?.passed() {
            report.not_interlacing.push(prefix.clone());
        }
        kids.iter().fold(UniPoly::zero(), |acc, p| &acc + p)
    };
    report.nodes += 1;
    if !is_real_rooted(&poly, DEFAULT_TOL)? {
        report.not_real_rooted.push(prefix.clone());
    }
    Ok(Some(poly))
}
