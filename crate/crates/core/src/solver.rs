//! Top-coefficient oracles, power-sum root estimates, the blocked search
//! over an interlacing family and exhaustive and random baselines.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::for_each_subset;
use crate::hyperbolic::HyperbolicKind;
use crate::linalg;
use crate::mixedchar::{InterlacingFamily, KlsInstance};
use crate::scalar::Scalar;
use crate::seeded;
use crate::unipoly::{real_roots, DEFAULT_TOL};

/// Largest `j` for which [`maxcoeff_det`] sums over `j`-subsets of pairs.
pub const MAX_DET_K: usize = 4;

/// Leaf count above which [`brute_force`] refuses to run.
pub const MAX_BRUTE_LEAVES: u128 = 1 << 16;

/// `eⱼ = (−1)ʲ cⱼ` for the monic coefficients `c₁, …, c_k` (descending powers).
pub fn vieta_elems<T: Scalar>(c: &[T]) -> Vec<T> {
    c.iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { -v.clone() } else { v.clone() })
        .collect()
}

/// Power sum `p_k` from `e₁, …, e_k` by Newton's identities. Missing `eⱼ`
/// are zero.
pub fn elem_to_power<T: Scalar>(k: usize, e: &[T]) -> T {
    let ej = |j: usize| e.get(j - 1).cloned().unwrap_or_else(T::zero);
    let mut p: Vec<T> = vec![T::from_usize(0)];
    for j in 1..=k {
        let mut s = T::zero();
        for i in 1..j {
            let t = ej(i) * p[j - i].clone();
            s = if i % 2 == 1 { s + t } else { s - t };
        }
        let last = T::from_usize(j) * ej(j);
        s = if j % 2 == 1 { s + last } else { s - last };
        p.push(s);
    }
    p.swap_remove(k)
}

/// `p_k^{1/k}` from the top `k` monic coefficients of a real-rooted degree-`n`
/// polynomial. For even `k`, `λ₁ ≤ p_k^{1/k} ≤ n^{1/k} max|λᵢ|`.
pub fn max_root_estimate<T: Scalar>(n: usize, k: usize, c: &[T]) -> Result<f64> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::OddK(k));
    }
    if n == 0 {
        return Err(Error::InvalidParams("degree must be positive".into()));
    }
    let pk = elem_to_power(k, &vieta_elems(&c[..k.min(c.len())])).to_f64();
    if pk < 0.0 {
        return Err(Error::OracleFailure(format!("even power sum is negative ({pk})")));
    }
    Ok(pk.powf(1.0 / k as f64))
}

/// Top-`k` monic coefficients of the node polynomial at `prefix`.
pub fn maxcoeff_enum<T: Scalar, F: InterlacingFamily<T> + ?Sized>(
    fam: &F,
    k: usize,
    prefix: &[usize],
) -> Result<Vec<T>> {
    Ok(fam.node_poly(prefix)?.top_coeffs(k))
}

/// Top `2k` monic coefficients of a determinant node polynomial from
/// principal-minor sums. With `cᵢ = sᵢ − μᵢ` (fixed or random) and
/// `W = Σ cᵢuᵢuᵢᵀ`, the node polynomial is proportional to
/// `E det(x²I − W²)`, whose coefficient of `x^{2(m′−j)}` is
/// `(−1)ʲ Σ_S E[Π_{(a,b)∈S} c_a c_b] Π⟨u_a,u_b⟩ · σⱼ(Σ_{(a,b)∈S} u_a u_bᵀ)`
/// over `j`-sets `S` of index pairs. Odd coefficients vanish.
pub fn maxcoeff_det<T: Scalar>(inst: &KlsInstance<T>, k: usize, prefix: &[usize]) -> Result<Vec<T>> {
    let HyperbolicKind::Determinant { size } = inst.h().kind() else {
        return Err(Error::NotDeterminantInstance("h is not a determinant".into()));
    };
    let size = *size;
    if inst.h().e() != linalg::sym_to_vec(&linalg::identity::<T>(size)).as_slice() {
        return Err(Error::NotDeterminantInstance("direction is not the identity".into()));
    }
    let Some(u) = inst.factors() else {
        return Err(Error::NotDeterminantInstance("rank-one factors uᵢ are not available".into()));
    };
    let jmax = k.min(size);
    if jmax > MAX_DET_K {
        return Err(Error::KTooLarge(k));
    }
    let n = inst.n();
    if prefix.len() > n {
        return Err(Error::InvalidParams("prefix longer than n".into()));
    }
    // moments[i][m] = E[cᵢ^m]
    let moments: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let var = &inst.vars()[i];
            (0..=2 * jmax)
                .map(|m| match prefix.get(i) {
                    Some(&s) => {
                        let c = var.support()[s].clone() - inst.means()[i].clone();
                        (0..m).fold(T::one(), |a, _| a * c.clone())
                    }
                    None => var.centered_moment(m),
                })
                .collect()
        })
        .collect::<Vec<_>>();
    for (i, &s) in prefix.iter().enumerate() {
        if s >= inst.vars()[i].len() {
            return Err(Error::ValueNotInSupport { index: i, value: format!("#{s}") });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let gram: Vec<Vec<T>> = (0..n).map(|a| (0..n).map(|b| linalg::dot(&u[a], &u[b])).collect()).collect();
    let mut out = vec![T::zero(); 2 * k];
    for j in 1..=jmax {
        let mut total = T::zero();
        for_each_subset(pairs.len(), j, &mut |mask| {
            let chosen: Vec<(usize, usize)> = (0..pairs.len())
                .filter(|&t| mask >> t & 1 == 1)
                .map(|t| pairs[t])
                .collect();
            let mut mult = vec![0usize; n];
            let mut weight = T::one();
            for &(a, b) in &chosen {
                mult[a] += 1;
                mult[b] += 1;
                weight = weight * gram[a][b].clone();
            }
            for (i, &m) in mult.iter().enumerate() {
                if weight.is_zero() {
                    return;
                }
                weight = weight * moments[i][m].clone();
            }
            if weight.is_zero() {
                return;
            }
            let mut mat = linalg::zeros::<T>(size, size);
            for &(a, b) in &chosen {
                mat = linalg::mat_add(&mat, &linalg::outer(&u[a], &u[b]));
            }
            total = total.clone() + weight * linalg::principal_minor_sums(&mat)[j].clone();
        });
        out[2 * j - 1] = if j % 2 == 1 { -total } else { total };
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Oracle {
    #[default]
    Enumeration,
    DetMinor,
}

/// How the default `k` is derived when none is given.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KRule {
    /// `⌈2M ln(deg)/δ⌉`, which supports the `(1 + δ)` certificate.
    #[default]
    Proof,
    /// `⌈M ln(n)/δ⌉`.
    Stated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub delta: f64,
    /// Block size `M`; `⌈√n⌉` when unset.
    pub block: Option<usize>,
    /// Number of top coefficients; derived from `rule` when unset.
    pub k: Option<usize>,
    pub rule: KRule,
    pub seed: u64,
    pub oracle: Oracle,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { delta: 0.5, block: None, k: None, rule: KRule::Proof, seed: 0, oracle: Oracle::Enumeration }
    }
}

impl SolverConfig {
    pub fn with_delta(delta: f64) -> Self {
        Self { delta, ..Self::default() }
    }

    /// `(M, k)` for a family of depth `n` whose nodes have degree `deg`.
    pub fn resolve(&self, n: usize, deg: usize) -> Result<(usize, usize)> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParams("δ must be positive".into()));
        }
        let m = self.block.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize).max(1);
        if self.block == Some(0) {
            return Err(Error::InvalidParams("block size must be at least 1".into()));
        }
        let k = match self.k {
            Some(k) => k,
            None => {
                let raw = match self.rule {
                    KRule::Proof => 2.0 * m as f64 * (deg.max(2) as f64).ln() / self.delta,
                    KRule::Stated => m as f64 * (n.max(2) as f64).ln() / self.delta,
                };
                let k = (raw.ceil() as usize).max(2);
                k + k % 2
            }
        };
        if k < 2 || k % 2 == 1 {
            return Err(Error::OddK(k));
        }
        Ok((m, k))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    /// Choice indices.
    pub assignment: Vec<usize>,
    /// Values of the choices (support values, or 0/1 membership).
    pub labels: Vec<String>,
    /// Root estimate of the chosen leaf from the last round.
    pub estimate: f64,
    /// Norm of the leaf's discrepancy vector, recomputed from its spectrum.
    pub certified: f64,
    /// Largest root of the root-node polynomial.
    pub root_max_root: f64,
    /// `(1 + δ)·root_max_root`.
    pub bound: f64,
    pub oracle_calls: usize,
    pub block: usize,
    pub k: usize,
    pub seed: u64,
    pub wall_time: Duration,
}

fn for_each_tuple(arities: &[usize], f: &mut impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut t = vec![0; arities.len()];
    if arities.contains(&0) {
        return Ok(());
    }
    loop {
        f(&t)?;
        let mut i = arities.len();
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            t[i] += 1;
            if t[i] < arities[i] {
                break;
            }
            t[i] = 0;
        }
    }
}

/// Blocked search: each round tries every value tuple for the next `M`
/// coordinates, scores it by [`max_root_estimate`] on oracle coefficients and
/// keeps the smallest score (ties to the lexicographically smaller tuple).
/// The returned leaf is certified against `(1 + δ)` times the largest root of
/// the root-node polynomial; a failed certificate is an error.
pub fn kadison_singer_search<T: Scalar, F: InterlacingFamily<T> + ?Sized>(
    fam: &F,
    cfg: &SolverConfig,
) -> Result<SearchResult> {
    let start = Instant::now();
    let n = fam.depth();
    let deg = fam.node_degree();
    let (m, k) = cfg.resolve(n, deg)?;
    let oracle = |prefix: &[usize]| -> Result<Vec<T>> {
        match cfg.oracle {
            Oracle::Enumeration => maxcoeff_enum(fam, k, prefix),
            Oracle::DetMinor => fam.top_coeffs_by_minors(k, prefix),
        }
    };
    let mut assignment: Vec<usize> = Vec::new();
    let mut calls = 0usize;
    let mut estimate = f64::NAN;
    while assignment.len() < n {
        let width = m.min(n - assignment.len());
        let arities: Vec<usize> = (0..width).map(|i| fam.arity(assignment.len() + i)).collect();
        let mut best: Option<(f64, Vec<usize>)> = None;
        for_each_tuple(&arities, &mut |t| {
            let mut prefix = assignment.clone();
            prefix.extend_from_slice(t);
            let coeffs = match oracle(&prefix) {
                Ok(c) => c,
                Err(Error::EmptyBranch) => return Ok(()),
                Err(e) => return Err(e),
            };
            calls += 1;
            let est = max_root_estimate(deg, k, &coeffs)?;
            if best.as_ref().is_none_or(|b| est < b.0) {
                best = Some((est, t.to_vec()));
            }
            Ok(())
        })?;
        let Some((est, t)) = best else {
            return Err(Error::OracleFailure(format!("no feasible tuple at depth {}", assignment.len())));
        };
        estimate = est;
        assignment.extend(t);
    }
    let root_max_root = real_roots(&fam.node_poly(&[])?, DEFAULT_TOL)?.max();
    let certified = fam.leaf_norm(&assignment)?;
    let bound = (1.0 + cfg.delta) * root_max_root;
    if certified > bound + 1e-9 * bound.abs().max(1.0) {
        return Err(Error::CertificationFailed { certified, bound });
    }
    let labels = assignment.iter().enumerate().map(|(i, &c)| fam.choice_label(i, c)).collect();
    Ok(SearchResult {
        assignment,
        labels,
        estimate,
        certified,
        root_max_root,
        bound,
        oracle_calls: calls,
        block: m,
        k,
        seed: cfg.seed,
        wall_time: start.elapsed(),
    })
}

/// Leaf minimizing the discrepancy norm, by exhaustive enumeration
/// (ties to the lexicographically smaller leaf).
pub fn brute_force<T: Scalar, F: InterlacingFamily<T> + ?Sized>(fam: &F) -> Result<(Vec<usize>, f64)> {
    let arities: Vec<usize> = (0..fam.depth()).map(|i| fam.arity(i)).collect();
    let count: u128 = arities.iter().map(|&a| a as u128).product();
    if count > MAX_BRUTE_LEAVES {
        return Err(Error::TooLarge { count, limit: MAX_BRUTE_LEAVES });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_tuple(&arities, &mut |leaf| {
        let v = match fam.leaf_norm(leaf) {
            Ok(v) => v,
            Err(Error::EmptyBranch) => return Ok(()),
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((leaf.to_vec(), v));
        }
        Ok(())
    })?;
    best.ok_or(Error::EmptyBranch)
}

/// Summary of discrepancy norms of i.i.d. random leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    pub samples: Vec<f64>,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
}

impl Baseline {
    fn from_samples(samples: Vec<f64>) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.clone();
        s.sort_by(f64::total_cmp);
        // nearest-rank quantile
        let q = |p: f64| s[((p * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        Some(Self {
            min: s[0],
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            max: s[s.len() - 1],
            mean: s.iter().sum::<f64>() / s.len() as f64,
            samples,
        })
    }
}

/// Draws `trials` leaves from the family's own distribution and records their
/// norms. `None` when `trials` is zero.
pub fn random_baseline<T: Scalar, F: InterlacingFamily<T> + ?Sized>(
    fam: &F,
    trials: usize,
    seed: u64,
) -> Result<Option<Baseline>> {
    let mut rng = seeded::named(seed, "baseline", 0);
    let samples = (0..trials)
        .map(|_| fam.leaf_norm(&fam.sample_leaf(&mut rng)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Baseline::from_samples(samples))
}
