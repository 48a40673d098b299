//! Homogeneous strongly Rayleigh distributions over subsets of a ground set,
//! spanning-tree distributions, marginals, and isotropic vector families
//! built from graphs.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::graph::{for_each_subset, Graph};
use crate::hyperbolic::{HyperbolicInstance, HyperbolicKind};
use crate::linalg;
use crate::realstable::{stability_test, MultiPoly, StabilityVerdict};
use crate::scalar::Scalar;
use crate::unipoly::DEFAULT_TOL;
use crate::Rational;

/// Distribution over subsets of `0..n` (bitmasks), all of size `d_mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct SrDistribution<T> {
    n: usize,
    support: Vec<(u64, T)>,
    d_mu: usize,
}

pub fn mask_of(set: &[usize]) -> u64 {
    set.iter().fold(0, |m, &i| m | 1 << i)
}

pub fn set_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

impl<T: Scalar> SrDistribution<T> {
    /// Validates positivity, normalization (exact, or `1e−12` for floats),
    /// homogeneity and distinct support sets. Support is kept sorted by mask.
    pub fn new(n: usize, mut support: Vec<(u64, T)>) -> Result<Self> {
        if n > 64 {
            return Err(Error::InvalidDistribution("ground set larger than 64".into()));
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        support.sort_by_key(|(m, _)| *m);
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("repeated support set".into()));
        }
        let d_mu = support[0].0.count_ones() as usize;
        let limit = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut total = T::zero();
        for (m, p) in &support {
            if m & !limit != 0 {
                return Err(Error::InvalidDistribution(format!("set {:?} outside 0..{n}", set_of(*m))));
            }
            if m.count_ones() as usize != d_mu {
                return Err(Error::InvalidDistribution("support sets differ in size".into()));
            }
            if !p.is_positive() {
                return Err(Error::InvalidDistribution("probabilities must be positive".into()));
            }
            total = total + p.clone();
        }
        let off = (total - T::one()).abs();
        if (T::EXACT && !off.is_zero()) || off.to_f64() > 1e-12 {
            return Err(Error::InvalidDistribution("probabilities do not sum to 1".into()));
        }
        Ok(Self { n, support, d_mu })
    }

    /// Uniform over all spanning trees, with the enumeration count checked
    /// against the matrix-tree theorem.
    pub fn uniform_spanning_tree(g: &Graph) -> Result<Self> {
        let trees = g.spanning_trees()?;
        let count = g.spanning_tree_count();
        if BigInt::from(trees.len()) != count {
            return Err(Error::InvalidDistribution(format!(
                "enumerated {} trees but the matrix-tree theorem gives {count}",
                trees.len()
            )));
        }
        let p = T::from_ratio(1, trees.len() as i64);
        Self::new(g.num_edges(), trees.into_iter().map(|t| (t, p.clone())).collect())
    }

    pub fn point_mass(n: usize, set: &[usize]) -> Result<Self> {
        Self::new(n, vec![(mask_of(set), T::one())])
    }

    /// `μ(T) ∝ Π_{e∈T} w_e` over spanning trees.
    pub fn weighted_spanning_tree(g: &Graph, weights: &[T]) -> Result<Self> {
        Self::product_weighted(g.num_edges(), g.spanning_trees()?, weights)
    }

    /// `μ(S) ∝ Π_{i∈S} wᵢ` over `k`-subsets of `0..n`.
    pub fn weighted_k_subsets(n: usize, k: usize, weights: &[T]) -> Result<Self> {
        let mut masks = Vec::new();
        for_each_subset(n, k, &mut |m| masks.push(m));
        Self::product_weighted(n, masks, weights)
    }

    fn product_weighted(n: usize, masks: Vec<u64>, weights: &[T]) -> Result<Self> {
        if weights.len() != n || weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidDistribution(format!("need {n} positive weights")));
        }
        let raw: Vec<(u64, T)> = masks
            .into_iter()
            .map(|m| (m, set_of(m).into_iter().fold(T::one(), |a, i| a * weights[i].clone())))
            .collect();
        let z = raw.iter().fold(T::zero(), |a, (_, p)| a + p.clone());
        Self::new(n, raw.into_iter().map(|(m, p)| (m, p / z.clone())).collect())
    }

    pub fn uniform_k_subsets(n: usize, k: usize) -> Result<Self> {
        let mut masks = Vec::new();
        for_each_subset(n, k, &mut |m| masks.push(m));
        let p = T::from_ratio(1, masks.len() as i64);
        Self::new(n, masks.into_iter().map(|m| (m, p.clone())).collect())
    }

    /// Independent union on the disjoint ground set `0..n₁ ⊔ n₁..n₁+n₂`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut support = Vec::new();
        for (a, p) in &self.support {
            for (b, q) in &other.support {
                support.push((a | b << self.n, p.clone() * q.clone()));
            }
        }
        Self::new(self.n + other.n, support)
    }

    /// Conditions on `i ∈ T` (`include`) or `i ∉ T`.
    pub fn condition(&self, i: usize, include: bool) -> Result<Self> {
        let kept: Vec<(u64, T)> = self
            .support
            .iter()
            .filter(|(m, _)| (m >> i & 1 == 1) == include)
            .cloned()
            .collect();
        let z = kept.iter().fold(T::zero(), |a, (_, p)| a + p.clone());
        if kept.is_empty() {
            return Err(Error::EmptyBranch);
        }
        Self::new(self.n, kept.into_iter().map(|(m, p)| (m, p / z.clone())).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_mu(&self) -> usize {
        self.d_mu
    }

    pub fn support(&self) -> &[(u64, T)] {
        &self.support
    }

    pub fn prob(&self, set: u64) -> T {
        self.support
            .binary_search_by_key(&set, |(m, _)| *m)
            .map(|i| self.support[i].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    /// `g_μ(z) = Σ μ(S) z^S`.
    pub fn generating_polynomial(&self) -> MultiPoly<T> {
        MultiPoly::from_terms(
            self.n,
            self.support.iter().map(|(m, p)| {
                let e = (0..self.n).map(|i| (m >> i & 1) as u32).collect();
                (e, p.clone())
            }),
        )
    }

    pub fn stability_verdict(&self, trials: usize, seed: u64) -> Result<StabilityVerdict> {
        stability_test(&self.generating_polynomial(), trials, seed)
    }

    /// `Pr[T ∩ [k] = S]` by direct summation.
    pub fn marginal_via_enum(&self, s: &[usize], k: usize) -> T {
        let target = mask_of(s);
        let window = if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
        self.support
            .iter()
            .filter(|(m, _)| m & window == target)
            .fold(T::zero(), |a, (_, p)| a + p.clone())
    }

    /// `x₀^{|S|−d_μ} · Π_{i∈S} ∂ᵢ Π_{i∈[k]∖S} (1 − x₀∂ᵢ) g_μ(x₀·1 + z)` at
    /// `z = 0`, evaluated by symbolic differentiation.
    pub fn marginal_via_formula(&self, s: &[usize], k: usize, x0: &T) -> Result<T> {
        if x0.is_zero() {
            return Err(Error::InvalidParams("x₀ must be nonzero".into()));
        }
        if k > self.n || s.iter().any(|&i| i >= k) {
            return Err(Error::InvalidParams("S must be a subset of [k] with k ≤ n".into()));
        }
        // g_μ(x₀·1 + z) expanded in z
        let mut g = MultiPoly::zero(self.n);
        for (m, p) in &self.support {
            let mut term = MultiPoly::constant(self.n, p.clone());
            for i in set_of(*m) {
                let shifted = MultiPoly::var(self.n, i).add(&MultiPoly::constant(self.n, x0.clone()));
                term = term.mul(&shifted);
            }
            g = g.add(&term);
        }
        let in_s = mask_of(s);
        for i in 0..k {
            g = if in_s >> i & 1 == 1 {
                g.derivative(i)?
            } else {
                g.sub(&g.derivative(i)?.scale(x0))
            };
        }
        let at_zero = g.coeff(&vec![0; self.n]);
        let exp = s.len() as i64 - self.d_mu as i64;
        let mut factor = T::one();
        for _ in 0..exp.unsigned_abs() {
            factor = factor * x0.clone();
        }
        Ok(if exp >= 0 { at_zero * factor } else { at_zero / factor })
    }

    /// `Pr[i ∈ T]` for each `i`.
    pub fn element_marginals(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                self.support
                    .iter()
                    .filter(|(m, _)| m >> i & 1 == 1)
                    .fold(T::zero(), |a, (_, p)| a + p.clone())
            })
            .collect()
    }

    pub fn max_marginal(&self) -> T {
        self.element_marginals()
            .into_iter()
            .fold(T::zero(), T::max_of)
    }

    pub fn convert<U: Scalar>(&self) -> SrDistribution<U> {
        SrDistribution {
            n: self.n,
            support: self
                .support
                .iter()
                .map(|(m, p)| (*m, U::from_rational(&p.to_rational())))
                .collect(),
            d_mu: self.d_mu,
        }
    }
}

/// Rank-one vectors summing to the hyperbolic direction.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropicFamily<T> {
    pub h: HyperbolicInstance<T>,
    pub vectors: Vec<Vec<T>>,
    /// `uᵢ` with `vᵢ = vec(uᵢuᵢᵀ)`, when the instance is a determinant one
    /// with `e = vec(I)`.
    pub factors: Option<Vec<Vec<T>>>,
    /// `max ‖vᵢ‖_h`.
    pub epsilon2: T,
    /// Orthonormal basis of `1^⊥` used by the float construction (rows).
    pub basis: Option<Vec<Vec<f64>>>,
}

impl<T: Scalar> IsotropicFamily<T> {
    /// Largest entrywise deviation of `Σ vᵢ` from `e`.
    pub fn sum_defect(&self) -> f64 {
        let mut s = vec![T::zero(); self.h.dim()];
        for v in &self.vectors {
            for (a, b) in s.iter_mut().zip(v) {
                *a = a.clone() + b.clone();
            }
        }
        s.iter()
            .zip(self.h.e())
            .map(|(a, b)| (a.clone() - b.clone()).to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn norms(&self) -> Result<Vec<f64>> {
        self.vectors.iter().map(|v| self.h.norm(v, DEFAULT_TOL)).collect()
    }

    pub fn convert<U: Scalar>(&self) -> IsotropicFamily<U> {
        let conv = |v: &Vec<T>| v.iter().map(|c| U::from_rational(&c.to_rational())).collect();
        IsotropicFamily {
            h: self.h.convert(),
            vectors: self.vectors.iter().map(conv).collect(),
            factors: self.factors.as_ref().map(|f| f.iter().map(conv).collect()),
            epsilon2: U::from_rational(&self.epsilon2.to_rational()),
            basis: self.basis.clone(),
        }
    }
}

/// `bₑᵀ L_r⁻¹ bₑ` for every edge, exactly, with `L_r` the reduced Laplacian.
pub fn effective_resistances(g: &Graph) -> Result<Vec<Rational>> {
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let lr = g.reduced_laplacian::<Rational>();
    let inv = linalg::inverse(&lr).ok_or(Error::DisconnectedGraph)?;
    Ok((0..g.num_edges())
        .map(|e| {
            let b = g.reduced_incidence::<Rational>(e);
            let lb: Vec<Rational> = inv.iter().map(|row| linalg::dot(row, &b)).collect();
            linalg::dot(&b, &lb)
        })
        .collect())
}

/// `wₑ = Λ^{−1/2} Bᵀ(1_u − 1_v)` with `B` an orthonormal eigenbasis of `1^⊥`
/// for the Laplacian; `vₑ = vec(wₑwₑᵀ)` in the determinant instance of size
/// `|V| − 1` with `e = vec(I)`.
pub fn effective_resistance_family(g: &Graph) -> Result<IsotropicFamily<f64>> {
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let nv = g.vertices();
    let (vals, vecs) = linalg::sym_eigen(&g.laplacian::<f64>());
    // Eigenvalues come sorted descending, so the zero one (all-ones vector) is last.
    let basis: Vec<Vec<f64>> = vecs[..nv - 1].to_vec();
    let scales: Vec<f64> = vals[..nv - 1].iter().map(|l| 1.0 / l.sqrt()).collect();
    let factors: Vec<Vec<f64>> = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            basis
                .iter()
                .zip(&scales)
                .map(|(b, s)| s * (b[u] - b[v]))
                .collect()
        })
        .collect();
    let vectors: Vec<Vec<f64>> = factors.iter().map(|w| linalg::rank_one_vec(w)).collect();
    let epsilon2 = factors
        .iter()
        .map(|w| linalg::dot(w, w))
        .fold(0.0, f64::max);
    Ok(IsotropicFamily {
        h: HyperbolicInstance::determinant(nv - 1),
        vectors,
        factors: Some(factors),
        epsilon2,
        basis: Some(basis),
    })
}

/// Exact counterpart of [`effective_resistance_family`]: the determinant
/// instance with direction `e = vec(L_r)` and `vₑ = vec(bₑbₑᵀ)` for the
/// reduced incidence vectors. `Σ vₑ = e` holds exactly and the hyperbolic
/// eigenvalues match the float construction.
pub fn effective_resistance_family_exact(g: &Graph) -> Result<IsotropicFamily<Rational>> {
    let res = effective_resistances(g)?;
    let nv = g.vertices();
    let e = linalg::sym_to_vec(&g.reduced_laplacian::<Rational>());
    let h = HyperbolicInstance::new(HyperbolicKind::Determinant { size: nv - 1 }, e)?;
    let vectors = (0..g.num_edges())
        .map(|i| linalg::rank_one_vec(&g.reduced_incidence::<Rational>(i)))
        .collect();
    let epsilon2 = res.into_iter().fold(Rational::from_i64(0), Rational::max_of);
    Ok(IsotropicFamily { h, vectors, factors: None, epsilon2, basis: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn ust_examples() {
        let k3 = SrDistribution::<Rational>::uniform_spanning_tree(&Graph::complete(3)).unwrap();
        assert_eq!(k3.support().len(), 3);
        assert!(k3.support().iter().all(|(_, p)| *p == r(1, 3)));
        assert_eq!(k3.d_mu(), 2);
        let f2 = SrDistribution::<Rational>::uniform_spanning_tree(&Graph::diamond()).unwrap();
        assert_eq!(f2.support().len(), 8);
        let p3 = SrDistribution::<Rational>::uniform_spanning_tree(&Graph::path(3)).unwrap();
        assert_eq!(p3.support(), &[(0b11, r(1, 1))]);
    }

    #[test]
    fn marginal_examples() {
        let k3 = SrDistribution::<Rational>::uniform_spanning_tree(&Graph::complete(3)).unwrap();
        assert_eq!(k3.marginal_via_formula(&[0], 1, &r(1, 1)).unwrap(), r(2, 3));
        assert_eq!(k3.marginal_via_enum(&[0], 1), r(2, 3));
        assert_eq!(k3.marginal_via_formula(&[], 0, &r(1, 1)).unwrap(), r(1, 1));
        assert_eq!(k3.marginal_via_enum(&[], 0), r(1, 1));

        let f2 = SrDistribution::<Rational>::uniform_spanning_tree(&Graph::diamond()).unwrap();
        // edge 5 is index 4; T ∩ [5] = {5}
        assert_eq!(f2.marginal_via_formula(&[4], 5, &r(2, 1)).unwrap(), f2.marginal_via_enum(&[4], 5));

        let pm = SrDistribution::<Rational>::point_mass(2, &[0, 1]).unwrap();
        assert_eq!(pm.marginal_via_enum(&[0], 2), r(0, 1));
    }

    #[test]
    fn max_marginal_examples() {
        let k3 = SrDistribution::<Rational>::uniform_spanning_tree(&Graph::complete(3)).unwrap();
        assert_eq!(k3.max_marginal(), r(2, 3));
        let pm = SrDistribution::<Rational>::point_mass(1, &[0]).unwrap();
        assert_eq!(pm.max_marginal(), r(1, 1));
        let f2 = SrDistribution::<Rational>::uniform_spanning_tree(&Graph::diamond()).unwrap();
        let m = f2.element_marginals();
        assert_eq!(m[4], r(1, 2));
        assert!(m[..4].iter().all(|p| *p == r(5, 8)));
        assert_eq!(f2.max_marginal(), r(5, 8));
    }

    #[test]
    fn effective_resistance_examples() {
        for (g, want) in [(Graph::complete(3), 2.0 / 3.0), (Graph::complete(4), 0.5), (Graph::path(2), 1.0)] {
            let fam = effective_resistance_family(&g).unwrap();
            assert!(fam.sum_defect() < 1e-12);
            for n in fam.norms().unwrap() {
                assert!((n - want).abs() < 1e-10);
            }
            assert!((fam.epsilon2 - want).abs() < 1e-12);

            let exact = effective_resistance_family_exact(&g).unwrap();
            assert_eq!(exact.sum_defect(), 0.0);
            assert!((exact.epsilon2.to_f64() - want).abs() < 1e-15);
            for n in exact.norms().unwrap() {
                assert!((n - want).abs() < 1e-12);
            }
        }
        assert!(effective_resistance_family(&Graph::new(3, vec![(0, 1)]).unwrap()).is_err());
    }

    #[test]
    fn invalid_distributions_rejected() {
        assert!(SrDistribution::<Rational>::new(2, vec![(0b01, r(1, 2)), (0b11, r(1, 2))]).is_err());
        assert!(SrDistribution::<Rational>::new(2, vec![(0b01, r(1, 2)), (0b10, r(1, 3))]).is_err());
        assert!(SrDistribution::<Rational>::new(2, vec![(0b01, r(3, 2)), (0b10, r(-1, 2))]).is_err());
    }

    #[test]
    fn products_and_conditionings_stay_normalized() {
        let a = SrDistribution::<Rational>::uniform_spanning_tree(&Graph::complete(3)).unwrap();
        let b = SrDistribution::<Rational>::uniform_k_subsets(3, 1).unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!((p.n(), p.d_mu(), p.support().len()), (6, 3, 9));
        let c = p.condition(0, true).unwrap();
        assert_eq!(c.support().len(), 6);
        assert!(p.condition(0, true).unwrap().condition(0, false).is_err());
    }
}
