//! Seeded instance generators. Every draw comes from a named sub-stream of
//! the caller's seed, so equal seeds give equal instances.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hyperbolic::HyperbolicInstance;
use crate::linalg;
use crate::mixedchar::{KlsInstance, RandomVariable, SrInstance};
use crate::scalar::Scalar;
use crate::seeded;
use crate::srdist::{effective_resistance_family_exact, SrDistribution};
use crate::Rational;

/// Which random variables a generated signed-sum instance uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VarMix {
    /// Uniform signs only.
    Rademacher,
    /// Each variable is uniform signs, a biased `{0, 1}` coin or a three-point law.
    #[default]
    Mixed,
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Biased coin on `{0, 1}` with `Pr[1] ∈ {1/4, 1/3, 2/3, 3/4}`.
fn biased(rng: &mut ChaCha8Rng) -> RandomVariable<Rational> {
    let p = [q(1, 4), q(1, 3), q(2, 3), q(3, 4)][rng.gen_range(0..4)].clone();
    RandomVariable::bernoulli(p).expect("valid probability")
}

/// Three distinct values in `−2..=2` with weights `k/Σk`, `k ∈ 1..=4`.
fn three_point(rng: &mut ChaCha8Rng) -> RandomVariable<Rational> {
    let mut vals: Vec<i64> = (-2..=2).collect();
    for i in (1..vals.len()).rev() {
        vals.swap(i, rng.gen_range(0..=i));
    }
    let ks: Vec<i64> = (0..3).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = ks.iter().sum();
    RandomVariable::new(
        vals[..3].iter().map(|&v| q(v, 1)).collect(),
        ks.iter().map(|&k| q(k, total)).collect(),
    )
    .expect("valid three-point law")
}

fn random_var(rng: &mut ChaCha8Rng, mix: VarMix) -> RandomVariable<Rational> {
    match mix {
        VarMix::Rademacher => RandomVariable::rademacher(),
        VarMix::Mixed => match rng.gen_range(0..3) {
            0 => RandomVariable::rademacher(),
            1 => biased(rng),
            _ => three_point(rng),
        },
    }
}

/// `n` rank-one matrices `uᵢuᵢᵀ` of size `m′` with entries of `uᵢ` in
/// `{−2, −3/2, …, 2}`, under `det` with `e = vec(I)`.
pub fn kls_det(n: usize, mprime: usize, mix: VarMix, seed: u64) -> Result<KlsInstance<Rational>> {
    if n == 0 || mprime == 0 {
        return Err(Error::InvalidParams("n and m′ must be positive".into()));
    }
    let mut rng = seeded::named(seed, "instance", 0);
    let mut factors = Vec::with_capacity(n);
    while factors.len() < n {
        let u: Vec<Rational> = (0..mprime).map(|_| q(rng.gen_range(-4..=4), 2)).collect();
        if u.iter().any(|c| *c != q(0, 1)) {
            factors.push(u);
        }
    }
    let vars = (0..n).map(|_| random_var(&mut rng, mix)).collect();
    let vectors = factors.iter().map(|u| linalg::rank_one_vec(u)).collect();
    KlsInstance::new(HyperbolicInstance::determinant(mprime), vectors, vars)?.with_factors(factors)
}

/// Point on the unit sphere in `ℝ^s` with rational coordinates, by inverse
/// stereographic projection of a random point of `ℚ^{s−1}`.
fn rational_sphere_point(rng: &mut ChaCha8Rng, s: usize) -> Vec<Rational> {
    if s == 1 {
        return vec![q(if rng.gen_bool(0.5) { 1 } else { -1 }, 1)];
    }
    let a: Vec<Rational> = (0..s - 1).map(|_| q(rng.gen_range(-8..=8), 4)).collect();
    let norm2 = a.iter().fold(q(0, 1), |acc, x| acc + x * x);
    let den = q(1, 1) + &norm2;
    let mut y: Vec<Rational> = a.iter().map(|x| q(2, 1) * x / &den).collect();
    y.push((q(1, 1) - norm2) / den);
    y
}

/// `n` vectors `c·(y, 1)` on the boundary of the Lorentz cone in `ℝᵐ`, with
/// `y` a rational unit vector and `c ∈ {1/4, …, 2}`.
pub fn kls_lorentz(n: usize, m: usize, mix: VarMix, seed: u64) -> Result<KlsInstance<Rational>> {
    if n == 0 || m < 2 {
        return Err(Error::InvalidParams("need n ≥ 1 and m ≥ 2".into()));
    }
    let mut rng = seeded::named(seed, "instance", 0);
    let vectors = (0..n)
        .map(|_| {
            let c = q(rng.gen_range(1..=8), 4);
            let mut v: Vec<Rational> = rational_sphere_point(&mut rng, m - 1).into_iter().map(|y| y * &c).collect();
            v.push(c);
            v
        })
        .collect();
    let vars = (0..n).map(|_| random_var(&mut rng, mix)).collect();
    KlsInstance::new(HyperbolicInstance::lorentz(m), vectors, vars)
}

/// Uniform spanning trees of `g` with the exact effective-resistance family.
pub fn sr_ust(g: &Graph) -> Result<SrInstance<Rational>> {
    SrInstance::new(SrDistribution::uniform_spanning_tree(g)?, effective_resistance_family_exact(g)?)
}

/// A random homogeneous strongly Rayleigh distribution: product-weighted
/// spanning trees of a random connected graph, or product-weighted
/// `k`-subsets. Weights are `k/4`, `k ∈ 1..=8`.
pub fn random_sr_distribution(seed: u64) -> Result<SrDistribution<Rational>> {
    let mut rng = seeded::named(seed, "distribution", 0);
    if rng.gen_bool(0.5) {
        let graphs = Graph::connected_up_to(6);
        let g = &graphs[rng.gen_range(0..graphs.len())];
        let w: Vec<Rational> = (0..g.num_edges()).map(|_| q(rng.gen_range(1..=8), 4)).collect();
        SrDistribution::weighted_spanning_tree(g, &w)
    } else {
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(0..=n);
        let w: Vec<Rational> = (0..n).map(|_| q(rng.gen_range(1..=8), 4)).collect();
        SrDistribution::weighted_k_subsets(n, k, &w)
    }
}
