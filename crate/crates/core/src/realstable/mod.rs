//! Multivariate polynomials, randomized real-stability refutation, closure
//! operations and fixture polynomials.

mod fixtures;
mod multipoly;

use num_traits::Zero;
use rand::Rng;

pub use fixtures::{determinant_mixture, fixture, Fixture, VAMOS_EXCLUDED};
pub use multipoly::MultiPoly;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeded;
use crate::unipoly::is_real_rooted_exact;
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum StabilityVerdict {
    /// `p(a·t + b)` is identically zero or not real-rooted, with `a ≻ 0`.
    RefutedUnstable { a: Vec<Rational>, b: Vec<Rational> },
    PassedTrials(usize),
}

impl StabilityVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, Self::PassedTrials(_))
    }
}

/// Grid `k/8`.
fn eighths(k: i64) -> Rational {
    Rational::from_ratio(k, 8)
}

/// Line `(a, b)` for trial `idx`. The first `n` trials are axis probes
/// `a = 1`, `b = e_j` (last axis first); later ones draw `a ∈ (0,4]ⁿ`,
/// `b ∈ [−4,4]ⁿ` on the grid of eighths.
fn trial_line(n: usize, seed: u64, idx: usize) -> (Vec<Rational>, Vec<Rational>) {
    if idx < n {
        let a = vec![eighths(8); n];
        let mut b = vec![eighths(0); n];
        b[n - 1 - idx] = eighths(8);
        return (a, b);
    }
    let mut rng = seeded::stream(seed, idx as u64);
    let a = (0..n).map(|_| eighths(rng.gen_range(1..=32))).collect();
    let b = (0..n).map(|_| eighths(rng.gen_range(-32..=32))).collect();
    (a, b)
}

/// One-sided real-stability test: restricts `p` to `trials` lines
/// `t ↦ a·t + b` with `a ≻ 0` and checks each restriction exactly.
/// Floats are first converted to their exact binary values.
pub fn stability_test<T: Scalar>(p: &MultiPoly<T>, trials: usize, seed: u64) -> Result<StabilityVerdict> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let q = p.to_rational();
    let n = q.nvars();
    for idx in 0..trials {
        let (a, b) = trial_line(n.max(1), seed, idx);
        let (a, b) = (a[..n].to_vec(), b[..n].to_vec());
        let line = q.restrict_line(&b, &a)?;
        if line.is_zero() || !is_real_rooted_exact(&line)? {
            return Ok(StabilityVerdict::RefutedUnstable { a, b });
        }
    }
    Ok(StabilityVerdict::PassedTrials(trials))
}

/// Randomized hyperbolicity test in direction `e`: `t ↦ p(t·e − x)` must be
/// real-rooted for random `x` on the grid of eighths in `[−4,4]ⁿ`. A
/// refutation reports `a = e`, `b = −x`.
pub fn hyperbolicity_test<T: Scalar>(
    p: &MultiPoly<T>,
    e: &[T],
    trials: usize,
    seed: u64,
) -> Result<StabilityVerdict> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let q = p.to_rational();
    let n = q.nvars();
    if e.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: e.len() });
    }
    let a: Vec<Rational> = e.iter().map(|v| v.to_rational()).collect();
    if q.eval(&a).is_zero() {
        return Err(Error::InvalidInstance("p(e) = 0".into()));
    }
    for idx in 0..trials {
        let mut rng = seeded::stream(seed, idx as u64);
        let b: Vec<Rational> = (0..n).map(|_| eighths(rng.gen_range(-32..=32))).collect();
        let line = q.restrict_line(&b, &a)?;
        if line.is_zero() || !is_real_rooted_exact(&line)? {
            return Ok(StabilityVerdict::RefutedUnstable { a, b });
        }
    }
    Ok(StabilityVerdict::PassedTrials(trials))
}

/// Operations that preserve real stability.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosureOp<T> {
    Product,
    Restrict { index: usize, value: T },
    OneMinusCD2 { index: usize, c: T },
}

/// Applies `op` to `p` (`q` is used only by [`ClosureOp::Product`]).
pub fn closure_ops<T: Scalar>(p: &MultiPoly<T>, q: &MultiPoly<T>, op: &ClosureOp<T>) -> Result<MultiPoly<T>> {
    match op {
        ClosureOp::Product => Ok(p.mul(q)),
        ClosureOp::Restrict { index, value } => p.restrict(*index, value),
        ClosureOp::OneMinusCD2 { index, c } => p.one_minus_c_d2(*index, c),
    }
}
