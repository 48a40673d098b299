//! Dense univariate polynomials over a [`Scalar`], with real-root extraction
//! and real-rootedness certification.

mod roots;
mod sturm;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use roots::{companion_roots, real_roots, RootList, DEFAULT_TOL, NEGLIGIBLE};
pub use sturm::{
    count_distinct_real_roots, is_real_rooted, is_real_rooted_exact, squarefree_decomposition,
    SturmChain,
};

/// Coefficients in ascending degree order; trailing zeros are always stripped,
/// so the zero polynomial has an empty coefficient vector.
#[derive(Clone, PartialEq)]
pub struct UniPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> UniPoly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(T::one(), 1)
    }

    pub fn monomial(c: T, degree: usize) -> Self {
        let mut coeffs = vec![T::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    /// `Π (x − rᵢ)`.
    pub fn from_roots(roots: &[T]) -> Self {
        roots.iter().fold(Self::one(), |acc, r| {
            &acc * &Self::new(vec![-r.clone(), T::one()])
        })
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| T::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_usize(k))
                .collect(),
        )
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// `p(−x)`.
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }

    /// `p(x²)`.
    pub fn compose_square(&self) -> Self {
        let mut coeffs = vec![T::zero(); 2 * self.coeffs.len()];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[2 * k] = c.clone();
        }
        Self::new(coeffs)
    }

    /// `xᵏ · p(x)`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// Multiplicity of the root `0`.
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Drops the factor `x^m` where `m` is the multiplicity of the root `0`.
    pub fn strip_zero_roots(&self) -> Self {
        let m = self.zero_root_multiplicity();
        Self::new(self.coeffs[m.min(self.coeffs.len())..].to_vec())
    }

    pub fn monic(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let lc = self.leading();
        Some(Self::new(self.coeffs.iter().map(|c| c.clone() / lc.clone()).collect()))
    }

    /// Top coefficients `c₁..c_k` of the monic normalization
    /// `xⁿ + c₁xⁿ⁻¹ + … + cₙ`; positions past the degree are zero.
    pub fn top_coeffs(&self, k: usize) -> Vec<T> {
        let n = self.degree();
        let lc = self.leading();
        (1..=k)
            .map(|j| {
                if j > n || lc.is_zero() {
                    T::zero()
                } else {
                    self.coeffs[n - j].clone() / lc.clone()
                }
            })
            .collect()
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dn = divisor.degree();
        let lc = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dn {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![T::zero(); rem.len() - dn];
        for k in (dn..rem.len()).rev() {
            let q = rem[k].clone() / lc.clone();
            if q.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                let idx = k - dn + j;
                rem[idx] = rem[idx].clone() - q.clone() * d.clone();
            }
            quot[k - dn] = q;
        }
        rem.truncate(dn);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor (exact only over exact scalars).
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        x.monic().unwrap_or_else(Self::zero)
    }

    pub fn convert<U: Scalar>(&self) -> UniPoly<U> {
        UniPoly::new(
            self.coeffs
                .iter()
                .map(|c| U::from_rational(&c.to_rational()))
                .collect(),
        )
    }

    pub fn to_f64(&self) -> UniPoly<f64> {
        UniPoly::new(self.coeffs.iter().map(|c| c.to_f64()).collect())
    }

    pub fn to_rational(&self) -> UniPoly<BigRational> {
        UniPoly::new(self.coeffs.iter().map(|c| c.to_rational()).collect())
    }

    /// Largest real root; see [`real_roots`].
    pub fn max_root(&self, tol: f64) -> Result<f64> {
        Ok(real_roots(self, tol)?.max())
    }

    /// Coefficient-wise closeness in relative terms, for float comparisons.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        let scale = self
            .coeffs
            .iter()
            .chain(other.coeffs.iter())
            .map(|c| c.to_f64().abs())
            .fold(1.0f64, f64::max);
        (0..n).all(|k| (self.coeff(k).to_f64() - other.coeff(k).to_f64()).abs() <= rel_tol * scale)
    }
}

/// Unique polynomial of degree `< nodes.len()` through the nodes, via Newton
/// divided differences.
pub fn interpolate<T: Scalar>(nodes: &[(T, T)]) -> Result<UniPoly<T>> {
    let n = nodes.len();
    for i in 0..n {
        for j in 0..i {
            if nodes[i].0 == nodes[j].0 {
                return Err(Error::DuplicateNode(nodes[i].0.to_string()));
            }
        }
    }
    let xs: Vec<T> = nodes.iter().map(|(x, _)| x.clone()).collect();
    let mut dd: Vec<T> = nodes.iter().map(|(_, y)| y.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i].clone() - dd[i - 1].clone()) / (xs[i].clone() - xs[i - level].clone());
        }
    }
    // Horner-style expansion of the Newton form.
    let mut poly = UniPoly::zero();
    for i in (0..n).rev() {
        let factor = UniPoly::new(vec![-xs[i].clone(), T::one()]);
        poly = &(&poly * &factor) + &UniPoly::constant(dd[i].clone());
    }
    Ok(poly)
}

/// Interpolates `f` at the integer nodes `0, 1, …, degree`.
pub fn interpolate_integer_nodes<T: Scalar>(
    degree: usize,
    mut f: impl FnMut(&T) -> Result<T>,
) -> Result<UniPoly<T>> {
    let nodes = (0..=degree)
        .map(|k| {
            let t = T::from_usize(k);
            f(&t).map(|y| (t, y))
        })
        .collect::<Result<Vec<_>>>()?;
    interpolate(&nodes)
}

impl<T: Scalar> Add for &UniPoly<T> {
    type Output = UniPoly<T>;

    fn add(self, rhs: Self) -> UniPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Sub for &UniPoly<T> {
    type Output = UniPoly<T>;

    fn sub(self, rhs: Self) -> UniPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Mul for &UniPoly<T> {
    type Output = UniPoly<T>;

    fn mul(self, rhs: Self) -> UniPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        UniPoly::new(out)
    }
}

impl<T: Scalar> Neg for &UniPoly<T> {
    type Output = UniPoly<T>;

    fn neg(self) -> UniPoly<T> {
        UniPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for UniPoly<T> {
            type Output = UniPoly<T>;

            fn $m(self, rhs: Self) -> UniPoly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar> std::iter::Sum for UniPoly<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, p| &acc + &p)
    }
}

impl<T: Scalar> fmt::Debug for UniPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly({self})")
    }
}

impl<T: Scalar> fmt::Display for UniPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        Ok(())
    }
}
