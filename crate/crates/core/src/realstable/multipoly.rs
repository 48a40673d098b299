use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::{pow_usize, Scalar};
use crate::unipoly::UniPoly;

/// Sparse multivariate polynomial: exponent vector (length `nvars`) to coefficient.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<T> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, T>,
}

impl<T: Scalar> MultiPoly<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::from_terms(nvars, [(vec![0; nvars], c)])
    }

    /// The variable `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::from_terms(nvars, [(e, T::one())])
    }

    /// Sums repeated exponents; panics if an exponent vector has the wrong length.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, T)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, T> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> T {
        self.terms.get(e).cloned().unwrap_or_else(T::zero)
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Common total degree of all terms, if homogeneous and nonzero.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degs = self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum::<usize>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms.iter().fold(T::zero(), |acc, (e, c)| {
            let mono = e
                .iter()
                .zip(x)
                .fold(T::one(), |m, (&k, xi)| m * pow_usize(xi, k as usize));
            acc + c.clone() * mono
        })
    }

    /// `t ↦ p(base + t·dir)`.
    pub fn restrict_line(&self, base: &[T], dir: &[T]) -> Result<UniPoly<T>> {
        for v in [base, dir] {
            if v.len() != self.nvars {
                return Err(Error::DimensionMismatch { expected: self.nvars, got: v.len() });
            }
        }
        let powers: Vec<Vec<UniPoly<T>>> = (0..self.nvars)
            .map(|i| {
                let lin = UniPoly::new(vec![base[i].clone(), dir[i].clone()]);
                let mut pw = vec![UniPoly::one()];
                for k in 1..=self.degree_in(i) as usize {
                    pw.push(&pw[k - 1] * &lin);
                }
                pw
            })
            .collect();
        let mut out = UniPoly::zero();
        for (e, c) in &self.terms {
            let mut term = UniPoly::constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = &term * &powers[i][k as usize];
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.nvars.max(other.nvars));
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = (0..p.nvars)
                    .map(|i| ea.get(i).copied().unwrap_or(0) + eb.get(i).copied().unwrap_or(0))
                    .collect();
                p.add_term(e, ca.clone() * cb.clone());
            }
        }
        p
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.nvars {
            return Err(Error::IndexOutOfRange { index: i, nvars: self.nvars });
        }
        Ok(())
    }

    /// `p` with `z_i = a`; the variable count is unchanged.
    pub fn restrict(&self, i: usize, a: &T) -> Result<Self> {
        self.check_index(i)?;
        Ok(Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] = 0;
                (e2, c.clone() * pow_usize(a, e[i] as usize))
            }),
        ))
    }

    pub fn derivative(&self, i: usize) -> Result<Self> {
        self.check_index(i)?;
        Ok(Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, c.clone() * T::from_usize(e[i] as usize))
            }),
        ))
    }

    /// `(1 − c·∂²_{z_i}) p` for `c ≥ 0`.
    pub fn one_minus_c_d2(&self, i: usize, c: &T) -> Result<Self> {
        if c.is_negative() {
            return Err(Error::InvalidParams("operator coefficient must be nonnegative".into()));
        }
        let d2 = self.derivative(i)?.derivative(i)?;
        Ok(self.sub(&d2.scale(c)))
    }

    pub fn convert<U: Scalar>(&self) -> MultiPoly<U> {
        MultiPoly::from_terms(
            self.nvars,
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), U::from_rational(&c.to_rational()))),
        )
    }

    pub fn to_rational(&self) -> MultiPoly<BigRational> {
        self.convert()
    }
}

impl<T: Scalar> fmt::Display for MultiPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "·z{}", i + 1)?,
                    _ => write!(f, "·z{}^{p}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn closure_examples() {
        let z = MultiPoly::<Rational>::var(1, 0);
        let got = z.mul(&z).one_minus_c_d2(0, &Rational::from_ratio(1, 2)).unwrap();
        assert_eq!(got, z.mul(&z).sub(&MultiPoly::constant(1, r(1))));

        let x1 = MultiPoly::<Rational>::var(2, 0);
        let x2 = MultiPoly::<Rational>::var(2, 1);
        let p = x1.mul(&x2).add(&x2);
        assert_eq!(p.restrict(0, &r(2)).unwrap(), x2.scale(&r(3)));

        let one = MultiPoly::constant(2, r(1));
        let prod = x1.add(&one).mul(&x2.add(&one));
        assert_eq!(prod, x1.mul(&x2).add(&x1).add(&x2).add(&one));
        assert_eq!(prod.num_terms(), 4);
    }

    #[test]
    fn index_errors() {
        let p = MultiPoly::<Rational>::var(2, 0);
        assert_eq!(p.restrict(2, &r(1)), Err(Error::IndexOutOfRange { index: 2, nvars: 2 }));
        assert!(p.one_minus_c_d2(0, &r(-1)).is_err());
    }

    #[test]
    fn line_restriction() {
        // x1² + x2² on a = (1,1), b = (0,1) gives 2t² + 2t + 1
        let x1 = MultiPoly::<Rational>::var(2, 0);
        let x2 = MultiPoly::<Rational>::var(2, 1);
        let p = x1.mul(&x1).add(&x2.mul(&x2));
        let u = p.restrict_line(&[r(0), r(1)], &[r(1), r(1)]).unwrap();
        assert_eq!(u, UniPoly::from_i64(&[1, 2, 2]));
        assert_eq!(p.homogeneous_degree(), Some(2));
        assert_eq!(p.eval(&[r(3), r(4)]), r(25));
    }
}
