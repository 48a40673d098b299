use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix};

use super::sturm::{is_real_rooted_exact, squarefree_decomposition, sturm_real_roots, SturmChain};
use super::UniPoly;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative tolerance used when callers have no reason to pick another.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Real roots, multiplicity-expanded, in non-increasing order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootList {
    roots: Vec<f64>,
}

impl RootList {
    pub fn new(mut roots: Vec<f64>) -> Self {
        roots.sort_by(|a, b| b.total_cmp(a));
        Self { roots }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.roots
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Largest root; `-∞` for a constant polynomial.
    pub fn max(&self) -> f64 {
        self.roots.first().copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Smallest root; `+∞` for a constant polynomial.
    pub fn min(&self) -> f64 {
        self.roots.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.roots.iter()
    }
}

/// Eigenvalues of the companion matrix of `p`, after rescaling `x = s·y` so
/// the monic coefficients are of unit size. Panics on a constant polynomial.
/// `None` when the QR iteration does not converge on the matrix or its transpose.
pub fn companion_roots(p: &UniPoly<f64>) -> Option<Vec<Complex<f64>>> {
    let n = p.degree();
    assert!(n >= 1, "constant polynomial has no roots");
    let lc = p.leading();
    let a: Vec<f64> = p.coeffs()[..n].iter().map(|c| c / lc).collect();
    let s = a
        .iter()
        .enumerate()
        .map(|(i, c)| c.abs().powf(1.0 / (n - i) as f64))
        .fold(0.0f64, f64::max);
    if s == 0.0 || !s.is_finite() {
        return Some(vec![Complex::new(0.0, 0.0); n]);
    }
    if n == 1 {
        return Some(vec![Complex::new(-a[0], 0.0)]);
    }
    let mut c = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        // coefficient of y^{n-1-j} after scaling
        c[(0, j)] = -a[n - 1 - j] / s.powi((j + 1) as i32);
    }
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    let schur = Schur::try_new(c.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .or_else(|| Schur::try_new(c.transpose(), f64::EPSILON, SCHUR_MAX_ITER))?;
    Some(schur.complex_eigenvalues().iter().map(|z| z * s).collect())
}

fn polish(p: &UniPoly<f64>, dp: &UniPoly<f64>, mut r: f64) -> f64 {
    let mut best = p.eval(&r).abs();
    for _ in 0..50 {
        if best == 0.0 {
            break;
        }
        let d = dp.eval(&r);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = r - p.eval(&r) / d;
        let val = p.eval(&next).abs();
        if !(val < best) {
            break;
        }
        r = next;
        best = val;
    }
    r
}

fn residual_ok(p: &UniPoly<f64>, r: f64, tol: f64) -> bool {
    let cmax = p.coeffs().iter().map(|c| c.abs()).fold(0.0f64, f64::max);
    let scale = cmax * r.abs().max(1.0).powi(p.degree() as i32);
    p.eval(&r).abs() <= tol * scale
}

/// QR sweeps allowed before the companion eigenproblem is declared stuck.
const SCHUR_MAX_ITER: usize = 10_000;

/// Turns companion eigenvalues into certified-enough real roots. Eigenvalues
/// within `√tol` of the axis are polished one by one. Off-axis ones must come
/// in tight groups (a root of multiplicity `m` scatters on a circle of radius
/// about `ε^{1/m}`): each group of `m` is replaced by the simple root of
/// `p^{(m−1)}` near its mean, at which `p, …, p^{(m−1)}` must pass the
/// residual test.
fn accept_float_roots(p: &UniPoly<f64>, mut left: Vec<Complex<f64>>, tol: f64) -> Option<Vec<f64>> {
    let dp = p.derivative();
    let mut out = Vec::with_capacity(left.len());
    while !left.is_empty() {
        let (idx, z) = left
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.im.abs().total_cmp(&b.1.im.abs()))
            .expect("nonempty");
        let mag = z.norm().max(1.0);
        if z.im.abs() <= tol.sqrt() * mag {
            for w in &left {
                let r = polish(p, &dp, w.re);
                if !residual_ok(p, r, tol) {
                    return None;
                }
                out.push(r);
            }
            return Some(out);
        }
        let radius = 2.5 * z.im.abs();
        let center0 = left[idx].re;
        let (members, rest): (Vec<_>, Vec<_>) = left.into_iter().partition(|w| (*w - center0).norm() <= radius);
        let m = members.len();
        if m < 2 || z.im.abs() > tol.powf(1.0 / m as f64) * mag {
            return None;
        }
        let mut derivs = vec![p.clone()];
        for _ in 0..m {
            let next = derivs.last().expect("nonempty").derivative();
            derivs.push(next);
        }
        let mean = members.iter().map(|w: &Complex<f64>| w.re).sum::<f64>() / m as f64;
        let center = polish(&derivs[m - 1], &derivs[m], mean);
        if (center - mean).abs() > radius || !derivs[..m].iter().all(|d| residual_ok(d, center, tol)) {
            return None;
        }
        out.extend(std::iter::repeat_n(center, m));
        left = rest;
    }
    Some(out)
}

/// Float coefficients at or below this fraction of the largest one, at the
/// low end of the coefficient list, count as zero roots.
pub const NEGLIGIBLE: f64 = 1e-13;

/// All real roots with multiplicity, in non-increasing order.
///
/// Companion-matrix eigenvalues are taken as the primary estimate and polished
/// by Newton steps. If any estimate is not real to within `√tol` or fails the
/// residual test `|p(r)| ≤ tol·max|cᵢ|·max(1,|r|)^deg`, the polynomial is
/// converted to exact rationals and handled by Sturm bisection, which raises
/// [`Error::NotRealRooted`] when real roots are missing.
pub fn real_roots<T: Scalar>(p: &UniPoly<T>, tol: f64) -> Result<RootList> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut zeros = p.zero_root_multiplicity();
    let mut q = p.strip_zero_roots();
    if !T::EXACT {
        // rounding leaves a cluster at 0 whose companion eigenvalues spread far off the axis
        let cmax = q.coeffs().iter().map(|c| c.to_f64().abs()).fold(0.0f64, f64::max);
        let tiny = q.coeffs()[..q.degree()]
            .iter()
            .take_while(|c| c.to_f64().abs() <= NEGLIGIBLE * cmax)
            .count();
        if tiny > 0 {
            zeros += tiny;
            q = UniPoly::new(q.coeffs()[tiny..].to_vec());
        }
    }
    let mut roots = vec![0.0; zeros];
    if q.degree() == 0 {
        return Ok(RootList::new(roots));
    }
    if T::EXACT && q.degree() > 1 {
        // Repeated roots are split by rounding; solve each squarefree factor instead.
        let exact = q.to_rational();
        let g = UniPoly::gcd(&exact, &exact.derivative());
        if g.degree() > 0 {
            for (f, mult) in squarefree_decomposition(&exact) {
                let fr = real_roots(&f, tol)?;
                for r in fr.iter() {
                    roots.extend(std::iter::repeat_n(*r, mult));
                }
            }
            return Ok(RootList::new(roots));
        }
    }
    let qf = q.to_f64();
    let eig = qf.coeffs().iter().all(|c| c.is_finite()).then(|| companion_roots(&qf)).flatten();
    if let Some(found) = eig.and_then(|eig| accept_float_roots(&qf, eig, tol)) {
        roots.extend(found);
        return Ok(RootList::new(roots));
    }
    let exact = q.to_rational();
    if !is_real_rooted_exact(&exact)? {
        let real = SturmChain::new(&exact).count_real() + zeros;
        return Err(Error::NotRealRooted { real, degree: p.degree() });
    }
    roots.extend(sturm_real_roots(&exact));
    Ok(RootList::new(roots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn close(got: &RootList, want: &[f64], eps: f64) -> bool {
        got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= eps)
    }

    #[test]
    fn spec_examples() {
        let p = UniPoly::<Rational>::from_i64(&[2, -3, 1]);
        assert!(close(&real_roots(&p, DEFAULT_TOL).unwrap(), &[2.0, 1.0], 1e-12));
        let p = UniPoly::<f64>::from_i64(&[1, -2, 1]);
        assert!(close(&real_roots(&p, DEFAULT_TOL).unwrap(), &[1.0, 1.0], 1e-7));
        let p = UniPoly::<f64>::from_i64(&[4, 0, -5, 0, 1]);
        assert!(close(&real_roots(&p, DEFAULT_TOL).unwrap(), &[2.0, 1.0, -1.0, -2.0], 1e-12));
    }

    #[test]
    fn non_real_rooted_input_is_rejected() {
        let p = UniPoly::<Rational>::from_i64(&[1, 0, 1]);
        assert_eq!(
            real_roots(&p, DEFAULT_TOL),
            Err(Error::NotRealRooted { real: 0, degree: 2 })
        );
        let p = UniPoly::<Rational>::from_i64(&[0, 0, 1, 0, 1]);
        assert_eq!(
            real_roots(&p, DEFAULT_TOL),
            Err(Error::NotRealRooted { real: 2, degree: 4 })
        );
    }

    #[test]
    fn zero_roots_are_exact() {
        let p = UniPoly::<f64>::from_i64(&[0, 0, -1, 0, 1]);
        let r = real_roots(&p, DEFAULT_TOL).unwrap();
        assert_eq!(r.as_slice()[1], 0.0);
        assert_eq!(r.as_slice()[2], 0.0);
    }

    #[test]
    fn clustered_high_multiplicity_roots() {
        let r3 = Rational::from_ratio(1, 3);
        let p = UniPoly::from_roots(&[r3.clone(), r3.clone(), r3.clone(), r3, Rational::from_i64(-5)]);
        let roots = real_roots(&p, DEFAULT_TOL).unwrap();
        assert_eq!(roots.len(), 5);
        assert!((roots.max() - 1.0 / 3.0).abs() < 1e-12);
        assert!((roots.min() + 5.0).abs() < 1e-9);
    }
}
