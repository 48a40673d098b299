//! Exact real-root counting over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::roots::companion_roots;
use super::UniPoly;
use crate::error::{Error, Result};
use crate::scalar::{sign_of, Scalar};

type QPoly = UniPoly<BigRational>;

/// Positive rescaling to integer coefficients with content 1. Signs, and
/// therefore Sturm sign patterns, are unchanged.
pub(crate) fn primitive_part(p: &QPoly) -> QPoly {
    if p.is_zero() {
        return p.clone();
    }
    let mut lcm = BigInt::one();
    for c in p.coeffs() {
        lcm = lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p.coeffs().iter().map(|c| (c * &lcm).to_integer()).collect();
    let mut g = BigInt::zero();
    for c in &ints {
        g = g.gcd(c);
    }
    if g.is_zero() {
        g = BigInt::one();
    }
    UniPoly::new(
        ints.into_iter()
            .map(|c| BigRational::from_integer(c / &g))
            .collect(),
    )
}

/// Cauchy bound: every root satisfies `|r| < 1 + max |cᵢ / c_deg|`.
pub(crate) fn cauchy_bound(p: &QPoly) -> BigRational {
    let lc = p.leading().abs();
    let n = p.degree();
    let m = p.coeffs()[..n]
        .iter()
        .map(|c| c.abs() / &lc)
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    m + BigRational::one()
}

#[derive(Clone, Debug)]
pub struct SturmChain {
    seq: Vec<QPoly>,
}

impl SturmChain {
    pub fn new(p: &QPoly) -> Self {
        let mut seq = vec![primitive_part(p)];
        let d = primitive_part(&p.derivative());
        if !d.is_zero() {
            seq.push(d);
        }
        while seq.len() >= 2 {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(primitive_part(&-&r));
        }
        Self { seq }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn sign_changes_at(&self, x: &BigRational) -> usize {
        count_changes(self.seq.iter().map(|p| sign_of(&p.eval(x))))
    }

    pub fn sign_changes_at_infinity(&self, positive: bool) -> usize {
        count_changes(self.seq.iter().map(|p| {
            let s = sign_of(&p.leading());
            if positive || p.degree() % 2 == 0 {
                s
            } else {
                -s
            }
        }))
    }

    /// Distinct real roots in the half-open interval `(a, b]`.
    pub fn count_in(&self, a: &BigRational, b: &BigRational) -> usize {
        self.sign_changes_at(a).saturating_sub(self.sign_changes_at(b))
    }

    /// Distinct real roots on the whole line.
    pub fn count_real(&self) -> usize {
        self.sign_changes_at_infinity(false)
            .saturating_sub(self.sign_changes_at_infinity(true))
    }
}

fn count_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

/// Number of distinct real roots (Sturm's theorem).
pub fn count_distinct_real_roots(p: &QPoly) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(SturmChain::new(p).count_real())
}

/// Yun's algorithm: `p = lc · Π fᵢ^i` with each `fᵢ` monic and squarefree.
/// Returns `(fᵢ, i)` for the non-constant factors.
pub fn squarefree_decomposition(p: &QPoly) -> Vec<(QPoly, usize)> {
    let mut out = Vec::new();
    if p.degree() == 0 {
        return out;
    }
    let d = p.derivative();
    let a0 = UniPoly::gcd(p, &d);
    let mut b = p.div_rem(&a0).0;
    let c = d.div_rem(&a0).0;
    let mut dd = &c - &b.derivative();
    let mut i = 1;
    while b.degree() > 0 {
        let a = UniPoly::gcd(&b, &dd);
        let next_b = b.div_rem(&a).0;
        let c_next = dd.div_rem(&a).0;
        dd = &c_next - &next_b.derivative();
        if a.degree() > 0 {
            out.push((a, i));
        }
        b = next_b;
        i += 1;
    }
    out
}

/// Sign of `p(x)` for a finite `x`, where `ints` are integer coefficients
/// of `p` (constant first). `x = m / 2^e` is exact, so the sign is that of
/// `Σ cᵢ mⁱ 2^{e(n−i)}`.
fn sign_at_f64(ints: &[BigInt], x: f64) -> i8 {
    let (mant, exp, sign) = num_traits::Float::integer_decode(x);
    let mut m = BigInt::from(mant) * i64::from(sign);
    let e = if exp >= 0 {
        m <<= exp as usize;
        0
    } else {
        (-exp) as usize
    };
    let n = ints.len() - 1;
    let mut acc = ints[n].clone();
    for (k, c) in ints[..n].iter().rev().enumerate() {
        acc = acc * &m + (c << (e * (k + 1)));
    }
    match acc.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

/// Certifies `n` distinct real roots of a degree-`n` polynomial by finding
/// `n` sign changes at points placed between floating-point root
/// estimates. Returns `false` when no certificate is found, which is not a
/// proof of anything.
fn certify_by_sign_changes(p: &QPoly) -> bool {
    let n = p.degree();
    if n <= 1 {
        return true;
    }
    let pf = p.to_f64();
    if pf.coeffs().iter().any(|c| !c.is_finite()) || pf.leading() == 0.0 {
        return false;
    }
    let Some(eig) = companion_roots(&pf) else {
        return false;
    };
    let mut re: Vec<f64> = eig.iter().map(|z| z.re).collect();
    if re.iter().any(|r| !r.is_finite()) {
        return false;
    }
    re.sort_by(|a, b| b.total_cmp(a));
    let ints: Vec<BigInt> = primitive_part(p).coeffs().iter().map(|c| c.numer().clone()).collect();
    let lc_sign = sign_of(&p.leading());
    let mut prev = lc_sign;
    let mut prev_point = f64::INFINITY;
    for w in re.windows(2) {
        let mid = 0.5 * w[0] + 0.5 * w[1];
        if !mid.is_finite() || mid >= prev_point {
            return false;
        }
        let s = sign_at_f64(&ints, mid);
        if s == 0 || s == prev {
            return false;
        }
        prev = s;
        prev_point = mid;
    }
    let s_minus = if n.is_multiple_of(2) { lc_sign } else { -lc_sign };
    s_minus != prev
}

/// Exact verdict over the rationals: every complex root is real.
pub fn is_real_rooted_exact(p: &QPoly) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let q = p.strip_zero_roots();
    if q.degree() <= 1 || certify_by_sign_changes(&q) {
        return Ok(true);
    }
    let g = UniPoly::gcd(&q, &q.derivative());
    let sf = if g.degree() > 0 { q.div_rem(&g).0 } else { q };
    if g.degree() > 0 && certify_by_sign_changes(&sf) {
        return Ok(true);
    }
    Ok(SturmChain::new(&sf).count_real() == sf.degree())
}

/// Real-rootedness verdict. Exact scalars get an exact answer. Floats are
/// converted to their exact binary values first; if that polynomial is not
/// real-rooted, a tolerance test on companion eigenvalues decides, so that
/// rounding-split multiple roots are still accepted.
pub fn is_real_rooted<T: Scalar>(p: &UniPoly<T>, tol: f64) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let exact = is_real_rooted_exact(&p.to_rational())?;
    if exact || T::EXACT {
        return Ok(exact);
    }
    let q = p.to_f64().strip_zero_roots();
    if q.degree() == 0 {
        return Ok(true);
    }
    let Some(roots) = companion_roots(&q) else {
        return Ok(false);
    };
    let scale = roots.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    Ok(roots.iter().all(|z| z.im.abs() <= tol.sqrt() * scale))
}

/// All real roots with multiplicity, descending, by Sturm bisection on each
/// squarefree factor. Requires an exactly real-rooted input to return `degree` roots.
pub(crate) fn sturm_real_roots(p: &QPoly) -> Vec<f64> {
    let mut out = Vec::new();
    let zeros = p.zero_root_multiplicity();
    out.extend(std::iter::repeat_n(0.0, zeros));
    let q = p.strip_zero_roots();
    for (f, mult) in squarefree_decomposition(&q) {
        let chain = SturmChain::new(&f);
        let b = cauchy_bound(&f);
        let mut found = Vec::new();
        isolate(&chain, -b.clone(), b, &mut found);
        for r in found {
            out.extend(std::iter::repeat_n(r, mult));
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn isolate(chain: &SturmChain, lo: BigRational, hi: BigRational, out: &mut Vec<f64>) {
    match chain.count_in(&lo, &hi) {
        0 => {}
        1 => out.push(refine(chain, lo, hi)),
        _ => {
            let mid = (&lo + &hi) / BigRational::from_i64(2);
            isolate(chain, lo, mid.clone(), out);
            isolate(chain, mid, hi, out);
        }
    }
}

fn refine(chain: &SturmChain, mut lo: BigRational, mut hi: BigRational) -> f64 {
    let two = BigRational::from_i64(2);
    for _ in 0..400 {
        let (lf, hf) = (lo.to_f64(), hi.to_f64());
        if lf == hf || (hf - lf).abs() <= f64::EPSILON * lf.abs().max(hf.abs()) {
            break;
        }
        let mid = (&lo + &hi) / &two;
        if chain.count_in(&lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ((&lo + &hi) / two).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(c: &[i64]) -> QPoly {
        UniPoly::from_i64(c)
    }

    #[test]
    fn dyadic_signs_match_rational_evaluation() {
        let p = q(&[-6, 11, -6, 1]);
        let ints: Vec<BigInt> = p.coeffs().iter().map(|c| c.numer().clone()).collect();
        for x in [0.0, 1.0, 1.5, 2.0, -0.375, 2.9999999999999996, 3.0000000000000004, 1e6, -1e-9] {
            let exact = sign_of(&p.eval(&BigRational::from_float(x).unwrap()));
            assert_eq!(sign_at_f64(&ints, x), exact, "x = {x}");
        }
    }

    #[test]
    fn real_rootedness_examples() {
        assert!(is_real_rooted_exact(&q(&[2, -3, 1])).unwrap());
        assert!(!is_real_rooted_exact(&q(&[1, 0, 1])).unwrap());
        assert!(!is_real_rooted_exact(&q(&[1, 2, 2])).unwrap());
        assert!(is_real_rooted_exact(&q(&[1, -2, 1])).unwrap());
        assert!(is_real_rooted_exact(&q(&[0, 0, 0, 1])).unwrap());
        assert_eq!(is_real_rooted_exact(&q(&[])), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn repeated_roots_need_the_squarefree_route() {
        // (x−1)²(x+2)³(x²+1) is not real-rooted; (x−1)²(x+2)³ is.
        let a = &q(&[1, -2, 1]) * &UniPoly::from_roots(&vec![-BigRational::from_i64(2); 3]);
        assert!(is_real_rooted_exact(&a).unwrap());
        let b = &a * &q(&[1, 0, 1]);
        assert!(!is_real_rooted_exact(&b).unwrap());
        assert_eq!(count_distinct_real_roots(&b).unwrap(), 2);
    }

    #[test]
    fn yun_recovers_multiplicities() {
        let p = &(&q(&[-1, 1]) * &q(&[-1, 1])) * &(&q(&[2, 1]) * &(&q(&[2, 1]) * &q(&[2, 1])));
        let dec = squarefree_decomposition(&p);
        assert_eq!(dec, vec![(q(&[-1, 1]), 2), (q(&[2, 1]), 3)]);
    }

    #[test]
    fn sturm_bisection_finds_all_roots() {
        let r = sturm_real_roots(&q(&[4, 0, -5, 0, 1]));
        let want = [2.0, 1.0, -1.0, -2.0];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let r = sturm_real_roots(&q(&[0, 0, -2, 0, 1]));
        assert_eq!(r.len(), 4);
        assert!((r[0] - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(r[1], 0.0);
    }
}
