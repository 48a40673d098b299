//! Hyperbolic polynomial instances and their spectral calculus: eigenvalues,
//! norm, trace, rank, cone membership and directional derivatives.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::realstable::MultiPoly;
use crate::scalar::Scalar;
use crate::unipoly::{interpolate_integer_nodes, real_roots, RootList, UniPoly};

/// Relative threshold below which an eigenvalue counts as zero for the rank.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum HyperbolicKind<T> {
    /// `det` of an `size × size` symmetric matrix, vectorized by [`linalg::sym_to_vec`].
    Determinant { size: usize },
    /// `x_m² − x₁² − … − x_{m−1}²`.
    Lorentz { dim: usize },
    /// `e_k(x₁, …, x_n)`.
    ElemSym { n: usize, k: usize },
    /// A homogeneous real-stable polynomial, used with a positive direction.
    Custom(MultiPoly<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicInstance<T> {
    kind: HyperbolicKind<T>,
    e: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: RootList,
    pub norm: f64,
    pub trace: f64,
    pub rank: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeStatus {
    Interior,
    Boundary,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeVerdict {
    pub status: ConeStatus,
    /// Smallest eigenvalue.
    pub witness: f64,
}

impl<T: Scalar> HyperbolicInstance<T> {
    /// Validates `h(e) > 0` and the kind-specific conditions on `e`.
    pub fn new(kind: HyperbolicKind<T>, e: Vec<T>) -> Result<Self> {
        let inst = Self { kind, e };
        let m = inst.dim();
        if inst.e.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: inst.e.len() });
        }
        match &inst.kind {
            HyperbolicKind::Determinant { size } => {
                // Sylvester: every leading principal minor positive.
                let a = linalg::vec_to_sym(&inst.e);
                for k in 1..=*size {
                    let minor: Mat<T> = a[..k].iter().map(|r| r[..k].to_vec()).collect();
                    if !linalg::det(&minor).is_positive() {
                        return Err(Error::InvalidInstance("direction matrix is not positive definite".into()));
                    }
                }
            }
            HyperbolicKind::Lorentz { dim } => {
                if *dim < 2 {
                    return Err(Error::InvalidInstance("Lorentz dimension must be at least 2".into()));
                }
            }
            HyperbolicKind::ElemSym { n, k } => {
                if *k == 0 || k > n {
                    return Err(Error::InvalidInstance(format!("e_{k} in {n} variables")));
                }
                if inst.e.iter().any(|v| !v.is_positive()) {
                    return Err(Error::InvalidInstance("direction must be strictly positive".into()));
                }
            }
            HyperbolicKind::Custom(p) => {
                if p.homogeneous_degree().is_none() {
                    return Err(Error::InvalidInstance("polynomial is not homogeneous".into()));
                }
                if inst.e.iter().any(|v| !v.is_positive()) {
                    return Err(Error::InvalidInstance("direction must be strictly positive".into()));
                }
            }
        }
        if !inst.eval(&inst.e)?.is_positive() {
            return Err(Error::InvalidInstance("h(e) must be positive".into()));
        }
        Ok(inst)
    }

    /// `det` on `size × size` symmetric matrices with `e = vec(I)`.
    pub fn determinant(size: usize) -> Self {
        Self {
            kind: HyperbolicKind::Determinant { size },
            e: linalg::sym_to_vec(&linalg::identity::<T>(size)),
        }
    }

    /// Lorentz polynomial in `dim` variables with `e = (0, …, 0, 1)`.
    pub fn lorentz(dim: usize) -> Self {
        let mut e = vec![T::zero(); dim];
        e[dim - 1] = T::one();
        Self { kind: HyperbolicKind::Lorentz { dim }, e }
    }

    pub fn elem_sym(n: usize, k: usize) -> Result<Self> {
        Self::new(HyperbolicKind::ElemSym { n, k }, vec![T::one(); n])
    }

    pub fn custom(p: MultiPoly<T>, e: Vec<T>) -> Result<Self> {
        Self::new(HyperbolicKind::Custom(p), e)
    }

    pub fn kind(&self) -> &HyperbolicKind<T> {
        &self.kind
    }

    pub fn e(&self) -> &[T] {
        &self.e
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        match &self.kind {
            HyperbolicKind::Determinant { size } => size * (size + 1) / 2,
            HyperbolicKind::Lorentz { dim } => *dim,
            HyperbolicKind::ElemSym { n, .. } => *n,
            HyperbolicKind::Custom(p) => p.nvars(),
        }
    }

    /// Degree `d`.
    pub fn degree(&self) -> usize {
        match &self.kind {
            HyperbolicKind::Determinant { size } => *size,
            HyperbolicKind::Lorentz { .. } => 2,
            HyperbolicKind::ElemSym { k, .. } => *k,
            HyperbolicKind::Custom(p) => p.homogeneous_degree().unwrap_or(0),
        }
    }

    fn check_dim(&self, v: &[T]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        Ok(match &self.kind {
            HyperbolicKind::Determinant { .. } => linalg::det(&linalg::vec_to_sym(x)),
            HyperbolicKind::Lorentz { dim } => {
                let last = x[dim - 1].clone();
                x[..dim - 1]
                    .iter()
                    .fold(last.clone() * last, |acc, v| acc - v.clone() * v.clone())
            }
            HyperbolicKind::ElemSym { k, .. } => {
                let mut e = vec![T::zero(); k + 1];
                e[0] = T::one();
                for v in x {
                    for j in (1..=*k).rev() {
                        e[j] = e[j].clone() + v.clone() * e[j - 1].clone();
                    }
                }
                e[*k].clone()
            }
            HyperbolicKind::Custom(p) => p.eval(x),
        })
    }

    /// `t ↦ h(base + t·dir)`, exactly, by a closed form for each kind.
    pub fn restrict_line(&self, base: &[T], dir: &[T]) -> Result<UniPoly<T>> {
        self.check_dim(base)?;
        self.check_dim(dir)?;
        match &self.kind {
            HyperbolicKind::Determinant { .. } => self.det_restriction(base, dir),
            HyperbolicKind::Lorentz { dim } => {
                let lin = |i: usize| UniPoly::new(vec![base[i].clone(), dir[i].clone()]);
                let last = lin(dim - 1);
                let mut p = &last * &last;
                for i in 0..dim - 1 {
                    let l = lin(i);
                    p = &p - &(&l * &l);
                }
                Ok(p)
            }
            HyperbolicKind::ElemSym { k, .. } => {
                let mut e = vec![UniPoly::zero(); k + 1];
                e[0] = UniPoly::one();
                for (b, d) in base.iter().zip(dir) {
                    let lin = UniPoly::new(vec![b.clone(), d.clone()]);
                    for j in (1..=*k).rev() {
                        e[j] = &e[j] + &(&lin * &e[j - 1]);
                    }
                }
                Ok(e.swap_remove(*k))
            }
            HyperbolicKind::Custom(p) => p.restrict_line(base, dir),
        }
    }

    /// Same polynomial as [`Self::restrict_line`], recovered by interpolating
    /// `d + 1` evaluations at `t = 0, 1, …, d`.
    pub fn restrict_line_interpolated(&self, base: &[T], dir: &[T]) -> Result<UniPoly<T>> {
        self.check_dim(base)?;
        self.check_dim(dir)?;
        interpolate_integer_nodes(self.degree(), |t: &T| {
            let x: Vec<T> = base
                .iter()
                .zip(dir)
                .map(|(b, d)| b.clone() + t.clone() * d.clone())
                .collect();
            self.eval(&x)
        })
    }

    fn det_restriction(&self, base: &[T], dir: &[T]) -> Result<UniPoly<T>> {
        let x = linalg::vec_to_sym(base);
        let d = linalg::vec_to_sym(dir);
        let n = x.len();
        if !T::EXACT {
            if d == linalg::identity::<T>(n) {
                // det(X + tI) = Π (t + λᵢ(X))
                let (vals, _) = linalg::sym_eigen(&x);
                let roots: Vec<f64> = vals.iter().map(|l| -l).collect();
                return Ok(UniPoly::<f64>::from_roots(&roots).convert());
            }
            let xm = DMatrix::from_fn(n, n, |i, j| x[i][j].to_f64());
            let dm = DMatrix::from_fn(n, n, |i, j| d[i][j].to_f64());
            if let Some(ch) = well_conditioned_cholesky(&xm) {
                // det(LLᵀ + tD) = det(X)·Π (1 + t·μᵢ), μ = spec(L⁻¹DL⁻ᵀ)
                let l_inv = ch.l().try_inverse().expect("Cholesky factor is invertible");
                let c = &l_inv * dm * l_inv.transpose();
                let c = (&c + c.transpose()) * 0.5;
                let p = c
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .fold(UniPoly::constant(ch.determinant()), |acc, mu| &acc * &UniPoly::new(vec![1.0, *mu]));
                return Ok(p.convert());
            }
            if let Some(ch) = well_conditioned_cholesky(&dm) {
                // det(X + tLLᵀ) = det(D)·det(tI + L⁻¹XL⁻ᵀ)
                let l_inv = ch.l().try_inverse().expect("Cholesky factor is invertible");
                let c = &l_inv * xm * l_inv.transpose();
                let c = (&c + c.transpose()) * 0.5;
                let vals: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().map(|l| -l).collect();
                let det_d = ch.determinant();
                return Ok(UniPoly::<f64>::from_roots(&vals).scale(&det_d).convert());
            }
            return self.restrict_line_interpolated(base, dir);
        }
        match linalg::inverse(&d) {
            Some(d_inv) => {
                // det(X + tD) = det(D)·det(tI − (−D⁻¹X))
                let m = linalg::mat_scale(&linalg::matmul(&d_inv, &x), &-T::one());
                Ok(linalg::charpoly(&m).scale(&linalg::det(&d)))
            }
            None => self.restrict_line_interpolated(base, dir),
        }
    }

    /// Hyperbolic eigenvalues of `x`: the roots of `t ↦ h(te − x)`.
    pub fn spectrum(&self, x: &[T], tol: f64) -> Result<Spectrum> {
        self.check_dim(x)?;
        let neg: Vec<T> = x.iter().map(|v| -v.clone()).collect();
        let p = self.restrict_line(&neg, &self.e)?;
        let roots = real_roots(&p, tol)?;
        let d = self.degree();
        if roots.len() != d {
            return Err(Error::NotRealRooted { real: roots.len(), degree: d });
        }
        let norm = roots.max().max(-roots.min()).max(0.0);
        let trace = if d == 0 {
            0.0
        } else {
            (-p.coeff(d - 1) / p.coeff(d)).to_f64()
        };
        let thresh = RANK_TOL * norm.max(1.0);
        let rank = roots.iter().filter(|l| l.abs() > thresh).count();
        Ok(Spectrum { eigenvalues: roots, norm, trace, rank })
    }

    /// `‖x‖_h`.
    pub fn norm(&self, x: &[T], tol: f64) -> Result<f64> {
        Ok(self.spectrum(x, tol)?.norm)
    }

    /// Number of nonzero eigenvalues. Exact scalars count the multiplicity of
    /// the root `0` exactly; floats use [`RANK_TOL`].
    pub fn rank(&self, x: &[T]) -> Result<usize> {
        if T::EXACT {
            let neg: Vec<T> = x.iter().map(|v| -v.clone()).collect();
            let p = self.restrict_line(&neg, &self.e)?;
            return Ok(self.degree() - p.zero_root_multiplicity().min(self.degree()));
        }
        Ok(self.spectrum(x, crate::unipoly::DEFAULT_TOL)?.rank)
    }

    /// Checks `rank_h(vᵢ) ≤ 1` for every vector.
    pub fn certify_rank_one(&self, vectors: &[Vec<T>]) -> Result<()> {
        for (index, v) in vectors.iter().enumerate() {
            let rank = self.rank(v)?;
            if rank > 1 {
                return Err(Error::RankTooHigh { index, rank });
            }
        }
        Ok(())
    }

    /// Interior iff `λ_d > tol·max(1, ‖x‖)`, boundary iff `|λ_d|` is within that band.
    pub fn cone_membership(&self, x: &[T], tol: f64) -> Result<ConeVerdict> {
        let s = self.spectrum(x, tol)?;
        let lam = s.eigenvalues.min();
        let band = tol * s.norm.max(1.0);
        let status = if lam > band {
            ConeStatus::Interior
        } else if lam.abs() <= band {
            ConeStatus::Boundary
        } else {
            ConeStatus::Outside
        };
        Ok(ConeVerdict { status, witness: lam })
    }

    /// The functional `x ↦ D_v h(x)`.
    pub fn directional_derivative(&self, v: &[T]) -> Result<DirectionalDerivative<'_, T>> {
        self.check_dim(v)?;
        Ok(DirectionalDerivative { h: self, v: v.to_vec() })
    }

    /// `(Π_{i∈S} D_{vᵢ}) h(x)` by inclusion–exclusion, after certifying that
    /// every `vᵢ` with `i ∈ S` has rank at most one.
    pub fn rank1_product_derivative(&self, s: &[usize], vectors: &[Vec<T>], x: &[T]) -> Result<T> {
        for &i in s {
            let v = vectors
                .get(i)
                .ok_or(Error::IndexOutOfRange { index: i, nvars: vectors.len() })?;
            let rank = self.rank(v)?;
            if rank > 1 {
                return Err(Error::RankTooHigh { index: i, rank });
            }
        }
        self.rank1_product_derivative_unchecked(s, vectors, x)
    }

    /// [`Self::rank1_product_derivative`] without the rank certificate.
    pub fn rank1_product_derivative_unchecked(&self, s: &[usize], vectors: &[Vec<T>], x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        let k = s.len();
        let mut total = T::zero();
        for mask in 0u64..1 << k {
            let mut y = x.to_vec();
            for (bit, &i) in s.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    for (yj, vj) in y.iter_mut().zip(&vectors[i]) {
                        *yj = yj.clone() + vj.clone();
                    }
                }
            }
            let val = self.eval(&y)?;
            if (k - mask.count_ones() as usize).is_multiple_of(2) {
                total = total + val;
            } else {
                total = total - val;
            }
        }
        Ok(total)
    }

    /// `D_{v₁} ⋯ D_{v_k} h(x)` as the coefficient of `t₁⋯t_k` in
    /// `h(x + Σ tᵢvᵢ)`, found by nested exact interpolation. Valid for any
    /// vectors, so it serves as an oracle for the rank-one shortcut.
    pub fn iterated_directional_derivative(&self, vectors: &[&[T]], x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        let Some((first, rest)) = vectors.split_first() else {
            return self.eval(x);
        };
        self.check_dim(first)?;
        let deg = self.degree().saturating_sub(rest.len());
        if deg == 0 {
            return Ok(T::zero());
        }
        let g = interpolate_integer_nodes(deg, |t: &T| {
            let y: Vec<T> = x
                .iter()
                .zip(first.iter())
                .map(|(a, b)| a.clone() + t.clone() * b.clone())
                .collect();
            self.iterated_directional_derivative(rest, &y)
        })?;
        Ok(g.coeff(1))
    }

    /// `α · D_v h(αe) / h(αe)`; equals the hyperbolic trace of `v`.
    pub fn trace_via_derivative(&self, v: &[T], alpha: &T) -> Result<T> {
        if alpha.is_zero() {
            return Err(Error::InvalidParams("α must be nonzero".into()));
        }
        let ae: Vec<T> = self.e.iter().map(|c| c.clone() * alpha.clone()).collect();
        let dv = self.directional_derivative(v)?.eval(&ae)?;
        Ok(alpha.clone() * dv / self.eval(&ae)?)
    }

    /// `h(y₁d₁ + … + y_kd_k)` as a polynomial in `y₁, …, y_k`.
    pub fn pullback(&self, dirs: &[Vec<T>]) -> Result<MultiPoly<T>> {
        for d in dirs {
            self.check_dim(d)?;
        }
        let k = dirs.len();
        // coordinate `j` of `Σ yᵢdᵢ` as a linear form
        let coord = |j: usize| {
            MultiPoly::from_terms(
                k,
                dirs.iter().enumerate().map(|(i, d)| {
                    let mut e = vec![0; k];
                    e[i] = 1;
                    (e, d[j].clone())
                }),
            )
        };
        Ok(match &self.kind {
            HyperbolicKind::Determinant { .. } => {
                let mats: Vec<Mat<T>> = dirs.iter().map(|d| linalg::vec_to_sym(d)).collect();
                crate::realstable::determinant_mixture(&mats, None)?
            }
            HyperbolicKind::Lorentz { dim } => {
                let last = coord(dim - 1);
                (0..dim - 1).fold(last.mul(&last), |acc, j| {
                    let c = coord(j);
                    acc.sub(&c.mul(&c))
                })
            }
            HyperbolicKind::ElemSym { n, k: deg } => {
                let mut e = vec![MultiPoly::zero(k); deg + 1];
                e[0] = MultiPoly::constant(k, T::one());
                for j in 0..*n {
                    let c = coord(j);
                    for r in (1..=*deg).rev() {
                        e[r] = e[r].add(&c.mul(&e[r - 1]));
                    }
                }
                e.swap_remove(*deg)
            }
            HyperbolicKind::Custom(p) => {
                let coords: Vec<MultiPoly<T>> = (0..p.nvars()).map(coord).collect();
                let mut out = MultiPoly::zero(k);
                for (e, c) in p.terms() {
                    let mut term = MultiPoly::constant(k, c.clone());
                    for (j, &pw) in e.iter().enumerate() {
                        for _ in 0..pw {
                            term = term.mul(&coords[j]);
                        }
                    }
                    out = out.add(&term);
                }
                out
            }
        })
    }

    pub fn convert<U: Scalar>(&self) -> HyperbolicInstance<U> {
        let kind = match &self.kind {
            HyperbolicKind::Determinant { size } => HyperbolicKind::Determinant { size: *size },
            HyperbolicKind::Lorentz { dim } => HyperbolicKind::Lorentz { dim: *dim },
            HyperbolicKind::ElemSym { n, k } => HyperbolicKind::ElemSym { n: *n, k: *k },
            HyperbolicKind::Custom(p) => HyperbolicKind::Custom(p.convert()),
        };
        HyperbolicInstance {
            kind,
            e: self.e.iter().map(|v| U::from_rational(&v.to_rational())).collect(),
        }
    }
}

/// `x ↦ D_v h(x)`, the `t`-linear coefficient of `h(x + t·v)`.
#[derive(Clone, Debug)]
pub struct DirectionalDerivative<'a, T> {
    h: &'a HyperbolicInstance<T>,
    v: Vec<T>,
}

impl<T: Scalar> DirectionalDerivative<'_, T> {
    pub fn eval(&self, x: &[T]) -> Result<T> {
        Ok(self.h.restrict_line(x, &self.v)?.coeff(1))
    }

    pub fn direction(&self) -> &[T] {
        &self.v
    }
}

/// Cholesky factor, unless the matrix is indefinite or its pivots spread
/// over more than `1e6` (a rounded singular matrix can still factor).
fn well_conditioned_cholesky(m: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let ch = m.clone().cholesky()?;
    let diag = ch.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d.abs()), hi.max(d.abs())));
    (hi > 0.0 && lo > 1e-6 * hi).then_some(ch)
}
