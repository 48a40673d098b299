//! Small dense linear algebra over a [`Scalar`], plus the `f64` symmetric
//! eigensolver used by the float paths.

use nalgebra::DMatrix;

use crate::scalar::Scalar;
use crate::unipoly::UniPoly;

/// Row-major dense matrix.
pub type Mat<T> = Vec<Vec<T>>;

pub fn identity<T: Scalar>(n: usize) -> Mat<T> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

pub fn zeros<T: Scalar>(r: usize, c: usize) -> Mat<T> {
    vec![vec![T::zero(); c]; r]
}

pub fn matmul<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = zeros::<T>(n, m);
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] = out[i][j].clone() + a[i][l].clone() * b[l][j].clone();
            }
        }
    }
    out
}

pub fn mat_add<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.clone() + y.clone()).collect())
        .collect()
}

pub fn mat_scale<T: Scalar>(a: &Mat<T>, c: &T) -> Mat<T> {
    a.iter()
        .map(|r| r.iter().map(|x| x.clone() * c.clone()).collect())
        .collect()
}

pub fn trace<T: Scalar>(a: &Mat<T>) -> T {
    (0..a.len()).fold(T::zero(), |acc, i| acc + a[i][i].clone())
}

/// `u vᵀ`.
pub fn outer<T: Scalar>(u: &[T], v: &[T]) -> Mat<T> {
    u.iter()
        .map(|a| v.iter().map(|b| a.clone() * b.clone()).collect())
        .collect()
}

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter()
        .zip(v)
        .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// Gaussian elimination with largest-magnitude pivoting.
pub fn det<T: Scalar>(a: &Mat<T>) -> T {
    let n = a.len();
    let mut m = a.clone();
    let mut acc = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .max_by(|&r, &s| {
                m[r][col]
                    .abs()
                    .partial_cmp(&m[s][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(p) = pivot else {
            return T::zero();
        };
        if p != col {
            m.swap(p, col);
            acc = -acc;
        }
        let pv = m[col][col].clone();
        acc = acc * pv.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / pv.clone();
            for c in col..n {
                m[r][c] = m[r][c].clone() - f.clone() * m[col][c].clone();
            }
        }
    }
    acc
}

/// Gauss–Jordan inverse; `None` for a singular matrix.
pub fn inverse<T: Scalar>(a: &Mat<T>) -> Option<Mat<T>> {
    let n = a.len();
    let mut m: Mat<T> = a
        .iter()
        .zip(identity::<T>(n))
        .map(|(r, e)| r.iter().cloned().chain(e).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).filter(|&r| !m[r][col].is_zero()).max_by(|&r, &s| {
            m[r][col]
                .abs()
                .partial_cmp(&m[s][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        m.swap(p, col);
        let pv = m[col][col].clone();
        for c in 0..2 * n {
            m[col][c] = m[col][c].clone() / pv.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..2 * n {
                m[r][c] = m[r][c].clone() - f.clone() * m[col][c].clone();
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `det(tI − A)` by the Faddeev–LeVerrier recurrence.
pub fn charpoly<T: Scalar>(a: &Mat<T>) -> UniPoly<T> {
    let n = a.len();
    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();
    let mut m = zeros::<T>(n, n);
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·I
        m = matmul(a, &m);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = row[i].clone() + c[n - k + 1].clone();
        }
        let am = matmul(a, &m);
        c[n - k] = -trace(&am) / T::from_usize(k);
    }
    UniPoly::new(c)
}

/// `σ_j(A)`, the sum of all `j×j` principal minors, for `j = 0..=n`.
pub fn principal_minor_sums<T: Scalar>(a: &Mat<T>) -> Vec<T> {
    let n = a.len();
    let p = charpoly(a);
    (0..=n)
        .map(|j| {
            let c = p.coeff(n - j);
            if j % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect()
}

/// Side length `m′` with `m′(m′+1)/2 = m`, if any.
pub fn sym_side(m: usize) -> Option<usize> {
    (0..=m).find(|&k| k * (k + 1) / 2 == m)
}

/// Upper triangle, row-major, no off-diagonal scaling.
pub fn sym_to_vec<T: Scalar>(a: &Mat<T>) -> Vec<T> {
    let n = a.len();
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            v.push(a[i][j].clone());
        }
    }
    v
}

/// Inverse of [`sym_to_vec`]; panics when `v.len()` is not triangular.
pub fn vec_to_sym<T: Scalar>(v: &[T]) -> Mat<T> {
    let n = sym_side(v.len()).expect("length is not a triangular number");
    let mut a = zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            a[i][j] = v[k].clone();
            a[j][i] = v[k].clone();
            k += 1;
        }
    }
    a
}

/// `vec(u uᵀ)`.
pub fn rank_one_vec<T: Scalar>(u: &[T]) -> Vec<T> {
    sym_to_vec(&outer(u, u))
}

fn to_dmatrix<T: Scalar>(a: &Mat<T>) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| a[i][j].to_f64())
}

/// Eigenvalues (descending) and matching orthonormal eigenvectors of a
/// symmetric matrix.
pub fn sym_eigen<T: Scalar>(a: &Mat<T>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let eig = to_dmatrix(a).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = idx
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(rows: &[&[i64]]) -> Mat<Rational> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Rational::from_i64(v)).collect())
            .collect()
    }

    #[test]
    fn determinant_and_inverse() {
        let a = q(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(det(&a), Rational::from_i64(18));
        let inv = inverse(&a).unwrap();
        assert_eq!(matmul(&a, &inv), identity(3));
        assert!(inverse(&q(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn charpoly_matches_determinant_expansion() {
        let a = q(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let p = charpoly(&a);
        for t in -3..5 {
            let t = Rational::from_i64(t);
            let shifted = mat_add(&mat_scale(&identity(3), &t), &mat_scale(&a, &Rational::from_i64(-1)));
            assert_eq!(p.eval(&t), det(&shifted));
        }
        let s = principal_minor_sums(&a);
        assert_eq!(s[1], Rational::from_i64(9));
        assert_eq!(s[2], Rational::from_i64(5 + 8 + 11));
        assert_eq!(s[3], Rational::from_i64(18));
    }

    #[test]
    fn symmetric_vectorization_roundtrip() {
        let a = q(&[&[1, 2], &[2, 5]]);
        let v = sym_to_vec(&a);
        assert_eq!(v, vec![Rational::from_i64(1), Rational::from_i64(2), Rational::from_i64(5)]);
        assert_eq!(vec_to_sym(&v), a);
        assert_eq!(sym_side(6), Some(3));
        assert_eq!(sym_side(5), None);
    }

    #[test]
    fn eigen_sorted_descending() {
        let (vals, vecs) = sym_eigen(&vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
        assert_eq!(vals, vec![3.0, 2.0]);
        assert!((vecs[0][1].abs() - 1.0).abs() < 1e-12);
    }
}
