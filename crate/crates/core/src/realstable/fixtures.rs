use super::MultiPoly;
use crate::error::{Error, Result};
use crate::graph::{for_each_subset, Graph};
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::Rational;

/// Four-element subsets of `{1..10}` that are not bases of the Vámos matroid.
pub const VAMOS_EXCLUDED: [[usize; 4]; 7] = [
    [1, 2, 3, 4],
    [1, 2, 5, 6],
    [1, 2, 7, 8],
    [1, 2, 9, 10],
    [3, 4, 5, 6],
    [5, 6, 7, 8],
    [7, 8, 9, 10],
];

#[derive(Clone, Debug, PartialEq)]
pub enum Fixture {
    /// One variable per edge.
    SpanningTree(Graph),
    /// One variable per vertex; includes the empty matching.
    Matching(Graph),
    Vamos,
    ElemSym { n: usize, k: usize },
    /// Vertex variables `x_u` first, then edge variables `w_e`.
    MultivariateMatching(Graph),
}

fn monomial(nvars: usize, vars: impl IntoIterator<Item = usize>) -> Vec<u32> {
    let mut e = vec![0; nvars];
    for v in vars {
        e[v] += 1;
    }
    e
}

fn matchings(g: &Graph) -> Vec<Vec<usize>> {
    fn rec(g: &Graph, start: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for i in start..g.num_edges() {
            let (u, v) = g.edges()[i];
            if used[u] || used[v] {
                continue;
            }
            used[u] = true;
            used[v] = true;
            cur.push(i);
            rec(g, i + 1, used, cur, out);
            cur.pop();
            used[u] = false;
            used[v] = false;
        }
    }
    let mut out = Vec::new();
    rec(g, 0, &mut vec![false; g.vertices()], &mut Vec::new(), &mut out);
    out
}

fn elem_sym(n: usize, k: usize) -> MultiPoly<Rational> {
    let mut terms = Vec::new();
    for_each_subset(n, k, &mut |mask| {
        terms.push((monomial(n, (0..n).filter(|i| mask >> i & 1 == 1)), Rational::from_i64(1)));
    });
    MultiPoly::from_terms(n, terms)
}

pub fn fixture(kind: &Fixture) -> Result<MultiPoly<Rational>> {
    let one = Rational::from_i64(1);
    Ok(match kind {
        Fixture::SpanningTree(g) => {
            let m = g.num_edges();
            let trees = g.spanning_trees()?;
            MultiPoly::from_terms(
                m,
                trees
                    .into_iter()
                    .map(|t| (monomial(m, (0..m).filter(|i| t >> i & 1 == 1)), one.clone())),
            )
        }
        Fixture::Matching(g) => {
            let n = g.vertices();
            MultiPoly::from_terms(
                n,
                matchings(g).into_iter().map(|mt| {
                    let sign = if mt.len() % 2 == 0 { 1 } else { -1 };
                    let vars = mt.iter().flat_map(|&i| [g.edges()[i].0, g.edges()[i].1]);
                    (monomial(n, vars), Rational::from_i64(sign))
                }),
            )
        }
        Fixture::Vamos => {
            let mut terms = Vec::new();
            for_each_subset(10, 4, &mut |mask| {
                let set: Vec<usize> = (0..10).filter(|i| mask >> i & 1 == 1).collect();
                let excluded = VAMOS_EXCLUDED
                    .iter()
                    .any(|ex| ex.iter().map(|v| v - 1).eq(set.iter().copied()));
                if !excluded {
                    terms.push((monomial(10, set), one.clone()));
                }
            });
            MultiPoly::from_terms(10, terms)
        }
        Fixture::ElemSym { n, k } => {
            if *k > *n {
                return Err(Error::InvalidParams(format!("e_{k} in {n} variables is zero")));
            }
            elem_sym(*n, *k)
        }
        Fixture::MultivariateMatching(g) => {
            let nv = g.vertices();
            let nvars = nv + g.num_edges();
            MultiPoly::from_terms(
                nvars,
                matchings(g).into_iter().map(|mt| {
                    let sign = if mt.len() % 2 == 0 { 1 } else { -1 };
                    let mut covered = vec![false; nv];
                    for &i in &mt {
                        covered[g.edges()[i].0] = true;
                        covered[g.edges()[i].1] = true;
                    }
                    let mut e = monomial(nvars, (0..nv).filter(|&u| !covered[u]));
                    for &i in &mt {
                        e[nv + i] = 2;
                    }
                    (e, Rational::from_i64(sign))
                }),
            )
        }
    })
}

/// `det(z₁A₁ + … + z_nA_n + B)` expanded symbolically (Leibniz formula).
pub fn determinant_mixture<T: Scalar>(mats: &[Mat<T>], b: Option<&Mat<T>>) -> Result<MultiPoly<T>> {
    let n = mats.len();
    let d = mats.first().map_or_else(|| b.map_or(0, Vec::len), Vec::len);
    if mats.iter().chain(b).any(|m| m.len() != d || m.iter().any(|r| r.len() != d)) {
        return Err(Error::InvalidParams("matrices must share one square shape".into()));
    }
    let entry = |i: usize, j: usize| -> MultiPoly<T> {
        let mut p = MultiPoly::zero(n);
        for (k, a) in mats.iter().enumerate() {
            p = p.add(&MultiPoly::var(n, k).scale(&a[i][j]));
        }
        if let Some(b) = b {
            p = p.add(&MultiPoly::constant(n, b[i][j].clone()));
        }
        p
    };
    let cells: Vec<Vec<MultiPoly<T>>> = (0..d).map(|i| (0..d).map(|j| entry(i, j)).collect()).collect();
    let mut total = MultiPoly::zero(n);
    let mut perm: Vec<usize> = (0..d).collect();
    permutations(&mut perm, 0, &mut |p, sign| {
        let mut term = MultiPoly::constant(n, if sign { T::one() } else { -T::one() });
        for (i, &j) in p.iter().enumerate() {
            term = term.mul(&cells[i][j]);
            if term.is_zero() {
                return;
            }
        }
        total = total.add(&term);
    });
    Ok(total)
}

/// Visits all permutations with their parity (`true` = even).
fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], bool)) {
    fn rec(p: &mut Vec<usize>, k: usize, even: bool, f: &mut impl FnMut(&[usize], bool)) {
        if k == p.len() {
            f(p, even);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(p, k + 1, if i == k { even } else { !even }, f);
            p.swap(k, i);
        }
    }
    rec(p, k, true, f);
}
