//! Undirected multigraphs without loops, spanning-tree enumeration and the
//! Laplacian, plus the named graphs used by the fixtures.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;
use crate::Rational;

/// Cap on the number of edge subsets examined by [`Graph::spanning_trees`].
pub const MAX_TREE_CANDIDATES: u128 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidParams(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{vertices}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParams(format!("self-loop at vertex {u}")));
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return false;
        }
        let mut uf = UnionFind::new(self.vertices);
        let mut parts = self.vertices;
        for &(u, v) in &self.edges {
            if uf.union(u, v) {
                parts -= 1;
            }
        }
        parts == 1
    }

    pub fn laplacian<T: Scalar>(&self) -> Mat<T> {
        let mut l = linalg::zeros::<T>(self.vertices, self.vertices);
        for &(u, v) in &self.edges {
            l[u][u] = l[u][u].clone() + T::one();
            l[v][v] = l[v][v].clone() + T::one();
            l[u][v] = l[u][v].clone() - T::one();
            l[v][u] = l[v][u].clone() - T::one();
        }
        l
    }

    /// Laplacian with the last vertex's row and column removed.
    pub fn reduced_laplacian<T: Scalar>(&self) -> Mat<T> {
        let n = self.vertices.saturating_sub(1);
        self.laplacian::<T>()
            .into_iter()
            .take(n)
            .map(|r| r.into_iter().take(n).collect())
            .collect()
    }

    /// Reduced incidence vector of edge `e` (last vertex dropped).
    pub fn reduced_incidence<T: Scalar>(&self, e: usize) -> Vec<T> {
        let (u, v) = self.edges[e];
        let mut b = vec![T::zero(); self.vertices.saturating_sub(1)];
        if u + 1 < self.vertices {
            b[u] = T::one();
        }
        if v + 1 < self.vertices {
            b[v] = -T::one();
        }
        b
    }

    /// Matrix-tree theorem count.
    pub fn spanning_tree_count(&self) -> BigInt {
        if self.vertices == 0 {
            return BigInt::from(0);
        }
        linalg::det(&self.reduced_laplacian::<Rational>()).to_integer()
    }

    /// Every spanning tree as a bitmask over edge indices, in increasing mask order.
    pub fn spanning_trees(&self) -> Result<Vec<u64>> {
        if !self.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        let m = self.edges.len();
        let k = self.vertices - 1;
        if m > 64 {
            return Err(Error::TooLarge { count: u128::MAX, limit: MAX_TREE_CANDIDATES });
        }
        let count = binomial(m as u128, k as u128);
        if count > MAX_TREE_CANDIDATES {
            return Err(Error::TooLarge { count, limit: MAX_TREE_CANDIDATES });
        }
        let mut out = Vec::new();
        for_each_subset(m, k, &mut |mask| {
            let mut uf = UnionFind::new(self.vertices);
            let acyclic = (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .all(|i| uf.union(self.edges[i].0, self.edges[i].1));
            if acyclic {
                out.push(mask);
            }
        });
        out.sort_unstable();
        Ok(out)
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self { vertices: n, edges }
    }

    /// Path on `n` vertices.
    pub fn path(n: usize) -> Self {
        Self {
            vertices: n,
            edges: (1..n).map(|i| (i - 1, i)).collect(),
        }
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n >= 3 {
            g.edges.push((n - 1, 0));
        }
        g
    }

    /// `K₄` minus the edge `ad`: vertices a..d, edges ab, ac, bd, cd, bc in that order.
    pub fn diamond() -> Self {
        Self {
            vertices: 4,
            edges: vec![(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)],
        }
    }

    /// `k3`, `k4`, `kN`, `pN` (path on N vertices), `cN`, or `diamond`.
    pub fn by_name(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        if lower == "diamond" {
            return Ok(Self::diamond());
        }
        let bad = || Error::InvalidParams(format!("unknown graph name `{name}`"));
        let (head, tail) = lower.split_at(1.min(lower.len()));
        let n: usize = tail.parse().map_err(|_| bad())?;
        match head {
            "k" if n >= 1 => Ok(Self::complete(n)),
            "p" if n >= 1 => Ok(Self::path(n)),
            "c" if n >= 3 => Ok(Self::cycle(n)),
            _ => Err(bad()),
        }
    }

    fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges
            .iter()
            .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
    }

    /// Canonical sorted edge list, minimized over relabelings that respect a
    /// degree-based vertex partition.
    fn canonical_form(&self) -> Vec<(usize, usize)> {
        let deg = self.degrees();
        let sig: Vec<(usize, Vec<usize>)> = (0..self.vertices)
            .map(|v| {
                let mut nb: Vec<usize> = self
                    .edges
                    .iter()
                    .filter_map(|&(a, b)| {
                        if a == v {
                            Some(deg[b])
                        } else if b == v {
                            Some(deg[a])
                        } else {
                            None
                        }
                    })
                    .collect();
                nb.sort_unstable();
                (deg[v], nb)
            })
            .collect();
        let mut order: Vec<usize> = (0..self.vertices).collect();
        order.sort_by(|&a, &b| sig[a].cmp(&sig[b]));
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            match classes.last_mut() {
                Some(c) if sig[c[0]] == sig[v] => c.push(v),
                _ => classes.push(vec![v]),
            }
        }
        let mut best: Option<Vec<(usize, usize)>> = None;
        let mut label = vec![0usize; self.vertices];
        permute_classes(&mut classes, 0, &mut |classes| {
            let mut next = 0;
            for c in classes.iter() {
                for &v in c {
                    label[v] = next;
                    next += 1;
                }
            }
            let mut e: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (label[a], label[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            e.sort_unstable();
            if best.as_ref().is_none_or(|b| e < *b) {
                best = Some(e);
            }
        });
        best.unwrap_or_default()
    }

    /// All connected simple graphs with between 1 and `max_edges` edges, one
    /// per isomorphism class, ordered by edge count.
    pub fn connected_up_to(max_edges: usize) -> Vec<Self> {
        let mut out = Vec::new();
        if max_edges == 0 {
            return out;
        }
        let mut layer: Vec<Self> = vec![Self::path(2)];
        let mut seen: HashSet<(usize, Vec<(usize, usize)>)> = HashSet::new();
        seen.insert((2, Self::path(2).canonical_form()));
        for _ in 1..max_edges {
            let mut next = Vec::new();
            for g in &layer {
                let mut cands = Vec::new();
                for u in 0..g.vertices {
                    for v in u + 1..g.vertices {
                        if !g.has_edge(u, v) {
                            let mut e = g.edges.clone();
                            e.push((u, v));
                            cands.push(Self { vertices: g.vertices, edges: e });
                        }
                    }
                    let mut e = g.edges.clone();
                    e.push((u, g.vertices));
                    cands.push(Self { vertices: g.vertices + 1, edges: e });
                }
                for c in cands {
                    let canon = c.canonical_form();
                    if seen.insert((c.vertices, canon.clone())) {
                        next.push(Self { vertices: c.vertices, edges: canon });
                    }
                }
            }
            out.append(&mut layer);
            layer = next;
        }
        out.append(&mut layer);
        out
    }
}

fn permute_classes(
    classes: &mut [Vec<usize>],
    idx: usize,
    f: &mut impl FnMut(&[Vec<usize>]),
) {
    if idx == classes.len() {
        f(classes);
        return;
    }
    let len = classes[idx].len();
    heap_permute(classes, idx, len, f);
}

fn heap_permute(
    classes: &mut [Vec<usize>],
    idx: usize,
    k: usize,
    f: &mut impl FnMut(&[Vec<usize>]),
) {
    if k <= 1 {
        permute_classes(classes, idx + 1, f);
        return;
    }
    for i in 0..k - 1 {
        heap_permute(classes, idx, k - 1, f);
        if k.is_multiple_of(2) {
            classes[idx].swap(i, k - 1);
        } else {
            classes[idx].swap(0, k - 1);
        }
    }
    heap_permute(classes, idx, k - 1, f);
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Calls `f` on every `k`-subset of `0..n` encoded as a bitmask.
pub(crate) fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(u64)) {
    fn rec(start: usize, n: usize, k: usize, mask: u64, f: &mut impl FnMut(u64)) {
        if k == 0 {
            f(mask);
            return;
        }
        for i in start..=n.saturating_sub(k) {
            if n - i < k {
                break;
            }
            rec(i + 1, n, k - 1, mask | 1 << i, f);
        }
    }
    rec(0, n, k, 0, f);
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let n = self.parent[c];
            self.parent[c] = r;
            c = n;
        }
        r
    }

    /// `false` when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Set of edge indices in a bitmask.
pub fn mask_to_set(mask: u64) -> BTreeSet<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}
