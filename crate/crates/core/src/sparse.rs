//! Compressed sparse row matrices and a direct solver.
//!
//! The solver reorders with reverse Cuthill–McKee and factors the permuted
//! matrix as a band with partial pivoting, so it handles the indefinite
//! saddle-point systems of the scheme without special structure.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Unassembled `(row, col, value)` entries; duplicates are summed on build.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Triplets::new(nrows, ncols).build()
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Triplets::with_capacity(n, n, n);
        for i in 0..n {
            t.push(i, i, 1.0);
        }
        t.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Triplets::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.triplets() {
            t.push(j, i, v);
        }
        t.build()
    }

    /// `Σ_k c_k A_k` for matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> CsrMatrix {
        let (nrows, ncols) = terms
            .first()
            .map(|(_, m)| (m.nrows, m.ncols))
            .unwrap_or((0, 0));
        let cap = terms.iter().map(|(_, m)| m.nnz()).sum();
        let mut t = Triplets::with_capacity(nrows, ncols, cap);
        for (c, m) in terms {
            assert_eq!((m.nrows, m.ncols), (nrows, ncols));
            for (i, j, v) in m.triplets() {
                t.push(i, j, c * v);
            }
        }
        t.build()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A − Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        CsrMatrix::linear_combination(&[(1.0, self), (-1.0, &t)]).max_abs()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for (i, j, v) in self.triplets() {
            d[i * self.ncols + j] += v;
        }
        d
    }
}

/// Reverse Cuthill–McKee ordering of the symmetrized pattern of a square
/// matrix. Returns `order` with `order[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(&adj, &degree, start);
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first level structure from `root`: depth and the vertices of the
/// deepest level.
fn last_level(adj: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let mut level = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    level[root] = 0;
    queue.push_back(root);
    let mut depth = 0;
    let mut deepest = Vec::new();
    while let Some(v) = queue.pop_front() {
        if level[v] > depth {
            depth = level[v];
            deepest.clear();
        }
        deepest.push(v);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (depth, deepest)
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], start: usize) -> usize {
    let mut root = start;
    let (mut depth, mut deepest) = last_level(adj, root);
    for _ in 0..8 {
        let candidate = match deepest.iter().copied().min_by_key(|&v| (degree[v], v)) {
            Some(c) => c,
            None => break,
        };
        let (d2, l2) = last_level(adj, candidate);
        if d2 <= depth {
            break;
        }
        root = candidate;
        depth = d2;
        deepest = l2;
    }
    root
}

/// Lower and upper bandwidth of `a` under the ordering `order`.
pub fn bandwidth(a: &CsrMatrix, order: &[usize]) -> (usize, usize) {
    let mut position = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }
    let (mut kl, mut ku) = (0, 0);
    for (i, j, _) in a.triplets() {
        let (pi, pj) = (position[i], position[j]);
        if pi > pj {
            kl = kl.max(pi - pj);
        } else {
            ku = ku.max(pj - pi);
        }
    }
    (kl, ku)
}

/// Band LU factorization with partial pivoting. Row `i` stores columns
/// `i − kl ..= i + kl + ku`; the extra `kl` super-diagonals hold fill from
/// row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Factor `a` permuted symmetrically by `order` (`order[new] = old`).
    /// A failed pivot reports the original index of the offending unknown.
    pub fn factor(a: &CsrMatrix, order: &[usize]) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let (kl, ku) = bandwidth(a, order);
        let width = 2 * kl + ku + 1;
        let mut position = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            band: vec![0.0; n * width],
            pivots: vec![0; n],
        };
        for (i, j, v) in a.triplets() {
            let idx = lu.at(position[i], position[j]);
            lu.band[idx] += v;
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.band[lu.at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.band[lu.at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 * scale {
                return Err(Error::Singular {
                    index: order[k],
                    block: "matrix",
                });
            }
            lu.pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a_k, a_p) = (lu.at(k, j), lu.at(p, j));
                    lu.band.swap(a_k, a_p);
                }
            }
            let pivot = lu.band[lu.at(k, k)];
            let row_k = lu.at(k, k);
            for i in k + 1..=last_row {
                let idx = lu.at(i, k);
                let l = lu.band[idx] / pivot;
                lu.band[idx] = l;
                if l == 0.0 {
                    continue;
                }
                let row_i = lu.at(i, k);
                for off in 1..=last_col - k {
                    let u = lu.band[row_k + off];
                    lu.band[row_i + off] -= l * u;
                }
            }
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Solve in the permuted numbering.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == 0.0 {
                continue;
            }
            for i in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                b[i] -= self.band[self.at(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let row = self.at(k, k);
            let mut s = b[k];
            for off in 1..=last_col - k {
                s -= self.band[row + off] * b[k + off];
            }
            b[k] = s / self.band[row];
        }
    }
}

/// Direct solver for a square sparse matrix: RCM ordering plus band LU.
#[derive(Debug, Clone)]
pub struct SparseLu {
    order: Vec<usize>,
    lu: BandedLu,
}

impl SparseLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let order = reverse_cuthill_mckee(a);
        let lu = BandedLu::factor(a, &order)?;
        Ok(Self { order, lu })
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        self.lu.bandwidths()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.order.iter().map(|&old| b[old]).collect();
        self.lu.solve_in_place(&mut y);
        let mut x = vec![0.0; b.len()];
        for (new, &old) in self.order.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// `solve` followed by `steps` rounds of iterative refinement against
    /// the matrix that was factored.
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[f64], steps: usize) -> Vec<f64> {
        let mut x = self.solve(b);
        for _ in 0..steps {
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let dx = self.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseLu;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, density: f64, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            for j in 0..n {
                if i == j || rng.gen::<f64>() < density {
                    t.push(i, j, rng.gen_range(-1.0..1.0));
                }
            }
        }
        t.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = Triplets::new(2, 3);
        t.push(1, 2, 1.5);
        t.push(0, 0, 1.0);
        t.push(1, 2, 2.0);
        let m = t.build();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), 3.5);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]), vec![1.0, 7.0]);
        assert_eq!(m.transpose().get(2, 1), 3.5);
        assert_eq!(m.transpose_mul_vec(&[1.0, 1.0]), vec![1.0, 0.0, 3.5]);
    }

    #[test]
    fn rcm_is_a_permutation_and_narrows_a_path() {
        // A path graph numbered in a scrambled order.
        let n = 40;
        let label = |k: usize| (k * 17) % n;
        let mut t = Triplets::new(n, n);
        for k in 0..n {
            t.push(label(k), label(k), 2.0);
            if k + 1 < n {
                t.push(label(k), label(k + 1), -1.0);
                t.push(label(k + 1), label(k), -1.0);
            }
        }
        let m = t.build();
        let order = reverse_cuthill_mckee(&m);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        assert_eq!(bandwidth(&m, &order), (1, 1));
    }

    #[test]
    fn sparse_lu_matches_dense_solve() {
        for seed in 0..5 {
            let n = 30;
            let m = random_sparse(n, 0.1, seed);
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let x = SparseLu::new(&m).unwrap().solve(&b);
            let dense = DenseLu::new(&m.to_dense(), n).unwrap();
            let reference = dense.solve(&b);
            for (a, r) in x.iter().zip(&reference) {
                assert!((a - r).abs() < 1e-9 * (1.0 + r.abs()), "seed {seed}");
            }
        }
    }

    #[test]
    fn zero_diagonal_saddle_point_needs_pivoting() {
        // [[2, 1], [1, 0]]
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 2.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        let lu = SparseLu::new(&t.build()).unwrap();
        let x = lu.solve(&[4.0, 1.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut t = Triplets::new(3, 3);
        t.push(0, 0, 1.0);
        t.push(1, 1, 1.0);
        t.push(0, 1, 1.0);
        assert!(matches!(
            SparseLu::new(&t.build()),
            Err(Error::Singular { index: 2, .. })
        ));
    }

    #[test]
    fn linear_combination_and_asymmetry() {
        let a = random_sparse(12, 0.2, 9);
        let sym = CsrMatrix::linear_combination(&[(1.0, &a), (1.0, &a.transpose())]);
        assert!(sym.asymmetry() < 1e-15);
        let id = CsrMatrix::identity(12);
        let x: Vec<f64> = (0..12).map(|i| i as f64).collect();
        assert_eq!(id.mul_vec(&x), x);
        assert!((id.bilinear(&x, &x) - x.iter().map(|v| v * v).sum::<f64>()).abs() < 1e-12);
    }
}
