//! Sparse symmetric matrices, envelope LDL^T factorization with inertia, and
//! the eigensolvers used by the spectral routes.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Build from triplets; duplicates are summed in input order, so the
    /// result depends only on the order of `triplets`.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0; n_rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            debug_assert!(i < n_rows && j < n_cols);
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            indptr[i + 1] += indptr[i];
        }
        Self {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    /// Row-major `(row, col, value)` triplets.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n_cols, self.n_rows, t)
    }

    /// `sum_k alpha_k * A_k` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> Self {
        let (n, m) = (terms[0].1.n_rows, terms[0].1.n_cols);
        let mut t = Vec::new();
        for &(alpha, a) in terms {
            assert_eq!((a.n_rows, a.n_cols), (n, m));
            t.extend(a.triplets().map(|(i, j, v)| (i, j, alpha * v)));
        }
        Self::from_triplets(n, m, t)
    }

    pub fn symmetrized(&self) -> Self {
        let mut t: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, 0.5 * v)).collect();
        t.extend(self.triplets().map(|(i, j, v)| (j, i, 0.5 * v)));
        Self::from_triplets(self.n_rows, self.n_cols, t)
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.triplets()
            .fold(0.0, |m, (i, j, v)| m.max((v - self.get(j, i)).abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
        }
        d
    }

    /// Rows `rows` and columns `cols` (both in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.n_cols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut t = Vec::new();
        for (k, &r) in rows.iter().enumerate() {
            for (j, v) in self.row(r) {
                if col_map[j] != usize::MAX {
                    t.push((k, col_map[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), t)
    }

    /// Coordinate text: one `row col value` line per stored entry, row-major.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        for (i, j, v) in self.triplets() {
            writeln!(s, "{i} {j} {v:.17e}").unwrap();
        }
        s
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity graph.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n_rows;
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| j != v && !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; a.n_rows];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for (j, _) in a.row(v) {
            if level[j] == usize::MAX {
                level[j] = level[v] + 1;
                queue.push_back(j);
            }
        }
    }
    level
}

fn pseudo_peripheral(a: &CsrMatrix, seed: usize, degree: &[usize]) -> usize {
    let mut v = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(a, v);
        let far = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if far <= ecc && v != seed {
            break;
        }
        ecc = far;
        let next = (0..a.n_rows)
            .filter(|&i| level[i] == far)
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
        if next == v {
            break;
        }
        v = next;
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Envelope (profile) LDL^T factorization of a symmetric matrix under a
/// fill-reducing permutation, without pivoting.
#[derive(Clone, Debug)]
pub struct EnvelopeLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

/// Relative size below which a pivot counts as a breakdown.
const PIVOT_EPS: f64 = 1e-13;

impl EnvelopeLdl {
    /// Factor `a` (symmetric, both triangles stored) with RCM ordering.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = rcm_ordering(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.n_rows;
        let mut inv_perm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        let mut first = vec![0; n];
        for (i, f) in first.iter_mut().enumerate() {
            *f = a
                .row(perm[i])
                .map(|(j, _)| inv_perm[j])
                .filter(|&j| j <= i)
                .min()
                .unwrap_or(i);
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        let mut scale = vec![0.0f64; n];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let j = inv_perm[j];
                scale[i] = scale[i].max(v.abs());
                if j < i {
                    lower[start[i] + j - first[i]] += v;
                } else if j == i {
                    diag[i] += v;
                }
            }
        }
        // Row-oriented Crout. While row i is being computed it holds
        // w_j = L_ij d_j = a_ij - sum_{k<j} w_k L_jk; the conversion to L_ij
        // happens once the row is complete.
        for i in 0..n {
            let fi = first[i];
            let (head, row_i) = lower.split_at_mut(start[i]);
            let row_i = &mut row_i[..i - fi];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_j = &head[start[j]..start[j] + (j - fj)];
                let mut s = row_i[j - fi];
                for k in lo..j {
                    s -= row_i[k - fi] * row_j[k - fj];
                }
                row_i[j - fi] = s;
            }
            let mut di = diag[i];
            for j in fi..i {
                let w = row_i[j - fi];
                let l = w / diag[j];
                di -= w * l;
                row_i[j - fi] = l;
            }
            if !(di.abs() > PIVOT_EPS * scale[i].max(f64::MIN_POSITIVE)) {
                return Err(Error::Breakdown {
                    index: perm[i],
                    pivot: di,
                    scale: scale[i],
                });
            }
            diag[i] = di;
        }
        Ok(Self {
            perm,
            first,
            start,
            lower,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn inertia(&self) -> Inertia {
        let negative = self.diag.iter().filter(|&&d| d < 0.0).count();
        let positive = self.diag.iter().filter(|&&d| d > 0.0).count();
        Inertia {
            negative,
            zero: self.dim() - negative - positive,
            positive,
        }
    }

    pub fn pivots(&self) -> &[f64] {
        &self.diag
    }

    pub fn profile(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = row.iter().zip(&x[fi..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, l) in row.iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[self.perm[i]] = x[i];
        }
        out
    }
}

/// Sorted eigenpairs of the generalized problem `A y = lambda M y`.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// One column per eigenvalue, `M`-orthonormal.
    pub vectors: DMatrix<f64>,
}

/// Dense generalized symmetric-definite eigensolve via Cholesky reduction.
pub fn dense_generalized_eigen(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Eigenpairs> {
    let n = a.nrows();
    let chol = m.clone().cholesky().ok_or(Error::Breakdown {
        index: 0,
        pivot: f64::NAN,
        scale: m.amax(),
    })?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}
    let linv_a = l.solve_lower_triangular(a).expect("nonsingular Cholesky factor");
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .expect("nonsingular Cholesky factor");
    let c = 0.5 * (&c + c.transpose());
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let z = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let vectors = l
        .transpose()
        .solve_upper_triangular(&z)
        .expect("nonsingular Cholesky factor");
    Ok(Eigenpairs { values, vectors })
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Dot product in twice the working precision (compensated, with exact
/// products via fused multiply-add).
pub fn dot2(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (a, b) in terms {
        let p = a * b;
        let ep = a.mul_add(b, -p);
        let (t, e) = two_sum(s, p);
        s = t;
        c += e + ep;
    }
    s + c
}

/// `A x - lambda M x` evaluated with compensated row sums.
fn accurate_residual(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let ay: Vec<f64> = (0..a.n_rows).map(|i| dot2(a.row(i).map(|(j, v)| (v, y[j])))).collect();
    let r = (0..a.n_rows)
        .map(|i| {
            dot2(
                a.row(i)
                    .map(|(j, v)| (v, y[j]))
                    .chain(m.row(i).map(|(j, v)| (-lambda * v, y[j]))),
            )
        })
        .collect();
    (ay, r)
}

/// Rayleigh quotient `y.A y / y.M y` with compensated sums.
pub fn rayleigh_quotient(a: &CsrMatrix, m: &CsrMatrix, y: &[f64]) -> f64 {
    let num = dot2((0..a.n_rows).flat_map(|i| a.row(i).map(move |(j, v)| (v * y[i], y[j]))));
    let den = dot2((0..m.n_rows).flat_map(|i| m.row(i).map(move |(j, v)| (v * y[i], y[j]))));
    num / den
}

/// Relative residual `|A y - lambda M y| / |A y|` of one eigenpair.
pub fn relative_residual(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, y: &[f64]) -> f64 {
    let (ay, r) = accurate_residual(a, m, lambda, y);
    let num = r.iter().map(|p| p * p).sum::<f64>().sqrt();
    let den = ay.iter().map(|p| p * p).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub const RESIDUAL_TOL: f64 = 1e-8;
/// Normwise backward error accepted once the relative residual stops
/// improving (near-zero eigenvalues sit on the rounding floor of `A y`).
pub const BACKWARD_TOL: f64 = 1e-12;
const STAGNATION_ITERS: usize = 20;

fn inf_norm(a: &CsrMatrix) -> f64 {
    (0..a.n_rows)
        .map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `|A y - lambda M y| / ((|A| + |lambda| |M|) |y|)` in the infinity norm.
pub fn backward_error(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, y: &[f64]) -> f64 {
    let (_, r) = accurate_residual(a, m, lambda, y);
    let rn = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let yn = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    rn / ((inf_norm(a) + lambda.abs() * inf_norm(m)) * yn)
}
const MAX_SUBSPACE_ITERS: usize = 600;

/// The `k` smallest eigenpairs of `A y = lambda M y` by shift-invert block
/// subspace iteration. The shift is pushed below the spectrum until
/// `A - shift M` is positive definite, so every solve is with a definite
/// factorization.
pub fn subspace_lowest(a: &CsrMatrix, m: &CsrMatrix, k: usize) -> Result<Eigenpairs> {
    let n = a.n_rows;
    if k > n {
        return Err(Error::TooManyEigenpairs { k, m: n });
    }
    let mut shift = -1.0;
    let factor = loop {
        let shifted = CsrMatrix::linear_combination(&[(1.0, a), (-shift, m)]);
        match EnvelopeLdl::factor(&shifted) {
            Ok(f) if f.inertia().negative == 0 => break f,
            _ => shift *= 2.0,
        }
        if shift < -1e12 {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
    };
    let p = (2 * k).max(k + 10).min(n);
    let mut x = DMatrix::from_fn(n, p, |i, c| {
        let s = ((i as f64 + 1.0) * 12.9898 + (c as f64 + 1.0) * 78.233).sin() * 43758.5453;
        s - s.floor() - 0.5
    });
    let mut worst = f64::INFINITY;
    let (mut best, mut since_best) = (f64::INFINITY, 0);
    for _ in 0..MAX_SUBSPACE_ITERS {
        let mut y = DMatrix::zeros(n, p);
        for c in 0..p {
            let mx = m.mul_vec(x.column(c).as_slice());
            let sol = factor.solve(&mx);
            y.set_column(c, &DVector::from_vec(sol));
        }
        m_orthonormalize(&mut y, m);
        let ay = apply_columns(a, &y);
        let proj = y.transpose() * &ay;
        let proj = 0.5 * (&proj + proj.transpose());
        let eig = proj.symmetric_eigen();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let rot = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        x = &y * rot;
        let mut values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        for (c, v) in values.iter_mut().enumerate().take(k) {
            *v = rayleigh_quotient(a, m, x.column(c).as_slice());
        }
        worst = (0..k)
            .map(|c| relative_residual(a, m, values[c], x.column(c).as_slice()))
            .fold(0.0, f64::max);
        if worst < 0.9 * best {
            best = worst;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let stagnated = since_best >= STAGNATION_ITERS
            && (0..k).all(|c| backward_error(a, m, values[c], x.column(c).as_slice()) <= BACKWARD_TOL);
        if worst <= RESIDUAL_TOL || stagnated {
            let vectors = x.columns(0, k).into_owned();
            return Ok(Eigenpairs {
                values: values[..k].to_vec(),
                vectors,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_SUBSPACE_ITERS,
        residual: worst,
    })
}

fn apply_columns(a: &CsrMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.n_rows, x.ncols());
    for c in 0..x.ncols() {
        out.set_column(c, &DVector::from_vec(a.mul_vec(x.column(c).as_slice())));
    }
    out
}

/// Modified Gram-Schmidt in the `M` inner product, two passes.
fn m_orthonormalize(x: &mut DMatrix<f64>, m: &CsrMatrix) {
    for _ in 0..2 {
        for c in 0..x.ncols() {
            for prev in 0..c {
                let mp = m.mul_vec(x.column(prev).as_slice());
                let proj: f64 = mp.iter().zip(x.column(c).iter()).map(|(a, b)| a * b).sum();
                let pc = x.column(prev).into_owned();
                let mut col = x.column_mut(c);
                col.axpy(-proj, &pc, 1.0);
            }
            let mc = m.mul_vec(x.column(c).as_slice());
            let norm: f64 = mc
                .iter()
                .zip(x.column(c).iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .sqrt();
            x.column_mut(c).scale_mut(1.0 / norm);
        }
    }
}

/// Inertia of a dense symmetric matrix from its eigenvalues.
pub fn dense_inertia(a: &DMatrix<f64>, tol: f64) -> Inertia {
    let eig = a.clone().symmetric_eigenvalues();
    Inertia {
        negative: eig.iter().filter(|&&l| l < -tol).count(),
        zero: eig.iter().filter(|&&l| l.abs() <= tol).count(),
        positive: eig.iter().filter(|&&l| l > tol).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 - shift));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.to_coordinate_text().lines().count(), 2);
    }

    #[test]
    fn ldl_inertia_matches_eigenvalues() {
        // eigenvalues of the path Laplacian are 2 - 2 cos(k pi / (n + 1))
        let n = 40;
        let shift = 0.5;
        let a = laplacian_1d(n, shift);
        let f = EnvelopeLdl::factor(&a).unwrap();
        let expected = (1..=n)
            .filter(|&k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() < shift)
            .count();
        assert_eq!(f.inertia().negative, expected);
        assert_eq!(f.inertia(), dense_inertia(&a.to_dense(), 1e-12));
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        let r = a.mul_vec(&x);
        for (p, q) in r.iter().zip(&b) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn ldl_reports_breakdown() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0)]);
        assert!(matches!(EnvelopeLdl::factor(&a), Err(Error::Breakdown { .. })));
    }

    #[test]
    fn subspace_matches_dense() {
        let n = 60;
        let a = laplacian_1d(n, 0.0);
        let mut mt = Vec::new();
        for i in 0..n {
            mt.push((i, i, 1.0 + 0.01 * i as f64));
        }
        let m = CsrMatrix::from_triplets(n, n, mt);
        let dense = dense_generalized_eigen(&a.to_dense(), &m.to_dense()).unwrap();
        let sub = subspace_lowest(&a, &m, 5).unwrap();
        for k in 0..5 {
            assert!((dense.values[k] - sub.values[k]).abs() < 1e-10 * dense.values[k].abs().max(1.0));
        }
    }
}
