//! Factorizations and dense symmetric (generalized) eigensolvers.
//!
//! The main eigenvalue path is Householder tridiagonalization followed by
//! implicit-shift QL. A cyclic Jacobi solver is kept as an independent
//! cross-check.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dense::{dot, Mat};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Default threshold below which a pencil eigenvalue counts as zero.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-4;

/// Eigenvalues in ascending order, with eigenvectors when requested.
pub type EigenPairs = (Vec<f64>, Option<Vec<Vec<f64>>>);

/// Which eigenproblem a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Generic,
    /// `B A_div^{-1} B^T p = lambda M_Q p`.
    BrezziInfSup,
    /// Constrained coercivity pencil on the discrete kernel.
    Coercivity,
    /// Full coupled pencil for the Babuska constant.
    Babuska,
    /// `B A_1^{-1} B^T p = lambda M_Q p`.
    StokesInfSup,
    /// `B M_V^{-1} B^T p = mu M_Q p`.
    MixedLaplace,
    /// `K u = mu M_V u`.
    DivDiv,
}

/// Ascending eigenvalues of a symmetric pencil, optionally with eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// `vectors[i]` belongs to `values[i]`.
    pub vectors: Option<Vec<Vec<f64>>>,
    pub problem: Problem,
    pub threshold: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    /// Number of eigenvalues strictly below `threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        self.values.partition_point(|&v| v < threshold)
    }

    /// Smallest eigenvalue not below `threshold`.
    pub fn smallest_at_least(&self, threshold: f64) -> Option<f64> {
        self.values.get(self.count_below(threshold)).copied()
    }

    /// Smallest eigenvalue in modulus.
    pub fn min_abs(&self) -> Option<f64> {
        self.values.iter().map(|v| v.abs()).min_by(f64::total_cmp)
    }

    pub fn with_problem(mut self, problem: Problem, threshold: f64) -> Self {
        self.problem = problem;
        self.threshold = threshold;
        self
    }
}

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern.
/// Returns `perm` with `perm[old] = new`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(|v| v.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, visited: &[bool]| -> (usize, usize) {
        // (eccentricity, a min-degree node in the last level)
        let mut level = vec![usize::MAX; n];
        level[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            if level[v] > level[last] || (level[v] == level[last] && degree[v] < degree[last]) {
                last = v;
            }
            for &w in &adj[v] {
                if !visited[w] && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (level[last], last)
    };

    while order.len() < n {
        let seed = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree[v], v)).unwrap();
        // pseudo-peripheral start node
        let mut start = seed;
        let (mut ecc, mut far) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let (e2, f2) = bfs_levels(far, &visited);
            if e2 <= ecc {
                break;
            }
            start = far;
            ecc = e2;
            far = f2;
        }
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    let mut perm = vec![0; n];
    for (new, &old) in order.iter().rev().enumerate() {
        perm[old] = new;
    }
    perm
}

/// Envelope (skyline) Cholesky factor `P A P^T = L L^T` of a sparse SPD matrix.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[old] = new`.
    perm: Vec<usize>,
    /// First stored column of each (permuted) row.
    first: Vec<usize>,
    /// Offset of row `i`'s segment `[first[i], i]` in `data`.
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl SparseCholesky {
    /// Factors `a` after a reverse Cuthill-McKee reordering.
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        SparseCholesky::factor_with_permutation(a, perm)
    }

    /// Factors `a` in its given ordering.
    pub fn factor_natural(a: &SparseMatrix) -> Result<Self> {
        SparseCholesky::factor_with_permutation(a, (0..a.nrows()).collect())
    }

    fn factor_with_permutation(a: &SparseMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("Cholesky of {}x{} matrix", n, a.ncols())));
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (perm[i], perm[j]);
            if pj < pi {
                first[pi] = first[pi].min(pj);
            }
        }
        let mut offset = vec![0; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (perm[i], perm[j]);
            if pj <= pi {
                data[offset[pi] + pj - first[pi]] = v;
            }
        }
        let mut inv_perm = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            inv_perm[new] = old;
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let s = {
                    let ri = &data[offset[i] + k0 - fi..offset[i] + j - fi];
                    let rj = &data[offset[j] + k0 - fj..offset[j] + j - fj];
                    dot(ri, rj)
                };
                let ljj = data[offset[j + 1] - 1];
                let idx = offset[i] + j - fi;
                data[idx] = (data[idx] - s) / ljj;
            }
            let row = &data[offset[i]..offset[i + 1] - 1];
            let d = data[offset[i + 1] - 1] - dot(row, row);
            if d.is_nan() || d <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: inv_perm[i], value: d });
            }
            data[offset[i + 1] - 1] = d.sqrt();
        }
        Ok(SparseCholesky { n, perm, first, offset, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// `perm[old] = new`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    fn diag(&self, i: usize) -> f64 {
        self.data[self.offset[i + 1] - 1]
    }

    /// Solves `L y = b` in permuted numbering, in place.
    pub fn forward_permuted(&self, y: &mut [f64]) {
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1] - 1];
            let s = dot(row, &y[fi..i]);
            y[i] = (y[i] - s) / self.diag(i);
        }
    }

    /// Solves `L^T x = y` in permuted numbering, in place.
    pub fn backward_permuted(&self, x: &mut [f64]) {
        for i in (0..self.n).rev() {
            x[i] /= self.diag(i);
            let xi = x[i];
            if xi != 0.0 {
                let fi = self.first[i];
                let row = &self.data[self.offset[i]..self.offset[i + 1] - 1];
                for (xk, l) in x[fi..i].iter_mut().zip(row) {
                    *xk -= l * xi;
                }
            }
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (old, &new) in self.perm.iter().enumerate() {
            y[new] = b[old];
        }
        self.forward_permuted(&mut y);
        self.backward_permuted(&mut y);
        self.perm.iter().map(|&new| y[new]).collect()
    }

    /// Dense lower factor `L` in the original numbering, i.e. `A = L L^T`
    /// with `L = P^T L_perm`.
    pub fn lower_dense(&self) -> Mat {
        let mut inv = vec![0; self.n];
        for (old, &new) in self.perm.iter().enumerate() {
            inv[new] = old;
        }
        let mut l = Mat::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in self.first[i]..=i {
                l[(inv[i], j)] = self.data[self.offset[i] + j - self.first[i]];
            }
        }
        l
    }
}

/// Factors a sparse SPD matrix (see [`SparseCholesky`]).
pub fn cholesky(m: &SparseMatrix) -> Result<SparseCholesky> {
    SparseCholesky::factor(m)
}

const MAX_QL_ITERATIONS: usize = 60;

/// Eigen-decomposition of a dense symmetric matrix by Householder
/// tridiagonalization and implicit QL. Eigenvalues ascending.
pub fn symmetric_eigen(a: &Mat, want_vectors: bool) -> Result<EigenPairs> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!("eigen of {}x{} matrix", n, a.cols())));
    }
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(Vec::new)));
    }
    // Column-major working copy: v[col * n + row]. The input is symmetric so
    // its row-major buffer doubles as the column-major one.
    let mut v = a.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e, want_vectors);
    tql2(n, &mut v, &mut d, &mut e, want_vectors)?;

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = idx.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| idx.iter().map(|&i| v[i * n..(i + 1) * n].to_vec()).collect());
    Ok((values, vectors))
}

#[inline]
fn at(n: usize, row: usize, col: usize) -> usize {
    col * n + row
}

// Householder reduction (tred2), with V stored column-major.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = 0.0;
                v[at(n, j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                f = d[j];
                v[at(n, j, i)] = f;
                let col = &v[j * n..j * n + i];
                g = e[j] + col[j] * f;
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut v[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..n - 1 {
            v[at(n, n - 1, i)] = v[at(n, i, i)];
            v[at(n, i, i)] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v[at(n, k, i + 1)] / h;
                }
                let (head, tail) = v.split_at_mut((i + 1) * n);
                let ucol = &tail[..=i];
                for j in 0..=i {
                    let col = &mut head[j * n..j * n + i + 1];
                    let g = dot(ucol, col);
                    for k in 0..=i {
                        col[k] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v[at(n, k, i + 1)] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[at(n, n - 1, j)];
            v[at(n, n - 1, j)] = 0.0;
        }
        v[at(n, n - 1, n - 1)] = 1.0;
    } else {
        for j in 0..n {
            d[j] = v[at(n, j, j)];
        }
    }
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), accumulating into V when requested.
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { index: l, iterations: MAX_QL_ITERATIONS });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if accumulate {
                        let (left, right) = v.split_at_mut((i + 1) * n);
                        let ci = &mut left[i * n..];
                        let ci1 = &mut right[..n];
                        for (a, b) in ci.iter_mut().zip(ci1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Cyclic Jacobi eigensolver for dense symmetric matrices. Slow, simple,
/// and independent of the tridiagonal path.
pub fn jacobi_eigen(a: &Mat, want_vectors: bool) -> Result<EigenPairs> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!("eigen of {}x{} matrix", n, a.cols())));
    }
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let fro = m.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut prev_off = f64::INFINITY;
    for sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].powi(2))
            .sum::<f64>()
            .sqrt();
        // stop at roundoff level, or once sweeps stop making progress near it
        if off <= f64::EPSILON * fro || (off >= prev_off && off <= 1e-12 * fro) {
            break;
        }
        prev_off = off;
        if sweep == 99 {
            return Err(Error::NoConvergence { index: 0, iterations: 100 });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                if want_vectors {
                    for k in 0..n {
                        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = idx.iter().map(|&i| m[(i, i)]).collect();
    let vectors = want_vectors.then(|| idx.iter().map(|&i| (0..n).map(|k| v[(k, i)]).collect()).collect());
    Ok((values, vectors))
}

/// Independent generalized solver: `M^{-1/2} S M^{-1/2}` through two Jacobi
/// decompositions (no Cholesky, no tridiagonalization).
pub fn jacobi_generalized_eigenvalues(s: &Mat, m: &Mat) -> Result<Vec<f64>> {
    let n = s.rows();
    let (mvals, mvecs) = jacobi_eigen(m, true)?;
    let mvecs = mvecs.unwrap();
    if let Some((i, &v)) = mvals.iter().enumerate().find(|(_, &v)| v <= 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: i, value: v });
    }
    // W = Q diag(1/sqrt(mu)) Q^T
    let w = Mat::from_fn(n, n, |i, j| {
        (0..n).map(|k| mvecs[k][i] * mvecs[k][j] / mvals[k].sqrt()).sum()
    });
    let mut c = w.matmul(s).matmul(&w);
    c.symmetrize();
    Ok(jacobi_eigen(&c, false)?.0)
}

/// Generalized problem `S x = lambda M x` with a pre-factored SPD `M`.
pub fn sym_generalized_eig_factored(
    s: &Mat,
    m: &SparseCholesky,
    want_vectors: bool,
) -> Result<Spectrum> {
    let n = s.rows();
    if s.cols() != n || m.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "pencil of {}x{} and {}x{}",
            n,
            s.cols(),
            m.dim(),
            m.dim()
        )));
    }
    let perm = m.permutation();
    // Permuted S: Sp[perm[i], perm[j]] = S[i, j]
    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        let pi = perm[i];
        for (j, &sij) in s.row(i).iter().enumerate() {
            w[(pi, perm[j])] = sij;
        }
    }
    // C = L^{-1} Sp L^{-T}: two passes of forward solves on rows (Sp symmetric).
    for pass in 0..2 {
        let mut t = w.transpose();
        for i in 0..n {
            m.forward_permuted(t.row_mut(i));
        }
        w = t;
        if pass == 1 {
            w.symmetrize();
        }
    }
    let (values, y) = symmetric_eigen(&w, want_vectors)?;
    let vectors = y.map(|ys| {
        ys.into_iter()
            .map(|mut yv| {
                m.backward_permuted(&mut yv);
                perm.iter().map(|&p| yv[p]).collect()
            })
            .collect()
    });
    Ok(Spectrum { values, vectors, problem: Problem::Generic, threshold: DEFAULT_ZERO_THRESHOLD })
}

/// Full spectrum of `S x = lambda M x` for symmetric `S` and SPD `M`.
pub fn sym_generalized_eig(s: &Mat, m: &SparseMatrix, want_vectors: bool) -> Result<Spectrum> {
    if s.rows() != m.nrows() {
        return Err(Error::DimensionMismatch(format!("pencil of {} and {}", s.rows(), m.nrows())));
    }
    let f = SparseCholesky::factor(m)?;
    sym_generalized_eig_factored(s, &f, want_vectors)
}

/// Weighting of the velocity norm in a Schur complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchurScale {
    /// H(div) Gram matrix.
    Adiv,
    /// L2 mass.
    MV,
}

/// Dense `B A^{-1} B^T` from one factorization of `A` and one solve per row of `B`.
pub fn schur_complement(b: &SparseMatrix, a: &SparseMatrix) -> Result<Mat> {
    if b.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "B is {}x{}, A is {}x{}",
            b.nrows(),
            b.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let f = SparseCholesky::factor(a)?;
    Ok(schur_complement_factored(b, &f))
}

pub fn schur_complement_factored(b: &SparseMatrix, a: &SparseCholesky) -> Mat {
    let m = b.nrows();
    let n = b.ncols();
    let perm = a.permutation();
    let mut s = Mat::zeros(m, m);
    let mut x = vec![0.0; n];
    for q in 0..m {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (j, v) in b.row(q) {
            x[perm[j]] = v;
        }
        a.forward_permuted(&mut x);
        a.backward_permuted(&mut x);
        let row = s.row_mut(q);
        for (p, out) in row.iter_mut().enumerate() {
            *out = b.row(p).map(|(j, v)| v * x[perm[j]]).sum();
        }
    }
    s.symmetrize();
    s
}

/// Residual `max_i ||S x_i - lambda_i M x_i|| / ||S||_max` over returned pairs.
pub fn max_residual(s: &Mat, m: &SparseMatrix, spectrum: &Spectrum) -> Option<f64> {
    let vecs = spectrum.vectors.as_ref()?;
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    Some(
        spectrum
            .values
            .iter()
            .zip(vecs)
            .map(|(&lam, x)| {
                let sx = s.mul_vec(x);
                let mx = m.mul_vec(x);
                let r: f64 = sx.iter().zip(&mx).map(|(a, b)| (a - lam * b).powi(2)).sum();
                r.sqrt() / (scale * crate::dense::norm(x).max(f64::MIN_POSITIVE))
            })
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut impl Rng) -> Mat {
        let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut m = g.transpose().matmul(&g);
        for i in 0..n {
            m[(i, i)] += n as f64 * 0.1;
        }
        m
    }

    fn random_sym(n: usize, rng: &mut impl Rng) -> Mat {
        let mut m = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        m.symmetrize();
        m
    }

    #[test]
    fn cholesky_small_cases() {
        let f = SparseCholesky::factor_natural(&SparseMatrix::identity(4)).unwrap();
        assert_eq!(f.lower_dense(), Mat::identity(4));
        let l = cholesky(&SparseMatrix::identity(4)).unwrap().lower_dense();
        assert_eq!(l.matmul(&l.transpose()), Mat::identity(4));
        let a = SparseMatrix::from_dense(&Mat::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]), true);
        let l = SparseCholesky::factor_natural(&a).unwrap().lower_dense();
        let expect = Mat::from_rows(&[vec![2.0, 0.0], vec![1.0, 2f64.sqrt()]]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((l[(i, j)] - expect[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cholesky_reports_pivot() {
        let a = SparseMatrix::from_dense(
            &Mat::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]]),
            true,
        );
        match SparseCholesky::factor_natural(&a) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 2),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_reconstructs_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_spd(25, &mut rng);
        let f = cholesky(&SparseMatrix::from_dense(&a, true)).unwrap();
        let l = f.lower_dense();
        let back = l.matmul(&l.transpose());
        for i in 0..25 {
            for j in 0..25 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-12 * a.max_abs());
            }
        }
        let x: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let y = f.solve(&a.mul_vec(&x));
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn standard_eigen_small() {
        let (v, _) = symmetric_eigen(&Mat::from_rows(&[vec![0.0, 0.0], vec![0.0, 2.0]]), false).unwrap();
        assert_eq!(v, vec![0.0, 2.0]);
        let s = sym_generalized_eig(
            &Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]),
            &SparseMatrix::identity(2),
            false,
        )
        .unwrap();
        assert_eq!(s.values, vec![0.0, 2.0]);
    }

    #[test]
    fn s_equal_m_gives_unit_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_spd(20, &mut rng);
        let sp = sym_generalized_eig(&m, &SparseMatrix::from_dense(&m, true), false).unwrap();
        for v in sp.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_path_matches_jacobi_with_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1, 2, 5, 17, 40] {
            let a = random_sym(n, &mut rng);
            let (v1, vecs) = symmetric_eigen(&a, true).unwrap();
            let (v2, _) = jacobi_eigen(&a, false).unwrap();
            let (v3, _) = symmetric_eigen(&a, false).unwrap();
            for i in 0..n {
                assert!((v1[i] - v2[i]).abs() < 1e-12);
                assert!((v1[i] - v3[i]).abs() < 1e-12);
            }
            for (lam, x) in v1.iter().zip(vecs.unwrap()) {
                let ax = a.mul_vec(&x);
                let r: f64 = ax.iter().zip(&x).map(|(p, q)| (p - lam * q).powi(2)).sum();
                assert!(r.sqrt() < 1e-12);
                assert!((crate::dense::norm(&x) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generalized_residuals_and_jacobi_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = random_sym(30, &mut rng);
        let m = random_spd(30, &mut rng);
        let msp = SparseMatrix::from_dense(&m, true);
        let eig = sym_generalized_eig(&s, &msp, true).unwrap();
        let oracle = jacobi_generalized_eigenvalues(&s, &m).unwrap();
        for (a, b) in eig.values.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!(max_residual(&s, &msp, &eig).unwrap() < 1e-9);
    }

    #[test]
    fn schur_trivial_cases() {
        let b = SparseMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)], false);
        let s = schur_complement(&b, &SparseMatrix::identity(3)).unwrap();
        let bbt = b.to_dense().matmul(&b.to_dense().transpose());
        assert_eq!(s, bbt);
        let zero = SparseMatrix::from_triplets(2, 3, vec![], false);
        assert_eq!(schur_complement(&zero, &SparseMatrix::identity(3)).unwrap(), Mat::zeros(2, 2));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(12, &mut rng);
        let mut p = reverse_cuthill_mckee(&SparseMatrix::from_dense(&a, true));
        p.sort_unstable();
        assert_eq!(p, (0..12).collect::<Vec<_>>());
    }
}
