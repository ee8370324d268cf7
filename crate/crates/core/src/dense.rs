//! Row-major dense matrices.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a != 0.0 {
                    let src = other.row(k);
                    for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                        *o += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Replaces the matrix by `(A + A^T)/2`.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// LU factorization with partial pivoting, for general square systems.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Mat,
    piv: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Mat) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch(format!("LU of {}x{} matrix", n, a.cols())));
        }
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| lu[(x, k)].abs().total_cmp(&lu[(y, k)].abs()))
                .unwrap();
            if lu[(p, k)].abs() <= 1e-14 * scale {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                piv.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Lu { lu, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

/// Orthonormal basis of the null space of `rows` (each entry one row of a
/// k x m matrix), via Householder QR with column pivoting of its transpose.
/// Columns whose remaining norm falls below `rel_tol` times the largest
/// initial norm are treated as dependent. Returns `(rank, basis)`.
pub fn null_space(rows: &[Vec<f64>], m: usize, rel_tol: f64) -> (usize, Vec<Vec<f64>>) {
    let mut cols: Vec<Vec<f64>> = rows.to_vec();
    let k = cols.len();
    let initial = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut reflectors: Vec<Vec<f64>> = Vec::new();
    let mut rank = 0;
    for step in 0..k.min(m) {
        // pivot: remaining column with the largest trailing norm
        let (piv, pnorm) = (step..k)
            .map(|j| (j, norm(&cols[j][step..])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pnorm <= rel_tol * initial || pnorm == 0.0 {
            break;
        }
        cols.swap(step, piv);
        let x = &cols[step][step..];
        let alpha = if x[0] > 0.0 { -pnorm } else { pnorm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vn = norm(&v);
        v.iter_mut().for_each(|t| *t /= vn);
        for col in cols.iter_mut().skip(step) {
            let tail = &mut col[step..];
            let f = 2.0 * dot(&v, tail);
            for (t, vi) in tail.iter_mut().zip(&v) {
                *t -= f * vi;
            }
        }
        reflectors.push(v);
        rank += 1;
    }
    let basis = (rank..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            for (step, v) in reflectors.iter().enumerate().rev() {
                let tail = &mut e[step..];
                let f = 2.0 * dot(v, tail);
                for (t, vi) in tail.iter_mut().zip(v) {
                    *t -= f * vi;
                }
            }
            e
        })
        .collect();
    (rank, basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_permuted_system() {
        let a = Mat::from_rows(&[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]);
        let lu = Lu::factor(&a).unwrap();
        let x = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let y = lu.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!(Lu::factor(&Mat::zeros(2, 2)).is_err());
    }

    #[test]
    fn null_space_of_rank_deficient_rows() {
        // third row is the sum of the first two
        let rows = vec![vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 1.0, 1.0]];
        let (rank, basis) = null_space(&rows, 4, 1e-12);
        assert_eq!(rank, 2);
        assert_eq!(basis.len(), 2);
        for z in &basis {
            assert!((norm(z) - 1.0).abs() < 1e-14);
            for r in &rows {
                assert!(dot(r, z).abs() < 1e-14);
            }
        }
        assert!(dot(&basis[0], &basis[1]).abs() < 1e-14);
    }

    #[test]
    fn matmul_identity() {
        let a = Mat::from_fn(3, 4, |i, j| (i * 4 + j) as f64);
        assert_eq!(Mat::identity(3).matmul(&a), a);
        assert_eq!(a.transpose().transpose(), a);
    }
}
