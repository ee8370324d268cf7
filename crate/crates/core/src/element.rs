//! Reference-triangle Lagrange bases and collapsed Gauss quadrature.
//!
//! The reference triangle has vertices (0,0), (1,0), (0,1). Nodal bases use
//! the equispaced lattice ordered vertices first, then edge nodes (edge `k`
//! is opposite vertex `k` and runs from vertex `k+1` to vertex `k+2`), then
//! interior nodes.

use crate::error::{Error, Result};

pub const MAX_LAGRANGE_DEGREE: usize = 6;
pub const MAX_QUADRATURE_DEGREE: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    ScalarLagrange,
    VectorLagrange,
    DiscontinuousScalar,
}

/// Number of degree-`r` polynomials in two variables.
pub fn poly_dim(r: usize) -> usize {
    (r + 1) * (r + 2) / 2
}

/// Nodal basis on the reference triangle.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    degree: usize,
    kind: ElementKind,
    /// Barycentric multi-indices `(a0, a1, a2)` with `a0 + a1 + a2 = degree`.
    indices: Vec<[usize; 3]>,
    nodes: Vec<[f64; 2]>,
}

impl ReferenceElement {
    pub fn new(kind: ElementKind, degree: usize) -> Result<Self> {
        let ok = match kind {
            ElementKind::ScalarLagrange | ElementKind::VectorLagrange => {
                (1..=MAX_LAGRANGE_DEGREE).contains(&degree)
            }
            ElementKind::DiscontinuousScalar => degree <= MAX_LAGRANGE_DEGREE,
        };
        if !ok {
            return Err(Error::UnsupportedDegree { what: "reference element", degree });
        }
        let indices = lattice(degree);
        let nodes = if degree == 0 {
            vec![[1.0 / 3.0, 1.0 / 3.0]]
        } else {
            indices
                .iter()
                .map(|a| [a[1] as f64 / degree as f64, a[2] as f64 / degree as f64])
                .collect()
        };
        Ok(ReferenceElement { degree, kind, indices, nodes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    /// Scalar basis functions per cell.
    pub fn num_basis(&self) -> usize {
        self.indices.len()
    }

    pub fn num_components(&self) -> usize {
        match self.kind {
            ElementKind::VectorLagrange => 2,
            _ => 1,
        }
    }

    /// Local degrees of freedom per cell (components included).
    pub fn dim(&self) -> usize {
        self.num_basis() * self.num_components()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Values and reference gradients of every scalar basis function at `p`.
    pub fn eval(&self, p: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let nb = self.num_basis();
        let mut values = vec![0.0; nb];
        let mut grads = vec![[0.0; 2]; nb];
        self.eval_into(p, &mut values, &mut grads);
        (values, grads)
    }

    pub fn eval_into(&self, p: [f64; 2], values: &mut [f64], grads: &mut [[f64; 2]]) {
        let r = self.degree;
        if r == 0 {
            values[0] = 1.0;
            grads[0] = [0.0, 0.0];
            return;
        }
        let lam = [1.0 - p[0] - p[1], p[0], p[1]];
        const DLAM: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        // factor[k][m] = prod_{j<m} (r*lam_k - j)/(j+1) and its derivative in lam_k
        let mut factor = [[0.0; MAX_LAGRANGE_DEGREE + 1]; 3];
        let mut dfactor = [[0.0; MAX_LAGRANGE_DEGREE + 1]; 3];
        for k in 0..3 {
            factor[k][0] = 1.0;
            dfactor[k][0] = 0.0;
            for m in 1..=r {
                let j = (m - 1) as f64;
                let t = (r as f64 * lam[k] - j) / (j + 1.0);
                let dt = r as f64 / (j + 1.0);
                factor[k][m] = factor[k][m - 1] * t;
                dfactor[k][m] = dfactor[k][m - 1] * t + factor[k][m - 1] * dt;
            }
        }
        for (i, a) in self.indices.iter().enumerate() {
            let f = [factor[0][a[0]], factor[1][a[1]], factor[2][a[2]]];
            let df = [dfactor[0][a[0]], dfactor[1][a[1]], dfactor[2][a[2]]];
            values[i] = f[0] * f[1] * f[2];
            let dl = [df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]];
            grads[i] = [
                dl[0] * DLAM[0][0] + dl[1] * DLAM[1][0] + dl[2] * DLAM[2][0],
                dl[0] * DLAM[0][1] + dl[1] * DLAM[1][1] + dl[2] * DLAM[2][1],
            ];
        }
    }

    /// Values and gradients at every point of a quadrature rule.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        let nb = self.num_basis();
        let mut values = vec![0.0; points.len() * nb];
        let mut grads = vec![[0.0; 2]; points.len() * nb];
        for (q, &p) in points.iter().enumerate() {
            self.eval_into(p, &mut values[q * nb..(q + 1) * nb], &mut grads[q * nb..(q + 1) * nb]);
        }
        Tabulation { num_basis: nb, values, grads }
    }
}

/// Basis values and reference gradients at a list of points, point-major.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub num_basis: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.num_basis..(q + 1) * self.num_basis]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.num_basis..(q + 1) * self.num_basis]
    }
}

/// Barycentric lattice of degree `r` in element node order.
fn lattice(r: usize) -> Vec<[usize; 3]> {
    if r == 0 {
        return vec![[0, 0, 0]];
    }
    let mut out = vec![[r, 0, 0], [0, r, 0], [0, 0, r]];
    for k in 0..3 {
        let (from, to) = ((k + 1) % 3, (k + 2) % 3);
        for t in 1..r {
            let mut a = [0; 3];
            a[from] = r - t;
            a[to] = t;
            out.push(a);
        }
    }
    for a2 in 1..r {
        for a1 in 1..r {
            if a1 + a2 < r {
                out.push([r - a1 - a2, a1, a2]);
            }
        }
    }
    out
}

/// Values and reference gradients of the degree-`r` scalar Lagrange basis.
pub fn lagrange_basis(r: usize, point: [f64; 2]) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    Ok(ReferenceElement::new(ElementKind::ScalarLagrange, r)?.eval(point))
}

/// Values of the degree-`r` cellwise (discontinuous) basis.
pub fn dg_basis(r: usize, point: [f64; 2]) -> Result<Vec<f64>> {
    if r > MAX_LAGRANGE_DEGREE - 1 {
        return Err(Error::UnsupportedDegree { what: "discontinuous basis", degree: r });
    }
    Ok(ReferenceElement::new(ElementKind::DiscontinuousScalar, r)?.eval(point).0)
}

/// Quadrature rule on the reference triangle.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub degree: usize,
    /// Points in reference coordinates.
    pub points: Vec<[f64; 2]>,
    /// Weights summing to the reference area 1/2.
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Barycentric coordinates of the points.
    pub fn barycentric(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| [1.0 - p[0] - p[1], p[0], p[1]]).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_m.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..m {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = m as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Collapsed tensor Gauss rule exact for polynomials of total degree `d`.
pub fn quadrature(d: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_QUADRATURE_DEGREE).contains(&d) {
        return Err(Error::UnsupportedDegree { what: "quadrature", degree: d });
    }
    // The Duffy Jacobian adds one degree in the collapsed direction.
    let m = (d + 3) / 2;
    let (x, w) = gauss_legendre(m);
    let mut points = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    for (&eta, &weta) in x.iter().zip(&w) {
        for (&xi, &wxi) in x.iter().zip(&w) {
            points.push([xi * (1.0 - eta), eta]);
            weights.push(wxi * weta * (1.0 - eta));
        }
    }
    Ok(QuadratureRule { degree: d, points, weights })
}
