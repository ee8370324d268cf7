//! Mixed source problem, error norms and convergence studies.
//!
//! Model problem on the unit square:
//! `p = sin(2 pi x) sin(2 pi y)`, `u = grad p`, `g = div u = -8 pi^2 p`.
//! Data and exact solutions enter through degree-6 nodal interpolants.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{discretize, AssembledForms, CellMap, FunctionSpace};
use crate::dense::{dot, norm};
use crate::eigensolve::SparseCholesky;
use crate::element::{quadrature, Tabulation, MAX_QUADRATURE_DEGREE};
use crate::error::{Error, Result};
use crate::mesh::{generate, Family, Triangulation};

/// Degree of the interpolants standing in for data and exact solutions.
pub const INTERPOLANT_DEGREE: usize = 6;

/// Relative residual demanded of the constraint equation `B u = G`.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Coefficient vector of a finite element function.
#[derive(Debug, Clone)]
pub struct FieldCoefficients {
    pub space: FunctionSpace,
    pub coeffs: Vec<f64>,
}

impl FieldCoefficients {
    pub fn new(space: FunctionSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a space of dimension {}",
                coeffs.len(),
                space.dim()
            )));
        }
        Ok(FieldCoefficients { space, coeffs })
    }

    pub fn zeros(space: FunctionSpace) -> Self {
        let coeffs = vec![0.0; space.dim()];
        FieldCoefficients { space, coeffs }
    }

    /// Values on cell `c` at the tabulated points, one `[f64; 2]` per point
    /// (second entry zero for scalar fields).
    pub fn cell_values(&self, c: usize, tab: &Tabulation) -> Vec<[f64; 2]> {
        let nc = self.space.num_components();
        let nodes = self.space.cell_nodes(c);
        let npts = tab.values.len() / tab.num_basis;
        (0..npts)
            .map(|q| {
                let mut v = [0.0; 2];
                for (phi, &node) in tab.values_at(q).iter().zip(nodes) {
                    for (k, vk) in v.iter_mut().enumerate().take(nc) {
                        *vk += phi * self.coeffs[nc * node + k];
                    }
                }
                v
            })
            .collect()
    }

    /// Divergence of a vector field on cell `c` at the tabulated points.
    pub fn cell_divergence(&self, c: usize, tab: &Tabulation, map: &CellMap) -> Vec<f64> {
        let nodes = self.space.cell_nodes(c);
        let npts = tab.values.len() / tab.num_basis;
        (0..npts)
            .map(|q| {
                tab.grads_at(q)
                    .iter()
                    .zip(nodes)
                    .map(|(&g, &node)| {
                        let d = map.grad(g);
                        d[0] * self.coeffs[2 * node] + d[1] * self.coeffs[2 * node + 1]
                    })
                    .sum()
            })
            .collect()
    }

    /// Point evaluation inside cell `c` at reference coordinates `xi`.
    pub fn eval_in_cell(&self, c: usize, xi: [f64; 2]) -> [f64; 2] {
        let tab = self.space.element().tabulate(&[xi]);
        self.cell_values(c, &tab)[0]
    }
}

/// Nodal interpolant of a scalar field on a continuous or discontinuous space.
pub fn interpolate_scalar(space: &FunctionSpace, f: impl Fn([f64; 2]) -> f64) -> FieldCoefficients {
    assert_eq!(space.num_components(), 1);
    let coeffs = space.node_coords().iter().map(|&x| f(x)).collect();
    FieldCoefficients { space: space.clone(), coeffs }
}

/// Nodal interpolant of a vector field on a vector Lagrange space.
pub fn interpolate_vector(space: &FunctionSpace, f: impl Fn([f64; 2]) -> [f64; 2]) -> FieldCoefficients {
    assert_eq!(space.num_components(), 2);
    let coeffs = space.node_coords().iter().flat_map(|&x| f(x)).collect();
    FieldCoefficients { space: space.clone(), coeffs }
}

pub fn exact_pressure(x: [f64; 2]) -> f64 {
    (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()
}

pub fn exact_velocity(x: [f64; 2]) -> [f64; 2] {
    let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
    let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
    [2.0 * PI * cx * sy, 2.0 * PI * sx * cy]
}

pub fn exact_source(x: [f64; 2]) -> f64 {
    -8.0 * PI * PI * exact_pressure(x)
}

/// `G[q] = <g, q>` for every basis function `q` of `qspace`.
pub fn load_vector(qspace: &FunctionSpace, g: &FieldCoefficients) -> Result<Vec<f64>> {
    if !same_mesh(qspace.mesh(), g.space.mesh()) {
        return Err(Error::DimensionMismatch("load data lives on a different mesh".into()));
    }
    let rule = quadrature(MAX_QUADRATURE_DEGREE)?;
    let qtab = qspace.element().tabulate(&rule.points);
    let gtab = g.space.element().tabulate(&rule.points);
    let mesh = qspace.mesh();
    let mut out = vec![0.0; qspace.dim()];
    for c in 0..mesh.num_cells() {
        let map = CellMap::new(mesh, c);
        let gv = g.cell_values(c, &gtab);
        for (q, w) in rule.weights.iter().enumerate() {
            let wg = w * map.det.abs() * gv[q][0];
            for (phi, &node) in qtab.values_at(q).iter().zip(qspace.cell_nodes(c)) {
                out[node] += wg * phi;
            }
        }
    }
    Ok(out)
}

fn same_mesh(a: &Arc<Triangulation>, b: &Arc<Triangulation>) -> bool {
    Arc::ptr_eq(a, b) || (a.cells() == b.cells() && a.vertices() == b.vertices())
}

/// Discrete solution of the mixed source problem.
#[derive(Debug, Clone)]
pub struct MixedSolution {
    pub u: FieldCoefficients,
    pub p: FieldCoefficients,
    pub iterations: usize,
    /// `||B u - G|| / ||G||`.
    pub residual: f64,
}

/// Solves `M_V u + B^T p = 0`, `B u = G` through the pressure Schur complement.
pub fn solve_mixed(forms: &AssembledForms, g: &FieldCoefficients) -> Result<MixedSolution> {
    let sigma = forms.mesh().singular_vertices().sigma;
    if sigma > 0 {
        return Err(Error::SpuriousModes { dim: sigma });
    }
    let rhs = load_vector(&forms.qspace, g)?;
    solve_mixed_load(forms, &rhs)
}

/// As [`solve_mixed`] with an assembled right-hand side `G`.
pub fn solve_mixed_load(forms: &AssembledForms, rhs: &[f64]) -> Result<MixedSolution> {
    let dq = forms.dim_q();
    if rhs.len() != dq {
        return Err(Error::DimensionMismatch(format!("load of length {} for dim Q = {dq}", rhs.len())));
    }
    let gnorm = norm(rhs);
    if gnorm == 0.0 {
        return Ok(MixedSolution {
            u: FieldCoefficients::zeros(forms.vspace.clone()),
            p: FieldCoefficients::zeros(forms.qspace.clone()),
            iterations: 0,
            residual: 0.0,
        });
    }
    let mv = SparseCholesky::factor(&forms.mass_v)?;
    let mq = SparseCholesky::factor(&forms.mass_q)?;
    let velocity = |p: &[f64]| {
        let mut u = mv.solve(&forms.b.mul_vec_transpose(p));
        u.iter_mut().for_each(|v| *v = -*v);
        u
    };
    // S p = -G with S = B M_V^{-1} B^T, preconditioned by M_Q^{-1}.
    let apply_s = |p: &[f64]| {
        let mut s = forms.b.mul_vec(&velocity(p));
        s.iter_mut().for_each(|v| *v = -*v);
        s
    };
    let b: Vec<f64> = rhs.iter().map(|v| -v).collect();
    let mut p = vec![0.0; dq];
    let mut r = b.clone();
    let mut z = mq.solve(&r);
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = 10 * dq + 100;
    let mut iterations = 0;
    while norm(&r) > 1e-13 * gnorm {
        if iterations == max_iter {
            return Err(Error::Singular(format!("pressure Schur complement CG stalled after {max_iter} iterations")));
        }
        let sd = apply_s(&d);
        let curv = dot(&d, &sd);
        if curv <= 0.0 {
            return Err(Error::Singular("pressure Schur complement is not positive definite".into()));
        }
        let a = rz / curv;
        p.iter_mut().zip(&d).for_each(|(pi, di)| *pi += a * di);
        r.iter_mut().zip(&sd).for_each(|(ri, si)| *ri -= a * si);
        z = mq.solve(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        d.iter_mut().zip(&z).for_each(|(di, zi)| *di = zi + beta * *di);
        iterations += 1;
    }
    let u = velocity(&p);
    let bu = forms.b.mul_vec(&u);
    let residual = norm(&bu.iter().zip(rhs).map(|(a, b)| a - b).collect::<Vec<_>>()) / gnorm;
    if residual > SOLVE_TOLERANCE {
        return Err(Error::Singular(format!("constraint residual {residual:e} after {iterations} iterations")));
    }
    Ok(MixedSolution {
        u: FieldCoefficients::new(forms.vspace.clone(), u)?,
        p: FieldCoefficients::new(forms.qspace.clone(), p)?,
        iterations,
        residual,
    })
}

/// Error norms of a discrete solution against reference fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// `||p - p_h||_0`.
    pub p_l2: f64,
    /// `||div (u - u_h)||_0`.
    pub u_div: f64,
    /// `||u - u_h||_0`.
    pub u_l2: f64,
    /// `sqrt(u_l2^2 + u_div^2)`.
    pub u_hdiv: f64,
}

/// Errors by degree-14 quadrature on every cell.
pub fn error_norms(
    u_h: &FieldCoefficients,
    p_h: &FieldCoefficients,
    u_ref: &FieldCoefficients,
    p_ref: &FieldCoefficients,
) -> Result<ErrorNorms> {
    let mesh = u_h.space.mesh();
    for other in [p_h, u_ref, p_ref] {
        if !same_mesh(mesh, other.space.mesh()) {
            return Err(Error::DimensionMismatch("error fields live on different meshes".into()));
        }
    }
    let rule = quadrature(MAX_QUADRATURE_DEGREE)?;
    let tab = |f: &FieldCoefficients| f.space.element().tabulate(&rule.points);
    let (tu, tp, tur, tpr) = (tab(u_h), tab(p_h), tab(u_ref), tab(p_ref));
    let (mut p2, mut d2, mut u2) = (0.0, 0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let map = CellMap::new(mesh, c);
        let uh = u_h.cell_values(c, &tu);
        let ur = u_ref.cell_values(c, &tur);
        let ph = p_h.cell_values(c, &tp);
        let pr = p_ref.cell_values(c, &tpr);
        let dh = u_h.cell_divergence(c, &tu, &map);
        let dr = u_ref.cell_divergence(c, &tur, &map);
        for (q, w) in rule.weights.iter().enumerate() {
            let w = w * map.det.abs();
            p2 += w * (pr[q][0] - ph[q][0]).powi(2);
            d2 += w * (dr[q] - dh[q]).powi(2);
            u2 += w * ((ur[q][0] - uh[q][0]).powi(2) + (ur[q][1] - uh[q][1]).powi(2));
        }
    }
    Ok(ErrorNorms { p_l2: p2.sqrt(), u_div: d2.sqrt(), u_l2: u2.sqrt(), u_hdiv: (u2 + d2).sqrt() })
}

/// Solves the model problem on one mesh and measures the errors.
pub fn model_problem_errors(mesh: Arc<Triangulation>, r: usize) -> Result<(ErrorNorms, MixedSolution)> {
    let forms = discretize(mesh.clone(), r)?;
    let scalar = FunctionSpace::lagrange(mesh.clone(), INTERPOLANT_DEGREE, 1)?;
    let vector = FunctionSpace::lagrange(mesh, INTERPOLANT_DEGREE, 2)?;
    let g = interpolate_scalar(&scalar, exact_source);
    let p_ref = interpolate_scalar(&scalar, exact_pressure);
    let u_ref = interpolate_vector(&vector, exact_velocity);
    let sol = solve_mixed(&forms, &g)?;
    let errors = error_norms(&sol.u, &sol.p, &u_ref, &p_ref)?;
    Ok((errors, sol))
}

/// Default refinement sequence for degree `r`.
pub fn default_n_list(r: usize) -> Vec<usize> {
    if r <= 2 {
        vec![4, 8, 16, 32]
    } else {
        vec![4, 8, 16]
    }
}

/// Errors and observed rates over a refinement sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub family: Family,
    pub r: usize,
    pub n: Vec<usize>,
    pub errors: Vec<ErrorNorms>,
    /// `rates[k]` compares `n[k]` with `n[k + 1]`; `None` unless it is a doubling.
    pub rates: Vec<Option<ErrorNorms>>,
    /// Errors divided by those on the first mesh.
    pub normalized: Vec<ErrorNorms>,
}

fn map_norms(a: &ErrorNorms, b: &ErrorNorms, f: impl Fn(f64, f64) -> f64) -> ErrorNorms {
    ErrorNorms {
        p_l2: f(a.p_l2, b.p_l2),
        u_div: f(a.u_div, b.u_div),
        u_l2: f(a.u_l2, b.u_l2),
        u_hdiv: f(a.u_hdiv, b.u_hdiv),
    }
}

impl ConvergenceReport {
    pub fn from_errors(family: Family, r: usize, n: Vec<usize>, errors: Vec<ErrorNorms>) -> Self {
        let rates = n
            .windows(2)
            .zip(errors.windows(2))
            .map(|(nn, ee)| (nn[1] == 2 * nn[0]).then(|| map_norms(&ee[0], &ee[1], |a, b| (a / b).log2())))
            .collect();
        let normalized = match errors.first() {
            Some(first) => errors.iter().map(|e| map_norms(e, first, |a, b| a / b)).collect(),
            None => Vec::new(),
        };
        ConvergenceReport { family, r, n, errors, rates, normalized }
    }

    /// Rates over the last refinement.
    pub fn last_rate(&self) -> Option<ErrorNorms> {
        self.rates.last().copied().flatten()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CONVERGENCE_CSV_HEADER);
        out.push('\n');
        for (k, (n, e)) in self.n.iter().zip(&self.errors).enumerate() {
            let rate = k.checked_sub(1).and_then(|j| self.rates[j]);
            let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{},{}\n",
                self.r,
                n,
                e.p_l2,
                e.u_div,
                e.u_l2,
                e.u_hdiv,
                fmt(rate.map(|r| r.p_l2)),
                fmt(rate.map(|r| r.u_div)),
                fmt(rate.map(|r| r.u_l2)),
            ));
        }
        out
    }

    /// Gnuplot data with columns `h err_p_L2 err_u_div err_u_L2`, normalized.
    pub fn to_gnuplot(&self) -> String {
        let mut out = format!("# r = {}: h, normalized ||p-p_h||_0, |u-u_h|_div, ||u-u_h||_0\n", self.r);
        for (n, e) in self.n.iter().zip(&self.normalized) {
            out.push_str(&format!("{:.6e} {:.6e} {:.6e} {:.6e}\n", 1.0 / *n as f64, e.p_l2, e.u_div, e.u_l2));
        }
        out
    }
}

pub const CONVERGENCE_CSV_HEADER: &str = "r,n,err_p_L2,err_u_div,err_u_L2,err_u_Hdiv,rate_p,rate_u_div,rate_u_L2";

/// Runs the model problem for each `n` (in parallel) on a generated family.
pub fn convergence_study(family: Family, r: usize, n_list: &[usize]) -> Result<ConvergenceReport> {
    if !(1..=4).contains(&r) {
        return Err(Error::UnsupportedDegree { what: "convergence study", degree: r });
    }
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty n list".into()));
    }
    let errors = n_list
        .par_iter()
        .map(|&n| Ok(model_problem_errors(Arc::new(generate(family, n)?), r)?.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_errors(family, r, n_list.to_vec(), errors))
}
