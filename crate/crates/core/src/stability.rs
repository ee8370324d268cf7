//! Babuska-Brezzi constants, spurious pressure modes and table reproduction.
//!
//! Every constant is read off a dense generalized symmetric eigenproblem
//! assembled from [`AssembledForms`]:
//!
//! | constant        | pencil                                               |
//! |-----------------|------------------------------------------------------|
//! | `beta_div`      | `B A_div^{-1} B^T p = lambda M_Q p`, `beta = sqrt(lambda_min)` |
//! | `beta_h1`       | `B A_1^{-1} B^T p = lambda M_Q p`                    |
//! | `mu_h`          | `B M_V^{-1} B^T p = mu M_Q p`                        |
//! | `alpha`         | `Z^T M_V Z x = lambda Z^T A_div Z x`, `Z` spans ker B |
//! | `gamma`         | `[[M_V, B^T], [B, 0]] x = lambda diag(A_div, M_Q) x` |
//!
//! Eigenvalues below the zero threshold are counted as spurious modes;
//! the reduced constant is the square root of the smallest eigenvalue at or
//! above it.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{discretize, AssembledForms, SparseMatrix};
use crate::dense::{dot, null_space, Mat};
use crate::eigensolve::{
    schur_complement, sym_generalized_eig, Problem, Spectrum, DEFAULT_ZERO_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::mesh::{generate, Family, Triangulation};

/// Thresholds of the sensitivity sweep.
pub const SWEEP_THRESHOLDS: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

/// Brezzi inf-sup constant and spurious-mode count from one pencil.
#[derive(Debug, Clone)]
pub struct InfSup {
    pub beta: f64,
    /// `None` when every eigenvalue falls under the threshold.
    pub beta_reduced: Option<f64>,
    pub dim_kernel: usize,
    pub spectrum: Spectrum,
    pub warning: Option<String>,
}

impl InfSup {
    pub fn from_spectrum(spectrum: Spectrum, threshold: f64) -> Self {
        let dim_kernel = spectrum.count_below(threshold);
        let beta = spectrum.min().unwrap_or(0.0).max(0.0).sqrt();
        let beta_reduced = spectrum.smallest_at_least(threshold).map(f64::sqrt);
        let warning = cluster_warning(&spectrum.values, dim_kernel);
        InfSup { beta, beta_reduced, dim_kernel, spectrum, warning }
    }

    /// Spurious-mode eigenvectors (the computed basis of N_h), when requested.
    pub fn kernel_vectors(&self) -> Option<&[Vec<f64>]> {
        self.spectrum.vectors.as_deref().map(|v| &v[..self.dim_kernel])
    }
}

/// Warns when the threshold separates two eigenvalues that agree to roundoff.
fn cluster_warning(values: &[f64], split: usize) -> Option<String> {
    if split == 0 || split >= values.len() {
        return None;
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = values[split] - values[split - 1];
    (gap < 10.0 * f64::EPSILON * scale).then(|| {
        format!(
            "zero threshold splits a numerically clustered pair ({:e}, {:e})",
            values[split - 1],
            values[split]
        )
    })
}

fn schur_spectrum(
    forms: &AssembledForms,
    velocity_norm: &SparseMatrix,
    problem: Problem,
    threshold: f64,
    want_vectors: bool,
) -> Result<(Mat, Spectrum)> {
    let s = schur_complement(&forms.b, velocity_norm)?;
    let spectrum = sym_generalized_eig(&s, &forms.mass_q, want_vectors)?.with_problem(problem, threshold);
    Ok((s, spectrum))
}

/// Brezzi inf-sup constant of the mixed Laplacian in the H(div) norm.
pub fn brezzi_infsup(forms: &AssembledForms, threshold: f64, want_vectors: bool) -> Result<InfSup> {
    let (_, spectrum) = schur_spectrum(forms, &forms.a_div, Problem::BrezziInfSup, threshold, want_vectors)?;
    Ok(InfSup::from_spectrum(spectrum, threshold))
}

/// Brezzi coercivity constant on the discrete kernel `Z_h`.
#[derive(Debug, Clone)]
pub struct Coercivity {
    pub alpha: f64,
    pub kernel_dim: usize,
    /// Euclidean-orthonormal basis of `Z_h = ker B`.
    pub kernel_basis: Vec<Vec<f64>>,
    pub spectrum: Spectrum,
}

/// Relative column-norm tolerance used to decide the rank of `B`.
const KERNEL_RANK_TOL: f64 = 1e-10;

pub fn brezzi_coercivity(forms: &AssembledForms) -> Result<Coercivity> {
    let rows: Vec<Vec<f64>> = (0..forms.b.nrows())
        .map(|q| {
            let mut row = vec![0.0; forms.dim_v()];
            for (j, v) in forms.b.row(q) {
                row[j] = v;
            }
            row
        })
        .collect();
    let (_, basis) = null_space(&rows, forms.dim_v(), KERNEL_RANK_TOL);
    if basis.is_empty() {
        return Err(Error::EmptyKernel);
    }
    let project = |m: &SparseMatrix| {
        let images: Vec<Vec<f64>> = basis.iter().map(|z| m.mul_vec(z)).collect();
        let mut out = Mat::from_fn(basis.len(), basis.len(), |i, j| dot(&basis[i], &images[j]));
        out.symmetrize();
        out
    };
    let a = project(&forms.mass_v);
    let norm = project(&forms.a_div);
    let spectrum = sym_generalized_eig(&a, &SparseMatrix::from_dense(&norm, true), false)?
        .with_problem(Problem::Coercivity, 0.0);
    let alpha = spectrum.min_abs().unwrap_or(0.0);
    Ok(Coercivity { alpha, kernel_dim: basis.len(), kernel_basis: basis, spectrum })
}

/// Babuska inf-sup constant of the full mixed form.
#[derive(Debug, Clone)]
pub struct Babuska {
    pub gamma: f64,
    /// Eigenvalues with modulus below the threshold (spurious directions).
    pub dim_zero: usize,
    pub spectrum: Spectrum,
}

/// Dense coupled matrix `[[M_V, B^T], [B, 0]]`.
pub fn saddle_matrix(top_left: &SparseMatrix, b: &SparseMatrix) -> Mat {
    let nv = top_left.nrows();
    let n = nv + b.nrows();
    let mut m = Mat::zeros(n, n);
    for (i, j, v) in top_left.triplets() {
        m[(i, j)] = v;
    }
    for (q, j, v) in b.triplets() {
        m[(nv + q, j)] = v;
        m[(j, nv + q)] = v;
    }
    m
}

/// Block-diagonal sparse matrix `diag(a, b)`.
pub fn block_diag(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let na = a.nrows();
    let t = a.triplets().chain(b.triplets().map(|(i, j, v)| (na + i, na + j, v))).collect();
    SparseMatrix::from_triplets(na + b.nrows(), na + b.ncols(), t, true)
}

pub fn babuska_infsup(forms: &AssembledForms, threshold: f64) -> Result<Babuska> {
    let lhs = saddle_matrix(&forms.mass_v, &forms.b);
    let rhs = block_diag(&forms.a_div, &forms.mass_q);
    let spectrum = sym_generalized_eig(&lhs, &rhs, false)?.with_problem(Problem::Babuska, threshold);
    let dim_zero = spectrum.values.iter().filter(|v| v.abs() < threshold).count();
    let gamma = if dim_zero > 0 { 0.0 } else { spectrum.min_abs().unwrap_or(0.0) };
    Ok(Babuska { gamma, dim_zero, spectrum })
}

/// Stokes (H1-norm) inf-sup constant for contrast with the H(div) one.
#[derive(Debug, Clone)]
pub struct StokesInfSup {
    pub infsup: InfSup,
    /// Rayleigh quotient of the constant pressure in the Stokes pencil.
    pub constant_mode_rayleigh: f64,
}

pub fn stokes_infsup(forms: &AssembledForms, threshold: f64) -> Result<StokesInfSup> {
    let (s, spectrum) = schur_spectrum(forms, &forms.a_h1, Problem::StokesInfSup, threshold, false)?;
    let ones = constant_pressure(forms);
    let mq1 = forms.mass_q.mul_vec(&ones);
    let constant_mode_rayleigh = dot(&ones, &s.mul_vec(&ones)) / dot(&ones, &mq1);
    Ok(StokesInfSup { infsup: InfSup::from_spectrum(spectrum, threshold), constant_mode_rayleigh })
}

/// Coefficients of the pressure `q = 1` (the nodal basis reproduces constants).
pub fn constant_pressure(forms: &AssembledForms) -> Vec<f64> {
    vec![1.0; forms.dim_q()]
}

/// Smallest positive eigenvalue of the discrete mixed Laplace eigenproblem.
#[derive(Debug, Clone)]
pub struct LaplaceEigen {
    pub mu: Option<f64>,
    pub spectrum: Spectrum,
}

pub fn laplace_eigenvalue(forms: &AssembledForms, threshold: f64) -> Result<LaplaceEigen> {
    let (_, spectrum) = schur_spectrum(forms, &forms.mass_v, Problem::MixedLaplace, threshold, false)?;
    Ok(LaplaceEigen { mu: spectrum.smallest_at_least(threshold), spectrum })
}

/// Full spectrum of `K u = mu M_V u`.
pub fn div_div_spectrum(forms: &AssembledForms) -> Result<Spectrum> {
    Ok(sym_generalized_eig(&forms.div_div.to_dense(), &forms.mass_v, false)?
        .with_problem(Problem::DivDiv, 0.0))
}

/// `lambda / (1 - lambda)`: maps an H(div) inf-sup eigenvalue to a mixed Laplace one.
pub fn infsup_to_laplace(lambda: f64) -> f64 {
    lambda / (1.0 - lambda)
}

/// `dim N_h` at each threshold of a sweep.
pub fn threshold_sweep(spectrum: &Spectrum, thresholds: &[f64]) -> Vec<(f64, usize)> {
    thresholds.iter().map(|&t| (t, spectrum.count_below(t))).collect()
}

/// What to compute besides the H(div) inf-sup constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub threshold: f64,
    pub coercivity: bool,
    pub babuska: bool,
    pub stokes: bool,
    pub sweep: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            threshold: DEFAULT_ZERO_THRESHOLD,
            coercivity: false,
            babuska: false,
            stokes: false,
            sweep: false,
        }
    }
}

/// All constants for one (mesh, degree) case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub sigma: usize,
    #[serde(rename = "dimN")]
    pub dim_n: usize,
    pub dim_v: usize,
    pub dim_q: usize,
    pub beta_div: f64,
    pub beta_div_reduced: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub beta_h1: Option<f64>,
    pub beta_h1_reduced: Option<f64>,
    pub stokes_constant_mode: Option<f64>,
    pub threshold: f64,
    pub sweep: Option<Vec<(f64, usize)>>,
    pub warning: Option<String>,
    pub seconds: f64,
}

/// Computes a report for an arbitrary triangulation.
pub fn analyze_mesh(mesh: Arc<Triangulation>, r: usize, opts: &AnalysisOptions) -> Result<StabilityReport> {
    let start = Instant::now();
    let sigma = mesh.singular_vertices().sigma;
    let (family, n) = (mesh.family(), mesh.n());
    let forms = discretize(mesh, r)?;
    let infsup = brezzi_infsup(&forms, opts.threshold, false)?;
    let alpha = if opts.coercivity { Some(brezzi_coercivity(&forms)?.alpha) } else { None };
    let gamma = if opts.babuska { Some(babuska_infsup(&forms, opts.threshold)?.gamma) } else { None };
    let stokes = if opts.stokes { Some(stokes_infsup(&forms, opts.threshold)?) } else { None };
    let sweep = opts.sweep.then(|| threshold_sweep(&infsup.spectrum, &SWEEP_THRESHOLDS));
    Ok(StabilityReport {
        family,
        n,
        r,
        sigma,
        dim_n: infsup.dim_kernel,
        dim_v: forms.dim_v(),
        dim_q: forms.dim_q(),
        beta_div: infsup.beta,
        beta_div_reduced: infsup.beta_reduced,
        alpha,
        gamma,
        beta_h1: stokes.as_ref().map(|s| s.infsup.beta),
        beta_h1_reduced: stokes.as_ref().and_then(|s| s.infsup.beta_reduced),
        stokes_constant_mode: stokes.as_ref().map(|s| s.constant_mode_rayleigh),
        threshold: opts.threshold,
        sweep,
        warning: infsup.warning,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Computes a report for a generated mesh family.
pub fn analyze(family: Family, n: usize, r: usize, opts: &AnalysisOptions) -> Result<StabilityReport> {
    analyze_mesh(Arc::new(generate(family, n)?), r, opts)
}

/// The four tables of singular-vertex counts and inf-sup constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Table {
    T1,
    T2,
    T3,
    T4,
}

impl std::str::FromStr for Table {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" | "1" => Ok(Table::T1),
            "T2" | "2" => Ok(Table::T2),
            "T3" | "3" => Ok(Table::T3),
            "T4" | "4" => Ok(Table::T4),
            _ => Err(Error::InvalidArgument(format!("unknown table '{s}'"))),
        }
    }
}

impl Table {
    /// `(family, r, largest n)` columns in printed order.
    pub fn columns(self) -> Vec<(Family, usize, usize)> {
        use Family::*;
        match self {
            Table::T1 => [1, 2, 3]
                .into_iter()
                .flat_map(|r| {
                    let max_n = if r == 1 { 16 } else { 8 };
                    Family::GENERATED.into_iter().map(move |f| (f, r, max_n))
                })
                .collect(),
            Table::T2 => vec![(Diagonal, 1, 16), (Zigzag, 1, 16), (Flipped, 1, 16), (UnionJack, 1, 16)],
            Table::T3 => vec![(Diagonal, 2, 14), (Zigzag, 2, 14), (Flipped, 2, 12), (UnionJack, 2, 12)],
            Table::T4 => vec![(Diagonal, 3, 12), (Zigzag, 3, 8), (Flipped, 3, 8), (UnionJack, 3, 8)],
        }
    }

    /// Every `(family, n, r)` case of the table within `n_range` (inclusive).
    pub fn cases(self, n_range: Option<(usize, usize)>) -> Vec<(Family, usize, usize)> {
        let (lo, hi) = n_range.unwrap_or((4, 16));
        let cols = self.columns();
        let mut out = Vec::new();
        for n in (4..=16).step_by(2).filter(|n| (lo..=hi).contains(n)) {
            for &(family, r, max_n) in &cols {
                if n <= max_n {
                    out.push((family, n, r));
                }
            }
        }
        out
    }
}

/// Runs every case of a table, in parallel, returning reports in table order.
pub fn reproduce_table(
    which: Table,
    n_range: Option<(usize, usize)>,
    opts: &AnalysisOptions,
) -> Result<Vec<StabilityReport>> {
    let cases = which.cases(n_range);
    if let Some((lo, hi)) = n_range {
        if lo > hi || lo < 4 || hi > 16 {
            return Err(Error::InvalidArgument(format!("n range {lo}..{hi} outside 4..16")));
        }
    }
    cases.par_iter().map(|&(family, n, r)| analyze(family, n, r, opts)).collect()
}

pub const CSV_HEADER: &str = "family,n,r,sigma,dimN,beta_div,beta_div_reduced,alpha,beta_h1,threshold";

fn opt6(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One CSV row per report, six decimals for every constant.
pub fn reports_to_csv(reports: &[StabilityReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{},{},{},{:e}\n",
            r.family,
            r.n,
            r.r,
            r.sigma,
            r.dim_n,
            r.beta_div,
            opt6(r.beta_div_reduced),
            opt6(r.alpha),
            opt6(r.beta_h1),
            r.threshold
        ));
    }
    out
}
