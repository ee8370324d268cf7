//! Degree-of-freedom maps and assembly of the mixed-Laplacian bilinear forms.
//!
//! The velocity space is the full continuous vector Lagrange space: no
//! essential boundary conditions are imposed. The Dirichlet condition on the
//! pressure is natural in the mixed formulation, and constraining the
//! velocity would change every stability constant computed from these forms.

use std::sync::Arc;

use crate::element::{quadrature, ElementKind, ReferenceElement, MAX_QUADRATURE_DEGREE};
use crate::error::{Error, Result};
use crate::mesh::Triangulation;
pub use crate::sparse::SparseMatrix;

/// Affine map from the reference triangle onto one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellMap {
    pub origin: [f64; 2],
    /// Columns are the two edge vectors leaving vertex 0.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
}

impl CellMap {
    pub fn new(mesh: &Triangulation, c: usize) -> Self {
        let [p0, p1, p2] = mesh.cell_coords(c);
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        CellMap { origin: p0, jac, det }
    }

    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    /// Physical gradient from a reference gradient (`J^{-T} g`).
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jac;
        [
            (j[1][1] * g[0] - j[1][0] * g[1]) / self.det,
            (-j[0][1] * g[0] + j[0][0] * g[1]) / self.det,
        ]
    }
}

/// A finite element space over a triangulation.
///
/// Vector spaces interleave components per node: dof `2*node + comp`.
#[derive(Debug, Clone)]
pub struct FunctionSpace {
    mesh: Arc<Triangulation>,
    element: ReferenceElement,
    continuous: bool,
    num_nodes: usize,
    cell_nodes: Vec<usize>,
    node_coords: Vec<[f64; 2]>,
}

impl FunctionSpace {
    /// Continuous Lagrange space of `degree` with `components` = 1 or 2.
    pub fn lagrange(mesh: Arc<Triangulation>, degree: usize, components: usize) -> Result<Self> {
        let kind = match components {
            1 => ElementKind::ScalarLagrange,
            2 => ElementKind::VectorLagrange,
            _ => return Err(Error::InvalidArgument(format!("{components} components"))),
        };
        let element = ReferenceElement::new(kind, degree)?;
        let r = degree;
        let nb = element.num_basis();
        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();
        let per_edge = r - 1;
        let per_cell = nb - 3 - 3 * per_edge;
        let edge_base = nv;
        let interior_base = nv + ne * per_edge;
        let num_nodes = interior_base + mesh.num_cells() * per_cell;

        let mut cell_nodes = Vec::with_capacity(mesh.num_cells() * nb);
        let mut node_coords = vec![[f64::NAN; 2]; num_nodes];
        for (c, cell) in mesh.cells().iter().enumerate() {
            let map = CellMap::new(&mesh, c);
            let start = cell_nodes.len();
            cell_nodes.extend_from_slice(cell);
            for k in 0..3 {
                let from = cell[(k + 1) % 3];
                let e = mesh.cell_edges()[c][k];
                let forward = mesh.edges()[e].vertices[0] == from;
                for t in 1..r {
                    let s = if forward { t } else { r - t };
                    cell_nodes.push(edge_base + e * per_edge + s - 1);
                }
            }
            for k in 0..per_cell {
                cell_nodes.push(interior_base + c * per_cell + k);
            }
            for (local, &node) in cell_nodes[start..].iter().enumerate() {
                node_coords[node] = map.map(element.nodes()[local]);
            }
        }
        Ok(FunctionSpace { mesh, element, continuous: true, num_nodes, cell_nodes, node_coords })
    }

    /// Cellwise polynomials of `degree` with no interelement continuity.
    pub fn discontinuous(mesh: Arc<Triangulation>, degree: usize) -> Result<Self> {
        let element = ReferenceElement::new(ElementKind::DiscontinuousScalar, degree)?;
        let nb = element.num_basis();
        let num_nodes = mesh.num_cells() * nb;
        let cell_nodes: Vec<usize> = (0..num_nodes).collect();
        let mut node_coords = Vec::with_capacity(num_nodes);
        for c in 0..mesh.num_cells() {
            let map = CellMap::new(&mesh, c);
            node_coords.extend(element.nodes().iter().map(|&p| map.map(p)));
        }
        Ok(FunctionSpace { mesh, element, continuous: false, num_nodes, cell_nodes, node_coords })
    }

    pub fn mesh(&self) -> &Arc<Triangulation> {
        &self.mesh
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn num_components(&self) -> usize {
        self.element.num_components()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn dim(&self) -> usize {
        self.num_nodes * self.num_components()
    }

    /// Global scalar node of each local basis function on cell `c`.
    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        let nb = self.element.num_basis();
        &self.cell_nodes[c * nb..(c + 1) * nb]
    }

    /// Global dofs of cell `c`, local order `ncomp * i + comp`.
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        let nc = self.num_components();
        self.cell_nodes(c).iter().flat_map(|&n| (0..nc).map(move |k| nc * n + k)).collect()
    }

    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.node_coords
    }
}

/// Builds `V_h` (continuous vector degree `r`) and `Q_h` (discontinuous degree `r - 1`).
pub fn build_spaces(mesh: Arc<Triangulation>, r: usize) -> Result<(FunctionSpace, FunctionSpace)> {
    if !(1..=6).contains(&r) {
        return Err(Error::UnsupportedDegree { what: "velocity space", degree: r });
    }
    let v = FunctionSpace::lagrange(mesh.clone(), r, 2)?;
    let q = FunctionSpace::discontinuous(mesh, r - 1)?;
    Ok((v, q))
}

/// Every bilinear form entering the eigenvalue and source problems.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub vspace: FunctionSpace,
    pub qspace: FunctionSpace,
    /// Vector mass `<u, v>`.
    pub mass_v: SparseMatrix,
    /// Divergence stiffness `<div u, div v>`.
    pub div_div: SparseMatrix,
    /// H(div) Gram matrix, `mass_v + div_div`.
    pub a_div: SparseMatrix,
    /// `B[q, v] = <div v, q>`, dim Q x dim V.
    pub b: SparseMatrix,
    /// Scalar mass on `Q_h`.
    pub mass_q: SparseMatrix,
    /// H1 Gram matrix `<u, v> + <grad u, grad v>`.
    pub a_h1: SparseMatrix,
}

impl AssembledForms {
    pub fn dim_v(&self) -> usize {
        self.vspace.dim()
    }

    pub fn dim_q(&self) -> usize {
        self.qspace.dim()
    }

    pub fn mesh(&self) -> &Arc<Triangulation> {
        self.vspace.mesh()
    }

    pub fn degree(&self) -> usize {
        self.vspace.degree()
    }

    /// Named matrices, in a fixed order, for export.
    pub fn named(&self) -> [(&'static str, &SparseMatrix); 6] {
        [
            ("mass_v", &self.mass_v),
            ("div_div", &self.div_div),
            ("a_div", &self.a_div),
            ("b", &self.b),
            ("mass_q", &self.mass_q),
            ("a_h1", &self.a_h1),
        ]
    }
}

/// Assembles all forms on `V_h x Q_h` with a quadrature exact for every integrand.
pub fn assemble(vspace: &FunctionSpace, qspace: &FunctionSpace) -> Result<AssembledForms> {
    if !Arc::ptr_eq(vspace.mesh(), qspace.mesh()) && vspace.mesh().cells() != qspace.mesh().cells() {
        return Err(Error::DimensionMismatch("spaces live on different meshes".into()));
    }
    if vspace.num_components() != 2 || qspace.num_components() != 1 {
        return Err(Error::InvalidArgument("expected a vector V_h and a scalar Q_h".into()));
    }
    let mesh = vspace.mesh();
    let r = vspace.degree();
    let rule = quadrature((2 * r + 2).min(MAX_QUADRATURE_DEGREE))?;
    let vtab = vspace.element().tabulate(&rule.points);
    let qtab = qspace.element().tabulate(&rule.points);
    let nb = vtab.num_basis;
    let nq = qtab.num_basis;
    let nvloc = 2 * nb;

    let mut mass = Vec::new();
    let mut divdiv = Vec::new();
    let mut h1 = Vec::new();
    let mut bmat = Vec::new();
    let mut mq = Vec::new();

    let mut ms_loc = vec![0.0; nb * nb];
    let mut ss_loc = vec![0.0; nb * nb];
    let mut k_loc = vec![0.0; nvloc * nvloc];
    let mut b_loc = vec![0.0; nq * nvloc];
    let mut mq_loc = vec![0.0; nq * nq];
    let mut grads = vec![[0.0; 2]; nb];

    for c in 0..mesh.num_cells() {
        let map = CellMap::new(mesh, c);
        ms_loc.iter_mut().for_each(|x| *x = 0.0);
        ss_loc.iter_mut().for_each(|x| *x = 0.0);
        k_loc.iter_mut().for_each(|x| *x = 0.0);
        b_loc.iter_mut().for_each(|x| *x = 0.0);
        mq_loc.iter_mut().for_each(|x| *x = 0.0);
        for (qp, &w) in rule.weights.iter().enumerate() {
            let wd = w * map.det;
            let phi = vtab.values_at(qp);
            for (g, &gr) in grads.iter_mut().zip(vtab.grads_at(qp)) {
                *g = map.grad(gr);
            }
            let psi = qtab.values_at(qp);
            for i in 0..nb {
                for j in 0..nb {
                    ms_loc[i * nb + j] += wd * phi[i] * phi[j];
                    ss_loc[i * nb + j] += wd * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
            }
            // local vector dof 2*i + comp has divergence grads[i][comp]
            for a in 0..nvloc {
                let da = grads[a / 2][a % 2];
                for b in 0..nvloc {
                    k_loc[a * nvloc + b] += wd * da * grads[b / 2][b % 2];
                }
                for (q, &p) in psi.iter().enumerate() {
                    b_loc[q * nvloc + a] += wd * p * da;
                }
            }
            for i in 0..nq {
                for j in 0..nq {
                    mq_loc[i * nq + j] += wd * psi[i] * psi[j];
                }
            }
        }

        let vdofs = vspace.cell_dofs(c);
        let nodes = vspace.cell_nodes(c);
        let qdofs = qspace.cell_dofs(c);
        for i in 0..nb {
            for j in 0..nb {
                for comp in 0..2 {
                    let (gi, gj) = (2 * nodes[i] + comp, 2 * nodes[j] + comp);
                    mass.push((gi, gj, ms_loc[i * nb + j]));
                    h1.push((gi, gj, ms_loc[i * nb + j] + ss_loc[i * nb + j]));
                }
            }
        }
        for a in 0..nvloc {
            for b in 0..nvloc {
                divdiv.push((vdofs[a], vdofs[b], k_loc[a * nvloc + b]));
            }
        }
        for q in 0..nq {
            for a in 0..nvloc {
                bmat.push((qdofs[q], vdofs[a], b_loc[q * nvloc + a]));
            }
            for p in 0..nq {
                mq.push((qdofs[q], qdofs[p], mq_loc[q * nq + p]));
            }
        }
    }

    let dv = vspace.dim();
    let dq = qspace.dim();
    let mass_v = SparseMatrix::from_triplets(dv, dv, mass, true);
    let div_div = SparseMatrix::from_triplets(dv, dv, divdiv, true);
    let a_div = mass_v.add(&div_div)?;
    Ok(AssembledForms {
        vspace: vspace.clone(),
        qspace: qspace.clone(),
        a_div,
        mass_v,
        div_div,
        b: SparseMatrix::from_triplets(dq, dv, bmat, false),
        mass_q: SparseMatrix::from_triplets(dq, dq, mq, true),
        a_h1: SparseMatrix::from_triplets(dv, dv, h1, true),
    })
}

/// Builds the spaces of degree `r` on `mesh` and assembles all forms.
pub fn discretize(mesh: Arc<Triangulation>, r: usize) -> Result<AssembledForms> {
    let (v, q) = build_spaces(mesh, r)?;
    assemble(&v, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::SparseCholesky;
    use crate::mesh::{generate, Family};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh(family: Family, n: usize) -> Arc<Triangulation> {
        Arc::new(generate(family, n).unwrap())
    }

    fn one_cell() -> Arc<Triangulation> {
        Arc::new(Triangulation::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap())
    }

    #[test]
    fn space_dimensions() {
        let (v, q) = build_spaces(mesh(Family::Diagonal, 4), 1).unwrap();
        assert_eq!((v.dim(), q.dim()), (50, 32));
        let (_, q) = build_spaces(mesh(Family::Diagonal, 4), 2).unwrap();
        assert_eq!(q.dim(), 96);
        let (v, _) = build_spaces(mesh(Family::Crisscross, 4), 1).unwrap();
        assert_eq!(v.dim(), 82);
        for r in 1..=6 {
            let (v, q) = build_spaces(mesh(Family::UnionJack, 4), r).unwrap();
            assert_eq!(v.dim(), 2 * (4 * r + 1) * (4 * r + 1));
            assert_eq!(q.dim(), 32 * r * (r + 1) / 2);
        }
        assert!(build_spaces(mesh(Family::Diagonal, 4), 0).is_err());
        assert!(build_spaces(mesh(Family::Diagonal, 4), 7).is_err());
    }

    #[test]
    fn shared_nodes_have_matching_coordinates() {
        for family in Family::GENERATED {
            for r in 1..=4 {
                let (v, _) = build_spaces(mesh(family, 4), r).unwrap();
                let m = v.mesh();
                for c in 0..m.num_cells() {
                    let map = CellMap::new(m, c);
                    for (local, &node) in v.cell_nodes(c).iter().enumerate() {
                        let p = map.map(v.element().nodes()[local]);
                        let q = v.node_coords()[node];
                        assert!((p[0] - q[0]).abs() < 1e-14 && (p[1] - q[1]).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn flux_identity_on_one_cell() {
        let forms = discretize(one_cell(), 1).unwrap();
        // interpolant of v = (x, 0): x-components at nodes (0,0),(1,0),(0,1)
        let v = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let bv = forms.b.mul_vec(&v);
        assert!((bv[0] - 0.5).abs() < 1e-15);
        // column sums of B equal the boundary flux of each hat field
        let sums = forms.b.mul_vec_transpose(&[1.0]);
        let expected = [-0.5, -0.5, 0.5, 0.0, 0.0, 0.5];
        for (s, e) in sums.iter().zip(expected) {
            assert!((s - e).abs() < 1e-15);
        }
    }

    #[test]
    fn p0_pressure_mass_is_cell_area() {
        let forms = discretize(mesh(Family::Diagonal, 4), 1).unwrap();
        assert_eq!(forms.mass_q.nnz(), 32);
        for i in 0..32 {
            assert!((forms.mass_q.get(i, i) - 1.0 / 32.0).abs() < 1e-16);
        }
    }

    #[test]
    fn symmetry_and_definiteness() {
        for family in Family::GENERATED {
            for r in 1..=3 {
                let forms = discretize(mesh(family, 4), r).unwrap();
                for (name, m) in forms.named() {
                    if m.is_symmetric() {
                        assert!(m.asymmetry() <= 1e-13 * m.max_abs(), "{name}");
                    }
                }
                for m in [&forms.mass_v, &forms.a_div, &forms.mass_q, &forms.a_h1] {
                    SparseCholesky::factor(m).unwrap();
                }
            }
        }
    }

    #[test]
    fn divergence_lies_in_pressure_space() {
        // B q with q = M_Q^{-1} B v is the L2 projection of div v; since
        // div V_h is contained in Q_h it reproduces v^T K v.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for r in 1..=3 {
            let forms = discretize(mesh(Family::UnionJack, 4), r).unwrap();
            let mq = SparseCholesky::factor(&forms.mass_q).unwrap();
            for _ in 0..5 {
                let v: Vec<f64> = (0..forms.dim_v()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let bv = forms.b.mul_vec(&v);
                let q = mq.solve(&bv);
                let lhs: f64 = bv.iter().zip(&q).map(|(a, b)| a * b).sum();
                let kv = forms.div_div.mul_vec(&v);
                let rhs: f64 = kv.iter().zip(&v).map(|(a, b)| a * b).sum();
                assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1.0), "r={r}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn b_matches_direct_cell_quadrature() {
        // <div v, q> evaluated pointwise from nodal values on every cell
        let forms = discretize(mesh(Family::Zigzag, 4), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..forms.dim_v()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..forms.dim_q()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rule = quadrature(10).unwrap();
        let m = forms.mesh();
        let mut direct = 0.0;
        for c in 0..m.num_cells() {
            let map = CellMap::new(m, c);
            let nodes = forms.vspace.cell_nodes(c);
            let qd = forms.qspace.cell_dofs(c);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let (_, g) = forms.vspace.element().eval(*p);
                let (psi, _) = forms.qspace.element().eval(*p);
                let div: f64 = nodes
                    .iter()
                    .zip(&g)
                    .map(|(&n, &gr)| {
                        let gp = map.grad(gr);
                        v[2 * n] * gp[0] + v[2 * n + 1] * gp[1]
                    })
                    .sum();
                let qv: f64 = qd.iter().zip(&psi).map(|(&d, &s)| q[d] * s).sum();
                direct += w * map.det * div * qv;
            }
        }
        let assembled: f64 = forms.b.mul_vec(&v).iter().zip(&q).map(|(a, b)| a * b).sum();
        assert!((direct - assembled).abs() < 1e-13 * direct.abs().max(1.0));
    }
}
