use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mixedstab::assembly::discretize;
use mixedstab::eigensolve::{SparseCholesky, DEFAULT_ZERO_THRESHOLD};
use mixedstab::mesh::{generate, Family, Triangulation};
use mixedstab::sparse::SparseMatrix;
use mixedstab::stability::{brezzi_infsup, stokes_infsup, threshold_sweep, SWEEP_THRESHOLDS};

fn spectrum(mesh: Triangulation, r: usize) -> Vec<f64> {
    let forms = discretize(Arc::new(mesh), r).unwrap();
    brezzi_infsup(&forms, DEFAULT_ZERO_THRESHOLD, false).unwrap().spectrum.values
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

#[test]
fn spectrum_invariant_under_vertex_renumbering() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (family, r) in [(Family::Diagonal, 1), (Family::Diagonal, 2), (Family::Crisscross, 1)] {
        let mesh = generate(family, 4).unwrap();
        let mut perm: Vec<usize> = (0..mesh.num_vertices()).collect();
        perm.shuffle(&mut rng);
        let shuffled = mesh.renumbered(&perm).unwrap();
        assert_close(&spectrum(mesh, r), &spectrum(shuffled, r), 1e-10);
    }
}

#[test]
fn reflected_zigzag_has_same_sigma_and_spectrum() {
    let mesh = generate(Family::Zigzag, 4).unwrap();
    let reflected = mesh.reflected().unwrap();
    assert_eq!(mesh.singular_vertices().sigma, reflected.singular_vertices().sigma);
    assert_close(&spectrum(mesh, 1), &spectrum(reflected, 1), 1e-10);
}

fn any_family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::GENERATED.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn mesh_counts_and_euler(family in any_family(), half in 2usize..=8) {
        let n = 2 * half;
        let mesh = generate(family, n).unwrap();
        let cells = if family == Family::Crisscross { 4 * n * n } else { 2 * n * n };
        prop_assert_eq!(mesh.num_cells(), cells);
        prop_assert_eq!(mesh.num_vertices() + mesh.num_cells(), mesh.num_edges() + 1);
        for c in 0..mesh.num_cells() {
            prop_assert!(mesh.cell_area(c) > 0.0);
        }
        let area: f64 = (0..mesh.num_cells()).map(|c| mesh.cell_area(c)).sum();
        prop_assert!((area - 1.0).abs() < 1e-13);
        for e in mesh.edges() {
            prop_assert_eq!(e.cells.len(), if e.is_boundary() { 1 } else { 2 });
        }
    }

    #[test]
    fn infsup_spectrum_properties(family in any_family(), half in 2usize..=3, r in 1usize..=2) {
        let n = 2 * half;
        let mesh = generate(family, n).unwrap();
        let sigma = mesh.singular_vertices().sigma;
        let forms = discretize(Arc::new(mesh), r).unwrap();
        for (name, m) in forms.named() {
            if m.is_symmetric() {
                prop_assert!(m.asymmetry() <= 1e-13 * m.max_abs(), "{} not symmetric", name);
            }
        }
        let inf = brezzi_infsup(&forms, DEFAULT_ZERO_THRESHOLD, false).unwrap();
        let values = &inf.spectrum.values;
        prop_assert!(values.iter().all(|l| (-1e-8..1.0 - 1e-8).contains(l)));
        prop_assert!(inf.dim_kernel >= sigma);
        prop_assert_eq!(inf.dim_kernel == 0, values[0] >= DEFAULT_ZERO_THRESHOLD);
        let reduced = inf.beta_reduced.unwrap();
        prop_assert!(inf.beta <= reduced && reduced < 1.0);
        let sweep = threshold_sweep(&inf.spectrum, &SWEEP_THRESHOLDS);
        prop_assert!(sweep.windows(2).all(|w| w[0].0 > w[1].0 && w[0].1 >= w[1].1));
        let h1 = stokes_infsup(&forms, DEFAULT_ZERO_THRESHOLD).unwrap();
        prop_assert!(h1.infsup.beta <= inf.beta + 1e-12);
    }

    #[test]
    fn sparse_cholesky_solves_random_spd(seed in any::<u64>(), n in 1usize..40) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, n as f64 + 1.0));
            for _ in 0..2 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
        }
        let a = SparseMatrix::from_triplets(n, n, t, true);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.mul_vec(&x);
        let y = SparseCholesky::factor(&a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&y) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }
}
