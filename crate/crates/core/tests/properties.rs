use std::f64::consts::PI;

use morse_sturm::generators::{flat_admissible_problem, random_problem, static_constant_curvature_problem};
use morse_sturm::index_form::{assemble_reparametrized_form, constraint_kernel, index_and_nullity, SpaceKind};
use morse_sturm::jacobi::{focal_instants, p_jacobi_basis, DEFAULT_T_LO};
use morse_sturm::linalg::{g_orthogonal_complement, inertia, is_nondegenerate, numerical_rank};
use morse_sturm::problem::SearchRange;
use morse_sturm::pseudo::pseudo_basis;
use morse_sturm::scan::verify;
use morse_sturm::{MatrixCurve, MetricForm, MorseSturmProblem, Regime, SubspaceBasis, Tolerances, VectorCurve, YKind};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn symmetric(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_iterator(n, n, entries.iter().copied());
    (&a + a.transpose()) * 0.5
}

/// Number of negative pivots of symmetric Gaussian elimination.
fn negative_pivots(m: &DMatrix<f64>) -> usize {
    let mut a = m.clone();
    let n = a.nrows();
    let mut count = 0;
    for k in 0..n {
        let p = a[(k, k)];
        if p < 0.0 {
            count += 1;
        }
        for i in k + 1..n {
            let f = a[(i, k)] / p;
            for j in k..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    count
}

fn linear_y(c: f64, u: f64, w: f64, b0: f64, b1: f64, b2: f64) -> MorseSturmProblem {
    let y = VectorCurve::polynomial(&[DVector::from_vec(vec![c, c * u, c * w]), DVector::from_vec(vec![b0, b1, b2])]).unwrap();
    MorseSturmProblem::new(
        MetricForm::minkowski(3),
        MatrixCurve::zero(3),
        y,
        SubspaceBasis::zero(3),
        DMatrix::zeros(0, 0),
        None,
        Tolerances::default(),
    )
    .unwrap()
}

fn random_orthogonal(k: usize, entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_iterator(k, k, entries.iter().copied().cycle().take(k * k)) + DMatrix::identity(k, k) * 0.1;
    a.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inertia_matches_pivot_count(n in 1usize..7, entries in prop::collection::vec(-1.0f64..1.0, 36)) {
        let a = symmetric(n, &entries[..n * n]);
        prop_assume!(a.clone().symmetric_eigenvalues().iter().all(|l| l.abs() > 1e-6));
        // leading minors must be nonzero for unpivoted elimination
        prop_assume!((1..=n).all(|k| a.view((0, 0), (k, k)).determinant().abs() > 1e-8));
        let i = inertia(&a, 1e-12).unwrap();
        prop_assert_eq!(i.dim(), n);
        prop_assert_eq!(i.n_zero, 0);
        prop_assert_eq!(i.n_minus, negative_pivots(&a));
    }

    #[test]
    fn double_complement_is_identity(d in 1usize..3, entries in prop::collection::vec(-1.0f64..1.0, 8)) {
        let g = MetricForm::minkowski(4);
        let vs: Vec<DVector<f64>> = (0..d).map(|i| DVector::from_column_slice(&entries[4 * i..4 * i + 4])).collect();
        let Ok(p) = SubspaceBasis::from_vectors(4, &vs) else { return Ok(()) };
        prop_assume!(is_nondegenerate(&g, &p, 1e-6));
        let perp = g_orthogonal_complement(&g, &p).unwrap();
        let back = g_orthogonal_complement(&g, &perp).unwrap();
        prop_assert!(back.same_subspace(&p, 1e-8));
    }

    #[test]
    fn nondegenerate_iff_trivial_intersection(d in 1usize..4, entries in prop::collection::vec(-1.0f64..1.0, 12), null in any::<bool>()) {
        let g = MetricForm::minkowski(4);
        let mut vs: Vec<DVector<f64>> = (0..d).map(|i| DVector::from_column_slice(&entries[4 * i..4 * i + 4])).collect();
        if null {
            vs[0] = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
            if d > 1 {
                vs[1] = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
            }
        }
        let Ok(p) = SubspaceBasis::from_vectors(4, &vs) else { return Ok(()) };
        let perp = g_orthogonal_complement(&g, &p).unwrap();
        let mut both = p.matrix().clone().resize_horizontally(d + perp.dim(), 0.0);
        both.view_mut((0, d), (4, perp.dim())).copy_from(perp.matrix());
        let trivial = numerical_rank(&both, 1e-8) == 4;
        let gram_ok = g.gram(p.matrix()).determinant().abs() > 1e-4;
        prop_assume!(trivial == gram_ok);
        prop_assert_eq!(is_nondegenerate(&g, &p, 1e-8), trivial);
    }

    #[test]
    fn m_of_y_is_g_orthogonal_to_y(u in -0.5f64..0.5, w in -0.5f64..0.5, b in prop::collection::vec(-0.3f64..0.3, 3)) {
        let p = linear_y(1.0, u, w, b[0], b[1], b[2]);
        prop_assume!((0..=32).all(|i| p.gyy(i as f64 / 32.0) < -0.05));
        for i in 0..=32 {
            let t = i as f64 / 32.0;
            let m = p.m_of_y(t).unwrap();
            let y = p.y.eval(t);
            prop_assert!(p.g.inner(&m, &y).abs() <= 1e-12 * (1.0 + m.norm()) * y.norm());
        }
    }

    #[test]
    fn classification_scale_invariant(u in -0.5f64..0.5, b in prop::collection::vec(-0.3f64..0.3, 3), c in 0.01f64..100.0) {
        let base = linear_y(1.0, u, 0.0, b[0], b[1], b[2]);
        prop_assume!((0..=32).all(|i| base.gyy(i as f64 / 32.0) < -0.05));
        let scaled = linear_y(c, u, 0.0, c * b[0], c * b[1], c * b[2]);
        prop_assert_eq!(base.classify_y().unwrap().kind, scaled.classify_y().unwrap().kind);
    }

    #[test]
    fn perturbation_is_admissible(u in -0.5f64..0.5, c in 0.5f64..3.0) {
        let p = linear_y(c, u, 0.0, 0.0, 0.0, 0.0);
        let e = VectorCurve::constant(&DVector::from_vec(vec![0.0, 0.0, 1.0]));
        let r = SearchRange::new(-0.5, 0.5, 9);
        let (_, _, q) = p.perturb_to_admissible(&e, r, r).unwrap();
        let rep = q.validate();
        prop_assert!(rep.valid);
        prop_assert_eq!(rep.regime, Regime::Admissible);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sphere_focal_instants_are_multiples(root in 0.5f64..3.4) {
        let k = (root * PI).powi(2);
        let p = static_constant_curvature_problem(k);
        let rep = focal_instants(&p, DEFAULT_T_LO).unwrap();
        let expected: Vec<f64> = (1..).map(|m| m as f64 / root).take_while(|t| *t <= 1.0 - 1e-6).collect();
        prop_assert_eq!(rep.instants.len(), expected.len());
        for (got, want) in rep.instants.iter().zip(&expected) {
            prop_assert!((got.t0 - want).abs() < 1e-6);
            prop_assert_eq!(got.multiplicity, 1);
        }
    }

    #[test]
    fn multiplicity_matches_dense_svd(seed in 0u64..40) {
        let p = random_problem(seed, 2, 20.0).unwrap();
        let basis = p_jacobi_basis(&p, 1.0).unwrap();
        let rep = focal_instants(&p, DEFAULT_T_LO).unwrap();
        for inst in &rep.instants {
            let m = basis.values_at(inst.t0);
            let scales: Vec<f64> = basis.fields.iter().map(|f| f.max_norm()).collect();
            let normalised = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / scales[j]);
            let sv = normalised.singular_values();
            let small = sv.iter().filter(|s| **s <= 1e-6 * sv.max()).count();
            let rank = sv.len() - small;
            prop_assert_eq!(inst.multiplicity, m.ncols() - rank);
        }
    }

    #[test]
    fn pseudo_fields_conserve_constraint(seed in 0u64..40) {
        let p = random_problem(seed, 2, 20.0).unwrap();
        let y_max = (0..=256).map(|i| p.y.eval(i as f64 / 256.0).norm()).fold(0.0, f64::max);
        // a spline through samples of Y solves Y'' = R Y only to interpolation accuracy
        let tol = if p.y.is_sampled() { 1e-6 } else { p.tolerances.ode_tol };
        for f in pseudo_basis(&p).unwrap().fields {
            let s = &f.solution;
            prop_assert!(s.c_v.abs() <= 1e-10 * (1.0 + y_max));
            prop_assert!(s.c_drift <= tol * (1.0 + s.max_norm() * y_max));
        }
    }

    #[test]
    fn refined_integration_moves_instants_within_error(seed in 0u64..40) {
        let p = random_problem(seed, 2, 20.0).unwrap();
        let mut fine = p.clone();
        fine.tolerances.ode_steps *= 2;
        let a = focal_instants(&p, DEFAULT_T_LO).unwrap();
        let b = focal_instants(&fine, DEFAULT_T_LO).unwrap();
        prop_assert_eq!(a.instants.len(), b.instants.len());
        let basis = p_jacobi_basis(&p, 1.0).unwrap();
        let err = basis.fields.iter().map(|f| f.richardson_error).fold(0.0, f64::max);
        for (x, y) in a.instants.iter().zip(&b.instants) {
            let (_, d) = basis.eval(x.t0);
            let speed = d.column_iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min).max(1e-3);
            prop_assert!((x.t0 - y.t0).abs() <= 16.0 * err / speed + 4.0 * p.tolerances.bisect_tol);
        }
    }

    #[test]
    fn index_gap_and_space_dims(seed in 0u64..40, sigma in 0.05f64..1.0) {
        let p = random_problem(seed, 2, 20.0).unwrap();
        let h0 = constraint_kernel(&p, sigma, 32, SpaceKind::H0).unwrap();
        let hs = constraint_kernel(&p, sigma, 32, SpaceKind::HStar).unwrap();
        let d = hs.kernel_basis.ncols() as i64 - h0.kernel_basis.ncols() as i64;
        prop_assert!(d == 0 || d == 1);
        let mu = index_and_nullity(&p, sigma, 32, SpaceKind::HStar).unwrap().n_minus as i64;
        let mu0 = index_and_nullity(&p, sigma, 32, SpaceKind::H0).unwrap().n_minus as i64;
        prop_assert!((0..=1).contains(&(mu - mu0)));
    }

    #[test]
    fn congruence_leaves_index_unchanged(seed in 0u64..40, sigma in 0.1f64..1.0, entries in prop::collection::vec(-1.0f64..1.0, 16)) {
        let p = random_problem(seed, 2, 20.0).unwrap();
        let (_, a) = assemble_reparametrized_form(&p, sigma, 16).unwrap();
        let z = constraint_kernel(&p, sigma, 16, SpaceKind::H0).unwrap().kernel_basis;
        let reduced = z.transpose() * &a * &z;
        let q = random_orthogonal(z.ncols(), &entries);
        let rotated = q.transpose() * &reduced * &q;
        let i1 = inertia(&reduced, 1e-9).unwrap();
        let i2 = inertia(&((&rotated + rotated.transpose()) * 0.5), 1e-9).unwrap();
        prop_assert_eq!(i1, i2);
    }
}

#[test]
fn verify_is_deterministic() {
    let p = flat_admissible_problem();
    let a = serde_json::to_string(&verify(&p, 8, 16).unwrap()).unwrap();
    let b = serde_json::to_string(&verify(&p, 8, 16).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn grid_refinement_keeps_sphere_checks_passing() {
    let p = static_constant_curvature_problem((1.5 * PI).powi(2));
    for grid in [10, 20, 40] {
        let rep = verify(&p, grid, 32).unwrap();
        assert!(rep.index_theorem.pass && rep.jump_sum.pass, "grid {grid}: {rep:?}");
        assert!(rep.singular_reduction.unwrap().pass);
    }
}

#[test]
fn singular_pseudo_focal_matches_focal() {
    for root in [1.25, 1.5, 2.25] {
        let p = static_constant_curvature_problem((root * PI).powi(2));
        let f = focal_instants(&p, DEFAULT_T_LO).unwrap();
        let pf = morse_sturm::pseudo::pseudo_focal_instants(&p, DEFAULT_T_LO).unwrap();
        assert_eq!(f.instants.len(), pf.instants.len());
        for (a, b) in f.instants.iter().zip(&pf.instants) {
            assert!((a.t0 - b.t0).abs() < 1e-8);
            assert_eq!(a.multiplicity, b.multiplicity);
        }
    }
}

#[test]
fn riemannian_reduction_agrees_on_spheres() {
    for root in [1.25, 1.5] {
        let p = static_constant_curvature_problem((root * PI).powi(2));
        let star = index_and_nullity(&p, 1.0, 64, SpaceKind::HStar).unwrap();
        let riem = morse_sturm::index_form::riemannian_reduction_index(&p, &[0], 1.0, 64).unwrap();
        assert_eq!(star.n_minus, riem.n_minus);
    }
}

#[test]
fn random_problems_are_valid() {
    for seed in 0..10 {
        let p = random_problem(seed, 2, 20.0).unwrap();
        let rep = p.validate();
        assert!(rep.valid && rep.regime != Regime::None);
        assert_ne!(p.classify_y().unwrap().kind, YKind::Generic);
    }
}

#[test]
fn sampled_problems_survive_json_round_trip() {
    for seed in [0, 4, 11] {
        let p = random_problem(seed, 2, 20.0).unwrap();
        let back = MorseSturmProblem::from_json(&p.to_json()).unwrap();
        assert_eq!(back.to_json(), p.to_json());
        assert_eq!(back.y.eval(0.37), p.y.eval(0.37));
    }
}
