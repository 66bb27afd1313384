use std::collections::BTreeMap;
use std::sync::Arc;

use koopman_lyap::basis::{build_orthonormal_basis, DiscretizationSpec, OrthonormalBasis};
use koopman_lyap::gramian::{
    assemble_generator, assemble_observation, lyap_residual, solve_gramian, sos_eval, GramianSolution, SumOfSquares,
};
use koopman_lyap::linalg::{real_schur, sym_eig, DenseMatrix};
use koopman_lyap::model::{builtin_system, Problem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solved(p: &Problem, degree: usize, gauss: usize) -> (Arc<OrthonormalBasis>, GramianSolution) {
    let spec = DiscretizationSpec::legendre(2, degree, gauss).with_unit_measure();
    let onb = Arc::new(build_orthonormal_basis(&spec, &p.domain, &p.weight).unwrap());
    let gen = assemble_generator(&p.field, &onb).unwrap();
    let obs = assemble_observation(&p.cost, &onb).unwrap();
    let sol = solve_gramian(&gen, &obs).unwrap();
    (onb, sol)
}

fn random_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    sym_eig(&b.add(&b.transpose()).unwrap()).unwrap().vectors
}

fn linear2d(a: [f64; 4]) -> Option<Problem> {
    let params = BTreeMap::from([
        ("a11".to_string(), a[0]),
        ("a12".to_string(), a[1]),
        ("a21".to_string(), a[2]),
        ("a22".to_string(), a[3]),
    ]);
    builtin_system("linear2d", &params).ok()
}

/// Upper-triangular-dominant matrices with negative diagonal: stable, and the
/// unit box stays invariant when the off-diagonal coupling is weak.
fn hurwitz() -> impl Strategy<Value = [f64; 4]> {
    (-3.0..-0.5f64, -0.4..0.4f64, -0.4..0.4f64, -3.0..-0.5f64).prop_map(|(a, b, c, d)| [a, b, c, d])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generator_matrix_is_the_galerkin_form(a in hurwitz(), j in 0usize..15, k in 0usize..15) {
        let p = linear2d(a).unwrap();
        let (onb, _) = solved(&p, 3, 4);
        let gen = assemble_generator(&p.field, &onb).unwrap();
        let grid = onb.grid();
        let mut direct = 0.0;
        for q in 0..grid.len() {
            let x = grid.point(q);
            let (phi, grads) = onb.eval(x).unwrap();
            let fx = p.field.eval(x).unwrap();
            let lie: f64 = grads.iter().zip(&fx).map(|(g, f)| g[k] * f).sum();
            direct += grid.inner_weight(q) * phi[j] * lie;
        }
        prop_assert!((gen.k[(j, k)] - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn generator_spectrum_contains_the_linearization(a in hurwitz()) {
        let p = linear2d(a).unwrap();
        let (onb, _) = solved(&p, 3, 4);
        let gen = assemble_generator(&p.field, &onb).unwrap();
        let ks = real_schur(&gen.k).unwrap().eigenvalues();
        for e in real_schur(&p.field.linear_part()).unwrap().eigenvalues() {
            let nearest = ks.iter().map(|m| ((m.re - e.re).powi(2) + (m.im - e.im).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest <= 1e-8, "{e} missing, nearest distance {nearest:e}");
        }
    }

    #[test]
    fn gramian_is_psd_with_small_residual(a in hurwitz()) {
        let p = linear2d(a).unwrap();
        let onb = Arc::new(build_orthonormal_basis(&DiscretizationSpec::legendre(2, 4, 6), &p.domain, &p.weight).unwrap());
        let gen = assemble_generator(&p.field, &onb).unwrap();
        let obs = assemble_observation(&p.cost, &onb).unwrap();
        let sol = solve_gramian(&gen, &obs).unwrap();
        prop_assert!(lyap_residual(&gen, &obs, &sol).unwrap() <= 1e-10);
        prop_assert!(sol.max_clamp <= 1e-10 * sol.eigenvalues[0]);
        prop_assert!(sol.eigenvalues.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn value_is_invariant_under_orthogonal_reparameterization(seed in any::<u64>(), x in prop::array::uniform2(-1.0..1.0f64)) {
        let p = builtin_system("linear2d", &BTreeMap::new()).unwrap();
        let (onb, sol) = solved(&p, 4, 6);
        let sos = SumOfSquares::new(&sol, 1e-14).unwrap();
        let re = Arc::new(onb.reparameterized(&random_orthogonal(onb.rank(), seed)).unwrap());
        let gen = assemble_generator(&p.field, &re).unwrap();
        let obs = assemble_observation(&p.cost, &re).unwrap();
        let sos2 = SumOfSquares::new(&solve_gramian(&gen, &obs).unwrap(), 1e-14).unwrap();
        let (v1, v2) = (sos_eval(&sos, &x).unwrap().0, sos_eval(&sos2, &x).unwrap().0);
        prop_assert!((v1 - v2).abs() <= 1e-10 * (1.0 + v1.abs()));
    }
}

#[test]
fn truncation_error_is_the_dropped_eigenvalue_mass() {
    let p = builtin_system("vdp_modified", &BTreeMap::new()).unwrap();
    let (onb, sol) = solved(&p, 8, 12);
    let full = SumOfSquares::with_terms(&sol, onb.rank()).unwrap();
    let (vf, grid) = (full.eval_on_grid().unwrap(), onb.grid());
    for k in [1, 3, 10] {
        let part = SumOfSquares::with_terms(&sol, k).unwrap();
        let vp = part.eval_on_grid().unwrap();
        let dropped: f64 = sol.eigenvalues[k..].iter().sum();
        let mut mass = 0.0;
        for q in 0..grid.len() {
            assert!(vf[q] - vp[q] >= -1e-12 * vf[q].abs().max(1.0));
            mass += grid.inner_weight(q) * (vf[q] - vp[q]);
        }
        assert!((mass - dropped).abs() <= 1e-10 * sol.eigenvalues[0], "k = {k}: {mass} vs {dropped}");
    }
}

#[test]
fn sos_gradient_matches_finite_differences() {
    let p = builtin_system("vdp_modified", &BTreeMap::new()).unwrap();
    let (_, sol) = solved(&p, 8, 12);
    let sos = SumOfSquares::new(&sol, 1e-14).unwrap();
    proptest!(ProptestConfig::with_cases(32), |(x in prop::array::uniform2(-2.8..2.8f64))| {
        let (_, g) = sos_eval(&sos, &x).unwrap();
        let h = 1e-5;
        for k in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let fd = (sos_eval(&sos, &xp).unwrap().0 - sos_eval(&sos, &xm).unwrap().0) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-6 * (1.0 + g[k].abs()), "{fd} vs {}", g[k]);
        }
    });
}
