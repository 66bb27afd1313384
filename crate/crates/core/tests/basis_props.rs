use std::collections::BTreeMap;

use koopman_lyap::basis::{
    build_orthonormal_basis, project, shift_to_equilibrium, Basis1D, DiscretizationSpec, IndexSet, OrthonormalBasis,
    TensorBasis, DEFAULT_DROP_TOL,
};
use koopman_lyap::model::{builtin_system, WeightFunction};
use koopman_lyap::quadrature::{gauss_legendre, tensor_grid};
use proptest::prelude::*;

fn onb_on(factors: Vec<Basis1D>, half_width: f64, gauss: usize) -> OrthonormalBasis {
    let rule = gauss_legendre(gauss, -half_width, half_width).unwrap();
    let grid = tensor_grid(&[rule.clone(), rule], &WeightFunction::inverse_norm(vec![0.0, 0.0]))
        .unwrap()
        .with_unit_measure();
    let raw = shift_to_equilibrium(&TensorBasis::new(factors, IndexSet::Full).unwrap(), &[0.0, 0.0]).unwrap();
    OrthonormalBasis::new(raw, grid, DEFAULT_DROP_TOL).unwrap()
}

/// `Σ_j φ_j(x) φ_j(y)`: independent of the choice of orthonormal basis.
fn kernel(onb: &OrthonormalBasis, x: &[f64], y: &[f64]) -> f64 {
    let (a, _) = onb.eval(x).unwrap();
    let (b, _) = onb.eval(y).unwrap();
    a.iter().zip(&b).map(|(p, q)| p * q).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn whitened_basis_is_orthonormal(degree in 1usize..9, half_width in 0.5..3.0f64, extra in 1usize..4) {
        let p = builtin_system("linear2d", &BTreeMap::from([("half_width".to_string(), half_width)])).unwrap();
        let gauss = 2 * ((degree + 2 * extra) / 2 + 1);
        let onb = build_orthonormal_basis(&DiscretizationSpec::legendre(2, degree, gauss), &p.domain, &p.weight).unwrap();
        prop_assert_eq!(onb.rank(), (degree + 1) * (degree + 1) - 1);
        prop_assert!(onb.orthonormality_error().unwrap() <= 1e-10);
    }

    #[test]
    fn basis_gradients_match_finite_differences(degree in 1usize..7, x in prop::array::uniform2(-0.9..0.9f64)) {
        let onb = onb_on(vec![Basis1D::legendre(degree, -1.0, 1.0).unwrap(); 2], 1.0, 2 * degree + 2);
        let (_, grads) = onb.eval(&x).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let (vp, _) = onb.eval(&xp).unwrap();
            let (vm, _) = onb.eval(&xm).unwrap();
            for j in 0..onb.rank() {
                let fd = (vp[j] - vm[j]) / (2.0 * h);
                prop_assert!((fd - grads[k][j]).abs() <= 1e-5 * (1.0 + grads[k][j].abs()));
            }
        }
    }

    #[test]
    fn span_does_not_depend_on_raw_factors(
        degree in 1usize..6,
        x in prop::array::uniform2(-1.0..1.0f64),
        y in prop::array::uniform2(-1.0..1.0f64),
    ) {
        let gauss = 2 * degree + 2;
        let leg = onb_on(vec![Basis1D::legendre(degree, -1.0, 1.0).unwrap(); 2], 1.0, gauss);
        let mono = onb_on(vec![Basis1D::monomial(degree, -1.0, 1.0).unwrap(); 2], 1.0, gauss);
        prop_assert_eq!(leg.rank(), mono.rank());
        let (kl, km) = (kernel(&leg, &x, &y), kernel(&mono, &x, &y));
        prop_assert!((kl - km).abs() <= 1e-8 * (1.0 + kl.abs()), "{kl} vs {km}");
    }

    #[test]
    fn projection_reproduces_span_members(
        c in prop::array::uniform4(-1.0..1.0f64),
        x in prop::array::uniform2(-1.0..1.0f64),
    ) {
        let onb = onb_on(vec![Basis1D::legendre(3, -1.0, 1.0).unwrap(); 2], 1.0, 8);
        // Vanishes at the origin and has degree ≤ 3 in each variable.
        let u = |z: &[f64]| c[0] * z[0] + c[1] * z[0] * z[1] + c[2] * z[1].powi(3) + c[3] * z[0].powi(2) * z[1].powi(3);
        let samples: Vec<f64> = onb.grid().points().map(u).collect();
        let coeffs = project(&samples, &onb).unwrap();
        let (phi, _) = onb.eval(&x).unwrap();
        let approx: f64 = coeffs.iter().zip(&phi).map(|(a, p)| a * p).sum();
        prop_assert!((approx - u(&x)).abs() <= 1e-10);
    }

    #[test]
    fn bsplines_partition_unity(
        cuts in prop::collection::vec(0.01..1.0f64, 1..8),
        degree in 1usize..5,
        t in 0.0..1.0f64,
    ) {
        let mut bp = vec![0.0];
        for c in &cuts {
            bp.push(bp.last().unwrap() + c);
        }
        let b = Basis1D::bspline_clamped(&bp, degree).unwrap();
        let x = t * bp.last().unwrap();
        let mut vals = vec![0.0; b.count()];
        let mut ders = vec![0.0; b.count()];
        b.eval_all(x, &mut vals, &mut ders);
        prop_assert!((vals.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(vals.iter().all(|&v| v >= -1e-15));
        let scale: f64 = ders.iter().map(|d| d.abs()).sum::<f64>() + 1.0;
        prop_assert!(ders.iter().sum::<f64>().abs() <= 1e-10 * scale);
    }
}
