use std::collections::BTreeMap;

use koopman_lyap::linalg::DenseMatrix;
use koopman_lyap::model::{builtin_system, PolynomialMap, WeightFunction};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_map_is_linear(
        a in prop::array::uniform4(-3.0..3.0f64),
        x in prop::array::uniform2(coord()),
        y in prop::array::uniform2(coord()),
        s in -2.0..2.0f64,
        t in -2.0..2.0f64,
    ) {
        let f = PolynomialMap::linear(&DenseMatrix::from_rows(&[[a[0], a[1]], [a[2], a[3]]]).unwrap());
        let z = [s * x[0] + t * y[0], s * x[1] + t * y[1]];
        let (fx, fy, fz) = (f.eval(&x).unwrap(), f.eval(&y).unwrap(), f.eval(&z).unwrap());
        for k in 0..2 {
            prop_assert!((fz[k] - s * fx[k] - t * fy[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn vdp_jacobian_matches_finite_differences(x in prop::array::uniform2(coord())) {
        let p = builtin_system("vdp_modified", &BTreeMap::new()).unwrap();
        let jac = p.field.jacobian(&x).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (p.field.eval(&xp).unwrap(), p.field.eval(&xm).unwrap());
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                prop_assert!((fd - jac[(i, k)]).abs() <= 1e-6 * (1.0 + jac[(i, k)].abs()));
            }
        }
    }

    #[test]
    fn cost_is_nonnegative_with_matching_gradient(x in prop::array::uniform2(coord())) {
        for name in ["linear2d", "vdp_modified", "port_hamiltonian_demo"] {
            let p = builtin_system(name, &BTreeMap::new()).unwrap();
            prop_assert!(p.cost.eval(&x).unwrap() >= 0.0);
            let g = p.cost.gradient(&x).unwrap();
            let h = 1e-6;
            for k in 0..2 {
                let (mut xp, mut xm) = (x, x);
                xp[k] += h;
                xm[k] -= h;
                let fd = (p.cost.eval(&xp).unwrap() - p.cost.eval(&xm).unwrap()) / (2.0 * h);
                prop_assert!((fd - g[k]).abs() <= 1e-6 * (1.0 + g[k].abs()));
            }
        }
    }

    #[test]
    fn weight_gradient_matches_finite_differences(
        x in prop::array::uniform2(coord()),
        c in prop::array::uniform2(-0.5..0.5f64),
    ) {
        prop_assume!(((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt() > 0.1);
        let ph = builtin_system("port_hamiltonian_demo", &BTreeMap::new()).unwrap();
        prop_assume!((x[0] * x[0] + x[1] * x[1]).sqrt() > 0.1);
        for w in [WeightFunction::inverse_norm(c.to_vec()), ph.weight.clone()] {
            let (_, g) = w.eval(&x).unwrap();
            let h = 1e-6;
            for k in 0..2 {
                let (mut xp, mut xm) = (x, x);
                xp[k] += h;
                xm[k] -= h;
                let fd = (w.eval(&xp).unwrap().0 - w.eval(&xm).unwrap().0) / (2.0 * h);
                prop_assert!((fd - g[k]).abs() <= 1e-5 * (1.0 + g[k].abs()), "{fd} vs {}", g[k]);
            }
            prop_assert!((w.squared(&x).unwrap() - w.eval(&x).unwrap().0.powi(2)).abs() <= 1e-12 * w.squared(&x).unwrap());
        }
    }
}
