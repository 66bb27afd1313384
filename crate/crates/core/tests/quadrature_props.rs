use koopman_lyap::model::WeightFunction;
use koopman_lyap::quadrature::{composite_rule, gauss_legendre, tensor_grid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_rule_is_exact_to_degree_2n_minus_1(
        n in 1usize..40,
        a in -3.0..0.0f64,
        len in 0.1..4.0f64,
        frac in 0.0..1.0f64,
    ) {
        let b = a + len;
        let k = ((2 * n - 1) as f64 * frac).round() as i32;
        let rule = gauss_legendre(n, a, b).unwrap();
        let exact = (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64;
        let scale = a.abs().max(b.abs()).powi(k) * len;
        prop_assert!((rule.integrate(|x| x.powi(k)) - exact).abs() <= 1e-13 * scale);
    }

    #[test]
    fn gauss_rule_is_symmetric(n in 1usize..60, a in -3.0..3.0f64, len in 0.1..4.0f64) {
        let rule = gauss_legendre(n, a, a + len).unwrap();
        let mid = a + len / 2.0;
        for i in 0..n {
            let j = n - 1 - i;
            prop_assert!((rule.nodes[i] - mid + rule.nodes[j] - mid).abs() <= 1e-14 * (1.0 + mid.abs()) * 4.0);
            prop_assert!((rule.weights[i] - rule.weights[j]).abs() <= 1e-14 * len);
            prop_assert!(rule.weights[i] > 0.0);
        }
        prop_assert!((rule.weights.iter().sum::<f64>() - len).abs() <= 1e-13 * len);
    }

    #[test]
    fn composite_rule_integrates_piecewise_polynomials(cells in 1usize..8, n in 1usize..6) {
        let bp: Vec<f64> = (0..=cells).map(|i| -1.0 + 2.0 * i as f64 / cells as f64).collect();
        let rule = composite_rule(&bp, n).unwrap();
        prop_assert_eq!(rule.len(), cells * n);
        let k = 2 * n as i32 - 1;
        // |x|^k is polynomial on each cell when 0 is a breakpoint or outside the cell interior.
        if cells % 2 == 0 {
            let exact = 2.0 / (k + 1) as f64;
            prop_assert!((rule.integrate(|x| x.abs().powi(k)) - exact).abs() <= 1e-13);
        }
    }

    #[test]
    fn tensor_rule_factorizes_separable_integrands(
        n1 in 1usize..12,
        n2 in 1usize..12,
        p in 0i32..6,
        q in 0i32..6,
    ) {
        let r1 = gauss_legendre(n1, -1.0, 2.0).unwrap();
        let r2 = gauss_legendre(n2, 0.0, 1.5).unwrap();
        let grid = tensor_grid(&[r1.clone(), r2.clone()], &WeightFunction::constant(1.0).unwrap()).unwrap();
        let f = |x: f64| (x + 0.3).powi(p) + x.sin();
        let g = |y: f64| y.powi(q) * (1.0 - y).exp();
        let full = grid.integrate(|x| f(x[0]) * g(x[1]));
        let prod = r1.integrate(f) * r2.integrate(g);
        prop_assert!((full - prod).abs() <= 1e-13 * (1.0 + prod.abs()));
        prop_assert!((grid.measure() - 4.5).abs() <= 1e-13);
        let unit = grid.with_unit_measure();
        prop_assert!((unit.measure() - 1.0).abs() <= 1e-14);
    }
}
