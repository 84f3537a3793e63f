use bellscan::ch_analytic::{
    bell_basis_eigenvalues, ch_operator, char_poly, optimal_state, optimal_t, singlet_eigenvalue,
    CHOperatorParams,
};
use bellscan::poly;
use nalgebra::{Matrix4, SymmetricEigen};
use proptest::prelude::*;

fn top_dense(eta: f64, s: f64, t: f64) -> f64 {
    let op = ch_operator(&CHOperatorParams::new(eta, s, t).unwrap());
    SymmetricEigen::new(op).eigenvalues.max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn char_poly_is_the_determinant(eta in 0.01f64..=1.0, s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let p = CHOperatorParams::new(eta, s, t).unwrap();
        let op = ch_operator(&p);
        let c = char_poly(&p);
        for i in 0..20 {
            let lambda = -2.5 + 0.25 * i as f64;
            let det = (op - Matrix4::identity() * lambda).determinant();
            let value = poly::eval(&c, lambda);
            let scale: f64 = c.iter().enumerate().map(|(k, ck)| (ck * lambda.powi(k as i32)).abs()).sum();
            prop_assert!((det - value).abs() <= 1e-8 * scale.max(det.abs()), "{det} vs {value}");
        }
    }

    #[test]
    fn equal_rotations_maximize_at_fixed_product(
        eta in 0.5001f64..=1.0, s in 0.0f64..=1.0, t in 0.0f64..=1.0,
    ) {
        let g = (s * t).sqrt();
        prop_assert!(top_dense(eta, g, g) >= top_dense(eta, s, t) - 1e-12);
    }

    #[test]
    fn singlet_eigenvalue_is_negative(eta in 1e-6f64..=1.0, t in 0.0f64..1.0) {
        prop_assert!(singlet_eigenvalue(eta, t) < 0.0);
        let spectrum = bell_basis_eigenvalues(eta, t).unwrap();
        prop_assert_eq!(spectrum.singlet, eta * eta * t - eta);
    }
}

#[test]
fn singlet_boundary_values() {
    assert_eq!(singlet_eigenvalue(1.0, 1.0), 0.0);
    assert_eq!(singlet_eigenvalue(1.0, 0.0), -1.0);
}

#[test]
fn optimum_never_improves_with_less_efficiency() {
    let mut prev = f64::INFINITY;
    for i in 0..=400 {
        let eta = 1.0 - i as f64 * 1e-3;
        let lambda = optimal_t(eta).unwrap().map_or(0.0, |o| o.lambda);
        assert!(lambda <= prev + 1e-12, "eta = {eta}");
        prev = lambda;
    }
}

#[test]
fn grid_argmax_of_the_top_eigenvalue() {
    for i in 0..20 {
        let eta = 0.68 + 0.32 * i as f64 / 19.0;
        let best = optimal_t(eta).unwrap().expect("violation above 2/3");
        let (mut arg, mut top) = (0.0, f64::NEG_INFINITY);
        for k in 0..=10_000 {
            let t = k as f64 * 1e-4;
            let l = bell_basis_eigenvalues(eta, t).unwrap().top();
            if l > top {
                top = l;
                arg = t;
            }
        }
        assert!((best.t - arg).abs() <= 1e-4, "eta = {eta}: {} vs {arg}", best.t);
        assert!(best.lambda >= top - 1e-12);
    }
}

#[test]
fn eigen_residuals() {
    for i in 0..=30 {
        let eta = 0.67 + 0.33 * i as f64 / 30.0;
        let sol = optimal_state(eta).unwrap().expect("violation above 2/3");
        assert!(sol.residual() <= 1e-9, "eta = {eta}");
        assert!((0.0..=1.0).contains(&sol.schmidt_ratio));
    }
    let top = optimal_state(1.0).unwrap().unwrap();
    assert!((top.schmidt_ratio - 1.0).abs() < 1e-6);
}
