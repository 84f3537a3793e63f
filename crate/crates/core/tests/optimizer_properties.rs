use bellscan::ch_analytic::{optimal_state, optimal_t};
use bellscan::optimize::{brute_force_oracle, refined_oracle};
use bellscan::{
    apply_white_noise, chained_functional, eta_closed_form, eta_mes, i3322_functional,
    make_pure_state, maximize_violation, minimize_eta, product_limit_angle,
    product_limit_settings, OptimizeOptions, PureState,
};

fn opts() -> OptimizeOptions {
    OptimizeOptions::default()
}

#[test]
fn optimizer_dominates_the_grid_oracle() {
    let cases = [
        (chained_functional(2).unwrap(), 0.05),
        (chained_functional(3).unwrap(), 0.15),
        (i3322_functional(), 0.15),
    ];
    for (f, step) in &cases {
        for (ratio, q) in [(1.0, 0.0), (0.3, 0.0), (0.05, 0.0), (0.6, 0.1)] {
            let rho = apply_white_noise(&make_pure_state(ratio).unwrap(), q).unwrap();
            let grid = brute_force_oracle(f, &rho, *step).unwrap();
            let best = maximize_violation(f, &rho, &opts()).unwrap();
            assert!(
                grid.value <= best.value() + 1e-9,
                "{:?} r={ratio} q={q}: {} > {}",
                f.kind(),
                grid.value,
                best.value()
            );
        }
    }
}

#[test]
fn ch_value_at_maximal_entanglement() {
    let f = chained_functional(2).unwrap();
    let rho = PureState::maximally_entangled().density_matrix();
    let refined = refined_oracle(&f, &rho, 0.05, 1e-3).unwrap();
    let best = maximize_violation(&f, &rho, &opts()).unwrap();
    assert!((best.value() - 0.207106781).abs() < 1e-8);
    assert!((refined.value - best.value()).abs() < 1e-5);
}

#[test]
fn weak_entanglement_weak_violation() {
    let f = chained_functional(2).unwrap();
    let rho = make_pure_state(1e-3).unwrap().density_matrix();
    let best = maximize_violation(&f, &rho, &opts()).unwrap();
    assert!(best.value() > 0.0 && best.value() < 1e-2);
    let grid = brute_force_oracle(&f, &rho, 0.01).unwrap();
    assert!(grid.value <= best.value() + 1e-9);
}

#[test]
fn product_state_never_violates() {
    let rho = PureState::product().density_matrix();
    for f in [chained_functional(2).unwrap(), chained_functional(3).unwrap(), i3322_functional()] {
        let best = maximize_violation(&f, &rho, &opts()).unwrap();
        assert!(best.value() <= 1e-9);
        assert_eq!(minimize_eta(&f, &rho, &opts()).unwrap().eta_crit(), None);
    }
}

#[test]
fn threshold_anchors() {
    let ch = chained_functional(2).unwrap();
    let mes = PureState::maximally_entangled().density_matrix();
    let eta = minimize_eta(&ch, &mes, &opts()).unwrap().eta_crit().unwrap();
    assert!((eta - 0.82843).abs() < 1e-4 && (eta - eta_mes(2)).abs() < 1e-9);

    let s3 = chained_functional(3).unwrap();
    let weak = make_pure_state(1e-3).unwrap();
    let eta = minimize_eta(&s3, &weak.density_matrix(), &opts()).unwrap().eta_crit().unwrap();
    assert!(eta > 0.8 && eta - 0.8 < 1e-3, "{eta}");

    let settings = product_limit_settings(&weak, 2).unwrap();
    let at = ch.critical_efficiency(&weak.density_matrix(), &settings).unwrap();
    let closed = eta_closed_form(2, product_limit_angle(&weak));
    assert!((at.eta_crit.unwrap() - closed).abs() < 1e-6);
}

#[test]
fn azimuth_does_not_help() {
    let cases = [
        (chained_functional(2).unwrap(), 0.4, 0.0),
        (chained_functional(3).unwrap(), 0.2, 0.05),
        (chained_functional(3).unwrap(), 1.0, 0.0),
        (i3322_functional(), 0.5, 0.0),
    ];
    for (f, ratio, q) in &cases {
        let rho = apply_white_noise(&make_pure_state(*ratio).unwrap(), *q).unwrap();
        let real = maximize_violation(f, &rho, &opts()).unwrap();
        let complex = OptimizeOptions {
            allow_azimuth: true,
            ..opts()
        };
        let az = maximize_violation(f, &rho, &complex).unwrap();
        assert!(az.value() <= real.value() + 1e-6, "{:?} r={ratio}", f.kind());
    }
}

#[test]
fn analytic_optimum_matches_the_optimizer_at_unit_efficiency() {
    let sol = optimal_state(1.0).unwrap().unwrap();
    let rho = make_pure_state(sol.schmidt_ratio).unwrap().density_matrix();
    let best = maximize_violation(&chained_functional(2).unwrap(), &rho, &opts()).unwrap();
    assert!((best.value() - sol.rotation.lambda).abs() < 1e-6);
}

/// The optimal state at efficiency `eta` violates at `eta`, so its numerical
/// threshold is at most `eta`; the analytic eigenvalue turns positive where
/// the numerical thresholds bottom out.
#[test]
fn analytic_sign_change_matches_numerical_thresholds() {
    let ch = chained_functional(2).unwrap();
    for i in 0..=6 {
        let eta = 0.7 + 0.05 * i as f64;
        let sol = optimal_state(eta).unwrap().unwrap();
        let rho = make_pure_state(sol.schmidt_ratio).unwrap().density_matrix();
        let crit = minimize_eta(&ch, &rho, &opts()).unwrap().eta_crit().unwrap();
        assert!(crit <= eta + 1e-9, "eta = {eta}: {crit}");
    }
    let flip = (0..=1000)
        .map(|k| 0.5 + k as f64 * 1e-3)
        .find(|&eta| optimal_t(eta).unwrap().is_some())
        .unwrap();
    let weak = make_pure_state(1e-3).unwrap().density_matrix();
    let crit = minimize_eta(&ch, &weak, &opts()).unwrap().eta_crit().unwrap();
    assert!((flip - crit).abs() <= 1e-3, "flip {flip} vs {crit}");
}
