//! Detection-efficiency thresholds for Bell inequalities on noisy
//! two-qubit states.
//!
//! States are `alpha|00> - beta|11>` mixed with white noise. Functionals are
//! written in probability form with local bound zero, so a detection
//! efficiency `eta` turns a value into `eta^2 J - eta N` and the threshold is
//! `N / J`.
//!
//! ```
//! use bellscan::{chained_functional, make_pure_state, minimize_eta, OptimizeOptions};
//!
//! let ch = chained_functional(2)?;
//! let rho = make_pure_state(1.0)?.density_matrix();
//! let best = minimize_eta(&ch, &rho, &OptimizeOptions { restarts: 8, ..Default::default() })?;
//! assert!((best.eta_crit().unwrap() - 0.828427).abs() < 1e-5);
//! # Ok::<(), bellscan::BellError>(())
//! ```

pub mod bell_functionals;
pub mod ch_analytic;
pub mod error;
pub mod optimize;
pub mod poly;
pub mod qstate;

pub use bell_functionals::{
    chained_eta_with_noise, chained_functional, eta_closed_form, eta_lower_bound, eta_mes,
    i3322_functional, max_tolerated_noise, product_limit_angle, product_limit_settings,
    BellFunctional, EfficiencyReport, FunctionalKind, FunctionalTerms, VIOLATION_TOL,
};
pub use error::{BellError, Result};
pub use optimize::{
    brute_force_oracle, maximize_violation, maximize_violation_from, minimize_eta,
    minimize_eta_from, refined_oracle, sweep, sweep_with, Family, GridOptimum, OptimizeOptions,
    Optimum, StartPolicy, SweepRow,
};
pub use qstate::{
    apply_white_noise, make_pure_state, DensityMatrix, MeasurementSetting, Party, PureState,
    SettingsVector,
};
