//! Multistart optimization over measurement settings.
//!
//! Each restart runs nonlinear conjugate gradient from uniformly random
//! angles (one ChaCha stream per restart index, so results do not depend on
//! scheduling). Restarts run in parallel and are reduced in index order;
//! ties keep the lowest index.

mod cg;
mod oracle;
mod sweep;

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::bell_functionals::{BellFunctional, EfficiencyReport, FunctionalTerms};
use crate::qstate::{DensityMatrix, SettingsVector};

pub use oracle::{brute_force_oracle, refined_oracle, GridOptimum, MAX_GRID_POINTS};
pub use sweep::{
    linear_grid, log_grid, lowest_threshold_per_noise, sweep, sweep_with, Family, StartPolicy,
    SweepRow, ThresholdMinimum,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub restarts: usize,
    /// Central finite-difference step for gradients (radians).
    pub gradient_step: f64,
    /// Relative objective change below which a restart counts as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Also optimize the azimuth of every setting.
    pub allow_azimuth: bool,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            gradient_step: 1e-6,
            tolerance: 1e-10,
            max_iterations: 10_000,
            allow_azimuth: false,
            seed: 0,
        }
    }
}

impl OptimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return domain("at least one restart is required");
        }
        if !(self.tolerance > 0.0) {
            return domain(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !(self.gradient_step > 0.0 && self.gradient_step < 0.1) {
            return domain(format!(
                "gradient step must lie in (0, 0.1), got {}",
                self.gradient_step
            ));
        }
        if self.max_iterations == 0 {
            return domain("max_iterations must be positive");
        }
        Ok(())
    }

    fn cg(&self) -> cg::CgParams {
        cg::CgParams {
            gradient_step: self.gradient_step,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

/// Best configuration found by a multistart run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub settings: SettingsVector,
    pub report: EfficiencyReport,
    /// Position of the winning start (a warm start, when given, is position 0).
    pub restart: usize,
    /// Whether the winning restart met the tolerance before `max_iterations`.
    pub converged: bool,
    pub unconverged_restarts: usize,
}

impl Optimum {
    pub fn value(&self) -> f64 {
        self.report.value
    }

    pub fn eta_crit(&self) -> Option<f64> {
        self.report.eta_crit
    }

    /// Warning flag: the winning restart hit the iteration cap.
    pub fn warning(&self) -> bool {
        !self.converged
    }
}

#[derive(Clone, Copy)]
enum Objective {
    Value,
    Threshold,
}

impl Objective {
    /// Quantity minimized by conjugate gradient.
    fn loss(self, t: &FunctionalTerms) -> f64 {
        match self {
            Objective::Value => -t.value(),
            // Maximizing J/N minimizes the threshold N/J wherever J > 0 and
            // stays smooth across the violation boundary.
            Objective::Threshold => {
                if t.marginal_sum > 1e-300 {
                    -t.joint_sum / t.marginal_sum
                } else {
                    0.0
                }
            }
        }
    }
}

struct Problem<'a> {
    functional: &'a BellFunctional,
    rho: &'a DensityMatrix,
    settings: usize,
    azimuth: bool,
}

impl<'a> Problem<'a> {
    fn new(
        functional: &'a BellFunctional,
        rho: &'a DensityMatrix,
        opts: &OptimizeOptions,
    ) -> Result<Self> {
        opts.validate()?;
        let settings = functional.alice_settings();
        if functional.bob_settings() != settings || settings < 2 {
            return domain("optimization needs the same number (>= 2) of settings per party");
        }
        Ok(Self {
            functional,
            rho,
            settings,
            azimuth: opts.allow_azimuth,
        })
    }

    fn dimension(&self) -> usize {
        if self.azimuth {
            4 * self.settings
        } else {
            2 * self.settings
        }
    }

    fn settings_of(&self, angles: &[f64]) -> SettingsVector {
        SettingsVector::from_angles(angles, self.settings, self.azimuth)
            .expect("angle vector length fixed by dimension()")
    }

    fn terms(&self, angles: &[f64]) -> FunctionalTerms {
        self.functional
            .terms_from_table(&self.rho.probabilities(&self.settings_of(angles)))
    }

    /// Even streams draw uniform angles. Odd streams put every polar angle at
    /// its own log-uniform distance from a pole, close to a deterministic
    /// strategy, where weakly entangled states have narrow threshold basins.
    fn start(&self, seed: u64, stream: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let n = self.dimension();
        if stream % 2 == 0 {
            return (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        }
        let polar = 2 * self.settings;
        let same_pole = rng.random_bool(0.5);
        (0..n)
            .map(|i| {
                if i >= polar {
                    return rng.random_range(0.0..TAU);
                }
                let pole = if !same_pole && rng.random_bool(0.5) { PI } else { 0.0 };
                let offset = 10f64.powf(rng.random_range(-5.0..0.0));
                if rng.random_bool(0.5) {
                    pole + offset
                } else {
                    pole - offset
                }
            })
            .collect()
    }

    fn warm_angles(&self, warm: &SettingsVector) -> Result<Vec<f64>> {
        if warm.len() != self.settings {
            return domain(format!(
                "warm start has {} settings per party, expected {}",
                warm.len(),
                self.settings
            ));
        }
        Ok(warm.to_angles(self.azimuth))
    }
}

struct Run {
    settings: SettingsVector,
    terms: FunctionalTerms,
    converged: bool,
}

fn multistart(
    problem: &Problem<'_>,
    objective: Objective,
    opts: &OptimizeOptions,
    warm: Option<&SettingsVector>,
) -> Result<Vec<Run>> {
    let mut starts = Vec::with_capacity(opts.restarts + 1);
    if let Some(w) = warm {
        starts.push(problem.warm_angles(w)?);
    }
    starts.extend((0..opts.restarts as u64).map(|i| problem.start(opts.seed, i)));
    let params = opts.cg();
    Ok(starts
        .into_par_iter()
        .map(|x0| {
            let out = cg::minimize(|x| objective.loss(&problem.terms(x)), x0, params);
            Run {
                settings: problem.settings_of(&out.x),
                terms: problem.terms(&out.x),
                converged: out.converged,
            }
        })
        .collect())
}

fn finish(runs: &[Run], best: usize) -> Optimum {
    Optimum {
        settings: runs[best].settings.clone(),
        report: runs[best].terms.report(),
        restart: best,
        converged: runs[best].converged,
        unconverged_restarts: runs.iter().filter(|r| !r.converged).count(),
    }
}

/// Index of the first run minimizing `key`, skipping `None`s.
fn first_min<T>(runs: &[T], key: impl Fn(&T) -> Option<f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in runs.iter().enumerate() {
        if let Some(k) = key(r) {
            if best.map_or(true, |(_, b)| k < b) {
                best = Some((i, k));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Maximizes the functional's value at unit efficiency.
pub fn maximize_violation(
    f: &BellFunctional,
    rho: &DensityMatrix,
    opts: &OptimizeOptions,
) -> Result<Optimum> {
    maximize_violation_from(f, rho, opts, None)
}

/// As [`maximize_violation`], with an extra start at `warm` ahead of the
/// random restarts.
pub fn maximize_violation_from(
    f: &BellFunctional,
    rho: &DensityMatrix,
    opts: &OptimizeOptions,
    warm: Option<&SettingsVector>,
) -> Result<Optimum> {
    let problem = Problem::new(f, rho, opts)?;
    let runs = multistart(&problem, Objective::Value, opts, warm)?;
    let best = first_min(&runs, |r| Some(-r.terms.value())).expect("at least one restart");
    Ok(finish(&runs, best))
}

/// Minimizes the critical efficiency. Restarts that end without a violation
/// are infeasible; if all of them do, the result carries no threshold and the
/// settings with the largest joint-to-marginal ratio.
pub fn minimize_eta(
    f: &BellFunctional,
    rho: &DensityMatrix,
    opts: &OptimizeOptions,
) -> Result<Optimum> {
    minimize_eta_from(f, rho, opts, None)
}

pub fn minimize_eta_from(
    f: &BellFunctional,
    rho: &DensityMatrix,
    opts: &OptimizeOptions,
    warm: Option<&SettingsVector>,
) -> Result<Optimum> {
    let problem = Problem::new(f, rho, opts)?;
    let runs = multistart(&problem, Objective::Threshold, opts, warm)?;
    let best = first_min(&runs, |r| r.terms.eta_crit())
        .or_else(|| first_min(&runs, |r| Some(Objective::Threshold.loss(&r.terms))))
        .expect("at least one restart");
    Ok(finish(&runs, best))
}
