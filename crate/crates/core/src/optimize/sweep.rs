//! Sweeps over the entanglement ratio and the noise weight.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::bell_functionals::{chained_functional, i3322_functional, BellFunctional};
use crate::qstate::{apply_white_noise, make_pure_state, SettingsVector};

use super::{maximize_violation_from, minimize_eta_from, OptimizeOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Chained inequalities with the listed numbers of settings.
    Chained(Vec<usize>),
    I3322,
}

impl Family {
    fn functionals(&self) -> Result<Vec<(usize, BellFunctional)>> {
        match self {
            Family::Chained(ms) => {
                if ms.is_empty() {
                    return domain("at least one M is required");
                }
                ms.iter().map(|&m| Ok((m, chained_functional(m)?))).collect()
            }
            Family::I3322 => Ok(vec![(3, i3322_functional())]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartPolicy {
    /// Seed each point with the optimum at the next larger ratio.
    Warm,
    /// Random restarts only.
    Cold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub q: f64,
    pub ratio: f64,
    /// Largest violation at unit efficiency.
    pub best_value: f64,
    /// `None` when no violation was found.
    pub best_eta_crit: Option<f64>,
    /// Angles of the threshold optimum, or of the value optimum when there is
    /// no violation, laid out as [`SettingsVector::to_angles`].
    pub settings: Vec<f64>,
    pub converged: bool,
}

/// [`sweep_with`] using warm starts.
pub fn sweep(
    family: &Family,
    ratios: &[f64],
    qs: &[f64],
    opts: &OptimizeOptions,
) -> Result<Vec<SweepRow>> {
    sweep_with(family, ratios, qs, opts, StartPolicy::Warm)
}

/// One row per `(M, q, ratio)`, ordered by M as listed, then q as listed,
/// then ratio ascending. Each `(M, q)` chain is walked from the largest ratio
/// down.
pub fn sweep_with(
    family: &Family,
    ratios: &[f64],
    qs: &[f64],
    opts: &OptimizeOptions,
    policy: StartPolicy,
) -> Result<Vec<SweepRow>> {
    opts.validate()?;
    if ratios.is_empty() || qs.is_empty() {
        return domain("sweep grids must be non-empty");
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return domain(format!("sweep ratios must lie in (0, 1], got {r}"));
    }
    if let Some(q) = qs.iter().find(|q| !(**q >= 0.0 && **q < 1.0)) {
        return domain(format!("noise weights must lie in [0, 1), got {q}"));
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    let functionals = family.functionals()?;
    let chains: Vec<(usize, &BellFunctional, f64)> = functionals
        .iter()
        .flat_map(|(m, f)| qs.iter().map(move |&q| (*m, f, q)))
        .collect();
    let rows = chains
        .par_iter()
        .map(|&(m, f, q)| chain(m, f, q, &sorted, opts, policy))
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn chain(
    m: usize,
    f: &BellFunctional,
    q: f64,
    ratios: &[f64],
    opts: &OptimizeOptions,
    policy: StartPolicy,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(ratios.len());
    let mut warm: Option<(SettingsVector, SettingsVector)> = None;
    for &ratio in ratios.iter().rev() {
        let rho = apply_white_noise(&make_pure_state(ratio)?, q)?;
        let (wv, we) = match (&warm, policy) {
            (Some((v, e)), StartPolicy::Warm) => (Some(v), Some(e)),
            _ => (None, None),
        };
        let value = maximize_violation_from(f, &rho, opts, wv)?;
        let eta = minimize_eta_from(f, &rho, opts, we)?;
        let (best_value, value_settings) = if eta.value() > value.value() {
            (eta.value(), &eta.settings)
        } else {
            (value.value(), &value.settings)
        };
        let settings = if eta.eta_crit().is_some() {
            &eta.settings
        } else {
            value_settings
        };
        rows.push(SweepRow {
            m,
            q,
            ratio,
            best_value,
            best_eta_crit: eta.eta_crit(),
            settings: settings.to_angles(opts.allow_azimuth),
            converged: value.converged && eta.converged,
        });
        warm = Some((value.settings, eta.settings));
    }
    rows.reverse();
    Ok(rows)
}

/// `steps` points from `min` to `max`, evenly spaced in the logarithm.
pub fn log_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && min <= max && max.is_finite()) {
        return domain(format!("log grid needs 0 < min <= max, got {min}:{max}"));
    }
    let logs = linear_grid(min.ln(), max.ln(), steps)?;
    let mut out: Vec<f64> = logs.into_iter().map(f64::exp).collect();
    out[0] = min;
    if let Some(last) = out.last_mut() {
        *last = max;
    }
    Ok(out)
}

/// `steps` evenly spaced points from `min` to `max` inclusive; a single step
/// yields `[min]`.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return domain("grid needs at least one step");
    }
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return domain(format!("grid needs finite min <= max, got {min}:{max}"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let h = (max - min) / (steps - 1) as f64;
    let mut out: Vec<f64> = (0..steps).map(|i| min + h * i as f64).collect();
    out[steps - 1] = max;
    Ok(out)
}

/// Lowest threshold over the ratio grid for one `(M, q)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMinimum {
    pub m: usize,
    pub q: f64,
    /// Argmin ratio; `None` when no row violates.
    pub ratio: Option<f64>,
    pub eta_crit: Option<f64>,
}

/// Groups consecutive rows by `(M, q)` and picks the smallest threshold in
/// each group; ties keep the smaller ratio.
pub fn lowest_threshold_per_noise(rows: &[SweepRow]) -> Vec<ThresholdMinimum> {
    let mut out: Vec<ThresholdMinimum> = Vec::new();
    for row in rows {
        let same = out
            .last()
            .is_some_and(|g| g.m == row.m && g.q.to_bits() == row.q.to_bits());
        if !same {
            out.push(ThresholdMinimum {
                m: row.m,
                q: row.q,
                ratio: None,
                eta_crit: None,
            });
        }
        let g = out.last_mut().expect("group pushed above");
        if let Some(eta) = row.best_eta_crit {
            if g.eta_crit.map_or(true, |best| eta < best) {
                g.eta_crit = Some(eta);
                g.ratio = Some(row.ratio);
            }
        }
    }
    out
}
