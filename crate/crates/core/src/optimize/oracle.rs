//! Exhaustive grid search over real-plane settings.
//!
//! For fixed Alice settings the functional splits into one term per Bob
//! setting, `<b_k| O_k |b_k>` with `O_k` a 2×2 operator, so each Bob angle is
//! scanned on its own axis. The result is the maximum over the full product
//! grid while only Alice's settings are enumerated jointly.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{domain, BellError, Result};
use crate::bell_functionals::BellFunctional;
use crate::qstate::{DensityMatrix, SettingsVector};

/// Cap on enumerated Alice grid points.
pub const MAX_GRID_POINTS: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub settings: SettingsVector,
    pub value: f64,
    /// Finest grid spacing used.
    pub step: f64,
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    start: f64,
    step: f64,
    count: usize,
}

impl Axis {
    fn full(step: f64) -> Self {
        let count = (TAU / step).ceil() as usize;
        Self {
            start: 0.0,
            step: TAU / count as f64,
            count,
        }
    }

    fn window(center: f64, half_width: f64, step: f64) -> Self {
        let count = (2.0 * half_width / step).round() as usize + 1;
        Self {
            start: center - half_width,
            step,
            count,
        }
    }

    fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }
}

/// Real symmetric 2×2 operator `[[d0, off], [off, d1]]`.
#[derive(Debug, Clone, Copy, Default)]
struct Op2 {
    d0: f64,
    d1: f64,
    off: f64,
}

impl Op2 {
    fn axpy(&mut self, c: f64, o: &Op2) {
        self.d0 += c * o.d0;
        self.d1 += c * o.d1;
        self.off += c * o.off;
    }
}

/// Half-angle weights `(cos^2, sin^2, 2 sin cos)` of a real ket.
fn weights(theta: f64) -> (f64, f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    (c * c, s * s, 2.0 * s * c)
}

struct Tables {
    /// `[alice setting][grid index]` -> Bob operator conditioned on Alice's
    /// projector (`Tr_A[(Pi_a ⊗ I) rho]`, real part).
    conditional: Vec<Vec<Op2>>,
    /// `[alice setting][grid index]` -> `p(a)`.
    alice_marginal: Vec<Vec<f64>>,
    /// `[bob setting][grid index]` -> weights.
    bob_weights: Vec<Vec<(f64, f64, f64)>>,
    bob_reduced: Op2,
}

fn tables(rho: &DensityMatrix, alice: &[Axis], bob: &[Axis]) -> Tables {
    let r = rho.entries();
    let re = |i, j| r[(i, j)].re;
    let conditional_op = |theta: f64| {
        let (s, c) = (theta / 2.0).sin_cos();
        let a = [c, s];
        let mut o = Op2::default();
        for x in 0..2 {
            for y in 0..2 {
                let w = a[x] * a[y];
                o.d0 += w * re(2 * x, 2 * y);
                o.d1 += w * re(2 * x + 1, 2 * y + 1);
                o.off += w * re(2 * x, 2 * y + 1);
            }
        }
        o
    };
    let ra = rho.reduced(crate::qstate::Party::Alice);
    let rb = rho.reduced(crate::qstate::Party::Bob);
    let alice_p = |theta: f64| {
        let (c2, s2, cs2) = weights(theta);
        c2 * ra[(0, 0)].re + s2 * ra[(1, 1)].re + cs2 * ra[(0, 1)].re
    };
    Tables {
        conditional: alice
            .iter()
            .map(|ax| (0..ax.count).map(|i| conditional_op(ax.at(i))).collect())
            .collect(),
        alice_marginal: alice
            .iter()
            .map(|ax| (0..ax.count).map(|i| alice_p(ax.at(i))).collect())
            .collect(),
        bob_weights: bob
            .iter()
            .map(|ax| (0..ax.count).map(|i| weights(ax.at(i))).collect())
            .collect(),
        bob_reduced: Op2 {
            d0: rb[(0, 0)].re,
            d1: rb[(1, 1)].re,
            off: rb[(0, 1)].re,
        },
    }
}

#[derive(Clone)]
struct Candidate {
    value: f64,
    alice: Vec<usize>,
    bob: Vec<usize>,
}

fn better(a: Option<Candidate>, b: Candidate) -> Option<Candidate> {
    match a {
        Some(a) if a.value >= b.value => Some(a),
        _ => Some(b),
    }
}

fn grid_search(
    f: &BellFunctional,
    rho: &DensityMatrix,
    alice: &[Axis],
    bob: &[Axis],
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let points = alice
        .iter()
        .map(|a| a.count as u128)
        .try_fold(1u128, |acc, c| acc.checked_mul(c))
        .unwrap_or(u128::MAX);
    if points > MAX_GRID_POINTS {
        return Err(BellError::GridTooLarge {
            points,
            limit: MAX_GRID_POINTS,
        });
    }
    let t = tables(rho, alice, bob);
    let ma = alice.len();
    let mb = bob.len();

    let scan_from = |first: usize| -> Option<Candidate> {
        let mut idx = vec![0usize; ma];
        idx[0] = first;
        let mut best: Option<Candidate> = None;
        let mut bob_best = vec![0usize; mb];
        loop {
            let mut value: f64 = (0..ma)
                .map(|j| f.alice_marginals()[j] * t.alice_marginal[j][idx[j]])
                .sum();
            for k in 0..mb {
                let mut op = Op2::default();
                op.axpy(f.bob_marginals()[k], &t.bob_reduced);
                for j in 0..ma {
                    let c = f.joint_coeff(j, k);
                    if c != 0.0 {
                        op.axpy(c, &t.conditional[j][idx[j]]);
                    }
                }
                let (mut top, mut arg) = (f64::NEG_INFINITY, 0);
                for (i, &(c2, s2, cs2)) in t.bob_weights[k].iter().enumerate() {
                    let v = c2 * op.d0 + s2 * op.d1 + cs2 * op.off;
                    if v > top {
                        top = v;
                        arg = i;
                    }
                }
                value += top;
                bob_best[k] = arg;
            }
            if best.as_ref().map_or(true, |b| value > b.value) {
                best = Some(Candidate {
                    value,
                    alice: idx.clone(),
                    bob: bob_best.clone(),
                });
            }
            // Odometer over Alice's remaining settings.
            let mut j = 1;
            loop {
                if j == ma {
                    return best;
                }
                idx[j] += 1;
                if idx[j] < alice[j].count {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    };

    let best = (0..alice[0].count)
        .into_par_iter()
        .map(scan_from)
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None, better)
        .expect("grid is non-empty");
    let thetas_a = best.alice.iter().zip(alice).map(|(&i, ax)| ax.at(i)).collect();
    let thetas_b = best.bob.iter().zip(bob).map(|(&i, ax)| ax.at(i)).collect();
    Ok((thetas_a, thetas_b, best.value))
}

fn check_shape(f: &BellFunctional) -> Result<usize> {
    let m = f.alice_settings();
    if f.bob_settings() != m || m < 2 {
        return domain("grid search needs the same number (>= 2) of settings per party");
    }
    Ok(m)
}

/// Maximum of the functional over a uniform grid of spacing at most
/// `grid_step` on every polar angle (azimuth fixed at zero).
pub fn brute_force_oracle(
    f: &BellFunctional,
    rho: &DensityMatrix,
    grid_step: f64,
) -> Result<GridOptimum> {
    let m = check_shape(f)?;
    if !(1e-3..=0.5).contains(&grid_step) {
        return domain(format!("grid step must lie in [1e-3, 0.5], got {grid_step}"));
    }
    let axis = Axis::full(grid_step);
    let (a, b, value) = grid_search(f, rho, &vec![axis; m], &vec![axis; m])?;
    Ok(GridOptimum {
        settings: SettingsVector::from_thetas(&a, &b)?,
        value,
        step: axis.step,
    })
}

/// Full grid at `coarse_step`, then repeated windows of ± the previous step
/// around the incumbent, each ten times finer, down to `fine_step`.
pub fn refined_oracle(
    f: &BellFunctional,
    rho: &DensityMatrix,
    coarse_step: f64,
    fine_step: f64,
) -> Result<GridOptimum> {
    let coarse = brute_force_oracle(f, rho, coarse_step)?;
    if !(fine_step > 0.0 && fine_step <= coarse.step) {
        return domain(format!(
            "fine step must lie in (0, {}], got {fine_step}",
            coarse.step
        ));
    }
    let mut alice: Vec<f64> = coarse.settings.alice.iter().map(|s| s.theta()).collect();
    let mut bob: Vec<f64> = coarse.settings.bob.iter().map(|s| s.theta()).collect();
    let mut value = coarse.value;
    let mut step = coarse.step;
    while step > fine_step * (1.0 + 1e-12) {
        let next = (step / 10.0).max(fine_step);
        let axes = |centers: &[f64]| -> Vec<Axis> {
            centers.iter().map(|&c| Axis::window(c, step, next)).collect()
        };
        let (a, b, v) = grid_search(f, rho, &axes(&alice), &axes(&bob))?;
        alice = a;
        bob = b;
        value = v;
        step = next;
    }
    Ok(GridOptimum {
        settings: SettingsVector::from_thetas(&alice, &bob)?,
        value,
        step,
    })
}
