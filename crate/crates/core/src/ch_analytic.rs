//! Exact treatment of the two-setting (Clauser–Horne) operator with detection
//! efficiency.
//!
//! Alice's and Bob's second settings define the computational basis
//! (`Pi = |0><0|`); the first settings are reached by real rotations
//!
//! ```text
//! U(s) = [  sqrt(1-s)  sqrt(s)   ]
//!        [ -sqrt(s)    sqrt(1-s) ]
//! ```
//!
//! with `s` for Alice and `t` for Bob, so `s = sin^2(theta/2)` for the polar
//! angle `theta` of the first setting. The operator
//!
//! ```text
//! B = eta^2 (Pi_a2b2 + Pi_a2b1 + Pi_a1b2 - Pi_a1b1) - eta (Pi_a2 + Pi_b2)
//! ```
//!
//! has a positive eigenvalue exactly when some state violates the inequality
//! at efficiency `eta`. For `s = t` it block-diagonalizes in a Bell-type
//! basis: the antisymmetric state is an eigenvector with eigenvalue
//! `eta^2 t - eta`, and the other three eigenvalues solve a cubic.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::poly;

/// Efficiency and the two rotation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CHOperatorParams {
    eta: f64,
    s: f64,
    t: f64,
}

impl CHOperatorParams {
    pub fn new(eta: f64, s: f64, t: f64) -> Result<Self> {
        check_eta(eta)?;
        for (name, v) in [("s", s), ("t", t)] {
            if !(0.0..=1.0).contains(&v) {
                return domain(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(Self { eta, s, t })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return domain(format!("efficiency must lie in (0, 1], got {eta}"));
    }
    Ok(())
}

fn rotated_projector(x: f64) -> Matrix2<f64> {
    let (c, s) = ((1.0 - x).sqrt(), x.sqrt());
    Matrix2::new(c * c, c * s, c * s, s * s)
}

fn kron(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// The efficiency-weighted CH operator in the computational basis.
pub fn ch_operator(p: &CHOperatorParams) -> Matrix4<f64> {
    let pi = Matrix2::new(1.0, 0.0, 0.0, 0.0);
    let id = Matrix2::identity();
    let a1 = rotated_projector(p.s);
    let b1 = rotated_projector(p.t);
    let joint = kron(&pi, &pi) + kron(&pi, &b1) + kron(&a1, &pi) - kron(&a1, &b1);
    let marginal = kron(&pi, &id) + kron(&id, &pi);
    joint * (p.eta * p.eta) - marginal * p.eta
}

/// Characteristic polynomial `det(B - lambda I)`, coefficients of
/// `lambda^0 .. lambda^4`.
pub fn char_poly(p: &CHOperatorParams) -> [f64; 5] {
    let CHOperatorParams { eta: e, s, t } = *p;
    let st = s * t;
    let e2 = e * e;
    let e3 = e2 * e;
    [
        st * e2 * e3 * (-st * e3 + (s + t) * e * (2.0 * e - 1.0) - 3.0 * e + 2.0),
        2.0 * (e - 1.0) * e3 * (st * (e2 - e) - 1.0),
        -e2 * (4.0 * e - 5.0),
        -2.0 * e * (e - 2.0),
        1.0,
    ]
}

/// Monic cubic (coefficients of `lambda^0 .. lambda^3`) whose roots are the
/// three non-singlet eigenvalues at `s = t`.
pub fn bell_basis_cubic(eta: f64, t: f64) -> [f64; 4] {
    let e = eta;
    let e2 = e * e;
    let e3 = e2 * e;
    [
        e3 * (e3 * t * t * t - 3.0 * e2 * t * t + 2.0 * e * t * t),
        e2 * (e2 * (t * t - 2.0 * t) + 2.0 * e * (t - 1.0) + 2.0),
        e * (e * (t - 2.0) + 3.0),
        1.0,
    ]
}

/// Eigenvalue of the antisymmetric Bell state at `s = t`.
pub fn singlet_eigenvalue(eta: f64, t: f64) -> f64 {
    eta * eta * t - eta
}

/// Trigonometric solution of [`bell_basis_cubic`], branches `k = 0, 1, 2`
/// (arccos angle shifted by `2 pi k / 3`). Branch 0 is the largest root.
///
/// Returns `None` outside the real-root regime, i.e. when the radicand is not
/// positive or the arccos argument leaves `[-1, 1]` by more than rounding.
pub fn trig_roots(eta: f64, t: f64) -> Option<[f64; 3]> {
    let e = eta;
    let e2 = e * e;
    let radicand = 3.0 - 6.0 * e + (4.0 + 2.0 * t - 2.0 * t * t) * e2;
    if radicand <= 0.0 {
        return None;
    }
    let numerator = e
        * (9.0 - 18.0 * e + 8.0 * e2 - 10.0 * t * t * t * e2
            + 3.0 * t * (3.0 - 6.0 * e + 2.0 * e2)
            - 3.0 * t * t * (9.0 - 18.0 * e + 4.0 * e2));
    let arg = numerator / radicand.powf(1.5);
    if !arg.is_finite() || arg.abs() > 1.0 + 1e-12 {
        return None;
    }
    let angle = arg.clamp(-1.0, 1.0).acos() / 3.0;
    let center = -e * (3.0 + (t - 2.0) * e) / 3.0;
    let amplitude = 2.0 / 3.0 * e * radicand.sqrt();
    let branch = |k: f64| center + amplitude * (angle + 2.0 * PI * k / 3.0).cos();
    Some([branch(0.0), branch(1.0), branch(2.0)])
}

/// Spectrum of the `s = t` operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellBasisSpectrum {
    /// Cubic roots in descending order.
    pub cubic: [f64; 3],
    /// `eta^2 t - eta`.
    pub singlet: f64,
    /// Whether the cubic roots came from the trigonometric form rather than
    /// the general complex solution.
    pub trigonometric: bool,
}

impl BellBasisSpectrum {
    pub fn top(&self) -> f64 {
        self.cubic[0].max(self.singlet)
    }

    /// All four eigenvalues, descending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev = [self.cubic[0], self.cubic[1], self.cubic[2], self.singlet];
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// Eigenvalues of the `s = t` operator from the Bell-basis reduction.
pub fn bell_basis_eigenvalues(eta: f64, t: f64) -> Result<BellBasisSpectrum> {
    CHOperatorParams::new(eta, t, t)?;
    let (mut cubic, trigonometric) = match trig_roots(eta, t) {
        Some(r) => (r, true),
        None => {
            let c = bell_basis_cubic(eta, t);
            let z = poly::cubic_roots(c[2], c[1], c[0]);
            ([z[0].re, z[1].re, z[2].re], false)
        }
    };
    cubic.sort_by(|a, b| b.total_cmp(a));
    Ok(BellBasisSpectrum {
        cubic,
        singlet: singlet_eigenvalue(eta, t),
        trigonometric,
    })
}

/// Largest non-singlet eigenvalue at `s = t`.
pub fn top_cubic_eigenvalue(eta: f64, t: f64) -> Result<f64> {
    Ok(bell_basis_eigenvalues(eta, t)?.cubic[0])
}

/// Eigenvalue implied by stationarity in `t`:
/// `eta / (2 (eta-1)^2) (2 t^2 eta^3 - 3 t eta (2 eta - 1) + 3 eta - 2)`.
///
/// Singular at `eta = 1`.
pub fn stationary_eigenvalue(eta: f64, t: f64) -> f64 {
    let e = eta;
    e / (2.0 * (e - 1.0).powi(2))
        * (2.0 * t * t * e * e * e - 3.0 * t * e * (2.0 * e - 1.0) + 3.0 * e - 2.0)
}

/// Quartic in `t` (coefficients of `t^0 .. t^4`) whose roots include the
/// optimal rotation parameter at efficiency `eta`.
pub fn optimal_t_quartic(eta: f64) -> [f64; 5] {
    let e = eta;
    let e2 = e * e;
    let e4 = e2 * e2;
    let w = (2.0 * e - 1.0).powi(2);
    [
        -(e - 2.0) * w * (3.0 * e - 2.0),
        2.0 * w * (5.0 * e2 - 16.0 * e + 8.0),
        e2 * (4.0 * e4 - 48.0 * e2 * e + 156.0 * e2 - 132.0 * e + 33.0),
        4.0 * e4 * (2.0 * e2 - 10.0 * e + 5.0),
        4.0 * e4 * e2,
    ]
}

/// Optimal rotation parameter and the eigenvalue it produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalRotation {
    pub eta: f64,
    pub t: f64,
    pub lambda: f64,
}

impl OptimalRotation {
    /// Polar angle of the first setting, `2 asin(sqrt(t))`.
    pub fn theta(&self) -> f64 {
        2.0 * self.t.sqrt().asin()
    }
}

/// Picks, among the real roots of [`optimal_t_quartic`] in `[0, 1]`, the one
/// with the largest top eigenvalue (ties toward smaller `t`).
///
/// `Ok(None)` means no violation at this efficiency: either no admissible
/// root exists or the best eigenvalue is not positive.
pub fn optimal_t(eta: f64) -> Result<Option<OptimalRotation>> {
    check_eta(eta)?;
    let mut best: Option<OptimalRotation> = None;
    for root in poly::real_roots(&optimal_t_quartic(eta), 1e-6) {
        if !(-1e-9..=1.0 + 1e-9).contains(&root) {
            continue;
        }
        let t = root.clamp(0.0, 1.0);
        let lambda = top_cubic_eigenvalue(eta, t)?;
        if best.map_or(true, |b| lambda > b.lambda) {
            best = Some(OptimalRotation { eta, t, lambda });
        }
    }
    Ok(best.filter(|b| b.lambda > 0.0))
}

/// Top eigenpair of the optimal `s = t` operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub rotation: OptimalRotation,
    /// Dense spectrum, descending.
    pub eigenvalues: [f64; 4],
    /// Unit eigenvector of the largest eigenvalue, computational basis.
    pub state: [f64; 4],
    /// Smaller over larger Schmidt coefficient of `state`, in `[0, 1]`.
    pub schmidt_ratio: f64,
}

impl EigenSolution {
    pub fn residual(&self) -> f64 {
        let p = CHOperatorParams {
            eta: self.rotation.eta,
            s: self.rotation.t,
            t: self.rotation.t,
        };
        let v = Vector4::from(self.state);
        (ch_operator(&p) * v - v * self.eigenvalues[0]).norm()
    }
}

/// Smaller over larger singular value of the 2×2 coefficient matrix.
pub fn schmidt_ratio(state: &[f64; 4]) -> f64 {
    let c = Matrix2::new(state[0], state[1], state[2], state[3]);
    let sv = c.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

/// Optimal state at efficiency `eta`; `Ok(None)` when there is no violation.
pub fn optimal_state(eta: f64) -> Result<Option<EigenSolution>> {
    let Some(rotation) = optimal_t(eta)? else {
        return Ok(None);
    };
    let op = ch_operator(&CHOperatorParams::new(eta, rotation.t, rotation.t)?);
    let eig = SymmetricEigen::new(op);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvectors.column(order[0]).normalize();
    let state = [top[0], top[1], top[2], top[3]];
    Ok(Some(EigenSolution {
        rotation,
        eigenvalues: [
            eig.eigenvalues[order[0]],
            eig.eigenvalues[order[1]],
            eig.eigenvalues[order[2]],
            eig.eigenvalues[order[3]],
        ],
        schmidt_ratio: schmidt_ratio(&state),
        state,
    }))
}
