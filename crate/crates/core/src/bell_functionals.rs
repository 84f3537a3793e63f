//! CH-type Bell functionals with local bound 0 and their detection
//! thresholds.
//!
//! A functional is a table of joint coefficients `c[j][k]` multiplying
//! `p(a_j b_k)` plus marginal coefficients for `p(a_j)` and `p(b_k)`. With a
//! symmetric, setting-independent detection efficiency `eta` and independent
//! losses, joint terms scale as `eta^2` and marginal terms as `eta`, so the
//! observed value is `eta^2 J - eta N`, where `J` is the signed joint sum and
//! `N` the weight of the (negative) marginal terms. The inequality is
//! violated exactly when `eta > N / J`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, BellError, Result};
use crate::qstate::{DensityMatrix, ProbabilityTable, PureState, SettingsVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionalKind {
    /// Chained inequality with the given number of settings per party.
    Chained(usize),
    I3322,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellFunctional {
    kind: FunctionalKind,
    alice_settings: usize,
    bob_settings: usize,
    joint: Vec<f64>,
    alice_marginals: Vec<f64>,
    bob_marginals: Vec<f64>,
}

/// Smallest unit-efficiency value counted as a violation; smaller positive
/// values are rounding noise.
pub const VIOLATION_TOL: f64 = 1e-12;

/// The two sums the efficiency analysis needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalTerms {
    /// `sum c_jk p(a_j b_k)`.
    pub joint_sum: f64,
    /// Minus the marginal part, `-(sum m_j p(a_j) + sum m_k p(b_k))`.
    pub marginal_sum: f64,
}

impl FunctionalTerms {
    /// Value at unit efficiency.
    pub fn value(&self) -> f64 {
        self.joint_sum - self.marginal_sum
    }

    pub fn value_at_efficiency(&self, eta: f64) -> f64 {
        eta * eta * self.joint_sum - eta * self.marginal_sum
    }

    /// `N / J`, or `None` unless `J - N` exceeds [`VIOLATION_TOL`] and `N > 0`.
    pub fn eta_crit(&self) -> Option<f64> {
        (self.value() > VIOLATION_TOL && self.marginal_sum > 0.0)
            .then(|| self.marginal_sum / self.joint_sum)
    }

    pub fn report(&self) -> EfficiencyReport {
        let value = self.value();
        EfficiencyReport {
            value,
            marginal_sum: self.marginal_sum,
            joint_sum: self.joint_sum,
            eta_crit: self.eta_crit(),
            violated_at_unit_eta: value > VIOLATION_TOL,
        }
    }
}

/// Value, sums and threshold of one (state, settings) configuration.
///
/// `eta_crit` is `None` when no efficiency produces a violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub value: f64,
    pub marginal_sum: f64,
    pub joint_sum: f64,
    pub eta_crit: Option<f64>,
    pub violated_at_unit_eta: bool,
}

impl BellFunctional {
    /// Builds a functional from a joint table indexed `[alice][bob]`.
    pub fn new(
        joint: Vec<Vec<f64>>,
        alice_marginals: Vec<f64>,
        bob_marginals: Vec<f64>,
    ) -> Result<Self> {
        Self::with_kind(FunctionalKind::Custom, joint, alice_marginals, bob_marginals)
    }

    fn with_kind(
        kind: FunctionalKind,
        joint: Vec<Vec<f64>>,
        alice_marginals: Vec<f64>,
        bob_marginals: Vec<f64>,
    ) -> Result<Self> {
        let ma = alice_marginals.len();
        let mb = bob_marginals.len();
        if ma == 0 || mb == 0 || joint.len() != ma || joint.iter().any(|row| row.len() != mb) {
            return domain(format!(
                "joint table must be {ma}x{mb} to match the marginal coefficients"
            ));
        }
        let joint: Vec<f64> = joint.into_iter().flatten().collect();
        if joint
            .iter()
            .chain(&alice_marginals)
            .chain(&bob_marginals)
            .any(|c| !c.is_finite())
        {
            return domain("coefficients must be finite");
        }
        Ok(Self {
            kind,
            alice_settings: ma,
            bob_settings: mb,
            joint,
            alice_marginals,
            bob_marginals,
        })
    }

    pub fn kind(&self) -> FunctionalKind {
        self.kind
    }

    pub fn alice_settings(&self) -> usize {
        self.alice_settings
    }

    pub fn bob_settings(&self) -> usize {
        self.bob_settings
    }

    /// Coefficient of `p(a_j b_k)`, zero-based.
    pub fn joint_coeff(&self, j: usize, k: usize) -> f64 {
        self.joint[j * self.bob_settings + k]
    }

    pub fn alice_marginals(&self) -> &[f64] {
        &self.alice_marginals
    }

    pub fn bob_marginals(&self) -> &[f64] {
        &self.bob_marginals
    }

    pub fn local_bound(&self) -> f64 {
        0.0
    }

    fn check_settings(&self, s: &SettingsVector) -> Result<()> {
        if s.alice.len() != self.alice_settings || s.bob.len() != self.bob_settings {
            return Err(BellError::DimensionMismatch {
                expected_alice: self.alice_settings,
                expected_bob: self.bob_settings,
                alice: s.alice.len(),
                bob: s.bob.len(),
            });
        }
        Ok(())
    }

    /// Sums from a precomputed probability table. The table must come from
    /// settings of matching shape.
    pub fn terms_from_table(&self, p: &ProbabilityTable) -> FunctionalTerms {
        let joint_sum = self
            .joint
            .iter()
            .zip(&p.joint)
            .map(|(c, p)| c * p)
            .sum::<f64>();
        let marginal = self
            .alice_marginals
            .iter()
            .zip(&p.alice)
            .chain(self.bob_marginals.iter().zip(&p.bob))
            .map(|(c, p)| c * p)
            .sum::<f64>();
        FunctionalTerms {
            joint_sum,
            marginal_sum: -marginal,
        }
    }

    pub fn terms(&self, rho: &DensityMatrix, s: &SettingsVector) -> Result<FunctionalTerms> {
        self.check_settings(s)?;
        Ok(self.terms_from_table(&rho.probabilities(s)))
    }

    /// Expectation value at unit detection efficiency.
    pub fn evaluate(&self, rho: &DensityMatrix, s: &SettingsVector) -> Result<f64> {
        Ok(self.terms(rho, s)?.value())
    }

    /// `eta^2 J - eta N`: the value seen with detection efficiency `eta`.
    pub fn value_at_efficiency(
        &self,
        rho: &DensityMatrix,
        s: &SettingsVector,
        eta: f64,
    ) -> Result<f64> {
        Ok(self.terms(rho, s)?.value_at_efficiency(eta))
    }

    pub fn critical_efficiency(
        &self,
        rho: &DensityMatrix,
        s: &SettingsVector,
    ) -> Result<EfficiencyReport> {
        Ok(self.terms(rho, s)?.report())
    }

    /// The functional with the parties exchanged.
    pub fn transposed(&self) -> Self {
        let mut joint = vec![0.0; self.joint.len()];
        for j in 0..self.alice_settings {
            for k in 0..self.bob_settings {
                joint[k * self.alice_settings + j] = self.joint_coeff(j, k);
            }
        }
        Self {
            kind: self.kind,
            alice_settings: self.bob_settings,
            bob_settings: self.alice_settings,
            joint,
            alice_marginals: self.bob_marginals.clone(),
            bob_marginals: self.alice_marginals.clone(),
        }
    }
}

/// Chained functional with `m` settings per party:
///
/// ```text
/// S_M = p(a_M b_M) + sum_{k=2}^{M} [p(a_k b_{k-1}) + p(a_{k-1} b_k)]
///       - p(a_1 b_1) - sum_{k=2}^{M} [p(a_k) + p(b_k)]
/// ```
///
/// `m = 2` is the Clauser–Horne inequality.
pub fn chained_functional(m: usize) -> Result<BellFunctional> {
    if m < 2 {
        return domain(format!("chained functional needs m >= 2, got {m}"));
    }
    let mut joint = vec![vec![0.0; m]; m];
    joint[m - 1][m - 1] += 1.0;
    for k in 1..m {
        joint[k][k - 1] += 1.0;
        joint[k - 1][k] += 1.0;
    }
    joint[0][0] -= 1.0;
    let mut marg = vec![-1.0; m];
    marg[0] = 0.0;
    BellFunctional::with_kind(FunctionalKind::Chained(m), joint, marg.clone(), marg)
}

/// I3322 in probability form:
///
/// ```text
///          A1  A2  A3
///         -1   0   0
///   B1 -2  1   1   1
///   B2 -1  1   1  -1
///   B3  0  1  -1   0
/// ```
pub fn i3322_functional() -> BellFunctional {
    // Indexed [alice][bob].
    let joint = vec![
        vec![1.0, 1.0, 1.0],
        vec![1.0, 1.0, -1.0],
        vec![1.0, -1.0, 0.0],
    ];
    BellFunctional::with_kind(
        FunctionalKind::I3322,
        joint,
        vec![-1.0, 0.0, 0.0],
        vec![-2.0, -1.0, 0.0],
    )
    .expect("static table is well formed")
}

/// Threshold of the chained inequality for the settings of
/// [`product_limit_settings`] at first-setting angle `theta`:
/// `(2M-2) / (2M-3 + 2 cos^2(theta/2))`.
pub fn eta_closed_form(m: usize, theta: f64) -> f64 {
    let m = m as f64;
    let c = (theta / 2.0).cos();
    (2.0 * m - 2.0) / (2.0 * m - 3.0 + 2.0 * c * c)
}

/// Best chained threshold with a maximally entangled state:
/// `(2M-2) / (M-1 + M cos(pi/2M))`.
pub fn eta_mes(m: usize) -> f64 {
    let m = m as f64;
    (2.0 * m - 2.0) / (m - 1.0 + m * (PI / (2.0 * m)).cos())
}

/// Infimum of the chained threshold over all states and settings,
/// `(2M-2) / (2M-1)`.
pub fn eta_lower_bound(m: usize) -> f64 {
    let m = m as f64;
    (2.0 * m - 2.0) / (2.0 * m - 1.0)
}

/// Largest white-noise weight that still allows a violation of the chained
/// inequality at unit efficiency, given its noiseless maximum `s_max`.
pub fn max_tolerated_noise(m: usize, s_max: f64) -> Result<f64> {
    if !(s_max > 0.0 && s_max.is_finite()) {
        return domain(format!("maximum violation must be positive, got {s_max}"));
    }
    Ok(2.0 * s_max / (2.0 * s_max + m as f64 - 1.0))
}

/// Chained threshold of the noisy state `(1-q)|psi><psi| + q/4 I` written in
/// terms of the noiseless value and marginal weight of `|psi>` with the same
/// settings. The returned ratio is only a threshold when it lies below 1.
pub fn chained_eta_with_noise(m: usize, q: f64, pure: &FunctionalTerms) -> f64 {
    let w = (m - 1) as f64;
    let odds = q / (1.0 - q);
    (pure.marginal_sum + odds * w) / (pure.value() + pure.marginal_sum + odds * w / 2.0)
}

/// First-setting angle with `tan^2(theta/2) = alpha/beta`.
pub fn product_limit_angle(state: &PureState) -> f64 {
    2.0 * state.ratio().sqrt().atan()
}

/// `a_1 = b_1` at [`product_limit_angle`] and every other setting on `|0>`,
/// which makes `p(a_1 b_1)` vanish.
pub fn product_limit_settings(state: &PureState, m: usize) -> Result<SettingsVector> {
    if m < 2 {
        return domain(format!("need m >= 2 settings, got {m}"));
    }
    let mut thetas = vec![0.0; m];
    thetas[0] = product_limit_angle(state);
    SettingsVector::from_thetas(&thetas, &thetas)
}
