//! Two-qubit states, white noise, projective settings and Born-rule
//! probabilities.
//!
//! Basis order is `|00>, |01>, |10>, |11>` with Alice's qubit first, so the
//! joint ket of settings `a` and `b` is `a ⊗ b`.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Tolerance for exact constructions (normalization, hermiticity, trace).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance on probabilities leaving `[0, 1]` and on negative eigenvalues.
pub const PROBABILITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real Schmidt-form state `alpha |00> - beta |11>` with `alpha, beta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    alpha: f64,
    beta: f64,
}

impl PureState {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha < 0.0 || beta < 0.0 {
            return domain(format!(
                "amplitudes must be finite and nonnegative, got ({alpha}, {beta})"
            ));
        }
        if (alpha * alpha + beta * beta - 1.0).abs() > CONSTRUCTION_TOL {
            return domain(format!("amplitudes ({alpha}, {beta}) are not normalized"));
        }
        Ok(Self { alpha, beta })
    }

    /// State with `alpha / beta = ratio`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        if !ratio.is_finite() || ratio <= 0.0 {
            return domain(format!("ratio must be positive and finite, got {ratio}"));
        }
        // Normalize with hypot so that very small or very large ratios keep
        // full relative precision.
        let norm = ratio.hypot(1.0);
        Ok(Self {
            alpha: ratio / norm,
            beta: 1.0 / norm,
        })
    }

    /// The product state `|11>` (`alpha = 0`).
    pub fn product() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
        }
    }

    pub fn maximally_entangled() -> Self {
        Self {
            alpha: std::f64::consts::FRAC_1_SQRT_2,
            beta: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `alpha / beta`; infinite for `beta = 0`.
    pub fn ratio(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn ket(&self) -> Vector4<Complex64> {
        Vector4::new(
            Complex64::new(self.alpha, 0.0),
            ZERO,
            ZERO,
            Complex64::new(-self.beta, 0.0),
        )
    }

    /// Von Neumann entropy (natural log) of either reduced state.
    pub fn entanglement_entropy(&self) -> f64 {
        [self.alpha, self.beta]
            .iter()
            .map(|a| a * a)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum()
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_parts(pure_projector(&self.ket()), 0.0)
    }
}

/// See [`PureState::from_ratio`].
pub fn make_pure_state(ratio: f64) -> Result<PureState> {
    PureState::from_ratio(ratio)
}

fn pure_projector(ket: &Vector4<Complex64>) -> Matrix4<Complex64> {
    ket * ket.adjoint()
}

/// Two-qubit density matrix, with the white-noise weight it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Matrix4<Complex64>,
    noise: f64,
    alice: Matrix2<Complex64>,
    bob: Matrix2<Complex64>,
}

impl DensityMatrix {
    /// Validates an arbitrary 4×4 matrix as a density matrix.
    pub fn new(entries: Matrix4<Complex64>) -> Result<Self> {
        let asym = (entries - entries.adjoint()).camax();
        if asym > CONSTRUCTION_TOL {
            return domain(format!("matrix is not Hermitian (deviation {asym:e})"));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > CONSTRUCTION_TOL || trace.im.abs() > CONSTRUCTION_TOL {
            return domain(format!("trace is {trace}, expected 1"));
        }
        let min_eig = SymmetricEigen::new(entries).eigenvalues.min();
        if min_eig < -PROBABILITY_TOL {
            return domain(format!("matrix has negative eigenvalue {min_eig:e}"));
        }
        Ok(Self::from_parts(entries, 0.0))
    }

    fn from_parts(entries: Matrix4<Complex64>, noise: f64) -> Self {
        let mut alice = Matrix2::zeros();
        let mut bob = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    alice[(i, j)] += entries[(2 * i + k, 2 * j + k)];
                    bob[(i, j)] += entries[(2 * k + i, 2 * k + j)];
                }
            }
        }
        Self {
            entries,
            noise,
            alice,
            bob,
        }
    }

    pub fn maximally_mixed() -> Self {
        Self::from_parts(Matrix4::identity() * Complex64::new(0.25, 0.0), 1.0)
    }

    pub fn entries(&self) -> &Matrix4<Complex64> {
        &self.entries
    }

    /// White-noise weight `q` used at construction (0 for pure or validated input).
    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn reduced(&self, party: Party) -> &Matrix2<Complex64> {
        match party {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// `Tr[rho (Pi_a ⊗ Pi_b)]`.
    pub fn joint_probability(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> f64 {
        expectation4(&self.entries, &kron(&a.ket(), &b.ket()))
    }

    pub fn marginal_probability(&self, s: &MeasurementSetting, party: Party) -> f64 {
        expectation2(self.reduced(party), &s.ket())
    }

    /// All joint and marginal probabilities for a settings vector.
    pub fn probabilities(&self, settings: &SettingsVector) -> ProbabilityTable {
        let alice_kets: Vec<_> = settings.alice.iter().map(MeasurementSetting::ket).collect();
        let bob_kets: Vec<_> = settings.bob.iter().map(MeasurementSetting::ket).collect();
        let mut joint = Vec::with_capacity(alice_kets.len() * bob_kets.len());
        for a in &alice_kets {
            for b in &bob_kets {
                joint.push(expectation4(&self.entries, &kron(a, b)));
            }
        }
        ProbabilityTable {
            bob_settings: bob_kets.len(),
            joint,
            alice: alice_kets
                .iter()
                .map(|k| expectation2(&self.alice, k))
                .collect(),
            bob: bob_kets.iter().map(|k| expectation2(&self.bob, k)).collect(),
        }
    }
}

/// `(1 - q) |psi><psi| + q/4 I`.
pub fn apply_white_noise(state: &PureState, q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("noise weight must lie in [0, 1], got {q}"));
    }
    let pure = pure_projector(&state.ket());
    if q == 0.0 {
        return Ok(DensityMatrix::from_parts(pure, 0.0));
    }
    let mixed = pure * Complex64::new(1.0 - q, 0.0)
        + Matrix4::identity() * Complex64::new(q / 4.0, 0.0);
    Ok(DensityMatrix::from_parts(mixed, q))
}

pub fn joint_probability(
    rho: &DensityMatrix,
    a: &MeasurementSetting,
    b: &MeasurementSetting,
) -> f64 {
    rho.joint_probability(a, b)
}

pub fn marginal_probability(rho: &DensityMatrix, s: &MeasurementSetting, party: Party) -> f64 {
    rho.marginal_probability(s, party)
}

fn kron(a: &Vector2<Complex64>, b: &Vector2<Complex64>) -> Vector4<Complex64> {
    Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
}

fn expectation4(m: &Matrix4<Complex64>, v: &Vector4<Complex64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut row = ZERO;
        for j in 0..4 {
            row += m[(i, j)] * v[j];
        }
        acc += (v[i].conj() * row).re;
    }
    acc
}

fn expectation2(m: &Matrix2<Complex64>, v: &Vector2<Complex64>) -> f64 {
    (v[0].conj() * (m[(0, 0)] * v[0] + m[(0, 1)] * v[1])
        + v[1].conj() * (m[(1, 0)] * v[0] + m[(1, 1)] * v[1]))
        .re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Projective measurement onto `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
///
/// Both angles are reduced modulo 2π; shifting `theta` by 2π only flips the
/// global sign of the ket, so the projector is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    theta: f64,
    phi: f64,
}

impl MeasurementSetting {
    /// Setting in the real x–z plane.
    pub fn new(theta: f64) -> Self {
        Self::with_azimuth(theta, 0.0)
    }

    pub fn with_azimuth(theta: f64, phi: f64) -> Self {
        Self {
            theta: theta.rem_euclid(TAU),
            phi: phi.rem_euclid(TAU),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn ket(&self) -> Vector2<Complex64> {
        let (s, c) = (self.theta / 2.0).sin_cos();
        if self.phi == 0.0 {
            Vector2::new(Complex64::new(c, 0.0), Complex64::new(s, 0.0))
        } else {
            Vector2::new(
                Complex64::new(c, 0.0),
                Complex64::from_polar(s, self.phi),
            )
        }
    }

    pub fn projector(&self) -> Matrix2<Complex64> {
        let k = self.ket();
        k * k.adjoint()
    }
}

/// One setting per measurement choice for each party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsVector {
    pub alice: Vec<MeasurementSetting>,
    pub bob: Vec<MeasurementSetting>,
}

impl SettingsVector {
    pub fn new(alice: Vec<MeasurementSetting>, bob: Vec<MeasurementSetting>) -> Result<Self> {
        if alice.len() != bob.len() || alice.len() < 2 {
            return domain(format!(
                "both parties need the same number (>= 2) of settings, got {} and {}",
                alice.len(),
                bob.len()
            ));
        }
        Ok(Self { alice, bob })
    }

    /// Real-plane settings from polar angles.
    pub fn from_thetas(alice: &[f64], bob: &[f64]) -> Result<Self> {
        Self::new(
            alice.iter().map(|&t| MeasurementSetting::new(t)).collect(),
            bob.iter().map(|&t| MeasurementSetting::new(t)).collect(),
        )
    }

    /// Number of settings per party.
    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    /// Exchanges the roles of Alice and Bob.
    pub fn swapped(&self) -> Self {
        Self {
            alice: self.bob.clone(),
            bob: self.alice.clone(),
        }
    }

    /// Flattened angles: Alice's thetas, Bob's thetas, then (with azimuth)
    /// Alice's phis and Bob's phis.
    pub fn to_angles(&self, with_azimuth: bool) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .alice
            .iter()
            .chain(&self.bob)
            .map(MeasurementSetting::theta)
            .collect();
        if with_azimuth {
            out.extend(self.alice.iter().chain(&self.bob).map(MeasurementSetting::phi));
        }
        out
    }

    /// Inverse of [`SettingsVector::to_angles`] for `m` settings per party.
    pub fn from_angles(angles: &[f64], m: usize, with_azimuth: bool) -> Result<Self> {
        let expected = if with_azimuth { 4 * m } else { 2 * m };
        if angles.len() != expected {
            return domain(format!(
                "expected {expected} angles for {m} settings per party, got {}",
                angles.len()
            ));
        }
        let setting = |i: usize| {
            let phi = if with_azimuth { angles[2 * m + i] } else { 0.0 };
            MeasurementSetting::with_azimuth(angles[i], phi)
        };
        Self::new((0..m).map(setting).collect(), (m..2 * m).map(setting).collect())
    }
}

/// Joint probabilities (row-major, Alice index first) and marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    bob_settings: usize,
    pub joint: Vec<f64>,
    pub alice: Vec<f64>,
    pub bob: Vec<f64>,
}

impl ProbabilityTable {
    /// `p(a_j b_k)` with zero-based indices.
    pub fn joint(&self, j: usize, k: usize) -> f64 {
        self.joint[j * self.bob_settings + k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn ratio_one_is_balanced() {
        let s = make_pure_state(1.0).unwrap();
        assert_abs_diff_eq!(s.alpha(), FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.beta(), FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn ratio_half() {
        let s = make_pure_state(0.5).unwrap();
        assert_abs_diff_eq!(s.alpha(), 1.0 / 5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.beta(), 2.0 / 5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn bad_ratios_rejected() {
        for r in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(make_pure_state(r).is_err(), "{r}");
        }
    }

    #[test]
    fn balanced_state_maximizes_entropy() {
        let best = make_pure_state(1.0).unwrap().entanglement_entropy();
        assert_abs_diff_eq!(best, 2f64.ln(), epsilon = 1e-15);
        for i in 1..=400 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 400.0);
            let e = make_pure_state(r).unwrap().entanglement_entropy();
            assert!(e <= best + 1e-15, "r = {r}");
        }
    }

    #[test]
    fn noise_limits() {
        let psi = make_pure_state(0.3).unwrap();
        let pure = apply_white_noise(&psi, 0.0).unwrap();
        assert_eq!(pure.entries(), psi.density_matrix().entries());
        let ev = pure.eigenvalues();
        assert_abs_diff_eq!(ev[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-12);

        let mixed = apply_white_noise(&psi, 1.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 0.25 } else { 0.0 };
                assert_abs_diff_eq!(mixed.entries()[(i, j)].re, expected, epsilon = 1e-16);
                assert_eq!(mixed.entries()[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn half_noise_spectrum() {
        let rho = apply_white_noise(&make_pure_state(1.0).unwrap(), 0.5).unwrap();
        let ev = rho.eigenvalues();
        for (got, want) in ev.iter().zip([0.125, 0.125, 0.125, 0.625]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_eq!(rho.noise(), 0.5);
    }

    #[test]
    fn noise_out_of_range() {
        let psi = PureState::maximally_entangled();
        assert!(apply_white_noise(&psi, -1e-9).is_err());
        assert!(apply_white_noise(&psi, 1.0 + 1e-9).is_err());
        assert!(apply_white_noise(&psi, f64::NAN).is_err());
    }

    #[test]
    fn born_rule_examples() {
        let zero = PureState::new(1.0, 0.0).unwrap().density_matrix();
        let up = MeasurementSetting::new(0.0);
        let down = MeasurementSetting::new(PI);
        assert_abs_diff_eq!(joint_probability(&zero, &up, &up), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(joint_probability(&zero, &up, &down), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            marginal_probability(&zero, &up, Party::Alice),
            1.0,
            epsilon = 1e-15
        );

        let mes = PureState::maximally_entangled().density_matrix();
        assert_abs_diff_eq!(joint_probability(&mes, &up, &up), 0.5, epsilon = 1e-15);

        let psi = make_pure_state(0.37).unwrap();
        assert_abs_diff_eq!(
            marginal_probability(&psi.density_matrix(), &up, Party::Alice),
            psi.alpha().powi(2),
            epsilon = 1e-15
        );

        let flat = DensityMatrix::maximally_mixed();
        let s = MeasurementSetting::with_azimuth(1.3, 0.4);
        for party in [Party::Alice, Party::Bob] {
            assert_abs_diff_eq!(marginal_probability(&flat, &s, party), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn validated_density_matrix() {
        let mut m = *PureState::maximally_entangled().density_matrix().entries();
        assert!(DensityMatrix::new(m).is_ok());
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        let doubled = *DensityMatrix::maximally_mixed().entries() * Complex64::new(2.0, 0.0);
        assert!(DensityMatrix::new(doubled).is_err());
        let neg = Matrix4::from_diagonal(&Vector4::new(1.5, -0.5, 0.0, 0.0)).map(Complex64::from);
        assert!(DensityMatrix::new(neg).is_err());
    }

    #[test]
    fn settings_vector_shape() {
        assert!(SettingsVector::from_thetas(&[0.0], &[0.0]).is_err());
        assert!(SettingsVector::from_thetas(&[0.0, 1.0], &[0.0]).is_err());
        let s = SettingsVector::from_thetas(&[0.1, 0.2, 0.3], &[1.0, 2.0, 3.0]).unwrap();
        let back = SettingsVector::from_angles(&s.to_angles(false), 3, false).unwrap();
        assert_eq!(s, back);
        assert!(SettingsVector::from_angles(&[0.0; 5], 3, false).is_err());
    }

    fn arb_state() -> impl Strategy<Value = PureState> {
        (1e-3f64..1e3).prop_map(|r| make_pure_state(r).unwrap())
    }

    fn arb_setting() -> impl Strategy<Value = MeasurementSetting> {
        (0.0..TAU, 0.0..TAU).prop_map(|(t, p)| MeasurementSetting::with_azimuth(t, p))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn projector_is_rank_one_idempotent(s in arb_setting()) {
            let p = s.projector();
            prop_assert!((p * p - p).camax() <= CONSTRUCTION_TOL);
            prop_assert!((p.trace().re - 1.0).abs() <= CONSTRUCTION_TOL);
            prop_assert!((p - p.adjoint()).camax() <= CONSTRUCTION_TOL);
        }

        #[test]
        fn joint_bounded_by_marginals(
            psi in arb_state(), q in 0.0f64..=1.0, a in arb_setting(), b in arb_setting()
        ) {
            let rho = apply_white_noise(&psi, q).unwrap();
            let j = rho.joint_probability(&a, &b);
            let pa = rho.marginal_probability(&a, Party::Alice);
            let pb = rho.marginal_probability(&b, Party::Bob);
            prop_assert!(j >= -PROBABILITY_TOL && j <= 1.0 + PROBABILITY_TOL);
            prop_assert!(j <= pa.min(pb) + PROBABILITY_TOL);
        }

        #[test]
        fn product_state_factorizes(a in arb_setting(), b in arb_setting()) {
            let rho = PureState::product().density_matrix();
            let j = rho.joint_probability(&a, &b);
            let pa = rho.marginal_probability(&a, Party::Alice);
            let pb = rho.marginal_probability(&b, Party::Bob);
            prop_assert!((j - pa * pb).abs() <= PROBABILITY_TOL);
        }

        #[test]
        fn noise_is_affine(psi in arb_state(), q in 0.0f64..=1.0, a in arb_setting(), b in arb_setting()) {
            let pure = psi.density_matrix();
            let flat = DensityMatrix::maximally_mixed();
            let rho = apply_white_noise(&psi, q).unwrap();
            let mix = |f: &dyn Fn(&DensityMatrix) -> f64| (1.0 - q) * f(&pure) + q * f(&flat);
            prop_assert!((rho.joint_probability(&a, &b) - mix(&|r| r.joint_probability(&a, &b))).abs() <= 1e-12);
            for party in [Party::Alice, Party::Bob] {
                let s = if party == Party::Alice { &a } else { &b };
                prop_assert!(
                    (rho.marginal_probability(s, party) - mix(&|r| r.marginal_probability(s, party))).abs() <= 1e-12
                );
            }
        }
    }
}
