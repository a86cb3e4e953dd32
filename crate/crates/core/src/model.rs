//! Shared domain types: imperfection parameters, Bell-diagonal pairs,
//! pumping schedules, timings and the composed plan.
//!
//! Everything here is a plain immutable value. Constructors validate;
//! nothing in this module does physics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_probability, Error, Result};

/// Largest schedule searched per pumping level unless the caller says otherwise.
pub const DEFAULT_SEARCH_BOUND: u32 = 15;

/// Tolerance on the component sum of a Bell-diagonal state.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Noise that shaped the raw Bell pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// Werner-form raw pairs: the three error components are equal.
    Depolarizing,
    /// Raw pairs only carry a phase error (Φ⁻ component).
    Dephasing,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::Dephasing => "dephasing",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            "dephasing" => Ok(NoiseKind::Dephasing),
            other => Err(format!(
                "unknown noise kind `{other}` (expected depolarizing or dephasing)"
            )),
        }
    }
}

/// Imperfections of one register pair.
///
/// `p_l` is the failure probability of a local unitary, `p_i` and `p_m` the
/// raw initialization and measurement errors of the communication qubit and
/// `fidelity` the fidelity of a raw Bell pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorParams {
    #[serde(rename = "p_L")]
    pub p_l: f64,
    #[serde(rename = "p_I")]
    pub p_i: f64,
    #[serde(rename = "p_M")]
    pub p_m: f64,
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub noise: NoiseKind,
}

impl ErrorParams {
    pub fn new(p_l: f64, p_i: f64, p_m: f64, fidelity: f64, noise: NoiseKind) -> Result<Self> {
        ErrorParams {
            p_l,
            p_i,
            p_m,
            fidelity,
            noise,
        }
        .validate()
    }

    /// Returns a checked copy, or names the first offending field.
    pub fn validate(&self) -> Result<Self> {
        Ok(ErrorParams {
            p_l: check_probability("p_L", self.p_l)?,
            p_i: check_probability("p_I", self.p_i)?,
            p_m: check_probability("p_M", self.p_m)?,
            fidelity: check_probability("F", self.fidelity)?,
            noise: self.noise,
        })
    }

    /// Like [`validate`](Self::validate), but also rejects raw pairs that
    /// pumping cannot improve.
    pub fn require_purifiable(&self) -> Result<Self> {
        let params = self.validate()?;
        if params.fidelity <= 0.5 {
            return Err(Error::Unpurifiable(params.fidelity));
        }
        Ok(params)
    }

    pub fn with_noise(mut self, noise: NoiseKind) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_p_l(mut self, p_l: f64) -> Self {
        self.p_l = p_l;
        self
    }

    pub fn with_fidelity(mut self, fidelity: f64) -> Self {
        self.fidelity = fidelity;
        self
    }
}

/// The four Bell states, labelled by their (phase, bit) error bits relative
/// to Φ⁺.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    /// Component index: Φ⁺ = 0, Φ⁻ = 1, Ψ⁺ = 2, Ψ⁻ = 3.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Bell {
        Bell::ALL[index]
    }

    /// Phase-error bit: set for Φ⁻ and Ψ⁻.
    pub fn phase_bit(self) -> u8 {
        matches!(self, Bell::PhiMinus | Bell::PsiMinus) as u8
    }

    /// Bit-error bit: set for Ψ⁺ and Ψ⁻.
    pub fn flip_bit(self) -> u8 {
        matches!(self, Bell::PsiPlus | Bell::PsiMinus) as u8
    }

    pub fn from_bits(phase: u8, flip: u8) -> Bell {
        match (phase & 1, flip & 1) {
            (0, 0) => Bell::PhiPlus,
            (1, 0) => Bell::PhiMinus,
            (0, 1) => Bell::PsiPlus,
            _ => Bell::PsiMinus,
        }
    }
}

/// Two-qubit state diagonal in the Bell basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalState {
    p_phi_plus: f64,
    p_phi_minus: f64,
    p_psi_plus: f64,
    p_psi_minus: f64,
}

impl BellDiagonalState {
    /// The perfect pair Φ⁺.
    pub const PERFECT: BellDiagonalState = BellDiagonalState {
        p_phi_plus: 1.0,
        p_phi_minus: 0.0,
        p_psi_plus: 0.0,
        p_psi_minus: 0.0,
    };

    /// Builds a state from its four probabilities, renormalizing small
    /// rounding drift away.
    pub fn new(
        p_phi_plus: f64,
        p_phi_minus: f64,
        p_psi_plus: f64,
        p_psi_minus: f64,
    ) -> Result<Self> {
        Self::from_array([p_phi_plus, p_phi_minus, p_psi_plus, p_psi_minus])
    }

    pub fn from_array(components: [f64; 4]) -> Result<Self> {
        const NAMES: [&str; 4] = ["p_phi_plus", "p_phi_minus", "p_psi_plus", "p_psi_minus"];
        let mut clean = [0.0; 4];
        for (i, &value) in components.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::OutOfRange {
                    name: NAMES[i],
                    value,
                    reason: "not finite",
                });
            }
            if value < -NORMALIZATION_TOLERANCE {
                return Err(Error::OutOfRange {
                    name: NAMES[i],
                    value,
                    reason: "negative probability",
                });
            }
            clean[i] = value.max(0.0);
        }
        let total: f64 = clean.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange {
                name: "bell_state_sum",
                value: total,
                reason: "components must sum to 1",
            });
        }
        Ok(Self::normalized(clean, total))
    }

    /// Normalizes nonnegative weights with a positive total. Used after
    /// post-selection, where the weights are the accepted branch.
    pub(crate) fn from_weights(weights: [f64; 4]) -> Self {
        let clean = weights.map(|w| w.max(0.0));
        let total: f64 = clean.iter().sum();
        debug_assert!(total > 0.0, "post-selected branch has zero weight");
        Self::normalized(clean, total)
    }

    fn normalized(c: [f64; 4], total: f64) -> Self {
        BellDiagonalState {
            p_phi_plus: c[0] / total,
            p_phi_minus: c[1] / total,
            p_psi_plus: c[2] / total,
            p_psi_minus: c[3] / total,
        }
    }

    /// Werner state: fidelity `f`, remaining weight split evenly.
    pub fn werner(f: f64) -> Result<Self> {
        let f = check_probability("F", f)?;
        let e = (1.0 - f) / 3.0;
        Self::new(f, e, e, e)
    }

    pub fn fidelity(&self) -> f64 {
        self.p_phi_plus
    }

    pub fn infidelity(&self) -> f64 {
        self.p_phi_minus + self.p_psi_plus + self.p_psi_minus
    }

    pub fn p_phi_plus(&self) -> f64 {
        self.p_phi_plus
    }

    pub fn p_phi_minus(&self) -> f64 {
        self.p_phi_minus
    }

    pub fn p_psi_plus(&self) -> f64 {
        self.p_psi_plus
    }

    pub fn p_psi_minus(&self) -> f64 {
        self.p_psi_minus
    }

    /// Total Ψ weight (bit errors).
    pub fn bit_error(&self) -> f64 {
        self.p_psi_plus + self.p_psi_minus
    }

    /// Total weight carrying a phase error (Φ⁻ and Ψ⁻).
    pub fn phase_error(&self) -> f64 {
        self.p_phi_minus + self.p_psi_minus
    }

    pub fn get(&self, bell: Bell) -> f64 {
        self.as_array()[bell.index()]
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.p_phi_plus,
            self.p_phi_minus,
            self.p_psi_plus,
            self.p_psi_minus,
        ]
    }
}

/// Number of bit-pumping and phase-pumping steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PumpSchedule {
    pub n_b: u32,
    pub n_p: u32,
}

impl PumpSchedule {
    pub fn new(n_b: u32, n_p: u32) -> Self {
        PumpSchedule { n_b, n_p }
    }

    /// Checked constructor against a search bound.
    pub fn bounded(n_b: u32, n_p: u32, bound: u32) -> Result<Self> {
        if n_b > bound {
            return Err(Error::OutOfRange {
                name: "n_b",
                value: n_b as f64,
                reason: "exceeds schedule search bound",
            });
        }
        if n_p > bound {
            return Err(Error::OutOfRange {
                name: "n_p",
                value: n_p as f64,
                reason: "exceeds schedule search bound",
            });
        }
        Ok(Self::new(n_b, n_p))
    }

    /// Raw pairs consumed when every step succeeds.
    pub fn min_pairs(&self) -> u64 {
        (self.n_b as u64 + 1) * (self.n_p as u64 + 1)
    }
}

impl fmt::Display for PumpSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n_b, self.n_p)
    }
}

/// Majority-vote measurement setting and its resulting error and duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    /// Half-width of the vote: 2m+1 readouts.
    pub m: u32,
    pub eps_m: f64,
    /// Duration of the whole vote, seconds.
    pub t_robust_meas: f64,
}

/// Physical time scales, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalTimings {
    #[serde(rename = "t_L")]
    pub t_local: f64,
    pub tau: f64,
    pub eta: f64,
    #[serde(rename = "purcell_C")]
    pub purcell_c: f64,
    #[serde(rename = "t_I")]
    pub t_init: f64,
    #[serde(rename = "t_M")]
    pub t_meas: f64,
    #[serde(rename = "t_E")]
    pub t_ent: f64,
    pub t_mem: Option<f64>,
}

impl PhysicalTimings {
    pub fn validate(&self) -> Result<Self> {
        check_positive("t_L", self.t_local)?;
        check_positive("tau", self.tau)?;
        check_positive("t_I", self.t_init)?;
        check_positive("t_M", self.t_meas)?;
        check_positive("t_E", self.t_ent)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::OutOfRange {
                name: "eta",
                value: self.eta,
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.purcell_c.is_finite() && self.purcell_c >= 1.0) {
            return Err(Error::OutOfRange {
                name: "purcell_C",
                value: self.purcell_c,
                reason: "must be >= 1",
            });
        }
        if let Some(t_mem) = self.t_mem {
            check_positive("t_mem", t_mem)?;
        }
        Ok(*self)
    }
}

/// Output of the planner.
///
/// `t_robust_ent` and `t_C` are sized for the solved budget
/// `n_tot_budget`, so that a clock cycle covers every run that does not
/// count as a failure. The same quantities computed from the mean
/// consumption are kept in the `*_expected` fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub schedule: PumpSchedule,
    pub delta_min: f64,
    pub n_tot_budget: u64,
    pub expected_pairs: f64,
    pub eps_fail: f64,
    #[serde(rename = "eps_E")]
    pub eps_e: f64,
    pub t_robust_ent: f64,
    #[serde(rename = "t_C")]
    pub t_c: f64,
    pub gamma: f64,
    pub p_cnot_raw: f64,
    pub t_robust_ent_expected: f64,
    #[serde(rename = "t_C_expected")]
    pub t_c_expected: f64,
    #[serde(rename = "eps_M")]
    pub eps_m: f64,
    pub restart_mode: crate::markov::RestartMode,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_typical_params() {
        let p = ErrorParams::new(1e-4, 0.05, 0.05, 0.95, NoiseKind::Depolarizing).unwrap();
        assert_eq!(p.fidelity, 0.95);
        assert!(p.require_purifiable().is_ok());
    }

    #[test]
    fn rejects_fidelity_above_one() {
        let err = ErrorParams::new(1e-4, 0.05, 0.05, 1.2, NoiseKind::Depolarizing).unwrap_err();
        assert_eq!(err.field(), Some("F"));
        assert!(err.to_string().contains("F out of range"));
    }

    #[test]
    fn rejects_nan_and_infinity() {
        assert!(ErrorParams::new(f64::NAN, 0.0, 0.0, 0.9, NoiseKind::Dephasing).is_err());
        let err = ErrorParams::new(0.0, f64::INFINITY, 0.0, 0.9, NoiseKind::Dephasing).unwrap_err();
        assert_eq!(err.field(), Some("p_I"));
    }

    #[test]
    fn low_fidelity_is_valid_but_unpurifiable() {
        let p = ErrorParams::new(1e-4, 0.05, 0.05, 0.4, NoiseKind::Depolarizing).unwrap();
        assert_eq!(p.require_purifiable(), Err(Error::Unpurifiable(0.4)));
        let half = p.with_fidelity(0.5);
        assert!(half.require_purifiable().is_err());
    }

    #[test]
    fn bell_state_renormalizes_drift() {
        let s = BellDiagonalState::new(0.7 + 1e-13, 0.1, 0.1, 0.1).unwrap();
        let sum: f64 = s.as_array().iter().sum();
        assert!((sum - 1.0).abs() < NORMALIZATION_TOLERANCE);
        assert!(BellDiagonalState::new(0.7, 0.1, 0.1, 0.2).is_err());
        assert!(BellDiagonalState::new(1.1, -0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn bell_bits_round_trip() {
        for b in Bell::ALL {
            assert_eq!(Bell::from_bits(b.phase_bit(), b.flip_bit()), b);
            assert_eq!(Bell::from_index(b.index()), b);
        }
    }

    #[test]
    fn schedule_bound_is_enforced() {
        assert!(PumpSchedule::bounded(15, 15, DEFAULT_SEARCH_BOUND).is_ok());
        let err = PumpSchedule::bounded(16, 0, DEFAULT_SEARCH_BOUND).unwrap_err();
        assert_eq!(err.field(), Some("n_b"));
        assert_eq!(PumpSchedule::new(4, 5).min_pairs(), 30);
    }
}
