//! Entanglement pumping on Bell-diagonal pairs.
//!
//! A pumping step consumes a fresh pair to test one error type of a kept
//! pair. Both registers apply a local C-NOT between their half of the kept
//! pair and their half of the fresh pair, measure the fresh half, and keep
//! the result only if the two outcomes agree.
//!
//! With each pair labelled by its (phase, bit) error bits relative to Φ⁺:
//!
//! * a **bit** step uses the kept pair as control and compares the fresh
//!   halves in the Z basis. It accepts when the bit parities agree, and
//!   the fresh phase error is copied onto the kept pair;
//! * a **phase** step uses the fresh pair as control and compares in the X
//!   basis. It accepts when the phase parities agree, and the fresh bit
//!   error is copied onto the kept pair.
//!
//! A faulty local C-NOT (probability `p_L` per register) replaces its two
//! qubits with the maximally mixed state, which leaves both pairs in a
//! uniformly random Bell state. Each compared readout is independently
//! wrong with probability `eps_M`.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::model::{Bell, BellDiagonalState, ErrorParams, NoiseKind, PumpSchedule};

/// Which error a pumping step tests for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpKind {
    Bit,
    Phase,
}

impl std::fmt::Display for PumpKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PumpKind::Bit => "bit",
            PumpKind::Phase => "phase",
        })
    }
}

/// How the steps of a trace were organized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpScheme {
    /// `n_b` bit steps with raw pairs, then `n_p` phase steps fed by
    /// bit-purified pairs.
    TwoLevel,
    /// Bit and phase steps alternating, always fed by raw pairs.
    Standard,
}

/// One post-selected pumping step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: PumpKind,
    pub state_before: BellDiagonalState,
    pub success_prob: f64,
    pub state_after_success: BellDiagonalState,
}

/// Deterministic sequence of pumping steps along the all-success path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpTrace {
    pub scheme: PumpScheme,
    pub schedule: PumpSchedule,
    pub steps: Vec<StepRecord>,
    pub final_state: BellDiagonalState,
    pub infidelity: f64,
}

impl PumpTrace {
    /// Acceptance probabilities of the steps of one kind, in order.
    pub fn success_probs(&self, kind: PumpKind) -> Vec<f64> {
        self.steps
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.success_prob)
            .collect()
    }

    /// Acceptance probabilities of every step, in order.
    pub fn all_success_probs(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.success_prob).collect()
    }
}

/// Signature shared by the recurrence and the density-matrix oracle.
pub type StepFn =
    fn(&BellDiagonalState, &BellDiagonalState, PumpKind, f64, f64) -> Result<StepRecord>;

/// Raw pair produced by the entanglement generation.
pub fn raw_pair(params: &ErrorParams) -> Result<BellDiagonalState> {
    let params = params.require_purifiable()?;
    let f = params.fidelity;
    match params.noise {
        NoiseKind::Depolarizing => BellDiagonalState::werner(f),
        NoiseKind::Dephasing => BellDiagonalState::new(f, 1.0 - f, 0.0, 0.0),
    }
}

/// Probability that a compared outcome pair disagrees purely because of
/// readout errors.
fn comparison_flip(eps_m: f64) -> f64 {
    2.0 * eps_m * (1.0 - eps_m)
}

/// One pumping step on Bell-diagonal inputs.
pub fn pump_step(
    target: &BellDiagonalState,
    fresh: &BellDiagonalState,
    kind: PumpKind,
    p_l: f64,
    eps_m: f64,
) -> Result<StepRecord> {
    let p_l = check_probability("p_L", p_l)?;
    let eps_m = check_probability("eps_M", eps_m)?;

    // Joint (kept, fresh) distribution after the bilateral C-NOT.
    let mut joint = [[0.0f64; 4]; 4];
    for k in Bell::ALL {
        for f in Bell::ALL {
            let w = target.get(k) * fresh.get(f);
            let (ka, kb, fa, fb) = (k.phase_bit(), k.flip_bit(), f.phase_bit(), f.flip_bit());
            let (kept, sacrificed) = match kind {
                PumpKind::Bit => (Bell::from_bits(ka ^ fa, kb), Bell::from_bits(fa, kb ^ fb)),
                PumpKind::Phase => (Bell::from_bits(ka, kb ^ fb), Bell::from_bits(ka ^ fa, fb)),
            };
            joint[kept.index()][sacrificed.index()] += w;
        }
    }

    // Either gate failing scrambles both pairs completely.
    let clean = (1.0 - p_l) * (1.0 - p_l);
    let scrambled = (1.0 - clean) / 16.0;

    let flip = comparison_flip(eps_m);
    let mut kept = [0.0f64; 4];
    for (k, row) in joint.iter().enumerate() {
        for (f, &w) in row.iter().enumerate() {
            let sacrificed = Bell::from_index(f);
            let parity = match kind {
                PumpKind::Bit => sacrificed.flip_bit(),
                PumpKind::Phase => sacrificed.phase_bit(),
            };
            let accept = if parity == 0 { 1.0 - flip } else { flip };
            kept[k] += (clean * w + scrambled) * accept;
        }
    }

    let success_prob: f64 = kept.iter().sum();
    if success_prob <= 0.0 {
        return Err(Error::NeverAccepted(kind.to_string()));
    }
    Ok(StepRecord {
        kind,
        state_before: *target,
        success_prob: success_prob.min(1.0),
        state_after_success: BellDiagonalState::from_weights(kept),
    })
}

/// Two-level pumping with the recurrence as the step map.
pub fn run_two_level(
    schedule: PumpSchedule,
    params: &ErrorParams,
    eps_m: f64,
) -> Result<PumpTrace> {
    run_two_level_with(pump_step, schedule, params, eps_m)
}

/// Two-level pumping with an arbitrary step map.
pub fn run_two_level_with(
    step: StepFn,
    schedule: PumpSchedule,
    params: &ErrorParams,
    eps_m: f64,
) -> Result<PumpTrace> {
    let raw = raw_pair(params)?;
    let mut steps = Vec::with_capacity((schedule.n_b + schedule.n_p) as usize);

    let mut keeper = raw;
    for _ in 0..schedule.n_b {
        let rec = step(&keeper, &raw, PumpKind::Bit, params.p_l, eps_m)?;
        keeper = rec.state_after_success;
        steps.push(rec);
    }

    let bit_purified = keeper;
    for _ in 0..schedule.n_p {
        let rec = step(&keeper, &bit_purified, PumpKind::Phase, params.p_l, eps_m)?;
        keeper = rec.state_after_success;
        steps.push(rec);
    }

    Ok(PumpTrace {
        scheme: PumpScheme::TwoLevel,
        schedule,
        steps,
        final_state: keeper,
        infidelity: keeper.infidelity(),
    })
}

/// Standard pumping: bit and phase steps alternate (starting with a bit
/// step) and every step consumes a raw pair.
pub fn run_standard(total_steps: u32, params: &ErrorParams, eps_m: f64) -> Result<PumpTrace> {
    let raw = raw_pair(params)?;
    let mut steps = Vec::with_capacity(total_steps as usize);
    let mut keeper = raw;
    for i in 0..total_steps {
        let kind = if i % 2 == 0 {
            PumpKind::Bit
        } else {
            PumpKind::Phase
        };
        let rec = pump_step(&keeper, &raw, kind, params.p_l, eps_m)?;
        keeper = rec.state_after_success;
        steps.push(rec);
    }
    Ok(PumpTrace {
        scheme: PumpScheme::Standard,
        schedule: PumpSchedule::new(total_steps.div_ceil(2), total_steps / 2),
        steps,
        final_state: keeper,
        infidelity: keeper.infidelity(),
    })
}

/// Leading-order infidelity of two-level pumping on Werner pairs.
pub fn closed_form_infidelity(
    schedule: PumpSchedule,
    params: &ErrorParams,
    eps_m: f64,
) -> Result<f64> {
    let params = params.validate()?;
    let eps_m = check_probability("eps_M", eps_m)?;
    if params.noise != NoiseKind::Depolarizing {
        return Err(Error::UnsupportedNoise(
            "closed-form infidelity assumes depolarized raw pairs",
        ));
    }
    let nb = schedule.n_b as f64;
    let np = schedule.n_p as f64;
    let e = 1.0 - params.fidelity;
    let gates = (3.0 + 2.0 * np) / 4.0 * params.p_l;
    let readout = (4.0 + 2.0 * (nb + np)) / 3.0 * e * eps_m;
    let bit = (np + 1.0) * (2.0 * e / 3.0).powi(schedule.n_b as i32 + 1);
    let phase = ((nb + 1.0) * e / 3.0).powi(schedule.n_p as i32 + 1);
    Ok(gates + readout + bit + phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dep(f: f64, p_l: f64) -> ErrorParams {
        ErrorParams::new(p_l, 0.05, 0.05, f, NoiseKind::Depolarizing).unwrap()
    }

    #[test]
    fn raw_pairs() {
        let w = raw_pair(&dep(0.95, 0.0)).unwrap();
        assert_relative_eq!(w.p_phi_minus(), 0.05 / 3.0, max_relative = 1e-14);
        assert_eq!(w.p_psi_plus(), w.p_psi_minus());
        let d = raw_pair(&dep(0.95, 0.0).with_noise(NoiseKind::Dephasing)).unwrap();
        assert_eq!(d.as_array(), [0.95, 1.0 - 0.95, 0.0, 0.0]);
        for noise in [NoiseKind::Depolarizing, NoiseKind::Dephasing] {
            let perfect = raw_pair(&dep(1.0, 0.0).with_noise(noise)).unwrap();
            assert_eq!(perfect, BellDiagonalState::PERFECT);
        }
        assert_eq!(raw_pair(&dep(0.4, 0.0)), Err(Error::Unpurifiable(0.4)));
    }

    #[test]
    fn perfect_pairs_are_fixed_points() {
        let p = BellDiagonalState::PERFECT;
        for kind in [PumpKind::Bit, PumpKind::Phase] {
            let rec = pump_step(&p, &p, kind, 0.0, 0.0).unwrap();
            assert_eq!(rec.success_prob, 1.0);
            assert_eq!(rec.state_after_success, p);
        }
    }

    #[test]
    fn noiseless_bit_step_on_werner_pairs() {
        // Hand expansion: accept iff bit parities agree; kept phase is the
        // XOR of both phases.
        let w = BellDiagonalState::werner(0.95).unwrap();
        let e = 0.05 / 3.0;
        let rec = pump_step(&w, &w, PumpKind::Bit, 0.0, 0.0).unwrap();
        let accept = (0.95 + e) * (0.95 + e) + (2.0 * e) * (2.0 * e);
        assert_relative_eq!(rec.success_prob, accept, max_relative = 1e-14);
        assert_relative_eq!(
            rec.state_after_success.fidelity(),
            (0.95 * 0.95 + e * e) / accept,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            rec.state_after_success.bit_error(),
            4.0 * e * e / accept,
            max_relative = 1e-14
        );
    }

    #[test]
    fn phase_step_suppresses_phase_errors() {
        for a in [0.55, 0.7, 0.9, 0.99] {
            let s = BellDiagonalState::new(a, 1.0 - a, 0.0, 0.0).unwrap();
            let rec = pump_step(&s, &s, PumpKind::Phase, 0.0, 0.0).unwrap();
            assert!(rec.state_after_success.p_phi_minus() < 1.0 - a);
            assert_eq!(rec.state_after_success.bit_error(), 0.0);
        }
    }

    #[test]
    fn bit_errors_fall_monotonically_with_bit_steps() {
        let params = dep(0.9, 0.0);
        let mut last = f64::INFINITY;
        for n_b in 0..8 {
            let t = run_two_level(PumpSchedule::new(n_b, 0), &params, 0.0).unwrap();
            let bit = t.final_state.bit_error();
            assert!(bit < last, "n_b = {n_b}");
            last = bit;
        }
    }

    #[test]
    fn no_pumping_leaves_raw_pair() {
        let params = dep(0.93, 1e-4);
        let t = run_two_level(PumpSchedule::new(0, 0), &params, 1e-3).unwrap();
        assert!(t.steps.is_empty());
        assert_relative_eq!(t.infidelity, 0.07, max_relative = 1e-12);
        let s = run_standard(0, &params, 1e-3).unwrap();
        assert_relative_eq!(s.infidelity, 0.07, max_relative = 1e-12);
    }

    #[test]
    fn trace_shape() {
        let t = run_two_level(PumpSchedule::new(3, 2), &dep(0.9, 1e-4), 1e-3).unwrap();
        assert_eq!(t.steps.len(), 5);
        assert_eq!(t.success_probs(PumpKind::Bit).len(), 3);
        assert_eq!(t.success_probs(PumpKind::Phase).len(), 2);
        assert_relative_eq!(
            t.infidelity,
            1.0 - t.final_state.fidelity(),
            epsilon = 1e-15
        );
        for s in &t.steps {
            assert!(s.success_prob > 0.0 && s.success_prob <= 1.0);
        }
        let kinds: Vec<_> = run_standard(5, &dep(0.9, 0.0), 0.0)
            .unwrap()
            .steps
            .iter()
            .map(|s| s.kind)
            .collect();
        use PumpKind::*;
        assert_eq!(kinds, vec![Bit, Phase, Bit, Phase, Bit]);
    }

    #[test]
    fn gate_error_coefficient_matches_leading_order() {
        // With perfect raw pairs only gate noise is left, and the kept pair
        // picks up (3 + 2 n_p)/4 p_L once both levels are present. Without
        // phase steps, repeated bit steps pile up uncorrected phase errors.
        let p_l = 1e-8;
        for (n_b, n_p) in (1..5)
            .flat_map(|b| (1..5).map(move |p| (b, p)))
            .chain([(1, 0)])
        {
            let params = dep(1.0, p_l);
            let t = run_two_level(PumpSchedule::new(n_b, n_p), &params, 0.0).unwrap();
            let expect = closed_form_infidelity(PumpSchedule::new(n_b, n_p), &params, 0.0).unwrap();
            assert_relative_eq!(t.infidelity, expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn closed_form_examples() {
        let cf = closed_form_infidelity(PumpSchedule::new(0, 0), &dep(0.95, 0.0), 0.0).unwrap();
        assert_relative_eq!(cf, 0.05 * 2.0 / 3.0 + 0.05 / 3.0, max_relative = 1e-14);
        assert_eq!(
            closed_form_infidelity(PumpSchedule::new(3, 7), &dep(1.0, 0.0), 0.0).unwrap(),
            0.0
        );
        // 13/4 1e-6 + 22/3 0.05 1.2e-5 + 6 (0.1/3)^5 + (0.25/3)^6
        let cf = closed_form_infidelity(PumpSchedule::new(4, 5), &dep(0.95, 1e-6), 1.2e-5).unwrap();
        let hand = 3.25e-6
            + 22.0 / 3.0 * 0.05 * 1.2e-5
            + 6.0 * (0.1f64 / 3.0).powi(5)
            + (0.25f64 / 3.0).powi(6);
        assert_relative_eq!(cf, hand, max_relative = 1e-14);
        assert_relative_eq!(cf, 8.2318e-6, max_relative = 1e-4);
        let err = closed_form_infidelity(
            PumpSchedule::new(1, 1),
            &dep(0.95, 0.0).with_noise(NoiseKind::Dephasing),
            0.0,
        );
        assert!(matches!(err, Err(Error::UnsupportedNoise(_))));
    }

    #[test]
    fn never_accepting_step_is_an_error() {
        let all_psi = BellDiagonalState::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let perfect = BellDiagonalState::PERFECT;
        let err = pump_step(&all_psi, &perfect, PumpKind::Bit, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::NeverAccepted(_)));
    }
}
