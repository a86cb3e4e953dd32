//! Majority-vote (bit-verification) measurement of a register qubit.
//!
//! The auxiliary or storage qubit is copied onto the communication qubit
//! 2m+1 times and the optical readouts are combined by majority vote. The
//! vote fails when m+1 readouts are wrong, and each of the 2m+1 copy
//! gates adds local-gate error.

use crate::error::{check_probability, Error, Result};
use crate::model::{ErrorParams, MeasurementPlan, PhysicalTimings};

/// Default upper end of the repetition search.
pub const DEFAULT_M_MAX: u32 = 25;

/// Exact binomial coefficient while it fits in 128 bits.
fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) / i is always an integer at this point.
        acc = acc.checked_mul(n as u128 - k as u128 + i)? / i;
    }
    Some(acc)
}

/// C(n, k) as a float, falling back to log-space when the exact value
/// overflows.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    match binomial_exact(n, k) {
        Some(c) => c as f64,
        None => {
            let k = k.min(n - k);
            let ln: f64 = (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum();
            ln.exp()
        }
    }
}

/// Error probability of a (2m+1)-fold majority vote, clamped at 1.
pub fn measurement_error(m: u32, params: &ErrorParams) -> Result<f64> {
    let params = params.validate()?;
    let raw = params.p_i + params.p_m;
    if raw >= 1.0 {
        return Err(Error::OutOfRange {
            name: "p_I + p_M",
            value: raw,
            reason: "raw readout error must be < 1",
        });
    }
    let m = m as u64;
    let vote = binomial(2 * m + 1, m + 1) * raw.powi((m + 1) as i32);
    let gates = (2 * m + 1) as f64 / 2.0 * params.p_l;
    Ok((vote + gates).min(1.0))
}

/// Wall time of a (2m+1)-fold majority vote, seconds.
pub fn measurement_time(m: u32, timings: &PhysicalTimings) -> f64 {
    (2 * m as u64 + 1) as f64 * (timings.t_init + timings.t_local + timings.t_meas)
}

/// Repetition count in `0..=m_max` with the smallest vote error. Ties go
/// to the smaller count, which is also the faster one.
///
/// The returned plan is untimed (`t_robust_meas == 0`); see
/// [`MeasurementPlan::timed`].
pub fn optimal_m(params: &ErrorParams, m_max: u32) -> Result<MeasurementPlan> {
    let mut best = MeasurementPlan {
        m: 0,
        eps_m: measurement_error(0, params)?,
        t_robust_meas: 0.0,
    };
    for m in 1..=m_max {
        let eps_m = measurement_error(m, params)?;
        if eps_m < best.eps_m {
            best = MeasurementPlan {
                m,
                eps_m,
                t_robust_meas: 0.0,
            };
        }
    }
    Ok(best)
}

/// Optimal vote together with its duration.
pub fn robust_measurement(
    params: &ErrorParams,
    timings: &PhysicalTimings,
    m_max: u32,
) -> Result<MeasurementPlan> {
    Ok(optimal_m(params, m_max)?.timed(timings))
}

impl MeasurementPlan {
    /// A plan with a fixed, externally supplied error (for instance a
    /// measured readout fidelity) and repetition count.
    pub fn fixed(m: u32, eps_m: f64, timings: &PhysicalTimings) -> Result<Self> {
        Ok(MeasurementPlan {
            m,
            eps_m: check_probability("eps_M", eps_m)?,
            t_robust_meas: measurement_time(m, timings),
        })
    }

    pub fn timed(mut self, timings: &PhysicalTimings) -> Self {
        self.t_robust_meas = measurement_time(self.m, timings);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseKind;
    use approx::assert_relative_eq;

    fn params(p_l: f64, p_io: f64) -> ErrorParams {
        ErrorParams::new(p_l, p_io, p_io, 0.95, NoiseKind::Depolarizing).unwrap()
    }

    fn timings(t_io: f64, t_l: f64) -> PhysicalTimings {
        PhysicalTimings {
            t_local: t_l,
            tau: 10e-9,
            eta: 0.2,
            purcell_c: 10.0,
            t_init: t_io,
            t_meas: t_io,
            t_ent: 360e-9,
            t_mem: None,
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(13, 7), 1716.0);
        assert_eq!(binomial(21, 11), 352_716.0);
        assert_eq!(binomial(61, 31), 232_714_176_627_630_544.0);
        assert_eq!(binomial(5, 6), 0.0);
        // Past u128 range the log-space path takes over.
        let big = binomial(201, 101);
        assert_relative_eq!(big.ln(), 136.4414, epsilon = 1e-3);
    }

    #[test]
    fn six_fold_vote_at_1e4() {
        let eps = measurement_error(6, &params(1e-4, 0.05)).unwrap();
        assert_relative_eq!(eps, 1716.0 * 1e-7 + 6.5e-4, max_relative = 1e-12);
        assert_relative_eq!(eps, 8.216e-4, max_relative = 1e-12);
    }

    #[test]
    fn error_free_inputs_give_zero() {
        assert_eq!(measurement_error(0, &params(0.0, 0.0)).unwrap(), 0.0);
        let plan = optimal_m(&params(0.0, 0.0), DEFAULT_M_MAX).unwrap();
        assert_eq!((plan.m, plan.eps_m), (0, 0.0));
    }

    #[test]
    fn single_readout_is_raw_error_plus_half_gate() {
        let p = ErrorParams::new(3e-3, 0.02, 0.07, 0.9, NoiseKind::Dephasing).unwrap();
        assert_eq!(
            measurement_error(0, &p).unwrap(),
            (0.02 + 0.07) + 3e-3 / 2.0
        );
    }

    #[test]
    fn optimal_repetitions_match_reported_choices() {
        // The exact minimizers sit one above the commonly quoted m = 6 and
        // m = 10, which are within 1% and 10% of the optimum respectively.
        let plan = optimal_m(&params(1e-4, 0.05), DEFAULT_M_MAX).unwrap();
        assert_eq!(plan.m, 7);
        // 6435 * 0.1^8 + 7.5e-4
        assert_relative_eq!(plan.eps_m, 8.1435e-4, max_relative = 1e-9);
        let six = measurement_error(6, &params(1e-4, 0.05)).unwrap();
        assert!(six > plan.eps_m && six < 1.01 * plan.eps_m);

        let plan = optimal_m(&params(1e-6, 0.05), DEFAULT_M_MAX).unwrap();
        assert_eq!(plan.m, 11);
        // 1352078 * 0.1^12 + 11.5e-6
        assert_relative_eq!(plan.eps_m, 1.2852078e-5, max_relative = 1e-9);
        // 352716 * 0.1^11 + 10.5e-6
        let ten = measurement_error(10, &params(1e-6, 0.05)).unwrap();
        assert_relative_eq!(ten, 1.402716e-5, max_relative = 1e-9);
    }

    #[test]
    fn rejects_saturated_readout() {
        let p = ErrorParams::new(0.0, 0.5, 0.5, 0.9, NoiseKind::Dephasing).unwrap();
        let err = measurement_error(3, &p).unwrap_err();
        assert_eq!(err.field(), Some("p_I + p_M"));
    }

    #[test]
    fn clamps_absurd_inputs() {
        let p = ErrorParams::new(1.0, 0.45, 0.45, 0.9, NoiseKind::Dephasing).unwrap();
        assert_eq!(measurement_error(10, &p).unwrap(), 1.0);
    }

    #[test]
    fn vote_duration() {
        let t = timings(13.4e-9, 100e-9);
        assert_relative_eq!(measurement_time(0, &t), 126.8e-9, max_relative = 1e-12);
        assert_relative_eq!(
            measurement_time(6, &t),
            13.0 * 126.8e-9,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            measurement_time(10, &t),
            21.0 * 126.8e-9,
            max_relative = 1e-12
        );
        let plan = robust_measurement(&params(1e-4, 0.05), &t, DEFAULT_M_MAX).unwrap();
        assert_eq!(plan.m, 7);
        assert_relative_eq!(plan.t_robust_meas, 15.0 * 126.8e-9, max_relative = 1e-12);
    }
}
