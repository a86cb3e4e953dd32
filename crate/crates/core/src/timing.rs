//! Optical time scales of a register: readout/initialization by photon
//! scattering, heralded two-photon entanglement generation, and the check
//! of a clock cycle against storage memory time.

use crate::error::{check_positive, Error, Result};
use crate::model::PhysicalTimings;

/// Default threshold on `t_C / t_mem` above which a plan is flagged.
pub const DEFAULT_MEMORY_WARNING_RATIO: f64 = 0.01;

fn check_efficiency(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            reason: "must lie in (0, 1)",
        });
    }
    Ok(eta)
}

fn check_purcell(c: f64) -> Result<f64> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::OutOfRange {
            name: "purcell_C",
            value: c,
            reason: "must be >= 1",
        });
    }
    Ok(c)
}

/// Optical initialization and measurement times `(t_I, t_M)`.
///
/// Scattering continues until a photon has been detected with confidence
/// `1 - p_m`, each emission taking `tau / C` and being detected with
/// probability `eta`.
pub fn optical_times(p_m: f64, eta: f64, tau: f64, purcell_c: f64) -> Result<(f64, f64)> {
    if !(p_m > 0.0 && p_m < 1.0) {
        return Err(Error::OutOfRange {
            name: "p_M",
            value: p_m,
            reason: "optical readout time needs p_M in (0, 1)",
        });
    }
    let eta = check_efficiency(eta)?;
    let tau = check_positive("tau", tau)?;
    let c = check_purcell(purcell_c)?;
    let t = p_m.ln() / (1.0 - eta).ln() * tau / c;
    Ok((t, t))
}

/// Mean time to herald one raw pair with two-photon detection.
pub fn entanglement_time(t_init: f64, tau: f64, purcell_c: f64, eta: f64) -> Result<f64> {
    let t_init = check_positive("t_I", t_init)?;
    let tau = check_positive("tau", tau)?;
    let c = check_purcell(purcell_c)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            reason: "must lie in (0, 1]",
        });
    }
    Ok((t_init + tau / c) / (eta * eta))
}

/// Ratio of a clock cycle to the storage memory time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryCheck {
    pub ratio: f64,
    pub warning: bool,
}

pub fn memory_check(t_c: f64, t_mem: f64) -> Result<MemoryCheck> {
    memory_check_with(t_c, t_mem, DEFAULT_MEMORY_WARNING_RATIO)
}

pub fn memory_check_with(t_c: f64, t_mem: f64, threshold: f64) -> Result<MemoryCheck> {
    let t_c = check_positive("t_C", t_c)?;
    let t_mem = check_positive("t_mem", t_mem)?;
    let ratio = t_c / t_mem;
    Ok(MemoryCheck {
        ratio,
        warning: ratio > threshold,
    })
}

impl PhysicalTimings {
    /// Derives the optical times from the hardware constants.
    pub fn from_optics(
        p_m: f64,
        t_local: f64,
        tau: f64,
        eta: f64,
        purcell_c: f64,
        t_mem: Option<f64>,
    ) -> Result<Self> {
        let (t_init, t_meas) = optical_times(p_m, eta, tau, purcell_c)?;
        let t_ent = entanglement_time(t_init, tau, purcell_c, eta)?;
        PhysicalTimings {
            t_local,
            tau,
            eta,
            purcell_c,
            t_init,
            t_meas,
            t_ent,
            t_mem,
        }
        .validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn readout_time_for_reference_optics() {
        let (t_i, t_m) = optical_times(0.05, 0.2, 10e-9, 10.0).unwrap();
        assert_eq!(t_i, t_m);
        // ln 0.05 / ln 0.8 = 13.4251...
        assert_relative_eq!(t_i, 13.425_134_878e-9, max_relative = 1e-9);
    }

    #[test]
    fn readout_time_scalings() {
        let (base, _) = optical_times(0.05, 0.2, 10e-9, 10.0).unwrap();
        let (doubled_c, _) = optical_times(0.05, 0.2, 10e-9, 20.0).unwrap();
        assert_relative_eq!(doubled_c, base / 2.0, max_relative = 1e-14);

        let mut last = f64::INFINITY;
        for eta in [0.1, 0.3, 0.5, 0.9, 0.999, 1.0 - 1e-12] {
            let (t, _) = optical_times(0.05, eta, 10e-9, 10.0).unwrap();
            assert!(t > 0.0 && t < last);
            last = t;
        }
        // A near-perfect detector needs a small fraction of one emission.
        assert!(last < 0.2 * 10e-9 / 10.0);
    }

    #[test]
    fn readout_time_domain() {
        assert_eq!(
            optical_times(0.05, 0.0, 1e-8, 10.0).unwrap_err().field(),
            Some("eta")
        );
        assert_eq!(
            optical_times(1.0, 0.2, 1e-8, 10.0).unwrap_err().field(),
            Some("p_M")
        );
        assert!(optical_times(0.05, 0.2, 1e-8, 0.5).is_err());
    }

    #[test]
    fn two_photon_generation_time() {
        let t = entanglement_time(13.4e-9, 10e-9, 10.0, 0.2).unwrap();
        assert_relative_eq!(t, 360e-9, max_relative = 1e-12);
        let perfect = entanglement_time(13.4e-9, 10e-9, 10.0, 1.0).unwrap();
        assert_relative_eq!(perfect, 14.4e-9, max_relative = 1e-12);
        let quarter = entanglement_time(13.4e-9, 10e-9, 10.0, 0.05).unwrap();
        assert_relative_eq!(quarter, 16.0 * t, max_relative = 1e-12);
    }

    #[test]
    fn memory_ratios() {
        let ion = memory_check(997e-6, 10.0).unwrap();
        assert_relative_eq!(ion.ratio, 9.97e-5, max_relative = 1e-12);
        assert!(!ion.warning);
        let nv = memory_check(140e-6, 1.0).unwrap();
        assert_relative_eq!(nv.ratio, 1.4e-4, max_relative = 1e-12);
        assert!(!nv.warning);
        let slow = memory_check(1.0, 1.0).unwrap();
        assert_eq!(slow.ratio, 1.0);
        assert!(slow.warning);
        assert!(memory_check_with(1.0, 1.0, 2.0)
            .map(|c| !c.warning)
            .unwrap());
    }

    #[test]
    fn assembled_timings_are_positive_and_ordered() {
        let t = PhysicalTimings::from_optics(0.05, 100e-9, 10e-9, 0.2, 10.0, Some(10.0)).unwrap();
        assert!(t.t_ent > t.t_init);
        assert_eq!(t.t_init, t.t_meas);
        assert_relative_eq!(t.t_ent, 360.628_371_95e-9, max_relative = 1e-9);
    }
}
