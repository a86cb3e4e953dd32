//! Checks the Bell-diagonal recurrence against a 16-dimensional
//! density-matrix simulation of the pumping circuits, then runs the whole
//! verification suite.
//!
//! Run with `cargo run --release --example oracle_crosscheck`.

use rnp::oracle::simulate_pump_step;
use rnp::verify::{run_verification, VerifyConfig};
use rnp::{pump_step, raw_pair, ErrorParams, NoiseKind, PumpKind};

fn main() -> rnp::Result<()> {
    let params = ErrorParams::new(1e-3, 0.05, 0.05, 0.9, NoiseKind::Depolarizing)?;
    let raw = raw_pair(&params)?;
    for kind in [PumpKind::Bit, PumpKind::Phase] {
        let fast = pump_step(&raw, &raw, kind, params.p_l, 1e-2)?;
        let (p, state) = simulate_pump_step(&raw, &raw, kind, params.p_l, 1e-2)?;
        println!(
            "{kind}: recurrence p={:.12} F={:.12}",
            fast.success_prob,
            fast.state_after_success.fidelity()
        );
        println!("{kind}: density    p={p:.12} F={:.12}", state.fidelity());
    }

    let report = run_verification(&VerifyConfig {
        trials: 20_000,
        seed: 7,
    });
    for c in &report.checks {
        println!(
            "{:<4} {:<22} worst {:.2e} (tol {:.0e})",
            c.status.as_str(),
            c.name,
            c.worst,
            c.tolerance
        );
    }
    Ok(())
}
