//! Why two levels: the alternating standard scheme keeps feeding raw
//! errors back in and stalls near (1-F)^2/9, while two-level pumping with
//! ideal operations goes as low as the schedule allows.
//!
//! Run with `cargo run --example standard_vs_two_level`.

use rnp::planner::{optimize_schedule_with, PumpLevels};
use rnp::{run_standard, ErrorParams, NoiseKind};

fn main() -> rnp::Result<()> {
    for f in [0.90, 0.95, 0.99] {
        let ideal = ErrorParams::new(0.0, 0.0, 0.0, f, NoiseKind::Depolarizing)?;
        let floor = (1.0 - f) * (1.0 - f) / 9.0;
        let best_standard = (1..=30)
            .map(|n| run_standard(n, &ideal, 0.0).map(|t| t.infidelity))
            .collect::<rnp::Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let (schedule, two_level) = optimize_schedule_with(&ideal, 0.0, 15, PumpLevels::TwoLevel)?;
        println!(
            "F = {f:.2}: floor {floor:.3e} | standard best (<= 30 steps) {best_standard:.3e} | two-level {schedule} {two_level:.3e}"
        );
    }
    Ok(())
}
