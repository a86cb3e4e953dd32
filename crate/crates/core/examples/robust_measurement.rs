//! Majority-vote readout: how the vote error falls with repetitions until
//! the copy gates take over, and where the optimum sits.
//!
//! Run with `cargo run --example robust_measurement`.

use rnp::measurement::{measurement_error, optimal_m, DEFAULT_M_MAX};
use rnp::presets::Scenario;
use rnp::{ErrorParams, NoiseKind};

fn main() -> rnp::Result<()> {
    let timings = Scenario::ion_depolarizing().timings;
    for p_l in [1e-4, 1e-6] {
        let params = ErrorParams::new(p_l, 0.05, 0.05, 0.95, NoiseKind::Depolarizing)?;
        println!("p_I = p_M = 5%, p_L = {p_l:e}");
        for m in [0, 2, 4, 6, 8, 10, 11, 12, 14] {
            println!(
                "  m = {m:>2}  readouts = {:>2}  eps_M = {:.4e}",
                2 * m + 1,
                measurement_error(m, &params)?
            );
        }
        let best = optimal_m(&params, DEFAULT_M_MAX)?.timed(&timings);
        println!(
            "  optimum m* = {} with eps_M = {:.4e}, taking {:.3} us\n",
            best.m,
            best.eps_m,
            best.t_robust_meas * 1e6
        );
    }
    Ok(())
}
