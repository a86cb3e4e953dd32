//! Optical time scales: readout and initialization by photon scattering,
//! heralded entanglement generation, and how they move with the cavity
//! Purcell factor and the collection efficiency.
//!
//! Run with `cargo run --example timing_budget`.

use rnp::presets::{PURCELL_C, TAU, T_LOCAL};
use rnp::PhysicalTimings;

fn main() -> rnp::Result<()> {
    println!("   C    eta    t_I = t_M     t_E");
    for c in [1.0, PURCELL_C, 100.0] {
        for eta in [0.05, 0.2, 0.5] {
            let t = PhysicalTimings::from_optics(0.05, T_LOCAL, TAU, eta, c, None)?;
            println!(
                "{c:>5}  {eta:>4}  {:>9.3} ns  {:>9.1} ns",
                t.t_init * 1e9,
                t.t_ent * 1e9
            );
        }
    }
    Ok(())
}
