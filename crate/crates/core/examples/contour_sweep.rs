//! A coarse (p_L, F) sweep written as CSV to standard output, the data
//! behind contour plots of eps_E and the raw-pair count.
//!
//! Run with `cargo run --release --example contour_sweep > sweep.csv`.

use rnp::sweep::{run_sweep, write_csv, SweepConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SweepConfig {
        p_l_points: 4,
        f_points: 4,
        ..SweepConfig::default()
    };
    let rows = run_sweep(&cfg)?;
    write_csv(&rows, std::io::stdout().lock())?;
    for row in rows.iter().filter(|r| r.fidelity >= 0.95) {
        eprintln!(
            "p_L {:.1e} F {:.2}: eps_E / p_L = {:.1}",
            row.p_l,
            row.fidelity,
            row.eps_e / row.p_l
        );
    }
    Ok(())
}
