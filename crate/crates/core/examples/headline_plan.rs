//! End-to-end plans for the two reference registers: schedule, pair
//! budget, clock cycle and effective remote-gate error.
//!
//! Run with `cargo run --release --example headline_plan`.

use rnp::presets::Scenario;
use rnp::timing::memory_check;

fn main() -> rnp::Result<()> {
    for scenario in [Scenario::ion_depolarizing(), Scenario::nv_dephasing()] {
        let plan = scenario.plan()?;
        println!("{}", scenario.name);
        println!(
            "  schedule {}  restart {}",
            plan.schedule, plan.restart_mode
        );
        println!(
            "  delta_min {:.3e}  eps_fail {:.3e}  eps_E {:.3e}",
            plan.delta_min, plan.eps_fail, plan.eps_e
        );
        println!(
            "  raw pairs: budget {}  mean {:.1}",
            plan.n_tot_budget, plan.expected_pairs
        );
        println!(
            "  t_C {:.0} us (from mean {:.0} us)  gamma {:.2e}  (unpurified {:.2e})",
            plan.t_c * 1e6,
            plan.t_c_expected * 1e6,
            plan.gamma,
            plan.p_cnot_raw
        );
        if let Some(t_mem) = scenario.timings.t_mem {
            let m = memory_check(plan.t_c, t_mem)?;
            println!(
                "  t_C / t_mem = {:.1e}{}",
                m.ratio,
                if m.warning {
                    "  (too slow for memory)"
                } else {
                    ""
                }
            );
        }
    }
    Ok(())
}
