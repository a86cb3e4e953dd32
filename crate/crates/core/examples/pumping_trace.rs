//! Two-level pumping step by step: bit steps with raw pairs shrink the
//! Psi components, phase steps with the bit-purified pair shrink Phi-.
//!
//! Run with `cargo run --example pumping_trace`.

use rnp::{run_two_level, ErrorParams, NoiseKind, PumpSchedule};

fn main() -> rnp::Result<()> {
    let params = ErrorParams::new(1e-6, 0.05, 0.05, 0.95, NoiseKind::Depolarizing)?;
    let eps_m = rnp::optimal_m(&params, 25)?.eps_m;
    let trace = run_two_level(PumpSchedule::new(4, 5), &params, eps_m)?;

    let raw = trace.steps[0].state_before;
    println!("step  kind    p_succ     Phi-        Psi+        Psi-        infidelity");
    println!(
        "   0  raw             {:>10.3e}  {:>10.3e}  {:>10.3e}  {:>10.3e}",
        raw.p_phi_minus(),
        raw.p_psi_plus(),
        raw.p_psi_minus(),
        raw.infidelity()
    );
    for (i, s) in trace.steps.iter().enumerate() {
        let out = s.state_after_success;
        println!(
            "{:>4}  {:<6}  {:.5}  {:>10.3e}  {:>10.3e}  {:>10.3e}  {:>10.3e}",
            i + 1,
            s.kind.to_string(),
            s.success_prob,
            out.p_phi_minus(),
            out.p_psi_plus(),
            out.p_psi_minus(),
            out.infidelity()
        );
    }
    let lead = rnp::closed_form_infidelity(trace.schedule, &params, eps_m)?;
    println!(
        "\nfinal infidelity {:.4e} (leading-order estimate {lead:.4e})",
        trace.infidelity
    );
    Ok(())
}
