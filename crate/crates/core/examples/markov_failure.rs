//! The stochastic side of pumping: the chance that a run needs more raw
//! pairs than a budget, the mean consumption, and the smallest budget that
//! keeps the failure below the purified infidelity. A seeded Monte-Carlo
//! run is shown next to the exact numbers.
//!
//! Run with `cargo run --release --example markov_failure`.

use rnp::markov::{analyze, DEFAULT_BUDGET_CAP};
use rnp::oracle::monte_carlo_pumping;
use rnp::{
    build_chain, failure_probability, run_two_level, ErrorParams, NoiseKind, PumpSchedule,
    RestartMode,
};

fn main() -> rnp::Result<()> {
    let params = ErrorParams::new(1e-6, 0.05, 0.05, 0.95, NoiseKind::Depolarizing)?;
    let eps_m = rnp::optimal_m(&params, 25)?.eps_m;
    let trace = run_two_level(PumpSchedule::new(4, 5), &params, eps_m)?;

    for mode in [RestartMode::FullRestart, RestartMode::LevelRestart] {
        let chain = build_chain(&trace, mode);
        let r = analyze(&chain, trace.infidelity, DEFAULT_BUDGET_CAP)?;
        println!(
            "{mode}: mean {:.2} raw pairs, budget {} for eps_fail {:.3e}",
            r.expected_pairs, r.budget, r.eps_fail
        );
        for budget in [30, 60, 120, 240] {
            let exact = failure_probability(&chain, budget);
            let mc = monte_carlo_pumping(&trace, mode, budget, 100_000, 1)?;
            println!(
                "  N = {budget:>3}: P(fail) = {exact:.4e}  Monte-Carlo {:.4e} +- {:.1e}",
                mc.fail_fraction,
                mc.binomial_std_err(exact)
            );
        }
    }
    Ok(())
}
