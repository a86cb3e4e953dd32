//! Schedule optimization and composition of a full plan: schedule, pair
//! budget, clock cycle and effective gate error.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Result};
use crate::markov::{self, RestartMode, DEFAULT_BUDGET_CAP};
use crate::model::{
    ErrorParams, MeasurementPlan, NoiseKind, PhysicalTimings, PlanResult, PumpSchedule,
    DEFAULT_SEARCH_BOUND,
};
use crate::pumping::{pump_step, raw_pair, run_two_level, PumpKind};

/// Which pumping levels the schedule search may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpLevels {
    /// Phase pumping with raw pairs only (`n_b = 0`).
    OneLevel,
    TwoLevel,
}

impl PumpLevels {
    /// Two levels for depolarized pairs; dephased pairs carry no bit errors
    /// to remove.
    pub fn for_noise(noise: NoiseKind) -> Self {
        match noise {
            NoiseKind::Depolarizing => PumpLevels::TwoLevel,
            NoiseKind::Dephasing => PumpLevels::OneLevel,
        }
    }
}

impl std::str::FromStr for PumpLevels {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "one" | "one_level" | "1" => Ok(PumpLevels::OneLevel),
            "two" | "two_level" | "2" => Ok(PumpLevels::TwoLevel),
            other => Err(format!(
                "unknown pumping levels `{other}` (expected one or two)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerOptions {
    /// Largest `n_b` and `n_p` searched.
    pub bound: u32,
    pub restart_mode: RestartMode,
    /// `None` picks from the noise kind.
    pub levels: Option<PumpLevels>,
    pub budget_cap: u64,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            bound: DEFAULT_SEARCH_BOUND,
            restart_mode: RestartMode::default(),
            levels: None,
            budget_cap: DEFAULT_BUDGET_CAP,
        }
    }
}

/// Infidelity after `(n_b, n_p)` for every schedule in the search box,
/// indexed `[n_b][n_p]`. Prefixes are shared, so this costs one pass per
/// `n_b` rather than one per schedule.
pub fn infidelity_table(
    params: &ErrorParams,
    eps_m: f64,
    bound: u32,
    levels: PumpLevels,
) -> Result<Vec<Vec<f64>>> {
    let params = params.require_purifiable()?;
    let eps_m = check_probability("eps_M", eps_m)?;
    let raw = raw_pair(&params)?;
    let max_nb = match levels {
        PumpLevels::OneLevel => 0,
        PumpLevels::TwoLevel => bound,
    };
    let mut table = Vec::with_capacity(max_nb as usize + 1);
    let mut bit_keeper = raw;
    for n_b in 0..=max_nb {
        if n_b > 0 {
            bit_keeper =
                pump_step(&bit_keeper, &raw, PumpKind::Bit, params.p_l, eps_m)?.state_after_success;
        }
        let mut row = Vec::with_capacity(bound as usize + 1);
        let mut keeper = bit_keeper;
        row.push(keeper.infidelity());
        for _ in 0..bound {
            keeper = pump_step(&keeper, &bit_keeper, PumpKind::Phase, params.p_l, eps_m)?
                .state_after_success;
            row.push(keeper.infidelity());
        }
        table.push(row);
    }
    Ok(table)
}

/// Exhaustive search for the schedule with the smallest infidelity. Ties
/// go to fewer total steps, then fewer phase steps.
pub fn optimize_schedule(
    params: &ErrorParams,
    eps_m: f64,
    bound: u32,
) -> Result<(PumpSchedule, f64)> {
    optimize_schedule_with(params, eps_m, bound, PumpLevels::for_noise(params.noise))
}

pub fn optimize_schedule_with(
    params: &ErrorParams,
    eps_m: f64,
    bound: u32,
    levels: PumpLevels,
) -> Result<(PumpSchedule, f64)> {
    let table = infidelity_table(params, eps_m, bound, levels)?;
    let mut best = (PumpSchedule::new(0, 0), table[0][0]);
    for (n_b, row) in table.iter().enumerate() {
        for (n_p, &inf) in row.iter().enumerate() {
            let cand = PumpSchedule::new(n_b as u32, n_p as u32);
            let better = inf < best.1
                || (inf == best.1
                    && (cand.n_b + cand.n_p, cand.n_p) < (best.0.n_b + best.0.n_p, best.0.n_p));
            if better {
                best = (cand, inf);
            }
        }
    }
    Ok(best)
}

/// Full plan with default options apart from bound and restart mode.
pub fn plan(
    params: &ErrorParams,
    timings: &PhysicalTimings,
    meas: &MeasurementPlan,
    bound: u32,
    restart_mode: RestartMode,
) -> Result<PlanResult> {
    plan_with(
        params,
        timings,
        meas,
        &PlannerOptions {
            bound,
            restart_mode,
            ..PlannerOptions::default()
        },
    )
}

pub fn plan_with(
    params: &ErrorParams,
    timings: &PhysicalTimings,
    meas: &MeasurementPlan,
    opts: &PlannerOptions,
) -> Result<PlanResult> {
    let params = params.require_purifiable()?;
    let timings = timings.validate()?;
    let eps_m = check_probability("eps_M", meas.eps_m)?;
    let levels = opts.levels.unwrap_or(PumpLevels::for_noise(params.noise));

    let (schedule, delta_min) = optimize_schedule_with(&params, eps_m, opts.bound, levels)?;
    let trace = run_two_level(schedule, &params, eps_m)?;
    let chain = markov::build_chain(&trace, opts.restart_mode);
    let result = markov::analyze(&chain, delta_min, opts.budget_cap)?;

    let eps_e = result.eps_fail + delta_min;
    let per_pair = timings.t_ent + timings.t_local + meas.t_robust_meas;
    let overhead = 2.0 * timings.t_local + meas.t_robust_meas;
    let t_robust_ent = result.budget as f64 * per_pair;
    let t_robust_ent_expected = result.expected_pairs * per_pair;

    Ok(PlanResult {
        schedule,
        delta_min,
        n_tot_budget: result.budget,
        expected_pairs: result.expected_pairs,
        eps_fail: result.eps_fail,
        eps_e,
        t_robust_ent,
        t_c: t_robust_ent + overhead,
        gamma: eps_e + 2.0 * params.p_l + 2.0 * eps_m,
        p_cnot_raw: p_cnot_raw(&params),
        t_robust_ent_expected,
        t_c_expected: t_robust_ent_expected + overhead,
        eps_m,
        restart_mode: opts.restart_mode,
    })
}

/// Order-of-magnitude error of a remote C-NOT built on one unpurified pair
/// and single readouts.
pub fn p_cnot_raw(params: &ErrorParams) -> f64 {
    (1.0 - params.fidelity) + 2.0 * params.p_l + 2.0 * params.p_m
}
