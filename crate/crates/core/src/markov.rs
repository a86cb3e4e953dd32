//! Absorbing Markov chain over raw-pair consumption.
//!
//! One chain step consumes one raw pair. For two-level pumping a transient
//! state records how many bit-purified pairs the phase level has absorbed
//! (`phase`) and how many raw pairs the bit-purified pair under
//! construction has absorbed (`bit`). A raw pair either starts a new
//! bit-level keeper or is pumped into it. When that completes a
//! bit-purified pair, the pair is handed to the phase level in the same
//! step. Failed comparisons send the chain back according to the
//! [`RestartMode`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PumpSchedule;
use crate::pumping::{PumpKind, PumpScheme, PumpTrace};

/// Largest budget [`solve_budget`] will consider by default.
pub const DEFAULT_BUDGET_CAP: u64 = 1_000_000;

/// Where a failed comparison sends the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartMode {
    /// Any failure discards everything and starts from the first raw pair.
    #[default]
    FullRestart,
    /// A failed bit step only discards the bit-purified pair under
    /// construction; the phase-level keeper survives. A failed phase step
    /// still starts over.
    LevelRestart,
}

impl RestartMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RestartMode::FullRestart => "full_restart",
            RestartMode::LevelRestart => "level_restart",
        }
    }
}

impl std::fmt::Display for RestartMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RestartMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" | "full_restart" => Ok(RestartMode::FullRestart),
            "level" | "level_restart" => Ok(RestartMode::LevelRestart),
            other => Err(format!(
                "unknown restart mode `{other}` (expected full or level)"
            )),
        }
    }
}

/// Label of a chain state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainState {
    Progress { phase: u32, bit: u32 },
    Done,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    schedule: PumpSchedule,
    restart_mode: RestartMode,
    /// Raw pairs consumed on the all-success path.
    min_pairs: u64,
    states: Vec<ChainState>,
    /// Acceptance probability of the post-selection taken when leaving
    /// each state (1 where no comparison happens).
    step_success: Vec<f64>,
    /// Sparse rows: `(destination, probability)`.
    transitions: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovResult {
    pub eps_fail: f64,
    pub expected_pairs: f64,
    pub budget: u64,
}

fn push_merged(row: &mut Vec<(usize, f64)>, dest: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    match row.iter_mut().find(|(d, _)| *d == dest) {
        Some((_, q)) => *q += p,
        None => row.push((dest, p)),
    }
}

/// Builds the chain from the all-success path of a trace.
pub fn build_chain(trace: &PumpTrace, restart_mode: RestartMode) -> MarkovChain {
    match trace.scheme {
        PumpScheme::TwoLevel => build_two_level(trace, restart_mode),
        PumpScheme::Standard => build_linear(trace, restart_mode),
    }
}

fn build_two_level(trace: &PumpTrace, restart_mode: RestartMode) -> MarkovChain {
    let bit = trace.success_probs(PumpKind::Bit);
    let phase = trace.success_probs(PumpKind::Phase);
    let n_b = bit.len() as u32;
    let n_p = phase.len() as u32;
    let width = n_b as usize + 1;
    let index = |j: u32, i: u32| j as usize * width + i as usize;
    let transient = (n_p as usize + 1) * width;
    let done = transient;

    let mut states = Vec::with_capacity(transient + 1);
    let mut step_success = Vec::with_capacity(transient + 1);
    let mut transitions = Vec::with_capacity(transient + 1);

    for j in 0..=n_p {
        for i in 0..=n_b {
            states.push(ChainState::Progress { phase: j, bit: i });
            let mut row = Vec::with_capacity(3);
            // i == 0: the raw pair becomes the bit-level keeper, no test.
            let p_bit = if i == 0 { 1.0 } else { bit[i as usize - 1] };
            let bit_fail_dest = match restart_mode {
                RestartMode::FullRestart => index(0, 0),
                RestartMode::LevelRestart => index(j, 0),
            };
            if i < n_b {
                push_merged(&mut row, index(j, i + 1), p_bit);
                push_merged(&mut row, bit_fail_dest, 1.0 - p_bit);
                step_success.push(p_bit);
            } else {
                // j == 0: the bit-purified pair becomes the phase keeper.
                let p_phase = if j == 0 { 1.0 } else { phase[j as usize - 1] };
                let next = if j == n_p { done } else { index(j + 1, 0) };
                push_merged(&mut row, next, p_bit * p_phase);
                push_merged(&mut row, bit_fail_dest, 1.0 - p_bit);
                push_merged(&mut row, index(0, 0), p_bit * (1.0 - p_phase));
                step_success.push(p_bit * p_phase);
            }
            transitions.push(row);
        }
    }
    states.push(ChainState::Done);
    step_success.push(1.0);
    transitions.push(vec![(done, 1.0)]);

    MarkovChain {
        schedule: trace.schedule,
        restart_mode,
        min_pairs: trace.schedule.min_pairs(),
        states,
        step_success,
        transitions,
    }
}

/// Single-level chain: keeper, then each step in order, restart on failure.
fn build_linear(trace: &PumpTrace, restart_mode: RestartMode) -> MarkovChain {
    let probs = trace.all_success_probs();
    let n = probs.len();
    let done = n + 1;
    let mut states = Vec::with_capacity(n + 2);
    let mut step_success = Vec::with_capacity(n + 2);
    let mut transitions = Vec::with_capacity(n + 2);
    for i in 0..=n {
        states.push(ChainState::Progress {
            phase: 0,
            bit: i as u32,
        });
        let p = if i == 0 { 1.0 } else { probs[i - 1] };
        let next = if i == n { done } else { i + 1 };
        let mut row = Vec::with_capacity(2);
        push_merged(&mut row, next, p);
        push_merged(&mut row, 0, 1.0 - p);
        step_success.push(p);
        transitions.push(row);
    }
    states.push(ChainState::Done);
    step_success.push(1.0);
    transitions.push(vec![(done, 1.0)]);
    MarkovChain {
        schedule: trace.schedule,
        restart_mode,
        min_pairs: n as u64 + 1,
        states,
        step_success,
        transitions,
    }
}

impl MarkovChain {
    pub fn schedule(&self) -> PumpSchedule {
        self.schedule
    }

    pub fn restart_mode(&self) -> RestartMode {
        self.restart_mode
    }

    pub fn min_pairs(&self) -> u64 {
        self.min_pairs
    }

    pub fn states(&self) -> &[ChainState] {
        &self.states
    }

    pub fn step_success(&self) -> &[f64] {
        &self.step_success
    }

    pub fn transitions(&self) -> &[Vec<(usize, f64)>] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn done_index(&self) -> usize {
        self.states.len() - 1
    }

    /// Probability mass in every state after `steps` raw pairs.
    pub fn distribution_after(&self, steps: u64) -> Vec<f64> {
        let mut dist = vec![0.0; self.len()];
        dist[0] = 1.0;
        let mut next = vec![0.0; self.len()];
        for _ in 0..steps {
            self.advance(&dist, &mut next);
            std::mem::swap(&mut dist, &mut next);
        }
        dist
    }

    fn advance(&self, from: &[f64], to: &mut [f64]) {
        to.iter_mut().for_each(|x| *x = 0.0);
        for (s, row) in self.transitions.iter().enumerate() {
            let mass = from[s];
            if mass == 0.0 {
                continue;
            }
            for &(d, p) in row {
                to[d] += mass * p;
            }
        }
    }

    /// Transient mass, i.e. the failure probability, for every budget in
    /// `0..=max_budget`.
    pub fn survival_curve(&self, max_budget: u64) -> Vec<f64> {
        let done = self.done_index();
        let mut dist = vec![0.0; self.len()];
        dist[0] = 1.0;
        let mut next = vec![0.0; self.len()];
        let mut out = Vec::with_capacity(max_budget as usize + 1);
        out.push(1.0);
        for _ in 0..max_budget {
            self.advance(&dist, &mut next);
            std::mem::swap(&mut dist, &mut next);
            out.push(transient_mass(&dist, done));
        }
        out
    }
}

fn transient_mass(dist: &[f64], done: usize) -> f64 {
    dist.iter()
        .enumerate()
        .filter(|(i, _)| *i != done)
        .map(|(_, m)| m)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Probability that the protocol has not finished after `budget` raw pairs.
pub fn failure_probability(chain: &MarkovChain, budget: u64) -> f64 {
    transient_mass(&chain.distribution_after(budget), chain.done_index())
}

/// Mean number of raw pairs until completion, from the fundamental matrix.
pub fn expected_pairs(chain: &MarkovChain) -> Result<f64> {
    if let Some(i) = chain.step_success.iter().position(|&p| p <= 0.0) {
        return Err(Error::NonConvergent(format!(
            "state {:?} never succeeds",
            chain.states[i]
        )));
    }
    let n = chain.done_index();
    let mut a = DMatrix::<f64>::identity(n, n);
    for (s, row) in chain.transitions.iter().take(n).enumerate() {
        for &(d, p) in row {
            if d < n {
                a[(s, d)] -= p;
            }
        }
    }
    let ones = DVector::<f64>::from_element(n, 1.0);
    let t = a
        .lu()
        .solve(&ones)
        .ok_or_else(|| Error::NonConvergent("singular fundamental matrix".into()))?;
    let start = t[0];
    if !start.is_finite() || start < 1.0 {
        return Err(Error::NonConvergent(format!("absorption time {start}")));
    }
    Ok(start)
}

/// Smallest budget whose failure probability is at most `delta_min`,
/// found by doubling and then bisection.
pub fn solve_budget(chain: &MarkovChain, delta_min: f64) -> Result<u64> {
    solve_budget_capped(chain, delta_min, DEFAULT_BUDGET_CAP)
}

pub fn solve_budget_capped(chain: &MarkovChain, delta_min: f64, cap: u64) -> Result<u64> {
    if !(delta_min.is_finite() && (0.0..1.0).contains(&delta_min)) {
        return Err(Error::OutOfRange {
            name: "delta_min",
            value: delta_min,
            reason: "must lie in [0, 1)",
        });
    }
    let min = chain.min_pairs.max(1);
    if min > cap {
        return Err(Error::BudgetExceeded { cap });
    }
    let ok = |budget: u64| failure_probability(chain, budget) <= delta_min;

    // Below `min` the chain cannot have finished.
    let mut lo = min - 1;
    let mut hi = min;
    while !ok(hi) {
        if hi >= cap {
            return Err(Error::BudgetExceeded { cap });
        }
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Budget, failure probability at that budget, and mean consumption.
pub fn analyze(chain: &MarkovChain, delta_min: f64, cap: u64) -> Result<MarkovResult> {
    let budget = solve_budget_capped(chain, delta_min, cap)?;
    Ok(MarkovResult {
        eps_fail: failure_probability(chain, budget),
        expected_pairs: expected_pairs(chain)?,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BellDiagonalState, ErrorParams, NoiseKind};
    use crate::pumping::{run_standard, run_two_level, StepRecord};
    use approx::assert_relative_eq;

    /// Trace with prescribed acceptance probabilities.
    fn synthetic(bit: &[f64], phase: &[f64]) -> PumpTrace {
        let s = BellDiagonalState::PERFECT;
        let rec = |kind, p| StepRecord {
            kind,
            state_before: s,
            success_prob: p,
            state_after_success: s,
        };
        let steps: Vec<_> = bit
            .iter()
            .map(|&p| rec(PumpKind::Bit, p))
            .chain(phase.iter().map(|&p| rec(PumpKind::Phase, p)))
            .collect();
        PumpTrace {
            scheme: PumpScheme::TwoLevel,
            schedule: PumpSchedule::new(bit.len() as u32, phase.len() as u32),
            steps,
            final_state: s,
            infidelity: 0.0,
        }
    }

    fn rows_are_stochastic(chain: &MarkovChain) {
        for row in chain.transitions() {
            let sum: f64 = row.iter().map(|(_, p)| p).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        let done = chain.done_index();
        assert_eq!(chain.transitions()[done], vec![(done, 1.0)]);
        assert_eq!(chain.states()[done], ChainState::Done);
    }

    #[test]
    fn trivial_schedule() {
        let chain = build_chain(&synthetic(&[], &[]), RestartMode::FullRestart);
        assert_eq!(chain.len(), 2);
        assert_eq!(failure_probability(&chain, 0), 1.0);
        assert_eq!(failure_probability(&chain, 1), 0.0);
        assert_eq!(expected_pairs(&chain).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_chains_finish_on_the_minimal_path() {
        for (nb, np) in [(1usize, 0usize), (0, 3), (2, 2), (4, 5)] {
            let chain = build_chain(
                &synthetic(&vec![1.0; nb], &vec![1.0; np]),
                RestartMode::FullRestart,
            );
            rows_are_stochastic(&chain);
            let min = ((nb + 1) * (np + 1)) as u64;
            assert_eq!(failure_probability(&chain, min - 1), 1.0);
            assert_eq!(failure_probability(&chain, min), 0.0);
            assert_relative_eq!(
                expected_pairs(&chain).unwrap(),
                min as f64,
                max_relative = 1e-12
            );
            assert_eq!(solve_budget(&chain, 1e-6).unwrap(), min);
        }
    }

    #[test]
    fn bernoulli_stage_is_geometric() {
        for p in [0.9, 0.5, 0.1] {
            // keeper + one test; a failure restarts from the keeper.
            let chain = build_chain(&synthetic(&[p], &[]), RestartMode::FullRestart);
            assert_relative_eq!(
                expected_pairs(&chain).unwrap(),
                2.0 / p,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn level_restart_keeps_the_phase_keeper() {
        let trace = synthetic(&[0.5], &[1.0]);
        let chain = build_chain(&trace, RestartMode::LevelRestart);
        rows_are_stochastic(&chain);
        // (phase 1, bit 1) fails back to (phase 1, bit 0), index 2.
        assert!(chain.transitions()[3].contains(&(2, 0.5)));
        let full = build_chain(&trace, RestartMode::FullRestart);
        assert!(full.transitions()[3].contains(&(0, 0.5)));
        assert!(expected_pairs(&chain).unwrap() < expected_pairs(&full).unwrap());
    }

    #[test]
    fn zero_acceptance_is_reported() {
        let chain = build_chain(&synthetic(&[0.0], &[]), RestartMode::FullRestart);
        assert!(matches!(
            expected_pairs(&chain),
            Err(Error::NonConvergent(_))
        ));
        assert!(matches!(
            solve_budget_capped(&chain, 1e-3, 1000),
            Err(Error::BudgetExceeded { cap: 1000 })
        ));
    }

    #[test]
    fn tail_sum_identity_on_real_traces() {
        let params = ErrorParams::new(1e-5, 0.05, 0.05, 0.9, NoiseKind::Depolarizing).unwrap();
        for (nb, np) in [(0, 0), (1, 2), (3, 3)] {
            let trace = run_two_level(PumpSchedule::new(nb, np), &params, 1e-4).unwrap();
            for mode in [RestartMode::FullRestart, RestartMode::LevelRestart] {
                let chain = build_chain(&trace, mode);
                rows_are_stochastic(&chain);
                let curve = chain.survival_curve(20_000);
                assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-15));
                let tail: f64 = curve.iter().sum();
                assert_relative_eq!(tail, expected_pairs(&chain).unwrap(), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn solved_budget_is_minimal_and_monotone() {
        let params = ErrorParams::new(1e-6, 0.05, 0.05, 0.95, NoiseKind::Depolarizing).unwrap();
        let trace = run_two_level(PumpSchedule::new(2, 2), &params, 1.4e-5).unwrap();
        let chain = build_chain(&trace, RestartMode::FullRestart);
        let mut last = u64::MAX;
        for delta in [1e-8, 1e-6, 1e-4, 1e-2, 0.3] {
            let b = solve_budget(&chain, delta).unwrap();
            assert!(failure_probability(&chain, b) <= delta);
            assert!(failure_probability(&chain, b - 1) > delta);
            assert!(b <= last);
            last = b;
        }
    }

    #[test]
    fn standard_trace_gives_linear_chain() {
        let params = ErrorParams::new(0.0, 0.05, 0.05, 0.9, NoiseKind::Depolarizing).unwrap();
        let trace = run_standard(3, &params, 0.0).unwrap();
        let chain = build_chain(&trace, RestartMode::FullRestart);
        rows_are_stochastic(&chain);
        assert_eq!(chain.len(), 5);
        assert_eq!(failure_probability(&chain, 3), 1.0);
        assert!(failure_probability(&chain, 4) < 1.0);
        assert_eq!(chain.min_pairs(), 4);
        assert!(solve_budget(&chain, 0.5).unwrap() >= 4);
    }
}
