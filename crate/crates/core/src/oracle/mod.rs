//! Independent references for the pumping recurrence and the Markov chain.

pub mod density;
pub mod monte_carlo;

pub use density::{oracle_step, simulate_pump_step, DensityMatrix};
pub use monte_carlo::{monte_carlo_pumping, MonteCarloResult};
