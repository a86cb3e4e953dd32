//! Grid evaluation of full plans over `(p_L, F)` for contour plots of the
//! total error and the raw-pair count.
//!
//! Rows are computed in parallel and collected in grid order (`p_L`-major),
//! so output is identical whatever the thread count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{optimal_m, DEFAULT_M_MAX};
use crate::model::{ErrorParams, NoiseKind, PhysicalTimings};
use crate::planner::{plan_with, PlannerOptions};
use crate::presets::{ETA, PURCELL_C, TAU, T_LOCAL};

pub const CSV_HEADER: [&str; 12] = [
    "p_L",
    "F",
    "noise",
    "n_b",
    "n_p",
    "delta_min",
    "eps_fail",
    "eps_E",
    "n_tot_budget",
    "expected_pairs",
    "t_C_s",
    "gamma",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub p_l_min: f64,
    pub p_l_max: f64,
    /// Log-spaced points, endpoints included.
    pub p_l_points: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Linearly spaced points, endpoints included.
    pub f_points: usize,
    pub noise: NoiseKind,
    pub p_i: f64,
    pub p_m: f64,
    pub t_local: f64,
    pub tau: f64,
    pub eta: f64,
    pub purcell_c: f64,
    pub m_max: u32,
    pub options: PlannerOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            p_l_min: 1e-6,
            p_l_max: 1e-3,
            p_l_points: 13,
            f_min: 0.90,
            f_max: 0.99,
            f_points: 10,
            noise: NoiseKind::Depolarizing,
            p_i: 0.05,
            p_m: 0.05,
            t_local: T_LOCAL,
            tau: TAU,
            eta: ETA,
            purcell_c: PURCELL_C,
            m_max: DEFAULT_M_MAX,
            options: PlannerOptions::default(),
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if !(self.p_l_min > 0.0 && self.p_l_min <= self.p_l_max) {
            return Err(Error::OutOfRange {
                name: "p_L range",
                value: self.p_l_min,
                reason: "need 0 < min <= max for a log grid",
            });
        }
        if self.f_min.is_nan() || self.f_max.is_nan() || self.f_min > self.f_max {
            return Err(Error::OutOfRange {
                name: "F range",
                value: self.f_min,
                reason: "need min <= max",
            });
        }
        for (name, n) in [("p_L points", self.p_l_points), ("F points", self.f_points)] {
            if n == 0 {
                return Err(Error::OutOfRange {
                    name,
                    value: 0.0,
                    reason: "must be >= 1",
                });
            }
        }
        Ok(())
    }

    pub fn p_l_grid(&self) -> Vec<f64> {
        let (a, b) = (self.p_l_min.log10(), self.p_l_max.log10());
        spaced(a, b, self.p_l_points)
            .into_iter()
            .map(|x| round12(10f64.powf(x)))
            .collect()
    }

    pub fn f_grid(&self) -> Vec<f64> {
        spaced(self.f_min, self.f_max, self.f_points)
    }

    pub fn len(&self) -> usize {
        self.p_l_points * self.f_points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Rounds to 12 significant digits so that grid values print cleanly.
fn round12(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// `n` evenly spaced values from `a` to `b`, endpoints exact.
fn spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![round12(a)];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| round12(if i + 1 == n { b } else { a + i as f64 * step }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "p_L")]
    pub p_l: f64,
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub noise: NoiseKind,
    pub n_b: u32,
    pub n_p: u32,
    pub delta_min: f64,
    pub eps_fail: f64,
    #[serde(rename = "eps_E")]
    pub eps_e: f64,
    pub n_tot_budget: u64,
    pub expected_pairs: f64,
    #[serde(rename = "t_C_s")]
    pub t_c: f64,
    pub gamma: f64,
}

impl SweepRow {
    fn csv_record(&self) -> [String; 12] {
        [
            format!("{:e}", self.p_l),
            format!("{:e}", self.fidelity),
            self.noise.to_string(),
            self.n_b.to_string(),
            self.n_p.to_string(),
            format!("{:e}", self.delta_min),
            format!("{:e}", self.eps_fail),
            format!("{:e}", self.eps_e),
            self.n_tot_budget.to_string(),
            format!("{:e}", self.expected_pairs),
            format!("{:e}", self.t_c),
            format!("{:e}", self.gamma),
        ]
    }
}

fn evaluate(cfg: &SweepConfig, timings: &PhysicalTimings, p_l: f64, f: f64) -> Result<SweepRow> {
    let params = ErrorParams::new(p_l, cfg.p_i, cfg.p_m, f, cfg.noise)?;
    let meas = optimal_m(&params, cfg.m_max)?.timed(timings);
    let plan = plan_with(&params, timings, &meas, &cfg.options)?;
    Ok(SweepRow {
        p_l,
        fidelity: f,
        noise: cfg.noise,
        n_b: plan.schedule.n_b,
        n_p: plan.schedule.n_p,
        delta_min: plan.delta_min,
        eps_fail: plan.eps_fail,
        eps_e: plan.eps_e,
        n_tot_budget: plan.n_tot_budget,
        expected_pairs: plan.expected_pairs,
        t_c: plan.t_c,
        gamma: plan.gamma,
    })
}

/// Evaluates the whole grid, `p_L`-major.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let timings =
        PhysicalTimings::from_optics(cfg.p_m, cfg.t_local, cfg.tau, cfg.eta, cfg.purcell_c, None)?;
    let points: Vec<(f64, f64)> = cfg
        .p_l_grid()
        .into_iter()
        .flat_map(|p| cfg.f_grid().into_iter().map(move |f| (p, f)))
        .collect();
    points
        .into_par_iter()
        .map(|(p, f)| evaluate(cfg, &timings, p, f))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_json_lines<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
