//! Sweep harness: finite-time simulations tabulated against their asymptotes
//! over parameter grids, with optional finite-shot sampling and a kink
//! detector for locating the transitions.
//!
//! Rows are independent pure computations; they run in parallel and are
//! reassembled in grid order, so results are bitwise identical for any
//! thread count.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::bands;
use crate::coin::CoinState;
use crate::error::{Error, Result};
use crate::sampling::{sample_counts, sampled_moments};
use crate::ssh;
use crate::walk::{distribution, evolve, moments, raw_moments, LatticeState, StepParams};

/// Inclusive uniform grid: `count` points from `start` to `stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidSweep(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(Error::InvalidSweep(format!(
                "grid bounds must satisfy start < stop, got [{start}, {stop}]"
            )));
        }
        Ok(GridSpec { start, stop, count })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.count).map(|j| self.start + j as f64 * h).collect()
    }
}

/// Sampled-column values: shot-noise estimates with one-σ errors, all in the
/// same step-normalized units as the exact columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledRow {
    pub m1_over_n: f64,
    pub m1_err: f64,
    pub m2_over_n2: f64,
    pub m2_err: f64,
    pub sqrt_m2_over_n: f64,
}

/// One grid point of a walk sweep: exact finite-n moments, the coin-resolved
/// asymptotes, and optional sampled estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub m1_over_n: f64,
    pub m2_over_n2: f64,
    pub sqrt_m2_over_n: f64,
    /// (s_y − s_z)·L(δ).
    pub asym_m1: f64,
    /// L(δ), closed form.
    pub asym_m2: f64,
    pub sampled: Option<SampledRow>,
}

fn walk_row(delta: f64, coin: CoinState, steps: u32, shots: u64, seed: u64) -> Result<SweepRow> {
    let params = StepParams::with_unit_shift(delta)?;
    let final_state = evolve(&LatticeState::localized(0, &coin), &params, steps)
        .pop()
        .expect("evolve returns n + 1 states");
    let dist = distribution(&final_state);
    let report = moments(&dist, steps)?;
    let (asym_m1, asym_m2) = bands::asymptotic_moments(delta, &coin);
    let nf = f64::from(steps);
    let sampled = if shots > 0 {
        let counts = sample_counts(&dist, shots, seed);
        let sm = sampled_moments(&counts).expect("shots > 0");
        Some(SampledRow {
            m1_over_n: sm.m1 / nf,
            m1_err: sm.m1_err / nf,
            m2_over_n2: sm.m2 / (nf * nf),
            m2_err: sm.m2_err / (nf * nf),
            sqrt_m2_over_n: sm.m2.max(0.0).sqrt() / nf,
        })
    } else {
        None
    };
    Ok(SweepRow {
        parameter: delta,
        m1_over_n: report.m1_over_n,
        m2_over_n2: report.m2_over_n2,
        sqrt_m2_over_n: report.m2.max(0.0).sqrt() / nf,
        asym_m1,
        asym_m2,
        sampled,
    })
}

/// Retardation sweep at fixed coin and step count. `shots = 0` runs exact
/// columns only; otherwise row i samples with seed `seed + i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaSweepConfig {
    pub grid: GridSpec,
    pub steps: u32,
    pub coin: CoinState,
    pub shots: u64,
    pub seed: u64,
}

pub fn run_delta_sweep(config: &DeltaSweepConfig) -> Result<Vec<SweepRow>> {
    if config.steps == 0 {
        return Err(Error::InvalidSweep("delta sweep needs steps >= 1".into()));
    }
    if config.grid.start < 0.0 || config.grid.stop > 2.0 * PI + 1e-12 {
        return Err(Error::InvalidSweep(format!(
            "delta grid [{}, {}] outside [0, 2pi]",
            config.grid.start, config.grid.stop
        )));
    }
    config
        .grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, &delta)| {
            walk_row(
                delta,
                config.coin,
                config.steps,
                config.shots,
                config.seed.wrapping_add(i as u64),
            )
        })
        .collect()
}

/// Meridian-coin sweep at fixed retardation: coins cos(θ/2)|L> + sin(θ/2)|R>
/// with θ on the grid. The row parameter is θ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinSweepConfig {
    pub delta: f64,
    pub theta_grid: GridSpec,
    pub steps: u32,
    pub shots: u64,
    pub seed: u64,
}

pub fn run_coin_sweep(config: &CoinSweepConfig) -> Result<Vec<SweepRow>> {
    if config.steps == 0 {
        return Err(Error::InvalidSweep("coin sweep needs steps >= 1".into()));
    }
    if config.theta_grid.start < 0.0 || config.theta_grid.stop > PI + 1e-12 {
        return Err(Error::InvalidSweep(format!(
            "theta grid [{}, {}] outside [0, pi]",
            config.theta_grid.start, config.theta_grid.stop
        )));
    }
    config
        .theta_grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let mut row = walk_row(
                config.delta,
                CoinState::meridian(theta),
                config.steps,
                config.shots,
                config.seed.wrapping_add(i as u64),
            )?;
            row.parameter = theta;
            Ok(row)
        })
        .collect()
}

/// One grid point of an SSH sweep: M2/τ² against 𝓛(t, t'), plus the residue
/// route where defined (skipped at t' = t, where its poles sit on the path).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SshSweepRow {
    pub parameter: f64,
    pub m2_over_tau2: f64,
    pub m2_over_tau2_t2: f64,
    pub l_closed: f64,
    pub l_residue: Option<f64>,
}

/// Inter-cell hopping sweep at fixed t, evolving a localized electron to τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SshSweepConfig {
    pub t: f64,
    pub t_prime_grid: GridSpec,
    pub tau: f64,
    pub chi0: CoinState,
    /// Lattice size override; auto-sized per row when absent.
    pub cells: Option<usize>,
}

pub fn run_ssh_sweep(config: &SshSweepConfig) -> Result<Vec<SshSweepRow>> {
    if !(config.tau.is_finite() && config.tau > 0.0) {
        return Err(Error::InvalidTime { tau: config.tau });
    }
    if config.t_prime_grid.start < 0.0 {
        return Err(Error::InvalidSweep(
            "t' grid must be non-negative".into(),
        ));
    }
    config
        .t_prime_grid
        .points()
        .par_iter()
        .map(|&t_prime| {
            let params = ssh::SshParams::new(config.t, t_prime)?;
            let cfg = match config.cells {
                Some(cells) => ssh::EvolutionConfig::with_cells(params, config.tau, config.chi0, cells)?,
                None => ssh::EvolutionConfig::new(params, config.tau, config.chi0)?,
            };
            let dist = ssh::evolve(&cfg)?;
            let (_, m2) = raw_moments(&dist);
            let m2_over_tau2 = m2 / (config.tau * config.tau);
            let l_residue = ssh::residue_report(&params).ok().map(|r| r.total);
            Ok(SshSweepRow {
                parameter: t_prime,
                m2_over_tau2,
                m2_over_tau2_t2: m2_over_tau2 / (config.t * config.t),
                l_closed: ssh::spreading_closed(&params).value,
                l_residue,
            })
        })
        .collect()
}

/// A slope discontinuity located by the second-difference detector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kink {
    pub parameter: f64,
    /// |second difference| at the peak.
    pub strength: f64,
}

/// Locate kinks in `values` sampled on the uniform grid `parameters`: local
/// maxima of the absolute second difference exceeding `threshold_factor` ×
/// its median. Constant (or kink-free) input yields an empty list.
pub fn detect_transitions(
    parameters: &[f64],
    values: &[f64],
    threshold_factor: f64,
) -> Result<Vec<Kink>> {
    if parameters.len() != values.len() {
        return Err(Error::InvalidSweep(format!(
            "{} parameters vs {} values",
            parameters.len(),
            values.len()
        )));
    }
    if parameters.len() < 5 {
        return Err(Error::InvalidSweep(
            "kink detection needs at least 5 rows".into(),
        ));
    }
    let h = parameters[1] - parameters[0];
    if h <= 0.0 {
        return Err(Error::InvalidSweep("grid must be increasing".into()));
    }
    for w in parameters.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
            return Err(Error::InvalidSweep("grid must be uniform".into()));
        }
    }

    let second: Vec<f64> = values
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
        .collect();
    let mut sorted = second.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted[sorted.len() / 2];
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = (threshold_factor * median).max(1e-12 * (1.0 + scale));

    let mut kinks = Vec::new();
    for j in 0..second.len() {
        let left = if j > 0 { second[j - 1] } else { 0.0 };
        let right = if j + 1 < second.len() { second[j + 1] } else { 0.0 };
        if second[j] > threshold && second[j] >= left && second[j] >= right {
            kinks.push(Kink {
                parameter: parameters[j + 1],
                strength: second[j],
            });
        }
    }
    kinks.sort_by(|a, b| b.strength.total_cmp(&a.strength));
    Ok(kinks)
}

/// Default kink threshold: 5× the median absolute second difference.
pub const DEFAULT_KINK_FACTOR: f64 = 5.0;
