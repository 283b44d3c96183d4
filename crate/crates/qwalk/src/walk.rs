//! Exact single-step evolution of the coined walk on the 1D lattice.
//!
//! One step is a coin rotation by the quarter-wave plate followed by the
//! polarization-controlled shift of the uniaxial plate with charge q: the
//! |L> component of each site moves up by 2q sites, the |R> component down,
//! each weighted by i·sin(δ/2), while cos(δ/2) leaves the walker in place.
//! States are dense complex spinor arrays over a contiguous site window that
//! grows by 2q per step, so an n-step walk from a single site occupies
//! exactly [-2qn, 2qn].

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::coin::{CoinState, STATE_NORM_TOL};
use crate::error::{Error, Result};

/// Probability arrays tolerate a slightly looser norm than amplitudes.
pub const DISTRIBUTION_NORM_TOL: f64 = 1e-10;

/// Step parameters: optical retardation δ (radians, reduced mod 2π) and
/// plate charge q with 2q a positive integer (the per-step shift in sites).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepParams {
    delta: f64,
    two_q: u32,
}

impl StepParams {
    pub fn new(delta: f64, q: f64) -> Result<Self> {
        let two_q = 2.0 * q;
        if !two_q.is_finite() || two_q < 0.5 || (two_q - two_q.round()).abs() > 1e-9 {
            return Err(Error::InvalidCharge { q });
        }
        let mut delta = delta.rem_euclid(2.0 * PI);
        if !delta.is_finite() {
            delta = 0.0;
        }
        Ok(StepParams {
            delta,
            two_q: two_q.round() as u32,
        })
    }

    /// The experimental configuration: q = 1/2, one-site shifts.
    pub fn with_unit_shift(delta: f64) -> Result<Self> {
        StepParams::new(delta, 0.5)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn charge(&self) -> f64 {
        f64::from(self.two_q) / 2.0
    }

    /// Walker displacement per plate action, in sites (= 2q).
    pub fn shift(&self) -> i64 {
        i64::from(self.two_q)
    }

    pub(crate) fn half_angle(&self) -> (f64, f64) {
        ((self.delta / 2.0).cos(), (self.delta / 2.0).sin())
    }
}

/// Spinor-valued wavefunction over a contiguous window of lattice sites.
///
/// `amps[i]` holds the (|L>, |R>) amplitudes of site `min_site + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    min_site: i64,
    amps: Vec<[Complex64; 2]>,
}

impl LatticeState {
    /// A walker localized on one site with the given coin.
    pub fn localized(site: i64, coin: &CoinState) -> Self {
        LatticeState {
            min_site: site,
            amps: vec![[coin.alpha(), coin.beta()]],
        }
    }

    /// Build from raw amplitudes; total norm must be 1 within `STATE_NORM_TOL`.
    pub fn from_amplitudes(min_site: i64, amps: Vec<[Complex64; 2]>) -> Result<Self> {
        let state = LatticeState { min_site, amps };
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(state)
    }

    pub fn min_site(&self) -> i64 {
        self.min_site
    }

    pub fn max_site(&self) -> i64 {
        self.min_site + self.amps.len() as i64 - 1
    }

    pub fn num_sites(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[[Complex64; 2]] {
        &self.amps
    }

    /// Spinor at site m; zero outside the stored window.
    pub fn amplitude(&self, m: i64) -> [Complex64; 2] {
        let idx = m - self.min_site;
        if idx < 0 || idx >= self.amps.len() as i64 {
            [Complex64::new(0.0, 0.0); 2]
        } else {
            self.amps[idx as usize]
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps
            .iter()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .sum()
    }

    /// Smallest and largest site carrying non-zero probability.
    pub fn support(&self) -> Option<(i64, i64)> {
        let occupied = |a: &[Complex64; 2]| a[0].norm_sqr() + a[1].norm_sqr() > 0.0;
        let first = self.amps.iter().position(occupied)?;
        let last = self.amps.iter().rposition(occupied)?;
        Some((self.min_site + first as i64, self.min_site + last as i64))
    }
}

/// The quarter-wave plate at 90°, exp(iπ/4·σx), acting on every site's coin:
/// |L> -> (|L> + i|R>)/√2 and |R> -> (i|L> + |R>)/√2. Positions untouched.
pub fn apply_qwp(state: &LatticeState) -> LatticeState {
    let h = FRAC_1_SQRT_2;
    let i = Complex64::i();
    let amps = state
        .amps
        .iter()
        .map(|&[l, r]| [(l + i * r) * h, (i * l + r) * h])
        .collect();
    LatticeState {
        min_site: state.min_site,
        amps,
    }
}

/// The charge-q plate: |L,m> -> cos(δ/2)|L,m> + i·sin(δ/2)|R,m+2q> and
/// |R,m> -> cos(δ/2)|R,m> + i·sin(δ/2)|L,m-2q>. The window grows by 2q on
/// each side.
pub fn apply_qplate(state: &LatticeState, params: &StepParams) -> LatticeState {
    let (c, s) = params.half_angle();
    let is = Complex64::new(0.0, s);
    let g = params.shift() as usize;
    let old_len = state.amps.len();
    let new_len = old_len + 2 * g;

    let get = |j: isize| -> [Complex64; 2] {
        if j < 0 || j >= old_len as isize {
            [Complex64::new(0.0, 0.0); 2]
        } else {
            state.amps[j as usize]
        }
    };

    let mut amps = Vec::with_capacity(new_len);
    for idx in 0..new_len {
        let i = idx as isize;
        // new window starts at min_site - g, so site m maps to old index i - g
        let same = get(i - g as isize);
        let from_above = get(i); // R component of site m + 2q
        let from_below = get(i - 2 * g as isize); // L component of site m - 2q
        amps.push([c * same[0] + is * from_above[1], c * same[1] + is * from_below[0]]);
    }
    LatticeState {
        min_site: state.min_site - g as i64,
        amps,
    }
}

/// One full walk step: coin rotation, then the conditional shift.
pub fn step(state: &LatticeState, params: &StepParams) -> LatticeState {
    apply_qplate(&apply_qwp(state), params)
}

/// All intermediate states of an n-step walk, including the initial one
/// (length n + 1). Element i equals step applied i times.
pub fn evolve(initial: &LatticeState, params: &StepParams, n: u32) -> Vec<LatticeState> {
    let mut states = Vec::with_capacity(n as usize + 1);
    states.push(initial.clone());
    for _ in 0..n {
        let next = step(states.last().expect("non-empty"), params);
        states.push(next);
    }
    states
}

/// Walker position distribution P(m), coin marginalized out.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityDistribution {
    min_site: i64,
    probs: Vec<f64>,
}

impl ProbabilityDistribution {
    /// Build from raw probabilities: entries >= 0, summing to 1 within
    /// `DISTRIBUTION_NORM_TOL`.
    pub fn new(min_site: i64, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability array".into()));
        }
        if let Some(p) = probs.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "negative or non-finite entry {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_NORM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total:.17e}"
            )));
        }
        Ok(ProbabilityDistribution { min_site, probs })
    }

    pub fn from_state(state: &LatticeState) -> Self {
        let probs = state
            .amps
            .iter()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .collect();
        ProbabilityDistribution {
            min_site: state.min_site,
            probs,
        }
    }

    pub fn min_site(&self) -> i64 {
        self.min_site
    }

    pub fn num_sites(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, m: i64) -> f64 {
        let idx = m - self.min_site;
        if idx < 0 || idx >= self.probs.len() as i64 {
            0.0
        } else {
            self.probs[idx as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.probs.iter().position(|&p| p > 0.0)?;
        let last = self.probs.iter().rposition(|&p| p > 0.0)?;
        Some((self.min_site + first as i64, self.min_site + last as i64))
    }

    /// (site, probability) pairs over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.min_site + i as i64, p))
    }
}

/// Marginalize the coin: P(m) = |a_L(m)|² + |a_R(m)|².
pub fn distribution(state: &LatticeState) -> ProbabilityDistribution {
    ProbabilityDistribution::from_state(state)
}

/// First and second position moments with their step-normalized forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub n: u32,
    pub m1: f64,
    pub m2: f64,
    pub m1_over_n: f64,
    pub m2_over_n2: f64,
}

/// Σ m·P(m) and Σ m²·P(m) without step normalization.
pub fn raw_moments(dist: &ProbabilityDistribution) -> (f64, f64) {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (m, p) in dist.iter() {
        let x = m as f64;
        m1 += x * p;
        m2 += x * x * p;
    }
    (m1, m2)
}

/// Moments of a distribution after an n-step walk; n >= 1 so the
/// normalized columns are defined.
pub fn moments(dist: &ProbabilityDistribution, n: u32) -> Result<MomentReport> {
    if n == 0 {
        return Err(Error::ZeroSteps);
    }
    let (m1, m2) = raw_moments(dist);
    let nf = f64::from(n);
    Ok(MomentReport {
        n,
        m1,
        m2,
        m1_over_n: m1 / nf,
        m2_over_n2: m2 / (nf * nf),
    })
}
