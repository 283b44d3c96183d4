//! The dimerized two-site chain: Bloch Hamiltonian, bands, winding, exact
//! continuous-time evolution of a localized electron, and the spreading
//! coefficient by quadrature, closed form, and residues.
//!
//! Conventions: lattice constant a = 1, the quasi-momentum is shifted by π so
//! H(k) = (t − t'·cos k)·σx − t'·sin k·σy, and the position observable is the
//! cell index (the intra-cell A/B offset is not counted). The reported band
//! velocity is the lower band's, the branch that satisfies n_y = V/t with the
//! eigenvector gauge used here.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bands::{planar_winding, SpreadingCoefficient, SpreadingMethod, WindingResult};
use crate::coin::CoinState;
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::walk::ProbabilityDistribution;

/// Hopping amplitudes: t within a cell, t' between neighboring cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SshParams {
    t: f64,
    t_prime: f64,
}

impl SshParams {
    pub fn new(t: f64, t_prime: f64) -> Result<Self> {
        let valid = t.is_finite() && t_prime.is_finite() && t >= 0.0 && t_prime >= 0.0;
        if !valid || (t == 0.0 && t_prime == 0.0) {
            return Err(Error::InvalidCouplings { t, t_prime });
        }
        Ok(SshParams { t, t_prime })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn t_prime(&self) -> f64 {
        self.t_prime
    }

    fn gapped(&self) -> bool {
        (self.t - self.t_prime).abs() > 1e-6 * self.t.max(self.t_prime)
    }
}

/// H(k) = (t − t'·cos k)·σx − t'·sin k·σy; Hermitian and traceless.
pub fn bloch_hamiltonian(params: &SshParams, k: f64) -> Mat2 {
    Mat2::pauli(
        params.t - params.t_prime * k.cos(),
        -params.t_prime * k.sin(),
        0.0,
    )
}

/// Band energy magnitude E(k) = √(t² + t'² − 2tt'·cos k).
pub fn band_energy(params: &SshParams, k: f64) -> f64 {
    let (t, tp) = (params.t, params.t_prime);
    (t * t + tp * tp - 2.0 * t * tp * k.cos()).max(0.0).sqrt()
}

/// Lower-band group velocity V(k) = −tt'·sin k / E(k).
pub fn group_velocity(params: &SshParams, k: f64) -> Result<f64> {
    let e = band_energy(params, k);
    if e < 1e-9 {
        return Err(Error::GaplessCouplings {
            t: params.t,
            t_prime: params.t_prime,
        });
    }
    Ok(-params.t * params.t_prime * k.sin() / e)
}

/// Per-k band record; n is equatorial (n_z = 0) and satisfies n_y = V/t.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SshBandPoint {
    pub k: f64,
    pub e: f64,
    pub v: f64,
    pub n: [f64; 3],
}

pub fn band_point(params: &SshParams, k: f64) -> Result<SshBandPoint> {
    let e = band_energy(params, k);
    if e < 1e-9 {
        return Err(Error::GaplessCouplings {
            t: params.t,
            t_prime: params.t_prime,
        });
    }
    let nx = (params.t - params.t_prime * k.cos()) / e;
    let ny = -params.t_prime * k.sin() / e;
    Ok(SshBandPoint {
        k,
        e,
        v: params.t * ny,
        n: [nx, ny, 0.0],
    })
}

/// Winding of the equatorial Bloch vector (n_x, n_y) over the zone:
/// 1 iff t < t'. Rejects the gapless point t = t' and grids below 64.
pub fn winding(params: &SshParams, grid: usize) -> Result<WindingResult> {
    if grid < 64 {
        return Err(Error::GridTooCoarse { grid, min: 64 });
    }
    if !params.gapped() {
        return Err(Error::GaplessCouplings {
            t: params.t,
            t_prime: params.t_prime,
        });
    }
    let mut points = Vec::with_capacity(grid);
    for j in 0..grid {
        let k = -PI + 2.0 * PI * j as f64 / grid as f64;
        let p = band_point(params, k)?;
        points.push([p.n[0], p.n[1]]);
    }
    let (turns, arc) = planar_winding(&points);
    let w = turns.abs().round();
    if (turns.abs() - w).abs() > 1e-6 {
        return Err(Error::Numerical(format!(
            "winding accumulation did not close on an integer: {turns}"
        )));
    }
    Ok(WindingResult {
        winding: w as u32,
        turns,
        chiral_axis: [0.0, 0.0, 1.0],
        arc,
    })
}

/// Smallest lattice that keeps an evolution to time τ from wrapping around.
pub fn min_cells(params: &SshParams, tau: f64) -> usize {
    4 * (params.t.max(params.t_prime) * tau).ceil() as usize + 16
}

/// A localized-electron evolution: hoppings, target time, lattice size, and
/// the initial sublattice spinor χ₀ over (A, B).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub params: SshParams,
    pub tau: f64,
    pub cells: usize,
    pub chi0: CoinState,
}

impl EvolutionConfig {
    /// Auto-sized lattice satisfying the anti-aliasing bound.
    pub fn new(params: SshParams, tau: f64, chi0: CoinState) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidTime { tau });
        }
        Ok(EvolutionConfig {
            params,
            tau,
            cells: min_cells(&params, tau),
            chi0,
        })
    }

    /// Explicit lattice size; rejected if below the anti-aliasing bound.
    pub fn with_cells(params: SshParams, tau: f64, chi0: CoinState, cells: usize) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidTime { tau });
        }
        let required = min_cells(&params, tau);
        if cells < required {
            return Err(Error::AliasedLattice { cells, required });
        }
        Ok(EvolutionConfig {
            params,
            tau,
            cells,
            chi0,
        })
    }
}

/// Evolve the electron from cell 0 for time τ and return P(m) over cells.
///
/// Per k-point the propagator is the exact 2×2 exponential
/// e^{−iH(k)τ} = cos(Eτ)·I − i·[sin(Eτ)/E]·H(k), applied to χ₀ (whose
/// localized start is flat in k); an inverse discrete Fourier transform
/// returns the cell amplitudes.
pub fn evolve(config: &EvolutionConfig) -> Result<ProbabilityDistribution> {
    let n = config.cells;
    let (t, tp) = (config.params.t, config.params.t_prime);
    let tau = config.tau;
    let chi = [config.chi0.alpha(), config.chi0.beta()];

    let kspace: Vec<[Complex64; 2]> = (0..n)
        .map(|j| {
            let k = 2.0 * PI * j as f64 / n as f64;
            let hx = t - tp * k.cos();
            let hy = -tp * k.sin();
            let e = (hx * hx + hy * hy).sqrt();
            if e < 1e-300 {
                return chi;
            }
            let (ce, se) = ((e * tau).cos(), (e * tau).sin());
            let f = Complex64::new(0.0, -se / e);
            // (hx·σx + hy·σy)·χ = ((hx − i·hy)·χ_B, (hx + i·hy)·χ_A)
            [
                ce * chi[0] + f * Complex64::new(hx, -hy) * chi[1],
                ce * chi[1] + f * Complex64::new(hx, hy) * chi[0],
            ]
        })
        .collect();

    // inverse transform: ψ(m) = (1/N)·Σ_j e^{i·k_j·m}·ψ̃(k_j)
    let twiddle: Vec<Complex64> = (0..n)
        .map(|p| Complex64::from_polar(1.0, 2.0 * PI * p as f64 / n as f64))
        .collect();
    let half = (n / 2) as i64;
    let inv = 1.0 / n as f64;
    let mut probs = Vec::with_capacity(n);
    for m in -half..(n as i64 - half) {
        let mut a = Complex64::new(0.0, 0.0);
        let mut b = Complex64::new(0.0, 0.0);
        for (j, amp) in kspace.iter().enumerate() {
            let w = twiddle[((j as i64 * m).rem_euclid(n as i64)) as usize];
            a += w * amp[0];
            b += w * amp[1];
        }
        probs.push((a.norm_sqr() + b.norm_sqr()) * inv * inv);
    }
    ProbabilityDistribution::new(-half, probs)
}

/// Large-τ moment rates: M1/τ → −s₂·𝓛/t, M2/τ² → 𝓛, and the hopping-scale
/// invariant M2/(τ²t²) → 𝓛/t², with s₂ = ⟨χ₀|σy|χ₀⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SshAsymptotics {
    pub m1_rate: f64,
    pub m2_rate: f64,
    pub m2_rate_scaled: f64,
}

pub fn asymptotic_moments(params: &SshParams, chi0: &CoinState) -> SshAsymptotics {
    let l = spreading_closed(params).value;
    let s2 = chi0.expectations().y;
    SshAsymptotics {
        m1_rate: -s2 * l / params.t,
        m2_rate: l,
        m2_rate_scaled: l / (params.t * params.t),
    }
}

/// 𝓛(t, t') in closed form: min(t, t')²/2 — t'²/2 when t' < t, t²/2 when
/// t' > t, with the two branches meeting at the transition.
pub fn spreading_closed(params: &SshParams) -> SpreadingCoefficient {
    let m = params.t.min(params.t_prime);
    SpreadingCoefficient {
        value: m * m / 2.0,
        method: SpreadingMethod::ClosedForm,
    }
}

/// V² as a total bounded function (directional limit t·t' at the t = t',
/// k = 0 closure).
fn speed_squared(params: &SshParams, k: f64) -> f64 {
    let (t, tp) = (params.t, params.t_prime);
    let e_sq = (t * t + tp * tp - 2.0 * t * tp * k.cos()).max(0.0);
    let num = t * tp * k.sin();
    if e_sq < 1e-28 {
        t * tp
    } else {
        num * num / e_sq
    }
}

/// 𝓛 by quadrature of V² over the zone; grid at least 256 points.
pub fn spreading_numeric(params: &SshParams, grid: usize) -> Result<SpreadingCoefficient> {
    if grid < 256 {
        return Err(Error::GridTooCoarse { grid, min: 256 });
    }
    Ok(SpreadingCoefficient {
        value: crate::bands::bz_average(grid, |k| speed_squared(params, k)),
        method: SpreadingMethod::Quadrature,
    })
}

/// Pole/residue table for the contour form of 𝓛(t, t').
#[derive(Clone, Debug, PartialEq)]
pub struct SshResidueReport {
    /// z₀ = 0 (double), z₁ = t/t', z₂ = t'/t.
    pub poles: [Complex64; 3],
    pub residues: [Complex64; 3],
    pub inside: [bool; 3],
    /// 2πi·r_k per pole.
    pub contributions: [f64; 3],
    pub total: f64,
    pub contour_errors: [f64; 3],
}

/// 𝓛 by residues. Rejects t ≈ t' (poles on the integration path) and
/// vanishing hoppings (degenerate pole set); each residue is cross-checked
/// by a numeric contour integral to 1e-8 and the total against the closed
/// form to 1e-9.
pub fn residue_report(params: &SshParams) -> Result<SshResidueReport> {
    let (t, tp) = (params.t, params.t_prime);
    if t < 1e-12 || tp < 1e-12 {
        return Err(Error::InvalidCouplings { t, t_prime: tp });
    }
    if !params.gapped() {
        return Err(Error::GaplessCouplings { t, t_prime: tp });
    }
    let poles = [
        Complex64::new(0.0, 0.0),
        Complex64::new(t / tp, 0.0),
        Complex64::new(tp / t, 0.0),
    ];
    for p in &poles[1..] {
        let dist = (p.norm() - 1.0).abs();
        if dist < 1e-6 {
            return Err(Error::PoleNearContour { distance: dist });
        }
    }
    let contributions = [
        (t * t + tp * tp) / 4.0,
        (t * t - tp * tp) / 4.0,
        (tp * tp - t * t) / 4.0,
    ];
    let residues = contributions.map(|v| Complex64::new(0.0, -v / (2.0 * PI)));

    let s = (t * t + tp * tp) / (t * tp);
    let scale = Complex64::new(0.0, -t * tp / (8.0 * PI));
    let f = move |z: Complex64| {
        let z2 = z * z;
        let w = z2 - 1.0;
        scale * w * w / (z2 * (z2 - s * z + 1.0))
    };

    let mut contour_errors = [0.0; 3];
    for idx in 0..3 {
        let mut sep = f64::INFINITY;
        for j in 0..3 {
            if j != idx {
                sep = sep.min((poles[j] - poles[idx]).norm());
            }
        }
        let radius = (0.4 * sep).min(1e-3);
        let numeric = crate::bands::contour_residue(&f, poles[idx], radius, 64);
        let err = (numeric - residues[idx]).norm();
        if err > 1e-8 {
            return Err(Error::ResidueMismatch {
                pole_index: idx,
                error: err,
            });
        }
        contour_errors[idx] = err;
    }

    let inside = [true, poles[1].norm() < 1.0, poles[2].norm() < 1.0];
    let total: f64 = contributions
        .iter()
        .zip(inside.iter())
        .filter(|(_, &keep)| keep)
        .map(|(c, _)| c)
        .sum();

    let closed = spreading_closed(params).value;
    if (total - closed).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "residue total {total:.17e} disagrees with closed form {closed:.17e}"
        )));
    }

    Ok(SshResidueReport {
        poles,
        residues,
        inside,
        contributions,
        total,
        contour_errors,
    })
}

/// 𝓛 by the requested route.
pub fn spreading(params: &SshParams, method: SpreadingMethod) -> Result<SpreadingCoefficient> {
    match method {
        SpreadingMethod::Quadrature => spreading_numeric(params, 4096),
        SpreadingMethod::ClosedForm => Ok(spreading_closed(params)),
        SpreadingMethod::Residue => Ok(SpreadingCoefficient {
            value: residue_report(params)?.total,
            method: SpreadingMethod::Residue,
        }),
    }
}
