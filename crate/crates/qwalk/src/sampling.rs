//! Seeded photon-count sampling of walker distributions.
//!
//! Counts are drawn multinomially by inverse-CDF lookups on a ChaCha stream
//! cipher generator (counter-based, so a seed fully determines the draw), and
//! moment estimates carry one-σ errors from per-site √counts propagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::walk::ProbabilityDistribution;

/// Integer counts per lattice site from a finite-shot measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteCounts {
    min_site: i64,
    counts: Vec<u64>,
    shots: u64,
}

impl SiteCounts {
    pub fn min_site(&self) -> i64 {
        self.min_site
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn count(&self, m: i64) -> u64 {
        let idx = m - self.min_site;
        if idx < 0 || idx >= self.counts.len() as i64 {
            0
        } else {
            self.counts[idx as usize]
        }
    }

    /// (site, count) pairs over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.min_site + i as i64, c))
    }
}

/// Draw `shots` samples from the distribution; the same seed always returns
/// identical counts, and the counts sum to `shots` exactly.
pub fn sample_counts(dist: &ProbabilityDistribution, shots: u64, seed: u64) -> SiteCounts {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut cumulative = Vec::with_capacity(dist.num_sites());
    let mut acc = 0.0;
    for &p in dist.probabilities() {
        acc += p;
        cumulative.push(acc);
    }
    let mut counts = vec![0u64; dist.num_sites()];
    let last = counts.len() - 1;
    for _ in 0..shots {
        let u: f64 = rng.gen();
        let idx = cumulative.partition_point(|&c| c <= u).min(last);
        counts[idx] += 1;
    }
    SiteCounts {
        min_site: dist.min_site(),
        counts,
        shots,
    }
}

/// Moment estimates from counts with Poisson error bars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledMoments {
    pub shots: u64,
    pub m1: f64,
    pub m2: f64,
    /// One σ on m1: √(Σ m²·c) / shots.
    pub m1_err: f64,
    /// One σ on m2: √(Σ m⁴·c) / shots.
    pub m2_err: f64,
}

/// Estimate M1 and M2 from counts; `None` when no shots were taken.
pub fn sampled_moments(counts: &SiteCounts) -> Option<SampledMoments> {
    if counts.shots == 0 {
        return None;
    }
    let shots = counts.shots as f64;
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for (m, c) in counts.iter() {
        let x = m as f64;
        let c = c as f64;
        s1 += x * c;
        s2 += x * x * c;
        s4 += x * x * x * x * c;
    }
    Some(SampledMoments {
        shots: counts.shots,
        m1: s1 / shots,
        m2: s2 / shots,
        m1_err: s2.sqrt() / shots,
        m2_err: s4.sqrt() / shots,
    })
}
