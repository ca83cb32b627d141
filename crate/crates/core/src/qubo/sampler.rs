use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::problem::{qubo_energy, QuboProblem};
use super::QuboError;

/// A distinct bit string and how many shots returned it.
#[derive(Debug, Clone, PartialEq)]
pub struct BitSample {
    pub bits: Vec<bool>,
    pub energy: f64,
    pub multiplicity: u64,
}

/// Backend that draws shots from a QUBO. Implementations must be
/// deterministic for a given seed.
pub trait QuboSampler: Send + Sync {
    fn name(&self) -> &str;

    fn sample(&self, q: &QuboProblem, shots: u64, seed: u64) -> Result<Vec<BitSample>, QuboError>;
}

pub const DEFAULT_SWEEPS: usize = 200;

/// Independent single-bit-flip Metropolis anneal per shot, with geometric
/// cooling and a closing greedy descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingSampler {
    pub sweeps: usize,
    /// Defaults to the largest possible single-flip energy change.
    pub t_high: Option<f64>,
    /// Defaults to a tenth of the smallest significant coefficient.
    pub t_low: Option<f64>,
}

impl Default for AnnealingSampler {
    fn default() -> Self {
        Self::with_sweeps(DEFAULT_SWEEPS)
    }
}

impl AnnealingSampler {
    pub fn with_sweeps(sweeps: usize) -> Self {
        Self {
            sweeps,
            t_high: None,
            t_low: None,
        }
    }

    fn temperatures(&self, q: &QuboProblem) -> (f64, f64) {
        let mut reach = q.linear().iter().map(|v| v.abs()).collect::<Vec<_>>();
        for (&(i, j), &v) in q.quadratic() {
            reach[i] += v.abs();
            reach[j] += v.abs();
        }
        let largest = reach.iter().copied().fold(0.0, f64::max);
        let t_high = self
            .t_high
            .unwrap_or(if largest > 0.0 { largest } else { 1.0 });
        let significant = 1e-9 * largest;
        let smallest = q
            .linear()
            .iter()
            .chain(q.quadratic().values())
            .map(|v| v.abs())
            .filter(|&v| v > significant)
            .fold(f64::INFINITY, f64::min);
        let t_low = self
            .t_low
            .unwrap_or(if smallest.is_finite() {
                0.1 * smallest
            } else {
                1e-3 * t_high
            })
            .min(t_high);
        (t_high, t_low)
    }

    fn shot(
        &self,
        q: &QuboProblem,
        neighbours: &[Vec<(usize, f64)>],
        (t_high, t_low): (f64, f64),
        rng: &mut ChaCha8Rng,
    ) -> Vec<bool> {
        let n = q.bit_count();
        let mut bits: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        // field[i] = energy change of setting bit i from 0 to 1.
        let mut field: Vec<f64> = q.linear().to_vec();
        for (i, adj) in neighbours.iter().enumerate() {
            for &(j, v) in adj {
                if bits[j] {
                    field[i] += v;
                }
            }
        }
        let sweeps = self.sweeps.max(1);
        for sweep in 0..sweeps {
            let t = if sweeps == 1 {
                t_low
            } else {
                t_high * (t_low / t_high).powf(sweep as f64 / (sweeps - 1) as f64)
            };
            for i in 0..n {
                let delta = if bits[i] { -field[i] } else { field[i] };
                if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
                    bits[i] = !bits[i];
                    let sign = if bits[i] { 1.0 } else { -1.0 };
                    for &(j, v) in &neighbours[i] {
                        field[j] += sign * v;
                    }
                }
            }
        }
        // Finish in a local minimum: greedy sweeps until no flip lowers the energy.
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n {
                let delta = if bits[i] { -field[i] } else { field[i] };
                if delta < 0.0 {
                    bits[i] = !bits[i];
                    let sign = if bits[i] { 1.0 } else { -1.0 };
                    for &(j, v) in &neighbours[i] {
                        field[j] += sign * v;
                    }
                    improved = true;
                }
            }
        }
        bits
    }
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

fn aggregate(q: &QuboProblem, shots: impl IntoIterator<Item = Vec<bool>>) -> Vec<BitSample> {
    let mut counts: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
    for bits in shots {
        *counts.entry(bits).or_default() += 1;
    }
    let mut samples: Vec<BitSample> = counts
        .into_iter()
        .map(|(bits, multiplicity)| BitSample {
            energy: qubo_energy(q, &bits),
            bits,
            multiplicity,
        })
        .collect();
    samples.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then_with(|| a.bits.cmp(&b.bits))
    });
    samples
}

impl QuboSampler for AnnealingSampler {
    fn name(&self) -> &str {
        "classical"
    }

    fn sample(&self, q: &QuboProblem, shots: u64, seed: u64) -> Result<Vec<BitSample>, QuboError> {
        if shots == 0 {
            return Err(QuboError::NoShots);
        }
        let neighbours = q.neighbours();
        let temps = self.temperatures(q);
        let drawn: Vec<Vec<bool>> = (0..shots)
            .into_par_iter()
            .map(|s| self.shot(q, &neighbours, temps, &mut shot_rng(seed, s)))
            .collect();
        Ok(aggregate(q, drawn))
    }
}

/// Enumerates every bit string and returns ground states only, each shot
/// picking one of the degenerate minima at random. Small problems only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustiveSampler {
    pub max_bits: usize,
}

impl Default for ExhaustiveSampler {
    fn default() -> Self {
        Self { max_bits: 24 }
    }
}

impl QuboSampler for ExhaustiveSampler {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn sample(&self, q: &QuboProblem, shots: u64, seed: u64) -> Result<Vec<BitSample>, QuboError> {
        if shots == 0 {
            return Err(QuboError::NoShots);
        }
        let n = q.bit_count();
        if n > self.max_bits {
            return Err(QuboError::TooManyBits {
                bits: n,
                limit: self.max_bits,
            });
        }
        let to_bits = |p: u64| (0..n).map(|k| (p >> k) & 1 == 1).collect::<Vec<bool>>();
        let mut best = f64::INFINITY;
        let mut minima = Vec::new();
        for p in 0..1u64 << n {
            let e = qubo_energy(q, &to_bits(p));
            let tol = 1e-9 * e.abs().max(1.0);
            if e < best - tol {
                best = e;
                minima.clear();
                minima.push(p);
            } else if (e - best).abs() <= tol {
                minima.push(p);
            }
        }
        let drawn = (0..shots).map(|s| {
            let mut rng = shot_rng(seed, s);
            to_bits(minima[rng.random_range(0..minima.len())])
        });
        Ok(aggregate(q, drawn))
    }
}

/// Classical annealing sampler with default temperatures.
pub fn sample_qubo(
    q: &QuboProblem,
    shots: u64,
    sweeps: usize,
    seed: u64,
) -> Result<Vec<BitSample>, QuboError> {
    AnnealingSampler::with_sweeps(sweeps).sample(q, shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bit_minimum() {
        let mut q = QuboProblem::new(1);
        q.add_linear(0, -1.0);
        let s = sample_qubo(&q, 20, 10, 3).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].bits, vec![true]);
        assert_eq!(s[0].multiplicity, 20);
    }

    #[test]
    fn deterministic_for_seed() {
        let mut q = QuboProblem::new(6);
        for i in 0..6 {
            q.add_linear(i, if i % 2 == 0 { -1.0 } else { 0.5 });
        }
        q.add_quadratic(0, 1, 2.0);
        q.add_quadratic(2, 5, -1.5);
        let a = sample_qubo(&q, 5, 3, 11).unwrap();
        let b = sample_qubo(&q, 5, 3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|s| s.multiplicity).sum::<u64>(), 5);
    }

    #[test]
    fn exhaustive_returns_ground_states() {
        let mut q = QuboProblem::new(2);
        q.add_linear(0, -1.0);
        q.add_linear(1, -1.0);
        q.add_quadratic(0, 1, 1.0);
        let s = ExhaustiveSampler::default().sample(&q, 50, 0).unwrap();
        assert!(s.iter().all(|x| x.energy == -1.0));
        assert_eq!(s.len(), 3);
        assert_eq!(s.iter().map(|x| x.multiplicity).sum::<u64>(), 50);
    }

    #[test]
    fn zero_shots_rejected() {
        let q = QuboProblem::new(1);
        assert_eq!(sample_qubo(&q, 0, 1, 0), Err(QuboError::NoShots));
    }
}
