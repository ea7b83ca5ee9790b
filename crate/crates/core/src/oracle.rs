//! Empirical checks on spectral verdicts: Monte Carlo drift and the
//! stationary velocity of the residue chain.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier;
use crate::composer::{mean_step, EnvironmentKernel};
use crate::error::{Error, Result};
use crate::spectral::Matrix;

/// Fewer replicates than this give no confidence interval.
pub const MIN_REPLICATES_FOR_CI: u32 = 8;

const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    /// Mean of `X_steps / steps` over replicates.
    pub velocity: f64,
    /// 95% normal-approximation half-width; `None` below 8 replicates.
    pub half_width: Option<f64>,
    pub steps: u64,
    pub replicates: u32,
    pub seed: u64,
}

impl DriftEstimate {
    /// Whether the confidence interval excludes zero.
    pub fn is_conclusive(&self) -> bool {
        self.half_width.is_some_and(|hw| self.velocity.abs() > hw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationParams {
    pub steps: u64,
    pub replicates: u32,
    pub seed: u64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            steps: 1_000_000,
            replicates: 32,
            seed: 0,
        }
    }
}

/// Inverse-CDF tables for every residue, padded to a common width so a draw
/// is located by a branch-free count of the thresholds it reaches.
struct Sampler {
    width: usize,
    /// `width` cumulative 64-bit thresholds per residue; padding is `u64::MAX`.
    thresholds: Vec<u64>,
    offsets: Vec<i64>,
    /// Start of the destination residue's row.
    next_base: Vec<usize>,
}

impl Sampler {
    fn new(kernel: &EnvironmentKernel) -> Self {
        const SPAN: f64 = 18_446_744_073_709_551_616.0; // 2^64
        let n = kernel.period() as i64;
        let width = kernel.steps().iter().map(|d| d.len()).max().unwrap_or(1);
        let mut sampler = Sampler {
            width,
            thresholds: Vec::with_capacity(width * kernel.period()),
            offsets: Vec::with_capacity(width * kernel.period()),
            next_base: Vec::with_capacity(width * kernel.period()),
        };
        for (residue, dist) in kernel.steps().iter().enumerate() {
            let mut cumulative = 0.0;
            for (i, (offset, p)) in dist.iter().enumerate() {
                cumulative += p;
                let last = i + 1 == dist.len();
                sampler
                    .thresholds
                    .push(if last { u64::MAX } else { (cumulative * SPAN) as u64 });
                sampler.offsets.push(offset);
                sampler
                    .next_base
                    .push((residue as i64 + offset).rem_euclid(n) as usize * width);
            }
            for _ in dist.len()..width {
                sampler.thresholds.push(u64::MAX);
                sampler.offsets.push(0);
                sampler.next_base.push(residue * width);
            }
        }
        sampler
    }

    fn run(&self, origin: usize, steps: u64, seed: u64, replicate: u32) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(replicate));
        let mut base = origin * self.width;
        let mut position: i64 = 0;
        for _ in 0..steps {
            let u = rng.next_u64();
            let row = &self.thresholds[base..base + self.width];
            let slot = base + row.iter().map(|&t| usize::from(u >= t)).sum::<usize>();
            position += self.offsets[slot];
            base = self.next_base[slot];
        }
        position as f64 / steps as f64
    }
}

/// Runs independent walks from the kernel's origin.
///
/// Replicate `i` draws from the ChaCha8 stream `i` keyed by `seed`, so the
/// result does not depend on how replicates are scheduled across threads.
pub fn simulate(kernel: &EnvironmentKernel, steps: u64, replicates: u32, seed: u64) -> Result<DriftEstimate> {
    if steps == 0 || replicates == 0 {
        return Err(Error::InvalidArgument(
            "simulation needs at least one step and one replicate".into(),
        ));
    }
    let sampler = Sampler::new(kernel);
    let velocities: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| sampler.run(kernel.origin(), steps, seed, r))
        .collect();
    let count = f64::from(replicates);
    let velocity = velocities.iter().sum::<f64>() / count;
    let half_width = (replicates >= MIN_REPLICATES_FOR_CI).then(|| {
        let var = velocities.iter().map(|v| (v - velocity).powi(2)).sum::<f64>() / (count - 1.0);
        Z_95 * (var / count).sqrt()
    });
    Ok(DriftEstimate {
        velocity,
        half_width,
        steps,
        replicates,
        seed,
    })
}

/// Stationary average of the mean step over the residue chain.
pub fn long_run_velocity(kernel: &EnvironmentKernel) -> Result<f64> {
    let n = kernel.period();
    let mut transition = Matrix::zeros(n);
    for (k, dist) in kernel.steps().iter().enumerate() {
        for (offset, p) in dist.iter() {
            let to = (k as i64 + offset).rem_euclid(n as i64) as usize;
            transition[(k, to)] += p;
        }
    }
    if !is_irreducible(&transition) {
        return Err(Error::ReducibleResidueChain);
    }
    // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1
    let mut system = transition.transpose();
    for i in 0..n {
        system[(i, i)] -= 1.0;
    }
    for j in 0..n {
        system[(n - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let pi = system.solve(&rhs).ok_or(Error::ReducibleResidueChain)?;
    Ok(kernel
        .steps()
        .iter()
        .zip(&pi)
        .map(|(dist, weight)| weight * mean_step(dist))
        .sum())
}

fn is_irreducible(transition: &Matrix) -> bool {
    let n = transition.order();
    let reaches_all = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let p = if forward { transition[(i, j)] } else { transition[(j, i)] };
                if p > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reaches_all(true) && reaches_all(false)
}

/// Whether the simulated drift sign agrees with the spectral verdict.
///
/// Errors when the kernel is fair within `tol` or the confidence interval
/// contains zero. Disagreements are logged; the spectral verdict stands.
pub fn agreement_check(kernel: &EnvironmentKernel, tol: f64, params: SimulationParams) -> Result<bool> {
    let report = classifier::classify_kernel(kernel, tol)?;
    if report.ln_c.abs() <= tol {
        return Err(Error::FairWithinTolerance { ln_c: report.ln_c });
    }
    let estimate = simulate(kernel, params.steps, params.replicates, params.seed)?;
    compare(report.ln_c, &estimate)
}

/// [`agreement_check`] for an estimate already in hand.
pub fn check_estimate(kernel: &EnvironmentKernel, tol: f64, estimate: &DriftEstimate) -> Result<bool> {
    let report = classifier::classify_kernel(kernel, tol)?;
    if report.ln_c.abs() <= tol {
        return Err(Error::FairWithinTolerance { ln_c: report.ln_c });
    }
    compare(report.ln_c, estimate)
}

fn compare(ln_c: f64, estimate: &DriftEstimate) -> Result<bool> {
    if !estimate.is_conclusive() {
        return Err(Error::InconclusiveSimulation {
            velocity: estimate.velocity,
            half_width: estimate.half_width.unwrap_or(f64::INFINITY),
        });
    }
    let agree = (estimate.velocity > 0.0) == (ln_c > 0.0);
    if !agree {
        log::warn!("simulated velocity {:e} disagrees with spectral ln c {ln_c:e}", estimate.velocity);
    }
    Ok(agree)
}
