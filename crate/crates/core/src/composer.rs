//! Building the environment kernel of a composite walk.
//!
//! Stochastic mixtures stay nearest-neighbour walks. A deterministic cycle of
//! `T` games is observed once per cycle, which gives a time-homogeneous walk in
//! the same spatial period with steps up to `±T`.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::game::PeriodicGame;
use crate::probability::Probability;

/// Tolerance on the total mass of a step distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Law of one step of a walk from a fixed residue: offset -> probability.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    probs: BTreeMap<i64, f64>,
}

impl StepDistribution {
    /// Drops zero-probability offsets and checks the total mass.
    pub fn new(probs: BTreeMap<i64, f64>) -> Result<Self> {
        if let Some((offset, p)) = probs.iter().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidKernel(format!(
                "offset {offset} has probability {p} outside [0, 1]"
            )));
        }
        let probs: BTreeMap<i64, f64> = probs.into_iter().filter(|(_, p)| *p > 0.0).collect();
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidKernel(format!(
                "step probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Nearest-neighbour step: `+1` with probability `up`, `-1` otherwise.
    pub fn nearest_neighbor(up: f64) -> Result<Self> {
        Self::new(BTreeMap::from([(-1, 1.0 - up), (1, up)]))
    }

    pub fn prob(&self, offset: i64) -> f64 {
        self.probs.get(&offset).copied().unwrap_or(0.0)
    }

    /// `(offset, probability)` pairs in ascending offset order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs.iter().map(|(&o, &p)| (o, p))
    }

    pub fn min_offset(&self) -> i64 {
        *self.probs.keys().next().expect("non-empty distribution")
    }

    pub fn max_offset(&self) -> i64 {
        *self.probs.keys().next_back().expect("non-empty distribution")
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Per-residue step laws of a walk in an `N`-periodic environment.
///
/// `origin` is the residue of the starting position. It only matters when the
/// walk lives on a sublattice, as happens for even temporal periods.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentKernel {
    steps: Vec<StepDistribution>,
    right: i64,
    left: i64,
    origin: usize,
}

impl EnvironmentKernel {
    pub fn new(steps: Vec<StepDistribution>, origin: usize) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidKernel("period must be at least 1".into()));
        }
        if origin >= steps.len() {
            return Err(Error::InvalidPhase {
                phase: origin,
                period: steps.len(),
            });
        }
        let right = steps.iter().map(StepDistribution::max_offset).max().unwrap_or(0);
        let left = -steps.iter().map(StepDistribution::min_offset).min().unwrap_or(0);
        if right < 1 || left < 1 {
            return Err(Error::InvalidKernel(format!(
                "walk needs steps in both directions (R = {right}, L = {left})"
            )));
        }
        if let Some(residue) = steps
            .iter()
            .position(|d| d.prob(-left) <= 0.0 || d.prob(right) <= 0.0)
        {
            return Err(Error::DegenerateDistribution(residue));
        }
        Ok(Self {
            steps,
            right,
            left,
            origin,
        })
    }

    pub fn period(&self) -> usize {
        self.steps.len()
    }

    /// Largest upward step `R`.
    pub fn right(&self) -> i64 {
        self.right
    }

    /// Largest downward step `L`.
    pub fn left(&self) -> i64 {
        self.left
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn steps(&self) -> &[StepDistribution] {
        &self.steps
    }

    pub fn step(&self, residue: usize) -> &StepDistribution {
        &self.steps[residue % self.steps.len()]
    }

    pub fn is_nearest_neighbor(&self) -> bool {
        self.right == 1 && self.left == 1
    }

    /// The kernel with every step reversed; mirrors a game `p -> 1 - p`.
    pub fn mirror(&self) -> Self {
        let n = self.period();
        let steps = (0..n)
            .map(|k| {
                // position x -> -x maps residue k to -k
                let source = &self.steps[(n - k) % n];
                StepDistribution {
                    probs: source.iter().map(|(o, p)| (-o, p)).collect(),
                }
            })
            .collect();
        Self {
            steps,
            right: self.left,
            left: self.right,
            origin: (n - self.origin) % n,
        }
    }
}

/// How simple games combine into a composite game.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositionSchedule {
    /// Play `games[0], games[1], ..., games[T-1]` in turn, starting from a
    /// capital congruent to `phase`.
    Deterministic {
        games: Vec<PeriodicGame>,
        phase: usize,
    },
    /// At residue `i`, play `first` with probability `weights[i]`, else `second`.
    Stochastic {
        first: PeriodicGame,
        second: PeriodicGame,
        weights: Vec<Probability>,
    },
}

impl CompositionSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            CompositionSchedule::Deterministic { games, phase } => {
                let period = common_period(games)?;
                if *phase >= period {
                    return Err(Error::InvalidPhase {
                        phase: *phase,
                        period,
                    });
                }
                Ok(())
            }
            CompositionSchedule::Stochastic {
                first,
                second,
                weights,
            } => check_mixture_shape(first, second, weights),
        }
    }

    /// The ingredient games.
    pub fn games(&self) -> Vec<&PeriodicGame> {
        match self {
            CompositionSchedule::Deterministic { games, .. } => games.iter().collect(),
            CompositionSchedule::Stochastic { first, second, .. } => vec![first, second],
        }
    }

    pub fn kernel(&self) -> Result<EnvironmentKernel> {
        match self {
            CompositionSchedule::Deterministic { games, phase } => compose_cycle(games, *phase),
            CompositionSchedule::Stochastic {
                first,
                second,
                weights,
            } => lift(&mix(first, second, weights)?),
        }
    }
}

fn common_period(games: &[PeriodicGame]) -> Result<usize> {
    let first = games.first().ok_or(Error::EmptySchedule)?;
    let period = first.period();
    if let Some(g) = games.iter().find(|g| g.period() != period) {
        return Err(Error::PeriodMismatch {
            expected: period,
            found: g.period(),
        });
    }
    Ok(period)
}

fn check_mixture_shape(
    first: &PeriodicGame,
    second: &PeriodicGame,
    weights: &[Probability],
) -> Result<()> {
    if first.period() != second.period() {
        return Err(Error::PeriodMismatch {
            expected: first.period(),
            found: second.period(),
        });
    }
    if weights.len() != first.period() {
        return Err(Error::WeightCountMismatch {
            expected: first.period(),
            found: weights.len(),
        });
    }
    Ok(())
}

/// Per-residue mixture `g_i p_i + (1 - g_i) q_i`.
pub fn mix(
    first: &PeriodicGame,
    second: &PeriodicGame,
    weights: &[Probability],
) -> Result<PeriodicGame> {
    check_mixture_shape(first, second, weights)?;
    let probs = first
        .probs()
        .iter()
        .zip(second.probs())
        .zip(weights)
        .map(|((p, q), g)| {
            // q + g (p - q) returns p exactly when p == q
            let value = (q.value() + g.value() * (p.value() - q.value())).clamp(0.0, 1.0);
            let exact = match (p.exact(), q.exact(), g.exact()) {
                (Some(p), Some(q), Some(g)) => Some(q + g * (p - q)),
                _ => None,
            };
            Probability::from_parts(value, exact)
        })
        .collect();
    PeriodicGame::new(probs)
}

/// The nearest-neighbour kernel of a single game.
pub fn lift(game: &PeriodicGame) -> Result<EnvironmentKernel> {
    game.require_interior()?;
    let steps = game
        .values()
        .into_iter()
        .map(StepDistribution::nearest_neighbor)
        .collect::<Result<Vec<_>>>()?;
    EnvironmentKernel::new(steps, 0)
}

/// Kernel of `Y_n = X_{Tn}` for the cycle `games[0], ..., games[T-1]`.
///
/// Each residue's law is the exact `T`-step path sum, accumulated over
/// offsets in ascending order so results are bit-reproducible.
pub fn compose_cycle(games: &[PeriodicGame], phase: usize) -> Result<EnvironmentKernel> {
    let period = common_period(games)?;
    if phase >= period {
        return Err(Error::InvalidPhase { phase, period });
    }
    for g in games {
        g.require_interior()?;
    }
    let modulus = period as i64;
    let steps = (0..period)
        .map(|start| {
            let mut dist = BTreeMap::from([(0i64, 1.0f64)]);
            for game in games {
                let mut next = BTreeMap::new();
                for (&offset, &mass) in &dist {
                    let residue = (start as i64 + offset).rem_euclid(modulus) as usize;
                    let up = game.win(residue);
                    *next.entry(offset - 1).or_insert(0.0) += mass * (1.0 - up);
                    *next.entry(offset + 1).or_insert(0.0) += mass * up;
                }
                dist = next;
            }
            StepDistribution::new(dist)
        })
        .collect::<Result<Vec<_>>>()?;
    EnvironmentKernel::new(steps, phase)
}

/// Moves the walk to the sublattice it actually lives on.
///
/// If every step is a multiple of `s > 1`, positions reachable from the origin
/// are `origin + s u`; the walk in `u` has offsets divided by `s` and period
/// `N / gcd(N, s)`. Returns the kernel unchanged with scale 1 otherwise.
pub fn rescale(kernel: &EnvironmentKernel) -> (EnvironmentKernel, i64) {
    let scale = kernel
        .steps
        .iter()
        .flat_map(|d| d.probs.keys())
        .filter(|&&o| o != 0)
        .fold(0i64, |acc, &o| acc.gcd(&o));
    if scale <= 1 {
        return (kernel.clone(), 1);
    }
    let n = kernel.period() as i64;
    let new_period = n / n.gcd(&scale);
    let steps: Vec<StepDistribution> = (0..new_period)
        .map(|u| {
            let residue = (scale * u + kernel.origin as i64).rem_euclid(n) as usize;
            StepDistribution {
                probs: kernel.steps[residue]
                    .iter()
                    .map(|(o, p)| (o / scale, p))
                    .collect(),
            }
        })
        .collect();
    let rescaled = EnvironmentKernel {
        steps,
        right: kernel.right / scale,
        left: kernel.left / scale,
        origin: 0,
    };
    (rescaled, scale)
}

/// The common step law when the kernel is homogeneous (pointwise within 1e-12).
pub fn collapse_iid(kernel: &EnvironmentKernel) -> Option<StepDistribution> {
    let first = &kernel.steps[0];
    let homogeneous = kernel.steps[1..].iter().all(|d| {
        first
            .probs
            .keys()
            .chain(d.probs.keys())
            .all(|&o| (first.prob(o) - d.prob(o)).abs() <= MASS_TOLERANCE)
    });
    homogeneous.then(|| first.clone())
}

pub fn mean_step(dist: &StepDistribution) -> f64 {
    dist.iter().map(|(o, p)| o as f64 * p).sum()
}
