//! Winning / fair / losing verdicts.
//!
//! With eigenvalue magnitudes of the monodromy sorted as
//! `d_1 <= ... <= d_{R+L}` (`d_i = ln |lambda_i|`), the walk is transient to
//! `+inf`, recurrent, or transient to `-inf` as `d_R + d_{R+1}` is positive,
//! zero, or negative. Nearest-neighbour walks reduce to
//! `ln prod (up_i / down_i)`, which is evaluated in closed form when possible.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::composer::{self, CompositionSchedule, EnvironmentKernel};
use crate::error::{Error, Result};
use crate::game::{self, Classification, PeriodicGame};
use crate::spectral;

/// Half-width of the fair band on `ln c`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Spectral,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "ClosedForm",
            Method::Spectral => "Spectral",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub verdict: Classification,
    pub ln_c: f64,
    /// Log eigenvalue magnitudes of the monodromy, ascending.
    pub d: Vec<f64>,
    #[serde(rename = "R")]
    pub right: i64,
    #[serde(rename = "L")]
    pub left: i64,
    pub method: Method,
    /// Set only when `|ln_c| <= 10 tol` and the characteristic polynomial
    /// has a double root at 1.
    pub double_root_flag: bool,
    pub tolerance: f64,
    /// Lattice spacing the walk was rescaled by before analysis.
    pub scale: i64,
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Classifies any kernel by the spectral criterion.
///
/// The kernel is first moved to the sublattice it lives on. A homogeneous
/// nearest-neighbour walk (possibly lazy) is decided by its up/down ratio.
pub fn classify_kernel(kernel: &EnvironmentKernel, tol: f64) -> Result<SpectralReport> {
    check_tolerance(tol)?;
    let (walk, scale) = composer::rescale(kernel);
    let spectrum = spectral::kernel_spectrum(&walk)?;
    let d = spectrum.spectrum.log_magnitudes();
    let right = walk.right();
    let (ln_c, method) = if walk.period() == 1 && walk.is_nearest_neighbor() {
        let step = walk.step(0);
        (step.prob(1).ln() - step.prob(-1).ln(), Method::ClosedForm)
    } else {
        let r = right as usize;
        (d[r - 1] + d[r], Method::Spectral)
    };
    Ok(finish(ln_c, d, &walk, method, spectrum.unit_defect, tol, scale))
}

fn finish(
    ln_c: f64,
    d: Vec<f64>,
    walk: &EnvironmentKernel,
    method: Method,
    unit_defect: f64,
    tol: f64,
    scale: i64,
) -> SpectralReport {
    let double_root_flag = ln_c.abs() <= 10.0 * tol && unit_defect <= 10.0 * tol;
    SpectralReport {
        verdict: Classification::from_ln_c(ln_c, tol),
        ln_c,
        d,
        right: walk.right(),
        left: walk.left(),
        method,
        double_root_flag,
        tolerance: tol,
        scale,
    }
}

/// Classifies a composite game.
///
/// Mixtures are nearest-neighbour walks and use the closed form. Cycles go
/// through the derived `T`-step kernel; when every input is an exact rational
/// and the rescaled walk is nearest-neighbour, the closed form is evaluated
/// exactly instead.
pub fn classify_schedule(schedule: &CompositionSchedule, tol: f64) -> Result<SpectralReport> {
    check_tolerance(tol)?;
    schedule.validate()?;
    match schedule {
        CompositionSchedule::Stochastic {
            first,
            second,
            weights,
        } => {
            let mixed = composer::mix(first, second, weights)?;
            classify_nearest_neighbor_game(&mixed, tol)
        }
        CompositionSchedule::Deterministic { games, phase } => {
            let kernel = composer::compose_cycle(games, *phase)?;
            if let Some(c) = exact_cycle_constant(games, *phase) {
                let (walk, scale) = composer::rescale(&kernel);
                let spectrum = spectral::kernel_spectrum(&walk)?;
                let d = spectrum.spectrum.log_magnitudes();
                return Ok(finish(ln_of_ratio(&c), d, &walk, Method::ClosedForm, spectrum.unit_defect, tol, scale));
            }
            classify_kernel(&kernel, tol)
        }
    }
}

fn classify_nearest_neighbor_game(game: &PeriodicGame, tol: f64) -> Result<SpectralReport> {
    let kernel = composer::lift(game)?;
    let ln_c = match game::fairness_constant_exact(game)? {
        Some(c) => ln_of_ratio(&c),
        None => game
            .values()
            .iter()
            .map(|&p| p.ln() - (-p).ln_1p())
            .sum(),
    };
    let spectrum = spectral::kernel_spectrum(&kernel)?;
    let d = spectrum.spectrum.log_magnitudes();
    Ok(finish(ln_c, d, &kernel, Method::ClosedForm, spectrum.unit_defect, tol, 1))
}

fn ln_of_ratio(c: &BigRational) -> f64 {
    if c.is_one() {
        return 0.0;
    }
    match (c.numer().to_f64(), c.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n.ln() - d.ln(),
        _ => c.to_f64().map_or(f64::NAN, f64::ln),
    }
}

/// Exact `prod up/down` over the sublattice of a cycle, when all games are
/// exact and the rescaled walk is nearest-neighbour.
fn exact_cycle_constant(games: &[PeriodicGame], phase: usize) -> Option<BigRational> {
    let exact: Vec<Vec<BigRational>> = games
        .iter()
        .map(|g| g.probs().iter().map(|p| p.exact().cloned()).collect())
        .collect::<Option<_>>()?;
    let period = games[0].period() as i64;
    let laws: Vec<BTreeMap<i64, BigRational>> = (0..period)
        .map(|start| {
            let mut dist = BTreeMap::from([(0i64, BigRational::one())]);
            for game in &exact {
                let mut next: BTreeMap<i64, BigRational> = BTreeMap::new();
                for (offset, mass) in &dist {
                    let up = &game[(start + offset).rem_euclid(period) as usize];
                    let down = BigRational::one() - up;
                    *next.entry(offset - 1).or_insert_with(BigRational::zero) += mass * down;
                    *next.entry(offset + 1).or_insert_with(BigRational::zero) += mass * up;
                }
                dist = next;
            }
            dist.retain(|_, p| !p.is_zero());
            dist
        })
        .collect();

    let scale = laws
        .iter()
        .flat_map(|law| law.keys())
        .filter(|&&o| o != 0)
        .fold(0i64, |acc, &o| acc.gcd(&o));
    let reach = laws.iter().flat_map(|law| law.keys()).map(|o| o.abs()).max()?;
    if scale == 0 || reach != scale {
        return None;
    }
    let sub_period = period / period.gcd(&scale);
    let mut c = BigRational::one();
    for u in 0..sub_period {
        let law = &laws[(scale * u + phase as i64).rem_euclid(period) as usize];
        c = c * law.get(&scale)? / law.get(&-scale)?;
    }
    Some(c)
}

/// Closed-form fairness constant of a nearest-neighbour game.
pub fn fairness_c(game: &PeriodicGame) -> Result<f64> {
    game::fairness_constant(game)
}
