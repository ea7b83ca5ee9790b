//! Simple spatially periodic games and their closed-form fairness constants.
//!
//! A game with spatial period `N` wins one unit with probability `p[x mod N]`
//! and loses one unit otherwise, where `x` is the current capital.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::{self, Probability};

/// Long-run behaviour of the capital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// Transient to minus infinity.
    Losing,
    /// Recurrent.
    Fair,
    /// Transient to plus infinity.
    Winning,
}

impl Classification {
    /// Verdict for a log fairness value under a symmetric tolerance band.
    pub fn from_ln_c(ln_c: f64, tol: f64) -> Self {
        if ln_c > tol {
            Classification::Winning
        } else if ln_c < -tol {
            Classification::Losing
        } else {
            Classification::Fair
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            Classification::Losing => Classification::Winning,
            Classification::Fair => Classification::Fair,
            Classification::Winning => Classification::Losing,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Classification::Losing => "Losing",
            Classification::Fair => "Fair",
            Classification::Winning => "Winning",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGame {
    probs: Vec<Probability>,
}

impl PeriodicGame {
    pub fn new(probs: Vec<Probability>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyGame);
        }
        Ok(Self { probs })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        validate_game(values)?;
        Self::new(
            values
                .iter()
                .map(|&v| Probability::from_parts(v, None))
                .collect(),
        )
    }

    pub fn period(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[Probability] {
        &self.probs
    }

    pub fn values(&self) -> Vec<f64> {
        self.probs.iter().map(Probability::value).collect()
    }

    /// Win probability at `residue` (taken modulo the period).
    pub fn win(&self, residue: usize) -> f64 {
        self.probs[residue % self.probs.len()].value()
    }

    pub fn validate(&self) -> Result<()> {
        validate_game(&self.values())
    }

    /// Errors with the first index whose probability is 0 or 1.
    pub fn require_interior(&self) -> Result<()> {
        match self.probs.iter().position(|p| !p.is_interior()) {
            Some(i) => Err(Error::DegenerateGame(i)),
            None => Ok(()),
        }
    }

    /// The game with every `p_i` replaced by `1 - p_i`.
    pub fn mirror(&self) -> Self {
        Self {
            probs: self.probs.iter().map(Probability::complement).collect(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.probs.iter().all(|p| p.exact().is_some())
    }
}

impl FromStr for PeriodicGame {
    type Err = Error;

    /// Comma-separated probabilities, e.g. `0.675,0.1` or `1/2,1/4`.
    fn from_str(s: &str) -> Result<Self> {
        Self::new(probability::parse_list(s)?)
    }
}

impl fmt::Display for PeriodicGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Checks that a list of win probabilities forms a valid game.
pub fn validate_game(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyGame);
    }
    match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(i) => Err(Error::InvalidProbability(i)),
        None => Ok(()),
    }
}

/// `prod p_i / (1 - p_i)`: below, at, or above 1 for losing, fair, winning.
pub fn fairness_constant(game: &PeriodicGame) -> Result<f64> {
    game.require_interior()?;
    Ok(game
        .probs
        .iter()
        .map(|p| p.value() / (1.0 - p.value()))
        .product())
}

/// Exact fairness constant, when every entry carries an exact rational value.
pub fn fairness_constant_exact(game: &PeriodicGame) -> Result<Option<BigRational>> {
    game.require_interior()?;
    let mut acc = BigRational::one();
    for p in &game.probs {
        let Some(r) = p.exact() else {
            return Ok(None);
        };
        acc = acc * r / (BigRational::one() - r);
    }
    Ok(Some(acc))
}

/// Solves `prod p_i / (1 - p_i) = 1` for the missing first entry.
pub fn fair_completion(tail: &[Probability]) -> Result<Probability> {
    if let Some(i) = tail.iter().position(|p| !p.is_interior()) {
        return Err(Error::DegenerateGame(i + 1));
    }
    Ok(complete_fair(tail).expect("interior tail always completes"))
}

/// Fair completion allowing boundary entries, as long as the result is
/// defined (not both a 0 and a 1 in the tail).
pub(crate) fn complete_fair(tail: &[Probability]) -> Option<Probability> {
    let wins: f64 = tail.iter().map(Probability::value).product();
    let losses: f64 = tail.iter().map(|p| 1.0 - p.value()).product();
    if wins + losses == 0.0 {
        return None;
    }
    let value = losses / (wins + losses);
    let exact = tail
        .iter()
        .map(|p| p.exact().cloned())
        .collect::<Option<Vec<_>>>()
        .and_then(|exact| {
            let wins = exact.iter().fold(BigRational::one(), |acc, r| acc * r);
            let losses = exact
                .iter()
                .fold(BigRational::one(), |acc, r| acc * (BigRational::one() - r));
            let total = &wins + &losses;
            (!total.is_zero()).then(|| losses / total)
        });
    Some(Probability::from_parts(value, exact))
}

/// `scale * (1 - p)^2 / ((1 - p)^2 + p^2)`.
///
/// With `scale < 1` the game `(p, p, result)` is losing for every interior `p`.
pub fn losing_family_p2(p: &Probability, scale: &Probability) -> Result<Probability> {
    if !p.is_interior() {
        return Err(Error::DegenerateGame(0));
    }
    if !scale.is_interior() {
        return Err(Error::InvalidArgument(format!(
            "scale must lie strictly between 0 and 1, got {}",
            scale.value()
        )));
    }
    let x = p.value();
    let lose2 = (1.0 - x) * (1.0 - x);
    let value = scale.value() * lose2 / (lose2 + x * x);
    let exact = match (p.exact(), scale.exact()) {
        (Some(x), Some(s)) => {
            let lose = BigRational::one() - x;
            let lose2 = &lose * &lose;
            Some(s * &lose2 / (&lose2 + x * x))
        }
        _ => None,
    };
    Ok(Probability::from_parts(value, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn game(text: &str) -> PeriodicGame {
        text.parse().unwrap()
    }

    fn prob(text: &str) -> Probability {
        text.parse().unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_game(&[0.5, 0.5]).is_ok());
        assert!(validate_game(&[0.675, 0.1]).is_ok());
        assert_eq!(validate_game(&[1.2, 0.5]), Err(Error::InvalidProbability(0)));
        assert_eq!(validate_game(&[]), Err(Error::EmptyGame));
        assert_eq!(
            "0.5,0.5,-0.1".parse::<PeriodicGame>(),
            Err(Error::InvalidProbability(2))
        );
    }

    #[test]
    fn fairness_constant_examples() {
        assert_eq!(fairness_constant(&game("0.5,0.5")).unwrap(), 1.0);
        let c = fairness_constant(&game("0.675,0.1")).unwrap();
        assert!((c - 0.0675 / 0.2925).abs() < 1e-15);
        assert!((c - 0.230769230769).abs() < 1e-12);
        assert!((fairness_constant(&game("0.9,0.5,0.5")).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn fairness_constant_requires_interior() {
        assert_eq!(fairness_constant(&game("0.5,1")), Err(Error::DegenerateGame(1)));
        assert_eq!(fairness_constant(&game("0,0.5")), Err(Error::DegenerateGame(0)));
    }

    #[test]
    fn exact_fairness_constant() {
        let c = fairness_constant_exact(&game("0.675,0.1")).unwrap().unwrap();
        assert_eq!(c, BigRational::new(3.into(), 13.into()));
        let fair = fairness_constant_exact(&game("25/26,1/6,1/6")).unwrap().unwrap();
        assert!(fair.is_one());
        assert!(fairness_constant_exact(&PeriodicGame::from_values(&[0.5]).unwrap())
            .unwrap()
            .is_none());
    }

    #[test]
    fn fair_completion_examples() {
        assert_eq!(fair_completion(&[prob("0.5")]).unwrap().value(), 0.5);
        assert_eq!(fair_completion(&[prob("0.25")]).unwrap().value(), 0.75);
        let p0 = fair_completion(&[prob("1/6"), prob("1/6")]).unwrap();
        assert!((p0.value() - 25.0 / 26.0).abs() < 1e-15);
        assert_eq!(p0.exact().unwrap(), &BigRational::new(25.into(), 26.into()));
        assert_eq!(
            fair_completion(&[prob("0.5"), prob("1")]),
            Err(Error::DegenerateGame(2))
        );
    }

    #[test]
    fn boundary_completion_limit() {
        let p0 = complete_fair(&[prob("0"), prob("0")]).unwrap();
        assert_eq!(p0.value(), 1.0);
        assert!(complete_fair(&[prob("0"), prob("1")]).is_none());
    }

    #[test]
    fn losing_family_examples() {
        let q2 = losing_family_p2(&prob("3/4"), &prob("0.8")).unwrap();
        assert!((q2.value() - 0.08).abs() < 1e-15);
        assert_eq!(q2.exact().unwrap(), &BigRational::new(2.into(), 25.into()));
        let r2 = losing_family_p2(&prob("5/8"), &prob("0.9")).unwrap();
        assert!((r2.value() - 0.238235294117647).abs() < 1e-12);
        let half = losing_family_p2(&prob("1/2"), &prob("0.8")).unwrap();
        assert!((half.value() - 0.4).abs() < 1e-15);
        assert_eq!(
            losing_family_p2(&prob("1"), &prob("0.8")),
            Err(Error::DegenerateGame(0))
        );
        assert!(losing_family_p2(&prob("0.5"), &prob("1")).is_err());
    }

    #[test]
    fn classification_band() {
        assert_eq!(Classification::from_ln_c(1e-10, 1e-9), Classification::Fair);
        assert_eq!(Classification::from_ln_c(2e-9, 1e-9), Classification::Winning);
        assert_eq!(Classification::from_ln_c(-2e-9, 1e-9), Classification::Losing);
    }

    proptest! {
        #[test]
        fn completion_is_fair(tail in prop::collection::vec(0.01f64..0.99, 1..6)) {
            let tail: Vec<_> = tail.iter().map(|&v| Probability::new(v).unwrap()).collect();
            let p0 = fair_completion(&tail).unwrap();
            let mut probs = vec![p0.clone()];
            probs.extend(tail);
            let c = fairness_constant(&PeriodicGame::new(probs).unwrap()).unwrap();
            // p0 near 0 or 1 is only representable to eps / min(p0, 1 - p0)
            let p0 = p0.value();
            prop_assert!((c - 1.0).abs() < 1e-12 / p0.min(1.0 - p0).min(1.0));
        }

        #[test]
        fn mirror_inverts_constant(values in prop::collection::vec(0.05f64..0.95, 1..6)) {
            let g = PeriodicGame::from_values(&values).unwrap();
            let c = fairness_constant(&g).unwrap();
            let m = fairness_constant(&g.mirror()).unwrap();
            prop_assert!((m - 1.0 / c).abs() <= 1e-12 * (1.0 / c).max(1.0));
        }

        #[test]
        fn losing_family_is_losing(p in 0.001f64..0.999, scale in 0.01f64..0.99) {
            let p = Probability::new(p).unwrap();
            let p2 = losing_family_p2(&p, &Probability::new(scale).unwrap()).unwrap();
            let g = PeriodicGame::new(vec![p.clone(), p, p2]).unwrap();
            prop_assert!(fairness_constant(&g).unwrap() < 1.0);
        }
    }
}
