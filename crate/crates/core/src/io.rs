//! JSON text forms for games, kernels and schedules.
//!
//! Probabilities are written as text so that rationals like `"1/6"` survive
//! the round trip; plain JSON numbers are also accepted on input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::composer::{CompositionSchedule, EnvironmentKernel, StepDistribution};
use crate::error::{Error, Result};
use crate::game::PeriodicGame;
use crate::probability::Probability;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbabilityText {
    Text(String),
    Number(f64),
}

impl ProbabilityText {
    fn parse(&self) -> Result<Probability> {
        match self {
            ProbabilityText::Text(s) => s.parse(),
            ProbabilityText::Number(x) => Probability::new(*x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameJson {
    pub period: usize,
    pub p: Vec<ProbabilityText>,
}

impl GameJson {
    pub fn from_game(game: &PeriodicGame) -> Self {
        Self {
            period: game.period(),
            p: game
                .probs()
                .iter()
                .map(|p| ProbabilityText::Text(p.to_string()))
                .collect(),
        }
    }

    pub fn to_game(&self) -> Result<PeriodicGame> {
        if self.period != self.p.len() {
            return Err(Error::InvalidArgument(format!(
                "period {} does not match {} probabilities",
                self.period,
                self.p.len()
            )));
        }
        let probs = self
            .p
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.parse().map_err(|err| match err {
                    Error::InvalidProbability(_) => Error::InvalidProbability(i),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PeriodicGame::new(probs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelJson {
    pub period: usize,
    #[serde(rename = "R")]
    pub right: i64,
    #[serde(rename = "L")]
    pub left: i64,
    pub steps: Vec<BTreeMap<String, ProbabilityText>>,
    #[serde(default)]
    pub origin: usize,
}

impl KernelJson {
    pub fn from_kernel(kernel: &EnvironmentKernel) -> Self {
        Self {
            period: kernel.period(),
            right: kernel.right(),
            left: kernel.left(),
            steps: kernel
                .steps()
                .iter()
                .map(|d| {
                    d.iter()
                        .map(|(o, p)| (o.to_string(), ProbabilityText::Text(p.to_string())))
                        .collect()
                })
                .collect(),
            origin: kernel.origin(),
        }
    }

    pub fn to_kernel(&self) -> Result<EnvironmentKernel> {
        if self.period != self.steps.len() {
            return Err(Error::InvalidKernel(format!(
                "period {} does not match {} step distributions",
                self.period,
                self.steps.len()
            )));
        }
        let steps = self
            .steps
            .iter()
            .map(|entries| {
                let mut probs = BTreeMap::new();
                for (offset, p) in entries {
                    let offset: i64 = offset
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidKernel(format!("bad offset {offset:?}")))?;
                    probs.insert(offset, p.parse()?.value());
                }
                StepDistribution::new(probs)
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel = EnvironmentKernel::new(steps, self.origin)?;
        if kernel.right() != self.right || kernel.left() != self.left {
            return Err(Error::InvalidKernel(format!(
                "declared R = {}, L = {} but the steps span R = {}, L = {}",
                self.right,
                self.left,
                kernel.right(),
                kernel.left()
            )));
        }
        Ok(kernel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleJson {
    Deterministic {
        games: Vec<GameJson>,
        #[serde(default)]
        phase: usize,
    },
    Stochastic {
        first: GameJson,
        second: GameJson,
        weights: Vec<ProbabilityText>,
    },
}

impl ScheduleJson {
    pub fn from_schedule(schedule: &CompositionSchedule) -> Self {
        match schedule {
            CompositionSchedule::Deterministic { games, phase } => ScheduleJson::Deterministic {
                games: games.iter().map(GameJson::from_game).collect(),
                phase: *phase,
            },
            CompositionSchedule::Stochastic {
                first,
                second,
                weights,
            } => ScheduleJson::Stochastic {
                first: GameJson::from_game(first),
                second: GameJson::from_game(second),
                weights: weights
                    .iter()
                    .map(|w| ProbabilityText::Text(w.to_string()))
                    .collect(),
            },
        }
    }

    pub fn to_schedule(&self) -> Result<CompositionSchedule> {
        let schedule = match self {
            ScheduleJson::Deterministic { games, phase } => CompositionSchedule::Deterministic {
                games: games.iter().map(GameJson::to_game).collect::<Result<_>>()?,
                phase: *phase,
            },
            ScheduleJson::Stochastic {
                first,
                second,
                weights,
            } => CompositionSchedule::Stochastic {
                first: first.to_game()?,
                second: second.to_game()?,
                weights: weights
                    .iter()
                    .map(ProbabilityText::parse)
                    .collect::<Result<_>>()?,
            },
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

pub fn parse_game_json(text: &str) -> Result<PeriodicGame> {
    serde_json::from_str::<GameJson>(text)?.to_game()
}

pub fn parse_kernel_json(text: &str) -> Result<EnvironmentKernel> {
    serde_json::from_str::<KernelJson>(text)?.to_kernel()
}

pub fn parse_schedule_json(text: &str) -> Result<CompositionSchedule> {
    serde_json::from_str::<ScheduleJson>(text)?.to_schedule()
}

pub fn kernel_to_json(kernel: &EnvironmentKernel) -> String {
    serde_json::to_string_pretty(&KernelJson::from_kernel(kernel)).expect("kernel serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composer::compose_cycle;
    use proptest::prelude::*;

    #[test]
    fn game_json_example() {
        let g = parse_game_json(r#"{"period": 2, "p": ["0.675", "0.1"]}"#).unwrap();
        assert_eq!(g.values(), vec![0.675, 0.1]);
        let g = parse_game_json(r#"{"period": 3, "p": ["25/26", "1/6", 0.5]}"#).unwrap();
        assert_eq!(g.period(), 3);
        assert_eq!(
            parse_game_json(r#"{"period": 2, "p": ["0.5", "1.5"]}"#),
            Err(Error::InvalidProbability(1))
        );
        assert!(parse_game_json(r#"{"period": 3, "p": ["0.5"]}"#).is_err());
    }

    #[test]
    fn kernel_json_example() {
        let text = r#"{"period": 1, "R": 3, "L": 3,
            "steps": [{"-3": "0.125", "-1": "0.375", "1": "3/8", "3": 0.125}]}"#;
        let k = parse_kernel_json(text).unwrap();
        assert_eq!((k.right(), k.left()), (3, 3));
        assert_eq!(k.step(0).prob(1), 0.375);
    }

    #[test]
    fn kernel_json_rejects_inconsistent_bounds() {
        let text = r#"{"period": 1, "R": 2, "L": 1, "steps": [{"-1": "0.5", "1": "0.5"}]}"#;
        assert!(matches!(parse_kernel_json(text), Err(Error::InvalidKernel(_))));
        let text = r#"{"period": 2, "R": 1, "L": 1, "steps": [{"-1": "0.5", "1": "0.5"}]}"#;
        assert!(matches!(parse_kernel_json(text), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn schedule_json() {
        let text = r#"{"deterministic": {"games": [{"period": 2, "p": ["0.6", "0.4"]},
                                                    {"period": 2, "p": ["0.2", "0.8"]}], "phase": 1}}"#;
        let s = parse_schedule_json(text).unwrap();
        assert!(matches!(s, CompositionSchedule::Deterministic { phase: 1, .. }));
        let text = r#"{"stochastic": {"first": {"period": 2, "p": ["1/2", "1/2"]},
                                      "second": {"period": 2, "p": ["3/4", "1/4"]},
                                      "weights": ["0", "1/2"]}}"#;
        let s = parse_schedule_json(text).unwrap();
        let back = parse_schedule_json(&serde_json::to_string(&ScheduleJson::from_schedule(&s)).unwrap()).unwrap();
        assert_eq!(s, back);
    }

    proptest! {
        #[test]
        fn kernel_round_trip(values in prop::collection::vec(prop::collection::vec(0.01f64..0.99, 3), 1..4),
                             phase in 0usize..3) {
            let games: Vec<_> = values.iter().map(|v| PeriodicGame::from_values(v).unwrap()).collect();
            let k = compose_cycle(&games, phase).unwrap();
            prop_assert_eq!(parse_kernel_json(&kernel_to_json(&k)).unwrap(), k);
        }
    }
}
