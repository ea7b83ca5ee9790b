//! Built-in families reproducing the published figures.
//!
//! Each family fixes the caption's constants. Caption choices that the
//! caller leaves unselected become extra free axes, appended after the
//! plotted ones.

use std::collections::BTreeMap;

use super::{Family, ParamAxis};
use crate::composer::CompositionSchedule;
use crate::error::{Error, Result};
use crate::game::{complete_fair, fair_completion, losing_family_p2, PeriodicGame};
use crate::probability::Probability;

pub const FIGURE_IDS: [u32; 8] = [2, 3, 5, 6, 7, 8, 9, 10];

/// Fixed caption parameters by name (`g0`, `q0`, `q1`, `q`, `r`).
pub type FigureSelection = BTreeMap<String, Probability>;

/// A caption parameter: fixed by the selection, or read from an axis.
#[derive(Clone)]
enum Slot {
    Fixed(Probability),
    Axis(usize),
}

impl Slot {
    fn get(&self, x: &[f64]) -> Result<Probability> {
        match self {
            Slot::Fixed(p) => Ok(p.clone()),
            Slot::Axis(i) => Probability::new(x[*i]),
        }
    }
}

struct Builder {
    figure: u32,
    selection: FigureSelection,
    axes: Vec<ParamAxis>,
}

impl Builder {
    fn new(figure: u32, selection: FigureSelection, allowed: &[&str]) -> Result<Self> {
        if let Some(name) = selection.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::FigureParameter {
                figure,
                message: format!("unknown parameter {name:?}; expected one of {allowed:?}"),
            });
        }
        Ok(Self {
            figure,
            selection,
            axes: Vec::new(),
        })
    }

    fn axis(&mut self, name: &str) -> Slot {
        self.axes.push(ParamAxis::new(name, 0.0, 1.0));
        Slot::Axis(self.axes.len() - 1)
    }

    /// Selected value, else the caption default, else a new axis.
    fn slot(&mut self, name: &str, default: Option<Probability>) -> Slot {
        match self.selection.get(name).cloned().or(default) {
            Some(p) => Slot::Fixed(p),
            None => self.axis(name),
        }
    }

    fn family(
        self,
        binding: impl Fn(&[f64]) -> Result<CompositionSchedule> + Send + Sync + 'static,
    ) -> Family {
        Family::new(format!("fig{}", self.figure), self.axes, binding)
    }
}

fn exact(text: &str) -> Probability {
    text.parse().expect("valid constant")
}

fn fair(tail: &[Probability], figure: u32) -> Result<Probability> {
    complete_fair(tail).ok_or_else(|| Error::FigureParameter {
        figure,
        message: "no fair game with both a certain win and a certain loss".into(),
    })
}

/// The family plotted in figure `id`.
pub fn figure_family(id: u32, selection: FigureSelection) -> Result<Family> {
    match id {
        2 => {
            let mut b = Builder::new(2, selection, &["g0"])?;
            let g1 = b.axis("g1");
            let g0 = b.slot("g0", None);
            let half = exact("1/2");
            let quarter = exact("1/4");
            let first = PeriodicGame::new(vec![fair_completion(&[half.clone()])?, half])?;
            let second = PeriodicGame::new(vec![fair_completion(&[quarter.clone()])?, quarter])?;
            Ok(b.family(move |x| {
                Ok(CompositionSchedule::Stochastic {
                    first: first.clone(),
                    second: second.clone(),
                    weights: vec![g0.get(x)?, g1.get(x)?],
                })
            }))
        }
        3 => {
            let mut b = Builder::new(3, selection, &["q0"])?;
            let g1 = b.axis("g1");
            let g0 = b.axis("g0");
            let q0 = b.slot("q0", None);
            let first = PeriodicGame::new(vec![exact("0.675"), exact("0.1")])?;
            Ok(b.family(move |x| {
                Ok(CompositionSchedule::Stochastic {
                    first: first.clone(),
                    second: PeriodicGame::new(vec![q0.get(x)?, exact("0.75")])?,
                    weights: vec![g0.get(x)?, g1.get(x)?],
                })
            }))
        }
        5 | 6 => {
            let name = if id == 5 { "q1" } else { "q0" };
            let mut b = Builder::new(id, selection, &[name])?;
            let g1 = b.axis("g1");
            let g0 = b.axis("g0");
            let q = b.slot(name, None);
            let half = exact("1/2");
            let first = PeriodicGame::new(vec![fair_completion(&[half.clone(), half.clone()])?, half.clone(), half])?;
            Ok(b.family(move |x| {
                let q = q.get(x)?;
                let second = if id == 5 {
                    vec![fair(&[q.clone(), q.clone()], id)?, q.clone(), q]
                } else {
                    vec![q.clone(), fair(&[q.clone(), q.clone()], id)?, q]
                };
                let g1 = g1.get(x)?;
                Ok(CompositionSchedule::Stochastic {
                    first: first.clone(),
                    second: PeriodicGame::new(second)?,
                    weights: vec![g0.get(x)?, g1.clone(), g1],
                })
            }))
        }
        7..=10 => {
            let mut b = Builder::new(id, selection, &["q", "r"])?;
            let p = b.axis("p");
            let q_default = if id == 7 || id == 10 { "0.1" } else { "3/4" };
            let q = b.slot("q", Some(exact(q_default)));
            let r = b.slot("r", None);
            let triple = move |x: &Probability, scale: Option<&str>| -> Result<PeriodicGame> {
                let last = match scale {
                    None => fair(&[x.clone(), x.clone()], id)?,
                    Some(s) => losing_family_p2(x, &exact(s))?,
                };
                PeriodicGame::new(vec![x.clone(), x.clone(), last])
            };
            let fair_games = id <= 8;
            Ok(b.family(move |x| {
                let scales: [Option<&str>; 3] = if fair_games {
                    [None; 3]
                } else {
                    [Some("0.8"), Some("0.8"), Some("0.9")]
                };
                Ok(CompositionSchedule::Deterministic {
                    games: vec![
                        triple(&p.get(x)?, scales[0])?,
                        triple(&q.get(x)?, scales[1])?,
                        triple(&r.get(x)?, scales[2])?,
                    ],
                    phase: 0,
                })
            }))
        }
        other => Err(Error::UnknownFigure(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::DEFAULT_TOLERANCE;
    use crate::game::{fairness_constant, Classification};
    use crate::sweep::{count_sign_changes, sweep_grid, trace_fairness};

    fn select(pairs: &[(&str, &str)]) -> FigureSelection {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.parse().unwrap()))
            .collect()
    }

    #[test]
    fn unknown_figures_and_parameters() {
        assert!(matches!(figure_family(4, select(&[])), Err(Error::UnknownFigure(4))));
        assert!(matches!(
            figure_family(9, select(&[("g0", "0.5")])),
            Err(Error::FigureParameter { figure: 9, .. })
        ));
    }

    #[test]
    fn free_axes_follow_selection() {
        let names = |f: &Family| f.axes.iter().map(|a| a.name.clone()).collect::<Vec<_>>();
        assert_eq!(names(&figure_family(2, select(&[])).unwrap()), ["g1", "g0"]);
        assert_eq!(names(&figure_family(2, select(&[("g0", "0")])).unwrap()), ["g1"]);
        assert_eq!(names(&figure_family(3, select(&[("q0", "0.25")])).unwrap()), ["g1", "g0"]);
        assert_eq!(names(&figure_family(9, select(&[])).unwrap()), ["p", "r"]);
        assert_eq!(names(&figure_family(9, select(&[("r", "5/8")])).unwrap()), ["p"]);
    }

    #[test]
    fn fig2_games_and_curve() {
        let family = figure_family(2, select(&[("g0", "0")])).unwrap();
        let CompositionSchedule::Stochastic { first, second, .. } = family.schedule(&[0.3]).unwrap() else {
            panic!("stochastic family");
        };
        assert_eq!(first.values(), [0.5, 0.5]);
        assert_eq!(second.values(), [0.75, 0.25]);
        for row in sweep_grid(&family, &[101], DEFAULT_TOLERANCE).unwrap() {
            let g1 = row.params[0];
            let expected = (1.0 + 4.0 * g1 / (3.0 - g1)).ln();
            assert!((row.ln_c - expected).abs() < 1e-12);
            assert_eq!(row.verdict, Classification::Winning);
        }
    }

    #[test]
    fn fig2_diagonal_is_fair() {
        let family = figure_family(2, select(&[])).unwrap();
        for i in 0..=20 {
            let g = i as f64 / 20.0;
            assert!(family.classify(&[g, g], DEFAULT_TOLERANCE).unwrap().ln_c.abs() < 1e-12);
        }
    }

    #[test]
    fn fig3_winning_above_curve() {
        let family = figure_family(3, select(&[("q0", "0.25")])).unwrap();
        let trace = trace_fairness(&family, 20, (0.0, 1.0), DEFAULT_TOLERANCE).unwrap();
        let points = trace.points();
        assert!(!points.is_empty());
        for (g1, g0) in points {
            let expected = (1.0 - (0.75 - 0.65 * g1) - 0.25) / 0.425;
            assert!((g0 - expected).abs() < 1e-8, "{g1} {g0} {expected}");
            let above = family.classify(&[g1, (g0 + 0.02).min(1.0)], DEFAULT_TOLERANCE).unwrap();
            assert_eq!(above.verdict, Classification::Winning);
        }
    }

    #[test]
    fn fig5_losing_above_winning_below() {
        let family = figure_family(5, select(&[("q1", "1/3")])).unwrap();
        let trace = trace_fairness(&family, 10, (0.0, 1.0), DEFAULT_TOLERANCE).unwrap();
        let points = trace.points();
        assert!(points.len() >= 5);
        for (g1, g0) in points {
            let fair = family.classify(&[g1, g0], DEFAULT_TOLERANCE).unwrap();
            assert_eq!(fair.verdict, Classification::Fair);
            if g0 < 0.98 {
                let above = family.classify(&[g1, g0 + 0.02], DEFAULT_TOLERANCE).unwrap();
                assert_eq!(above.verdict, Classification::Losing);
            }
            if g0 > 0.02 {
                let below = family.classify(&[g1, g0 - 0.02], DEFAULT_TOLERANCE).unwrap();
                assert_eq!(below.verdict, Classification::Winning);
            }
        }
    }

    #[test]
    fn fig6_shifted_game() {
        let family = figure_family(6, select(&[("q0", "1/6")])).unwrap();
        let CompositionSchedule::Stochastic { second, .. } = family.schedule(&[0.5, 0.5]).unwrap() else {
            panic!("stochastic family");
        };
        assert!((fairness_constant(&second).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(second.win(0), second.win(2));
    }

    #[test]
    fn fig9_ingredients_are_losing() {
        let family = figure_family(9, select(&[])).unwrap();
        for p in [0.05, 0.3, 0.5, 0.77, 0.95] {
            for r in [0.1, 0.5, 5.0 / 8.0, 0.9] {
                for game in family.schedule(&[p, r]).unwrap().games() {
                    assert!(fairness_constant(game).unwrap() < 1.0);
                }
            }
        }
    }

    #[test]
    fn fig10_scales() {
        // the caption's q2 = 0.8890... is 0.9 (1 - q)^2 / ((1 - q)^2 + q^2);
        // its own formula, used here, gives 0.8 * 81 / 82
        let family = figure_family(10, select(&[("r", "3/4")])).unwrap();
        let schedule = family.schedule(&[0.5]).unwrap();
        let games = schedule.games();
        assert_eq!(games[1].probs()[2].to_string(), "324/410".parse::<Probability>().unwrap().to_string());
        assert!((games[1].win(2) - 0.8 * 81.0 / 82.0).abs() < 1e-15);
        assert!((0.9f64 * 81.0 / 82.0 - 0.8890).abs() < 1e-4);
        assert!((games[2].win(2) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn fig9_three_transitions() {
        let family = figure_family(9, select(&[("r", "5/8")])).unwrap();
        let changes = count_sign_changes(&family, 1001, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(changes.crossings.len(), 3);
        let values: Vec<f64> = changes.crossings.iter().map(|c| c.param_value).collect();
        for (got, approx) in values.iter().zip([0.116, 0.453, 0.761]) {
            assert!((got - approx).abs() < 0.01, "{values:?}");
        }
    }
}
