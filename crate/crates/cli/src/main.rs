//! `parrondo`: classify, compose, simulate and sweep composite games.
//!
//! Exit status is 0 on success, 1 for bad input and 2 when a numerical
//! routine fails (root refinement, inconclusive simulation).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parrondo::io::{kernel_to_json, parse_kernel_json, parse_schedule_json};
use parrondo::probability::parse_list;
use parrondo::sweep::{self, FigureSelection};
use parrondo::{
    classify_kernel, classify_schedule, oracle, CompositionSchedule, EnvironmentKernel, Error, PeriodicGame,
    Probability, DEFAULT_TOLERANCE,
};

#[derive(Parser)]
#[command(name = "parrondo", version, about = "Composite games of chance as random walks in periodic environments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a game, schedule or kernel is winning, fair or losing.
    Classify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Print the step kernel of a game or schedule as JSON.
    Compose {
        #[command(flatten)]
        input: Input,
    },
    /// Estimate the drift by Monte Carlo.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 32)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compare the drift sign with the spectral verdict; an
        /// interval straddling zero is a numerical failure.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Run a grid, crossing or fairness-curve sweep over a figure family.
    Sweep {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = Mode::Grid)]
        mode: Mode,
        /// Points per axis; one value applies to every axis.
        #[arg(long, value_delimiter = ',', default_value = "101")]
        resolution: Vec<usize>,
        /// y bracket for `--mode trace`, as "lo,hi".
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.0, 1.0])]
        y_range: Vec<f64>,
    },
    /// Reproduce the data behind a figure as a CSV grid.
    Figure {
        #[command(flatten)]
        family: FamilyArgs,
        /// Points per axis; one value applies to every axis.
        #[arg(long, value_delimiter = ',', default_value = "1001")]
        resolution: Vec<usize>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputSource {
    /// One game: "p0,p1,...".
    #[arg(long)]
    game: Option<String>,
    /// A deterministic cycle: "p0,p1;q0,q1;...".
    #[arg(long)]
    games: Option<String>,
    /// Two games mixed per residue: "p0,p1;q0,q1" (needs --weights).
    #[arg(long, requires = "weights")]
    mix: Option<String>,
    /// Kernel JSON file.
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Schedule JSON file.
    #[arg(long)]
    schedule: Option<PathBuf>,
}

#[derive(Args)]
struct Input {
    #[command(flatten)]
    source: InputSource,
    /// Mixing weights "g0,g1,...": probability of playing the first game.
    #[arg(long)]
    weights: Option<String>,
    /// Starting residue of the cycle.
    #[arg(long, default_value_t = 0)]
    phase: usize,
}

#[derive(Args)]
struct FamilyArgs {
    /// Figure number.
    #[arg(long)]
    id: u32,
    #[arg(long)]
    g0: Option<Probability>,
    #[arg(long)]
    q0: Option<Probability>,
    #[arg(long)]
    q1: Option<Probability>,
    #[arg(long)]
    q: Option<Probability>,
    #[arg(long)]
    r: Option<Probability>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Grid,
    Crossings,
    Trace,
}

enum Target {
    Schedule(CompositionSchedule),
    Kernel(EnvironmentKernel),
}

impl Target {
    fn kernel(self) -> Result<EnvironmentKernel, Error> {
        match self {
            Target::Schedule(s) => s.kernel(),
            Target::Kernel(k) => Ok(k),
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn games(text: &str) -> Result<Vec<PeriodicGame>, Error> {
    text.split(';').map(str::parse).collect()
}

impl Input {
    fn target(&self) -> Result<Target, Error> {
        let s = &self.source;
        if self.weights.is_some() && s.mix.is_none() {
            return Err(Error::InvalidArgument("--weights only applies to --mix".into()));
        }
        let schedule = if let Some(g) = &s.game {
            CompositionSchedule::Deterministic {
                games: vec![g.parse()?],
                phase: self.phase,
            }
        } else if let Some(g) = &s.games {
            CompositionSchedule::Deterministic {
                games: games(g)?,
                phase: self.phase,
            }
        } else if let Some(m) = &s.mix {
            let pair = games(m)?;
            let [first, second]: [PeriodicGame; 2] = pair.try_into().map_err(|v: Vec<_>| {
                Error::InvalidArgument(format!("--mix takes two games, got {}", v.len()))
            })?;
            CompositionSchedule::Stochastic {
                first,
                second,
                weights: parse_list(self.weights.as_deref().unwrap_or_default())?,
            }
        } else if let Some(path) = &s.kernel {
            return Ok(Target::Kernel(parse_kernel_json(&read(path)?)?));
        } else if let Some(path) = &s.schedule {
            parse_schedule_json(&read(path)?)?
        } else {
            unreachable!("clap enforces one input")
        };
        schedule.validate()?;
        Ok(Target::Schedule(schedule))
    }
}

impl FamilyArgs {
    fn family(&self) -> Result<sweep::Family, Error> {
        let mut selection = FigureSelection::new();
        for (name, value) in [("g0", &self.g0), ("q0", &self.q0), ("q1", &self.q1), ("q", &self.q), ("r", &self.r)] {
            if let Some(v) = value {
                selection.insert(name.to_string(), v.clone());
            }
        }
        sweep::figure_family(self.id, selection)
    }

    fn output(&self) -> Result<Box<dyn Write>, Error> {
        Ok(match &self.out {
            Some(path) => Box::new(
                fs::File::create(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?,
            ),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn per_axis(resolution: &[usize], axes: usize) -> Result<Vec<usize>, Error> {
    match resolution {
        [n] => Ok(vec![*n; axes]),
        r if r.len() == axes => Ok(r.to_vec()),
        r => Err(Error::InvalidArgument(format!(
            "family has {axes} axes but {} resolutions were given",
            r.len()
        ))),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Classify { input, tol } => {
            let report = match input.target()? {
                Target::Schedule(s) => classify_schedule(&s, tol)?,
                Target::Kernel(k) => classify_kernel(&k, tol)?,
            };
            print_json(&report)
        }
        Command::Compose { input } => {
            println!("{}", kernel_to_json(&input.target()?.kernel()?));
            Ok(())
        }
        Command::Simulate {
            input,
            steps,
            reps,
            seed,
            check,
            tol,
        } => {
            let kernel = input.target()?.kernel()?;
            let estimate = oracle::simulate(&kernel, steps, reps, seed)?;
            print_json(&estimate)?;
            if check && !oracle::check_estimate(&kernel, tol, &estimate)? {
                eprintln!("simulated drift disagrees with the spectral verdict");
            }
            Ok(())
        }
        Command::Sweep {
            family: args,
            mode,
            resolution,
            y_range,
        } => {
            let family = args.family()?;
            match mode {
                Mode::Grid => {
                    let rows = sweep::sweep_grid(&family, &per_axis(&resolution, family.axes.len())?, args.tol)?;
                    sweep::write_rows_csv(args.output()?, &family, &rows)
                }
                Mode::Crossings => {
                    let [n] = resolution[..] else {
                        return Err(Error::InvalidArgument("crossings take a single resolution".into()));
                    };
                    let changes = sweep::count_sign_changes(&family, n, args.tol)?;
                    if changes.degenerate {
                        log::warn!("family is fair within tolerance everywhere on the grid");
                    }
                    sweep::write_crossings_csv(args.output()?, &changes.crossings)
                }
                Mode::Trace => {
                    let [n] = resolution[..] else {
                        return Err(Error::InvalidArgument("trace takes a single x resolution".into()));
                    };
                    let trace = sweep::trace_fairness(&family, n, (y_range[0], y_range[1]), args.tol)?;
                    if trace.degenerate {
                        log::warn!("family is fair within tolerance on every probe");
                    }
                    sweep::write_trace_csv(args.output()?, &family, &trace)
                }
            }
        }
        Command::Figure { family: args, resolution } => {
            let family = args.family()?;
            let rows = sweep::sweep_grid(&family, &per_axis(&resolution, family.axes.len())?, args.tol)?;
            sweep::write_rows_csv(args.output()?, &family, &rows)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 2 } else { 1 })
        }
    }
}
