//! Command-line front end. Exit codes: 0 success, 1 usage or parse error,
//! 2 validation failure, 3 internal invariant failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sbgame::chain;
use sbgame::harness::{self, ExperimentConfig, InitialPolicy};
use sbgame::learner::{self, InitialState, LearnerConfig};
use sbgame::meta::{self, MetaChain};
use sbgame::potential::{self, Mode, PotentialFunction, Synthesis};
use sbgame::report::{self, fmt12};
use sbgame::{Error, StateBasedGame};

#[derive(Parser)]
#[command(name = "sbgame", version, about = "State-based games: equilibria, learning dynamics and exact convergence checks")]
struct Cli {
    /// Override the block probability p of the example12 fixture.
    #[arg(long, global = true, value_name = "P")]
    example12_p: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game file (or fixture) and list every violation.
    Validate { game: String },
    /// RSEs, equivalence classes, X*, convergence conditions, trap set, potential.
    Analyze {
        game: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run the learner once and emit the trajectory as CSV.
    Simulate {
        game: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        steps: usize,
        #[command(flatten)]
        eps: Inertia,
        /// 1-based state or `uniform`.
        #[arg(long, default_value = "uniform")]
        init: String,
        /// CSV destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Many independent runs with derived seeds; writes runs.csv and summary.json.
    Montecarlo {
        game: String,
        #[arg(long)]
        runs: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        eps: Inertia,
        /// 1-based state, `uniform` or `sweep`.
        #[arg(long, default_value = "uniform")]
        init: String,
        /// Also compute the exact lock-in probability for comparison.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Exact absorption and lock-in probabilities from the induced chain.
    Oracle {
        game: String,
        #[command(flatten)]
        eps: Inertia,
        /// 1-based state; uniform over states when absent.
        #[arg(long)]
        init: Option<usize>,
        /// Also report Pr[lock-in time <= T].
        #[arg(long)]
        horizon: Option<usize>,
        /// Compare learner runs with the chain, e.g. `seeds=10,steps=10000`.
        #[arg(long, value_name = "seeds=K,steps=T")]
        validate: Option<String>,
        #[arg(long, default_value_t = meta::DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Verify a potential (with --phi) or synthesize one.
    Potential {
        game: String,
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Use the relaxed argmax form of the monotonicity condition.
        #[arg(long)]
        relaxed: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run the built-in invariant suite.
    Selfcheck,
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long = "out-dir", env = "SBG_OUTPUT_DIR", default_value = ".")]
    dir: PathBuf,
}

#[derive(Args)]
struct Inertia {
    /// Inertia shared by all agents.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Per-agent override `i=E` with 1-based agent `i`; repeatable.
    #[arg(long = "epsilon-i", value_name = "i=E")]
    per_agent: Vec<String>,
}

impl Inertia {
    fn resolve(&self, game: &StateBasedGame) -> Result<Vec<f64>, Error> {
        let mut eps = vec![self.epsilon; game.agents()];
        for spec in &self.per_agent {
            let bad = || Error::Config(format!("cannot read --epsilon-i {spec:?}; expected i=E"));
            let (i, e) = spec.split_once('=').ok_or_else(bad)?;
            let i: usize = i.trim().parse().map_err(|_| bad())?;
            let e: f64 = e.trim().parse().map_err(|_| bad())?;
            if i == 0 || i > game.agents() {
                return Err(Error::IndexOutOfRange {
                    what: "agent (1-based)",
                    index: i,
                    bound: game.agents() + 1,
                });
            }
            eps[i - 1] = e;
        }
        Ok(eps)
    }
}

fn parse_state(game: &StateBasedGame, text: &str) -> Result<usize, Error> {
    let x: usize = text
        .parse()
        .map_err(|_| Error::Config(format!("cannot read {text:?} as a state")))?;
    if x == 0 || x > game.states() {
        return Err(Error::IndexOutOfRange {
            what: "state (1-based)",
            index: x,
            bound: game.states() + 1,
        });
    }
    Ok(x - 1)
}

fn parse_validate(spec: &str) -> Result<(usize, usize), Error> {
    let mut seeds = None;
    let mut steps = None;
    for part in spec.split([',', ' ']).filter(|s| !s.is_empty()) {
        let bad = || Error::Config(format!("cannot read --validate {spec:?}; expected seeds=K,steps=T"));
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        let v: usize = v.parse().map_err(|_| bad())?;
        match k {
            "seeds" => seeds = Some(v),
            "steps" => steps = Some(v),
            _ => return Err(bad()),
        }
    }
    Ok((seeds.unwrap_or(10), steps.unwrap_or(10_000)))
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidGame(_) | Error::NotStochastic { .. } | Error::PotentialNotTotal { .. } => 2,
        Error::Invariant(_)
        | Error::SingularSystem { .. }
        | Error::TrajectoryMismatch(_)
        | Error::GameMismatch { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let p = cli.example12_p;
    match cli.command {
        Command::Validate { game } => match harness::load_game(&game, p) {
            Ok(g) => {
                println!(
                    "OK: {} agents, actions {:?}, {} states",
                    g.agents(),
                    g.actions().counts(),
                    g.states()
                );
                Ok(0)
            }
            Err(Error::InvalidGame(report)) => {
                println!("INVALID:\n{report}");
                Ok(2)
            }
            Err(e) => Err(e),
        },

        Command::Analyze { game, out } => {
            let g = harness::load_game(&game, p)?;
            let analysis = chain::analyze(&g)?;
            print!("{}", analysis.summary(&g));
            ensure_dir(&out.dir)?;
            let path = out.dir.join("analysis.json");
            std::fs::write(&path, serde_json::to_string_pretty(&analysis.to_json(&g))?)
                .map_err(|e| Error::Io { path: path.clone(), source: e })?;
            println!("wrote {}", path.display());
            Ok(0)
        }

        Command::Simulate {
            game,
            seed,
            steps,
            eps,
            init,
            out,
        } => {
            let g = harness::load_game(&game, p)?;
            let initial_state = if init == "uniform" {
                InitialState::Uniform
            } else {
                InitialState::Fixed(parse_state(&g, &init)?)
            };
            let cfg = LearnerConfig {
                epsilons: eps.resolve(&g)?,
                horizon: steps,
                seed,
                initial_state,
            };
            let traj = learner::run(&g, &cfg)?;
            let lockin = learner::detect_lockin(&g, &traj)?;
            let summary = match lockin {
                Some(l) => format!(
                    "lockin tau={} action={} state={}",
                    l.tau,
                    g.label(l.action),
                    traj.state(l.tau + 1) + 1
                ),
                None => "lockin none".to_string(),
            };
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                    traj.write_csv(&g, lockin, file)?;
                    println!("{summary}");
                }
                None => {
                    traj.write_csv(&g, lockin, std::io::stdout().lock())?;
                    eprintln!("{summary}");
                }
            }
            Ok(0)
        }

        Command::Montecarlo {
            game,
            runs,
            steps,
            seed,
            eps,
            init,
            oracle,
            out,
        } => {
            let g = harness::load_game(&game, p)?;
            let initial = match init.as_str() {
                "uniform" => InitialPolicy::Uniform,
                "sweep" => InitialPolicy::Sweep,
                other => InitialPolicy::Fixed(parse_state(&g, other)?),
            };
            let cfg = ExperimentConfig {
                runs,
                horizon: steps,
                epsilons: eps.resolve(&g)?,
                master_seed: seed,
                initial,
            };
            let batch = harness::montecarlo(&g, &cfg)?;
            let analysis = chain::analyze(&g)?;
            let summary = if oracle {
                let start = match initial {
                    InitialPolicy::Fixed(x) => meta::point_initial(&g, x)?,
                    _ => meta::uniform_initial(&g),
                };
                let c = MetaChain::build(&g, &cfg.epsilons, &start, meta::DEFAULT_BUDGET)?;
                Some(c.summarize(Some(steps))?)
            } else {
                None
            };
            let paths = report::report(&g, &batch, &analysis, summary.as_ref(), &out.dir)?;
            println!(
                "runs {}, locked {}, lock-in frequency {}",
                batch.runs,
                batch.locked_runs(),
                fmt12(batch.lockin_frequency)
            );
            for (a, n) in batch.final_action_counts() {
                println!("  final action {}: {n}", g.label(a));
            }
            if let Some(s) = &summary {
                if let Some((t, q)) = s.truncated {
                    println!(
                        "exact Pr[lock-in by T={t}] {} (|diff| {})",
                        fmt12(q),
                        fmt12((q - batch.lockin_frequency).abs())
                    );
                }
            }
            if !analysis.trap_set.is_empty() {
                println!("warning: trap set present; runs entering it can never converge");
            }
            println!("wrote {} and {}", paths.runs_csv.display(), paths.summary_json.display());
            Ok(0)
        }

        Command::Oracle {
            game,
            eps,
            init,
            horizon,
            validate,
            budget,
        } => {
            let g = harness::load_game(&game, p)?;
            let epsilons = eps.resolve(&g)?;
            let start = match init {
                Some(x) => meta::point_initial(&g, parse_state(&g, &x.to_string())?)?,
                None => meta::uniform_initial(&g),
            };
            let c = MetaChain::build(&g, &epsilons, &start, budget)?;
            let summary = c.summarize(horizon)?;
            print!("{}", summary.describe());
            if let Some(spec) = validate {
                let (seeds, steps) = parse_validate(&spec)?;
                let initial_state = match init {
                    Some(x) => InitialState::Fixed(x - 1),
                    None => InitialState::Uniform,
                };
                let cfg = LearnerConfig {
                    epsilons,
                    horizon: steps,
                    seed: 0,
                    initial_state,
                };
                let div = c.empirical_validation(&cfg, seeds, 1000)?;
                print!("{}", div.describe(&g));
                if !div.forbidden.is_empty() {
                    return Ok(3);
                }
            }
            Ok(0)
        }

        Command::Potential { game, phi, relaxed, out } => {
            let g = harness::load_game(&game, p)?;
            let mode = if relaxed { Mode::Relaxed } else { Mode::Strict };
            match phi {
                Some(path) => {
                    let f = PotentialFunction::load(&g, &path)?;
                    let v = potential::verify_potential(&g, &f, mode)?;
                    println!(
                        "condition (1): {}; condition (2, {}): {}",
                        v.condition1,
                        if relaxed { "relaxed" } else { "strict" },
                        v.condition2
                    );
                    for viol in &v.violations {
                        println!("  {}", viol.describe(&g));
                    }
                    println!("{}", if v.holds() { "potential: yes" } else { "potential: no" });
                    Ok(if v.holds() { 0 } else { 2 })
                }
                None => {
                    let s = potential::synthesize_potential(&g);
                    println!("{}", s.describe(&g));
                    if let Synthesis::Found(f) = &s {
                        let v = potential::verify_potential(&g, f, mode)?;
                        if !v.holds() {
                            return Err(Error::Invariant("synthesized potential fails verification".into()));
                        }
                        ensure_dir(&out.dir)?;
                        let path = out.dir.join("phi.json");
                        f.save(&g, &path)?;
                        println!("wrote {}", path.display());
                    } else {
                        println!("{}", serde_json::to_string_pretty(&s.to_json(&g))?);
                    }
                    Ok(0)
                }
            }
        }

        Command::Selfcheck => {
            let s = harness::selfcheck();
            for r in &s.results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            Ok(if s.passed() { 0 } else { 3 })
        }
    }
}
