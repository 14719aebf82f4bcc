//! Game ingestion, Monte Carlo batches and the cross-module self-check.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::chain;
use crate::error::{Error, Result};
use crate::fixtures::{self, RandomGameParams, FIXTURE_NAMES};
use crate::game::{ActionStatePair, JointAction, RawGame, StateBasedGame};
use crate::learner::{self, derive_seed, InitialState, LearnerConfig, LockIn};
use crate::meta::{self, MetaChain, DEFAULT_BUDGET};
use crate::potential::{self, Mode};
use crate::report::round12;

/// Parse and validate a game from JSON text. Parse errors name the path of
/// the offending element; `origin` is used in messages.
pub fn parse_game(text: &str, origin: &str) -> Result<StateBasedGame> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawGame = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: origin.to_string(),
        message: format!("at `{}`: {}", e.path(), e.inner()),
    })?;
    StateBasedGame::from_raw(raw)
}

/// A built-in fixture name, or a path to a game file.
pub fn load_game(source: &str, example12_p: Option<f64>) -> Result<StateBasedGame> {
    if FIXTURE_NAMES.contains(&source) {
        return fixtures::by_name(source, example12_p);
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_game(&text, source)
}

pub fn save_game(game: &StateBasedGame, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&game.to_raw())?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialPolicy {
    Fixed(usize),
    Uniform,
    /// Run `r` starts in state `r mod m`.
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub horizon: usize,
    pub epsilons: Vec<f64>,
    pub master_seed: u64,
    pub initial: InitialPolicy,
}

impl ExperimentConfig {
    pub fn check(&self, game: &StateBasedGame) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("at least one run is required".into()));
        }
        if let InitialPolicy::Fixed(x) = self.initial {
            game.check_state(x)?;
        }
        self.learner_config(game, 0).check(game)
    }

    /// The exact configuration of run `r`; `simulate` with the same values
    /// reproduces it.
    pub fn learner_config(&self, game: &StateBasedGame, r: usize) -> LearnerConfig {
        let initial_state = match self.initial {
            InitialPolicy::Fixed(x) => InitialState::Fixed(x),
            InitialPolicy::Uniform => InitialState::Uniform,
            InitialPolicy::Sweep => InitialState::Fixed(r % game.states()),
        };
        LearnerConfig {
            epsilons: self.epsilons.clone(),
            horizon: self.horizon,
            seed: derive_seed(self.master_seed, r as u64),
            initial_state,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub initial_state: usize,
    pub lockin: Option<LockIn>,
    pub final_action: JointAction,
    pub final_state: usize,
    /// Index into [`chain::rse_classes`] of the class the run locked into.
    pub locked_class: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub game_id: String,
    pub runs: usize,
    pub horizon: usize,
    pub epsilons: Vec<f64>,
    pub master_seed: u64,
    pub records: Vec<RunRecord>,
    pub lockin_frequency: f64,
    pub tau_histogram: BTreeMap<usize, usize>,
    /// `state -> (runs started there, runs locked)`.
    pub per_initial_state: BTreeMap<usize, (usize, usize)>,
    /// `class index -> runs locked into it`.
    pub class_counts: BTreeMap<usize, usize>,
}

/// `R` independent learner runs with derived seeds, executed in parallel.
/// The result depends only on the game and the config.
pub fn montecarlo(game: &StateBasedGame, config: &ExperimentConfig) -> Result<BatchResult> {
    config.check(game)?;
    let rse = chain::rse_table(game);
    let classes = chain::rse_classes(game)?;
    let records: Vec<RunRecord> = (0..config.runs)
        .into_par_iter()
        .map(|r| -> Result<RunRecord> {
            let cfg = config.learner_config(game, r);
            let traj = learner::run(game, &cfg)?;
            let lockin = learner::lockin_with(&rse, &traj);
            let locked_class = lockin.map(|l| {
                let pair = ActionStatePair::new(l.action, traj.state(l.tau + 1));
                classes
                    .iter()
                    .position(|c| c.contains(&pair))
                    .expect("lock-in pairs are RSEs")
            });
            Ok(RunRecord {
                run: r,
                seed: cfg.seed,
                initial_state: traj.state(1),
                lockin,
                final_action: *traj.actions.last().expect("horizon >= 3"),
                final_state: *traj.states.last().expect("horizon >= 3"),
                locked_class,
            })
        })
        .collect::<Result<_>>()?;

    let mut tau_histogram = BTreeMap::new();
    let mut per_initial_state: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut class_counts = BTreeMap::new();
    let mut locked = 0;
    for rec in &records {
        let entry = per_initial_state.entry(rec.initial_state).or_default();
        entry.0 += 1;
        if let Some(l) = rec.lockin {
            locked += 1;
            entry.1 += 1;
            *tau_histogram.entry(l.tau).or_default() += 1;
        }
        if let Some(c) = rec.locked_class {
            *class_counts.entry(c).or_default() += 1;
        }
    }
    Ok(BatchResult {
        game_id: game.fingerprint(),
        runs: config.runs,
        horizon: config.horizon,
        epsilons: config.epsilons.clone(),
        master_seed: config.master_seed,
        lockin_frequency: locked as f64 / records.len() as f64,
        records,
        tau_histogram,
        per_initial_state,
        class_counts,
    })
}

impl BatchResult {
    pub fn locked_runs(&self) -> usize {
        self.records.iter().filter(|r| r.lockin.is_some()).count()
    }

    pub fn aggregates_json(&self, game: &StateBasedGame) -> Value {
        json!({
            "runs": self.runs,
            "horizon": self.horizon,
            "epsilons": self.epsilons,
            "master_seed": self.master_seed,
            "locked_runs": self.locked_runs(),
            "lockin_frequency": round12(self.lockin_frequency),
            "tau_histogram": self.tau_histogram.iter()
                .map(|(t, c)| (t.to_string(), json!(c)))
                .collect::<serde_json::Map<_, _>>(),
            "per_initial_state": self.per_initial_state.iter().map(|(x, (n, l))| json!({
                "state": x + 1,
                "runs": n,
                "locked": l,
                "lockin_frequency": round12(*l as f64 / *n as f64),
            })).collect::<Vec<_>>(),
            "class_counts": self.class_counts.iter()
                .map(|(c, n)| (format!("{}", c + 1), json!(n)))
                .collect::<serde_json::Map<_, _>>(),
            "final_actions": self.final_action_counts().into_iter()
                .map(|(a, n)| (game.label(a), json!(n)))
                .collect::<serde_json::Map<_, _>>(),
        })
    }

    pub fn final_action_counts(&self) -> BTreeMap<JointAction, usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            *out.entry(r.final_action).or_default() += 1;
        }
        out
    }

    /// One CSV row per run.
    pub fn write_csv<W: Write>(&self, game: &StateBasedGame, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "run",
            "seed",
            "initial_state",
            "lockin_tau",
            "lockin_action",
            "final_action",
            "final_state",
            "locked_class",
        ])?;
        for r in &self.records {
            w.write_record([
                r.run.to_string(),
                r.seed.to_string(),
                (r.initial_state + 1).to_string(),
                r.lockin.map(|l| l.tau.to_string()).unwrap_or_default(),
                r.lockin.map(|l| game.label(l.action)).unwrap_or_default(),
                game.label(r.final_action),
                (r.final_state + 1).to_string(),
                r.locked_class.map(|c| (c + 1).to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfCheck {
    pub results: Vec<CheckResult>,
}

impl SelfCheck {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

fn check(name: &'static str, f: impl FnOnce() -> Result<std::result::Result<String, String>>) -> CheckResult {
    match f() {
        Ok(Ok(detail)) => CheckResult {
            name,
            passed: true,
            detail,
        },
        Ok(Err(detail)) => CheckResult {
            name,
            passed: false,
            detail,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Deterministic cross-module invariant suite over fixtures and small
/// random games.
pub fn selfcheck() -> SelfCheck {
    let mut results = Vec::new();

    results.push(check("example4 fixture facts", || {
        fixtures::check_example4_facts(&fixtures::example4())?;
        Ok(Ok("[22,1] ~ [22,2] RSEs, [11,1] not an RSE, 11 Nash at 1, recurrent P(22) = {1,2}".into()))
    }));

    results.push(check("fixtures validate", || {
        for name in FIXTURE_NAMES {
            let g = fixtures::by_name(name, None)?;
            let report = crate::game::validate(&g.to_raw());
            if !report.is_ok() {
                return Ok(Err(format!("{name}: {report}")));
            }
        }
        Ok(Ok(format!("{} fixtures", FIXTURE_NAMES.len())))
    }));

    results.push(check("example12 invariant in p", || {
        let base = fixtures::example12(0.5)?;
        let (rse, trap) = (chain::enumerate_rse(&base), chain::detect_trap(&base));
        for p in [0.1, 0.9] {
            let g = fixtures::example12(p)?;
            if chain::enumerate_rse(&g) != rse || chain::detect_trap(&g) != trap {
                return Ok(Err(format!("results change at p = {p}")));
            }
        }
        Ok(Ok("p in {0.1, 0.5, 0.9}".into()))
    }));

    results.push(check("fast RSE enumeration = definition", || {
        let params = RandomGameParams::default();
        for seed in 0..100 {
            let g = fixtures::random_game(seed, &params);
            let fast = chain::enumerate_rse(&g);
            for a in g.actions().iter() {
                for x in 0..g.states() {
                    if chain::is_rse(&g, a, x)? != fast.contains(&ActionStatePair::new(a, x)) {
                        return Ok(Err(format!("seed {seed}, [{}, {}]", g.label(a), x + 1)));
                    }
                }
            }
        }
        Ok(Ok("100 random games".into()))
    }));

    results.push(check("meta-chain rows and locked-set closure", || {
        let mut games = vec![fixtures::example9(), fixtures::example9_lazy()];
        games.extend((0..10).map(|s| fixtures::random_game(s, &RandomGameParams::default())));
        for (k, g) in games.iter().enumerate() {
            let eps = vec![0.5; g.agents()];
            let c = MetaChain::build(g, &eps, &meta::uniform_initial(g), DEFAULT_BUDGET)?;
            if c.max_row_error() > 1e-12 {
                return Ok(Err(format!("game {k}: row error {}", c.max_row_error())));
            }
            if !c.locked_leaks().is_empty() {
                return Ok(Err(format!("game {k}: locked set leaks")));
            }
        }
        Ok(Ok(format!("{} games", games.len())))
    }));

    results.push(check("per-agent form = equal-inertia closed form", || {
        let g = fixtures::example9();
        let c = MetaChain::build(&g, &[0.5, 0.5], &meta::uniform_initial(&g), DEFAULT_BUDGET)?;
        let mut compared = 0;
        for (k, w) in c.states().iter().enumerate() {
            for &(j, p) in c.row(k) {
                let q = meta::closed_form_prob(&g, 0.5, w, &c.states()[j]);
                if p != q {
                    return Ok(Err(format!("{} -> {}: {p} vs {q}", w.label(&g), c.states()[j].label(&g))));
                }
                compared += 1;
            }
        }
        Ok(Ok(format!("{compared} transitions")))
    }));

    results.push(check("example9 absorption from state 4 is 0", || {
        let g = fixtures::example9();
        let c = MetaChain::build(&g, &[0.5, 0.5], &meta::point_initial(&g, 3)?, DEFAULT_BUDGET)?;
        let a = c.absorption_probabilities()?.aggregate;
        Ok(if a == 0.0 { Ok("0".into()) } else { Err(format!("{a}")) })
    }));

    results.push(check("lazified example9 absorbs with probability 1", || {
        let g = fixtures::example9_lazy();
        let c = MetaChain::build(&g, &[0.5, 0.5], &meta::uniform_initial(&g), DEFAULT_BUDGET)?;
        let a = c.absorption_probabilities()?;
        let worst = a.per_state.iter().map(|h| (h - 1.0).abs()).fold(0.0, f64::max);
        Ok(if worst <= 1e-9 {
            Ok(format!("max |h - 1| = {worst:e}"))
        } else {
            Err(format!("max |h - 1| = {worst:e}"))
        })
    }));

    results.push(check("potential synthesis round trip", || {
        let params = RandomGameParams::default();
        for seed in 0..20 {
            let (g, _) = fixtures::random_potential_game(seed, &params);
            let Some(phi) = potential::synthesize_potential(&g).potential().cloned() else {
                return Ok(Err(format!("seed {seed}: synthesis failed")));
            };
            if !potential::verify_potential(&g, &phi, Mode::Strict)?.holds() {
                return Ok(Err(format!("seed {seed}: synthesized potential rejected")));
            }
            for p in potential::argmax_pairs(&g, &phi) {
                if !chain::is_rse(&g, p.action, p.state)? {
                    return Ok(Err(format!("seed {seed}: argmax pair is not an RSE")));
                }
            }
        }
        match potential::synthesize_potential(&fixtures::example4()) {
            potential::Synthesis::NotExact(c) if c.state == 2 => Ok(Ok("20 games; example4 refused at state 3".into())),
            other => Ok(Err(format!("example4: {other:?}"))),
        }
    }));

    results.push(check("seeded runs reproduce", || {
        let g = fixtures::example9_lazy();
        let cfg = ExperimentConfig {
            runs: 16,
            horizon: 200,
            epsilons: vec![0.5, 0.5],
            master_seed: 5,
            initial: InitialPolicy::Uniform,
        };
        let a = montecarlo(&g, &cfg)?;
        let b = montecarlo(&g, &cfg)?;
        let single = learner::run(&g, &cfg.learner_config(&g, 3))?;
        let matches = a.records[3].final_action == *single.actions.last().expect("nonempty")
            && a.records[3].final_state == *single.states.last().expect("nonempty");
        Ok(if a == b && matches {
            Ok("batch and single-run replay agree".into())
        } else {
            Err("batch results differ between invocations".into())
        })
    }));

    SelfCheck { results }
}
