//! Per-action Markov chain analysis of a state-based game.
//!
//! `[a, x]` is a recurrent state equilibrium (RSE) when `x` is recurrent for
//! the chain `P(a)` and `a` is a pure Nash equilibrium at every state reachable
//! from `x` under `a`. [`is_rse`] checks that definition literally through
//! double reachability; [`enumerate_rse`] uses closed communicating classes.
//! The two are kept independent on purpose and compared in the test suites.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{ActionStatePair, JointAction, StateBasedGame, ROW_SUM_TOLERANCE};
use crate::potential;

/// States reachable from `x` in one or more steps when `a` is held fixed.
/// `x` itself is a member only when some path returns to it.
pub fn reachable_states(game: &StateBasedGame, a: JointAction, x: usize) -> Result<BTreeSet<usize>> {
    game.actions().check(a)?;
    game.check_state(x)?;
    Ok(reach(game.states(), |u| game.successors(a, u), x)
        .into_iter()
        .enumerate()
        .filter_map(|(y, r)| r.then_some(y))
        .collect())
}

/// Breadth-first search over paths of length >= 1.
pub(crate) fn reach<'s>(m: usize, succ: impl Fn(usize) -> &'s [usize], x: usize) -> Vec<bool> {
    let mut seen = vec![false; m];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &y in succ(x) {
        if !seen[y] {
            seen[y] = true;
            queue.push_back(y);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &y in succ(u) {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Closed communicating classes (sink strongly connected components of the
/// support digraph), each sorted, ordered by smallest member.
pub(crate) fn sink_classes<S: AsRef<[usize]>>(succ: &[S]) -> Vec<Vec<usize>> {
    let m = succ.len();
    let mut graph = DiGraph::<(), ()>::with_capacity(m, 0);
    let nodes: Vec<_> = (0..m).map(|_| graph.add_node(())).collect();
    for (u, ys) in succ.iter().enumerate() {
        for &y in ys.as_ref() {
            graph.add_edge(nodes[u], nodes[y], ());
        }
    }
    let mut comp = vec![usize::MAX; m];
    let sccs = tarjan_scc(&graph);
    for (k, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = k;
        }
    }
    let mut out: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(k, scc)| {
            scc.iter()
                .all(|v| succ[v.index()].as_ref().iter().all(|&y| comp[y] == *k))
        })
        .map(|(_, scc)| {
            let mut c: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    out.sort();
    out
}

fn check_stochastic(matrix: &[Vec<f64>]) -> Result<()> {
    let m = matrix.len();
    for (r, row) in matrix.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.len() != m
            || row.iter().any(|p| !(0.0..=1.0).contains(p))
            || (sum - 1.0).abs() > ROW_SUM_TOLERANCE
        {
            return Err(Error::NotStochastic { row: r, sum });
        }
    }
    Ok(())
}

fn support(matrix: &[Vec<f64>]) -> Vec<Vec<usize>> {
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(y, _)| y)
                .collect()
        })
        .collect()
}

/// Recurrent classes of a row-stochastic matrix.
pub fn recurrent_classes(matrix: &[Vec<f64>]) -> Result<Vec<Vec<usize>>> {
    check_stochastic(matrix)?;
    Ok(sink_classes(&support(matrix)))
}

/// A chain is irreducible when a single recurrent class covers every state.
pub fn is_irreducible(matrix: &[Vec<f64>]) -> Result<bool> {
    let classes = recurrent_classes(matrix)?;
    Ok(classes.len() == 1 && classes[0].len() == matrix.len())
}

fn action_succ(game: &StateBasedGame, a: JointAction) -> Vec<&[usize]> {
    (0..game.states()).map(|x| game.successors(a, x)).collect()
}

/// Definition-literal RSE test: `x` is reachable back from every state
/// reachable from it, and `a` is Nash at all of those states.
pub fn is_rse(game: &StateBasedGame, a: JointAction, x: usize) -> Result<bool> {
    let from_x = reachable_states(game, a, x)?;
    for &y in &from_x {
        if !reachable_states(game, a, y)?.contains(&x) {
            return Ok(false);
        }
        if !game.nash(a, y) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `rse[a][x]` for every pair, via closed classes.
pub(crate) fn rse_table(game: &StateBasedGame) -> Vec<Vec<bool>> {
    let m = game.states();
    game.actions()
        .iter()
        .map(|a| {
            let mut row = vec![false; m];
            for class in sink_classes(&action_succ(game, a)) {
                if class.iter().all(|&y| game.nash(a, y)) {
                    for y in class {
                        row[y] = true;
                    }
                }
            }
            row
        })
        .collect()
}

/// Every RSE of the game.
pub fn enumerate_rse(game: &StateBasedGame) -> BTreeSet<ActionStatePair> {
    rse_table(game)
        .into_iter()
        .enumerate()
        .flat_map(|(a, row)| {
            row.into_iter()
                .enumerate()
                .filter(|(_, r)| *r)
                .map(move |(x, _)| ActionStatePair::new(JointAction(a), x))
        })
        .collect()
}

/// `[a, x] ~ [b, y]`: same action, `[a, x]` an RSE, `y` reachable from `x`.
pub fn equivalent(game: &StateBasedGame, p: ActionStatePair, q: ActionStatePair) -> Result<bool> {
    if p.action != q.action || !is_rse(game, p.action, p.state)? {
        return Ok(false);
    }
    Ok(reachable_states(game, p.action, p.state)?.contains(&q.state))
}

/// The equivalence class `R(a, x)` of an RSE.
pub fn rse_class(game: &StateBasedGame, a: JointAction, x: usize) -> Result<BTreeSet<ActionStatePair>> {
    if !is_rse(game, a, x)? {
        return Err(Error::NotAnRse {
            action: game.label(a),
            state: x + 1,
        });
    }
    let mut out: BTreeSet<ActionStatePair> = reachable_states(game, a, x)?
        .into_iter()
        .map(|y| ActionStatePair::new(a, y))
        .collect();
    out.insert(ActionStatePair::new(a, x));
    Ok(out)
}

/// The equivalence classes of the RSE set, ordered by their smallest member.
pub fn rse_classes(game: &StateBasedGame) -> Result<Vec<BTreeSet<ActionStatePair>>> {
    let mut classes: Vec<BTreeSet<ActionStatePair>> = Vec::new();
    for p in enumerate_rse(game) {
        if !classes.iter().any(|c| c.contains(&p)) {
            classes.push(rse_class(game, p.action, p.state)?);
        }
    }
    Ok(classes)
}

/// Uniform average of all kernels.
pub fn average_kernel(game: &StateBasedGame) -> Vec<Vec<f64>> {
    let m = game.states();
    let na = game.actions().size() as f64;
    let mut out = vec![vec![0.0; m]; m];
    for a in game.actions().iter() {
        for (x, row) in out.iter_mut().enumerate() {
            for (y, v) in row.iter_mut().enumerate() {
                *v += game.prob(a, x, y);
            }
        }
    }
    for row in &mut out {
        for v in row.iter_mut() {
            *v /= na;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XStar {
    /// Actions taking part in at least one RSE.
    pub a_star: BTreeSet<JointAction>,
    /// For each `a` in `a_star`, states from which holding `a` can reach an
    /// RSE state of `a` (a state that is itself such an RSE counts).
    pub x_of_a: BTreeMap<JointAction, BTreeSet<usize>>,
    pub x_star: BTreeSet<usize>,
}

pub fn compute_xstar(game: &StateBasedGame) -> XStar {
    let table = rse_table(game);
    let m = game.states();
    let mut a_star = BTreeSet::new();
    let mut x_of_a = BTreeMap::new();
    let mut x_star = BTreeSet::new();
    for a in game.actions().iter() {
        let rse = &table[a.0];
        if !rse.iter().any(|&r| r) {
            continue;
        }
        a_star.insert(a);
        let states: BTreeSet<usize> = (0..m)
            .filter(|&x| {
                rse[x]
                    || reach(m, |u| game.successors(a, u), x)
                        .iter()
                        .zip(rse)
                        .any(|(&r, &e)| r && e)
            })
            .collect();
        x_star.extend(states.iter().copied());
        x_of_a.insert(a, states);
    }
    XStar {
        a_star,
        x_of_a,
        x_star,
    }
}

/// A recurrent class of the averaged kernel with the RSE found inside it, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassWitness {
    pub class: Vec<usize>,
    pub witness: Option<ActionStatePair>,
}

/// Hypotheses of the convergence theorem for the two-memory learner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem8Verdict {
    pub rse_exists: bool,
    /// `X \ X* = {}`.
    pub xstar_covers_x: bool,
    pub pbar_irreducible: bool,
    /// Every recurrent class of the averaged kernel contains an RSE state.
    pub cond_i: bool,
    pub class_witnesses: Vec<ClassWitness>,
    /// `P(a; x, x) > 0` for every action and every `x` outside `X*`.
    pub cond_ii: bool,
    pub self_loop_violations: Vec<ActionStatePair>,
    pub applies: bool,
}

impl Theorem8Verdict {
    pub fn describe(&self) -> &'static str {
        if !self.rse_exists {
            "does not apply (no RSE)"
        } else if self.applies {
            "applies"
        } else {
            "does not apply"
        }
    }
}

pub fn check_theorem8(game: &StateBasedGame) -> Theorem8Verdict {
    let table = rse_table(game);
    let rse_exists = table.iter().flatten().any(|&r| r);
    let xs = compute_xstar(game);
    let m = game.states();
    let xstar_covers_x = xs.x_star.len() == m;

    let pbar = average_kernel(game);
    let classes = sink_classes(&support(&pbar));
    let pbar_irreducible = classes.len() == 1 && classes[0].len() == m;
    let class_witnesses: Vec<ClassWitness> = classes
        .into_iter()
        .map(|class| {
            let witness = class.iter().find_map(|&x| {
                game.actions()
                    .iter()
                    .find(|a| table[a.0][x])
                    .map(|a| ActionStatePair::new(a, x))
            });
            ClassWitness { class, witness }
        })
        .collect();
    let cond_i = class_witnesses.iter().all(|c| c.witness.is_some());

    let x_star = &xs.x_star;
    let self_loop_violations: Vec<ActionStatePair> = game
        .actions()
        .iter()
        .flat_map(|a| {
            (0..m)
                .filter(move |x| !x_star.contains(x) && game.prob(a, *x, *x) <= 0.0)
                .map(move |x| ActionStatePair::new(a, x))
        })
        .collect();
    let cond_ii = self_loop_violations.is_empty();
    let applies = rse_exists && (xstar_covers_x || (cond_i && cond_ii));
    Theorem8Verdict {
        rse_exists,
        xstar_covers_x,
        pbar_irreducible,
        cond_i,
        class_witnesses,
        cond_ii,
        self_loop_violations,
        applies,
    }
}

/// The largest set of states that hosts no RSE and is closed under every
/// kernel. Empty when there is no trap.
pub fn detect_trap(game: &StateBasedGame) -> BTreeSet<usize> {
    let table = rse_table(game);
    let m = game.states();
    let mut candidate: Vec<bool> = (0..m)
        .map(|x| !game.actions().iter().any(|a| table[a.0][x]))
        .collect();
    loop {
        let leaking: Vec<usize> = (0..m)
            .filter(|&x| {
                candidate[x]
                    && game
                        .actions()
                        .iter()
                        .any(|a| game.successors(a, x).iter().any(|&y| !candidate[y]))
            })
            .collect();
        if leaking.is_empty() {
            break;
        }
        for x in leaking {
            candidate[x] = false;
        }
    }
    (0..m).filter(|&x| candidate[x]).collect()
}

/// Everything the analysis knows about a game.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub game_id: String,
    pub rse_set: BTreeSet<ActionStatePair>,
    pub rse_classes: Vec<BTreeSet<ActionStatePair>>,
    pub a_star: BTreeSet<JointAction>,
    pub x_of_a: BTreeMap<JointAction, BTreeSet<usize>>,
    pub x_star: BTreeSet<usize>,
    pub pbar: Vec<Vec<f64>>,
    pub pbar_recurrent_classes: Vec<Vec<usize>>,
    pub theorem8: Theorem8Verdict,
    pub trap_set: BTreeSet<usize>,
    pub potential: potential::Synthesis,
}

pub fn analyze(game: &StateBasedGame) -> Result<AnalysisReport> {
    let rse_set = enumerate_rse(game);
    let rse_classes = rse_classes(game)?;
    let XStar {
        a_star,
        x_of_a,
        x_star,
    } = compute_xstar(game);
    let pbar = average_kernel(game);
    let pbar_recurrent_classes = recurrent_classes(&pbar)?;
    Ok(AnalysisReport {
        game_id: game.fingerprint(),
        rse_set,
        rse_classes,
        a_star,
        x_of_a,
        x_star,
        pbar,
        pbar_recurrent_classes,
        theorem8: check_theorem8(game),
        trap_set: detect_trap(game),
        potential: potential::synthesize_potential(game),
    })
}

pub(crate) fn pair_json(game: &StateBasedGame, p: &ActionStatePair) -> Value {
    json!({ "action": game.label(p.action), "state": p.state + 1 })
}

fn states_json<'a>(states: impl IntoIterator<Item = &'a usize>) -> Value {
    Value::from(states.into_iter().map(|x| x + 1).collect::<Vec<_>>())
}

impl AnalysisReport {
    /// JSON form with 1-based states and digit-string joint actions.
    pub fn to_json(&self, game: &StateBasedGame) -> Value {
        let t = &self.theorem8;
        json!({
            "game_id": self.game_id,
            "rse_set": self.rse_set.iter().map(|p| pair_json(game, p)).collect::<Vec<_>>(),
            "rse_classes": self.rse_classes.iter()
                .map(|c| c.iter().map(|p| pair_json(game, p)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "a_star": self.a_star.iter().map(|a| game.label(*a)).collect::<Vec<_>>(),
            "x_of_a": self.x_of_a.iter()
                .map(|(a, xs)| (game.label(*a), states_json(xs)))
                .collect::<serde_json::Map<_, _>>(),
            "x_star": states_json(&self.x_star),
            "pbar": self.pbar.iter()
                .map(|row| row.iter().map(|&v| crate::report::round12(v)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "pbar_recurrent_classes": self.pbar_recurrent_classes.iter().map(states_json).collect::<Vec<_>>(),
            "theorem8": {
                "verdict": t.describe(),
                "applies": t.applies,
                "rse_exists": t.rse_exists,
                "xstar_covers_x": t.xstar_covers_x,
                "pbar_irreducible": t.pbar_irreducible,
                "cond_i": t.cond_i,
                "class_witnesses": t.class_witnesses.iter().map(|c| json!({
                    "class": states_json(&c.class),
                    "witness": c.witness.as_ref().map(|p| pair_json(game, p)),
                })).collect::<Vec<_>>(),
                "cond_ii": t.cond_ii,
                "self_loop_violations": t.self_loop_violations.iter()
                    .map(|p| pair_json(game, p)).collect::<Vec<_>>(),
            },
            "trap_set": states_json(&self.trap_set),
            "potential": self.potential.to_json(game),
        })
    }

    /// Multi-line human-readable summary.
    pub fn summary(&self, game: &StateBasedGame) -> String {
        let pair = |p: &ActionStatePair| format!("({},{})", game.label(p.action), p.state + 1);
        let set = |xs: &BTreeSet<usize>| {
            let v: Vec<String> = xs.iter().map(|x| (x + 1).to_string()).collect();
            format!("{{{}}}", v.join(","))
        };
        let mut s = String::new();
        s.push_str(&format!(
            "agents {}, actions {:?}, states {}\n",
            game.agents(),
            game.actions().counts(),
            game.states()
        ));
        let rse: Vec<String> = self.rse_set.iter().map(pair).collect();
        s.push_str(&format!("RSE set: {{{}}}\n", rse.join(", ")));
        for (k, c) in self.rse_classes.iter().enumerate() {
            let v: Vec<String> = c.iter().map(pair).collect();
            s.push_str(&format!("  class {}: {{{}}}\n", k + 1, v.join(", ")));
        }
        s.push_str(&format!("X*: {}\n", set(&self.x_star)));
        let t = &self.theorem8;
        s.push_str(&format!(
            "P-bar irreducible: {}; cond (i): {}; cond (ii): {}\n",
            t.pbar_irreducible, t.cond_i, t.cond_ii
        ));
        if !t.self_loop_violations.is_empty() {
            let v: Vec<String> = t.self_loop_violations.iter().map(pair).collect();
            s.push_str(&format!("  missing self-loops: {}\n", v.join(", ")));
        }
        s.push_str(&format!("convergence theorem: {}\n", t.describe()));
        if self.trap_set.is_empty() {
            s.push_str("trap set: none\n");
        } else {
            s.push_str(&format!(
                "trap set: {} (no learning rule can leave it)\n",
                set(&self.trap_set)
            ));
        }
        s.push_str(&format!("potential: {}\n", self.potential.describe(game)));
        s
    }
}
