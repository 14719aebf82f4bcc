//! State-based potential functions: verification and synthesis.
//!
//! `phi` is a potential when every stage game is an exact potential game
//! with potential `phi(., x)` (condition 1) and `phi(a, .)` never decreases
//! along a transition of `P(a)` (condition 2). The relaxed form of the second
//! condition only asks that argmax pairs stay argmax on their recurrent states.
//!
//! Synthesis works per state first (four-cycle test, then path integration),
//! then searches per-state offsets with a difference-constraint solver.

use std::collections::BTreeSet;
use std::path::Path;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chain;
use crate::error::{Error, Result};
use crate::game::{ActionStatePair, JointAction, StateBasedGame};

/// Tolerance on the exact-potential equality.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// A total table `phi(a, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFunction {
    actions: usize,
    states: usize,
    /// `[a * states + x]`
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PhiFile {
    actions: Vec<usize>,
    states: usize,
    /// `[state][flat joint action]`
    phi: Vec<Vec<f64>>,
}

impl PotentialFunction {
    pub fn from_fn(game: &StateBasedGame, f: impl Fn(JointAction, usize) -> f64) -> Self {
        let m = game.states();
        let values = game
            .actions()
            .iter()
            .flat_map(|a| (0..m).map(move |x| (a, x)))
            .map(|(a, x)| f(a, x))
            .collect();
        Self {
            actions: game.actions().size(),
            states: m,
            values,
        }
    }

    /// From a table indexed `[state][flat joint action]`, the same layout as
    /// the payoff block of a game file.
    pub fn from_table(game: &StateBasedGame, table: &[Vec<f64>]) -> Result<Self> {
        let (na, m) = (game.actions().size(), game.states());
        let found: usize = table.iter().map(Vec::len).sum();
        if table.len() != m || table.iter().any(|row| row.len() != na) {
            return Err(Error::PotentialNotTotal {
                expected: na * m,
                found,
            });
        }
        Ok(Self::from_fn(game, |a, x| table[x][a.0]))
    }

    pub fn value(&self, a: JointAction, x: usize) -> f64 {
        self.values[a.0 * self.states + x]
    }

    pub fn table(&self) -> Vec<Vec<f64>> {
        (0..self.states)
            .map(|x| (0..self.actions).map(|a| self.value(JointAction(a), x)).collect())
            .collect()
    }

    fn check(&self, game: &StateBasedGame) -> Result<()> {
        let expected = game.actions().size() * game.states();
        if self.actions != game.actions().size() || self.states != game.states() {
            return Err(Error::PotentialNotTotal {
                expected,
                found: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self, game: &StateBasedGame) -> Value {
        serde_json::to_value(PhiFile {
            actions: game.actions().counts().to_vec(),
            states: self.states,
            phi: self.table(),
        })
        .expect("phi tables serialize")
    }

    pub fn load(game: &StateBasedGame, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let file: PhiFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: format!("{} at {}", e.inner(), e.path()),
        })?;
        if file.actions != game.actions().counts() || file.states != game.states() {
            return Err(Error::PotentialNotTotal {
                expected: game.actions().size() * game.states(),
                found: file.phi.iter().map(Vec::len).sum(),
            });
        }
        Self::from_table(game, &file.phi)
    }

    pub fn save(&self, game: &StateBasedGame, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json(game))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialViolation {
    /// `c_i(b, x) - c_i(a, x) != phi(b, x) - phi(a, x)` for the unilateral deviation `a -> b`.
    Deviation {
        agent: usize,
        from: JointAction,
        to: JointAction,
        state: usize,
        payoff_diff: f64,
        phi_diff: f64,
    },
    /// `phi(a, to) < phi(a, from)` although `P(a; from, to) > 0`.
    Decrease {
        action: JointAction,
        from: usize,
        to: usize,
        phi_from: f64,
        phi_to: f64,
    },
    /// `[action, argmax_state]` maximizes `phi` but `[action, recurrent_state]` does not.
    ArgmaxLeak {
        action: JointAction,
        argmax_state: usize,
        recurrent_state: usize,
        max: f64,
        value: f64,
    },
}

impl PotentialViolation {
    pub fn describe(&self, game: &StateBasedGame) -> String {
        match self {
            PotentialViolation::Deviation {
                agent,
                from,
                to,
                state,
                payoff_diff,
                phi_diff,
            } => format!(
                "agent {} deviating {} -> {} at state {}: payoff change {} but potential change {}",
                agent + 1,
                game.label(*from),
                game.label(*to),
                state + 1,
                payoff_diff,
                phi_diff
            ),
            PotentialViolation::Decrease {
                action,
                from,
                to,
                phi_from,
                phi_to,
            } => format!(
                "action {} moves state {} -> {} but phi drops {} -> {}",
                game.label(*action),
                from + 1,
                to + 1,
                phi_from,
                phi_to
            ),
            PotentialViolation::ArgmaxLeak {
                action,
                argmax_state,
                recurrent_state,
                max,
                value,
            } => format!(
                "[{}, {}] attains max {} but recurrent [{}, {}] has {}",
                game.label(*action),
                argmax_state + 1,
                max,
                game.label(*action),
                recurrent_state + 1,
                value
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialVerdict {
    pub mode: Mode,
    pub condition1: bool,
    pub condition2: bool,
    pub violations: Vec<PotentialViolation>,
}

impl PotentialVerdict {
    pub fn holds(&self) -> bool {
        self.condition1 && self.condition2
    }
}

/// Recurrent states of `P(a)` reachable from `x`.
pub fn recurrent_from(game: &StateBasedGame, a: JointAction, x: usize) -> Result<BTreeSet<usize>> {
    let mut reach = chain::reachable_states(game, a, x)?;
    reach.insert(x);
    Ok(chain::recurrent_classes(&game.kernel(a))?
        .into_iter()
        .flatten()
        .filter(|y| reach.contains(y))
        .collect())
}

pub fn verify_potential(game: &StateBasedGame, phi: &PotentialFunction, mode: Mode) -> Result<PotentialVerdict> {
    phi.check(game)?;
    let space = game.actions();
    let m = game.states();
    let mut violations = Vec::new();

    for x in 0..m {
        for a in space.iter() {
            for i in 0..game.agents() {
                for bi in 0..space.count(i) {
                    let b = space.with_component(a, i, bi);
                    if b == a {
                        continue;
                    }
                    let payoff_diff = game.c(i, b, x) - game.c(i, a, x);
                    let phi_diff = phi.value(b, x) - phi.value(a, x);
                    if (payoff_diff - phi_diff).abs() > EQUALITY_TOLERANCE {
                        violations.push(PotentialViolation::Deviation {
                            agent: i,
                            from: a,
                            to: b,
                            state: x,
                            payoff_diff,
                            phi_diff,
                        });
                    }
                }
            }
        }
    }
    let deviations = violations.len();
    let condition1 = deviations == 0;

    match mode {
        Mode::Strict => {
            for a in space.iter() {
                for x in 0..m {
                    for &y in game.successors(a, x) {
                        let (phi_from, phi_to) = (phi.value(a, x), phi.value(a, y));
                        if phi_to < phi_from {
                            violations.push(PotentialViolation::Decrease {
                                action: a,
                                from: x,
                                to: y,
                                phi_from,
                                phi_to,
                            });
                        }
                    }
                }
            }
        }
        Mode::Relaxed => {
            let max = phi.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for a in space.iter() {
                for x in 0..m {
                    if phi.value(a, x) != max {
                        continue;
                    }
                    for y in recurrent_from(game, a, x)? {
                        let value = phi.value(a, y);
                        if value != max {
                            violations.push(PotentialViolation::ArgmaxLeak {
                                action: a,
                                argmax_state: x,
                                recurrent_state: y,
                                max,
                                value,
                            });
                        }
                    }
                }
            }
        }
    }
    let condition2 = violations.len() == deviations;
    Ok(PotentialVerdict {
        mode,
        condition1,
        condition2,
        violations,
    })
}

/// A unilateral-deviation four-cycle `a -> b -> d -> e -> a` at one state,
/// where agent `i` moves on the first and third edge and agent `j` on the
/// others. Exact potential games have `sum == 0` on every such cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct FourCycle {
    pub state: usize,
    pub agents: (usize, usize),
    pub actions: [JointAction; 4],
    pub sum: f64,
}

/// Why synthesis failed, or the potential it produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Synthesis {
    Found(PotentialFunction),
    /// Some stage game is not an exact potential game.
    NotExact(FourCycle),
    /// The offset constraints are infeasible: a cycle of states whose
    /// constraint weights sum to a negative number.
    NegativeCycle { edges: Vec<OffsetEdge>, weight: f64 },
}

/// `c_to - c_from <= weight`, the tightest bound coming from `action`'s
/// transition `to -> from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetEdge {
    pub from: usize,
    pub to: usize,
    pub action: JointAction,
    pub weight: f64,
}

impl Synthesis {
    pub fn potential(&self) -> Option<&PotentialFunction> {
        match self {
            Synthesis::Found(p) => Some(p),
            _ => None,
        }
    }

    pub fn describe(&self, game: &StateBasedGame) -> String {
        match self {
            Synthesis::Found(_) => "state-based potential game (potential synthesized)".into(),
            Synthesis::NotExact(c) => {
                let labels: Vec<String> = c.actions.iter().map(|a| game.label(*a)).collect();
                format!(
                    "no potential: stage game at state {} is not an exact potential game \
                     (four-cycle {} -> {} -> {} -> {} has deviation sum {})",
                    c.state + 1,
                    labels[0],
                    labels[1],
                    labels[2],
                    labels[3],
                    c.sum
                )
            }
            Synthesis::NegativeCycle { edges, weight } => {
                let states: Vec<String> = edges.iter().map(|e| (e.from + 1).to_string()).collect();
                format!(
                    "no potential: state offsets infeasible around cycle {} (weight {})",
                    states.join(" -> "),
                    weight
                )
            }
        }
    }

    pub fn to_json(&self, game: &StateBasedGame) -> Value {
        match self {
            Synthesis::Found(p) => json!({
                "exists": true,
                "phi": p.table().iter()
                    .map(|row| row.iter().map(|&v| crate::report::round12(v)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }),
            Synthesis::NotExact(c) => json!({
                "exists": false,
                "certificate": {
                    "kind": "four_cycle",
                    "state": c.state + 1,
                    "agents": [c.agents.0 + 1, c.agents.1 + 1],
                    "cycle": c.actions.iter().map(|a| game.label(*a)).collect::<Vec<_>>(),
                    "sum": c.sum,
                },
            }),
            Synthesis::NegativeCycle { edges, weight } => json!({
                "exists": false,
                "certificate": {
                    "kind": "negative_cycle",
                    "weight": weight,
                    "edges": edges.iter().map(|e| json!({
                        "from": e.from + 1,
                        "to": e.to + 1,
                        "action": game.label(e.action),
                        "weight": e.weight,
                    })).collect::<Vec<_>>(),
                },
            }),
        }
    }
}

/// First four-cycle at `x` whose deviation sum is not zero.
pub fn four_cycle_violation(game: &StateBasedGame, x: usize) -> Option<FourCycle> {
    let space = game.actions();
    let n = game.agents();
    for a in space.iter() {
        for i in 0..n {
            for j in i + 1..n {
                let (ai, aj) = (space.component(a, i), space.component(a, j));
                for bi in (0..space.count(i)).filter(|&v| v != ai) {
                    for bj in (0..space.count(j)).filter(|&v| v != aj) {
                        let b = space.with_component(a, i, bi);
                        let d = space.with_component(b, j, bj);
                        let e = space.with_component(a, j, bj);
                        let sum = (game.c(i, b, x) - game.c(i, a, x))
                            + (game.c(j, d, x) - game.c(j, b, x))
                            + (game.c(i, e, x) - game.c(i, d, x))
                            + (game.c(j, a, x) - game.c(j, e, x));
                        if sum.abs() > EQUALITY_TOLERANCE {
                            return Some(FourCycle {
                                state: x,
                                agents: (i, j),
                                actions: [a, b, d, e],
                                sum,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

/// Integrate the stage potential at `x` from `a = 0` (value 0), changing one
/// component at a time in the agent order given.
pub fn integrate_stage(game: &StateBasedGame, x: usize, order: &[usize]) -> Vec<f64> {
    let space = game.actions();
    space
        .iter()
        .map(|target| {
            let mut cur = JointAction(0);
            let mut acc = 0.0;
            for &i in order {
                let next = space.with_component(cur, i, space.component(target, i));
                acc += game.c(i, next, x) - game.c(i, cur, x);
                cur = next;
            }
            acc
        })
        .collect()
}

pub fn synthesize_potential(game: &StateBasedGame) -> Synthesis {
    let m = game.states();
    let order: Vec<usize> = (0..game.agents()).collect();
    let mut stage = Vec::with_capacity(m);
    for x in 0..m {
        if let Some(cycle) = four_cycle_violation(game, x) {
            return Synthesis::NotExact(cycle);
        }
        stage.push(integrate_stage(game, x, &order));
    }

    // Constraint c_x - c_y <= stage[y][a] - stage[x][a] for P(a; x, y) > 0,
    // as edge y -> x; keep the tightest action per ordered pair.
    let mut best: Vec<Option<OffsetEdge>> = vec![None; m * m];
    for a in game.actions().iter() {
        for x in 0..m {
            for &y in game.successors(a, x) {
                if y == x {
                    continue;
                }
                let weight = stage[y][a.0] - stage[x][a.0];
                let slot = &mut best[y * m + x];
                if slot.is_none_or(|e| weight < e.weight) {
                    *slot = Some(OffsetEdge {
                        from: y,
                        to: x,
                        action: a,
                        weight,
                    });
                }
            }
        }
    }
    let edges: Vec<OffsetEdge> = best.into_iter().flatten().collect();

    if let Err(cycle) = bellman_ford(m, &edges) {
        let weight = cycle.iter().map(|e| e.weight).sum();
        return Synthesis::NegativeCycle {
            edges: cycle,
            weight,
        };
    }

    // Tight offsets leave ties between an argmax pair and its successors.
    // Shrink every edge by as much as its strongly connected component
    // allows (half the minimum cycle mean), and cross-component edges by 1,
    // so that transitions strictly raise phi wherever that is possible.
    let shrunk = with_slack(m, &edges);
    let offsets = match bellman_ford(m, &shrunk) {
        Ok(d) => d,
        Err(_) => bellman_ford(m, &edges).expect("feasibility established above"),
    };
    Synthesis::Found(PotentialFunction::from_fn(game, |a, x| stage[x][a.0] + offsets[x]))
}

/// Difference-constraint feasibility. Returns potentials `d` with
/// `d[to] - d[from] <= weight` for every edge, or a negative cycle.
pub fn bellman_ford(m: usize, edges: &[OffsetEdge]) -> std::result::Result<Vec<f64>, Vec<OffsetEdge>> {
    let mut dist = vec![0.0f64; m];
    let mut pred: Vec<Option<usize>> = vec![None; m];
    let mut last = None;
    for _ in 0..m {
        last = None;
        for (k, e) in edges.iter().enumerate() {
            let cand = dist[e.from] + e.weight;
            if cand < dist[e.to] {
                dist[e.to] = cand;
                pred[e.to] = Some(k);
                last = Some(e.to);
            }
        }
        if last.is_none() {
            return Ok(dist);
        }
    }
    let Some(mut v) = last else {
        return Ok(dist);
    };
    for _ in 0..m {
        v = edges[pred[v].expect("relaxed vertices have predecessors")].from;
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let e = edges[pred[v].expect("cycle vertices have predecessors")];
        cycle.push(e);
        v = e.from;
        if v == start {
            break;
        }
    }
    cycle.reverse();
    Err(cycle)
}

/// Minimum mean cycle weight within one strongly connected component
/// (Karp). `None` when the component has no cycle.
pub fn min_cycle_mean(nodes: &[usize], edges: &[OffsetEdge]) -> Option<f64> {
    let k = nodes.len();
    let local = |v: usize| nodes.iter().position(|&u| u == v);
    let inner: Vec<(usize, usize, f64)> = edges
        .iter()
        .filter_map(|e| Some((local(e.from)?, local(e.to)?, e.weight)))
        .collect();
    if inner.is_empty() {
        return None;
    }
    let mut d = vec![vec![f64::INFINITY; k]; k + 1];
    d[0][0] = 0.0;
    for step in 1..=k {
        for &(u, v, w) in &inner {
            if d[step - 1][u].is_finite() && d[step - 1][u] + w < d[step][v] {
                d[step][v] = d[step - 1][u] + w;
            }
        }
    }
    (0..k)
        .filter(|&v| d[k][v].is_finite())
        .map(|v| {
            (0..k)
                .filter(|&s| d[s][v].is_finite())
                .map(|s| (d[k][v] - d[s][v]) / (k - s) as f64)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(f64::min)
}

fn with_slack(m: usize, edges: &[OffsetEdge]) -> Vec<OffsetEdge> {
    let mut graph = DiGraph::<(), ()>::with_capacity(m, edges.len());
    let nodes: Vec<_> = (0..m).map(|_| graph.add_node(())).collect();
    for e in edges {
        graph.add_edge(nodes[e.from], nodes[e.to], ());
    }
    let mut comp = vec![0; m];
    let mut slack = Vec::new();
    for (c, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        let members: Vec<usize> = scc.iter().map(|v| v.index()).collect();
        for &v in &members {
            comp[v] = c;
        }
        let lambda = min_cycle_mean(&members, edges).unwrap_or(0.0);
        slack.push(if lambda > 0.0 { lambda / 2.0 } else { 0.0 });
    }
    edges
        .iter()
        .map(|e| {
            let cut = if comp[e.from] == comp[e.to] {
                slack[comp[e.from]]
            } else {
                1.0
            };
            OffsetEdge {
                weight: e.weight - cut,
                ..*e
            }
        })
        .collect()
}

/// Joint-action/state pairs attaining the maximum of `phi`.
pub fn argmax_pairs(game: &StateBasedGame, phi: &PotentialFunction) -> Vec<ActionStatePair> {
    let max = phi.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    game.actions()
        .iter()
        .flat_map(|a| (0..game.states()).map(move |x| ActionStatePair::new(a, x)))
        .filter(|p| phi.value(p.action, p.state) == max)
        .collect()
}
