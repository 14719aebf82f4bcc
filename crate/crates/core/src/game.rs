//! Finite state-based games.
//!
//! A game couples an ordinary finite normal-form game per environment state
//! with one row-stochastic transition matrix per joint action. Agents, actions
//! and states are 0-based everywhere in the library; the JSON file format and
//! every report use 1-based indices and digit-string joint actions (`"22"`).

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Tolerance on kernel row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A joint action, stored as its mixed-radix flat index (agent 1 most
/// significant). Use [`ActionSpace`] to move between flat indices and
/// per-agent components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JointAction(pub usize);

impl JointAction {
    pub fn index(self) -> usize {
        self.0
    }
}

/// An (action, state) pair, the unit of equilibrium analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionStatePair {
    pub action: JointAction,
    pub state: usize,
}

impl ActionStatePair {
    pub fn new(action: JointAction, state: usize) -> Self {
        Self { action, state }
    }
}

/// The product action set `A = A_1 x ... x A_n` with its mixed-radix encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    counts: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl ActionSpace {
    pub fn new(counts: Vec<usize>) -> Self {
        let mut strides = vec![1; counts.len()];
        for i in (0..counts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * counts[i + 1];
        }
        let size = counts.iter().product();
        Self {
            counts,
            strides,
            size,
        }
    }

    pub fn agents(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn count(&self, agent: usize) -> usize {
        self.counts[agent]
    }

    /// `|A|`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn iter(&self) -> impl Iterator<Item = JointAction> + '_ {
        (0..self.size).map(JointAction)
    }

    pub fn component(&self, a: JointAction, agent: usize) -> usize {
        (a.0 / self.strides[agent]) % self.counts[agent]
    }

    pub fn components(&self, a: JointAction) -> Vec<usize> {
        (0..self.agents()).map(|i| self.component(a, i)).collect()
    }

    /// Replace agent `agent`'s component of `a` by `action`.
    pub fn with_component(&self, a: JointAction, agent: usize, action: usize) -> JointAction {
        let old = self.component(a, agent);
        JointAction(a.0 - old * self.strides[agent] + action * self.strides[agent])
    }

    pub fn encode(&self, components: &[usize]) -> Result<JointAction> {
        if components.len() != self.agents() {
            return Err(Error::IndexOutOfRange {
                what: "joint action length",
                index: components.len(),
                bound: self.agents() + 1,
            });
        }
        let mut flat = 0;
        for (i, &c) in components.iter().enumerate() {
            if c >= self.counts[i] {
                return Err(Error::IndexOutOfRange {
                    what: "action",
                    index: c,
                    bound: self.counts[i],
                });
            }
            flat += c * self.strides[i];
        }
        Ok(JointAction(flat))
    }

    pub fn check(&self, a: JointAction) -> Result<()> {
        if a.0 < self.size {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "joint action",
                index: a.0,
                bound: self.size,
            })
        }
    }

    /// 1-based digit string, e.g. `"22"`. Components are dot-separated when
    /// some agent has more than nine actions.
    pub fn label(&self, a: JointAction) -> String {
        let wide = self.counts.iter().any(|&k| k > 9);
        let digits: Vec<String> = self
            .components(a)
            .into_iter()
            .map(|c| (c + 1).to_string())
            .collect();
        if wide {
            digits.join(".")
        } else {
            digits.concat()
        }
    }

    /// Inverse of [`ActionSpace::label`].
    pub fn parse_label(&self, label: &str) -> Result<JointAction> {
        let bad = || Error::Parse {
            path: "joint action".into(),
            message: format!("cannot read {label:?} as a joint action"),
        };
        let parts: Vec<usize> = if label.contains('.') {
            label
                .split('.')
                .map(|s| s.parse::<usize>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        } else {
            label
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        if parts.contains(&0) {
            return Err(bad());
        }
        self.encode(&parts.iter().map(|p| p - 1).collect::<Vec<_>>())
    }
}

/// The on-disk shape of a game. Nothing here is checked; run [`validate`]
/// or [`StateBasedGame::from_raw`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawGame {
    pub agents: usize,
    pub actions: Vec<usize>,
    pub states: usize,
    /// `[state][flat joint action][agent]`
    pub payoffs: Vec<Vec<Vec<f64>>>,
    /// `[flat joint action][from][to]`
    pub kernels: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoAgents,
    NoStates,
    NoActions { agent: usize },
    ActionListLength { expected: usize, found: usize },
    Shape { path: String, expected: usize, found: usize },
    NonFinitePayoff { path: String, value: f64 },
    ProbabilityOutOfRange { path: String, value: f64 },
    RowSum { action: String, row: usize, path: String, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "game has no agents"),
            Violation::NoStates => write!(f, "game has no states"),
            Violation::NoActions { agent } => write!(f, "agent {} has no actions", agent + 1),
            Violation::ActionListLength { expected, found } => write!(
                f,
                "actions lists {found} agents but agents = {expected}"
            ),
            Violation::Shape {
                path,
                expected,
                found,
            } => {
                if found < expected {
                    write!(f, "{path}: missing entries (expected {expected}, found {found})")
                } else {
                    write!(f, "{path}: too many entries (expected {expected}, found {found})")
                }
            }
            Violation::NonFinitePayoff { path, value } => {
                write!(f, "{path}: payoff {value} is not finite")
            }
            Violation::ProbabilityOutOfRange { path, value } => {
                write!(f, "{path}: probability {value} outside [0, 1]")
            }
            Violation::RowSum {
                action,
                row,
                path,
                sum,
            } => write!(
                f,
                "{path}: kernel of action {action}, row {row}: row sum {sum}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "OK");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Check every structural invariant of a raw game and list each violation.
pub fn validate(raw: &RawGame) -> ValidationReport {
    let mut out = Vec::new();
    if raw.agents == 0 {
        out.push(Violation::NoAgents);
    }
    if raw.states == 0 {
        out.push(Violation::NoStates);
    }
    if raw.actions.len() != raw.agents {
        out.push(Violation::ActionListLength {
            expected: raw.agents,
            found: raw.actions.len(),
        });
    }
    for (i, &k) in raw.actions.iter().enumerate() {
        if k == 0 {
            out.push(Violation::NoActions { agent: i });
        }
    }
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }

    let space = ActionSpace::new(raw.actions.clone());
    let (n, na, m) = (raw.agents, space.size(), raw.states);
    let shape = |path: String, expected: usize, found: usize, out: &mut Vec<Violation>| {
        if expected != found {
            out.push(Violation::Shape {
                path,
                expected,
                found,
            });
        }
    };

    shape("payoffs".into(), m, raw.payoffs.len(), &mut out);
    for (x, per_state) in raw.payoffs.iter().enumerate().take(m) {
        shape(format!("payoffs[{x}]"), na, per_state.len(), &mut out);
        for (a, per_action) in per_state.iter().enumerate().take(na) {
            shape(format!("payoffs[{x}][{a}]"), n, per_action.len(), &mut out);
            for (i, &v) in per_action.iter().enumerate().take(n) {
                if !v.is_finite() {
                    out.push(Violation::NonFinitePayoff {
                        path: format!("payoffs[{x}][{a}][{i}]"),
                        value: v,
                    });
                }
            }
        }
    }

    shape("kernels".into(), na, raw.kernels.len(), &mut out);
    for (a, kernel) in raw.kernels.iter().enumerate().take(na) {
        shape(format!("kernels[{a}]"), m, kernel.len(), &mut out);
        for (x, row) in kernel.iter().enumerate().take(m) {
            let path = format!("kernels[{a}][{x}]");
            if row.len() != m {
                shape(path, m, row.len(), &mut out);
                continue;
            }
            let mut in_range = true;
            for (y, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    in_range = false;
                    out.push(Violation::ProbabilityOutOfRange {
                        path: format!("kernels[{a}][{x}][{y}]"),
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if in_range && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                out.push(Violation::RowSum {
                    action: space.label(JointAction(a)),
                    row: x + 1,
                    path,
                    sum,
                });
            }
        }
    }
    ValidationReport { violations: out }
}

/// A validated finite state-based game `{N, {A_i}, {c_i}, X, P}`.
///
/// Immutable once built; all queries are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBasedGame {
    space: ActionSpace,
    states: usize,
    /// `[state][joint action][agent]`, flattened.
    payoffs: Vec<f64>,
    /// `[joint action][from][to]`, flattened.
    kernels: Vec<f64>,
    /// Support of each kernel row, ascending.
    successors: Vec<Vec<usize>>,
}

impl StateBasedGame {
    pub fn from_raw(raw: RawGame) -> Result<Self> {
        let report = validate(&raw);
        if !report.is_ok() {
            return Err(Error::InvalidGame(report));
        }
        let space = ActionSpace::new(raw.actions);
        let payoffs = raw.payoffs.into_iter().flatten().flatten().collect();
        let kernels = raw.kernels.into_iter().flatten().flatten().collect();
        Ok(Self::assemble(space, raw.states, payoffs, kernels))
    }

    /// Build a game from closures `payoff(agent, a, x)` and `prob(a, from, to)`
    /// and validate it.
    pub fn from_fn(
        actions: Vec<usize>,
        states: usize,
        payoff: impl Fn(usize, JointAction, usize) -> f64,
        prob: impl Fn(JointAction, usize, usize) -> f64,
    ) -> Result<Self> {
        let space = ActionSpace::new(actions.clone());
        let n = actions.len();
        let raw = RawGame {
            agents: n,
            actions,
            states,
            payoffs: (0..states)
                .map(|x| {
                    space
                        .iter()
                        .map(|a| (0..n).map(|i| payoff(i, a, x)).collect())
                        .collect()
                })
                .collect(),
            kernels: space
                .iter()
                .map(|a| {
                    (0..states)
                        .map(|x| (0..states).map(|y| prob(a, x, y)).collect())
                        .collect()
                })
                .collect(),
        };
        Self::from_raw(raw)
    }

    fn assemble(space: ActionSpace, states: usize, payoffs: Vec<f64>, kernels: Vec<f64>) -> Self {
        let mut successors = Vec::with_capacity(space.size() * states);
        for a in 0..space.size() {
            for x in 0..states {
                let row = &kernels[(a * states + x) * states..(a * states + x + 1) * states];
                successors.push(
                    row.iter()
                        .enumerate()
                        .filter(|(_, &p)| p > 0.0)
                        .map(|(y, _)| y)
                        .collect(),
                );
            }
        }
        Self {
            space,
            states,
            payoffs,
            kernels,
            successors,
        }
    }

    pub fn to_raw(&self) -> RawGame {
        let (n, na, m) = (self.agents(), self.space.size(), self.states);
        RawGame {
            agents: n,
            actions: self.space.counts().to_vec(),
            states: m,
            payoffs: (0..m)
                .map(|x| {
                    (0..na)
                        .map(|a| self.payoffs[(x * na + a) * n..(x * na + a + 1) * n].to_vec())
                        .collect()
                })
                .collect(),
            kernels: (0..na)
                .map(|a| (0..m).map(|x| self.row(JointAction(a), x).to_vec()).collect())
                .collect(),
        }
    }

    pub fn agents(&self) -> usize {
        self.space.agents()
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> &ActionSpace {
        &self.space
    }

    pub fn label(&self, a: JointAction) -> String {
        self.space.label(a)
    }

    /// Hex SHA-256 of the canonical JSON form; identifies a game across
    /// batch results and analysis reports.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_raw()).expect("raw games always serialize");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn check_state(&self, x: usize) -> Result<()> {
        if x < self.states {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "state",
                index: x,
                bound: self.states,
            })
        }
    }

    pub fn check_agent(&self, i: usize) -> Result<()> {
        if i < self.agents() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "agent",
                index: i,
                bound: self.agents(),
            })
        }
    }

    fn check_pair(&self, a: JointAction, x: usize) -> Result<()> {
        self.space.check(a)?;
        self.check_state(x)
    }

    /// `c_i(a, x)`.
    pub fn payoff(&self, i: usize, a: JointAction, x: usize) -> Result<f64> {
        self.check_agent(i)?;
        self.check_pair(a, x)?;
        Ok(self.c(i, a, x))
    }

    #[inline]
    pub(crate) fn c(&self, i: usize, a: JointAction, x: usize) -> f64 {
        let n = self.agents();
        self.payoffs[(x * self.space.size() + a.0) * n + i]
    }

    /// Row `P(a; x, .)` of the transition kernel.
    #[inline]
    pub fn row(&self, a: JointAction, x: usize) -> &[f64] {
        let m = self.states;
        &self.kernels[(a.0 * m + x) * m..(a.0 * m + x + 1) * m]
    }

    /// `P(a; x, y)`.
    #[inline]
    pub fn prob(&self, a: JointAction, x: usize, y: usize) -> f64 {
        self.kernels[(a.0 * self.states + x) * self.states + y]
    }

    /// States `y` with `P(a; x, y) > 0`, ascending.
    #[inline]
    pub fn successors(&self, a: JointAction, x: usize) -> &[usize] {
        &self.successors[a.0 * self.states + x]
    }

    /// The full kernel `P(a)` as a dense row-major `m x m` matrix.
    pub fn kernel(&self, a: JointAction) -> Vec<Vec<f64>> {
        (0..self.states).map(|x| self.row(a, x).to_vec()).collect()
    }

    /// Strict better-reply set `B_i(a; x)`, ascending. No tolerance.
    pub fn better_reply_set(&self, i: usize, a: JointAction, x: usize) -> Result<Vec<usize>> {
        self.check_agent(i)?;
        self.check_pair(a, x)?;
        Ok(self.better_replies(i, a, x))
    }

    pub(crate) fn better_replies(&self, i: usize, a: JointAction, x: usize) -> Vec<usize> {
        let current = self.c(i, a, x);
        (0..self.space.count(i))
            .filter(|&ai| self.c(i, self.space.with_component(a, i, ai), x) > current)
            .collect()
    }

    /// Whether `a` is a pure Nash equilibrium of the stage game at `x`.
    pub fn is_pure_nash(&self, a: JointAction, x: usize) -> Result<bool> {
        self.check_pair(a, x)?;
        Ok(self.nash(a, x))
    }

    pub(crate) fn nash(&self, a: JointAction, x: usize) -> bool {
        (0..self.agents()).all(|i| {
            let current = self.c(i, a, x);
            (0..self.space.count(i))
                .all(|ai| self.c(i, self.space.with_component(a, i, ai), x) <= current)
        })
    }

    /// Joint actions whose every component is a strict better reply or the
    /// current component: the support of the local-search move from `(a, x)`.
    pub fn restricted_joint_support(&self, a: JointAction, x: usize) -> Result<Vec<JointAction>> {
        self.check_pair(a, x)?;
        let options: Vec<Vec<usize>> = (0..self.agents())
            .map(|i| {
                let mut v = self.better_replies(i, a, x);
                v.push(self.space.component(a, i));
                v.sort_unstable();
                v
            })
            .collect();
        let mut out = Vec::new();
        let mut digits = vec![0usize; options.len()];
        loop {
            let comps: Vec<usize> = digits.iter().enumerate().map(|(i, &d)| options[i][d]).collect();
            out.push(self.space.encode(&comps)?);
            let mut i = options.len();
            loop {
                if i == 0 {
                    out.sort_unstable();
                    return Ok(out);
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < options[i].len() {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    const C: usize = 0;
    const D: usize = 1;

    fn ja(g: &StateBasedGame, c: &[usize]) -> JointAction {
        g.actions().encode(c).unwrap()
    }

    #[test]
    fn example9_validates() {
        let g = fixtures::example9();
        assert!(validate(&g.to_raw()).is_ok());
    }

    #[test]
    fn bad_row_sum_is_reported() {
        let mut raw = fixtures::example9().to_raw();
        raw.kernels[1][2] = vec![0.0, 0.0, 0.3, 0.5];
        let report = validate(&raw);
        assert_eq!(report.violations.len(), 1);
        let msg = report.to_string();
        assert!(msg.contains("row sum 0.8"), "{msg}");
        assert!(msg.contains("kernels[1][2]"), "{msg}");
        assert!(StateBasedGame::from_raw(raw).is_err());
    }

    #[test]
    fn missing_payoff_and_range_violations() {
        let mut raw = fixtures::example9().to_raw();
        raw.payoffs[3][2].pop();
        raw.kernels[0][0] = vec![1.5, -0.5, 0.0, 0.0];
        let report = validate(&raw);
        let msg = report.to_string();
        assert!(msg.contains("payoffs[3][2]: missing entries"), "{msg}");
        assert!(msg.contains("kernels[0][0][0]"), "{msg}");
        assert!(msg.contains("kernels[0][0][1]"), "{msg}");
    }

    #[test]
    fn trivial_game_validates() {
        let g = StateBasedGame::from_fn(vec![1], 1, |_, _, _| 0.0, |_, _, _| 1.0).unwrap();
        assert_eq!(g.actions().size(), 1);
        assert!(g.is_pure_nash(JointAction(0), 0).unwrap());
    }

    #[test]
    fn example9_payoffs() {
        let g = fixtures::example9();
        assert_eq!(g.payoff(0, ja(&g, &[C, C]), 0).unwrap(), 5.0);
        assert_eq!(g.payoff(1, ja(&g, &[C, D]), 3).unwrap(), 3.0);
        assert!(g.payoff(2, JointAction(0), 0).is_err());
        assert!(g.payoff(0, JointAction(4), 0).is_err());
        assert!(g.payoff(0, JointAction(0), 4).is_err());
    }

    #[test]
    fn example4_state3_is_zero_sum() {
        let g = fixtures::example4();
        for a in g.actions().iter() {
            assert_eq!(g.payoff(0, a, 2).unwrap() + g.payoff(1, a, 2).unwrap(), 0.0);
        }
    }

    #[test]
    fn example9_better_replies() {
        let g = fixtures::example9();
        let cc = ja(&g, &[C, C]);
        assert_eq!(g.better_reply_set(0, cc, 1).unwrap(), vec![D]);
        assert!(g.better_reply_set(1, cc, 1).unwrap().is_empty());
    }

    #[test]
    fn example4_nash() {
        let g = fixtures::example4();
        let a22 = ja(&g, &[1, 1]);
        let a11 = ja(&g, &[0, 0]);
        assert!(g.is_pure_nash(a22, 0).unwrap());
        assert!(g.is_pure_nash(a22, 1).unwrap());
        assert!(g.is_pure_nash(a11, 0).unwrap());
        for a in g.actions().iter() {
            assert!(!g.is_pure_nash(a, 2).unwrap());
        }
    }

    #[test]
    fn example9_restricted_support() {
        let g = fixtures::example9();
        let cc = ja(&g, &[C, C]);
        let dc = ja(&g, &[D, C]);
        assert_eq!(g.restricted_joint_support(cc, 1).unwrap(), vec![cc, dc]);
        assert_eq!(g.restricted_joint_support(cc, 2).unwrap(), vec![cc, dc]);
        // CC is Nash at state 1.
        assert_eq!(g.restricted_joint_support(cc, 0).unwrap(), vec![cc]);
    }

    #[test]
    fn labels_round_trip() {
        let space = ActionSpace::new(vec![2, 3]);
        assert_eq!(space.label(JointAction(0)), "11");
        assert_eq!(space.label(JointAction(5)), "23");
        assert_eq!(space.parse_label("23").unwrap(), JointAction(5));
        assert!(space.parse_label("31").is_err());
        let wide = ActionSpace::new(vec![12, 2]);
        assert_eq!(wide.label(JointAction(23)), "12.2");
        assert_eq!(wide.parse_label("12.2").unwrap(), JointAction(23));
    }

    proptest! {
        #[test]
        fn flat_index_round_trips(counts in prop::collection::vec(1usize..5, 1..5), seed in any::<usize>()) {
            let space = ActionSpace::new(counts);
            let a = JointAction(seed % space.size());
            let comps = space.components(a);
            prop_assert_eq!(space.encode(&comps).unwrap(), a);
            prop_assert_eq!(space.parse_label(&space.label(a)).unwrap(), a);
        }

        #[test]
        fn better_reply_properties(seed in any::<u64>()) {
            let g = fixtures::random_game(seed, &fixtures::RandomGameParams::default());
            for x in 0..g.states() {
                for a in g.actions().iter() {
                    let mut expected = 1;
                    let mut all_empty = true;
                    for i in 0..g.agents() {
                        let b = g.better_reply_set(i, a, x).unwrap();
                        prop_assert!(!b.contains(&g.actions().component(a, i)));
                        expected *= b.len() + 1;
                        all_empty &= b.is_empty();
                    }
                    let d = g.restricted_joint_support(a, x).unwrap();
                    prop_assert!(d.contains(&a));
                    prop_assert_eq!(d.len(), expected);
                    let nash = g.is_pure_nash(a, x).unwrap();
                    prop_assert_eq!(nash, all_empty);
                    prop_assert_eq!(nash, d == vec![a]);
                }
            }
        }
    }
}
