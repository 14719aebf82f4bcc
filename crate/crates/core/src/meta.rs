//! The exact Markov chain induced by the learner.
//!
//! The learner's state is `omega(t) = [x(t), a(t), x(t+1), a(t+1), x(t+2)]`:
//! enough history for the next decision plus the state it is taken in. This
//! module builds that chain over the meta-states reachable from an initial
//! distribution, then answers convergence questions exactly: absorption into
//! the locked set, lock-in probability by a finite horizon, and shortest
//! witness paths.
//!
//! Transition probabilities are computed agent by agent directly from the
//! case analysis, independently of [`crate::learner`], so the two can be
//! compared.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::chain;
use crate::error::{Error, Result};
use crate::game::{ActionStatePair, JointAction, StateBasedGame};
use crate::learner::{self, derive_seed, InitialState, LearnerConfig};
use crate::report::round12;

/// Default cap on `|Omega| = m^3 |A|^2`.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Largest transient system solved with dense LU; larger ones use Gauss-Seidel.
pub const DENSE_LIMIT: usize = 3000;

/// Required accuracy of the absorption solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// `[x, a, x', a', x'']`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaState {
    pub x0: usize,
    pub a0: JointAction,
    pub x1: usize,
    pub a1: JointAction,
    pub x2: usize,
}

impl MetaState {
    pub fn new(x0: usize, a0: JointAction, x1: usize, a1: JointAction, x2: usize) -> Self {
        Self { x0, a0, x1, a1, x2 }
    }

    /// Flat index `((((x0 |A| + a0) m + x1) |A| + a1) m + x2)`.
    pub fn flat(&self, game: &StateBasedGame) -> usize {
        let (na, m) = (game.actions().size(), game.states());
        (((self.x0 * na + self.a0.0) * m + self.x1) * na + self.a1.0) * m + self.x2
    }

    pub fn from_flat(game: &StateBasedGame, mut k: usize) -> Self {
        let (na, m) = (game.actions().size(), game.states());
        let x2 = k % m;
        k /= m;
        let a1 = JointAction(k % na);
        k /= na;
        let x1 = k % m;
        k /= m;
        let a0 = JointAction(k % na);
        k /= na;
        Self::new(k, a0, x1, a1, x2)
    }

    fn check(&self, game: &StateBasedGame) -> Result<()> {
        for x in [self.x0, self.x1, self.x2] {
            game.check_state(x)?;
        }
        game.actions().check(self.a0)?;
        game.actions().check(self.a1)
    }

    pub fn label(&self, game: &StateBasedGame) -> String {
        format!(
            "[{}, {}, {}, {}, {}]",
            self.x0 + 1,
            game.label(self.a0),
            self.x1 + 1,
            game.label(self.a1),
            self.x2 + 1
        )
    }
}

/// Probability that agent `i` plays `bi` after playing the `i`-th components
/// of `a` then `a1` and observing `x2`.
fn agent_factor(game: &StateBasedGame, i: usize, a: JointAction, a1: JointAction, x2: usize, bi: usize, eps: f64) -> f64 {
    let space = game.actions();
    let prev = space.component(a1, i);
    let k = space.count(i);
    if a != a1 {
        if k == 1 {
            1.0
        } else if bi == prev {
            eps
        } else {
            (1.0 - eps) / (k - 1) as f64
        }
    } else {
        let better = game.better_replies(i, a1, x2);
        if better.is_empty() {
            if bi == prev {
                1.0
            } else {
                0.0
            }
        } else if bi == prev {
            eps
        } else if better.contains(&bi) {
            (1.0 - eps) / better.len() as f64
        } else {
            0.0
        }
    }
}

/// One-step probability `omega1 -> omega2` with per-agent inertia.
pub fn transition_prob(game: &StateBasedGame, epsilons: &[f64], w1: &MetaState, w2: &MetaState) -> Result<f64> {
    learner::check_epsilons(game, epsilons)?;
    w1.check(game)?;
    w2.check(game)?;
    Ok(transition(game, epsilons, w1, w2))
}

fn transition(game: &StateBasedGame, epsilons: &[f64], w1: &MetaState, w2: &MetaState) -> f64 {
    if (w1.x1, w1.a1, w1.x2) != (w2.x0, w2.a0, w2.x1) {
        return 0.0;
    }
    let space = game.actions();
    let mut p = game.prob(w2.a1, w1.x2, w2.x2);
    for (i, &eps) in epsilons.iter().enumerate() {
        if p == 0.0 {
            break;
        }
        p *= agent_factor(game, i, w1.a0, w1.a1, w1.x2, space.component(w2.a1, i), eps);
    }
    p
}

/// The equal-inertia closed form: repeated and changed histories written as
/// powers of `eps` times the product over deviating agents.
pub fn closed_form_prob(game: &StateBasedGame, eps: f64, w1: &MetaState, w2: &MetaState) -> f64 {
    if (w1.x1, w1.a1, w1.x2) != (w2.x0, w2.a0, w2.x1) {
        return 0.0;
    }
    let space = game.actions();
    let n = game.agents() as i32;
    let (b1, b2, y2) = (w1.a1, w2.a1, w1.x2);
    let movers: Vec<usize> = (0..game.agents())
        .filter(|&i| space.component(b1, i) != space.component(b2, i))
        .collect();
    let h = movers.len() as i32;
    let kernel = game.prob(b2, y2, w2.x2);
    if w1.a0 != b1 {
        let mut p = eps.powi(n - h);
        for &i in &movers {
            p *= (1.0 - eps) / (space.count(i) - 1) as f64;
        }
        p * kernel
    } else {
        let satisfied = (0..game.agents())
            .filter(|&i| game.better_replies(i, b1, y2).is_empty())
            .count() as i32;
        let mut p = eps.powi(n - h - satisfied);
        for &i in &movers {
            let better = game.better_replies(i, b1, y2);
            if !better.contains(&space.component(b2, i)) {
                return 0.0;
            }
            p *= (1.0 - eps) / better.len() as f64;
        }
        p * kernel
    }
}

/// Successors of `w` with their probabilities, in ascending order.
fn row_of(game: &StateBasedGame, epsilons: &[f64], w: &MetaState) -> Vec<(MetaState, f64)> {
    let space = game.actions();
    let options: Vec<Vec<(usize, f64)>> = (0..game.agents())
        .map(|i| {
            (0..space.count(i))
                .map(|bi| (bi, agent_factor(game, i, w.a0, w.a1, w.x2, bi, epsilons[i])))
                .filter(|&(_, p)| p > 0.0)
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut digits = vec![0usize; options.len()];
    'outer: loop {
        let comps: Vec<usize> = digits.iter().enumerate().map(|(i, &d)| options[i][d].0).collect();
        let pa: f64 = digits.iter().enumerate().map(|(i, &d)| options[i][d].1).product();
        let b = space.encode(&comps).expect("components drawn from each agent's range");
        for &y in game.successors(b, w.x2) {
            out.push((MetaState::new(w.x1, w.a1, w.x2, b, y), pa * game.prob(b, w.x2, y)));
        }
        let mut i = options.len();
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < options[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
    out.sort_by_key(|e| e.0);
    out
}

pub fn uniform_initial(game: &StateBasedGame) -> Vec<f64> {
    vec![1.0 / game.states() as f64; game.states()]
}

pub fn point_initial(game: &StateBasedGame, x: usize) -> Result<Vec<f64>> {
    game.check_state(x)?;
    let mut p = vec![0.0; game.states()];
    p[x] = 1.0;
    Ok(p)
}

/// The chain restricted to meta-states reachable from its initial distribution.
#[derive(Debug, Clone)]
pub struct MetaChain<'g> {
    game: &'g StateBasedGame,
    epsilons: Vec<f64>,
    start: Vec<f64>,
    states: Vec<MetaState>,
    index: HashMap<MetaState, usize>,
    rows: Vec<Vec<(usize, f64)>>,
    initial: Vec<f64>,
    locked: Vec<bool>,
    lockin: Vec<bool>,
}

impl<'g> MetaChain<'g> {
    /// `initial_states` is the distribution `p(x)` of `x(1)`.
    pub fn build(game: &'g StateBasedGame, epsilons: &[f64], initial_states: &[f64], budget: usize) -> Result<Self> {
        learner::check_epsilons(game, epsilons)?;
        let m = game.states();
        let na = game.actions().size();
        if initial_states.len() != m
            || initial_states.iter().any(|&p| !(0.0..=1.0).contains(&p))
            || (initial_states.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Config("initial state distribution must be a probability vector over X".into()));
        }
        let omega = m
            .checked_pow(3)
            .and_then(|v| v.checked_mul(na))
            .and_then(|v| v.checked_mul(na))
            .unwrap_or(usize::MAX);
        if omega > budget {
            return Err(Error::BudgetExceeded {
                required: omega,
                budget,
            });
        }

        let rse = chain::rse_table(game);
        let reach: Vec<Vec<Vec<bool>>> = game
            .actions()
            .iter()
            .map(|a| (0..m).map(|x| chain::reach(m, |u| game.successors(a, u), x)).collect())
            .collect();

        let mut states = Vec::new();
        let mut index = HashMap::new();
        let mut initial = Vec::new();
        let u = 1.0 / na as f64;
        for (x0, &px) in initial_states.iter().enumerate() {
            if px <= 0.0 {
                continue;
            }
            for a0 in game.actions().iter() {
                for &x1 in game.successors(a0, x0) {
                    for a1 in game.actions().iter() {
                        for &x2 in game.successors(a1, x1) {
                            let w = MetaState::new(x0, a0, x1, a1, x2);
                            let p = px * u * u * game.prob(a0, x0, x1) * game.prob(a1, x1, x2);
                            let k = *index.entry(w).or_insert_with(|| {
                                states.push(w);
                                initial.push(0.0);
                                states.len() - 1
                            });
                            initial[k] += p;
                        }
                    }
                }
            }
        }

        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut queue: VecDeque<usize> = (0..states.len()).collect();
        while let Some(k) = queue.pop_front() {
            let w = states[k];
            let row: Vec<(usize, f64)> = row_of(game, epsilons, &w)
                .into_iter()
                .map(|(v, p)| {
                    let j = *index.entry(v).or_insert_with(|| {
                        states.push(v);
                        initial.push(0.0);
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    });
                    (j, p)
                })
                .collect();
            if rows.len() <= k {
                rows.resize(k + 1, Vec::new());
            }
            rows[k] = row;
        }
        rows.resize(states.len(), Vec::new());

        let locked = states
            .iter()
            .map(|w| w.a0 == w.a1 && rse[w.a0.0][w.x1] && reach[w.a0.0][w.x1][w.x2])
            .collect();
        let lockin = states.iter().map(|w| w.a0 == w.a1 && rse[w.a1.0][w.x2]).collect();
        Ok(Self {
            game,
            epsilons: epsilons.to_vec(),
            start: initial_states.to_vec(),
            states,
            index,
            rows,
            initial,
            locked,
            lockin,
        })
    }

    pub fn game(&self) -> &StateBasedGame {
        self.game
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    /// `|Omega|`, reachable or not.
    pub fn omega_size(&self) -> usize {
        let (na, m) = (self.game.actions().size(), self.game.states());
        m * m * m * na * na
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[MetaState] {
        &self.states
    }

    pub fn index_of(&self, w: &MetaState) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Outgoing transitions of the `k`-th reachable meta-state.
    pub fn row(&self, k: usize) -> &[(usize, f64)] {
        &self.rows[k]
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// `a = a'`, `[a, x']` an RSE and `x''` reachable from `x'` under `a`.
    pub fn is_locked(&self, k: usize) -> bool {
        self.locked[k]
    }

    pub fn locked_count(&self) -> usize {
        self.locked.iter().filter(|&&l| l).count()
    }

    /// `a = a'` and `[a', x'']` an RSE: the learner has locked in by the time
    /// this meta-state is current. Contains the locked set.
    pub fn is_lockin(&self, k: usize) -> bool {
        self.lockin[k]
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Positive transitions leaving the locked set (should be none).
    pub fn locked_leaks(&self) -> Vec<(MetaState, MetaState)> {
        let mut out = Vec::new();
        for (k, row) in self.rows.iter().enumerate() {
            if self.locked[k] {
                for &(j, p) in row {
                    if p > 0.0 && !self.locked[j] {
                        out.push((self.states[k], self.states[j]));
                    }
                }
            }
        }
        out
    }

    /// States with a positive-probability path into the locked set.
    fn reaches_locked(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut back: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                if p > 0.0 {
                    back[j].push(k);
                }
            }
        }
        let mut seen = self.locked.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&k| seen[k]).collect();
        while let Some(j) = queue.pop_front() {
            for &k in &back[j] {
                if !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        seen
    }

    /// Probability of eventually entering the locked set, from every
    /// reachable meta-state and aggregated over the initial distribution.
    pub fn absorption_probabilities(&self) -> Result<Absorption> {
        let n = self.states.len();
        let can = self.reaches_locked();
        let mut h = vec![0.0; n];
        let mut slot = vec![usize::MAX; n];
        let mut transient = Vec::new();
        for k in 0..n {
            if self.locked[k] {
                h[k] = 1.0;
            } else if can[k] {
                slot[k] = transient.len();
                transient.push(k);
            }
        }
        let t = transient.len();
        let mut rhs = vec![0.0; t];
        for (s, &k) in transient.iter().enumerate() {
            rhs[s] = self.rows[k]
                .iter()
                .filter(|&&(j, _)| self.locked[j])
                .map(|&(_, p)| p)
                .sum();
        }
        let solution = if t == 0 {
            Vec::new()
        } else if t <= DENSE_LIMIT {
            let mut a = DMatrix::<f64>::identity(t, t);
            for (s, &k) in transient.iter().enumerate() {
                for &(j, p) in &self.rows[k] {
                    if slot[j] != usize::MAX {
                        a[(s, slot[j])] -= p;
                    }
                }
            }
            let b = DVector::from_vec(rhs.clone());
            match a.lu().solve(&b) {
                Some(v) => v.iter().copied().collect(),
                None => return Err(Error::SingularSystem { residual: f64::INFINITY }),
            }
        } else {
            self.gauss_seidel(&transient, &slot, &rhs)
        };
        for (s, &k) in transient.iter().enumerate() {
            h[k] = solution[s];
        }
        let mut residual: f64 = 0.0;
        for (s, &k) in transient.iter().enumerate() {
            let mut lhs = h[k];
            for &(j, p) in &self.rows[k] {
                if slot[j] != usize::MAX {
                    lhs -= p * h[j];
                }
            }
            residual = residual.max((lhs - rhs[s]).abs());
        }
        if residual > RESIDUAL_TOLERANCE || !residual.is_finite() {
            return Err(Error::SingularSystem { residual });
        }
        let aggregate = self.initial.iter().zip(&h).map(|(p, v)| p * v).sum();
        Ok(Absorption {
            per_state: h,
            aggregate,
            residual,
        })
    }

    fn gauss_seidel(&self, transient: &[usize], slot: &[usize], rhs: &[f64]) -> Vec<f64> {
        let t = transient.len();
        let mut x = vec![0.0; t];
        for _ in 0..1_000_000 {
            let mut change: f64 = 0.0;
            for (s, &k) in transient.iter().enumerate() {
                let mut acc = rhs[s];
                let mut diag = 0.0;
                for &(j, p) in &self.rows[k] {
                    let sj = slot[j];
                    if sj == s {
                        diag += p;
                    } else if sj != usize::MAX {
                        acc += p * x[sj];
                    }
                }
                let v = acc / (1.0 - diag);
                change = change.max((v - x[s]).abs());
                x[s] = v;
            }
            if change < 1e-15 {
                break;
            }
        }
        x
    }

    /// Absorption conditioned on `x(1) = x`, for every `x` in the support of
    /// the initial distribution.
    pub fn absorption_by_initial_state(&self, absorption: &Absorption) -> Vec<(usize, f64)> {
        let m = self.game.states();
        let mut mass = vec![0.0; m];
        let mut hit = vec![0.0; m];
        for (k, w) in self.states.iter().enumerate() {
            mass[w.x0] += self.initial[k];
            hit[w.x0] += self.initial[k] * absorption.per_state[k];
        }
        (0..m)
            .filter(|&x| self.start[x] > 0.0)
            .map(|x| (x, hit[x] / mass[x]))
            .collect()
    }

    /// `Pr[lock-in time <= T]` for `T = 2, 3, ..., max_horizon`, where the
    /// lock-in time is the one reported by [`learner::detect_lockin`].
    pub fn lockin_curve(&self, max_horizon: usize) -> Result<Vec<f64>> {
        if max_horizon < 2 {
            return Err(Error::Config(format!("horizon {max_horizon} must be at least 2")));
        }
        let n = self.states.len();
        let mut dist = self.initial.clone();
        let mut absorbed = 0.0;
        for (d, &lock) in dist.iter_mut().zip(&self.lockin) {
            if lock {
                absorbed += *d;
                *d = 0.0;
            }
        }
        let mut curve = Vec::with_capacity(max_horizon - 1);
        curve.push(absorbed);
        let mut next = vec![0.0; n];
        for _ in 3..=max_horizon {
            next.fill(0.0);
            for (k, &d) in dist.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for &(j, p) in &self.rows[k] {
                    next[j] += d * p;
                }
            }
            for (d, &lock) in next.iter_mut().zip(&self.lockin) {
                if lock {
                    absorbed += *d;
                    *d = 0.0;
                }
            }
            std::mem::swap(&mut dist, &mut next);
            curve.push(absorbed);
        }
        Ok(curve)
    }

    /// `Pr[lock-in time <= horizon]`.
    pub fn lockin_probability_by_horizon(&self, horizon: usize) -> Result<f64> {
        Ok(*self.lockin_curve(horizon)?.last().expect("curve has at least one point"))
    }

    /// A shortest positive-probability path from `from` into the locked set,
    /// excluding `from` itself. Empty when `from` is already locked; `None`
    /// when the locked set is unreachable or `from` is not a reachable
    /// meta-state of this chain.
    pub fn find_rse_path(&self, from: &MetaState) -> Option<Vec<MetaState>> {
        let start = self.index_of(from)?;
        if self.locked[start] {
            return Some(Vec::new());
        }
        let n = self.states.len();
        let mut parent = vec![usize::MAX; n];
        parent[start] = start;
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            for &(j, p) in &self.rows[k] {
                if p <= 0.0 || parent[j] != usize::MAX {
                    continue;
                }
                parent[j] = k;
                if self.locked[j] {
                    let mut path = vec![self.states[j]];
                    let mut v = k;
                    while v != start {
                        path.push(self.states[v]);
                        v = parent[v];
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(j);
            }
        }
        None
    }

    /// Compare learner runs against the exact one-step law.
    ///
    /// `runs` trajectories are drawn with seeds derived from `config.seed`.
    /// The headline metric is `max |N(w1 -> w2) / N - N(w1) / N * P(w1, w2)|`
    /// over all pairs with `w1` visited; it tends to 0 at rate `N^{-1/2}`
    /// whatever the visit distribution. Conditional frequencies are also
    /// reported for rows visited at least `min_row_visits` times.
    pub fn empirical_validation(&self, config: &LearnerConfig, runs: usize, min_row_visits: usize) -> Result<DivergenceReport> {
        if config.epsilons != self.epsilons {
            return Err(Error::Config("learner and meta-chain use different inertia".into()));
        }
        if runs == 0 {
            return Err(Error::EmptyBatch);
        }
        let game = self.game;
        let mut pair_counts: HashMap<(MetaState, MetaState), usize> = HashMap::new();
        let mut source_counts: HashMap<MetaState, usize> = HashMap::new();
        let mut forbidden = Vec::new();
        let mut total = 0usize;
        for r in 0..runs {
            let cfg = LearnerConfig {
                seed: derive_seed(config.seed, r as u64),
                ..config.clone()
            };
            let traj = learner::run(game, &cfg)?;
            let omegas: Vec<MetaState> = (1..traj.horizon)
                .map(|t| {
                    MetaState::new(
                        traj.state(t),
                        traj.action(t),
                        traj.state(t + 1),
                        traj.action(t + 1),
                        traj.state(t + 2),
                    )
                })
                .collect();
            for (t, w) in omegas.windows(2).enumerate() {
                let p = transition(game, &self.epsilons, &w[0], &w[1]);
                if p <= 0.0 {
                    forbidden.push(ForbiddenTransition {
                        run: r,
                        t: t + 1,
                        from: w[0],
                        to: w[1],
                    });
                }
                *pair_counts.entry((w[0], w[1])).or_default() += 1;
                *source_counts.entry(w[0]).or_default() += 1;
                total += 1;
            }
        }
        let n = total.max(1) as f64;
        let mut max_joint: f64 = 0.0;
        let mut worst = None;
        let mut max_conditional: f64 = 0.0;
        let mut rows_compared = 0;
        let mut sources: Vec<_> = source_counts.iter().collect();
        sources.sort();
        for (&w, &c) in sources {
            let row = row_of(game, &self.epsilons, &w);
            let conditional = c >= min_row_visits;
            rows_compared += usize::from(conditional);
            for (v, p) in row {
                let observed = pair_counts.get(&(w, v)).copied().unwrap_or(0) as f64;
                let dev = (observed / n - c as f64 / n * p).abs();
                if dev > max_joint {
                    max_joint = dev;
                    worst = Some((w, v));
                }
                if conditional {
                    max_conditional = max_conditional.max((observed / c as f64 - p).abs());
                }
            }
        }
        Ok(DivergenceReport {
            runs,
            transitions: total,
            distinct_sources: source_counts.len(),
            max_joint_deviation: max_joint,
            worst_pair: worst,
            rows_compared,
            max_conditional_deviation: max_conditional,
            forbidden,
        })
    }

    /// Everything the `oracle` command prints.
    pub fn summarize(&self, horizon: Option<usize>) -> Result<OracleSummary> {
        let absorption = self.absorption_probabilities()?;
        let truncated = match horizon {
            Some(t) => Some((t, self.lockin_probability_by_horizon(t)?)),
            None => None,
        };
        Ok(OracleSummary {
            omega_size: self.omega_size(),
            reachable: self.len(),
            locked: self.locked_count(),
            absorption: absorption.aggregate,
            residual: absorption.residual,
            per_initial_state: self.absorption_by_initial_state(&absorption),
            truncated,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Absorption {
    /// Indexed like [`MetaChain::states`].
    pub per_state: Vec<f64>,
    pub aggregate: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForbiddenTransition {
    pub run: usize,
    /// 1-based index of the source meta-state.
    pub t: usize,
    pub from: MetaState,
    pub to: MetaState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub runs: usize,
    pub transitions: usize,
    pub distinct_sources: usize,
    pub max_joint_deviation: f64,
    pub worst_pair: Option<(MetaState, MetaState)>,
    pub rows_compared: usize,
    pub max_conditional_deviation: f64,
    pub forbidden: Vec<ForbiddenTransition>,
}

impl DivergenceReport {
    pub fn describe(&self, game: &StateBasedGame) -> String {
        let mut s = format!(
            "runs {}, transitions {}, distinct meta-states visited {}\n\
             max joint-frequency deviation {}\n\
             max conditional deviation {} over {} well-visited rows\n\
             forbidden transitions {}\n",
            self.runs,
            self.transitions,
            self.distinct_sources,
            round12(self.max_joint_deviation),
            round12(self.max_conditional_deviation),
            self.rows_compared,
            self.forbidden.len()
        );
        if let Some((w, v)) = &self.worst_pair {
            s.push_str(&format!("worst pair {} -> {}\n", w.label(game), v.label(game)));
        }
        for f in self.forbidden.iter().take(10) {
            s.push_str(&format!(
                "  run {} t {}: {} -> {}\n",
                f.run,
                f.t,
                f.from.label(game),
                f.to.label(game)
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub omega_size: usize,
    pub reachable: usize,
    pub locked: usize,
    pub absorption: f64,
    pub residual: f64,
    /// `(state, probability)`, 0-based states.
    pub per_initial_state: Vec<(usize, f64)>,
    /// `(T, Pr[lock-in time <= T])`.
    pub truncated: Option<(usize, f64)>,
}

impl OracleSummary {
    pub fn to_json(&self) -> Value {
        json!({
            "omega_size": self.omega_size,
            "reachable": self.reachable,
            "locked": self.locked,
            "absorption_probability": round12(self.absorption),
            "residual": self.residual,
            "per_initial_state": self.per_initial_state.iter()
                .map(|&(x, p)| json!({ "state": x + 1, "absorption_probability": round12(p) }))
                .collect::<Vec<_>>(),
            "truncated": self.truncated.map(|(t, p)| json!({ "horizon": t, "lockin_probability": round12(p) })),
        })
    }

    pub fn describe(&self) -> String {
        let mut s = format!(
            "|Omega| = {}\nreachable meta-states: {}\nlocked meta-states: {}\nabsorption probability: {}\n",
            self.omega_size,
            self.reachable,
            self.locked,
            round12(self.absorption)
        );
        for &(x, p) in &self.per_initial_state {
            s.push_str(&format!("  from state {}: {}\n", x + 1, round12(p)));
        }
        if let Some((t, p)) = self.truncated {
            s.push_str(&format!("lock-in probability by T = {t}: {}\n", round12(p)));
        }
        s
    }
}

/// The four-way split of consecutive (action, state) pairs used in the
/// convergence argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryClass {
    /// Equivalent RSEs.
    S1,
    /// Not equivalent, second pair an RSE.
    S2,
    /// Second pair not an RSE, actions differ.
    S3,
    /// Second pair not an RSE, same action.
    S4,
}

pub fn classify_history(game: &StateBasedGame, first: ActionStatePair, second: ActionStatePair) -> Result<HistoryClass> {
    if chain::equivalent(game, first, second)? {
        Ok(HistoryClass::S1)
    } else if chain::is_rse(game, second.action, second.state)? {
        Ok(HistoryClass::S2)
    } else if first.action != second.action {
        Ok(HistoryClass::S3)
    } else {
        Ok(HistoryClass::S4)
    }
}

/// Start state of a learner config as an initial distribution.
pub fn initial_distribution(game: &StateBasedGame, init: InitialState) -> Result<Vec<f64>> {
    match init {
        InitialState::Fixed(x) => point_initial(game, x),
        InitialState::Uniform => Ok(uniform_initial(game)),
    }
}
