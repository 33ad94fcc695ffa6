//! Cost-constrained decision-list search.
//!
//! Clauses are fitted greedily, one at a time, at each interval. For a
//! candidate clause `(region, action)` every unit contributes `U_i` if the
//! clause captures it and `V_i` otherwise, where units already captured by an
//! earlier clause have `U_i = V_i` = their prediction at the earlier action,
//! and still-unassigned units fall back to the unconstrained rule. Sorting a
//! covariate once then lets every threshold be scored with a running sum of
//! `U_i - V_i`.
//!
//! Candidate ordering when objectives tie: more newly-assigned units, lower
//! feature index, `LE` before `GT`, smaller threshold, smaller action id.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::{Action, FeatureSpec, StageFeatures, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::qlearn::{fit_stage_q_on, pseudo_outcomes_on, QPair, QTable};
use crate::regime::{Clause, DecisionList, Regime, RegimeSummary, SummarySource};
use crate::regress::LearnerSpec;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Le,
    Gt,
}

/// Greedy clause-search bookkeeping for one interval.
#[derive(Clone, Debug)]
pub struct ClauseSearchState<'a, T> {
    table: &'a QTable<T>,
    columns: &'a [Vec<T>],
    assigned: Vec<Option<usize>>,
    fixed_z: T,
    fixed_y: T,
    remaining: T,
    population: usize,
}

impl<'a, T: Scalar> ClauseSearchState<'a, T> {
    /// `columns[p][i]` is feature `p` of unit `i`; `remaining` is the budget
    /// for this and all later intervals.
    pub fn new(table: &'a QTable<T>, columns: &'a [Vec<T>], remaining: T) -> Result<Self> {
        let n = table.n_units();
        if n == 0 {
            return Err(Error::Argument("clause search needs at least one unit".into()));
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Argument("feature columns must align with the Q-table".into()));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::data("non-finite feature value"));
        }
        Ok(ClauseSearchState {
            table,
            columns,
            assigned: vec![None; n],
            fixed_z: T::zero(),
            fixed_y: T::zero(),
            remaining,
            population: n,
        })
    }

    /// Divides Ψ by `population` instead of the number of table rows, so
    /// that units absent from the table (dead before this interval) count
    /// as contributing zero.
    pub fn with_population(mut self, population: usize) -> Result<Self> {
        if population < self.n() {
            return Err(Error::Argument(format!(
                "population {population} is smaller than the {} units searched",
                self.n()
            )));
        }
        self.population = population;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.assigned.len()
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn table(&self) -> &QTable<T> {
        self.table
    }

    /// Action index given to `unit` by an earlier clause.
    pub fn assigned(&self, unit: usize) -> Option<usize> {
        self.assigned[unit]
    }

    pub fn n_unassigned(&self) -> usize {
        self.assigned.iter().filter(|a| a.is_none()).count()
    }

    /// Summed Q-values of units captured by earlier clauses.
    pub fn fixed(&self) -> (T, T) {
        (self.fixed_z, self.fixed_y)
    }

    /// Direct recomputation of [`Self::fixed`].
    pub fn fixed_recomputed(&self) -> (T, T) {
        self.assigned.iter().enumerate().fold((T::zero(), T::zero()), |(z, y), (i, a)| match a {
            Some(ai) => (z + self.table.qz(i, *ai), y + self.table.qy(i, *ai)),
            None => (z, y),
        })
    }

    pub fn remaining_constraint(&self) -> T {
        self.remaining
    }

    /// Ψ of the current intermediate rule (earlier clauses, then the unconstrained rule).
    pub fn current_psi(&self) -> (T, T) {
        let (mut z, mut y) = (self.fixed_z, self.fixed_y);
        for (i, a) in self.assigned.iter().enumerate() {
            if a.is_none() {
                let t = self.table.tilde_index(i);
                z = z + self.table.qz(i, t);
                y = y + self.table.qy(i, t);
            }
        }
        let n = T::from_count(self.population);
        (z / n, y / n)
    }

    /// Whether unit `i` falls in the candidate's region.
    pub fn in_region(&self, c: &CandidateClause<T>, i: usize) -> bool {
        let v = self.columns[c.feature][i];
        match c.direction {
            Direction::Le => v <= c.threshold,
            Direction::Gt => v > c.threshold,
        }
    }

    /// Commits a clause: unassigned units in its region take its action.
    pub fn assign(&mut self, c: &CandidateClause<T>) {
        for i in 0..self.n() {
            if self.assigned[i].is_none() && self.in_region(c, i) {
                self.assigned[i] = Some(c.action_index);
                self.fixed_z = self.fixed_z + self.table.qz(i, c.action_index);
                self.fixed_y = self.fixed_y + self.table.qy(i, c.action_index);
            }
        }
    }
}

/// Per-unit outcomes with the candidate clause applied (`U`) or not (`V`).
#[derive(Clone, Debug, PartialEq)]
pub struct UvValues<T> {
    pub uz: Vec<T>,
    pub vz: Vec<T>,
    pub uy: Vec<T>,
    pub vy: Vec<T>,
}

impl<T: Scalar> UvValues<T> {
    pub fn len(&self) -> usize {
        self.uz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uz.is_empty()
    }
}

pub fn compute_uv<T: Scalar>(state: &ClauseSearchState<'_, T>, action_index: usize) -> UvValues<T> {
    let n = state.n();
    let t = state.table;
    let mut uv = UvValues {
        uz: Vec::with_capacity(n),
        vz: Vec::with_capacity(n),
        uy: Vec::with_capacity(n),
        vy: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (u_a, v_a) = match state.assigned[i] {
            Some(prior) => (prior, prior),
            None => (action_index, t.tilde_index(i)),
        };
        uv.uz.push(t.qz(i, u_a));
        uv.vz.push(t.qz(i, v_a));
        uv.uy.push(t.qy(i, u_a));
        uv.vy.push(t.qy(i, v_a));
    }
    uv
}

/// Ψ of one threshold of a sweep. `threshold == None` is the empty region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdPsi<T> {
    pub threshold: Option<T>,
    pub psi_z: T,
    pub psi_y: T,
    pub coverage: usize,
}

/// Scores every threshold at the unique values of `column`, starting from
/// the empty region. `eligible[i]` marks units not captured by an earlier
/// clause; only those count towards coverage.
///
/// For `Le` the thresholds run upward through all unique values (the last
/// one captures everyone). For `Gt` they run downward from the
/// second-largest unique value to the smallest. Sums are divided by
/// `population`, which is at least the number of units.
pub fn enumerate_thresholds<T: Scalar>(
    uv: &UvValues<T>,
    column: &[T],
    eligible: &[bool],
    direction: Direction,
    population: usize,
) -> Vec<ThresholdPsi<T>> {
    let n = uv.len();
    assert_eq!(column.len(), n, "column length");
    assert_eq!(eligible.len(), n, "eligibility length");
    assert!(population >= n && population > 0, "population below unit count");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].partial_cmp(&column[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    if direction == Direction::Gt {
        order.reverse();
    }
    let nn = T::from_count(population);
    let mut sz = uv.vz.iter().copied().sum::<T>();
    let mut sy = uv.vy.iter().copied().sum::<T>();
    let mut coverage = 0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(ThresholdPsi { threshold: None, psi_z: sz / nn, psi_y: sy / nn, coverage });
    let mut g = 0;
    while g < n {
        let value = column[order[g]];
        let mut h = g;
        while h < n && column[order[h]] == value {
            let i = order[h];
            sz = sz + (uv.uz[i] - uv.vz[i]);
            sy = sy + (uv.uy[i] - uv.vy[i]);
            coverage += eligible[i] as usize;
            h += 1;
        }
        let threshold = match direction {
            Direction::Le => Some(value),
            Direction::Gt => (h < n).then(|| column[order[h]]),
        };
        if threshold.is_some() {
            out.push(ThresholdPsi { threshold, psi_z: sz / nn, psi_y: sy / nn, coverage });
        }
        g = h;
    }
    out
}

/// A scored `(feature, direction, threshold, action)` choice.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateClause<T> {
    pub feature: usize,
    pub direction: Direction,
    pub threshold: T,
    pub action_index: usize,
    pub action: Action,
    pub psi_z: T,
    pub psi_y: T,
    pub coverage: usize,
    /// `psi_z + eta * coverage / n`.
    pub objective: T,
}

impl<T: Scalar> CandidateClause<T> {
    pub fn to_clause(&self, names: &[String]) -> Clause<T> {
        let f = &names[self.feature];
        match self.direction {
            Direction::Le => Clause::le(f, self.threshold, self.action),
            Direction::Gt => Clause::gt(f, self.threshold, self.action),
        }
    }

    /// Total order used to pick among candidates; `Greater` means `self` wins.
    pub fn preference(&self, other: &Self) -> Ordering {
        self.objective
            .partial_cmp(&other.objective)
            .unwrap_or(Ordering::Equal)
            .then(self.coverage.cmp(&other.coverage))
            .then(other.feature.cmp(&self.feature))
            .then(other.direction.cmp(&self.direction))
            .then(other.threshold.partial_cmp(&self.threshold).unwrap_or(Ordering::Equal))
            .then(other.action.cmp(&self.action))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClauseOutcome<T> {
    Clause(CandidateClause<T>),
    /// Leaving the region empty is the unique feasible maximizer.
    Skip,
    /// Neither any clause nor the empty region meets the budget.
    Infeasible,
}

/// Best clause under the budget, maximizing `Ψ^Z + eta * coverage / n`
/// subject to `Ψ^Y < remaining`. Only candidates that capture at least one
/// unassigned unit compete with the empty region.
pub fn fit_clause<T: Scalar>(state: &ClauseSearchState<'_, T>, eta: T) -> ClauseOutcome<T> {
    let n = T::from_count(state.population);
    let eligible: Vec<bool> = state.assigned.iter().map(|a| a.is_none()).collect();
    let mut best: Option<CandidateClause<T>> = None;
    let mut empty: Option<(T, T)> = None;
    for (ai, &action) in state.table.actions().iter().enumerate() {
        let uv = compute_uv(state, ai);
        for (feature, column) in state.columns.iter().enumerate() {
            for direction in [Direction::Le, Direction::Gt] {
                for t in enumerate_thresholds(&uv, column, &eligible, direction, state.population) {
                    let Some(threshold) = t.threshold else {
                        empty.get_or_insert((t.psi_z, t.psi_y));
                        continue;
                    };
                    if t.coverage == 0 || !(t.psi_y < state.remaining) {
                        continue;
                    }
                    let cand = CandidateClause {
                        feature,
                        direction,
                        threshold,
                        action_index: ai,
                        action,
                        psi_z: t.psi_z,
                        psi_y: t.psi_y,
                        coverage: t.coverage,
                        objective: t.psi_z + eta * T::from_count(t.coverage) / n,
                    };
                    if best.as_ref().is_none_or(|b| cand.preference(b) == Ordering::Greater) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    let (empty_z, empty_y) = empty.unwrap_or_else(|| state.current_psi());
    let empty_feasible = empty_y < state.remaining;
    match best {
        Some(b) if !empty_feasible || b.objective >= empty_z => ClauseOutcome::Clause(b),
        _ if empty_feasible => ClauseOutcome::Skip,
        _ => ClauseOutcome::Infeasible,
    }
}

/// The forced catch-all clause.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalClause<T> {
    pub action_index: usize,
    pub action: Action,
    pub psi_z: T,
    pub psi_y: T,
    pub feasible: bool,
}

/// Catch-all action maximizing Ψ^Z under the budget; if none meets it, the
/// action with the smallest Ψ^Y, flagged infeasible.
pub fn fit_final_clause<T: Scalar>(state: &ClauseSearchState<'_, T>) -> FinalClause<T> {
    let n = T::from_count(state.population);
    let t = state.table;
    let scored: Vec<(T, T)> = (0..t.actions().len())
        .map(|ai| {
            let (mut z, mut y) = (state.fixed_z, state.fixed_y);
            for i in 0..state.n() {
                if state.assigned[i].is_none() {
                    z = z + t.qz(i, ai);
                    y = y + t.qy(i, ai);
                }
            }
            (z / n, y / n)
        })
        .collect();
    let mut pick: Option<usize> = None;
    for (ai, &(z, y)) in scored.iter().enumerate() {
        if y < state.remaining && pick.is_none_or(|p| z > scored[p].0) {
            pick = Some(ai);
        }
    }
    let (ai, feasible) = match pick {
        Some(ai) => (ai, true),
        None => {
            let mut cheapest = 0;
            for (ai, s) in scored.iter().enumerate().skip(1) {
                if s.1 < scored[cheapest].1 {
                    cheapest = ai;
                }
            }
            (cheapest, false)
        }
    };
    FinalClause { action_index: ai, action: t.actions()[ai], psi_z: scored[ai].0, psi_y: scored[ai].1, feasible }
}

/// A fitted interval rule and its plug-in value.
#[derive(Clone, Debug, PartialEq)]
pub struct StageRule<T> {
    pub list: DecisionList<T>,
    pub psi_z: T,
    pub psi_y: T,
    pub feasible: bool,
}

/// Greedy list of at most `max_len` clauses for one interval. Ψ is averaged
/// over `population` units; see [`ClauseSearchState::with_population`].
#[allow(clippy::too_many_arguments)]
pub fn fit_stage_rule_on<T: Scalar>(
    k: usize,
    table: &QTable<T>,
    names: &[String],
    columns: &[Vec<T>],
    population: usize,
    constraint: T,
    max_len: usize,
    eta: T,
) -> Result<StageRule<T>> {
    if max_len == 0 {
        return Err(Error::Config("maximum list length must be >= 1".into()));
    }
    if names.len() != columns.len() {
        return Err(Error::Argument("one name per feature column".into()));
    }
    let mut state = ClauseSearchState::new(table, columns, constraint)?.with_population(population)?;
    let mut clauses = Vec::new();
    for _ in 1..max_len {
        if state.n_unassigned() == 0 {
            break;
        }
        match fit_clause(&state, eta) {
            ClauseOutcome::Clause(c) => {
                clauses.push(c.to_clause(names));
                state.assign(&c);
            }
            ClauseOutcome::Skip | ClauseOutcome::Infeasible => break,
        }
    }
    let last = fit_final_clause(&state);
    clauses.push(Clause::all(last.action));
    Ok(StageRule { list: DecisionList::new(k, clauses)?, psi_z: last.psi_z, psi_y: last.psi_y, feasible: last.feasible })
}

/// Interval-`k` rule from fitted Q-functions, with `constraint` the budget
/// summed over intervals `k..K`. Ψ averages over the whole cohort, units
/// dead before `k` contributing zero.
pub fn fit_stage_rule<T: Scalar>(
    dataset: &TrajectoryDataset<T>,
    k: usize,
    qpair: &QPair<T>,
    constraint: T,
    max_len: usize,
    eta: T,
) -> Result<StageRule<T>> {
    if qpair.k != k {
        return Err(Error::Argument(format!("Q-functions are for stage {}, not {k}", qpair.k)));
    }
    let stage = StageFeatures::build(dataset, k, &qpair.features);
    let table = QTable::build(qpair, &stage);
    let columns: Vec<Vec<T>> = (0..stage.width()).map(|j| stage.column(j)).collect();
    fit_stage_rule_on(k, &table, stage.names(), &columns, dataset.n_units(), constraint, max_len, eta)
}

/// Everything needed to fit one regime.
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeConfig<T> {
    /// Per-interval budgets τ_1..τ_K.
    pub tau: Vec<T>,
    /// Maximum list length per interval.
    pub max_len: Vec<usize>,
    pub eta: T,
    pub learner: LearnerSpec,
    pub features: FeatureSpec,
}

impl<T: Scalar> RegimeConfig<T> {
    /// Total budget split evenly over `n_intervals`.
    pub fn equal_split(total: T, n_intervals: usize, max_len: usize, eta: T, learner: LearnerSpec, features: FeatureSpec) -> Self {
        RegimeConfig {
            tau: vec![total / T::from_count(n_intervals); n_intervals],
            max_len: vec![max_len; n_intervals],
            eta,
            learner,
            features,
        }
    }

    /// Budget remaining at interval `k`: τ_k + … + τ_K.
    pub fn tail_budget(&self, k: usize) -> T {
        self.tau[k - 1..].iter().fold(T::zero(), |a, &b| a + b)
    }
}

#[derive(Clone, Debug)]
pub struct FittedRegime<T> {
    pub regime: Regime<T>,
    pub q1: QPair<T>,
    /// Stage rules, interval 1 first.
    pub stages: Vec<StageRule<T>>,
}

impl<T: Scalar> FittedRegime<T> {
    /// Plug-in value from the stage-1 Q-functions (equals the achieved
    /// stage-1 Ψ of the fitted list).
    pub fn q_estimate(&self) -> RegimeSummary<T> {
        let s = &self.stages[0];
        RegimeSummary::new("", s.psi_z, s.psi_y, SummarySource::QEstimate)
    }
}

/// Backward recursion: fit stage-K Q-functions and rule, then each earlier
/// stage on pseudo-outcomes formed under the already-fitted later rules.
pub fn fit_regime<T: Scalar>(dataset: &TrajectoryDataset<T>, cfg: &RegimeConfig<T>) -> Result<FittedRegime<T>> {
    let big_k = dataset.n_intervals();
    if cfg.tau.len() != big_k || cfg.max_len.len() != big_k {
        return Err(Error::Config(format!("budget schedule and list lengths need {big_k} entries")));
    }
    if cfg.tau.iter().any(|t| t.is_nan()) {
        return Err(Error::Config("budget is NaN".into()));
    }
    if !(cfg.eta >= T::zero()) {
        return Err(Error::Config("eta must be non-negative".into()));
    }
    cfg.learner.validate()?;

    let stages: Vec<StageFeatures<T>> =
        (1..=big_k).map(|k| StageFeatures::build(dataset, k, &cfg.features)).collect();
    let mut rules: Vec<Option<StageRule<T>>> = vec![None; big_k];
    let mut next: Option<QPair<T>> = None;
    for k in (1..=big_k).rev() {
        let stage = &stages[k - 1];
        if stage.is_empty() {
            return Err(Error::InsufficientData { stage: k, detail: "no units at risk".into() });
        }
        let (pz, py) = match &next {
            None => stage
                .units()
                .iter()
                .map(|&u| {
                    let r = dataset.record(u, k);
                    (r.effectiveness, r.cost)
                })
                .unzip(),
            Some(q_next) => {
                let list = &rules[k].as_ref().expect("later rule fitted").list;
                pseudo_outcomes_on(dataset, stage.units(), &stages[k], list, q_next)?
            }
        };
        let q = fit_stage_q_on(stage, dataset.actions(), &pz, &py, &cfg.learner, &cfg.features)?;
        let table = QTable::build(&q, stage);
        let columns: Vec<Vec<T>> = (0..stage.width()).map(|j| stage.column(j)).collect();
        let rule = fit_stage_rule_on(
            k,
            &table,
            stage.names(),
            &columns,
            dataset.n_units(),
            cfg.tail_budget(k),
            cfg.max_len[k - 1],
            cfg.eta,
        )?;
        rules[k - 1] = Some(rule);
        next = Some(q);
    }
    let stages: Vec<StageRule<T>> = rules.into_iter().map(|r| r.expect("all stages fitted")).collect();
    let regime = Regime::new(
        stages.iter().map(|s| s.list.clone()).collect(),
        cfg.tau.clone(),
        cfg.eta,
        cfg.learner.identifier(),
        stages.iter().map(|s| s.feasible).collect(),
    )?;
    Ok(FittedRegime { regime, q1: next.expect("stage 1 fitted"), stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::binary_actions;

    fn psi_direct(uv: &UvValues<f64>, col: &[f64], dir: Direction, theta: f64) -> (f64, f64) {
        let n = col.len() as f64;
        let mut z = 0.0;
        let mut y = 0.0;
        for (i, &x) in col.iter().enumerate() {
            let inside = match dir {
                Direction::Le => x <= theta,
                Direction::Gt => x > theta,
            };
            z += if inside { uv.uz[i] } else { uv.vz[i] };
            y += if inside { uv.uy[i] } else { uv.vy[i] };
        }
        (z / n, y / n)
    }

    #[test]
    fn three_unit_sweep() {
        // V = 1 everywhere, U - V = (+0.3, -0.1, +0.2); base Ψ = 1.
        let uv = UvValues { uz: vec![1.3, 0.9, 1.2], vz: vec![1.0; 3], uy: vec![0.0; 3], vy: vec![0.0; 3] };
        let col = [1.0, 2.0, 3.0];
        let out = enumerate_thresholds(&uv, &col, &[true; 3], Direction::Le, 3);
        let psi: Vec<f64> = out.iter().map(|t| t.psi_z).collect();
        let want = [1.0, 1.1, 1.0666666666666667, 1.1333333333333333];
        for (g, w) in psi.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{psi:?}");
        }
        assert_eq!(out.iter().map(|t| t.coverage).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        for t in &out[1..] {
            let (z, _) = psi_direct(&uv, &col, Direction::Le, t.threshold.unwrap());
            assert!((t.psi_z - z).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_enter_together() {
        let uv = UvValues { uz: vec![2.0, 3.0, 4.0], vz: vec![1.0; 3], uy: vec![0.0; 3], vy: vec![0.0; 3] };
        let col = [2.0, 2.0, 5.0];
        let le = enumerate_thresholds(&uv, &col, &[true; 3], Direction::Le, 3);
        assert_eq!(le.len(), 3);
        assert_eq!(le[1].threshold, Some(2.0));
        assert_eq!(le[1].coverage, 2);
        let gt = enumerate_thresholds(&uv, &col, &[true; 3], Direction::Gt, 3);
        assert_eq!(gt.len(), 2);
        assert_eq!(gt[1].threshold, Some(2.0));
        assert_eq!(gt[1].coverage, 1);
        let (z, _) = psi_direct(&uv, &col, Direction::Gt, 2.0);
        assert!((gt[1].psi_z - z).abs() < 1e-12);
    }

    #[test]
    fn constant_column_and_flat_uv() {
        let uv = UvValues { uz: vec![1.0, 2.0], vz: vec![1.0, 2.0], uy: vec![3.0, 4.0], vy: vec![3.0, 4.0] };
        let le = enumerate_thresholds(&uv, &[7.0, 7.0], &[true, true], Direction::Le, 2);
        assert_eq!(le.len(), 2);
        assert!(le.iter().all(|t| t.psi_z == 1.5 && t.psi_y == 3.5));
        assert_eq!(enumerate_thresholds(&uv, &[7.0, 7.0], &[true, true], Direction::Gt, 2).len(), 1);
    }

    fn table(qz: &[f64], qy: &[f64]) -> QTable<f64> {
        QTable::from_values(1, binary_actions(), qz.to_vec(), qy.to_vec()).unwrap()
    }

    #[test]
    fn assigned_units_have_equal_u_and_v() {
        let t = table(&[1.0, 2.0, 3.0, 1.0, 0.5, 0.4], &[1.0, 5.0, 1.0, 5.0, 1.0, 5.0]);
        let cols = vec![vec![0.0, 1.0, 2.0]];
        let mut s = ClauseSearchState::new(&t, &cols, f64::INFINITY).unwrap();
        let c = CandidateClause {
            feature: 0,
            direction: Direction::Le,
            threshold: 0.0,
            action_index: 0,
            action: Action(0),
            psi_z: 0.0,
            psi_y: 0.0,
            coverage: 1,
            objective: 0.0,
        };
        s.assign(&c);
        for a in 0..2 {
            let uv = compute_uv(&s, a);
            assert_eq!(uv.uz[0], uv.vz[0]);
            assert_eq!(uv.uz[0], 1.0);
            assert_eq!(uv.uy[0], 1.0);
        }
        // unit 1: tilde = 0 (3.0 > 1.0); candidate action 0 gives U == V
        let uv0 = compute_uv(&s, 0);
        assert_eq!(uv0.uz[1], uv0.vz[1]);
        let uv1 = compute_uv(&s, 1);
        assert_eq!((uv1.uz[1], uv1.vz[1], uv1.uy[1], uv1.vy[1]), (1.0, 3.0, 5.0, 1.0));
        assert_eq!(s.fixed(), s.fixed_recomputed());
    }

    #[test]
    fn two_unit_clause_search() {
        // Unit 0 gains from treatment (0.5 -> 1.5) at cost 2 -> 6; unit 1 gains
        // little (0.9 -> 1.0) at the same cost. Budget 4.5 admits treating one,
        // so the best clause withholds treatment from unit 1 and leaves unit 0
        // to the unconstrained rule.
        let t = table(&[0.5, 1.5, 0.9, 1.0], &[2.0, 6.0, 2.0, 6.0]);
        let cols = vec![vec![-1.0, 1.0]];
        let s = ClauseSearchState::new(&t, &cols, 4.5).unwrap();
        match fit_clause(&s, 0.0) {
            ClauseOutcome::Clause(c) => {
                assert_eq!((c.direction, c.threshold, c.action), (Direction::Gt, -1.0, Action(0)));
                assert!((c.psi_z - 1.2).abs() < 1e-12);
                assert!((c.psi_y - 4.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coverage_tie_prefers_clause_over_empty_region() {
        // A clause giving units their unconstrained action leaves Ψ unchanged
        // and wins the tie on coverage.
        let t = table(&[1.0, 0.0, 1.0, 0.0], &[1.0, 100.0, 1.0, 100.0]);
        let cols = vec![vec![0.0, 1.0]];
        let s = ClauseSearchState::new(&t, &cols, 2.0).unwrap();
        match fit_clause(&s, 0.0) {
            ClauseOutcome::Clause(c) => {
                assert_eq!((c.action, c.coverage, c.direction, c.threshold), (Action(0), 2, Direction::Le, 1.0));
                assert_eq!(c.psi_z, 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn skip_when_empty_region_strictly_best() {
        let t = table(&[1.0, 0.0, 1.0, 0.0], &[1.0, 100.0, 1.0, 100.0]);
        let cols = vec![vec![0.0, 1.0]];
        let s = ClauseSearchState::new(&t, &cols, 2.0).unwrap();
        assert_eq!(fit_clause(&s, -0.5), ClauseOutcome::Skip);
    }

    #[test]
    fn infeasible_when_nothing_meets_budget() {
        let t = table(&[0.0, 1.0, 0.0, 1.0], &[1.0, 1.0, 1.0, 1.0]);
        let cols = vec![vec![0.0, 1.0]];
        let s = ClauseSearchState::new(&t, &cols, 0.5).unwrap();
        assert_eq!(fit_clause(&s, 0.0), ClauseOutcome::Infeasible);
        let r = fit_stage_rule_on(1, &t, &["x".to_string()], &cols, 2, 0.5, 3, 0.0).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.list.len(), 1);
    }

    #[test]
    fn final_clause_rules() {
        let t = table(&[0.5, 1.5, 0.9, 1.0], &[2.0, 6.0, 2.0, 6.0]);
        let cols = vec![vec![-1.0, 1.0]];
        let s = ClauseSearchState::new(&t, &cols, 100.0).unwrap();
        let f = fit_final_clause(&s);
        assert_eq!((f.action, f.feasible), (Action(1), true));
        let s = ClauseSearchState::new(&t, &cols, 3.0).unwrap();
        let f = fit_final_clause(&s);
        assert_eq!((f.action, f.feasible), (Action(0), true));
        let s = ClauseSearchState::new(&t, &cols, 1.0).unwrap();
        let f = fit_final_clause(&s);
        assert_eq!((f.action, f.feasible), (Action(0), false));
    }

    #[test]
    fn population_rescales_psi() {
        // Two live units out of a cohort of four: sums are halved again.
        let t = table(&[0.5, 1.5, 0.9, 1.0], &[2.0, 6.0, 2.0, 6.0]);
        let cols = vec![vec![-1.0, 1.0]];
        let s = ClauseSearchState::new(&t, &cols, 2.25).unwrap().with_population(4).unwrap();
        assert_eq!(s.current_psi(), (1.25 / 2.0, 3.0));
        match fit_clause(&s, 0.0) {
            ClauseOutcome::Clause(c) => assert_eq!((c.psi_z, c.psi_y), (0.6, 2.0)),
            other => panic!("{other:?}"),
        }
        assert!(ClauseSearchState::new(&t, &cols, 1.0).unwrap().with_population(1).is_err());
    }

    #[test]
    fn single_clause_list() {
        let t = table(&[0.5, 1.5, 0.9, 1.0], &[2.0, 6.0, 2.0, 6.0]);
        let cols = vec![vec![-1.0, 1.0]];
        let r = fit_stage_rule_on(1, &t, &["x".to_string()], &cols, 2, 100.0, 1, 0.01).unwrap();
        assert_eq!(r.list.len(), 1);
        assert_eq!(r.list.clauses()[0], Clause::all(Action(1)));
    }
}
