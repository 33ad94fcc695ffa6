//! Backward-recursive Q-function estimation for effectiveness and cost.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Action, FeatureSpec, StageFeatures, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::regime::{DecisionList, Regime, RegimeSummary, SummarySource};
use crate::regress::{LearnerSpec, QModel};
use crate::scalar::Scalar;
use crate::seeds::derive_seed;

/// Fitted effectiveness and cost surfaces for one interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct QPair<T> {
    pub k: usize,
    pub qz: QModel<T>,
    pub qy: QModel<T>,
    pub features: FeatureSpec,
}

/// Regresses stage-`k` pseudo-outcomes (indexed by the units alive at `k`,
/// in unit order) on history and action.
pub fn fit_stage_q<T: Scalar>(
    dataset: &TrajectoryDataset<T>,
    k: usize,
    pseudo_z: &[T],
    pseudo_y: &[T],
    spec: &LearnerSpec,
    features: &FeatureSpec,
) -> Result<QPair<T>> {
    let stage = StageFeatures::build(dataset, k, features);
    fit_stage_q_on(&stage, dataset.actions(), pseudo_z, pseudo_y, spec, features)
}

pub fn fit_stage_q_on<T: Scalar>(
    stage: &StageFeatures<T>,
    actions: &[Action],
    pseudo_z: &[T],
    pseudo_y: &[T],
    spec: &LearnerSpec,
    features: &FeatureSpec,
) -> Result<QPair<T>> {
    let k = stage.k;
    if pseudo_z.len() != stage.len() || pseudo_y.len() != stage.len() {
        return Err(Error::Argument(format!(
            "stage {k}: {} live units but {} / {} pseudo-outcomes",
            stage.len(),
            pseudo_z.len(),
            pseudo_y.len()
        )));
    }
    for &a in actions {
        if stage.observed_actions().iter().filter(|&&b| b == a).count() < 2 {
            return Err(Error::InsufficientActionData { stage: k, action: a });
        }
    }
    let values: Vec<T> = (0..stage.len()).flat_map(|i| stage.row(i).iter().copied()).collect();
    let fit_one = |response: &[T], outcome: u64| {
        QModel::fit(
            spec,
            stage.names(),
            actions,
            &values,
            stage.observed_actions(),
            response,
            derive_seed(spec.seed, 2 * k as u64 + outcome),
        )
        .map_err(|e| match e {
            Error::Insufficient(detail) => Error::InsufficientData { stage: k, detail },
            other => other,
        })
    };
    Ok(QPair { k, qz: fit_one(pseudo_z, 0)?, qy: fit_one(pseudo_y, 1)?, features: features.clone() })
}

/// Cached stage-`k` predictions for every live unit and action.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable<T> {
    pub k: usize,
    actions: Vec<Action>,
    qz: Vec<T>,
    qy: Vec<T>,
    tilde: Vec<usize>,
}

impl<T: Scalar> QTable<T> {
    pub fn build(q: &QPair<T>, stage: &StageFeatures<T>) -> Self {
        let actions = q.qz.actions().to_vec();
        let rows: Vec<(Vec<T>, Vec<T>)> = (0..stage.len())
            .into_par_iter()
            .map(|i| {
                let x = stage.row(i);
                (
                    actions.iter().map(|&a| q.qz.predict(x, a)).collect(),
                    actions.iter().map(|&a| q.qy.predict(x, a)).collect(),
                )
            })
            .collect();
        let (qz, qy): (Vec<Vec<T>>, Vec<Vec<T>>) = rows.into_iter().unzip();
        Self::from_values(stage.k, actions, qz.concat(), qy.concat()).expect("consistent table")
    }

    /// Table from row-major `n × |actions|` prediction arrays.
    pub fn from_values(k: usize, actions: Vec<Action>, qz: Vec<T>, qy: Vec<T>) -> Result<Self> {
        let m = actions.len();
        if m == 0 || !qz.len().is_multiple_of(m) || qz.len() != qy.len() {
            return Err(Error::Argument("Q-table dimensions disagree".into()));
        }
        let tilde = qz
            .chunks(m)
            .map(|row| {
                let mut best = 0;
                for (ai, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = ai;
                    }
                }
                best
            })
            .collect();
        Ok(QTable { k, actions, qz, qy, tilde })
    }

    pub fn n_units(&self) -> usize {
        self.tilde.len()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    #[inline]
    pub fn qz(&self, unit: usize, action_index: usize) -> T {
        self.qz[unit * self.actions.len() + action_index]
    }

    #[inline]
    pub fn qy(&self, unit: usize, action_index: usize) -> T {
        self.qy[unit * self.actions.len() + action_index]
    }

    /// Index (into `actions()`) of the unconstrained rule for `unit`.
    #[inline]
    pub fn tilde_index(&self, unit: usize) -> usize {
        self.tilde[unit]
    }
}

/// Effectiveness-maximizing action; ties go to the smallest action id.
pub fn unconstrained_rule<T: Scalar>(table: &QTable<T>, unit: usize) -> Action {
    table.actions[table.tilde[unit]]
}

/// Stage-`k` pseudo-outcomes: observed outcome plus the stage-`k+1` prediction
/// at the action chosen by `next_list`. Units that die during interval `k`
/// contribute nothing downstream.
pub fn pseudo_outcomes<T: Scalar>(
    dataset: &TrajectoryDataset<T>,
    k: usize,
    next_list: &DecisionList<T>,
    next_q: &QPair<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    if next_list.interval() != k + 1 || next_q.k != k + 1 {
        return Err(Error::Argument(format!(
            "stage {k} pseudo-outcomes need stage {} rule and Q-functions, got {} and {}",
            k + 1,
            next_list.interval(),
            next_q.k
        )));
    }
    if k + 1 > dataset.n_intervals() {
        return Err(Error::Argument(format!("no interval after {k}")));
    }
    let next_stage = StageFeatures::build(dataset, k + 1, &next_q.features);
    pseudo_outcomes_on(dataset, &dataset.live_units(k), &next_stage, next_list, next_q)
}

pub(crate) fn pseudo_outcomes_on<T: Scalar>(
    dataset: &TrajectoryDataset<T>,
    live_units: &[usize],
    next_stage: &StageFeatures<T>,
    next_list: &DecisionList<T>,
    next_q: &QPair<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let k = next_stage.k - 1;
    let rule = next_list.compile(next_stage.names())?;
    let mut row_of = vec![usize::MAX; dataset.n_units()];
    for (i, &u) in next_stage.units().iter().enumerate() {
        row_of[u] = i;
    }
    let mut pz = Vec::with_capacity(live_units.len());
    let mut py = Vec::with_capacity(live_units.len());
    for &u in live_units {
        let rec = dataset.record(u, k);
        let (dz, dy) = match row_of[u] {
            usize::MAX => (T::zero(), T::zero()),
            i => {
                let x = next_stage.row(i);
                let a = rule.apply(x);
                (next_q.qz.predict(x, a), next_q.qy.predict(x, a))
            }
        };
        pz.push(rec.effectiveness + dz);
        py.push(rec.cost + dy);
    }
    Ok((pz, py))
}

/// Plug-in estimate of mean total effectiveness and cost under `regime`,
/// averaging the stage-1 Q-functions at the regime's first decision over the
/// whole cohort.
pub fn estimate_regime_value<T: Scalar>(
    regime: &Regime<T>,
    q1: &QPair<T>,
    dataset: &TrajectoryDataset<T>,
) -> Result<RegimeSummary<T>> {
    if q1.k != 1 {
        return Err(Error::Argument(format!("expected stage-1 Q-functions, got stage {}", q1.k)));
    }
    let stage = StageFeatures::build(dataset, 1, &q1.features);
    if stage.is_empty() {
        return Err(Error::data("no units at risk at interval 1"));
    }
    let rule = regime.list(1).compile(stage.names())?;
    let (mut z, mut y) = (T::zero(), T::zero());
    for i in 0..stage.len() {
        let x = stage.row(i);
        let a = rule.apply(x);
        z = z + q1.qz.predict(x, a);
        y = y + q1.qy.predict(x, a);
    }
    let n = T::from_count(dataset.n_units());
    Ok(RegimeSummary::new("", z / n, y / n, SummarySource::QEstimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{binary_actions, IntervalRecord};
    use crate::regime::Clause;

    #[test]
    fn argmax_with_tie_break() {
        let t = QTable::from_values(1, binary_actions(), vec![0.2, 0.9, 0.7, 0.7], vec![0.0; 4]).unwrap();
        assert_eq!(unconstrained_rule(&t, 0), Action(1));
        assert_eq!(unconstrained_rule(&t, 1), Action(0));
        let t3 = QTable::from_values(1, vec![Action(0), Action(1), Action(2)], vec![0.1, 0.5, 0.4], vec![0.0; 3]).unwrap();
        assert_eq!(unconstrained_rule(&t3, 0), Action(1));
    }

    fn rec(w: f64, a: u32, z: f64, y: f64) -> IntervalRecord<f64> {
        IntervalRecord { confounders: vec![w], action: Some(Action(a)), effectiveness: z, cost: y, alive: true }
    }

    #[test]
    fn pseudo_outcomes_hand_instance() {
        // Three units; unit 2 dies during interval 1. Stage-2 effectiveness
        // model is z = 10 + x (action 0) and z = 20 + x (action 1); the next
        // rule treats when w1 > 0.
        let mut recs = Vec::new();
        for (w1, a1, z1, y1, w2) in [(0.0, 0, 1.0, 2.0, Some(0.5)), (1.0, 1, 1.0, 3.0, Some(-0.5)), (0.5, 1, 0.0, 4.0, None)] {
            recs.push(rec(w1, a1, z1, y1));
            recs.push(match w2 {
                Some(w) => rec(w, 0, 0.0, 1.0),
                None => IntervalRecord::dead(),
            });
        }
        let ds = TrajectoryDataset::new(3, 2, 1, binary_actions(), recs).unwrap();
        let names = vec!["w1".to_string()];
        // Fit exact models on synthetic stage-2 data.
        let feats = vec![0.0, 1.0, 2.0, 3.0];
        let acts = vec![Action(0), Action(1), Action(0), Action(1)];
        let z: Vec<f64> = feats.iter().zip(&acts).map(|(x, a)| if a.0 == 0 { 10.0 + x } else { 20.0 + x }).collect();
        let qz = QModel::fit(&LearnerSpec::ols(), &names, &binary_actions(), &feats, &acts, &z, 0).unwrap();
        let qy = QModel::fit(&LearnerSpec::ols(), &names, &binary_actions(), &feats, &acts, &[5.0; 4], 0).unwrap();
        let q2 = QPair { k: 2, qz, qy, features: FeatureSpec::current() };
        let list = DecisionList::new(2, vec![Clause::gt("w1", 0.0, Action(1)), Clause::all(Action(0))]).unwrap();
        let (pz, py) = pseudo_outcomes(&ds, 1, &list, &q2).unwrap();
        // unit 0: 1 + (20 + 0.5); unit 1: 1 + (10 - 0.5); unit 2: dead -> 0
        let want = [21.5, 10.5, 0.0];
        for (g, w) in pz.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{pz:?}");
        }
        let want_y = [7.0, 8.0, 4.0];
        for (g, w) in py.iter().zip(want_y) {
            assert!((g - w).abs() < 1e-9, "{py:?}");
        }
        assert!(pseudo_outcomes(&ds, 1, &DecisionList::constant(1, Action(0)), &q2).is_err());
    }
}
