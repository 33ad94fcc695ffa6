//! Decision lists, regimes and regime summaries.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::{Action, History};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Region of history space tested by one clause. `Le` is inclusive, `Gt` strict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum Region<T> {
    #[serde(rename = "LE")]
    Le { feature: String, theta: T },
    #[serde(rename = "GT")]
    Gt { feature: String, theta: T },
    #[serde(rename = "ALL")]
    All,
}

impl<T: Scalar> Region<T> {
    pub fn feature(&self) -> Option<&str> {
        match self {
            Region::Le { feature, .. } | Region::Gt { feature, .. } => Some(feature),
            Region::All => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Clause<T> {
    pub region: Region<T>,
    pub action: Action,
}

impl<T: Scalar> Clause<T> {
    pub fn all(action: Action) -> Self {
        Clause { region: Region::All, action }
    }

    pub fn le(feature: &str, theta: T, action: Action) -> Self {
        Clause { region: Region::Le { feature: feature.into(), theta }, action }
    }

    pub fn gt(feature: &str, theta: T, action: Action) -> Self {
        Clause { region: Region::Gt { feature: feature.into(), theta }, action }
    }
}

/// If-else list of clauses for one interval; the last clause, and only the
/// last, covers everything.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct DecisionList<T> {
    k: usize,
    clauses: Vec<Clause<T>>,
}

impl<T: Scalar> DecisionList<T> {
    pub fn new(k: usize, clauses: Vec<Clause<T>>) -> Result<Self> {
        let Some(last) = clauses.last() else {
            return Err(Error::Argument("decision list needs at least one clause".into()));
        };
        if last.region != Region::All {
            return Err(Error::Argument("final clause must cover all histories".into()));
        }
        for c in &clauses[..clauses.len() - 1] {
            match &c.region {
                Region::All => {
                    return Err(Error::Argument("only the final clause may cover all histories".into()))
                }
                Region::Le { theta, .. } | Region::Gt { theta, .. } if !theta.is_finite() => {
                    return Err(Error::Argument("clause threshold must be finite".into()))
                }
                _ => {}
            }
        }
        Ok(DecisionList { k, clauses })
    }

    /// A single catch-all clause.
    pub fn constant(k: usize, action: Action) -> Self {
        DecisionList { k, clauses: vec![Clause::all(action)] }
    }

    pub fn interval(&self) -> usize {
        self.k
    }

    pub fn clauses(&self) -> &[Clause<T>] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Resolves feature names against a fixed column layout.
    pub fn compile(&self, names: &[String]) -> Result<CompiledList<T>> {
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                let test = match &c.region {
                    Region::All => Test::All,
                    Region::Le { feature, theta } => Test::Le(column_of(names, feature)?, *theta),
                    Region::Gt { feature, theta } => Test::Gt(column_of(names, feature)?, *theta),
                };
                Ok((test, c.action))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledList { clauses })
    }
}

impl<'de, T: Scalar> Deserialize<'de> for DecisionList<T> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound(deserialize = "T: Deserialize<'de>"))]
        struct Raw<T> {
            k: usize,
            clauses: Vec<Clause<T>>,
        }
        let raw = Raw::<T>::deserialize(de)?;
        DecisionList::new(raw.k, raw.clauses).map_err(serde::de::Error::custom)
    }
}

fn column_of(names: &[String], feature: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == feature)
        .ok_or_else(|| Error::Config(format!("unknown feature '{feature}'")))
}

#[derive(Clone, Copy, Debug)]
enum Test<T> {
    All,
    Le(usize, T),
    Gt(usize, T),
}

/// A decision list bound to column indices.
#[derive(Clone, Debug)]
pub struct CompiledList<T> {
    clauses: Vec<(Test<T>, Action)>,
}

impl<T: Scalar> CompiledList<T> {
    pub fn apply(&self, values: &[T]) -> Action {
        for (test, action) in &self.clauses {
            let hit = match *test {
                Test::All => true,
                Test::Le(j, theta) => values[j] <= theta,
                Test::Gt(j, theta) => values[j] > theta,
            };
            if hit {
                return *action;
            }
        }
        unreachable!("decision list ends with a catch-all clause")
    }
}

/// Action of the first clause whose region contains `h`.
pub fn apply_decision_list<T: Scalar>(list: &DecisionList<T>, h: &History<T>) -> Result<Action> {
    if h.interval != list.k {
        return Err(Error::Argument(format!(
            "history is for interval {}, list is for interval {}",
            h.interval, list.k
        )));
    }
    Ok(list.compile(h.names())?.apply(h.values()))
}

fn ser_taus<T: Scalar, S: Serializer>(taus: &[T], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Option<T>> = taus.iter().map(|t| t.is_finite().then_some(*t)).collect();
    v.serialize(s)
}

fn de_taus<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<T>, D::Error> {
    let v: Vec<Option<T>> = Vec::deserialize(d)?;
    Ok(v.into_iter().map(|t| t.unwrap_or_else(T::infinity)).collect())
}

/// One decision list per interval plus fitting provenance.
///
/// An unbounded per-interval budget serializes as `null` in `tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Regime<T> {
    intervals: Vec<DecisionList<T>>,
    #[serde(serialize_with = "ser_taus", deserialize_with = "de_taus")]
    tau: Vec<T>,
    eta: T,
    learner: String,
    feasible: Vec<bool>,
}

impl<T: Scalar> Regime<T> {
    pub fn new(
        intervals: Vec<DecisionList<T>>,
        tau: Vec<T>,
        eta: T,
        learner: impl Into<String>,
        feasible: Vec<bool>,
    ) -> Result<Self> {
        let k = intervals.len();
        if k == 0 {
            return Err(Error::Argument("regime needs at least one interval".into()));
        }
        if intervals.iter().enumerate().any(|(i, l)| l.k != i + 1) {
            return Err(Error::Argument("regime lists must cover intervals 1..K in order".into()));
        }
        if tau.len() != k || feasible.len() != k {
            return Err(Error::Argument(format!(
                "regime with {k} intervals needs {k} budgets and {k} feasibility flags"
            )));
        }
        if !(eta >= T::zero()) {
            return Err(Error::Argument("eta must be non-negative".into()));
        }
        Ok(Regime { intervals, tau, eta, learner: learner.into(), feasible })
    }

    /// A regime that gives the same action everywhere.
    pub fn static_action(n_intervals: usize, action: Action) -> Self {
        Regime {
            intervals: (1..=n_intervals).map(|k| DecisionList::constant(k, action)).collect(),
            tau: vec![T::infinity(); n_intervals],
            eta: T::zero(),
            learner: "static".into(),
            feasible: vec![true; n_intervals],
        }
    }

    pub fn n_intervals(&self) -> usize {
        self.intervals.len()
    }

    pub fn lists(&self) -> &[DecisionList<T>] {
        &self.intervals
    }

    /// List for interval `k` (1-based).
    pub fn list(&self, k: usize) -> &DecisionList<T> {
        &self.intervals[k - 1]
    }

    pub fn tau_schedule(&self) -> &[T] {
        &self.tau
    }

    pub fn total_tau(&self) -> T {
        self.tau.iter().fold(T::zero(), |a, &b| a + b)
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn learner(&self) -> &str {
        &self.learner
    }

    pub fn feasible(&self) -> &[bool] {
        &self.feasible
    }

    pub fn all_feasible(&self) -> bool {
        self.feasible.iter().all(|&f| f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Regime<T> = serde_json::from_str(text)?;
        Regime::new(r.intervals, r.tau, r.eta, r.learner, r.feasible)
    }

    pub fn write_json_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Number of intervals whose decision lists differ structurally.
pub fn regime_distance<T: Scalar>(d1: &Regime<T>, d2: &Regime<T>) -> Result<usize> {
    if d1.n_intervals() != d2.n_intervals() {
        return Err(Error::Argument(format!(
            "regimes have {} and {} intervals",
            d1.n_intervals(),
            d2.n_intervals()
        )));
    }
    Ok(d1.intervals.iter().zip(&d2.intervals).filter(|(a, b)| a != b).count())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SummarySource {
    QEstimate,
    MonteCarlo,
}

/// Estimated mean effectiveness and cost of a regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct RegimeSummary<T> {
    pub label: String,
    pub mean_effectiveness: T,
    pub mean_cost: T,
    pub source: SummarySource,
}

impl<T: Scalar> RegimeSummary<T> {
    pub fn new(label: impl Into<String>, mean_effectiveness: T, mean_cost: T, source: SummarySource) -> Self {
        RegimeSummary { label: label.into(), mean_effectiveness, mean_cost, source }
    }
}
