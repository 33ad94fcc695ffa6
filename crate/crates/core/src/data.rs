//! Longitudinal trajectory data, feature specifications and histories.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Treatment identifier drawn from a small finite action set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Action(pub u32);

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The default binary action set {0, 1}.
pub fn binary_actions() -> Vec<Action> {
    vec![Action(0), Action(1)]
}

/// One unit's observations for one interval.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalRecord<T> {
    pub confounders: Vec<T>,
    pub action: Option<Action>,
    pub effectiveness: T,
    pub cost: T,
    /// At risk at the start of the interval.
    pub alive: bool,
}

impl<T: Scalar> IntervalRecord<T> {
    pub fn dead() -> Self {
        IntervalRecord {
            confounders: Vec::new(),
            action: None,
            effectiveness: T::zero(),
            cost: T::zero(),
            alive: false,
        }
    }
}

/// `n_units` × `n_intervals` records stored unit-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDataset<T> {
    n_units: usize,
    n_intervals: usize,
    n_confounders: usize,
    actions: Vec<Action>,
    records: Vec<IntervalRecord<T>>,
}

impl<T: Scalar> TrajectoryDataset<T> {
    pub fn new(
        n_units: usize,
        n_intervals: usize,
        n_confounders: usize,
        actions: Vec<Action>,
        records: Vec<IntervalRecord<T>>,
    ) -> Result<Self> {
        if n_intervals == 0 {
            return Err(Error::data("dataset needs at least one interval"));
        }
        if records.len() != n_units * n_intervals {
            return Err(Error::data(format!(
                "expected {} records ({} units x {} intervals), got {}",
                n_units * n_intervals,
                n_units,
                n_intervals,
                records.len()
            )));
        }
        let mut actions = actions;
        actions.sort();
        actions.dedup();
        if actions.is_empty() {
            return Err(Error::data("empty action set"));
        }
        for (idx, r) in records.iter().enumerate() {
            let (unit, k) = (idx / n_intervals, idx % n_intervals + 1);
            let at = || format!("unit {unit}, interval {k}");
            if r.alive {
                if r.confounders.len() != n_confounders {
                    return Err(Error::data(format!(
                        "{}: expected {} confounders, got {}",
                        at(),
                        n_confounders,
                        r.confounders.len()
                    )));
                }
                if r.confounders.iter().any(|w| !w.is_finite()) {
                    return Err(Error::data(format!("{}: non-finite confounder", at())));
                }
                match r.action {
                    Some(a) if actions.binary_search(&a).is_ok() => {}
                    Some(a) => {
                        return Err(Error::data(format!("{}: action {a} not in action set", at())))
                    }
                    None => return Err(Error::data(format!("{}: live interval without action", at()))),
                }
                if !r.effectiveness.is_finite() || !r.cost.is_finite() {
                    return Err(Error::data(format!("{}: non-finite outcome", at())));
                }
                if r.cost < T::zero() {
                    return Err(Error::data(format!("{}: negative cost", at())));
                }
                if k > 1 && !records[idx - 1].alive {
                    return Err(Error::data(format!("{}: alive after death", at())));
                }
            } else if r.action.is_some()
                || r.effectiveness != T::zero()
                || r.cost != T::zero()
            {
                return Err(Error::data(format!(
                    "{}: dead interval must have no treatment and zero outcomes",
                    at()
                )));
            }
        }
        Ok(TrajectoryDataset { n_units, n_intervals, n_confounders, actions, records })
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn n_confounders(&self) -> usize {
        self.n_confounders
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Record of `unit` at interval `k` (1-based).
    pub fn record(&self, unit: usize, k: usize) -> &IntervalRecord<T> {
        assert!((1..=self.n_intervals).contains(&k), "interval {k} out of range");
        &self.records[unit * self.n_intervals + k - 1]
    }

    /// All interval records of one unit, interval 1 first.
    pub fn unit_records(&self, unit: usize) -> &[IntervalRecord<T>] {
        &self.records[unit * self.n_intervals..(unit + 1) * self.n_intervals]
    }

    pub fn is_alive(&self, unit: usize, k: usize) -> bool {
        self.record(unit, k).alive
    }

    pub fn live_units(&self, k: usize) -> Vec<usize> {
        (0..self.n_units).filter(|&u| self.is_alive(u, k)).collect()
    }

    pub fn confounder_names(&self) -> Vec<String> {
        (1..=self.n_confounders).map(|j| format!("w{j}")).collect()
    }

    /// Long-format CSV: `unit_id,interval,w1..wd,action,effectiveness,cost,alive`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["unit_id".to_string(), "interval".to_string()];
        header.extend(self.confounder_names());
        header.extend(["action", "effectiveness", "cost", "alive"].map(String::from));
        out.write_record(&header)?;
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for unit in 0..self.n_units {
            for k in 1..=self.n_intervals {
                let r = self.record(unit, k);
                row.clear();
                row.push(unit.to_string());
                row.push(k.to_string());
                if r.alive {
                    row.extend(r.confounders.iter().map(|w| w.to_string()));
                } else {
                    row.extend(std::iter::repeat_n(String::new(), self.n_confounders));
                }
                row.push(r.action.map(|a| a.to_string()).unwrap_or_default());
                row.push(r.effectiveness.to_string());
                row.push(r.cost.to_string());
                row.push(if r.alive { "1" } else { "0" }.to_string());
                out.write_record(&row)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        let cols: Vec<&str> = header.iter().collect();
        let n = cols.len();
        if n < 6
            || cols[0] != "unit_id"
            || cols[1] != "interval"
            || cols[n - 4..] != ["action", "effectiveness", "cost", "alive"]
        {
            return Err(Error::data_at(1, "header must be unit_id,interval,w1..wd,action,effectiveness,cost,alive"));
        }
        let d = n - 6;
        for (j, c) in cols[2..2 + d].iter().enumerate() {
            if *c != format!("w{}", j + 1) {
                return Err(Error::data_at(1, format!("expected column w{}, found {c}", j + 1)));
            }
        }

        let mut unit_ids: Vec<String> = Vec::new();
        let mut rows: Vec<(usize, usize, IntervalRecord<T>)> = Vec::new();
        let mut observed: BTreeSet<Action> = BTreeSet::new();
        for result in rdr.records() {
            let rec = result?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let field = |i: usize| rec.get(i).unwrap_or("").trim();
            let uid = field(0).to_string();
            let unit = match unit_ids.iter().rposition(|u| *u == uid) {
                Some(u) => u,
                None => {
                    unit_ids.push(uid);
                    unit_ids.len() - 1
                }
            };
            let k: usize = field(1)
                .parse()
                .map_err(|_| Error::data_at(line, format!("bad interval '{}'", field(1))))?;
            let alive = match field(n - 1) {
                "1" => true,
                "0" => false,
                other => return Err(Error::data_at(line, format!("bad alive flag '{other}'"))),
            };
            let parse = |i: usize, what: &str| -> Result<T> {
                field(i)
                    .parse::<T>()
                    .map_err(|_| Error::data_at(line, format!("bad {what} '{}'", field(i))))
            };
            let record = if alive {
                let confounders = (0..d)
                    .map(|j| parse(2 + j, &format!("w{}", j + 1)))
                    .collect::<Result<Vec<T>>>()?;
                let action = Action(
                    field(n - 4)
                        .parse()
                        .map_err(|_| Error::data_at(line, format!("bad action '{}'", field(n - 4))))?,
                );
                observed.insert(action);
                IntervalRecord {
                    confounders,
                    action: Some(action),
                    effectiveness: parse(n - 3, "effectiveness")?,
                    cost: parse(n - 2, "cost")?,
                    alive,
                }
            } else {
                IntervalRecord {
                    confounders: Vec::new(),
                    action: None,
                    effectiveness: parse(n - 3, "effectiveness")?,
                    cost: parse(n - 2, "cost")?,
                    alive,
                }
            };
            rows.push((unit, k, record));
        }
        let n_units = unit_ids.len();
        let n_intervals = rows.iter().map(|r| r.1).max().unwrap_or(0);
        if n_units == 0 || n_intervals == 0 {
            return Err(Error::data("dataset has no rows"));
        }
        let mut slots: Vec<Option<IntervalRecord<T>>> = vec![None; n_units * n_intervals];
        for (unit, k, rec) in rows {
            if k == 0 {
                return Err(Error::data(format!("unit {}: interval must be >= 1", unit_ids[unit])));
            }
            let slot = &mut slots[unit * n_intervals + k - 1];
            if slot.is_some() {
                return Err(Error::data(format!("unit {}: duplicate interval {k}", unit_ids[unit])));
            }
            *slot = Some(rec);
        }
        let records = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| {
                    Error::data(format!(
                        "unit {}: missing interval {}",
                        unit_ids[i / n_intervals],
                        i % n_intervals + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut actions = binary_actions();
        actions.extend(observed);
        TrajectoryDataset::new(n_units, n_intervals, d, actions, records)
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// One block of history features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureTerm {
    /// W_k, named `w1..wd`.
    Confounders,
    /// A_{k-1}, named `a_prev`.
    PrevAction,
    /// W_{k-1}, named `w1_prev..wd_prev`.
    PrevConfounders,
    /// Z_{k-1}, named `z_prev`.
    PrevEffectiveness,
    /// Y_{k-1}, named `y_prev`.
    PrevCost,
}

impl FeatureTerm {
    fn is_lagged(self) -> bool {
        !matches!(self, FeatureTerm::Confounders)
    }
}

/// Ordered list of history terms. Lagged terms are omitted at interval 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSpec {
    terms: Vec<FeatureTerm>,
}

impl FeatureSpec {
    pub fn new(terms: Vec<FeatureTerm>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if terms[..i].contains(t) {
                return Err(Error::Config(format!("feature term {t:?} listed twice")));
            }
        }
        Ok(FeatureSpec { terms })
    }

    /// W_k only.
    pub fn current() -> Self {
        FeatureSpec { terms: vec![FeatureTerm::Confounders] }
    }

    /// (W_k, A_{k-1}, W_{k-1}); W_1 alone at the first interval.
    pub fn markov() -> Self {
        FeatureSpec {
            terms: vec![
                FeatureTerm::Confounders,
                FeatureTerm::PrevAction,
                FeatureTerm::PrevConfounders,
            ],
        }
    }

    /// Every available term, used to resolve any canonical feature name.
    pub fn all() -> Self {
        FeatureSpec {
            terms: vec![
                FeatureTerm::Confounders,
                FeatureTerm::PrevAction,
                FeatureTerm::PrevConfounders,
                FeatureTerm::PrevEffectiveness,
                FeatureTerm::PrevCost,
            ],
        }
    }

    pub fn terms(&self) -> &[FeatureTerm] {
        &self.terms
    }

    fn active(&self, k: usize) -> impl Iterator<Item = FeatureTerm> + '_ {
        self.terms.iter().copied().filter(move |t| k > 1 || !t.is_lagged())
    }

    pub fn names(&self, k: usize, n_confounders: usize) -> Vec<String> {
        let mut names = Vec::new();
        for term in self.active(k) {
            match term {
                FeatureTerm::Confounders => {
                    names.extend((1..=n_confounders).map(|j| format!("w{j}")))
                }
                FeatureTerm::PrevAction => names.push("a_prev".into()),
                FeatureTerm::PrevConfounders => {
                    names.extend((1..=n_confounders).map(|j| format!("w{j}_prev")))
                }
                FeatureTerm::PrevEffectiveness => names.push("z_prev".into()),
                FeatureTerm::PrevCost => names.push("y_prev".into()),
            }
        }
        names
    }

    /// Appends the interval-`k` features of a unit to `out`. `unit_records[k - 1]`
    /// must be a live record, as must `unit_records[k - 2]` when `k > 1`.
    pub fn fill<T: Scalar>(&self, k: usize, unit_records: &[IntervalRecord<T>], out: &mut Vec<T>) {
        let cur = &unit_records[k - 1];
        debug_assert!(cur.alive);
        for term in self.active(k) {
            match term {
                FeatureTerm::Confounders => out.extend_from_slice(&cur.confounders),
                FeatureTerm::PrevAction => {
                    let a = unit_records[k - 2].action.map_or(0, |a| a.0);
                    out.push(T::from_u32(a).expect("action id representable"));
                }
                FeatureTerm::PrevConfounders => {
                    out.extend_from_slice(&unit_records[k - 2].confounders)
                }
                FeatureTerm::PrevEffectiveness => out.push(unit_records[k - 2].effectiveness),
                FeatureTerm::PrevCost => out.push(unit_records[k - 2].cost),
            }
        }
    }
}

/// Named feature vector of one unit at the start of one interval.
#[derive(Clone, Debug, PartialEq)]
pub struct History<T> {
    pub interval: usize,
    names: Arc<[String]>,
    values: Vec<T>,
}

impl<T: Scalar> History<T> {
    pub fn new(interval: usize, names: Arc<[String]>, values: Vec<T>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::Argument(format!(
                "{} feature names for {} values",
                names.len(),
                values.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Config(format!("duplicate feature name {n}")));
            }
        }
        Ok(History { interval, names, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// History of `unit` at interval `k`, or `None` if the unit is not at risk.
pub fn assemble_history<T: Scalar>(
    dataset: &TrajectoryDataset<T>,
    unit: usize,
    k: usize,
    spec: &FeatureSpec,
) -> Option<History<T>> {
    if !dataset.is_alive(unit, k) {
        return None;
    }
    let names: Arc<[String]> = spec.names(k, dataset.n_confounders()).into();
    let mut values = Vec::with_capacity(names.len());
    spec.fill(k, dataset.unit_records(unit), &mut values);
    Some(History { interval: k, names, values })
}

/// Feature matrix of the units at risk at one interval.
#[derive(Clone, Debug)]
pub struct StageFeatures<T> {
    pub k: usize,
    names: Arc<[String]>,
    units: Vec<usize>,
    values: Vec<T>,
    observed: Vec<Action>,
}

impl<T: Scalar> StageFeatures<T> {
    pub fn build(dataset: &TrajectoryDataset<T>, k: usize, spec: &FeatureSpec) -> Self {
        let names: Arc<[String]> = spec.names(k, dataset.n_confounders()).into();
        let units = dataset.live_units(k);
        let mut values = Vec::with_capacity(units.len() * names.len());
        let mut observed = Vec::with_capacity(units.len());
        for &u in &units {
            spec.fill(k, dataset.unit_records(u), &mut values);
            observed.push(dataset.record(u, k).action.expect("live record has action"));
        }
        StageFeatures { k, names, units, values, observed }
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Dataset unit index of row `i`.
    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn row(&self, i: usize) -> &[T] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.len()).map(|i| self.row(i)[j]).collect()
    }

    pub fn observed_actions(&self) -> &[Action] {
        &self.observed
    }

    pub fn history(&self, i: usize) -> History<T> {
        History { interval: self.k, names: self.names.clone(), values: self.row(i).to_vec() }
    }
}
