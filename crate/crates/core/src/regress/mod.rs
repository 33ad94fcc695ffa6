//! Regression backends for stage-wise Q-functions.
//!
//! Two learners are provided: ordinary least squares and boosted regression
//! stumps. A [`QModel`] wraps either one and predicts the conditional mean of
//! an outcome for a (history, action) pair, either through a shared design
//! with action indicators and action × feature interactions, or by fitting
//! one model per action.

mod ols;
mod stumps;

pub use ols::OlsModel;
pub use stumps::{Stump, StumpEnsemble};

use serde::{Deserialize, Serialize};

use crate::data::{Action, History};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeds::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Ols,
    BoostedStumps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    /// Add action × feature columns to a shared design.
    pub include_interactions: bool,
    /// Fit one model per action instead of a shared design.
    pub stratified: bool,
    pub rounds: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    /// Fraction of rows drawn (without replacement) per boosting round; 1 disables.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for LearnerSpec {
    fn default() -> Self {
        LearnerSpec::ols()
    }
}

impl LearnerSpec {
    pub fn ols() -> Self {
        LearnerSpec {
            kind: LearnerKind::Ols,
            include_interactions: true,
            stratified: false,
            rounds: 200,
            learning_rate: 0.1,
            min_leaf: 10,
            subsample: 1.0,
            seed: 0,
        }
    }

    pub fn boosted_stumps() -> Self {
        LearnerSpec { kind: LearnerKind::BoostedStumps, stratified: true, ..LearnerSpec::ols() }
    }

    pub fn identifier(&self) -> &'static str {
        match self.kind {
            LearnerKind::Ols => "ols",
            LearnerKind::BoostedStumps => "stumps",
        }
    }

    /// True when fitting consumes the seed.
    pub fn is_stochastic(&self) -> bool {
        self.kind == LearnerKind::BoostedStumps && self.subsample < 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == LearnerKind::BoostedStumps {
            if self.rounds < 1 {
                return Err(Error::Config("boosting rounds must be >= 1".into()));
            }
            if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
                return Err(Error::Config("learning rate must lie in (0, 1]".into()));
            }
            if self.min_leaf < 1 {
                return Err(Error::Config("min_leaf must be >= 1".into()));
            }
            if !(self.subsample > 0.0 && self.subsample <= 1.0) {
                return Err(Error::Config("subsample must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Row-major design (intercept implicit) with its response.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix<T> {
    names: Vec<String>,
    values: Vec<T>,
    response: Vec<T>,
}

impl<T: Scalar> DesignMatrix<T> {
    pub fn new(names: Vec<String>, values: Vec<T>, response: Vec<T>) -> Result<Self> {
        let p = names.len();
        let n = response.len();
        if values.len() != n * p {
            return Err(Error::Argument(format!("design has {} values for {n} x {p}", values.len())));
        }
        if values.iter().chain(&response).any(|v| !v.is_finite()) {
            return Err(Error::data("design contains non-finite entries"));
        }
        Ok(DesignMatrix { names, values, response })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.names.len() + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        let p = self.names.len();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn response(&self) -> &[T] {
        &self.response
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum FittedModel<T> {
    Ols(OlsModel<T>),
    Stumps(StumpEnsemble<T>),
}

impl<T: Scalar> FittedModel<T> {
    pub fn intercept_only(value: T, n_cols: usize) -> Self {
        FittedModel::Ols(OlsModel { intercept: value, coefficients: vec![T::zero(); n_cols], kept: vec![false; n_cols] })
    }

    pub fn predict(&self, row: &[T]) -> T {
        match self {
            FittedModel::Ols(m) => m.predict(row),
            FittedModel::Stumps(m) => m.predict(row),
        }
    }
}

/// Fits one regression. Deterministic for identical inputs; the seed only
/// matters for subsampled boosting.
pub fn fit<T: Scalar>(spec: &LearnerSpec, x: &DesignMatrix<T>, seed: u64) -> Result<FittedModel<T>> {
    spec.validate()?;
    match spec.kind {
        LearnerKind::Ols => ols::fit_ols(x).map(FittedModel::Ols),
        LearnerKind::BoostedStumps => stumps::fit_stumps(spec, x, seed).map(FittedModel::Stumps),
    }
}

/// Column layout of a shared (history, action) design: features, one
/// indicator per non-reference action, then indicator × feature columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignLayout {
    pub feature_names: Vec<String>,
    pub actions: Vec<Action>,
    pub include_interactions: bool,
}

impl DesignLayout {
    pub fn column_names(&self) -> Vec<String> {
        let mut cols = self.feature_names.clone();
        cols.extend(self.actions[1..].iter().map(|a| format!("act{a}")));
        if self.include_interactions {
            for a in &self.actions[1..] {
                cols.extend(self.feature_names.iter().map(|f| format!("act{a}:{f}")));
            }
        }
        cols
    }

    pub fn fill_row<T: Scalar>(&self, x: &[T], a: Action, out: &mut Vec<T>) {
        out.extend_from_slice(x);
        for b in &self.actions[1..] {
            out.push(if *b == a { T::one() } else { T::zero() });
        }
        if self.include_interactions {
            for b in &self.actions[1..] {
                if *b == a {
                    out.extend_from_slice(x);
                } else {
                    out.extend(std::iter::repeat_n(T::zero(), x.len()));
                }
            }
        }
    }
}

/// Regression surface over (history features, action).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum QModel<T> {
    Shared { layout: DesignLayout, model: FittedModel<T> },
    Stratified { feature_names: Vec<String>, actions: Vec<Action>, models: Vec<FittedModel<T>> },
}

impl<T: Scalar> QModel<T> {
    /// Regresses `response` on the rows of `features` (row-major, one row per
    /// observation) and the observed actions.
    pub fn fit(
        spec: &LearnerSpec,
        feature_names: &[String],
        actions: &[Action],
        features: &[T],
        observed: &[Action],
        response: &[T],
        seed: u64,
    ) -> Result<Self> {
        let w = feature_names.len();
        let n = observed.len();
        if features.len() != n * w || response.len() != n {
            return Err(Error::Argument("feature rows, actions and response disagree in length".into()));
        }
        if spec.stratified {
            let mut models = Vec::with_capacity(actions.len());
            for (ai, &a) in actions.iter().enumerate() {
                let mut vals = Vec::new();
                let mut resp = Vec::new();
                for i in (0..n).filter(|&i| observed[i] == a) {
                    vals.extend_from_slice(&features[i * w..(i + 1) * w]);
                    resp.push(response[i]);
                }
                let design = DesignMatrix::new(feature_names.to_vec(), vals, resp)?;
                models.push(fit(spec, &design, derive_seed(seed, ai as u64))?);
            }
            Ok(QModel::Stratified { feature_names: feature_names.to_vec(), actions: actions.to_vec(), models })
        } else {
            let layout = DesignLayout {
                feature_names: feature_names.to_vec(),
                actions: actions.to_vec(),
                include_interactions: spec.include_interactions,
            };
            let mut vals = Vec::with_capacity(n * layout.column_names().len());
            for i in 0..n {
                layout.fill_row(&features[i * w..(i + 1) * w], observed[i], &mut vals);
            }
            let design = DesignMatrix::new(layout.column_names(), vals, response.to_vec())?;
            let model = fit(spec, &design, seed)?;
            Ok(QModel::Shared { layout, model })
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            QModel::Shared { layout, .. } => &layout.feature_names,
            QModel::Stratified { feature_names, .. } => feature_names,
        }
    }

    pub fn actions(&self) -> &[Action] {
        match self {
            QModel::Shared { layout, .. } => &layout.actions,
            QModel::Stratified { actions, .. } => actions,
        }
    }

    /// Prediction for feature row `x` (in training column order) under action `a`.
    ///
    /// Panics if `a` is outside the fitted action set.
    pub fn predict(&self, x: &[T], a: Action) -> T {
        match self {
            QModel::Shared { layout, model } => {
                assert!(layout.actions.contains(&a), "action {a} not in fitted action set");
                let mut row = Vec::with_capacity(x.len() * layout.actions.len() + layout.actions.len());
                layout.fill_row(x, a, &mut row);
                model.predict(&row)
            }
            QModel::Stratified { actions, models, .. } => {
                let ai = actions.iter().position(|b| *b == a).expect("action in fitted action set");
                models[ai].predict(x)
            }
        }
    }

    /// Prediction from a named history; feature names must cover the training columns.
    pub fn predict_history(&self, h: &History<T>, a: Action) -> Result<T> {
        if !self.actions().contains(&a) {
            return Err(Error::Argument(format!("action {a} not in fitted action set")));
        }
        let x = self
            .feature_names()
            .iter()
            .map(|name| h.get(name).ok_or_else(|| Error::Config(format!("history lacks feature '{name}'"))))
            .collect::<Result<Vec<T>>>()?;
        Ok(self.predict(&x, a))
    }
}
