//! JSON run configuration. Every key is optional; command-line flags take
//! precedence over the file.

use std::path::{Path, PathBuf};

use listdtr::sim::DgpParams;
use listdtr::{CorrelationLevel, FeatureSpec, FeatureTerm, LearnerKind, LearnerSpec};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub strict: Option<bool>,
    /// Simulated cohort size, or sample sizes for `reproduce` / `seed-sensitivity`.
    pub n: Option<Sizes>,
    pub corr: Option<CorrelationLevel>,
    pub params: Option<DgpParams>,
    pub data: Option<PathBuf>,
    pub tau: Option<Vec<TauValue>>,
    /// Relative per-interval budget weights; an even split when absent.
    pub schedule: Option<Vec<f64>>,
    pub max_len: Option<usize>,
    pub eta: Option<f64>,
    pub learner: LearnerConfig,
    pub features: Option<FeaturesValue>,
    pub wtp: Option<f64>,
    pub mc: Option<usize>,
    pub reps: Option<usize>,
}

/// Learner settings layered over the defaults of the chosen kind.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub kind: Option<LearnerKind>,
    pub include_interactions: Option<bool>,
    pub stratified: Option<bool>,
    pub rounds: Option<usize>,
    pub learning_rate: Option<f64>,
    pub min_leaf: Option<usize>,
    pub subsample: Option<f64>,
    pub seed: Option<u64>,
}

impl LearnerConfig {
    /// Fields set in `over` replace those set here.
    pub fn merged(&self, over: &LearnerConfig) -> LearnerConfig {
        LearnerConfig {
            kind: over.kind.or(self.kind),
            include_interactions: over.include_interactions.or(self.include_interactions),
            stratified: over.stratified.or(self.stratified),
            rounds: over.rounds.or(self.rounds),
            learning_rate: over.learning_rate.or(self.learning_rate),
            min_leaf: over.min_leaf.or(self.min_leaf),
            subsample: over.subsample.or(self.subsample),
            seed: over.seed.or(self.seed),
        }
    }

    pub fn build(&self, default_kind: LearnerKind) -> Result<LearnerSpec, CliError> {
        let base = match self.kind.unwrap_or(default_kind) {
            LearnerKind::Ols => LearnerSpec::ols(),
            LearnerKind::BoostedStumps => LearnerSpec::boosted_stumps(),
        };
        let spec = LearnerSpec {
            kind: base.kind,
            include_interactions: self.include_interactions.unwrap_or(base.include_interactions),
            stratified: self.stratified.unwrap_or(base.stratified),
            rounds: self.rounds.unwrap_or(base.rounds),
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
            min_leaf: self.min_leaf.unwrap_or(base.min_leaf),
            subsample: self.subsample.unwrap_or(base.subsample),
            seed: self.seed.unwrap_or(base.seed),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(usize),
    Many(Vec<usize>),
}

impl Sizes {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Sizes::One(n) => vec![*n],
            Sizes::Many(v) => v.clone(),
        }
    }
}

/// A budget: a number, or `"inf"` for no constraint.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum TauValue {
    Number(f64),
    Text(String),
}

impl TauValue {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            TauValue::Number(x) => Ok(*x),
            TauValue::Text(s) => parse_tau(s),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FeaturesValue {
    Preset(String),
    Terms(Vec<FeatureTerm>),
}

impl FeaturesValue {
    pub fn resolve(&self) -> Result<FeatureSpec, CliError> {
        match self {
            FeaturesValue::Preset(name) => feature_preset(name),
            FeaturesValue::Terms(terms) => Ok(FeatureSpec::new(terms.clone())?),
        }
    }
}

pub fn feature_preset(name: &str) -> Result<FeatureSpec, CliError> {
    match name {
        "markov" => Ok(FeatureSpec::markov()),
        "current" => Ok(FeatureSpec::current()),
        "all" => Ok(FeatureSpec::all()),
        other => Err(CliError::Config(format!("unknown feature preset {other:?} (markov, current, all)"))),
    }
}

pub fn parse_tau(s: &str) -> Result<f64, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        t => match t.parse::<f64>() {
            Ok(x) if !x.is_nan() => Ok(x),
            _ => Err(CliError::Config(format!("invalid budget {s:?}"))),
        },
    }
}

pub fn parse_tau_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_tau).collect()
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Config(format!("invalid {what} {x:?}"))))
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    pub fn taus(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.tau.as_ref().map(|v| v.iter().map(TauValue::value).collect()).transpose()
    }
}

/// Splits a total budget over intervals in proportion to `weights`.
pub fn schedule(total: f64, n_intervals: usize, weights: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
    match weights {
        None => Ok(vec![total / n_intervals as f64; n_intervals]),
        Some(w) => {
            if w.len() != n_intervals {
                return Err(CliError::Config(format!(
                    "schedule has {} weights for {n_intervals} intervals",
                    w.len()
                )));
            }
            let sum: f64 = w.iter().sum();
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || !(sum > 0.0) {
                return Err(CliError::Config("schedule weights must be non-negative with a positive sum".into()));
            }
            Ok(w.iter().map(|x| if total.is_infinite() { total } else { total * x / sum }).collect())
        }
    }
}

/// Strictly increasing budget grid.
pub fn check_grid(taus: &[f64]) -> Result<(), CliError> {
    if taus.is_empty() {
        return Err(CliError::Config("empty budget grid".into()));
    }
    if taus.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::Config("budget grid must be strictly increasing".into()));
    }
    Ok(())
}
