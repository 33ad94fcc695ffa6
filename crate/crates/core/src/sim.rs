//! Synthetic three-interval cohort with two confounders per interval, binary
//! treatment, survival and log-normal cost. Also Monte Carlo evaluation of
//! regimes and the fit-seed sensitivity experiment.
//!
//! Every unit draws from its own ChaCha8 stream (the dataset seed selects the
//! key, the unit index the stream), so a unit's trajectory does not depend on
//! the cohort size or on how work is split across threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{binary_actions, Action, FeatureSpec, IntervalRecord, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::listsearch::{fit_regime, RegimeConfig};
use crate::regime::{regime_distance, CompiledList, Regime, RegimeSummary, SummarySource};
use crate::regress::LearnerSpec;
use crate::scalar::{compensated_sum, Scalar};
use crate::seeds::derive_seed;

pub const N_INTERVALS: usize = 3;
pub const N_CONFOUNDERS: usize = 2;

pub fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Strength of the cost-survival link, with the matching cost offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationLevel {
    Low,
    Med,
    High,
}

impl CorrelationLevel {
    pub const ALL: [CorrelationLevel; 3] = [CorrelationLevel::Low, CorrelationLevel::Med, CorrelationLevel::High];

    pub fn zeta(self) -> f64 {
        match self {
            CorrelationLevel::Low => 0.5,
            CorrelationLevel::Med => 1.0,
            CorrelationLevel::High => 1.5,
        }
    }

    pub fn offset(self) -> f64 {
        match self {
            CorrelationLevel::Low => 0.62,
            CorrelationLevel::Med => 0.31,
            CorrelationLevel::High => 0.0,
        }
    }
}

impl fmt::Display for CorrelationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationLevel::Low => "low",
            CorrelationLevel::Med => "med",
            CorrelationLevel::High => "high",
        })
    }
}

impl FromStr for CorrelationLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(CorrelationLevel::Low),
            "med" | "medium" => Ok(CorrelationLevel::Med),
            "high" => Ok(CorrelationLevel::High),
            other => Err(Error::Config(format!("unknown correlation level {other:?}"))),
        }
    }
}

type V2 = [f64; 2];

fn dot(a: &V2, b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Coefficients of the generating model. Suffix `_f` marks the follow-up
/// (interval 2 and 3) equations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DgpParams {
    pub beta1: V2,
    pub alpha1: V2,
    pub alpha2: V2,
    pub alpha3: V2,
    pub eta1: V2,
    pub eta2: V2,
    pub beta1_f: V2,
    pub beta2_f: V2,
    pub alpha1_f: V2,
    pub alpha2_f: V2,
    pub alpha3_f: V2,
    pub alpha4_f: V2,
    pub eta1_f: V2,
    pub eta2_f: V2,
    pub zeta: f64,
    pub offset: f64,
    pub cost_sd: f64,
}

impl Default for DgpParams {
    fn default() -> Self {
        DgpParams::for_level(CorrelationLevel::Low)
    }
}

impl DgpParams {
    pub fn for_level(level: CorrelationLevel) -> Self {
        DgpParams {
            beta1: [0.4, 0.4],
            alpha1: [-0.4, -0.4],
            alpha2: [0.5, 0.125],
            alpha3: [1.0, 0.25],
            eta1: [0.2, 0.2],
            eta2: [0.2, 0.1],
            beta1_f: [0.3, 0.3],
            beta2_f: [0.1, 0.1],
            alpha1_f: [-0.3, -0.3],
            alpha2_f: [0.3, 0.3],
            alpha3_f: [1.0, 0.25],
            alpha4_f: [-0.1, -0.1],
            eta1_f: [0.2, 0.2],
            eta2_f: [0.2, 0.1],
            zeta: level.zeta(),
            offset: level.offset(),
            cost_sd: 0.1,
        }
    }

    /// Same coefficients with ζ and the offset taken from `level`.
    pub fn at_level(&self, level: CorrelationLevel) -> Self {
        DgpParams { zeta: level.zeta(), offset: level.offset(), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let vectors = [
            self.beta1, self.alpha1, self.alpha2, self.alpha3, self.eta1, self.eta2, self.beta1_f, self.beta2_f,
            self.alpha1_f, self.alpha2_f, self.alpha3_f, self.alpha4_f, self.eta1_f, self.eta2_f,
        ];
        if vectors.iter().flatten().chain([&self.zeta, &self.offset]).any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite generating-model parameter".into()));
        }
        if !(self.cost_sd >= 0.0 && self.cost_sd.is_finite()) {
            return Err(Error::Config("cost noise sd must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// P(A_k = 1 | history). `prev` is `(W_{k-1}, A_{k-1})`, absent at k = 1.
    pub fn propensity(&self, w: &[f64], prev: Option<(&[f64], u32)>) -> f64 {
        match prev {
            None => expit(-0.8 + dot(&self.beta1, w)),
            Some((wp, ap)) => expit(-0.8 + dot(&self.beta1_f, w) + dot(&self.beta2_f, wp) + 0.5 * f64::from(ap)),
        }
    }

    /// P(S_k = 1 | history, A_k = a) for a unit alive at the start of k.
    pub fn survival_prob(&self, w: &[f64], a: u32, w_prev: Option<&[f64]>) -> f64 {
        let a = f64::from(a);
        let low = if w[0].min(w[1]) < -1.0 { 1.0 } else { 0.0 };
        let aw = [a * w[0], a * w[1]];
        match w_prev {
            None => expit(
                -0.5 + dot(&self.alpha1, w) + 2.0 * a + dot(&self.alpha2, &aw)
                    + 1.2 * std_normal_cdf(dot(&self.alpha3, &aw))
                    - 3.0 * a * low,
            ),
            Some(wp) => expit(
                -0.5 + dot(&self.alpha1_f, w) + 2.0 * a + dot(&self.alpha2_f, &aw)
                    + 1.2 * std_normal_cdf(dot(&self.alpha3_f, &aw))
                    - 3.0 * a * low
                    + dot(&self.alpha4_f, wp),
            ),
        }
    }

    /// Mean of log Y_k given history, action and the survival probability.
    pub fn log_cost_mean(&self, w: &[f64], a: u32, follow_up: bool, p_survive: f64) -> f64 {
        let (eta1, eta2) = if follow_up { (&self.eta1_f, &self.eta2_f) } else { (&self.eta1, &self.eta2) };
        let a = f64::from(a);
        let high = w.iter().filter(|&&x| x > 1.0).count() as f64;
        1.0 + self.offset + dot(eta1, w) + 0.5 * a + 0.5 * high + a * dot(eta2, w) + self.zeta * p_survive
    }
}

/// How treatment is assigned in generated data.
#[derive(Clone, Copy, Debug)]
pub enum Policy<'a, T> {
    /// Drawn from the propensity model.
    Observational,
    /// Set by a regime evaluated on the full history.
    Regime(&'a Regime<T>),
}

#[derive(Clone, Copy, Debug)]
pub struct SimConfig<'a, T> {
    pub n_units: usize,
    pub level: CorrelationLevel,
    pub seed: u64,
    pub policy: Policy<'a, T>,
}

enum Assign<T> {
    Observational,
    Rules { lists: Vec<CompiledList<T>>, spec: FeatureSpec, buf: Vec<T> },
}

impl<T: Scalar> Assign<T> {
    fn new(policy: &Policy<'_, T>) -> Result<Self> {
        match policy {
            Policy::Observational => Ok(Assign::Observational),
            Policy::Regime(r) => {
                if r.n_intervals() != N_INTERVALS {
                    return Err(Error::Config(format!(
                        "regime has {} intervals, the simulator has {N_INTERVALS}",
                        r.n_intervals()
                    )));
                }
                let spec = FeatureSpec::all();
                let lists = (1..=N_INTERVALS)
                    .map(|k| r.list(k).compile(&spec.names(k, N_CONFOUNDERS)))
                    .collect::<Result<_>>()?;
                Ok(Assign::Rules { lists, spec, buf: Vec::new() })
            }
        }
    }
}

/// Draws one unit's trajectory into `out` (exactly `N_INTERVALS` records).
fn simulate_unit<T: Scalar>(
    params: &DgpParams,
    seed: u64,
    unit: u64,
    assign: &mut Assign<T>,
    out: &mut Vec<IntervalRecord<T>>,
) {
    let start = out.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(unit);
    let mut prev: Option<(V2, u32)> = None;
    for k in 1..=N_INTERVALS {
        let w: V2 = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let u_treat: f64 = rng.random();
        let u_survive: f64 = rng.random();
        let noise: f64 = rng.sample(StandardNormal);

        let a = match assign {
            Assign::Observational => {
                let p = params.propensity(&w, prev.as_ref().map(|(wp, ap)| (&wp[..], *ap)));
                u32::from(u_treat < p)
            }
            Assign::Rules { lists, spec, buf } => {
                out.push(IntervalRecord {
                    confounders: w.iter().map(|&x| T::lit(x)).collect(),
                    action: None,
                    effectiveness: T::zero(),
                    cost: T::zero(),
                    alive: true,
                });
                buf.clear();
                spec.fill(k, &out[start..], buf);
                out.pop();
                lists[k - 1].apply(buf).0
            }
        };
        let p_s = params.survival_prob(&w, a, prev.as_ref().map(|(wp, _)| &wp[..]));
        let survived = u_survive < p_s;
        let cost = (params.log_cost_mean(&w, a, k > 1, p_s) + params.cost_sd * noise).exp();
        out.push(IntervalRecord {
            confounders: w.iter().map(|&x| T::lit(x)).collect(),
            action: Some(Action(a)),
            effectiveness: if survived { T::one() } else { T::zero() },
            cost: T::lit(cost),
            alive: true,
        });
        if !survived {
            out.extend((k..N_INTERVALS).map(|_| IntervalRecord::dead()));
            return;
        }
        prev = Some((w, a));
    }
}

/// Simulates `cfg.n_units` units. ζ and the cost offset come from `cfg.level`;
/// the remaining coefficients from `params`.
pub fn generate_dataset<T: Scalar>(cfg: &SimConfig<'_, T>, params: &DgpParams) -> Result<TrajectoryDataset<T>> {
    let params = params.at_level(cfg.level);
    params.validate()?;
    Assign::new(&cfg.policy)?;
    let chunks: Vec<Vec<IntervalRecord<T>>> = chunk_ranges(cfg.n_units)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut assign = Assign::new(&cfg.policy).expect("policy checked");
            let mut out = Vec::with_capacity((hi - lo) * N_INTERVALS);
            for u in lo..hi {
                simulate_unit(&params, cfg.seed, u as u64, &mut assign, &mut out);
            }
            out
        })
        .collect();
    TrajectoryDataset::new(cfg.n_units, N_INTERVALS, N_CONFOUNDERS, binary_actions(), chunks.concat())
}

fn chunk_ranges(n: usize) -> Vec<(usize, usize)> {
    const CHUNK: usize = 4096;
    (0..n.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n))).collect()
}

/// Monte Carlo means with their standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct McSummary<T> {
    pub summary: RegimeSummary<T>,
    pub se_effectiveness: T,
    pub se_cost: T,
}

/// Treats `m` fresh units with `regime` and averages total survival and cost.
pub fn monte_carlo_evaluate<T: Scalar>(
    regime: &Regime<T>,
    m: usize,
    level: CorrelationLevel,
    seed: u64,
    params: &DgpParams,
) -> Result<McSummary<T>> {
    if m < 2 {
        return Err(Error::Argument("Monte Carlo evaluation needs at least 2 units".into()));
    }
    let params = params.at_level(level);
    params.validate()?;
    let policy = Policy::Regime(regime);
    Assign::new(&policy)?;
    let totals: Vec<(f64, f64)> = chunk_ranges(m)
        .into_par_iter()
        .flat_map_iter(|(lo, hi)| {
            let mut assign = Assign::new(&policy).expect("policy checked");
            let mut out = Vec::with_capacity(N_INTERVALS);
            (lo..hi)
                .map(|u| {
                    out.clear();
                    simulate_unit(&params, seed, u as u64, &mut assign, &mut out);
                    out.iter().fold((0.0, 0.0), |(z, y), r| {
                        (z + r.effectiveness.to_f64_lossy(), y + r.cost.to_f64_lossy())
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let (mz, sz) = mean_and_se(totals.iter().map(|t| t.0), m);
    let (my, sy) = mean_and_se(totals.iter().map(|t| t.1), m);
    Ok(McSummary {
        summary: RegimeSummary::new("", T::lit(mz), T::lit(my), SummarySource::MonteCarlo),
        se_effectiveness: T::lit(sz),
        se_cost: T::lit(sy),
    })
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = compensated_sum(values.clone()) / nf;
    let ss = compensated_sum(values.map(|v| (v - mean) * (v - mean)));
    (mean, (ss / (nf - 1.0) / nf).sqrt())
}

/// Outcome of refitting with two fit seeds on each of several datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSensitivity {
    pub n_units: usize,
    pub distances: Vec<usize>,
    /// Share of replications whose two regimes differ in at most one interval.
    pub proportion_within_one: f64,
}

/// For each replication: one observational dataset and two regime fits that
/// differ only in the learner seed.
pub fn seed_sensitivity<T: Scalar>(
    n_units: usize,
    level: CorrelationLevel,
    replications: usize,
    regime: &RegimeConfig<T>,
    params: &DgpParams,
    seed: u64,
) -> Result<SeedSensitivity> {
    if replications == 0 {
        return Err(Error::Argument("need at least one replication".into()));
    }
    let distances = (0..replications)
        .into_par_iter()
        .map(|r| {
            let rep_seed = derive_seed(seed, r as u64);
            let cfg = SimConfig { n_units, level, seed: derive_seed(rep_seed, 0), policy: Policy::Observational };
            let data = generate_dataset::<T>(&cfg, params)?;
            let fit_with = |s: u64| {
                let learner = LearnerSpec { seed: s, ..regime.learner.clone() };
                fit_regime(&data, &RegimeConfig { learner, ..regime.clone() }).map(|f| f.regime)
            };
            regime_distance(&fit_with(derive_seed(rep_seed, 1))?, &fit_with(derive_seed(rep_seed, 2))?)
        })
        .collect::<Result<Vec<usize>>>()?;
    let within = distances.iter().filter(|&&d| d <= 1).count();
    Ok(SeedSensitivity { n_units, proportion_within_one: within as f64 / replications as f64, distances })
}

/// Repeated simulate / fit-ladder / evaluate runs on fresh observational
/// datasets, one dataset per replication shared by every budget.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderStudy<T> {
    pub n_units: usize,
    pub level: CorrelationLevel,
    pub replications: usize,
    /// Total budgets, each split evenly over the intervals.
    pub taus: Vec<T>,
    pub mc_units: usize,
    pub max_len: usize,
    pub eta: T,
    pub learner: LearnerSpec,
    pub features: FeatureSpec,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LadderFit<T> {
    pub tau: T,
    pub feasible: bool,
    pub q_estimate: RegimeSummary<T>,
    pub monte_carlo: McSummary<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Replicate<T> {
    pub index: usize,
    pub fits: Vec<LadderFit<T>>,
}

/// Per-budget averages over replications; `se_*` is the replicate standard
/// deviation over the square root of the replication count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub tau: f64,
    pub n_units: usize,
    pub replications: usize,
    pub q_cost: f64,
    pub q_survival: f64,
    pub mc_cost: f64,
    pub mc_survival: f64,
    pub se_q_cost: f64,
    pub se_q_survival: f64,
    pub se_mc_cost: f64,
    pub se_mc_survival: f64,
    pub n_feasible: usize,
}

impl<T: Scalar> LadderStudy<T> {
    /// Replication `r` simulates with `derive_seed(derive_seed(seed, r), 0)`
    /// and evaluates every fitted regime on the Monte Carlo cohort seeded by
    /// `derive_seed(derive_seed(seed, r), 1)`.
    pub fn run(&self, params: &DgpParams) -> Result<Vec<Replicate<T>>> {
        if self.replications == 0 || self.taus.is_empty() {
            return Err(Error::Config("study needs replications and at least one budget".into()));
        }
        if self.taus.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("budget grid must be strictly increasing".into()));
        }
        (0..self.replications)
            .into_par_iter()
            .map(|r| self.replicate(r, params))
            .collect()
    }

    fn replicate(&self, r: usize, params: &DgpParams) -> Result<Replicate<T>> {
        let rep_seed = derive_seed(self.seed, r as u64);
        let cfg = SimConfig { n_units: self.n_units, level: self.level, seed: derive_seed(rep_seed, 0), policy: Policy::Observational };
        let data = generate_dataset::<T>(&cfg, params)?;
        let fits = self
            .taus
            .iter()
            .map(|&tau| {
                let rc = RegimeConfig::equal_split(
                    tau,
                    N_INTERVALS,
                    self.max_len,
                    self.eta,
                    self.learner.clone(),
                    self.features.clone(),
                );
                let fitted = fit_regime(&data, &rc)?;
                let monte_carlo =
                    monte_carlo_evaluate(&fitted.regime, self.mc_units, self.level, derive_seed(rep_seed, 1), params)?;
                Ok(LadderFit {
                    tau,
                    feasible: fitted.regime.all_feasible(),
                    q_estimate: fitted.q_estimate(),
                    monte_carlo,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Replicate { index: r, fits })
    }
}

/// Averages a study's replications per budget.
pub fn summarize_study<T: Scalar>(n_units: usize, reps: &[Replicate<T>]) -> Vec<StudyCell> {
    let Some(first) = reps.first() else { return Vec::new() };
    (0..first.fits.len())
        .map(|j| {
            let col = |f: &dyn Fn(&LadderFit<T>) -> T| -> (f64, f64) {
                let v: Vec<f64> = reps.iter().map(|r| f(&r.fits[j]).to_f64_lossy()).collect();
                if v.len() < 2 {
                    (v[0], f64::NAN)
                } else {
                    mean_and_se(v.iter().copied(), v.len())
                }
            };
            let (q_cost, se_q_cost) = col(&|f| f.q_estimate.mean_cost);
            let (q_survival, se_q_survival) = col(&|f| f.q_estimate.mean_effectiveness);
            let (mc_cost, se_mc_cost) = col(&|f| f.monte_carlo.summary.mean_cost);
            let (mc_survival, se_mc_survival) = col(&|f| f.monte_carlo.summary.mean_effectiveness);
            StudyCell {
                tau: first.fits[j].tau.to_f64_lossy(),
                n_units,
                replications: reps.len(),
                q_cost,
                q_survival,
                mc_cost,
                mc_survival,
                se_q_cost,
                se_q_survival,
                se_mc_cost,
                se_mc_survival,
                n_feasible: reps.iter().filter(|r| r.fits[j].feasible).count(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        let p = DgpParams::for_level(CorrelationLevel::Med);
        assert!((p.propensity(&[0.0, 0.0], None) - 0.310_025_518_872_388).abs() < 1e-12);
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((std_normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        let ps = p.survival_prob(&[0.0, 0.0], 0, None);
        assert!((ps - expit(0.1)).abs() < 1e-15);
        assert!((p.log_cost_mean(&[0.0, 0.0], 0, false, ps) - 1.834_979_187_479).abs() < 1e-9);
    }

    #[test]
    fn treatment_penalty_when_a_confounder_is_low() {
        let p = DgpParams::default();
        let w = [-1.5, 0.5];
        let treated = -0.5 + dot(&p.alpha1, &w) + 2.0 + dot(&p.alpha2, &w)
            + 1.2 * std_normal_cdf(dot(&p.alpha3, &w))
            - 3.0;
        assert!((p.survival_prob(&w, 1, None) - expit(treated)).abs() < 1e-15);
    }

    fn obs(n: usize, seed: u64) -> TrajectoryDataset<f64> {
        let cfg = SimConfig { n_units: n, level: CorrelationLevel::Low, seed, policy: Policy::Observational };
        generate_dataset(&cfg, &DgpParams::default()).unwrap()
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let a = obs(300, 11);
        assert_eq!(a, obs(300, 11));
        let b = obs(5000, 11);
        for u in 0..300 {
            assert_eq!(a.unit_records(u), b.unit_records(u));
        }
        assert_ne!(a, obs(300, 12));
    }

    #[test]
    fn death_is_absorbing_and_costs_positive() {
        let d = obs(2000, 3);
        let mut deaths = 0;
        for u in 0..d.n_units() {
            let recs = d.unit_records(u);
            for (k, r) in recs.iter().enumerate() {
                if r.alive {
                    assert!(r.cost > 0.0);
                    if r.effectiveness == 0.0 {
                        deaths += 1;
                        assert!(recs[k + 1..].iter().all(|r| !r.alive));
                    }
                }
            }
        }
        assert!(deaths > 0);
    }

    #[test]
    fn regime_policy_matches_its_rules() {
        let r = Regime::<f64>::static_action(N_INTERVALS, Action(1));
        let cfg = SimConfig { n_units: 200, level: CorrelationLevel::High, seed: 5, policy: Policy::Regime(&r) };
        let d = generate_dataset(&cfg, &DgpParams::default()).unwrap();
        for k in 1..=N_INTERVALS {
            for u in d.live_units(k) {
                assert_eq!(d.record(u, k).action, Some(Action(1)));
            }
        }
    }

    #[test]
    fn wrong_interval_count_is_rejected() {
        let r = Regime::<f64>::static_action(2, Action(0));
        assert!(monte_carlo_evaluate(&r, 10, CorrelationLevel::Low, 0, &DgpParams::default()).is_err());
    }

    #[test]
    fn level_names_round_trip() {
        for l in CorrelationLevel::ALL {
            assert_eq!(l.to_string().parse::<CorrelationLevel>().unwrap(), l);
        }
        assert!("extreme".parse::<CorrelationLevel>().is_err());
    }
}
