use std::path::{Path, PathBuf};

use listdtr::cea::{CandidateLadder, LadderEntry};
use listdtr::sim::{self, DgpParams, LadderStudy, Policy, SimConfig, StudyCell, N_INTERVALS};
use listdtr::{
    derive_seed, fit_regime, generate_dataset, monte_carlo_evaluate, select_cost_effective, CorrelationLevel,
    FeatureSpec, LearnerKind, LearnerSpec, Regime, RegimeConfig, RegimeSummary, SummarySource, TrajectoryDataset,
};
use serde::{Deserialize, Serialize};

use crate::config::{self, LearnerConfig, RunConfig};
use crate::report::{self, fmt_tau, roman};
use crate::{
    CeaArgs, Cli, CliError, CliResult, EvaluateArgs, FitArgs, LearnerArgs, RegimeArgs, ReproduceArgs,
    SeedSensitivityArgs, SimulateArgs,
};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_OUT_DIR: &str = "listdtr-out";
const DEFAULT_N: usize = 1000;
const DEFAULT_MAX_LEN: usize = 3;
const DEFAULT_ETA: f64 = 0.01;
const DEFAULT_MC: usize = 100_000;
const DEFAULT_TAUS: [f64; 3] = [26.0, 28.0, 30.0];

pub struct Context {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub strict: bool,
    pub file: RunConfig,
}

impl Context {
    pub fn new(cli: &Cli, file: RunConfig) -> CliResult<Self> {
        let out_dir = cli.out_dir.clone().or_else(|| file.out_dir.clone()).unwrap_or_else(|| DEFAULT_OUT_DIR.into());
        Ok(Context {
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            strict: cli.strict || file.strict.unwrap_or(false),
            out_dir,
            file,
        })
    }

    fn ensure_out_dir(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", self.out_dir.display())))
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn level(&self, flag: Option<&str>) -> CliResult<CorrelationLevel> {
        match flag {
            Some(s) => Ok(s.parse()?),
            None => Ok(self.file.corr.unwrap_or(CorrelationLevel::Low)),
        }
    }

    fn params(&self) -> CliResult<DgpParams> {
        let p = self.file.params.clone().unwrap_or_default();
        p.validate()?;
        Ok(p)
    }

    fn sizes(&self, flag: Option<&str>, default: &[usize]) -> CliResult<Vec<usize>> {
        let v = match flag {
            Some(s) => config::parse_list(s, "sample size")?,
            None => self.file.n.as_ref().map_or_else(|| default.to_vec(), |n| n.to_vec()),
        };
        if v.is_empty() || v.contains(&0) {
            return Err(CliError::Config("sample sizes must be positive".into()));
        }
        Ok(v)
    }

    fn taus(&self, flag: Option<&str>, default: &[f64]) -> CliResult<Vec<f64>> {
        let v = match flag {
            Some(s) => config::parse_tau_list(s)?,
            None => self.file.taus()?.unwrap_or_else(|| default.to_vec()),
        };
        config::check_grid(&v)?;
        Ok(v)
    }

    fn learner(&self, flags: &LearnerArgs, default_kind: LearnerKind) -> CliResult<LearnerSpec> {
        let kind = match flags.learner.as_deref() {
            None => None,
            Some("ols") => Some(LearnerKind::Ols),
            Some("stumps" | "boosted_stumps") => Some(LearnerKind::BoostedStumps),
            Some(other) => return Err(CliError::Config(format!("unknown learner {other:?} (ols, stumps)"))),
        };
        let over = LearnerConfig {
            kind,
            include_interactions: flags.interactions,
            stratified: flags.stratified,
            rounds: flags.rounds,
            learning_rate: flags.learning_rate,
            min_leaf: flags.min_leaf,
            subsample: flags.subsample,
            seed: None,
        };
        let mut merged = self.file.learner.merged(&over);
        merged.seed = merged.seed.or(Some(self.seed));
        merged.build(default_kind)
    }

    fn features(&self, flag: Option<&str>) -> CliResult<FeatureSpec> {
        match flag {
            Some(s) => config::feature_preset(s),
            None => self.file.features.as_ref().map_or_else(|| Ok(FeatureSpec::markov()), |f| f.resolve()),
        }
    }

    fn max_len(&self, flag: Option<usize>) -> CliResult<usize> {
        let l = flag.or(self.file.max_len).unwrap_or(DEFAULT_MAX_LEN);
        if l == 0 {
            return Err(CliError::Config("--max-len must be at least 1".into()));
        }
        Ok(l)
    }

    fn eta(&self, flag: Option<f64>) -> CliResult<f64> {
        let eta = flag.or(self.file.eta).unwrap_or(DEFAULT_ETA);
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(CliError::Config("--eta must be a non-negative number".into()));
        }
        Ok(eta)
    }

    fn mc(&self, flag: Option<usize>) -> CliResult<usize> {
        let m = flag.or(self.file.mc).unwrap_or(DEFAULT_MC);
        if m < 2 {
            return Err(CliError::Config("--mc must be at least 2".into()));
        }
        Ok(m)
    }

    fn weights(&self, flag: Option<&str>) -> CliResult<Option<Vec<f64>>> {
        match flag {
            Some(s) => Ok(Some(config::parse_list(s, "schedule weight")?)),
            None => Ok(self.file.schedule.clone()),
        }
    }
}

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} {} does not exist", path.display())))
    }
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<D> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SimMeta<'a> {
    seed: u64,
    n_units: usize,
    n_intervals: usize,
    level: CorrelationLevel,
    zeta: f64,
    offset: f64,
    policy: String,
    params: &'a DgpParams,
}

pub fn simulate(ctx: &Context, a: &SimulateArgs) -> CliResult<()> {
    let n = match a.n {
        Some(n) => n,
        None => ctx.sizes(None, &[DEFAULT_N])?[0],
    };
    if n == 0 {
        return Err(CliError::Config("--n must be positive".into()));
    }
    let level = ctx.level(a.corr.as_deref())?;
    let params = ctx.params()?.at_level(level);
    if let Some(p) = &a.regime {
        require_file(p, "regime")?;
    }
    let out = match &a.out {
        Some(p) => p.clone(),
        None => {
            ctx.ensure_out_dir()?;
            ctx.out("data.csv")
        }
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
    }
    let regime = a.regime.as_ref().map(Regime::read_json_path).transpose()?;
    let policy = regime.as_ref().map_or(Policy::Observational, Policy::Regime);
    let cfg = SimConfig { n_units: n, level, seed: ctx.seed, policy };
    let data: TrajectoryDataset = generate_dataset(&cfg, &params)?;
    data.write_csv_path(&out)?;
    let meta = SimMeta {
        seed: ctx.seed,
        n_units: n,
        n_intervals: N_INTERVALS,
        level,
        zeta: params.zeta,
        offset: params.offset,
        policy: a.regime.as_ref().map_or_else(|| "observational".into(), |p| p.display().to_string()),
        params: &params,
    };
    let meta_path = out.with_file_name(format!(
        "{}.meta.json",
        out.file_stem().map_or_else(|| "data".into(), |s| s.to_string_lossy().into_owned())
    ));
    write_json(&meta_path, &meta)?;
    eprintln!("wrote {} ({} units x {} intervals) and {}", out.display(), n, N_INTERVALS, meta_path.display());
    Ok(())
}

/// One rung of a ladder file. `tau` is `null` for an unbounded budget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderFileEntry {
    pub label: String,
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<PathBuf>,
    #[serde(default = "yes")]
    pub feasible: bool,
    pub mean_effectiveness: f64,
    pub mean_cost: f64,
    #[serde(default = "q_source")]
    pub source: SummarySource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se_effectiveness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se_cost: Option<f64>,
}

fn yes() -> bool {
    true
}

fn q_source() -> SummarySource {
    SummarySource::QEstimate
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wtp: Option<f64>,
    pub entries: Vec<LadderFileEntry>,
}

fn tau_of(e: &LadderFileEntry) -> f64 {
    e.tau.unwrap_or(f64::INFINITY)
}

fn finite_or_none(t: f64) -> Option<f64> {
    t.is_finite().then_some(t)
}

fn regime_file_name(tau: f64) -> String {
    format!("regime_tau{}.json", fmt_tau(tau))
}

fn ladder_text(entries: &[LadderFileEntry]) -> String {
    let mut s = format!("{:<8} {:>10} {:>10} {:>10} {:>9}\n", "Regime", "Constraint", "Survival", "Cost", "Feasible");
    for e in entries {
        s.push_str(&format!(
            "{:<8} {:>10} {:>10.2} {:>10.2} {:>9}\n",
            e.label,
            fmt_tau(tau_of(e)),
            e.mean_effectiveness,
            e.mean_cost,
            if e.feasible { "yes" } else { "no" }
        ));
    }
    s
}

fn is_monotone(entries: &[LadderFileEntry]) -> bool {
    let feasible: Vec<_> = entries.iter().filter(|e| e.feasible).collect();
    feasible
        .windows(2)
        .all(|w| w[0].mean_cost <= w[1].mean_cost && w[0].mean_effectiveness <= w[1].mean_effectiveness)
}

pub fn fit(ctx: &Context, a: &FitArgs) -> CliResult<()> {
    let data_path = a
        .data
        .clone()
        .or_else(|| ctx.file.data.clone())
        .ok_or_else(|| CliError::Config("fit needs --data".into()))?;
    require_file(&data_path, "dataset")?;
    let r = &a.regime;
    let taus = ctx.taus(r.tau.as_deref(), &DEFAULT_TAUS)?;
    let weights = ctx.weights(r.schedule.as_deref())?;
    let max_len = ctx.max_len(r.max_len)?;
    let eta = ctx.eta(r.eta)?;
    let learner = ctx.learner(&r.learner, LearnerKind::Ols)?;
    let features = ctx.features(r.features.as_deref())?;
    ctx.ensure_out_dir()?;

    let data = TrajectoryDataset::read_csv_path(&data_path)?;
    let k = data.n_intervals();
    let mut entries = Vec::with_capacity(taus.len());
    for (j, &tau) in taus.iter().enumerate() {
        let rc = RegimeConfig {
            tau: config::schedule(tau, k, weights.as_deref())?,
            max_len: vec![max_len; k],
            eta,
            learner: learner.clone(),
            features: features.clone(),
        };
        let fitted = fit_regime(&data, &rc)?;
        let name = regime_file_name(tau);
        fitted.regime.write_json_path(ctx.out(&name))?;
        let feasible = fitted.regime.all_feasible();
        if !feasible {
            let bad: Vec<String> = fitted
                .regime
                .feasible()
                .iter()
                .enumerate()
                .filter(|(_, f)| !**f)
                .map(|(i, _)| (i + 1).to_string())
                .collect();
            eprintln!("warning: tau={} infeasible at interval(s) {}", fmt_tau(tau), bad.join(","));
        }
        let q = fitted.q_estimate();
        entries.push(LadderFileEntry {
            label: roman(j + 1),
            tau: finite_or_none(tau),
            regime: Some(name.into()),
            feasible,
            mean_effectiveness: q.mean_effectiveness,
            mean_cost: q.mean_cost,
            source: q.source,
            se_effectiveness: None,
            se_cost: None,
        });
    }
    if !is_monotone(&entries) {
        eprintln!("warning: estimated survival or cost is not nondecreasing along the budget ladder");
    }
    let ladder = LadderFile { wtp: ctx.file.wtp, entries };
    write_json(&ctx.out("ladder.json"), &ladder)?;
    print!("{}", ladder_text(&ladder.entries));
    let infeasible = ladder.entries.iter().filter(|e| !e.feasible).count();
    if ctx.strict && infeasible > 0 {
        return Err(CliError::Infeasible(format!("{infeasible} of {} regimes are infeasible", ladder.entries.len())));
    }
    Ok(())
}

#[derive(Serialize)]
struct Evaluation {
    regime: PathBuf,
    level: CorrelationLevel,
    seed: u64,
    mc_units: usize,
    mean_effectiveness: f64,
    mean_cost: f64,
    se_effectiveness: f64,
    se_cost: f64,
}

pub fn evaluate(ctx: &Context, a: &EvaluateArgs) -> CliResult<()> {
    let level = ctx.level(a.corr.as_deref())?;
    let m = ctx.mc(a.mc)?;
    let params = ctx.params()?;
    match (&a.regime, &a.ladder) {
        (Some(path), None) => {
            require_file(path, "regime")?;
            ctx.ensure_out_dir()?;
            let regime = Regime::read_json_path(path)?;
            let s = monte_carlo_evaluate(&regime, m, level, ctx.seed, &params)?;
            let ev = Evaluation {
                regime: path.clone(),
                level,
                seed: ctx.seed,
                mc_units: m,
                mean_effectiveness: s.summary.mean_effectiveness,
                mean_cost: s.summary.mean_cost,
                se_effectiveness: s.se_effectiveness,
                se_cost: s.se_cost,
            };
            write_json(&ctx.out("evaluation.json"), &ev)?;
            println!(
                "survival {:.4} (se {:.4})  cost {:.4} (se {:.4})",
                ev.mean_effectiveness, ev.se_effectiveness, ev.mean_cost, ev.se_cost
            );
            Ok(())
        }
        (None, Some(path)) => {
            require_file(path, "ladder")?;
            let mut ladder: LadderFile = read_json(path)?;
            let base = path.parent().unwrap_or(Path::new(""));
            let regimes = ladder
                .entries
                .iter()
                .map(|e| {
                    let rel = e
                        .regime
                        .as_ref()
                        .ok_or_else(|| CliError::Data(format!("ladder entry {} has no regime file", e.label)))?;
                    let p = base.join(rel);
                    require_file(&p, "regime")?;
                    Ok(p)
                })
                .collect::<CliResult<Vec<_>>>()?;
            ctx.ensure_out_dir()?;
            for (e, p) in ladder.entries.iter_mut().zip(&regimes) {
                let regime = Regime::read_json_path(p)?;
                // Same cohort seed for every rung: common random numbers.
                let s = monte_carlo_evaluate(&regime, m, level, ctx.seed, &params)?;
                e.mean_effectiveness = s.summary.mean_effectiveness;
                e.mean_cost = s.summary.mean_cost;
                e.source = SummarySource::MonteCarlo;
                e.se_effectiveness = Some(s.se_effectiveness);
                e.se_cost = Some(s.se_cost);
                e.regime = Some(std::path::absolute(p).unwrap_or_else(|_| p.clone()));
            }
            write_json(&ctx.out("ladder_mc.json"), &ladder)?;
            print!("{}", ladder_text(&ladder.entries));
            Ok(())
        }
        _ => Err(CliError::Config("evaluate needs exactly one of --regime or --ladder".into())),
    }
}

pub fn cea(ctx: &Context, a: &CeaArgs) -> CliResult<()> {
    require_file(&a.summaries, "summaries")?;
    let file: LadderFile = read_json(&a.summaries)?;
    let wtp = a
        .wtp
        .or(ctx.file.wtp)
        .or(file.wtp)
        .ok_or_else(|| CliError::Config("cea needs --wtp".into()))?;
    if !(wtp >= 0.0 && wtp.is_finite()) {
        return Err(CliError::Config("--wtp must be a non-negative number".into()));
    }
    ctx.ensure_out_dir()?;
    let mut entries = Vec::new();
    for e in &file.entries {
        if e.feasible {
            entries.push(LadderEntry {
                label: e.label.clone(),
                tau: tau_of(e),
                summary: RegimeSummary::new(e.label.clone(), e.mean_effectiveness, e.mean_cost, e.source),
            });
        } else {
            eprintln!("warning: excluding infeasible regime {}", e.label);
        }
    }
    let ladder = CandidateLadder::new(entries, wtp)?;
    let rep = select_cost_effective(&ladder)?;
    let table = rep.to_text_table();
    write_json(&ctx.out("cea_report.json"), &rep)?;
    std::fs::write(ctx.out("cea_report.txt"), &table).map_err(|e| CliError::Data(e.to_string()))?;
    print!("{table}");
    println!("selected: {}", rep.selected_label);
    Ok(())
}

fn parse_levels(flag: Option<&str>, ctx: &Context) -> CliResult<Vec<CorrelationLevel>> {
    match flag {
        Some("all") => Ok(CorrelationLevel::ALL.to_vec()),
        Some(s) => s.split(',').map(|x| Ok(x.trim().parse()?)).collect(),
        None => Ok(vec![ctx.file.corr.unwrap_or(CorrelationLevel::Low)]),
    }
}

fn level_index(level: CorrelationLevel) -> u64 {
    CorrelationLevel::ALL.iter().position(|&l| l == level).unwrap_or(0) as u64
}

/// Seed of the (level, n) study: `derive_seed(derive_seed(seed, level), n)`.
fn study_seed(seed: u64, level: CorrelationLevel, n: usize) -> u64 {
    derive_seed(derive_seed(seed, level_index(level)), n as u64)
}

fn even_split_only(r: &RegimeArgs, ctx: &Context) -> CliResult<()> {
    if r.schedule.is_some() || ctx.file.schedule.is_some() {
        return Err(CliError::Config("replicated studies split each budget evenly; drop --schedule".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct ReproduceCell {
    level: CorrelationLevel,
    #[serde(flatten)]
    cell: StudyCell,
    reference: Option<report::Reference>,
}

#[derive(Serialize)]
struct ReproduceOutput {
    seed: u64,
    replications: usize,
    mc_units: usize,
    max_len: usize,
    eta: f64,
    learner: LearnerSpec,
    cells: Vec<ReproduceCell>,
    checks: Vec<report::Check>,
}

pub fn reproduce(ctx: &Context, a: &ReproduceArgs) -> CliResult<()> {
    let r = &a.regime;
    even_split_only(r, ctx)?;
    let levels = parse_levels(a.level.as_deref(), ctx)?;
    let sizes = ctx.sizes(a.n.as_deref(), &[DEFAULT_N])?;
    let taus = ctx.taus(r.tau.as_deref(), &DEFAULT_TAUS)?;
    let reps = a.reps.or(ctx.file.reps).unwrap_or(100);
    if reps == 0 {
        return Err(CliError::Config("--reps must be at least 1".into()));
    }
    let mc = ctx.mc(a.mc)?;
    let max_len = ctx.max_len(r.max_len)?;
    let eta = ctx.eta(r.eta)?;
    let learner = ctx.learner(&r.learner, LearnerKind::Ols)?;
    let features = ctx.features(r.features.as_deref())?;
    let params = ctx.params()?;
    ctx.ensure_out_dir()?;

    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &level in &levels {
        for &n in &sizes {
            let study = LadderStudy {
                n_units: n,
                level,
                replications: reps,
                taus: taus.clone(),
                mc_units: mc,
                max_len,
                eta,
                learner: learner.clone(),
                features: features.clone(),
                seed: study_seed(ctx.seed, level, n),
            };
            let results = study.run(&params)?;
            let cells = sim::summarize_study(n, &results);
            checks.extend(report::study_checks(level, n, &cells, &results));
            rows.extend(cells.into_iter().map(|c| (level, c)));
        }
    }
    print!("{}", report::study_table(&rows));
    for c in &checks {
        println!("{}", c.line());
    }
    let out = ReproduceOutput {
        seed: ctx.seed,
        replications: reps,
        mc_units: mc,
        max_len,
        eta,
        learner,
        cells: rows
            .into_iter()
            .map(|(level, cell)| ReproduceCell { level, reference: report::reference(level, cell.tau, cell.n_units), cell })
            .collect(),
        checks,
    };
    write_json(&ctx.out("reproduce.json"), &out)
}

#[derive(Serialize)]
struct SensitivityOutput {
    seed: u64,
    level: CorrelationLevel,
    tau: f64,
    replications: usize,
    learner: LearnerSpec,
    results: Vec<sim::SeedSensitivity>,
    nondecreasing_in_n: bool,
}

pub fn seed_sensitivity(ctx: &Context, a: &SeedSensitivityArgs) -> CliResult<()> {
    let r = &a.regime;
    even_split_only(r, ctx)?;
    let level = ctx.level(a.level.as_deref())?;
    let sizes = ctx.sizes(a.n.as_deref(), &[500, 5000])?;
    let taus = ctx.taus(r.tau.as_deref(), &[30.0])?;
    let [tau] = taus[..] else {
        return Err(CliError::Config("seed-sensitivity takes a single budget".into()));
    };
    let reps = a.reps.or(ctx.file.reps).unwrap_or(50);
    if reps == 0 {
        return Err(CliError::Config("--reps must be at least 1".into()));
    }
    let mut flags = r.learner.clone();
    if flags.subsample.is_none() && ctx.file.learner.subsample.is_none() {
        flags.subsample = Some(0.5);
    }
    let learner = ctx.learner(&flags, LearnerKind::BoostedStumps)?;
    if !learner.is_stochastic() {
        eprintln!("warning: the learner is deterministic; every distance will be 0");
    }
    let rc = RegimeConfig::equal_split(
        tau,
        N_INTERVALS,
        ctx.max_len(r.max_len)?,
        ctx.eta(r.eta)?,
        learner.clone(),
        ctx.features(r.features.as_deref())?,
    );
    let params = ctx.params()?;
    ctx.ensure_out_dir()?;
    let results = sizes
        .iter()
        .map(|&n| Ok(sim::seed_sensitivity(n, level, reps, &rc, &params, derive_seed(ctx.seed, n as u64))?))
        .collect::<CliResult<Vec<_>>>()?;
    println!("{:>8} {:>12} {:>10}", "n", "within one", "mean dist");
    for s in &results {
        let mean = s.distances.iter().sum::<usize>() as f64 / s.distances.len() as f64;
        println!("{:>8} {:>11.1}% {:>10.2}", s.n_units, 100.0 * s.proportion_within_one, mean);
    }
    let nondecreasing = results.windows(2).all(|w| w[0].proportion_within_one <= w[1].proportion_within_one);
    let out = SensitivityOutput {
        seed: ctx.seed,
        level,
        tau,
        replications: reps,
        learner,
        results,
        nondecreasing_in_n: nondecreasing,
    };
    write_json(&ctx.out("seed_sensitivity.json"), &out)
}
