//! Fixed-width text tables and the published reference values used by
//! `reproduce`.

use std::fmt::Write as _;

use listdtr::sim::{Replicate, StudyCell};
use listdtr::CorrelationLevel;
use serde::Serialize;

/// Linear-model row of the published simulation table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Reference {
    pub q_cost: f64,
    pub q_survival: f64,
    pub mc_cost: f64,
    pub mc_survival: f64,
}

const fn r(q_cost: f64, q_survival: f64, mc_cost: f64, mc_survival: f64) -> Reference {
    Reference { q_cost, q_survival, mc_cost, mc_survival }
}

// (level, tau, n, row)
const REFERENCE: [(CorrelationLevel, u32, usize, Reference); 27] = {
    use CorrelationLevel::{High, Low, Med};
    [
        (Low, 26, 500, r(25.75, 1.30, 25.53, 1.25)),
        (Low, 26, 1000, r(25.64, 1.26, 25.18, 1.25)),
        (Low, 26, 5000, r(25.55, 1.23, 24.68, 1.25)),
        (Low, 28, 500, r(27.75, 1.35, 27.25, 1.30)),
        (Low, 28, 1000, r(27.63, 1.32, 26.88, 1.30)),
        (Low, 28, 5000, r(27.54, 1.28, 26.47, 1.30)),
        (Low, 30, 500, r(29.70, 1.40, 29.05, 1.35)),
        (Low, 30, 1000, r(29.64, 1.37, 28.80, 1.35)),
        (Low, 30, 5000, r(29.47, 1.33, 28.12, 1.35)),
        (Med, 26, 500, r(25.71, 1.26, 25.32, 1.21)),
        (Med, 26, 1000, r(25.57, 1.24, 24.96, 1.22)),
        (Med, 26, 5000, r(25.57, 1.21, 24.52, 1.22)),
        (Med, 28, 500, r(27.70, 1.31, 27.23, 1.27)),
        (Med, 28, 1000, r(27.59, 1.28, 26.76, 1.26)),
        (Med, 28, 5000, r(27.49, 1.25, 26.24, 1.26)),
        (Med, 30, 500, r(29.68, 1.35, 28.91, 1.31)),
        (Med, 30, 1000, r(29.57, 1.32, 28.51, 1.31)),
        (Med, 30, 5000, r(29.41, 1.29, 27.93, 1.31)),
        (High, 26, 500, r(25.60, 1.23, 25.29, 1.19)),
        (High, 26, 1000, r(25.61, 1.21, 24.90, 1.19)),
        (High, 26, 5000, r(25.57, 1.18, 24.49, 1.19)),
        (High, 28, 500, r(27.65, 1.28, 27.07, 1.23)),
        (High, 28, 1000, r(27.55, 1.25, 26.56, 1.23)),
        (High, 28, 5000, r(27.45, 1.22, 26.02, 1.23)),
        (High, 30, 500, r(29.62, 1.31, 28.79, 1.26)),
        (High, 30, 1000, r(29.49, 1.28, 28.36, 1.26)),
        (High, 30, 5000, r(29.41, 1.25, 27.78, 1.27)),
    ]
};

pub fn reference(level: CorrelationLevel, tau: f64, n: usize) -> Option<Reference> {
    REFERENCE
        .iter()
        .find(|(l, t, m, _)| *l == level && f64::from(*t) == tau && *m == n)
        .map(|e| e.3)
}

pub const MC_COST_TOL: f64 = 0.4;
pub const MC_SURVIVAL_TOL: f64 = 0.06;
pub const COST_SLACK: f64 = 0.1;
pub const MONOTONE_SHARE: f64 = 0.95;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: String) -> Self {
        Check { name: name.into(), pass, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Tolerance, budget and ladder checks for one (level, n) study.
pub fn study_checks(level: CorrelationLevel, n: usize, cells: &[StudyCell], reps: &[Replicate<f64>]) -> Vec<Check> {
    let mut out = Vec::new();
    for c in cells {
        let tag = format!("{level} tau={} n={n}", fmt_tau(c.tau));
        if let Some(rf) = reference(level, c.tau, n) {
            let dc = c.mc_cost - rf.mc_cost;
            let ds = c.mc_survival - rf.mc_survival;
            out.push(Check::new(
                format!("reference MC cost [{tag}]"),
                dc.abs() <= MC_COST_TOL,
                format!("{:.3} vs {:.2} (diff {dc:+.3}, tol {MC_COST_TOL})", c.mc_cost, rf.mc_cost),
            ));
            out.push(Check::new(
                format!("reference MC survival [{tag}]"),
                ds.abs() <= MC_SURVIVAL_TOL,
                format!("{:.3} vs {:.2} (diff {ds:+.3}, tol {MC_SURVIVAL_TOL})", c.mc_survival, rf.mc_survival),
            ));
        }
        if c.tau.is_finite() {
            out.push(Check::new(
                format!("MC cost within budget [{tag}]"),
                c.mc_cost <= c.tau + COST_SLACK,
                format!("{:.3} <= {}", c.mc_cost, c.tau + COST_SLACK),
            ));
        }
    }
    let (mut ok, mut total) = (0usize, 0usize);
    for rep in reps {
        for f in rep.fits.iter().filter(|f| f.feasible) {
            total += 1;
            ok += usize::from(f.q_estimate.mean_cost < f.tau);
        }
    }
    out.push(Check::new(
        format!("stage-1 Q cost below budget [{level} n={n}]"),
        ok == total,
        format!("{ok}/{total} feasible fits"),
    ));
    if cells.len() > 1 {
        let monotone = reps
            .iter()
            .filter(|rep| {
                rep.fits.windows(2).all(|w| {
                    w[0].q_estimate.mean_cost <= w[1].q_estimate.mean_cost
                        && w[0].q_estimate.mean_effectiveness <= w[1].q_estimate.mean_effectiveness
                })
            })
            .count();
        let share = monotone as f64 / reps.len() as f64;
        out.push(Check::new(
            format!("ladder monotone [{level} n={n}]"),
            share >= MONOTONE_SHARE,
            format!("{monotone}/{} replications ({:.1}%, need {:.0}%)", reps.len(), 100.0 * share, 100.0 * MONOTONE_SHARE),
        ));
    }
    out
}

pub fn fmt_tau(t: f64) -> String {
    if t.is_infinite() {
        "inf".into()
    } else if t.fract() == 0.0 {
        format!("{t:.0}")
    } else {
        format!("{t}")
    }
}

fn fmt_se(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else {
        format!("{x:.3}")
    }
}

fn fmt_ref(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), |v| format!("{v:.2}"))
}

/// One row per (level, tau, n) with replicate standard errors and the
/// published linear-model values alongside.
pub fn study_table(rows: &[(CorrelationLevel, StudyCell)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<5} {:>5} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9}  {:>8} {:>8} {:>8} {:>8}",
        "Corr", "tau", "n", "Cost", "Surv", "MC.Cost", "MC.Surv", "SE.Cost", "SE.Surv", "Feasible",
        "Ref.Cost", "Ref.Surv", "Ref.MCC", "Ref.MCS"
    );
    for (level, c) in rows {
        let rf = reference(*level, c.tau, c.n_units);
        let _ = writeln!(
            out,
            "{:<5} {:>5} {:>6} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8} {:>8} {:>9}  {:>8} {:>8} {:>8} {:>8}",
            level.to_string(),
            fmt_tau(c.tau),
            c.n_units,
            c.q_cost,
            c.q_survival,
            c.mc_cost,
            c.mc_survival,
            fmt_se(c.se_mc_cost),
            fmt_se(c.se_mc_survival),
            format!("{}/{}", c.n_feasible, c.replications),
            fmt_ref(rf.map(|r| r.q_cost)),
            fmt_ref(rf.map(|r| r.q_survival)),
            fmt_ref(rf.map(|r| r.mc_cost)),
            fmt_ref(rf.map(|r| r.mc_survival)),
        );
    }
    out
}

pub fn roman(mut n: usize) -> String {
    const DIGITS: [(usize, &str); 13] = [
        (1000, "M"),
        (900, "CM"),
        (500, "D"),
        (400, "CD"),
        (100, "C"),
        (90, "XC"),
        (50, "L"),
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
        (4, "IV"),
        (1, "I"),
    ];
    let mut s = String::new();
    for (v, d) in DIGITS {
        while n >= v {
            s.push_str(d);
            n -= v;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roman_labels() {
        let got: Vec<String> = (1..=7).map(roman).collect();
        assert_eq!(got, ["I", "II", "III", "IV", "V", "VI", "VII"]);
        assert_eq!(roman(49), "XLIX");
    }

    #[test]
    fn reference_lookup() {
        let row = reference(CorrelationLevel::Low, 26.0, 1000).unwrap();
        assert_eq!((row.mc_cost, row.mc_survival), (25.18, 1.25));
        assert_eq!(reference(CorrelationLevel::High, 30.0, 5000).unwrap().q_cost, 29.41);
        assert!(reference(CorrelationLevel::Low, 27.0, 1000).is_none());
    }
}
