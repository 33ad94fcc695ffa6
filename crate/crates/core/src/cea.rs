//! Incremental cost-effectiveness ratios and sequential selection of the
//! most cost-effective regime along a budget ladder.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regime::RegimeSummary;
use crate::scalar::Scalar;

/// ICER of switching from a comparator to a candidate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "SCREAMING_SNAKE_CASE")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum Icer<T> {
    /// ΔY / ΔZ with both differences nonzero and the same sign, or ΔY = 0.
    Ratio(T),
    /// No effectiveness gain at no cost saving.
    Dominated,
    /// Effectiveness gain at no extra cost (or equal effectiveness, no extra cost).
    Dominates,
}

impl<T: Scalar> Icer<T> {
    pub fn ratio(&self) -> Option<T> {
        match self {
            Icer::Ratio(r) => Some(*r),
            _ => None,
        }
    }
}

/// `(cost(d2) - cost(d1)) / (eff(d2) - eff(d1))`, with dominance signals
/// instead of a ratio where the comparison is one-sided.
pub fn icer<T: Scalar>(d2: &RegimeSummary<T>, d1: &RegimeSummary<T>) -> Icer<T> {
    let dz = d2.mean_effectiveness - d1.mean_effectiveness;
    let dy = d2.mean_cost - d1.mean_cost;
    let zero = T::zero();
    if dz == zero {
        if dy > zero {
            Icer::Dominated
        } else {
            Icer::Dominates
        }
    } else if dz < zero && dy >= zero {
        Icer::Dominated
    } else if dz > zero && dy < zero {
        Icer::Dominates
    } else {
        Icer::Ratio(dy / dz)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LadderEntry<T> {
    pub label: String,
    pub tau: T,
    pub summary: RegimeSummary<T>,
}

/// Candidate regimes ordered by strictly increasing budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CandidateLadder<T> {
    pub entries: Vec<LadderEntry<T>>,
    /// Willingness to pay per unit of effectiveness, in cost units.
    pub wtp: T,
}

impl<T: Scalar> CandidateLadder<T> {
    pub fn new(entries: Vec<LadderEntry<T>>, wtp: T) -> Result<Self> {
        let ladder = CandidateLadder { entries, wtp };
        ladder.validate()?;
        Ok(ladder)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Argument("empty candidate ladder".into()));
        }
        if !(self.wtp >= T::zero()) {
            return Err(Error::Argument("willingness to pay must be non-negative".into()));
        }
        if self.entries.windows(2).any(|w| !(w[0].tau < w[1].tau)) {
            return Err(Error::Argument("ladder budgets must be strictly increasing".into()));
        }
        let src = self.entries[0].summary.source;
        if self.entries.iter().any(|e| e.summary.source != src) {
            return Err(Error::Argument("ladder mixes summary sources".into()));
        }
        if self.entries.iter().any(|e| e.summary.mean_cost < T::zero()) {
            return Err(Error::Argument("negative mean cost".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    /// First rung; the starting comparator.
    Initial,
    Adopt,
    Reject,
    Dominated,
    Dominates,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CeaStep<T> {
    pub label: String,
    pub tau: T,
    pub mean_effectiveness: T,
    pub mean_cost: T,
    pub icer: Option<Icer<T>>,
    pub comparator: Option<String>,
    pub comparator_index: Option<usize>,
    pub decision: Decision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CeaReport<T> {
    pub wtp: T,
    pub selected_index: usize,
    pub selected_label: String,
    pub steps: Vec<CeaStep<T>>,
}

/// Walks the ladder once: each rung is compared with the current most
/// cost-effective regime and adopted when it dominates, or when its ICER
/// is below the willingness to pay (above it, for a cheaper and less
/// effective rung).
pub fn select_cost_effective<T: Scalar>(ladder: &CandidateLadder<T>) -> Result<CeaReport<T>> {
    ladder.validate()?;
    let first = &ladder.entries[0];
    let mut current = 0;
    let mut steps = vec![CeaStep {
        label: first.label.clone(),
        tau: first.tau,
        mean_effectiveness: first.summary.mean_effectiveness,
        mean_cost: first.summary.mean_cost,
        icer: None,
        comparator: None,
        comparator_index: None,
        decision: Decision::Initial,
    }];
    for (j, e) in ladder.entries.iter().enumerate().skip(1) {
        let base = &ladder.entries[current];
        let value = icer(&e.summary, &base.summary);
        let decision = match value {
            Icer::Dominated => Decision::Dominated,
            Icer::Dominates => Decision::Dominates,
            Icer::Ratio(r) => {
                let gains = e.summary.mean_effectiveness > base.summary.mean_effectiveness;
                if (gains && r < ladder.wtp) || (!gains && r > ladder.wtp) {
                    Decision::Adopt
                } else {
                    Decision::Reject
                }
            }
        };
        steps.push(CeaStep {
            label: e.label.clone(),
            tau: e.tau,
            mean_effectiveness: e.summary.mean_effectiveness,
            mean_cost: e.summary.mean_cost,
            icer: Some(value),
            comparator: Some(base.label.clone()),
            comparator_index: Some(current),
            decision,
        });
        if matches!(decision, Decision::Adopt | Decision::Dominates) {
            current = j;
        }
    }
    Ok(CeaReport {
        wtp: ladder.wtp,
        selected_index: current,
        selected_label: ladder.entries[current].label.clone(),
        steps,
    })
}

impl<T: Scalar> CeaReport<T> {
    /// Fixed-width table: Regime | Constraint | Survival | Cost | ICER |
    /// Comparator, two decimals, the selected row marked with `*`.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>10} {:>10} {:>10}  {:<10}",
            "Regime", "Constraint", "Survival", "Cost", "ICER", "Comparator"
        );
        for (i, s) in self.steps.iter().enumerate() {
            let mark = if i == self.selected_index { "*" } else { "" };
            let icer = match &s.icer {
                None => "NA".to_string(),
                Some(Icer::Ratio(r)) => format!("{:.2}", r.to_f64_lossy()),
                Some(Icer::Dominated) => "dominated".to_string(),
                Some(Icer::Dominates) => "dominates".to_string(),
            };
            let _ = writeln!(
                out,
                "{:<10} {:>10} {:>10.2} {:>10.2} {:>10}  {:<10}",
                format!("{}{mark}", s.label),
                fmt_tau(s.tau.to_f64_lossy()),
                s.mean_effectiveness.to_f64_lossy(),
                s.mean_cost.to_f64_lossy(),
                icer,
                s.comparator.as_deref().unwrap_or("NA"),
            );
        }
        out
    }
}

fn fmt_tau(t: f64) -> String {
    if t.is_infinite() {
        "inf".into()
    } else if t.fract() == 0.0 {
        format!("{t:.0}")
    } else {
        format!("{t:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regime::SummarySource;

    fn s(z: f64, y: f64) -> RegimeSummary<f64> {
        RegimeSummary::new("", z, y, SummarySource::QEstimate)
    }

    #[test]
    fn icer_cases() {
        let r = icer(&s(1.44, 29.76), &s(1.35, 25.98)).ratio().unwrap();
        assert!((r - 42.0).abs() < 1e-9);
        assert_eq!(icer(&s(2.0, 5.0), &s(1.0, 5.0)), Icer::Ratio(0.0));
        assert_eq!(icer(&s(1.0, 6.0), &s(1.0, 5.0)), Icer::Dominated);
        assert_eq!(icer(&s(1.0, 5.0), &s(1.0, 5.0)), Icer::Dominates);
        assert_eq!(icer(&s(0.5, 6.0), &s(1.0, 5.0)), Icer::Dominated);
        assert_eq!(icer(&s(1.5, 4.0), &s(1.0, 5.0)), Icer::Dominates);
    }

    fn ladder(rows: &[(f64, f64, f64)], wtp: f64) -> CandidateLadder<f64> {
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, &(tau, z, y))| LadderEntry { label: format!("R{i}"), tau, summary: s(z, y) })
            .collect();
        CandidateLadder::new(entries, wtp).unwrap()
    }

    #[test]
    fn single_entry_and_nothing_adoptable() {
        let r = select_cost_effective(&ladder(&[(26.0, 1.3, 25.0)], 50.0)).unwrap();
        assert_eq!(r.selected_index, 0);
        let r = select_cost_effective(&ladder(&[(26.0, 1.3, 25.0), (30.0, 1.4, 30.0)], 0.0)).unwrap();
        assert_eq!(r.selected_index, 0);
        assert_eq!(r.steps[1].decision, Decision::Reject);
    }

    #[test]
    fn cheaper_less_effective_rung() {
        // Saves 10 per unit of effectiveness lost: adopt only if that exceeds wtp.
        let l = ladder(&[(26.0, 1.5, 30.0), (30.0, 1.4, 29.0)], 5.0);
        assert_eq!(select_cost_effective(&l).unwrap().selected_index, 1);
        let l = ladder(&[(26.0, 1.5, 30.0), (30.0, 1.4, 29.0)], 50.0);
        assert_eq!(select_cost_effective(&l).unwrap().selected_index, 0);
    }

    #[test]
    fn ladder_validation() {
        let e = |tau: f64| LadderEntry { label: String::new(), tau, summary: s(1.0, 1.0) };
        assert!(CandidateLadder::new(vec![], 50.0).is_err());
        assert!(CandidateLadder::new(vec![e(2.0), e(2.0)], 50.0).is_err());
        let mut mixed = vec![e(1.0), e(2.0)];
        mixed[1].summary.source = SummarySource::MonteCarlo;
        assert!(CandidateLadder::new(mixed, 50.0).is_err());
    }

    #[test]
    fn text_table_marks_selection() {
        let l = ladder(&[(26.0, 1.35, 25.98), (30.0, 1.44, 29.76)], 50.0);
        let t = select_cost_effective(&l).unwrap().to_text_table();
        assert!(t.lines().next().unwrap().starts_with("Regime"));
        assert!(t.contains("R1*"));
        assert!(t.contains("42.00"));
    }

    #[test]
    fn works_in_single_precision() {
        let a = RegimeSummary::new("", 1.0f32, 10.0, SummarySource::QEstimate);
        let b = RegimeSummary::new("", 1.5f32, 30.0, SummarySource::QEstimate);
        assert_eq!(icer(&b, &a), Icer::Ratio(40.0));
    }
}
