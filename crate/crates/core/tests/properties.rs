use listdtr::listsearch::{fit_clause, ClauseOutcome, ClauseSearchState};
use listdtr::regress::{self, DesignMatrix, FittedModel, StumpEnsemble};
use listdtr::sim::{Policy, SimConfig};
use listdtr::{
    binary_actions, fit_regime, generate_dataset, regime_distance, Action, Clause, CorrelationLevel, DecisionList, QTable,
    DgpParams, FeatureSpec, LearnerSpec, Regime, RegimeConfig, TrajectoryDataset,
};
use proptest::prelude::*;

fn table(qz: Vec<f64>, qy: Vec<f64>) -> QTable {
    QTable::from_values(1, binary_actions(), qz, qy).unwrap()
}

fn small_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-20i32..20).prop_map(|v| f64::from(v) / 4.0), n)
}

fn list_strategy(k: usize) -> impl Strategy<Value = DecisionList> {
    let clause = (0usize..2, any::<bool>(), -3i32..3, 0u32..2).prop_map(|(f, le, th, a)| {
        let name = if f == 0 { "w1" } else { "w2" };
        if le {
            Clause::le(name, f64::from(th), Action(a))
        } else {
            Clause::gt(name, f64::from(th), Action(a))
        }
    });
    (prop::collection::vec(clause, 0..3), 0u32..2).prop_map(move |(mut cs, last)| {
        cs.push(Clause::all(Action(last)));
        DecisionList::new(k, cs).unwrap()
    })
}

fn regime_strategy() -> impl Strategy<Value = Regime> {
    (list_strategy(1), list_strategy(2), list_strategy(3)).prop_map(|(a, b, c)| {
        Regime::new(vec![a, b, c], vec![10.0; 3], 0.0, "ols", vec![true; 3]).unwrap()
    })
}

proptest! {
    #[test]
    fn regime_distance_is_a_metric(a in regime_strategy(), b in regime_strategy(), c in regime_strategy()) {
        let d = |x: &Regime, y: &Regime| regime_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert!(d(&a, &b) <= 3);
        prop_assert_eq!(d(&a, &b) == 0, a == b);
    }

    #[test]
    fn unconstrained_rule_ignores_per_unit_shifts(
        qz in small_values(16),
        shift in small_values(8),
    ) {
        let qy = vec![1.0; 16];
        let shifted: Vec<f64> = qz.iter().enumerate().map(|(j, v)| v + shift[j / 2]).collect();
        let a = table(qz, qy.clone());
        let b = table(shifted, qy);
        for i in 0..8 {
            prop_assert_eq!(a.tilde_index(i), b.tilde_index(i));
            let t = a.tilde_index(i);
            prop_assert!(a.qz(i, t) >= a.qz(i, 1 - t));
        }
    }

    #[test]
    fn best_clause_value_grows_with_budget(
        qz in small_values(20),
        qy in small_values(20),
        col in small_values(10),
        lo in -3.0f64..3.0,
        extra in 0.0f64..3.0,
    ) {
        let t = table(qz, qy);
        let cols = vec![col];
        let value = |budget: f64| {
            let s = ClauseSearchState::new(&t, &cols, budget).unwrap();
            match fit_clause(&s, 0.05) {
                ClauseOutcome::Clause(c) => c.objective,
                ClauseOutcome::Skip => s.current_psi().0,
                ClauseOutcome::Infeasible => f64::NEG_INFINITY,
            }
        };
        prop_assert!(value(lo + extra) >= value(lo));
    }

    #[test]
    fn chosen_clause_meets_budget(
        qz in small_values(20),
        qy in small_values(20),
        col in small_values(10),
        budget in -3.0f64..3.0,
    ) {
        let t = table(qz, qy);
        let cols = vec![col];
        let s = ClauseSearchState::new(&t, &cols, budget).unwrap();
        match fit_clause(&s, 0.0) {
            ClauseOutcome::Clause(c) => prop_assert!(c.psi_y < budget),
            ClauseOutcome::Skip => prop_assert!(s.current_psi().1 < budget),
            ClauseOutcome::Infeasible => {}
        }
    }
}

fn design(rows: &[Vec<f64>], y: &[f64]) -> DesignMatrix<f64> {
    let p = rows[0].len();
    let names = (0..p).map(|j| format!("x{j}")).collect();
    DesignMatrix::new(names, rows.concat(), y.to_vec()).unwrap()
}

/// Solves (XᵀX)β = Xᵀy by Gaussian elimination with partial pivoting.
fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len() + 1;
    let aug: Vec<Vec<f64>> = rows.iter().map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect()).collect();
    let mut m = vec![vec![0.0; p + 1]; p];
    for (r, &yi) in aug.iter().zip(y) {
        for a in 0..p {
            for b in 0..p {
                m[a][b] += r[a] * r[b];
            }
            m[a][p] += r[a] * yi;
        }
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        m.swap(c, piv);
        for r in 0..p {
            if r != c {
                let f = m[r][c] / m[c][c];
                let pivot_row = m[c].clone();
                for (x, v) in m[r].iter_mut().zip(pivot_row).skip(c) {
                    *x -= f * v;
                }
            }
        }
    }
    (0..p).map(|i| m[i][p] / m[i][i]).collect()
}

fn rows_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (12usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ols_matches_normal_equations((rows, y) in rows_strategy()) {
        let FittedModel::Ols(m) = regress::fit(&LearnerSpec::ols(), &design(&rows, &y), 0).unwrap() else {
            unreachable!()
        };
        let beta = normal_equations(&rows, &y);
        prop_assert!((m.intercept - beta[0]).abs() < 1e-8);
        for (a, b) in m.coefficients.iter().zip(&beta[1..]) {
            prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn ols_residuals_are_orthogonal((rows, y) in rows_strategy()) {
        let m = regress::fit(&LearnerSpec::ols(), &design(&rows, &y), 0).unwrap();
        let resid: Vec<f64> = rows.iter().zip(&y).map(|(r, yi)| yi - m.predict(r)).collect();
        prop_assert!(resid.iter().sum::<f64>().abs() < 1e-8);
        for j in 0..3 {
            let dot: f64 = rows.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
            prop_assert!(dot.abs() < 1e-7);
        }
    }

    #[test]
    fn boosting_training_loss_never_rises((rows, y) in rows_strategy()) {
        let spec = LearnerSpec { rounds: 30, min_leaf: 2, ..LearnerSpec::boosted_stumps() };
        let FittedModel::Stumps(full) = regress::fit(&spec, &design(&rows, &y), 3).unwrap() else {
            unreachable!()
        };
        let loss = |m: &StumpEnsemble<f64>| -> f64 {
            rows.iter().zip(&y).map(|(r, yi)| (yi - m.predict(r)).powi(2)).sum()
        };
        let mut prev = f64::INFINITY;
        for t in 0..=full.stumps.len() {
            let part = StumpEnsemble { base: full.base, stumps: full.stumps[..t].to_vec() };
            let l = loss(&part);
            prop_assert!(l <= prev + 1e-9 * prev.abs().max(1.0));
            prev = l;
        }
    }
}

fn simulate(n: usize, seed: u64) -> TrajectoryDataset {
    let cfg = SimConfig::<f64> { n_units: n, level: CorrelationLevel::Low, seed, policy: Policy::Observational };
    generate_dataset(&cfg, &DgpParams::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn csv_round_trip(seed in any::<u64>(), n in 1usize..60) {
        let data = simulate(n, seed);
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = TrajectoryDataset::read_csv(&buf[..]).unwrap();
        prop_assert_eq!(&back, &data);
        let mut again = Vec::new();
        back.write_csv(&mut again).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn fitted_regimes_respect_budget(seed in any::<u64>(), tau in 20.0f64..40.0) {
        let data = simulate(400, seed);
        let rc = RegimeConfig::equal_split(tau, 3, 3, 0.01, LearnerSpec::ols(), FeatureSpec::markov());
        let fitted = fit_regime(&data, &rc).unwrap();
        for (k, (s, &ok)) in fitted.stages.iter().zip(fitted.regime.feasible()).enumerate() {
            if ok {
                prop_assert!(s.psi_y < rc.tail_budget(k + 1));
            }
        }
        if fitted.regime.all_feasible() {
            prop_assert!(fitted.q_estimate().mean_cost < tau);
        }
    }

    #[test]
    fn pipeline_is_deterministic(seed in any::<u64>()) {
        let a = simulate(300, seed);
        prop_assert_eq!(&a, &simulate(300, seed));
        let rc = RegimeConfig::equal_split(28.0, 3, 3, 0.01, LearnerSpec::ols(), FeatureSpec::markov());
        let r1 = fit_regime(&a, &rc).unwrap().regime;
        let r2 = fit_regime(&a, &rc).unwrap().regime;
        prop_assert_eq!(r1.to_json().unwrap(), r2.to_json().unwrap());
        prop_assert_eq!(Regime::from_json(&r1.to_json().unwrap()).unwrap(), r1);
    }

    #[test]
    fn larger_cohorts_extend_smaller_ones(seed in any::<u64>(), n in 1usize..50, extra in 1usize..50) {
        let small = simulate(n, seed);
        let big = simulate(n + extra, seed);
        for u in 0..n {
            prop_assert_eq!(small.unit_records(u), big.unit_records(u));
        }
    }
}
