//! Least-squares gradient boosting with depth-one trees.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DesignMatrix, LearnerSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `x[feature] <= threshold` goes left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Stump<T> {
    pub feature: usize,
    pub threshold: T,
    pub left_value: T,
    pub right_value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct StumpEnsemble<T> {
    pub base: T,
    pub stumps: Vec<Stump<T>>,
}

impl<T: Scalar> StumpEnsemble<T> {
    pub fn predict(&self, row: &[T]) -> T {
        self.stumps.iter().fold(self.base, |acc, s| {
            acc + if row[s.feature] <= s.threshold { s.left_value } else { s.right_value }
        })
    }
}

struct Split<T> {
    gain: T,
    feature: usize,
    threshold: T,
    left_mean: T,
    right_mean: T,
}

pub(crate) fn fit_stumps<T: Scalar>(spec: &LearnerSpec, x: &DesignMatrix<T>, seed: u64) -> Result<StumpEnsemble<T>> {
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::Insufficient(format!("boosting needs at least 2 rows, got {n}")));
    }
    let p = x.n_cols();
    let y = x.response();
    let base = y.iter().copied().sum::<T>() / T::from_count(n);
    let lr = T::lit(spec.learning_rate);

    let order: Vec<Vec<u32>> = (0..p)
        .map(|j| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                x.get(a as usize, j)
                    .partial_cmp(&x.get(b as usize, j))
                    .expect("finite design")
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    let mut pred = vec![base; n];
    let mut resid = vec![T::zero(); n];
    let mut in_sample = vec![true; n];
    let subsampled = spec.subsample < 1.0;
    let m = if subsampled { ((spec.subsample * n as f64).round() as usize).clamp(1, n) } else { n };
    let mut stumps = Vec::with_capacity(spec.rounds);
    let mut sorted_vals: Vec<T> = Vec::with_capacity(n);
    let mut sorted_res: Vec<T> = Vec::with_capacity(n);

    for round in 0..spec.rounds {
        for i in 0..n {
            resid[i] = y[i] - pred[i];
        }
        if subsampled {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(round as u64);
            in_sample.iter_mut().for_each(|f| *f = false);
            for i in sample(&mut rng, n, m) {
                in_sample[i] = true;
            }
        }
        let mut best: Option<Split<T>> = None;
        for (j, ord) in order.iter().enumerate() {
            sorted_vals.clear();
            sorted_res.clear();
            for &i in ord {
                let i = i as usize;
                if in_sample[i] {
                    sorted_vals.push(x.get(i, j));
                    sorted_res.push(resid[i]);
                }
            }
            let total: T = sorted_res.iter().copied().sum();
            let cnt = sorted_res.len();
            let mut left = T::zero();
            for t in 0..cnt.saturating_sub(1) {
                left = left + sorted_res[t];
                let n_left = t + 1;
                let n_right = cnt - n_left;
                if n_left < spec.min_leaf {
                    continue;
                }
                if n_right < spec.min_leaf {
                    break;
                }
                if sorted_vals[t + 1] <= sorted_vals[t] {
                    continue;
                }
                let right = total - left;
                let (nl, nr) = (T::from_count(n_left), T::from_count(n_right));
                let gain = left * left / nl + right * right / nr;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split {
                        gain,
                        feature: j,
                        threshold: (sorted_vals[t] + sorted_vals[t + 1]) / T::lit(2.0),
                        left_mean: left / nl,
                        right_mean: right / nr,
                    });
                }
            }
        }
        let Some(split) = best else { break };
        let stump = Stump {
            feature: split.feature,
            threshold: split.threshold,
            left_value: lr * split.left_mean,
            right_value: lr * split.right_mean,
        };
        for (i, pv) in pred.iter_mut().enumerate() {
            *pv = *pv
                + if x.get(i, stump.feature) <= stump.threshold { stump.left_value } else { stump.right_value };
        }
        stumps.push(stump);
    }
    Ok(StumpEnsemble { base, stumps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::LearnerKind;

    fn spec(rounds: usize, min_leaf: usize) -> LearnerSpec {
        LearnerSpec { kind: LearnerKind::BoostedStumps, rounds, min_leaf, ..LearnerSpec::boosted_stumps() }
    }

    #[test]
    fn hand_traced_prediction() {
        let m = StumpEnsemble {
            base: 1.0,
            stumps: vec![Stump { feature: 0, threshold: 0.0, left_value: -1.0, right_value: 1.0 }],
        };
        assert_eq!(m.predict(&[0.5]), 2.0);
        assert_eq!(m.predict(&[0.0]), 0.0);
    }

    #[test]
    fn learns_a_step() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let y: Vec<f64> = xs.iter().map(|&x| if x < 20.0 { 1.0 } else { 5.0 }).collect();
        let d = DesignMatrix::new(vec!["x".into()], xs.clone(), y).unwrap();
        let m = fit_stumps(&LearnerSpec { learning_rate: 1.0, ..spec(1, 5) }, &d, 0).unwrap();
        assert_eq!(m.stumps.len(), 1);
        assert_eq!(m.stumps[0].threshold, 19.5);
        assert!((m.predict(&[3.0]) - 1.0).abs() < 1e-12);
        assert!((m.predict(&[30.0]) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn no_valid_split_stops_early() {
        let d = DesignMatrix::new(vec!["x".into()], vec![1.0; 6], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let m = fit_stumps(&spec(50, 1), &d, 0).unwrap();
        assert!(m.stumps.is_empty());
        assert_eq!(m.base, 3.5);
    }
}
