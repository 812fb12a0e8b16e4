//! Multi-output basket scores.
//!
//! Every score is computed per (real, predicted) pair and then averaged over
//! the evaluated pairs. With filtering on, products where both quantities are
//! zero are dropped first; an empty filtered pair counts as a perfect match.

use serde::{Deserialize, Serialize};

use crate::basket::ProductBasket;
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoredPair {
    real: Vec<u32>,
    predicted: Vec<u32>,
}

impl ScoredPair {
    pub fn new(real: &ProductBasket, predicted: &ProductBasket) -> Result<Self> {
        Self::from_slices(real.quantities(), predicted.quantities())
    }

    pub fn from_slices(real: &[u32], predicted: &[u32]) -> Result<Self> {
        if real.len() != predicted.len() {
            return Err(Error::invalid(format!(
                "basket length mismatch: real {} vs predicted {}",
                real.len(),
                predicted.len()
            )));
        }
        Ok(ScoredPair {
            real: real.to_vec(),
            predicted: predicted.to_vec(),
        })
    }

    pub fn real(&self) -> &[u32] {
        &self.real
    }

    pub fn predicted(&self) -> &[u32] {
        &self.predicted
    }

    pub fn len(&self) -> usize {
        self.real.len()
    }

    pub fn is_empty(&self) -> bool {
        self.real.is_empty()
    }

    /// The same pair with real and predicted swapped.
    pub fn swapped(&self) -> Self {
        ScoredPair {
            real: self.predicted.clone(),
            predicted: self.real.clone(),
        }
    }

    fn components(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.real
            .iter()
            .zip(&self.predicted)
            .map(|(&y, &yh)| (f64::from(y), f64::from(yh)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricConfig {
    pub epsilon: f64,
    pub filter_zero_pairs: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            epsilon: DEFAULT_EPSILON,
            filter_zero_pairs: true,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Drops the products where both quantities are zero, keeping order.
pub fn filter_pairs(pair: &ScoredPair) -> ScoredPair {
    let (real, predicted) = pair
        .real
        .iter()
        .zip(&pair.predicted)
        .filter(|(&y, &yh)| y != 0 || yh != 0)
        .map(|(&y, &yh)| (y, yh))
        .unzip();
    ScoredPair { real, predicted }
}

/// 1 when the baskets are identical (two empty baskets included), else 0.
pub fn zero_one(pair: &ScoredPair) -> f64 {
    if pair.real == pair.predicted {
        1.0
    } else {
        0.0
    }
}

fn mean_over<F: Fn(f64, f64) -> f64>(pair: &ScoredPair, empty: f64, f: F) -> f64 {
    if pair.is_empty() {
        return empty;
    }
    pair.components().map(|(y, yh)| f(y, yh)).sum::<f64>() / pair.len() as f64
}

/// Fraction of products whose quantity is wrong.
pub fn hamming(pair: &ScoredPair) -> f64 {
    mean_over(pair, 0.0, |y, yh| if y != yh { 1.0 } else { 0.0 })
}

/// Hamming distance with partial credit `min/max` for wrong quantities.
pub fn augmented_hamming(pair: &ScoredPair) -> f64 {
    mean_over(pair, 0.0, |y, yh| {
        let f = if y == yh { 1.0 } else { y.min(yh) / y.max(yh) };
        1.0 - f
    })
}

/// Mean of `min(1, max(yh, eps) / max(y, eps))`.
pub fn prediction_score(pair: &ScoredPair, cfg: &MetricConfig) -> f64 {
    let eps = cfg.epsilon;
    mean_over(pair, 1.0, |y, yh| (yh.max(eps) / y.max(eps)).min(1.0))
}

/// Mean of `min(1, max(y, eps) / max(yh, eps))`.
pub fn production_score(pair: &ScoredPair, cfg: &MetricConfig) -> f64 {
    let eps = cfg.epsilon;
    mean_over(pair, 1.0, |y, yh| (y.max(eps) / yh.max(eps)).min(1.0))
}

pub fn area_score(pair: &ScoredPair, cfg: &MetricConfig) -> f64 {
    prediction_score(pair, cfg) * production_score(pair, cfg)
}

/// The six scores for one pair, in report orientation (higher is better).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairScores {
    pub s_z: f64,
    pub one_minus_dh: f64,
    pub one_minus_dh_plus: f64,
    pub s_pre: f64,
    pub s_pro: f64,
    pub s_pro_x_pre: f64,
}

pub fn score_pair(pair: &ScoredPair, cfg: &MetricConfig) -> PairScores {
    let filtered;
    let pair = if cfg.filter_zero_pairs {
        filtered = filter_pairs(pair);
        &filtered
    } else {
        pair
    };
    let s_pre = prediction_score(pair, cfg);
    let s_pro = production_score(pair, cfg);
    PairScores {
        s_z: zero_one(pair),
        one_minus_dh: 1.0 - hamming(pair),
        one_minus_dh_plus: 1.0 - augmented_hamming(pair),
        s_pre,
        s_pro,
        s_pro_x_pre: s_pre * s_pro,
    }
}

/// Averaged scores over a set of predictions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub s_z: f64,
    #[serde(rename = "one_minus_dH")]
    pub one_minus_dh: f64,
    #[serde(rename = "one_minus_dHplus")]
    pub one_minus_dh_plus: f64,
    pub s_pre: f64,
    pub s_pro: f64,
    pub s_pro_x_pre: f64,
    #[serde(rename = "n")]
    pub n_evaluated: usize,
}

impl ScoreReport {
    pub fn values(&self) -> [f64; 6] {
        [
            self.s_z,
            self.one_minus_dh,
            self.one_minus_dh_plus,
            self.s_pre,
            self.s_pro,
            self.s_pro_x_pre,
        ]
    }

    pub const LABELS: [&'static str; 6] = [
        "s_z",
        "one_minus_dH",
        "one_minus_dHplus",
        "s_pre",
        "s_pro",
        "s_pro_x_pre",
    ];

    /// Unweighted mean of several reports (one per run); `n` is the total.
    pub fn mean(reports: &[ScoreReport]) -> Result<ScoreReport> {
        if reports.is_empty() {
            return Err(Error::invalid("no reports to average"));
        }
        let k = reports.len() as f64;
        let avg = |f: fn(&ScoreReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
        Ok(ScoreReport {
            s_z: avg(|r| r.s_z),
            one_minus_dh: avg(|r| r.one_minus_dh),
            one_minus_dh_plus: avg(|r| r.one_minus_dh_plus),
            s_pre: avg(|r| r.s_pre),
            s_pro: avg(|r| r.s_pro),
            s_pro_x_pre: avg(|r| r.s_pro_x_pre),
            n_evaluated: reports.iter().map(|r| r.n_evaluated).sum(),
        })
    }
}

/// Scores every pair and averages each score, summing in pair order.
pub fn evaluate(pairs: &[ScoredPair], cfg: &MetricConfig) -> Result<ScoreReport> {
    cfg.validate()?;
    let Some(first) = pairs.first() else {
        return Err(Error::invalid("nothing to evaluate"));
    };
    if pairs.iter().any(|p| p.len() != first.len()) {
        return Err(Error::invalid("baskets differ in length across pairs"));
    }
    let mut acc = [0.0f64; 6];
    for pair in pairs {
        let s = score_pair(pair, cfg);
        for (a, v) in acc.iter_mut().zip([
            s.s_z,
            s.one_minus_dh,
            s.one_minus_dh_plus,
            s.s_pre,
            s.s_pro,
            s.s_pro_x_pre,
        ]) {
            *a += v;
        }
    }
    let n = pairs.len() as f64;
    Ok(ScoreReport {
        s_z: acc[0] / n,
        one_minus_dh: acc[1] / n,
        one_minus_dh_plus: acc[2] / n,
        s_pre: acc[3] / n,
        s_pro: acc[4] / n,
        s_pro_x_pre: acc[5] / n,
        n_evaluated: pairs.len(),
    })
}
