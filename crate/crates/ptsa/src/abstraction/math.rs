use serde::{Deserialize, Serialize};

use super::AbstractionError;

/// A probability distribution over an ordered action set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueDistribution {
    pub support: Vec<usize>,
    pub probs: Vec<f64>,
}

impl ValueDistribution {
    pub fn new(support: Vec<usize>, probs: Vec<f64>) -> Result<Self, AbstractionError> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(AbstractionError::EmptySupport);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || probs.iter().any(|&p| p < 0.0) {
            return Err(AbstractionError::NotADistribution(sum));
        }
        Ok(Self { support, probs })
    }
}

/// Exponential-normalized value distribution over `support`, computed with
/// the max-shift trick so large Q values do not overflow.
pub fn softmax_q(support: &[usize], q_values: &[f64]) -> Result<ValueDistribution, AbstractionError> {
    if support.is_empty() || support.len() != q_values.len() {
        return Err(AbstractionError::EmptySupport);
    }
    if q_values.iter().any(|q| !q.is_finite()) {
        return Err(AbstractionError::NonFinite);
    }
    let max_q = q_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = q_values.iter().map(|q| (q - max_q).exp()).collect();
    let total: f64 = exps.iter().sum();
    ValueDistribution::new(support.to_vec(), exps.iter().map(|e| e / total).collect())
}

/// Jensen-Shannon divergence with base-2 logarithms, so the result lies in
/// `[0, 1]`. Zero probabilities contribute zero via the `0 log 0 = 0`
/// convention. Supports must match exactly.
pub fn js_divergence(p: &ValueDistribution, q: &ValueDistribution) -> Result<f64, AbstractionError> {
    if p.support != q.support {
        return Err(AbstractionError::SupportMismatch(p.support.clone(), q.support.clone()));
    }
    let mut div = 0.0;
    for (&pi, &qi) in p.probs.iter().zip(&q.probs) {
        let mi = 0.5 * (pi + qi);
        div += 0.5 * xlog2(pi, mi) + 0.5 * xlog2(qi, mi);
    }
    // Tiny negative values can appear from rounding when p == q.
    Ok(div.clamp(0.0, 1.0))
}

fn xlog2(x: f64, base: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * (x / base).log2()
    }
}
