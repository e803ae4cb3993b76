use serde::{Deserialize, Serialize};

use super::encoding::{ColumnKind, FeatureSpace, BIN_DOMAIN};

/// Semantic-category counts of this value or more share the top bucket.
pub const COUNT_CAP: u32 = BIN_DOMAIN - 1;

/// Value of `column` as a categorical symbol in `0..BIN_DOMAIN`.
pub fn symbol(space: &FeatureSpace, column: usize, raw: u32) -> usize {
    match space.kind(column) {
        ColumnKind::Bin => raw.min(BIN_DOMAIN - 1) as usize,
        ColumnKind::Count => raw.min(COUNT_CAP) as usize,
    }
}

/// Per-column categorical frequencies with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalCounts {
    pub alpha: f64,
    pub rows: u64,
    pub counts: Vec<[u64; BIN_DOMAIN as usize]>,
}

impl CategoricalCounts {
    pub fn fit(space: &FeatureSpace, rows: &[Vec<u32>], alpha: f64) -> Self {
        let mut counts = vec![[0u64; BIN_DOMAIN as usize]; space.width()];
        for row in rows {
            for (c, &x) in row.iter().enumerate() {
                counts[c][symbol(space, c, x)] += 1;
            }
        }
        CategoricalCounts { alpha, rows: rows.len() as u64, counts }
    }

    /// `(count + alpha) / (rows + alpha * domain)`.
    pub fn likelihood(&self, column: usize, symbol: usize) -> f64 {
        let denom = self.rows as f64 + self.alpha * f64::from(BIN_DOMAIN);
        (self.counts[column][symbol] as f64 + self.alpha) / denom
    }

    pub fn max_likelihood(&self, column: usize) -> f64 {
        (0..BIN_DOMAIN as usize).map(|s| self.likelihood(column, s)).fold(0.0, f64::max)
    }

    pub fn log_likelihood(&self, space: &FeatureSpace, row: &[u32]) -> f64 {
        row.iter().enumerate().map(|(c, &x)| self.likelihood(c, symbol(space, c, x)).ln()).sum()
    }

    fn log_ratio(&self, space: &FeatureSpace, column: usize, raw: u32) -> f64 {
        (self.likelihood(column, symbol(space, column, raw)) / self.max_likelihood(column)).ln()
    }

    /// Geometric mean of `p(x_c) / max_v p(v)` over the components, in
    /// (0, 1]. Each bin column is one component; the F2 count columns
    /// together form one more, their log ratios averaged.
    pub fn normalized_score(&self, space: &FeatureSpace, row: &[u32]) -> f64 {
        let bins = space.bin_columns.len();
        let mut total: f64 = (0..bins).map(|c| self.log_ratio(space, c, row[c])).sum();
        let mut components = bins;
        if row.len() > bins {
            let bag: f64 = (bins..row.len()).map(|c| self.log_ratio(space, c, row[c])).sum();
            total += bag / (row.len() - bins) as f64;
            components += 1;
        }
        (total / components as f64).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    pub positive: CategoricalCounts,
    /// Present only for models trained with real negatives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative: Option<CategoricalCounts>,
}

impl NaiveBayesParams {
    /// One-class: normalized positive likelihood. Two-class: posterior of the
    /// positive class with empirical priors.
    pub fn score(&self, space: &FeatureSpace, row: &[u32]) -> f64 {
        match &self.negative {
            None => self.positive.normalized_score(space, row),
            Some(neg) => {
                let n = (self.positive.rows + neg.rows) as f64;
                let lp = (self.positive.rows as f64 / n).ln() + self.positive.log_likelihood(space, row);
                let ln = (neg.rows as f64 / n).ln() + neg.log_likelihood(space, row);
                1.0 / (1.0 + (ln - lp).exp())
            }
        }
    }
}

/// Value at index `floor(tau * (n - 1))` of the ascending scores.
pub fn lower_quantile(scores: &[f64], tau: f64) -> f64 {
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let idx = (tau * (s.len() - 1) as f64).floor() as usize;
    s[idx.min(s.len() - 1)]
}
