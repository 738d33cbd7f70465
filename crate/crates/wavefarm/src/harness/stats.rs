//! Summary statistics and Friedman ranks of final powers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Statistics of the final best powers of one algorithm across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for one value.
    pub std: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParams("statistics of an empty sample".into()));
        }
        let n = values.len() as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        };
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            max: sorted[sorted.len() - 1],
            min: sorted[0],
            mean,
            median,
            std,
        })
    }

    /// `(label, value)` rows in the order Max, Min, Mean, Median, Std.
    pub fn rows(&self) -> [(&'static str, f64); 5] {
        [
            ("Max", self.max),
            ("Min", self.min),
            ("Mean", self.mean),
            ("Median", self.median),
            ("Std", self.std),
        ]
    }
}

/// Which observations enter the Friedman ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FriedmanMode {
    /// Every seed is a problem instance.
    #[default]
    PerRun,
    /// One instance holding each algorithm's mean final power.
    PerMethodMean,
}

/// Average rank of each algorithm, where `results[instance][algorithm]` is a
/// final power. Within an instance the highest power gets rank 1 and ties
/// share the mean of the ranks they span.
pub fn friedman_ranks(results: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = results.first().map_or(0, Vec::len);
    if k == 0 || results.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidParams("Friedman ranking needs a non-empty rectangular table".into()));
    }
    let mut totals = vec![0.0; k];
    for row in results {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
        let mut i = 0;
        while i < k {
            let mut j = i;
            while j + 1 < k && row[order[j + 1]] == row[order[i]] {
                j += 1;
            }
            // positions i..=j hold ranks i+1..=j+1
            let rank = (i + j) as f64 / 2.0 + 1.0;
            for &a in &order[i..=j] {
                totals[a] += rank;
            }
            i = j + 1;
        }
    }
    Ok(totals.into_iter().map(|t| t / results.len() as f64).collect())
}
