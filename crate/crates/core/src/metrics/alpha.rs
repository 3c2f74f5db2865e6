//! Krippendorff's alpha with the interval difference function
//! `delta(v, v') = (v - v')^2`.
//!
//! Only pairable values count: those in units (items) holding at least two
//! values. With `n` pairable values in total and `m_u` in unit `u`:
//!
//! ```text
//! D_o = 1/n * sum_u 1/(m_u - 1) * sum_{i != j in u} delta(v_i, v_j)
//! D_e = 1/(n (n - 1)) * sum_{i != j over all pairable values} delta(v_i, v_j)
//! alpha = 1 - D_o / D_e
//! ```
//!
//! `sum_{i != j} (v_i - v_j)^2 = 2 m * sum (v_i - mean)^2`, so both sums are
//! computed from within-group squared deviations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Items x annotators grid of optional ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementMatrix {
    rows: Vec<Vec<Option<f64>>>,
    annotators: usize,
}

impl AgreementMatrix {
    pub fn new(rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let annotators = rows.first().map_or(0, Vec::len);
        if annotators < 2 {
            return Err(Error::invalid("agreement needs at least 2 annotators"));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != annotators) {
            return Err(Error::invalid(format!(
                "item {i} has {} cells, expected {annotators}",
                rows[i].len()
            )));
        }
        if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("ratings must be finite"));
        }
        if !rows.iter().any(|r| r.iter().flatten().count() >= 2) {
            return Err(Error::invalid("no item has two or more ratings"));
        }
        Ok(AgreementMatrix { rows, annotators })
    }

    pub fn items(&self) -> usize {
        self.rows.len()
    }

    pub fn annotators(&self) -> usize {
        self.annotators
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }
}

fn sum_sq_dev(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum()
}

pub fn krippendorff_alpha_interval(matrix: &AgreementMatrix) -> Result<f64> {
    let units: Vec<Vec<f64>> = matrix
        .rows
        .iter()
        .map(|r| r.iter().flatten().copied().collect::<Vec<f64>>())
        .filter(|u| u.len() >= 2)
        .collect();
    let pooled: Vec<f64> = units.iter().flatten().copied().collect();
    let n = pooled.len() as f64;

    let observed: f64 = units
        .iter()
        .map(|u| {
            let m = u.len() as f64;
            2.0 * m * sum_sq_dev(u) / (m - 1.0)
        })
        .sum::<f64>()
        / n;
    let expected = 2.0 * n * sum_sq_dev(&pooled) / (n * (n - 1.0));

    if expected == 0.0 {
        return Err(Error::UndefinedStatistic(
            "all pairable values are identical; expected disagreement is zero".into(),
        ));
    }
    Ok(1.0 - observed / expected)
}
