//! Pearson correlation with a two-tailed p-value from Student's t.
//!
//! With `df = n - 2` and `t = r * sqrt(df / (1 - r^2))`, the two-tailed
//! p-value `P(|T| >= |t|)` equals the regularized incomplete beta
//! `I_{df / (df + t^2)}(df / 2, 1 / 2)`, and `df / (df + t^2)` simplifies to
//! `1 - r^2`.

use serde::{Deserialize, Serialize};
use statrs::function::beta::checked_beta_reg;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PairedSamples {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSamples {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::invalid(format!("{} xs but {} ys", xs.len(), ys.len())));
        }
        if xs.len() < 3 {
            return Err(Error::invalid(format!("need at least 3 pairs, got {}", xs.len())));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples must be finite"));
        }
        Ok(PairedSamples { xs, ys })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (xs, ys) = pairs.into_iter().unzip();
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn pearson_r(samples: &PairedSamples) -> Result<Correlation> {
    let (xs, ys) = (&samples.xs, &samples.ys);
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedStatistic(
            "correlation with a zero-variance series".into(),
        ));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let n = xs.len();
    Ok(Correlation {
        r,
        p: two_tailed_p(r, n)?,
        n,
    })
}

/// Two-tailed p-value for correlation `r` over `n` pairs.
pub fn two_tailed_p(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid("p-value needs at least 3 pairs"));
    }
    let x = 1.0 - r * r;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let p = checked_beta_reg(df / 2.0, 0.5, x.min(1.0))
        .map_err(|e| Error::UndefinedStatistic(format!("incomplete beta: {e}")))?;
    Ok(p.clamp(0.0, 1.0))
}
