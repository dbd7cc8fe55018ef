use serde::{Deserialize, Serialize};

use super::check_pair;
use crate::error::{Error, Result};
use crate::par;

/// Antisymmetric pairwise contrast `G(a, b) = -G(b, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ContrastFunction {
    /// `a - b`; yields Pearson.
    Difference,
    /// `sign(a - b)`; yields Kendall's τ̂.
    Sign,
    /// `(sign(a - m) - sign(b - m)) / 2` around a sample median `m`.
    Blomqvist { center: f64 },
}

impl ContrastFunction {
    /// Blomqvist contrast centred at the lower median of `sample`.
    pub fn blomqvist(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Empty);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let center = sorted[(sorted.len() - 1) / 2];
        Ok(ContrastFunction::Blomqvist { center })
    }

    pub fn apply(&self, a: f64, b: f64) -> f64 {
        match *self {
            ContrastFunction::Difference => a - b,
            ContrastFunction::Sign => sign(a - b),
            ContrastFunction::Blomqvist { center } => 0.5 * (sign(a - center) - sign(b - center)),
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sample G-correlation over all ordered pairs `i ≠ j`.
pub fn g_correlation(
    x: &[f64],
    y: &[f64],
    gx: &ContrastFunction,
    gy: &ContrastFunction,
) -> Result<f64> {
    let n = check_pair(x, y, 2)?;
    // Each unordered pair appears twice with identical products, so
    // summing i < j leaves the ratio unchanged.
    let rows = par::map_range(n, |i| {
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for j in i + 1..n {
            let a = gx.apply(x[i], x[j]);
            let b = gy.apply(y[i], y[j]);
            sxy += a * b;
            sxx += a * a;
            syy += b * b;
        }
        (sxy, sxx, syy)
    });
    let (sxy, sxx, syy) = rows
        .into_iter()
        .fold((0.0, 0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2));
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(Error::Degenerate("all pairwise contrasts are zero".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
