//! Dependence measures on coefficient vectors and their confidence intervals.

mod contrast;
mod intervals;
mod kendall;
mod partial;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use contrast::{g_correlation, ContrastFunction};
pub use intervals::{
    fisher_ci, kendall_ci, kendall_interval, partial_ci, semipartial_ci, z_quantile, VarianceMode,
};
pub use kendall::{kendall_tau, kendall_tau_oracle, KendallStats};
pub use partial::{
    partial_correlation, partial_from_matrix, semipartial_correlation, COLLINEARITY_TOLERANCE,
};

/// How an interval was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Fisher,
    FisherBiasCorrected,
    KendallAsymptotic,
    KendallExactVariance,
}

/// Point estimate with a two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub n_eff: usize,
    pub method: CiMethod,
}

impl IntervalEstimate {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_pair(x: &[f64], y: &[f64], min_len: usize) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min_len {
        return Err(Error::InsufficientSample {
            n: x.len(),
            required: min_len,
        });
    }
    Ok(x.len())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(Error::Degenerate(format!(
            "zero sample variance ({})",
            if !(sxx > 0.0) { "x" } else { "y" }
        )));
    }
    // sqrt of the product is exact for x == y, so identical inputs give 1.
    let denom = match (sxx * syy).sqrt() {
        d if d.is_finite() && d > 0.0 => d,
        _ => sxx.sqrt() * syy.sqrt(),
    };
    let r = sxy / denom;
    if !r.is_finite() {
        return Err(Error::Degenerate("non-finite correlation".into()));
    }
    Ok(r.clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1., 2., 3., 4.], &[2., 4., 6., 8.]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1., 2., 3.], &[3., 2., 1.]).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn pearson_degenerate_is_an_error() {
        assert!(matches!(
            pearson(&[1., 1., 1.], &[1., 2., 3.]),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            pearson(&[1., 2.], &[1., 2., 3.]),
            Err(Error::LengthMismatch(_))
        ));
        assert!(matches!(
            pearson(&[1.], &[1.]),
            Err(Error::InsufficientSample { .. })
        ));
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            scale in 0.01f64..50.0,
            offset in -100.0f64..100.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                let xs: Vec<f64> = x.iter().map(|v| scale * v + offset).collect();
                let xn: Vec<f64> = x.iter().map(|v| -scale * v + offset).collect();
                let rs = pearson(&xs, &y).unwrap();
                let rn = pearson(&xn, &y).unwrap();
                prop_assert!((rs - r).abs() < 1e-12);
                prop_assert!((rn + r).abs() < 1e-12);
            }
        }
    }
}
