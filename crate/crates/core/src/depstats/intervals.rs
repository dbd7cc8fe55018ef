use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{CiMethod, IntervalEstimate, KendallStats};
use crate::error::{Error, Result};

/// Variance used for Kendall intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// `2(2n+5) / (9n(n-1))`.
    #[default]
    Asymptotic,
    /// Concordance-based small-sample formula; negative values are an error.
    Exact,
    /// As `Exact`, but falls back to the asymptotic variance when negative.
    ExactOrAsymptotic,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Standard normal quantile `z_{1-alpha/2}`.
pub fn z_quantile(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(normal.inverse_cdf(1.0 - alpha / 2.0))
}

fn check_r(r: f64) -> Result<()> {
    if r.is_nan() || r.abs() > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "correlation {r} outside [-1, 1]"
        )));
    }
    if r.abs() == 1.0 {
        return Err(Error::DegenerateInterval);
    }
    Ok(())
}

/// Interval `tanh(center ± z·se)`; the estimate is `tanh(center)`.
fn z_interval(center: f64, se: f64, alpha: f64, n_eff: usize, method: CiMethod) -> Result<IntervalEstimate> {
    let half = z_quantile(alpha)? * se;
    Ok(IntervalEstimate {
        estimate: center.tanh(),
        lower: (center - half).tanh(),
        upper: (center + half).tanh(),
        alpha,
        n_eff,
        method,
    })
}

/// Fisher-z interval for a Pearson correlation with standard error `1/√(n-3)`.
/// The bias-corrected variant centres on `atanh(r) - r/(2(n-1))` and reports
/// the back-transformed centre as its estimate.
pub fn fisher_ci(r: f64, n: usize, alpha: f64, bias_corrected: bool) -> Result<IntervalEstimate> {
    check_r(r)?;
    if n < 4 {
        return Err(Error::InsufficientSample { n, required: 4 });
    }
    let se = 1.0 / ((n - 3) as f64).sqrt();
    if bias_corrected {
        let w = r.atanh() - r / (2.0 * (n - 1) as f64);
        z_interval(w, se, alpha, n, CiMethod::FisherBiasCorrected)
    } else {
        let mut ci = z_interval(r.atanh(), se, alpha, n, CiMethod::Fisher)?;
        ci.estimate = r;
        Ok(ci)
    }
}

/// Fisher-z interval for a partial correlation given `p` controls: SE `1/√(n-p-2)`.
pub fn partial_ci(r: f64, n: usize, p: usize, alpha: f64) -> Result<IntervalEstimate> {
    check_r(r)?;
    if n <= p + 3 {
        return Err(Error::InsufficientSample { n, required: p + 4 });
    }
    let se = 1.0 / ((n - p - 2) as f64).sqrt();
    let mut ci = z_interval(r.atanh(), se, alpha, n, CiMethod::Fisher)?;
    ci.estimate = r;
    Ok(ci)
}

/// Fisher-z interval for a semipartial correlation: SE `1/√(n-p-1)`.
pub fn semipartial_ci(r: f64, n: usize, p: usize, alpha: f64) -> Result<IntervalEstimate> {
    check_r(r)?;
    if n <= p + 2 {
        return Err(Error::InsufficientSample { n, required: p + 3 });
    }
    let se = 1.0 / ((n - p - 1) as f64).sqrt();
    let mut ci = z_interval(r.atanh(), se, alpha, n, CiMethod::Fisher)?;
    ci.estimate = r;
    Ok(ci)
}

fn asymptotic_variance(n: usize) -> f64 {
    let n = n as f64;
    2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0))
}

fn exact_variance(stats: &KendallStats) -> f64 {
    let n = stats.n as f64;
    let c = stats.concordant as f64;
    let d = stats.discordant as f64;
    let sum_sq: f64 = stats.per_observation.iter().map(|&ci| (ci as f64).powi(2)).sum();
    let pairs = stats.pairs() as f64;
    (4.0 * sum_sq - 2.0 * c - 2.0 * d * (2.0 * n - 3.0) - c * c / (n * (n - 1.0))) / (pairs * pairs)
}

fn clipped(tau: f64, variance: f64, alpha: f64, n: usize, method: CiMethod) -> Result<IntervalEstimate> {
    let half = z_quantile(alpha)? * variance.sqrt();
    Ok(IntervalEstimate {
        estimate: tau,
        lower: (tau - half).max(-1.0),
        upper: (tau + half).min(1.0),
        alpha,
        n_eff: n,
        method,
    })
}

/// Normal-approximation interval for τ̂, intersected with [-1, 1].
pub fn kendall_ci(stats: &KendallStats, alpha: f64, mode: VarianceMode) -> Result<IntervalEstimate> {
    let n = stats.n;
    let tau = stats.tau_hat();
    match mode {
        VarianceMode::Asymptotic => kendall_interval(tau, n, alpha),
        VarianceMode::Exact | VarianceMode::ExactOrAsymptotic => {
            if n < 2 {
                return Err(Error::InsufficientSample { n, required: 2 });
            }
            let v = exact_variance(stats);
            if v >= 0.0 {
                clipped(tau, v, alpha, n, CiMethod::KendallExactVariance)
            } else if mode == VarianceMode::ExactOrAsymptotic {
                kendall_interval(tau, n, alpha)
            } else {
                Err(Error::NegativeVariance(v))
            }
        }
    }
}

/// Asymptotic interval for an arbitrary τ value at sample size `n`.
pub fn kendall_interval(tau: f64, n: usize, alpha: f64) -> Result<IntervalEstimate> {
    if n < 3 {
        return Err(Error::InsufficientSample { n, required: 3 });
    }
    if tau.is_nan() || tau.abs() > 1.0 {
        return Err(Error::InvalidParameter(format!("tau {tau} outside [-1, 1]")));
    }
    clipped(tau, asymptotic_variance(n), alpha, n, CiMethod::KendallAsymptotic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depstats::kendall_tau;
    use proptest::prelude::*;

    #[test]
    fn fisher_zero_n12() {
        let ci = fisher_ci(0.0, 12, 0.05, false).unwrap();
        let b = (1.959_963_984_540_054f64 / 3.0).tanh();
        assert!((ci.upper - b).abs() < 1e-12 && (ci.lower + b).abs() < 1e-12);
        assert!((ci.upper - 0.5735).abs() < 5e-4);
    }

    #[test]
    fn fisher_half_n103() {
        let ci = fisher_ci(0.5, 103, 0.05, false).unwrap();
        assert!((ci.lower - 0.3393).abs() < 5e-4, "{}", ci.lower);
        assert!((ci.upper - 0.6319).abs() < 5e-4, "{}", ci.upper);
    }

    #[test]
    fn fisher_errors() {
        assert_eq!(fisher_ci(1.0, 50, 0.05, false).unwrap_err(), Error::DegenerateInterval);
        assert!(matches!(fisher_ci(0.2, 3, 0.05, false), Err(Error::InsufficientSample { .. })));
        assert!(matches!(fisher_ci(0.2, 30, 1.0, false), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn bias_correction_shifts_toward_zero() {
        let plain = fisher_ci(0.6, 10, 0.05, false).unwrap();
        let bc = fisher_ci(0.6, 10, 0.05, true).unwrap();
        assert_eq!(bc.method, CiMethod::FisherBiasCorrected);
        assert!(bc.estimate < plain.estimate);
        assert!(bc.lower < plain.lower && bc.upper < plain.upper);
        let w = 0.6f64.atanh() - 0.6 / 18.0;
        assert!((bc.estimate - w.tanh()).abs() < 1e-15);
    }

    #[test]
    fn partial_and_semipartial_points() {
        let ci = partial_ci(0.0, 14, 2, 0.05).unwrap();
        assert!((ci.upper - 0.5507).abs() < 5e-4 && (ci.lower + 0.5507).abs() < 5e-4);
        let s = semipartial_ci(0.0, 11, 1, 0.05).unwrap();
        assert!((s.upper - 0.5735).abs() < 5e-4);
        // p = 0 partial uses √(n-2), not √(n-3)
        let p0 = partial_ci(0.3, 20, 0, 0.05).unwrap();
        let f = fisher_ci(0.3, 20, 0.05, false).unwrap();
        assert!(p0.width() < f.width());
        let expected = (0.3f64.atanh() + z_quantile(0.05).unwrap() / 18f64.sqrt()).tanh();
        assert!((p0.upper - expected).abs() < 1e-15);
        assert!(matches!(partial_ci(0.1, 5, 2, 0.05), Err(Error::InsufficientSample { .. })));
    }

    #[test]
    fn semipartial_widens_with_controls() {
        let a = semipartial_ci(0.4, 30, 1, 0.05).unwrap();
        let b = semipartial_ci(0.4, 30, 5, 0.05).unwrap();
        assert!(b.width() > a.width());
    }

    #[test]
    fn kendall_asymptotic_n10() {
        let ci = kendall_interval(0.0, 10, 0.05).unwrap();
        assert!((asymptotic_variance(10) - 50.0 / 810.0).abs() < 1e-15);
        assert!((ci.upper - 0.4869).abs() < 5e-4 && (ci.lower + 0.4869).abs() < 5e-4);
    }

    #[test]
    fn kendall_clipped_at_one() {
        let x: Vec<f64> = (0..8).map(f64::from).collect();
        let s = kendall_tau(&x, &x).unwrap();
        let ci = kendall_ci(&s, 0.05, VarianceMode::Asymptotic).unwrap();
        assert_eq!(ci.upper, 1.0);
        assert_eq!(ci.estimate, 1.0);
    }

    #[test]
    fn kendall_narrows_with_n() {
        let a = kendall_interval(0.2, 100, 0.05).unwrap();
        let b = kendall_interval(0.2, 1000, 0.05).unwrap();
        assert!(b.width() < a.width());
    }

    #[test]
    fn exact_variance_negative_is_flagged() {
        // n = 3, reversed: C = 0, D = 3 gives 4·0 - 0 - 2·3·3 - 0 < 0
        let s = kendall_tau(&[1., 2., 3.], &[3., 2., 1.]).unwrap();
        assert!(exact_variance(&s) < 0.0);
        assert!(matches!(
            kendall_ci(&s, 0.05, VarianceMode::Exact),
            Err(Error::NegativeVariance(_))
        ));
        let fallback = kendall_ci(&s, 0.05, VarianceMode::ExactOrAsymptotic).unwrap();
        assert_eq!(fallback.method, CiMethod::KendallAsymptotic);
    }

    #[test]
    fn exact_variance_formula_by_hand() {
        // x = [1,2,3], y = [1,3,2]: C = 2, D = 1, c = [2,1,1]
        let s = kendall_tau(&[1., 2., 3.], &[1., 3., 2.]).unwrap();
        let expected = (4.0 * 6.0 - 4.0 - 2.0 * 3.0 - 4.0 / 6.0) / 9.0;
        assert!((exact_variance(&s) - expected).abs() < 1e-15);
        let ci = kendall_ci(&s, 0.05, VarianceMode::Exact).unwrap();
        assert_eq!(ci.method, CiMethod::KendallExactVariance);
    }

    proptest! {
        #[test]
        fn fisher_interval_contains_and_bounded(r in -0.999f64..0.999, n in 4usize..5000, alpha in 0.001f64..0.5) {
            let ci = fisher_ci(r, n, alpha, false).unwrap();
            prop_assert!(ci.lower <= r && r <= ci.upper);
            prop_assert!(ci.lower >= -1.0 && ci.upper <= 1.0);
            let bc = fisher_ci(r, n, alpha, true).unwrap();
            prop_assert!(bc.lower <= bc.estimate && bc.estimate <= bc.upper);
        }

        #[test]
        fn fisher_interval_shrinks_in_n(r in -0.95f64..0.95, n in 4usize..2000) {
            let a = fisher_ci(r, n, 0.05, false).unwrap();
            let b = fisher_ci(r, n + 1, 0.05, false).unwrap();
            prop_assert!(b.width() <= a.width());
        }

        #[test]
        fn partial_intervals_bounded(r in -0.999f64..0.999, p in 0usize..5, extra in 4usize..500) {
            let n = p + extra;
            let ci = partial_ci(r, n, p, 0.05).unwrap();
            prop_assert!(-1.0 <= ci.lower && ci.lower <= r && r <= ci.upper && ci.upper <= 1.0);
            let s = semipartial_ci(r, n, p, 0.05).unwrap();
            prop_assert!(-1.0 <= s.lower && s.lower <= r && r <= s.upper && s.upper <= 1.0);
        }
    }
}
