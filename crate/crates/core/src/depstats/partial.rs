use super::pearson;
use crate::error::{Error, Result};

/// First-order correlations with |r| above `1 - COLLINEARITY_TOLERANCE` are
/// treated as collinear.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-10;

fn is_collinear(r: f64) -> bool {
    !(r.abs() < 1.0 - COLLINEARITY_TOLERANCE)
}

/// Iterated first-order partialling on a correlation matrix.
///
/// Index 0 is X, index 1 is Y and indices `2..` are the controls, removed in
/// that order. Stage `k` (1-based) conditions on control `k`.
pub fn partial_from_matrix(corr: &[Vec<f64>]) -> Result<f64> {
    let m = corr.len();
    if m < 2 || corr.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidParameter(
            "correlation matrix must be square with at least two variables".into(),
        ));
    }
    let mut r: Vec<Vec<f64>> = corr.to_vec();
    for k in 2..m {
        let stage = k - 1;
        for (a, row) in r.iter().enumerate().take(k) {
            if is_collinear(row[k]) {
                let who = match a {
                    0 => "x".to_string(),
                    1 => "y".to_string(),
                    c => format!("control {}", c - 1),
                };
                return Err(Error::Collinear {
                    stage,
                    detail: format!(
                        "{who} and control {stage} have correlation {:.6} after conditioning on the preceding controls",
                        row[k]
                    ),
                });
            }
        }
        // Only variables not yet conditioned on need updating.
        let mut next = r.clone();
        for a in (0..m).filter(|&a| a != k && (a < 2 || a > k)) {
            for b in (0..m).filter(|&b| b != k && (b < 2 || b > k) && b != a) {
                let (rab, rak, rbk) = (r[a][b], r[a][k], r[b][k]);
                next[a][b] = (rab - rak * rbk) / ((1.0 - rak * rak).sqrt() * (1.0 - rbk * rbk).sqrt());
            }
        }
        r = next;
    }
    Ok(r[0][1].clamp(-1.0, 1.0))
}

/// Correlation of `x` and `y` after removing `controls` (in order) from both.
pub fn partial_correlation(x: &[f64], y: &[f64], controls: &[&[f64]]) -> Result<f64> {
    let vars: Vec<&[f64]> = [x, y].into_iter().chain(controls.iter().copied()).collect();
    let m = vars.len();
    let mut corr = vec![vec![1.0; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            let r = pearson(vars[a], vars[b])?;
            corr[a][b] = r;
            corr[b][a] = r;
        }
    }
    partial_from_matrix(&corr)
}

/// Semipartial correlation with `z` removed from `x` only.
pub fn semipartial_correlation(x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    let rxy = pearson(x, y)?;
    let rxz = pearson(x, z)?;
    let ryz = pearson(y, z)?;
    if is_collinear(rxz) {
        return Err(Error::Collinear {
            stage: 1,
            detail: format!("x and the control have correlation {rxz:.6}"),
        });
    }
    Ok(((rxy - rxz * ryz) / (1.0 - rxz * rxz).sqrt()).clamp(-1.0, 1.0))
}
