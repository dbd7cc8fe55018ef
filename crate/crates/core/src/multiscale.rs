//! Levelwise analysis: correlograms, the cross-scale covariance
//! decomposition and averaging of correlograms over runs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::depstats::{
    fisher_ci, kendall_ci, kendall_interval, kendall_tau, partial_ci, partial_from_matrix,
    pearson, IntervalEstimate, VarianceMode,
};
use crate::dwt1d::{dwt_forward, level_labels, Decomposition1D, LevelLabel, Scheme};
use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::ndwt1d::ndwt_forward;
use crate::par;
use crate::wt2d::{diagonal_series, Grid};

/// Relative energy below which a level is treated as having zero variance.
const DEGENERATE_ENERGY: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Pearson,
    Kendall,
    Blomqvist,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Pearson => "pearson",
            Measure::Kendall => "kendall",
            Measure::Blomqvist => "blomqvist",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(Measure::Pearson),
            "kendall" => Ok(Measure::Kendall),
            "blomqvist" => Ok(Measure::Blomqvist),
            other => Err(Error::InvalidParameter(format!(
                "unknown measure `{other}` (expected pearson, kendall or blomqvist)"
            ))),
        }
    }
}

/// Settings shared by every level of a correlogram.
#[derive(Debug, Clone)]
pub struct CorrelogramOptions {
    pub filter: FilterBank,
    pub levels: usize,
    pub scheme: Scheme,
    pub measure: Measure,
    pub alpha: f64,
    pub kendall_variance: VarianceMode,
    /// Plain Pearson levels with fewer samples use the bias-corrected
    /// Fisher interval. Zero disables the correction.
    pub bias_correction_below: usize,
}

impl CorrelogramOptions {
    pub fn new(filter: FilterBank, levels: usize, scheme: Scheme, measure: Measure) -> Self {
        Self {
            filter,
            levels,
            scheme,
            measure,
            alpha: 0.05,
            kendall_variance: VarianceMode::Asymptotic,
            bias_correction_below: 30,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStatus {
    /// Estimate and interval available.
    Ok,
    /// Estimate available but no finite interval (|r| = 1 or too few samples).
    NoInterval,
    /// No estimate: zero variance, ties or collinear controls.
    Degenerate,
}

impl fmt::Display for LevelStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelStatus::Ok => "ok",
            LevelStatus::NoInterval => "no_interval",
            LevelStatus::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelEstimate {
    pub level: LevelLabel,
    pub n_eff: usize,
    pub status: LevelStatus,
    pub estimate: Option<f64>,
    pub interval: Option<IntervalEstimate>,
    pub note: Option<String>,
}

impl LevelEstimate {
    fn degenerate(level: LevelLabel, n_eff: usize, note: String) -> Self {
        Self {
            level,
            n_eff,
            status: LevelStatus::Degenerate,
            estimate: None,
            interval: None,
            note: Some(note),
        }
    }

    fn with_interval(level: LevelLabel, n_eff: usize, estimate: f64, ci: Result<IntervalEstimate>) -> Self {
        match ci {
            Ok(ci) => Self {
                level,
                n_eff,
                status: LevelStatus::Ok,
                estimate: Some(estimate),
                interval: Some(ci),
                note: None,
            },
            Err(e) => Self {
                level,
                n_eff,
                status: LevelStatus::NoInterval,
                estimate: Some(estimate),
                interval: None,
                note: Some(e.to_string()),
            },
        }
    }

    pub fn lower(&self) -> Option<f64> {
        self.interval.map(|c| c.lower)
    }

    pub fn upper(&self) -> Option<f64> {
        self.interval.map(|c| c.upper)
    }
}

/// Per-level dependence estimates, finest detail first and smooth last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram {
    pub measure: Measure,
    pub scheme: Scheme,
    pub wavelet: String,
    pub levels: usize,
    pub alpha: f64,
    pub controls: Vec<String>,
    /// Number of runs averaged into this correlogram.
    pub runs: usize,
    pub entries: Vec<LevelEstimate>,
    /// Present for orthogonal Pearson correlograms without controls.
    pub decomposition: Option<ScaleDecomposition>,
}

impl Correlogram {
    pub fn entry(&self, label: LevelLabel) -> Option<&LevelEstimate> {
        self.entries.iter().find(|e| e.level == label)
    }

    pub fn estimates(&self) -> Vec<Option<f64>> {
        self.entries.iter().map(|e| e.estimate).collect()
    }
}

/// Coefficient groups of one series in reporting order.
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub labels: Vec<LevelLabel>,
    pub vectors: Vec<Vec<f64>>,
}

impl LevelSet {
    pub fn from_decomposition(dec: &Decomposition1D) -> Self {
        let labels = dec.labels();
        let vectors = labels
            .iter()
            .map(|&l| dec.subvector(l).expect("label from decomposition").to_vec())
            .collect();
        Self { labels, vectors }
    }

    /// From diagonal-hierarchy series ordered smooth first, coarsest to finest.
    pub fn from_diagonal_series(series: Vec<Vec<f64>>) -> Self {
        let levels = series.len() - 1;
        let labels = level_labels(levels);
        let mut vectors = vec![Vec::new(); series.len()];
        for (b, v) in series.into_iter().enumerate() {
            let label = if b == 0 {
                LevelLabel::Smooth
            } else {
                LevelLabel::Detail(levels + 1 - b)
            };
            let pos = labels.iter().position(|&l| l == label).expect("label in range");
            vectors[pos] = v;
        }
        Self { labels, vectors }
    }

    fn total_energy(&self) -> f64 {
        self.vectors.iter().flatten().map(|v| v * v).sum()
    }
}

/// Transforms a 1D series with the chosen scheme.
pub fn transform_series(y: &[f64], fb: &FilterBank, levels: usize, scheme: Scheme) -> Result<Decomposition1D> {
    match scheme {
        Scheme::Orthogonal => dwt_forward(y, fb, levels),
        Scheme::Nondecimated => ndwt_forward(y, fb, levels),
    }
}

fn check_lengths(x: &[f64], others: &[&[f64]]) -> Result<()> {
    for (i, o) in others.iter().enumerate() {
        if o.len() != x.len() {
            return Err(Error::LengthMismatch(format!(
                "series {} has {} values, expected {}",
                i + 1,
                o.len(),
                x.len()
            )));
        }
    }
    Ok(())
}

/// Levelwise correlogram of two series, optionally controlling for others.
pub fn correlogram(
    x: &[f64],
    y: &[f64],
    controls: &[&[f64]],
    opts: &CorrelogramOptions,
) -> Result<Correlogram> {
    let mut all: Vec<&[f64]> = vec![y];
    all.extend_from_slice(controls);
    check_lengths(x, &all)?;
    let sets = par::map_slice(
        &[x].into_iter().chain(all.iter().copied()).collect::<Vec<_>>(),
        |s| transform_series(s, &opts.filter, opts.levels, opts.scheme).map(|d| LevelSet::from_decomposition(&d)),
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut c = correlogram_from_levels(&sets[0], &sets[1], &sets[2..], opts)?;
    if opts.scheme == Scheme::Orthogonal && opts.measure == Measure::Pearson && controls.is_empty() {
        c.decomposition = scale_decomposition(x, y, &opts.filter, opts.levels).ok();
    }
    Ok(c)
}

/// Correlogram over the diagonal hierarchy of two n×n images.
pub fn correlogram_2d(
    a: &Grid,
    b: &Grid,
    controls: &[&Grid],
    opts: &CorrelogramOptions,
) -> Result<Correlogram> {
    let sets = image_level_sets(a, b, controls, opts)?;
    correlogram_from_levels(&sets[0], &sets[1], &sets[2..], opts)
}

/// Diagonal-hierarchy level sets for `a`, `b` and each control, in that order.
pub fn image_level_sets(
    a: &Grid,
    b: &Grid,
    controls: &[&Grid],
    opts: &CorrelogramOptions,
) -> Result<Vec<LevelSet>> {
    let images: Vec<&Grid> = [a, b].into_iter().chain(controls.iter().copied()).collect();
    for (i, g) in images.iter().enumerate().skip(1) {
        if (g.rows, g.cols) != (a.rows, a.cols) {
            return Err(Error::LengthMismatch(format!(
                "image {} is {}x{}, expected {}x{}",
                i + 1,
                g.rows,
                g.cols,
                a.rows,
                a.cols
            )));
        }
    }
    images
        .iter()
        .map(|g| {
            diagonal_series(g, &opts.filter, opts.levels, opts.scheme)
                .map(LevelSet::from_diagonal_series)
        })
        .collect()
}

/// Computes per-level estimates from already transformed coefficient groups.
pub fn correlogram_from_levels(
    x: &LevelSet,
    y: &LevelSet,
    controls: &[LevelSet],
    opts: &CorrelogramOptions,
) -> Result<Correlogram> {
    for s in std::iter::once(y).chain(controls) {
        if s.labels != x.labels {
            return Err(Error::Inconsistent("level sets have different labels".into()));
        }
    }
    let floors: Vec<f64> = std::iter::once(x)
        .chain(std::iter::once(y))
        .chain(controls)
        .map(|s| DEGENERATE_ENERGY * s.total_energy())
        .collect();
    let entries = par::map_range(x.labels.len(), |i| {
        let series: Vec<&[f64]> = std::iter::once(x)
            .chain(std::iter::once(y))
            .chain(controls)
            .map(|s| s.vectors[i].as_slice())
            .collect();
        level_estimate(x.labels[i], &series, &floors, opts)
    });
    Ok(Correlogram {
        measure: opts.measure,
        scheme: opts.scheme,
        wavelet: opts.filter.name().to_string(),
        levels: opts.levels,
        alpha: opts.alpha,
        controls: (1..=controls.len()).map(|i| format!("control{i}")).collect(),
        runs: 1,
        entries,
        decomposition: None,
    })
}

fn centered_energy(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|a| (a - m) * (a - m)).sum()
}

/// Blomqvist median correlation in O(n): the antisymmetric sign contrast
/// about the median reduces to the Pearson correlation of the sign indicators.
pub fn blomqvist_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    let sx = median_signs(x)?;
    let sy = median_signs(y)?;
    pearson(&sx, &sy).map_err(|_| Error::Degenerate("all median signs are equal".into()))
}

fn median_signs(v: &[f64]) -> Result<Vec<f64>> {
    let crate::depstats::ContrastFunction::Blomqvist { center } =
        crate::depstats::ContrastFunction::blomqvist(v)?
    else {
        unreachable!()
    };
    Ok(v.iter()
        .map(|&a| {
            if a > center {
                1.0
            } else if a < center {
                -1.0
            } else {
                0.0
            }
        })
        .collect())
}

fn pairwise(measure: Measure, a: &[f64], b: &[f64]) -> Result<f64> {
    match measure {
        Measure::Pearson => pearson(a, b),
        Measure::Kendall => kendall_tau(a, b).map(|s| s.tau_hat()),
        Measure::Blomqvist => blomqvist_correlation(a, b),
    }
}

fn level_estimate(label: LevelLabel, series: &[&[f64]], floors: &[f64], opts: &CorrelogramOptions) -> LevelEstimate {
    let n = series[0].len();
    let p = series.len() - 2;
    if n < 2 {
        return LevelEstimate::degenerate(label, n, format!("only {n} coefficient(s)"));
    }
    for (i, (s, floor)) in series.iter().zip(floors).enumerate() {
        if centered_energy(s) <= *floor {
            let who = match i {
                0 => "x".to_string(),
                1 => "y".to_string(),
                c => format!("control {}", c - 1),
            };
            return LevelEstimate::degenerate(label, n, format!("zero variance in {who}"));
        }
    }

    if p == 0 {
        return match opts.measure {
            Measure::Kendall => match kendall_tau(series[0], series[1]) {
                Ok(stats) => {
                    let tau = stats.tau_hat();
                    LevelEstimate::with_interval(label, n, tau, kendall_ci(&stats, opts.alpha, opts.kendall_variance))
                }
                Err(e) => LevelEstimate::degenerate(label, n, e.to_string()),
            },
            m => match pairwise(m, series[0], series[1]) {
                Ok(r) => {
                    let bias = m == Measure::Pearson && n < opts.bias_correction_below;
                    LevelEstimate::with_interval(label, n, r, fisher_ci(r, n, opts.alpha, bias))
                }
                Err(e) => LevelEstimate::degenerate(label, n, e.to_string()),
            },
        };
    }

    let k = series.len();
    let mut corr = vec![vec![1.0; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            match pairwise(opts.measure, series[a], series[b]) {
                Ok(r) => {
                    corr[a][b] = r;
                    corr[b][a] = r;
                }
                Err(e) => return LevelEstimate::degenerate(label, n, e.to_string()),
            }
        }
    }
    match partial_from_matrix(&corr) {
        Ok(r) => {
            let ci = match opts.measure {
                Measure::Kendall => kendall_interval(r, n, opts.alpha),
                _ => partial_ci(r, n, p, opts.alpha),
            };
            LevelEstimate::with_interval(label, n, r, ci)
        }
        Err(e) => LevelEstimate::degenerate(label, n, e.to_string()),
    }
}

/// One level of the covariance decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTerm {
    pub level: LevelLabel,
    pub length: usize,
    /// Root mean square of the level's coefficients for x and y.
    pub sd_x: f64,
    pub sd_y: f64,
    /// Mean cross-product of the level's coefficients.
    pub covariance: f64,
    /// `covariance · length / n`; these sum to the overall covariance.
    pub weighted_covariance: f64,
    pub weight: f64,
    /// Undefined when either coefficient group is identically zero.
    pub correlation: Option<f64>,
    /// `weight · correlation` (zero for undefined levels).
    pub weighted_correlation: f64,
}

/// Exact split of covariance and correlation across the levels of an
/// orthogonal transform of de-meaned series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleDecomposition {
    pub wavelet: String,
    pub n: usize,
    pub levels: usize,
    /// Details finest first, then smooth.
    pub terms: Vec<ScaleTerm>,
    pub covariance_direct: f64,
    pub covariance_recovered: f64,
    pub rho_direct: f64,
    pub rho_recovered: f64,
    pub weight_sum: f64,
}

/// Splits the (1/n-normalized) covariance and the Pearson correlation of
/// `x` and `y` into levelwise terms.
///
/// Both series are de-meaned once and levelwise moments are uncentered mean
/// cross-products, which makes both identities exact up to rounding.
pub fn scale_decomposition(x: &[f64], y: &[f64], fb: &FilterBank, levels: usize) -> Result<ScaleDecomposition> {
    check_lengths(x, &[y])?;
    let n = x.len();
    let demean = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| a - m).collect::<Vec<_>>()
    };
    let (xc, yc) = (demean(x), demean(y));
    let nf = n as f64;
    let var_x = xc.iter().map(|v| v * v).sum::<f64>() / nf;
    let var_y = yc.iter().map(|v| v * v).sum::<f64>() / nf;
    if !(var_x > 0.0) || !(var_y > 0.0) {
        return Err(Error::Degenerate("zero total variance".into()));
    }
    let (sd_x, sd_y) = (var_x.sqrt(), var_y.sqrt());
    let covariance_direct = xc.iter().zip(&yc).map(|(a, b)| a * b).sum::<f64>() / nf;
    let rho_direct = pearson(x, y)?;

    let dx = LevelSet::from_decomposition(&dwt_forward(&xc, fb, levels)?);
    let dy = LevelSet::from_decomposition(&dwt_forward(&yc, fb, levels)?);
    let terms: Vec<ScaleTerm> = dx
        .labels
        .iter()
        .zip(dx.vectors.iter().zip(&dy.vectors))
        .map(|(&level, (cx, cy))| {
            let len = cx.len() as f64;
            let lx = (cx.iter().map(|v| v * v).sum::<f64>() / len).sqrt();
            let ly = (cy.iter().map(|v| v * v).sum::<f64>() / len).sqrt();
            let covariance = cx.iter().zip(cy).map(|(a, b)| a * b).sum::<f64>() / len;
            let share = len / nf;
            let weight = share * lx * ly / (sd_x * sd_y);
            let correlation = (lx * ly > 0.0).then(|| (covariance / (lx * ly)).clamp(-1.0, 1.0));
            ScaleTerm {
                level,
                length: cx.len(),
                sd_x: lx,
                sd_y: ly,
                covariance,
                weighted_covariance: share * covariance,
                weight,
                correlation,
                weighted_correlation: correlation.map_or(0.0, |r| weight * r),
            }
        })
        .collect();
    let covariance_recovered = terms.iter().map(|t| t.weighted_covariance).sum();
    let rho_recovered = terms.iter().map(|t| t.weighted_correlation).sum();
    let weight_sum = terms.iter().map(|t| t.weight).sum();
    Ok(ScaleDecomposition {
        wavelet: fb.name().to_string(),
        n,
        levels,
        terms,
        covariance_direct,
        covariance_recovered,
        rho_direct,
        rho_recovered,
        weight_sum,
    })
}

/// Averages correlograms level by level. The interval is the Fisher-z
/// interval of the mean estimate at the level's sample size.
pub fn average_correlogram(runs: &[Correlogram]) -> Result<Correlogram> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no correlograms to average".into()))?;
    if runs.len() == 1 {
        return Ok(first.clone());
    }
    for (i, r) in runs.iter().enumerate().skip(1) {
        let same = r.measure == first.measure
            && r.scheme == first.scheme
            && r.entries.len() == first.entries.len()
            && r.entries
                .iter()
                .zip(&first.entries)
                .all(|(a, b)| a.level == b.level && a.n_eff == b.n_eff);
        if !same {
            return Err(Error::Inconsistent(format!(
                "run {} differs in measure, scheme or level layout from run 1",
                i + 1
            )));
        }
    }
    let entries = first
        .entries
        .iter()
        .enumerate()
        .map(|(i, e0)| {
            let values: Vec<f64> = runs.iter().filter_map(|r| r.entries[i].estimate).collect();
            if values.is_empty() {
                return LevelEstimate::degenerate(e0.level, e0.n_eff, "undefined in every run".into());
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let bias = first.measure == Measure::Pearson
                && first.controls.is_empty()
                && e0.n_eff < 30;
            let mut est = LevelEstimate::with_interval(e0.level, e0.n_eff, mean, fisher_ci(mean, e0.n_eff, first.alpha, bias));
            if values.len() < runs.len() {
                est.note = Some(format!("averaged over {} of {} runs", values.len(), runs.len()));
            }
            est
        })
        .collect();
    Ok(Correlogram {
        runs: runs.iter().map(|r| r.runs).sum(),
        entries,
        decomposition: None,
        ..first.clone()
    })
}
