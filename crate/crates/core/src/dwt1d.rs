//! Orthogonal periodic discrete wavelet transform.
//!
//! Two routes compute the same linear map: the O(n) pyramid
//! ([`dwt_forward`] / [`dwt_inverse`]) and an explicit dense wavelet matrix
//! ([`build_dwt_matrix`]) assembled level by level from the analysis blocks.
//! Coefficients are laid out coarsest first: `(c, d_coarsest, …, d_finest)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::par;

/// Largest side for which a dense orthogonal wavelet matrix is built.
pub const DWT_MATRIX_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Orthogonal,
    Nondecimated,
}

impl Scheme {
    pub fn short_name(self) -> &'static str {
        match self {
            Scheme::Orthogonal => "dwt",
            Scheme::Nondecimated => "ndwt",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Orthogonal => "orthogonal",
            Scheme::Nondecimated => "nondecimated",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dwt" | "orthogonal" => Ok(Scheme::Orthogonal),
            "ndwt" | "nondecimated" | "swt" => Ok(Scheme::Nondecimated),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme `{other}` (expected dwt or ndwt)"
            ))),
        }
    }
}

/// Label of one coefficient group: detail level 1 is the finest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LevelLabel {
    Detail(usize),
    Smooth,
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelLabel::Detail(j) => write!(f, "{j}"),
            LevelLabel::Smooth => f.write_str("smooth"),
        }
    }
}

impl Serialize for LevelLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LevelLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "smooth" {
            return Ok(LevelLabel::Smooth);
        }
        s.parse::<usize>()
            .map(LevelLabel::Detail)
            .map_err(serde::de::Error::custom)
    }
}

/// Levelwise coefficient subvectors of a 1D transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition1D {
    pub scheme: Scheme,
    pub wavelet: String,
    /// Input length.
    pub n: usize,
    /// log2(n), orthogonal scheme only.
    pub dyadic_power: Option<usize>,
    pub levels: usize,
    pub smooth: Vec<f64>,
    /// Detail vectors ordered coarsest first.
    pub details: Vec<Vec<f64>>,
}

impl Decomposition1D {
    /// Detail coefficients at `level`, where 1 is the finest.
    pub fn detail(&self, level: usize) -> Option<&[f64]> {
        if level == 0 || level > self.levels {
            return None;
        }
        self.details.get(self.levels - level).map(Vec::as_slice)
    }

    pub fn subvector(&self, label: LevelLabel) -> Option<&[f64]> {
        match label {
            LevelLabel::Detail(j) => self.detail(j),
            LevelLabel::Smooth => Some(&self.smooth),
        }
    }

    /// Labels in reporting order: details finest to coarsest, then smooth.
    pub fn labels(&self) -> Vec<LevelLabel> {
        level_labels(self.levels)
    }

    /// Concatenation `(smooth, details coarsest→finest)`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.coefficient_count());
        out.extend_from_slice(&self.smooth);
        for d in &self.details {
            out.extend_from_slice(d);
        }
        out
    }

    pub fn coefficient_count(&self) -> usize {
        self.smooth.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    pub fn energy(&self) -> f64 {
        self.smooth.iter().map(|v| v * v).sum::<f64>()
            + self
                .details
                .iter()
                .flat_map(|d| d.iter())
                .map(|v| v * v)
                .sum::<f64>()
    }
}

/// Details finest to coarsest, then the smooth group.
pub fn level_labels(levels: usize) -> Vec<LevelLabel> {
    (1..=levels)
        .map(LevelLabel::Detail)
        .chain(std::iter::once(LevelLabel::Smooth))
        .collect()
}

/// Dense wavelet matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletMatrix {
    pub scheme: Scheme,
    pub rows: usize,
    pub cols: usize,
    entries: Vec<f64>,
}

impl WaveletMatrix {
    pub(crate) fn from_rows(scheme: Scheme, cols: usize, rows: Vec<Vec<f64>>) -> Self {
        let nrows = rows.len();
        let entries = rows.into_iter().flatten().collect::<Vec<_>>();
        debug_assert_eq!(entries.len(), nrows * cols);
        Self {
            scheme,
            rows: nrows,
            cols,
            entries,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Matrix-vector product `W y`.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.cols {
            return Err(Error::LengthMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                y.len()
            )));
        }
        Ok(par::map_range(self.rows, |r| {
            self.row(r).iter().zip(y).map(|(a, b)| a * b).sum()
        }))
    }

    /// Product `W^T d`.
    pub fn apply_transpose(&self, d: &[f64]) -> Result<Vec<f64>> {
        if d.len() != self.rows {
            return Err(Error::LengthMismatch(format!(
                "matrix has {} rows, vector has {} entries",
                self.rows,
                d.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (r, dr) in d.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(self.row(r)) {
                *o += w * dr;
            }
        }
        Ok(out)
    }

    /// Largest entrywise deviation of `W W^T` from the identity.
    pub fn max_gram_deviation(&self) -> f64 {
        let devs = par::map_range(self.rows, |i| {
            let ri = self.row(i);
            (0..self.rows)
                .map(|k| {
                    let dot: f64 = ri.iter().zip(self.row(k)).map(|(a, b)| a * b).sum();
                    let target = if i == k { 1.0 } else { 0.0 };
                    (dot - target).abs()
                })
                .fold(0.0, f64::max)
        });
        devs.into_iter().fold(0.0, f64::max)
    }
}

/// Returns J with n = 2^J, or an error if n is not a power of two.
pub fn dyadic_power(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if !n.is_power_of_two() {
        return Err(Error::NonDyadic { len: n });
    }
    Ok(n.trailing_zeros() as usize)
}

fn check_orthogonal_levels(n: usize, levels: usize) -> Result<usize> {
    let j = dyadic_power(n)?;
    if levels < 1 || levels > j {
        return Err(Error::InvalidLevels {
            levels,
            max: j,
        });
    }
    Ok(j)
}

/// One periodic analysis step: low-pass and high-pass outputs of half length.
pub(crate) fn analysis_step(s: &[f64], fb: &FilterBank) -> (Vec<f64>, Vec<f64>) {
    let n = s.len();
    let half = n / 2;
    let (h, g) = (fb.lowpass(), fb.highpass());
    let mut lo = vec![0.0; half];
    let mut hi = vec![0.0; half];
    for t in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for (k, (hk, gk)) in h.iter().zip(g).enumerate() {
            let v = s[(2 * t + k) % n];
            a += hk * v;
            d += gk * v;
        }
        lo[t] = a;
        hi[t] = d;
    }
    (lo, hi)
}

fn synthesis_step(lo: &[f64], hi: &[f64], fb: &FilterBank) -> Vec<f64> {
    let n = 2 * lo.len();
    let (h, g) = (fb.lowpass(), fb.highpass());
    let mut out = vec![0.0; n];
    for t in 0..lo.len() {
        for (k, (hk, gk)) in h.iter().zip(g).enumerate() {
            out[(2 * t + k) % n] += hk * lo[t] + gk * hi[t];
        }
    }
    out
}

/// Forward orthogonal transform of a dyadic-length signal by the pyramid algorithm.
pub fn dwt_forward(y: &[f64], fb: &FilterBank, levels: usize) -> Result<Decomposition1D> {
    let j = check_orthogonal_levels(y.len(), levels)?;
    let mut smooth = y.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (lo, hi) = analysis_step(&smooth, fb);
        details.push(hi);
        smooth = lo;
    }
    details.reverse();
    Ok(Decomposition1D {
        scheme: Scheme::Orthogonal,
        wavelet: fb.name().to_string(),
        n: y.len(),
        dyadic_power: Some(j),
        levels,
        smooth,
        details,
    })
}

/// Inverse of [`dwt_forward`].
pub fn dwt_inverse(dec: &Decomposition1D, fb: &FilterBank) -> Result<Vec<f64>> {
    if dec.scheme != Scheme::Orthogonal {
        return Err(Error::SchemeMismatch {
            expected: Scheme::Orthogonal.to_string(),
            found: dec.scheme.to_string(),
        });
    }
    if dec.wavelet != fb.name() {
        return Err(Error::SchemeMismatch {
            expected: format!("wavelet {}", dec.wavelet),
            found: format!("wavelet {}", fb.name()),
        });
    }
    if dec.details.len() != dec.levels {
        return Err(Error::Inconsistent(format!(
            "{} detail vectors for {} levels",
            dec.details.len(),
            dec.levels
        )));
    }
    let mut expected = dec.smooth.len();
    if expected == 0 || expected << dec.levels != dec.n {
        return Err(Error::Inconsistent(format!(
            "smooth length {} inconsistent with n = {} and L = {}",
            dec.smooth.len(),
            dec.n,
            dec.levels
        )));
    }
    let mut current = dec.smooth.clone();
    for (i, d) in dec.details.iter().enumerate() {
        if d.len() != expected {
            return Err(Error::Inconsistent(format!(
                "detail vector {i} (coarsest first) has length {}, expected {expected}",
                d.len()
            )));
        }
        current = synthesis_step(&current, d, fb);
        expected *= 2;
    }
    Ok(current)
}

/// Dense orthogonal wavelet matrix whose product with `y` is the flattened
/// output of [`dwt_forward`].
pub fn build_dwt_matrix(n: usize, fb: &FilterBank, levels: usize) -> Result<WaveletMatrix> {
    check_orthogonal_levels(n, levels)?;
    if n > DWT_MATRIX_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: DWT_MATRIX_LIMIT,
        });
    }
    // Start from the identity; each level replaces the top `size` rows by
    // T·(those rows), where T = [H; G] is the periodized analysis block.
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect();
    let mut size = n;
    for _ in 0..levels {
        let block = analysis_block(size, fb);
        let active = &rows[..size];
        let mixed: Vec<Vec<f64>> = par::map_range(size, |r| {
            let mut out = vec![0.0; n];
            for (c, &w) in block[r].iter().enumerate() {
                if w != 0.0 {
                    for (o, v) in out.iter_mut().zip(&active[c]) {
                        *o += w * v;
                    }
                }
            }
            out
        });
        rows.splice(..size, mixed);
        size /= 2;
    }
    Ok(WaveletMatrix::from_rows(Scheme::Orthogonal, n, rows))
}

/// The `size`×`size` matrix [H; G] of one periodized analysis level.
fn analysis_block(size: usize, fb: &FilterBank) -> Vec<Vec<f64>> {
    let half = size / 2;
    let mut block = vec![vec![0.0; size]; size];
    for t in 0..half {
        for (k, (hk, gk)) in fb.lowpass().iter().zip(fb.highpass()).enumerate() {
            let c = (2 * t + k) % size;
            block[t][c] += hk;
            block[half + t][c] += gk;
        }
    }
    block
}
