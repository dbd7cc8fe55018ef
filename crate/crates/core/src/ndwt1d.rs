//! Non-decimated (stationary) wavelet transform with circular boundaries.
//!
//! Level `j` filters the previous smooth sequence with taps dilated by
//! `2^(j-1)`; every output sequence keeps the input length `n`.

use crate::dwt1d::{Decomposition1D, Scheme, WaveletMatrix};
use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::par;

/// Largest length for which a dense NDWT matrix is built.
pub const NDWT_MATRIX_LIMIT: usize = 2048;

/// Checks `levels >= 1` and `taps * 2^(levels-1) <= n`.
pub fn check_depth(n: usize, taps: usize, levels: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if levels < 1 {
        return Err(Error::InvalidLevels { levels, max: max_depth(n, taps) });
    }
    let span = 1usize
        .checked_shl(levels as u32 - 1)
        .and_then(|d| d.checked_mul(taps));
    match span {
        Some(s) if s <= n => Ok(()),
        _ => Err(Error::TooDeep { levels, len: n, taps }),
    }
}

/// Deepest level count allowed for length `n` and a `taps`-tap filter.
pub fn max_depth(n: usize, taps: usize) -> usize {
    let mut l = 0;
    while taps << l <= n {
        l += 1;
    }
    l
}

fn dilated_step(s: &[f64], fb: &FilterBank, dilation: usize) -> (Vec<f64>, Vec<f64>) {
    let n = s.len();
    let (h, g) = (fb.lowpass(), fb.highpass());
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for t in 0..n {
        let (mut a, mut d) = (0.0, 0.0);
        for (k, (hk, gk)) in h.iter().zip(g).enumerate() {
            let v = s[(t + dilation * k) % n];
            a += hk * v;
            d += gk * v;
        }
        lo[t] = a;
        hi[t] = d;
    }
    (lo, hi)
}

/// Forward non-decimated transform; `n` need not be dyadic.
pub fn ndwt_forward(y: &[f64], fb: &FilterBank, levels: usize) -> Result<Decomposition1D> {
    check_depth(y.len(), fb.len(), levels)?;
    let mut smooth = y.to_vec();
    let mut details = Vec::with_capacity(levels);
    for j in 0..levels {
        let (lo, hi) = dilated_step(&smooth, fb, 1 << j);
        details.push(hi);
        smooth = lo;
    }
    details.reverse();
    Ok(Decomposition1D {
        scheme: Scheme::Nondecimated,
        wavelet: fb.name().to_string(),
        n: y.len(),
        dyadic_power: None,
        levels,
        smooth,
        details,
    })
}

/// Dense `(L+1)n × n` matrix reproducing [`ndwt_forward`]'s flattened output.
pub fn build_ndwt_matrix(n: usize, fb: &FilterBank, levels: usize) -> Result<WaveletMatrix> {
    check_depth(n, fb.len(), levels)?;
    if n > NDWT_MATRIX_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: NDWT_MATRIX_LIMIT,
        });
    }
    // Running product of the low-pass circulants applied so far.
    let mut low_product = identity(n);
    let mut detail_blocks = Vec::with_capacity(levels);
    for j in 0..levels {
        let dilation = 1 << j;
        let hc = circulant(n, fb.lowpass(), dilation);
        let gc = circulant(n, fb.highpass(), dilation);
        detail_blocks.push(matmul(&gc, &low_product));
        low_product = matmul(&hc, &low_product);
    }
    let mut rows = low_product;
    for block in detail_blocks.into_iter().rev() {
        rows.extend(block);
    }
    Ok(WaveletMatrix::from_rows(Scheme::Nondecimated, n, rows))
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect()
}

/// Circulant with row t holding `taps[k]` at column `(t + dilation·k) mod n`.
fn circulant(n: usize, taps: &[f64], dilation: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|t| {
            let mut r = vec![0.0; n];
            for (k, w) in taps.iter().enumerate() {
                r[(t + dilation * k) % n] += w;
            }
            r
        })
        .collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = b.first().map_or(0, Vec::len);
    par::map_slice(a, |row| {
        let mut out = vec![0.0; cols];
        for (k, &w) in row.iter().enumerate() {
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(&b[k]) {
                    *o += w * v;
                }
            }
        }
        out
    })
}
