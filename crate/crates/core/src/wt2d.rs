//! Two-dimensional separable transforms `D = W A W^T` and their
//! diagonal hierarchy (blocks where row and column scales coincide).

use serde::{Deserialize, Serialize};

use crate::dwt1d::{dwt_forward, dyadic_power, Decomposition1D, LevelLabel, Scheme};
use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::ndwt1d::{check_depth, ndwt_forward};
use crate::par;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Fills in row-major order.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let data = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Grid {
        Grid::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Square sub-block starting at (`start`, `start`).
    pub fn square_block(&self, start: usize, side: usize) -> Grid {
        Grid::from_fn(side, side, |r, c| self.get(start + r, start + c))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Circular shift by `dr` rows and `dc` columns.
    pub fn circular_shift(&self, dr: usize, dc: usize) -> Grid {
        let (m, n) = (self.rows, self.cols);
        Grid::from_fn(m, n, |r, c| {
            self.get((r + m - dr % m) % m, (c + n - dc % n) % n)
        })
    }
}

/// Coefficients of a 2D transform of an n×n image.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition2D {
    pub scheme: Scheme,
    pub wavelet: String,
    pub n: usize,
    pub levels: usize,
    /// n×n (orthogonal) or (L+1)n×(L+1)n (nondecimated).
    pub full: Grid,
    /// Smooth block first, then detail blocks coarsest to finest.
    pub diagonal_blocks: Vec<Grid>,
}

impl Decomposition2D {
    /// Diagonal block for `label` (detail 1 is the finest).
    pub fn block(&self, label: LevelLabel) -> Option<&Grid> {
        match label {
            LevelLabel::Smooth => self.diagonal_blocks.first(),
            LevelLabel::Detail(j) if (1..=self.levels).contains(&j) => {
                self.diagonal_blocks.get(self.levels + 1 - j)
            }
            LevelLabel::Detail(_) => None,
        }
    }
}

fn check_square(a: &Grid) -> Result<usize> {
    if a.rows != a.cols {
        return Err(Error::NonSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    if a.rows == 0 {
        return Err(Error::Empty);
    }
    Ok(a.rows)
}

/// Validates the transform preconditions for an n×n image.
pub fn check_2d(n: usize, fb: &FilterBank, levels: usize, scheme: Scheme) -> Result<()> {
    match scheme {
        Scheme::Orthogonal => {
            let j = dyadic_power(n)?;
            if levels < 1 || levels > j {
                return Err(Error::InvalidLevels { levels, max: j });
            }
            Ok(())
        }
        Scheme::Nondecimated => check_depth(n, fb.len(), levels),
    }
}

fn transform_1d(
    y: &[f64],
    fb: &FilterBank,
    levels: usize,
    scheme: Scheme,
) -> Result<Decomposition1D> {
    match scheme {
        Scheme::Orthogonal => dwt_forward(y, fb, levels),
        Scheme::Nondecimated => ndwt_forward(y, fb, levels),
    }
}

/// Replaces every row of `a` by its flattened 1D transform.
pub(crate) fn transform_rows(
    a: &Grid,
    fb: &FilterBank,
    levels: usize,
    scheme: Scheme,
) -> Result<Grid> {
    let out_cols = match scheme {
        Scheme::Orthogonal => a.cols,
        Scheme::Nondecimated => (levels + 1) * a.cols,
    };
    // Preconditions are checked once up front so the parallel pass cannot fail.
    transform_1d(a.row(0), fb, levels, scheme)?;
    let mut out = Grid::zeros(a.rows, out_cols);
    par::for_each_row(&mut out.data, out_cols, |r, dst| {
        let dec = transform_1d(a.row(r), fb, levels, scheme).expect("checked preconditions");
        dst.copy_from_slice(&dec.flatten());
    });
    Ok(out)
}

/// Forward 2D transform: rows first, then columns.
pub fn wt2d_forward(
    a: &Grid,
    fb: &FilterBank,
    levels: usize,
    scheme: Scheme,
) -> Result<Decomposition2D> {
    let n = check_square(a)?;
    check_2d(n, fb, levels, scheme)?;
    let row_pass = transform_rows(a, fb, levels, scheme)?;
    let full = transform_rows(&row_pass.transpose(), fb, levels, scheme)?.transpose();
    let diagonal_blocks = block_ranges(n, levels, scheme)
        .into_iter()
        .map(|(start, side)| full.square_block(start, side))
        .collect();
    Ok(Decomposition2D {
        scheme,
        wavelet: fb.name().to_string(),
        n,
        levels,
        full,
        diagonal_blocks,
    })
}

/// `(start, side)` of each diagonal block in `full`, smooth first.
pub fn block_ranges(n: usize, levels: usize, scheme: Scheme) -> Vec<(usize, usize)> {
    match scheme {
        Scheme::Nondecimated => (0..=levels).map(|b| (b * n, n)).collect(),
        Scheme::Orthogonal => {
            let s = n >> levels;
            std::iter::once((0, s))
                .chain((1..=levels).map(|b| (s << (b - 1), s << (b - 1))))
                .collect()
        }
    }
}

/// Flattened diagonal blocks, one vector per level, smooth first.
pub fn diagonal_block_series(dec: &Decomposition2D) -> Vec<Vec<f64>> {
    dec.diagonal_blocks.iter().map(|b| b.data.clone()).collect()
}

/// Diagonal blocks of the non-decimated 2D transform without materializing
/// the full `(L+1)n × (L+1)n` coefficient matrix. Smooth first.
pub fn ndwt2d_diagonal_blocks(a: &Grid, fb: &FilterBank, levels: usize) -> Result<Vec<Grid>> {
    let n = check_square(a)?;
    check_depth(n, fb.len(), levels)?;
    let row_pass = transform_rows(a, fb, levels, Scheme::Nondecimated)?;
    let blocks = par::map_range(levels + 1, |b| {
        // Column c of block b is sub-vector b of the NDWT of column b·n + c.
        let mut block = Grid::zeros(n, n);
        let mut column = vec![0.0; n];
        for c in 0..n {
            for (r, v) in column.iter_mut().enumerate() {
                *v = row_pass.get(r, b * n + c);
            }
            let dec = ndwt_forward(&column, fb, levels).expect("checked preconditions");
            let sub = if b == 0 { &dec.smooth } else { &dec.details[b - 1] };
            for (r, v) in sub.iter().enumerate() {
                block.data[r * n + c] = *v;
            }
        }
        block
    });
    Ok(blocks)
}

/// Diagonal-hierarchy vectors for either scheme, smooth first.
pub fn diagonal_series(
    a: &Grid,
    fb: &FilterBank,
    levels: usize,
    scheme: Scheme,
) -> Result<Vec<Vec<f64>>> {
    match scheme {
        Scheme::Nondecimated => Ok(ndwt2d_diagonal_blocks(a, fb, levels)?
            .into_iter()
            .map(|g| g.data)
            .collect()),
        Scheme::Orthogonal => Ok(diagonal_block_series(&wt2d_forward(a, fb, levels, scheme)?)),
    }
}
