//! Seeded generators: the coupled AR(1) systems, white-noise pairs,
//! correlated Gaussian triples and synthetic image pairs.
//!
//! Every generator draws from ChaCha8 seeded with `seed_from_u64(seed)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wt2d::Grid;

/// Identity of the pseudo-random generator and its seeding rule.
pub const GENERATOR: &str = "rand_chacha::ChaCha8Rng (seed_from_u64), standard normal via rand_distr::StandardNormal";

pub const DEFAULT_BURN_IN: usize = 1000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// One of the two coupled AR(1) systems.
///
/// Both share `X_t = 0.5 X_{t-1} + e_t`. System 1 has
/// `Y_t = 0.5 X_{t-1} + 0.5 Y_{t-1} + u_t`, system 2 has
/// `Y_t = X_{t-1} + 0.5 Y_{t-1} + u_t`, with `e` and `u` independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ARSystem {
    pub system_id: u8,
    pub n: usize,
    pub seed: u64,
    pub burn_in: usize,
}

impl ARSystem {
    pub fn new(system_id: u8, n: usize, seed: u64) -> Self {
        Self {
            system_id,
            n,
            seed,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    fn coupling(&self) -> Result<f64> {
        match self.system_id {
            1 => Ok(0.5),
            2 => Ok(1.0),
            s => Err(Error::InvalidParameter(format!("system must be 1 or 2, got {s}"))),
        }
    }
}

/// Simulates `(x, y)` starting from `X_0 = Y_0 = 0` and discarding `burn_in`
/// steps. Per step the X innovation is drawn before the Y innovation, so both
/// systems share the X path for a given seed.
pub fn simulate_ar_pair(cfg: &ARSystem) -> Result<(Vec<f64>, Vec<f64>)> {
    let coupling = cfg.coupling()?;
    if cfg.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = rng(cfg.seed);
    let (mut xp, mut yp) = (0.0f64, 0.0f64);
    let mut x = Vec::with_capacity(cfg.n);
    let mut y = Vec::with_capacity(cfg.n);
    for t in 0..cfg.burn_in + cfg.n {
        let e = normal(&mut rng);
        let u = normal(&mut rng);
        let xt = 0.5 * xp + e;
        let yt = coupling * xp + 0.5 * yp + u;
        (xp, yp) = (xt, yt);
        if t >= cfg.burn_in {
            x.push(xt);
            y.push(yt);
        }
    }
    Ok((x, y))
}

/// Stationary correlation of a system, from the Lyapunov equation of the
/// bivariate AR(1) `Z_t = Φ Z_{t-1} + w_t` with unit innovation variances.
pub fn stationary_correlation(system_id: u8) -> Result<f64> {
    let c = ARSystem::new(system_id, 1, 0).coupling()?;
    // Φ = [[a, 0], [c, b]], a = b = 0.5
    let (a, b) = (0.5f64, 0.5f64);
    let vx = 1.0 / (1.0 - a * a);
    let cxy = c * a * vx / (1.0 - a * b);
    let vy = (c * c * vx + 2.0 * c * b * cxy + 1.0) / (1.0 - b * b);
    Ok(cxy / (vx * vy).sqrt())
}

/// Two independent standard normal series.
pub fn white_noise_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng(seed);
    let x = (0..n).map(|_| normal(&mut rng)).collect();
    let y = (0..n).map(|_| normal(&mut rng)).collect();
    (x, y)
}

/// Gaussian `(x, y, z)` with unit variances and the given pairwise
/// correlations. Fails when the correlation matrix is not positive definite.
pub fn correlated_triple(
    n: usize,
    r_xy: f64,
    r_xz: f64,
    r_yz: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    // Cholesky of [[1, r_xy, r_xz], [r_xy, 1, r_yz], [r_xz, r_yz, 1]], with z first.
    let l11 = 1.0;
    let l21 = r_xz;
    let d2 = 1.0 - l21 * l21;
    let l31 = r_yz;
    if !(d2 > 0.0) {
        return Err(Error::InvalidParameter("correlation matrix is not positive definite".into()));
    }
    let l22 = d2.sqrt();
    let l32 = (r_xy - l31 * l21) / l22;
    let d3 = 1.0 - l31 * l31 - l32 * l32;
    if !(d3 > 0.0) {
        return Err(Error::InvalidParameter("correlation matrix is not positive definite".into()));
    }
    let l33 = d3.sqrt();
    let mut rng = rng(seed);
    let (mut x, mut y, mut z) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (a, b, c) = (normal(&mut rng), normal(&mut rng), normal(&mut rng));
        z.push(l11 * a);
        x.push(l21 * a + l22 * b);
        y.push(l31 * a + l32 * b + l33 * c);
    }
    Ok((x, y, z))
}

/// Settings for [`simulate_image_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePairConfig {
    pub n: usize,
    pub dependence: f64,
    /// Standard deviation of the independent white noise added to each image.
    pub noise: f64,
    pub seed: u64,
}

impl ImagePairConfig {
    pub fn new(n: usize, dependence: f64, seed: u64) -> Self {
        Self {
            n,
            dependence,
            noise: 0.05,
            seed,
        }
    }
}

/// Separable circular smoothing with weights `0.5^|k|`, `|k| ≤ 3`,
/// normalized so a white field keeps unit variance.
fn smooth_field(rng: &mut ChaCha8Rng, n: usize) -> Grid {
    let w: Vec<f64> = (-3i32..=3).map(|k| 0.5f64.powi(k.abs())).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>();
    let raw = Grid::from_fn(n, n, |_, _| normal(rng));
    let pass = |g: &Grid| {
        Grid::from_fn(n, n, |r, c| {
            w.iter()
                .enumerate()
                .map(|(i, wk)| wk * g.get(r, (c + n + i - 3) % n))
                .sum::<f64>()
                / norm.sqrt()
        })
    };
    pass(&pass(&raw).transpose()).transpose()
}

/// Two n×n images `√d·S + √(1-d)·S_k + σ·N_k` sharing the smooth field `S`.
pub fn simulate_image_pair(cfg: &ImagePairConfig) -> Result<(Grid, Grid)> {
    if cfg.n < 8 {
        return Err(Error::InvalidParameter(format!("image side must be at least 8, got {}", cfg.n)));
    }
    if !(0.0..=1.0).contains(&cfg.dependence) {
        return Err(Error::InvalidParameter(format!(
            "dependence must lie in [0, 1], got {}",
            cfg.dependence
        )));
    }
    if !(cfg.noise >= 0.0) || !cfg.noise.is_finite() {
        return Err(Error::InvalidParameter(format!("noise must be non-negative, got {}", cfg.noise)));
    }
    let n = cfg.n;
    let mut rng = rng(cfg.seed);
    let shared = smooth_field(&mut rng, n);
    let own_a = smooth_field(&mut rng, n);
    let own_b = smooth_field(&mut rng, n);
    let noise_a = Grid::from_fn(n, n, |_, _| normal(&mut rng));
    let noise_b = Grid::from_fn(n, n, |_, _| normal(&mut rng));
    let (ws, wo) = (cfg.dependence.sqrt(), (1.0 - cfg.dependence).sqrt());
    let mix = |own: &Grid, noise: &Grid| {
        Grid::from_fn(n, n, |r, c| {
            ws * shared.get(r, c) + wo * own.get(r, c) + cfg.noise * noise.get(r, c)
        })
    };
    Ok((mix(&own_a, &noise_a), mix(&own_b, &noise_b)))
}
