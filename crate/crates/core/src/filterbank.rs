//! Orthonormal two-channel filter banks.
//!
//! Low-pass taps `h` are stored in synthesis order (Σh = √2) and the
//! high-pass taps follow the quadrature-mirror rule `g[k] = (-1)^k h[m-1-k]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TOLERANCE: f64 = 1e-10;

/// Supported wavelet families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Haar,
    Db4,
    La8,
    Coif6,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Haar, Family::Db4, Family::La8, Family::Coif6];

    pub fn name(self) -> &'static str {
        match self {
            Family::Haar => "haar",
            Family::Db4 => "db4",
            Family::La8 => "la8",
            Family::Coif6 => "coif6",
        }
    }

    pub fn filter(self) -> FilterBank {
        let h = match self {
            Family::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            Family::Db4 => {
                let s3 = 3f64.sqrt();
                let d = 4.0 * std::f64::consts::SQRT_2;
                vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
            }
            // Least-asymmetric Daubechies, 4 vanishing moments.
            Family::La8 => vec![
                0.032_223_100_604_052_115_864,
                -0.012_603_967_262_032_106_874,
                -0.099_219_543_576_632_561_075,
                0.297_857_795_605_308_578_42,
                0.803_738_751_805_132_404_55,
                0.497_618_667_632_772_964_92,
                -0.029_635_527_646_003_882_472,
                -0.075_765_714_789_502_464_539,
            ],
            Family::Coif6 => {
                let s7 = 7f64.sqrt();
                let scale = std::f64::consts::SQRT_2 / 32.0;
                [
                    1.0 - s7,
                    5.0 + s7,
                    14.0 + 2.0 * s7,
                    14.0 - 2.0 * s7,
                    1.0 - s7,
                    -3.0 + s7,
                ]
                .iter()
                .map(|v| v * scale)
                .collect()
            }
        };
        FilterBank::from_lowpass(self.name(), h)
    }

    fn supported() -> String {
        Self::ALL.map(Family::name).join(", ")
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(Family::Haar),
            "db4" => Ok(Family::Db4),
            "la8" => Ok(Family::La8),
            "coif6" => Ok(Family::Coif6),
            _ => Err(Error::UnknownWavelet {
                name: s.to_string(),
                supported: Family::supported(),
            }),
        }
    }
}

/// Paired low-pass / high-pass filter taps.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    name: String,
    h: Vec<f64>,
    g: Vec<f64>,
}

impl FilterBank {
    /// Builds a bank from low-pass taps, deriving `g` by the quadrature-mirror rule.
    pub fn from_lowpass(name: impl Into<String>, h: Vec<f64>) -> Self {
        let g = quadrature_mirror(&h);
        Self { name: name.into(), h, g }
    }

    /// Builds a bank from explicit taps without enforcing any relation between them.
    pub fn from_taps(name: impl Into<String>, h: Vec<f64>, g: Vec<f64>) -> Self {
        Self { name: name.into(), h, g }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.h
    }

    pub fn highpass(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

fn quadrature_mirror(h: &[f64]) -> Vec<f64> {
    let m = h.len();
    (0..m)
        .map(|k| {
            let v = h[m - 1 - k];
            if k % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Looks up a filter bank by identifier (`haar`, `db4`, `la8`, `coif6`).
pub fn get_filter(name: &str) -> Result<FilterBank> {
    Ok(name.parse::<Family>()?.filter())
}

/// Lists every violated orthonormality condition; empty when the bank is valid.
pub fn validate(fb: &FilterBank) -> Vec<String> {
    let mut violations = Vec::new();
    let (h, g) = (fb.lowpass(), fb.highpass());
    if h.is_empty() {
        violations.push("empty filter".to_string());
        return violations;
    }
    if h.len() != g.len() {
        violations.push(format!(
            "length mismatch: h has {} taps, g has {}",
            h.len(),
            g.len()
        ));
        return violations;
    }
    let m = h.len();

    let sum_h: f64 = h.iter().sum();
    if (sum_h - std::f64::consts::SQRT_2).abs() > TOLERANCE {
        violations.push(format!("low-pass sum ≠ √2 (got {sum_h})"));
    }
    let energy_h: f64 = h.iter().map(|v| v * v).sum();
    if (energy_h - 1.0).abs() > TOLERANCE {
        violations.push(format!("low-pass energy ≠ 1 (got {energy_h})"));
    }
    let energy_g: f64 = g.iter().map(|v| v * v).sum();
    if (energy_g - 1.0).abs() > TOLERANCE {
        violations.push(format!("high-pass energy ≠ 1 (got {energy_g})"));
    }
    for shift in 1..m.div_ceil(2) {
        let dot: f64 = (0..m - 2 * shift).map(|k| h[k] * h[k + 2 * shift]).sum();
        if dot.abs() > TOLERANCE {
            violations.push(format!(
                "shift-orthogonality violated at shift 2·{shift} (Σ h_k h_(k+{}) = {dot})",
                2 * shift
            ));
        }
    }
    let mirror = quadrature_mirror(h);
    if let Some(k) = (0..m).find(|&k| (mirror[k] - g[k]).abs() > TOLERANCE) {
        violations.push(format!(
            "quadrature-mirror relation violated at tap {k}: g = {}, expected {}",
            g[k], mirror[k]
        ));
    }
    let sum_g: f64 = g.iter().sum();
    if sum_g.abs() > TOLERANCE {
        violations.push(format!("high-pass sum ≠ 0 (got {sum_g})"));
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_family_is_valid_at_tight_tolerance() {
        for fam in Family::ALL {
            let fb = fam.filter();
            assert!(validate(&fb).is_empty(), "{fam}: {:?}", validate(&fb));
            let h = fb.lowpass();
            let sum: f64 = h.iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12, "{fam}");
            let e: f64 = h.iter().map(|v| v * v).sum();
            assert!((e - 1.0).abs() < 1e-12, "{fam}");
            let sg: f64 = fb.highpass().iter().sum();
            assert!(sg.abs() < 1e-12, "{fam}");
            for s in 1..h.len() / 2 {
                let d: f64 = (0..h.len() - 2 * s).map(|k| h[k] * h[k + 2 * s]).sum();
                assert!(d.abs() < 1e-12, "{fam} shift {s}: {d}");
            }
        }
    }

    #[test]
    fn haar_taps() {
        let fb = get_filter("haar").unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(fb.lowpass(), &[r, r]);
        assert_eq!(fb.highpass(), &[r, -r]);
    }

    #[test]
    fn db4_closed_form() {
        let fb = get_filter("db4").unwrap();
        let expected = [
            0.482_962_913_144_534_1,
            0.836_516_303_737_807_9,
            0.224_143_868_042_013_4,
            -0.129_409_522_551_260_4,
        ];
        for (a, b) in fb.lowpass().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn unknown_name_lists_families() {
        let err = get_filter("sym20").unwrap_err();
        let msg = err.to_string();
        for fam in Family::ALL {
            assert!(msg.contains(fam.name()), "{msg}");
        }
    }

    #[test]
    fn unnormalized_haar_is_reported() {
        let fb = FilterBank::from_lowpass("bad", vec![1.0, 1.0]);
        let v = validate(&fb);
        assert!(v.iter().any(|s| s.contains("sum ≠ √2")), "{v:?}");
        assert!(v.iter().any(|s| s.contains("energy ≠ 1")), "{v:?}");
    }

    #[test]
    fn swapped_db4_taps_break_shift_orthogonality() {
        let mut h = Family::Db4.filter().lowpass().to_vec();
        h.swap(0, 1);
        let direct: f64 = h[0] * h[2] + h[1] * h[3];
        assert!(direct.abs() > 1e-3);
        let v = validate(&FilterBank::from_lowpass("db4-swapped", h));
        assert!(v.iter().any(|s| s.contains("shift-orthogonality")), "{v:?}");
    }

    #[test]
    fn broken_mirror_is_reported() {
        let h = Family::Haar.filter().lowpass().to_vec();
        let g = vec![-h[0], h[1]];
        let v = validate(&FilterBank::from_taps("flip", h, g));
        assert!(v.iter().any(|s| s.contains("quadrature-mirror")), "{v:?}");
    }

    #[test]
    fn highpass_annihilates_constants() {
        for fam in Family::ALL {
            let fb = fam.filter();
            let g = fb.highpass();
            let signal = [3.7; 32];
            for t in 0..signal.len() {
                let v: f64 = g
                    .iter()
                    .enumerate()
                    .map(|(k, gk)| gk * signal[(t + k) % signal.len()])
                    .sum();
                assert!(v.abs() < 1e-12, "{fam}");
            }
        }
    }
}
