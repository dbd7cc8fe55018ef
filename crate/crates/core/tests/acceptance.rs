//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; the process fails if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use wavecorr::depstats::{fisher_ci, kendall_ci, kendall_interval, kendall_tau, VarianceMode};
use wavecorr::dwt1d::{build_dwt_matrix, dwt_forward, dwt_inverse, LevelLabel, Scheme};
use wavecorr::filterbank::Family;
use wavecorr::multiscale::{correlogram, correlogram_2d, scale_decomposition, CorrelogramOptions, Measure};
use wavecorr::ndwt1d::{build_ndwt_matrix, max_depth, ndwt_forward};
use wavecorr::simgen::{simulate_ar_pair, simulate_image_pair, ARSystem, ImagePairConfig};

const Z975: f64 = 1.959_963_984_540_054;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Textbook two-pass sample covariance (1/n) and correlation.
fn cov_corr(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let n = x.len() as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (sxy / n, sxy / (sxx * syy).sqrt())
}

fn dyadic_levels(n: usize) -> usize {
    n.trailing_zeros() as usize
}

fn perfect_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in [8, 64, 512] {
        for fam in Family::ALL {
            let fb = fam.filter();
            for levels in 1..=dyadic_levels(n) {
                for _ in 0..100 {
                    let y = normals(&mut rng, n);
                    let back = dwt_inverse(&dwt_forward(&y, &fb, levels).unwrap(), &fb).unwrap();
                    let err = y.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    worst = worst.max(err);
                    cases += 1;
                }
            }
        }
    }
    outcome(worst < 1e-10, format!("{cases} round trips, max error {worst:.2e}"))
}

fn matrix_orthogonality() -> Outcome {
    let mut worst_gram: f64 = 0.0;
    let mut dwt_cases = 0;
    for n in [2, 4, 8, 16, 32, 64] {
        for fam in Family::ALL {
            for levels in 1..=dyadic_levels(n) {
                let w = build_dwt_matrix(n, &fam.filter(), levels).unwrap();
                worst_gram = worst_gram.max(w.max_gram_deviation());
                dwt_cases += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst_apply: f64 = 0.0;
    let mut ndwt_cases = 0;
    for n in 2..=32 {
        for fam in Family::ALL {
            let fb = fam.filter();
            for levels in 1..=max_depth(n, fb.len()) {
                let m = build_ndwt_matrix(n, &fb, levels).unwrap();
                for _ in 0..5 {
                    let y = normals(&mut rng, n);
                    let via_matrix = m.apply(&y).unwrap();
                    let direct = ndwt_forward(&y, &fb, levels).unwrap().flatten();
                    let err = via_matrix.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    worst_apply = worst_apply.max(err);
                }
                ndwt_cases += 1;
            }
        }
    }
    outcome(
        worst_gram < 1e-10 && worst_apply < 1e-10 && ndwt_cases > 0,
        format!(
            "{dwt_cases} DWT matrices, max |WW^T - I| {worst_gram:.2e}; {ndwt_cases} NDWT matrices, max deviation {worst_apply:.2e}"
        ),
    )
}

fn decomposition_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let (mut worst_cov, mut worst_rho): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let x = normals(&mut rng, 256);
        let y: Vec<f64> = normals(&mut rng, 256).iter().zip(&x).map(|(e, a)| 0.5 * a + e).collect();
        let (cov, rho) = cov_corr(&x, &y);
        for fam in [Family::Haar, Family::Db4] {
            for levels in [2, 4, 8] {
                let d = scale_decomposition(&x, &y, &fam.filter(), levels).unwrap();
                let cov_sum: f64 = d.terms.iter().map(|t| t.weighted_covariance).sum();
                let rho_sum: f64 = d.terms.iter().map(|t| t.weight * t.correlation.unwrap_or(0.0)).sum();
                worst_cov = worst_cov.max((cov_sum - cov).abs());
                worst_rho = worst_rho.max((rho_sum - rho).abs());
            }
        }
    }
    outcome(
        worst_cov < 1e-10 && worst_rho < 1e-10,
        format!("600 decompositions, max covariance gap {worst_cov:.2e}, max correlation gap {worst_rho:.2e}"),
    )
}

fn brute_force_counts(x: &[f64], y: &[f64]) -> (u64, u64) {
    let (mut c, mut d) = (0, 0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if (x[i] - x[j]) * (y[i] - y[j]) > 0.0 {
                c += 1;
            } else {
                d += 1;
            }
        }
    }
    (c, d)
}

fn kendall_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(2..=300);
        let x = normals(&mut rng, n);
        let y: Vec<f64> = x.iter().map(|v| rng.random_range(-1.0..1.0) + 0.3 * v).collect();
        let fast = kendall_tau(&x, &y).unwrap();
        if (fast.concordant, fast.discordant) != brute_force_counts(&x, &y) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("500 pairs, {mismatches} mismatched (C, D) counts"))
}

fn ci_point_checks() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, got: f64, oracle: f64, stated: f64| {
        let pass = (got - oracle).abs() < 1e-9 && (got - stated).abs() < 5e-4;
        ok &= pass;
        notes.push(format!("{name}={got:.4}"));
    };
    let a = fisher_ci(0.0, 12, 0.05, false).unwrap();
    let half = (Z975 / 3.0).tanh();
    check("fisher(0,12).upper", a.upper, half, 0.5735);
    check("fisher(0,12).lower", a.lower, -half, -0.5735);
    let b = fisher_ci(0.5, 103, 0.05, false).unwrap();
    let w = 0.5f64.atanh();
    check("fisher(0.5,103).lower", b.lower, (w - Z975 / 10.0).tanh(), 0.3393);
    check("fisher(0.5,103).upper", b.upper, (w + Z975 / 10.0).tanh(), 0.6319);
    let k = kendall_interval(0.0, 10, 0.05).unwrap();
    let kh = Z975 * (2.0 * 25.0 / (9.0 * 10.0 * 9.0f64)).sqrt();
    check("kendall(0,10).upper", k.upper, kh, 0.4869);
    check("kendall(0,10).lower", k.lower, -kh, -0.4869);
    outcome(ok, notes.join(", "))
}

fn ci_coverage() -> Outcome {
    let rho: f64 = 0.4;
    let tau = 2.0 / std::f64::consts::PI * rho.asin();
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let (mut fisher_hits, mut kendall_hits) = (0, 0);
    let reps = 2000;
    let n = 500;
    let c = (1.0 - rho * rho).sqrt();
    for _ in 0..reps {
        let x = normals(&mut rng, n);
        let y: Vec<f64> = normals(&mut rng, n).iter().zip(&x).map(|(e, a)| rho * a + c * e).collect();
        let (_, r) = cov_corr(&x, &y);
        if fisher_ci(r, n, 0.05, false).unwrap().contains(rho) {
            fisher_hits += 1;
        }
        let stats = kendall_tau(&x, &y).unwrap();
        if kendall_ci(&stats, 0.05, VarianceMode::Asymptotic).unwrap().contains(tau) {
            kendall_hits += 1;
        }
    }
    let fc = fisher_hits as f64 / reps as f64;
    let kc = kendall_hits as f64 / reps as f64;
    outcome(
        (0.93..=0.97).contains(&fc) && (0.92..=0.97).contains(&kc),
        format!("Fisher coverage {fc:.4} (need [0.93, 0.97]), Kendall coverage {kc:.4} (need [0.92, 0.97])"),
    )
}

/// Stationary correlation of the coupled AR(1) pair by iterating the
/// covariance recursion to convergence.
fn stationary_oracle(coupling: f64) -> f64 {
    let (mut vx, mut vy, mut cxy) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..2000 {
        let nvx = 0.25 * vx + 1.0;
        let ncxy = 0.5 * coupling * vx + 0.25 * cxy;
        let nvy = coupling * coupling * vx + 0.25 * vy + coupling * cxy + 1.0;
        (vx, vy, cxy) = (nvx, nvy, ncxy);
    }
    cxy / (vx * vy).sqrt()
}

fn ar_reproduction() -> Outcome {
    let opts = CorrelogramOptions::new(Family::Haar.filter(), 6, Scheme::Orthogonal, Measure::Pearson);
    let level_mean = |system: u8, label: LevelLabel| {
        let vals: Vec<f64> = (0..100)
            .map(|seed| {
                let (x, y) = simulate_ar_pair(&ARSystem::new(system, 512, seed)).unwrap();
                correlogram(&x, &y, &[], &opts).unwrap().entry(label).unwrap().estimate.unwrap()
            })
            .collect();
        mean(&vals)
    };
    let s1 = (level_mean(1, LevelLabel::Detail(1)), level_mean(1, LevelLabel::Detail(6)));
    let s2 = (level_mean(2, LevelLabel::Detail(1)), level_mean(2, LevelLabel::Detail(6)));
    let pattern = s1.1 > s1.0 && s2.1 > s2.0 && s2.1 > s1.1;

    let long_run = |system: u8| {
        let cfg = ARSystem { system_id: system, n: 1_000_000, seed: 77, burn_in: 10_000 };
        let (x, y) = simulate_ar_pair(&cfg).unwrap();
        cov_corr(&x, &y).1
    };
    let (r1, r2) = (long_run(1), long_run(2));
    let (o1, o2) = (stationary_oracle(0.5), stationary_oracle(1.0));
    let anchors = (r1 - o1).abs() < 0.01 && (r2 - o2).abs() < 0.01 && r2 > r1;
    outcome(
        pattern && anchors,
        format!(
            "system 1 mean level1/level6 {:.3}/{:.3}, system 2 {:.3}/{:.3}; long-run {r1:.4} vs {o1:.4}, {r2:.4} vs {o2:.4}",
            s1.0, s1.1, s2.0, s2.1
        ),
    )
}

fn shift_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let fam = Family::ALL[rng.random_range(0..Family::ALL.len())];
        let n = rng.random_range(32..=128);
        let levels = rng.random_range(1..=max_depth(n, fam.filter().len()).min(3));
        let shift = rng.random_range(1..n);
        let x = normals(&mut rng, n);
        let y: Vec<f64> = normals(&mut rng, n).iter().zip(&x).map(|(e, a)| 0.6 * a + e).collect();
        let rot = |v: &[f64]| (0..n).map(|t| v[(t + n - shift) % n]).collect::<Vec<_>>();
        let opts = CorrelogramOptions::new(fam.filter(), levels, Scheme::Nondecimated, Measure::Pearson);
        let base = correlogram(&x, &y, &[], &opts).unwrap();
        let moved = correlogram(&rot(&x), &rot(&y), &[], &opts).unwrap();
        for (a, b) in base.entries.iter().zip(&moved.entries) {
            worst = worst.max((a.estimate.unwrap() - b.estimate.unwrap()).abs());
        }
    }
    outcome(worst < 1e-10, format!("50 cases, max levelwise discrepancy {worst:.2e}"))
}

fn image_pipeline() -> Outcome {
    let opts = CorrelogramOptions::new(Family::Coif6.filter(), 3, Scheme::Nondecimated, Measure::Pearson);
    let mut ordered = 0;
    for seed in 0..50 {
        let (a8, b8) = simulate_image_pair(&ImagePairConfig::new(64, 0.8, seed)).unwrap();
        let (a2, b2) = simulate_image_pair(&ImagePairConfig::new(64, 0.2, seed + 10_000)).unwrap();
        let hi = correlogram_2d(&a8, &b8, &[], &opts).unwrap();
        let lo = correlogram_2d(&a2, &b2, &[], &opts).unwrap();
        if hi.entries.iter().zip(&lo.entries).all(|(h, l)| h.estimate > l.estimate) {
            ordered += 1;
        }
    }
    let (a, _) = simulate_image_pair(&ImagePairConfig::new(64, 0.5, 3)).unwrap();
    let same = correlogram_2d(&a, &a, &[], &opts).unwrap();
    let ones = same.entries.len() == 4 && same.entries.iter().all(|e| e.estimate == Some(1.0));
    outcome(
        ordered >= 45 && ones,
        format!("dependence 0.8 above 0.2 at every level in {ordered}/50 trials; A=B all ones: {ones}"),
    )
}

fn wavecorr(args: &[&str], dir: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_wavecorr"))
        .args(args)
        .current_dir(dir)
        .env_remove("WAVECORR_THREADS")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn golden_files() -> Outcome {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut stable = true;
    for round in 0..2 {
        let ran = wavecorr(&["simulate", "--system", "1", "--n", "512", "--seed", "7", "--out-dir", "sim"], d)
            && wavecorr(
                &["correlate", "sim/x.csv", "sim/y.csv", "--wavelet", "haar", "--levels", "6", "--out", "c.json", "--csv", "c.csv"],
                d,
            )
            && wavecorr(&["decompose", "sim/x.csv", "sim/y.csv", "--levels", "6", "--out", "d.csv"], d);
        if !ran {
            return outcome(false, format!("command failed in round {round}"));
        }
        for (produced, stored) in [
            ("sim/x.csv", "system1_seed7_x.csv"),
            ("sim/y.csv", "system1_seed7_y.csv"),
            ("c.csv", "system1_seed7_correlogram.csv"),
            ("c.json", "system1_seed7_correlogram.json"),
            ("d.csv", "system1_seed7_decomposition.csv"),
        ] {
            stable &= std::fs::read(d.join(produced)).ok() == std::fs::read(golden.join(stored)).ok();
        }
    }
    let text = std::fs::read_to_string(d.join("d.csv")).unwrap_or_default();
    let footer = |key: &str| {
        text.lines()
            .find(|l| l.starts_with(key))
            .and_then(|l| l.rsplit(',').next())
            .and_then(|v| v.parse::<f64>().ok())
    };
    let gap = match (footer("recovered_rho,"), footer("direct_rho,")) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => f64::INFINITY,
    };
    outcome(
        stable && gap < 1e-10,
        format!("outputs byte-identical to golden files: {stable}; footer gap {gap:.2e}"),
    )
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("perfect reconstruction", Duration::from_secs(5), perfect_reconstruction),
        ("matrix orthogonality", Duration::from_secs(60), matrix_orthogonality),
        ("scale decomposition exactness", Duration::from_secs(5), decomposition_exactness),
        ("kendall equivalence", Duration::from_secs(10), kendall_equivalence),
        ("interval point checks", Duration::from_secs(60), ci_point_checks),
        ("interval coverage", Duration::from_secs(60), ci_coverage),
        ("coupled AR(1) reproduction", Duration::from_secs(30), ar_reproduction),
        ("NDWT shift invariance", Duration::from_secs(60), shift_invariance),
        ("2D pipeline", Duration::from_secs(30), image_pipeline),
        ("end-to-end golden files", Duration::from_secs(60), golden_files),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.ok && elapsed <= *limit;
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {:<30} {}  ({:.2}s, limit {}s) {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            result.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
