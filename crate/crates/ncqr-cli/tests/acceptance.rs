//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line (run with `-- --nocapture` to see them live). Criteria
//! exercise the library end to end: monotonicity of searched surfaces, the
//! reduced-vs-brute-force solve equivalence, kernel limit behavior, sampler
//! calibration, crossing prevalence and repair on the built-in designs,
//! accuracy against exact quantiles, the shrinking-bandwidth trend with
//! sample size, affine preservation under LGPR, and frozen hand values.

use std::sync::Mutex;
use std::time::Instant;

use ncqr_core::ald::{ald_quantile, AldParams};
use ncqr_core::basis::{build_design, BasisSpec, DesignMatrix};
use ncqr_core::gp_adjust::{
    adjust_surface, detect_crossing, gp_predict, gp_predict_full_sample, se_kernel,
    search_min_bandwidth, AdjustedQuantileSurface, AdjustmentMode, GpConfig, SourceStats,
};
use ncqr_core::induced::StageOneStats;
use ncqr_core::sampler::{fit_all_levels, fit_ald_regression, SamplerConfig};
use ncqr_core::simulate::{rmise, std_normal_quantile, SimulatedData, SimulationDesign};
use ncqr_core::{derive_seed, QuantileLevelGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const CROSSING_TOL: f64 = 1e-10;
const SEARCH_TIME_LIMIT_SECS: f64 = 5.0;
const EQUIVALENCE_TOL: f64 = 1e-8;
const SMALL_BANDWIDTH: f64 = 1e-6;
const LARGE_BANDWIDTH: f64 = 1e6;
const SMALL_B_REL_TOL: f64 = 1e-4;
const LARGE_B_REL_TOL: f64 = 1e-6;
const QUANTILE_RECOVERY_TOL: f64 = 0.2;
const RMISE_WORSE_FACTOR: f64 = 1.10;
const AFFINE_RESIDUAL_TOL: f64 = 1e-8;
const NORMAL_QUANTILE_TOL: f64 = 1e-9;

/// The heavy criteria each saturate the machine; run them one at a time so
/// per-search wall-clock limits are not distorted by sibling tests.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} - {detail}");
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// Shortened chains for study-scale criteria. Long enough to mix on the
/// designs used here; the defaults would push the suite into hours.
fn study_sampler() -> SamplerConfig {
    SamplerConfig {
        total_iterations: 800,
        burn_in: 150,
        thin: 1,
        ..SamplerConfig::default()
    }
}

fn grid_91() -> QuantileLevelGrid {
    QuantileLevelGrid::from_range(0.05, 0.95, 0.01).unwrap()
}

/// Synthetic stage-1 moments over a (points x levels) lattice. Every tenth
/// instance is exactly monotone; the rest overlay heavy noise and a few deep
/// adversarial dips on monotone base curves, which crosses catastrophically.
///
/// The scale-moment variance and covariance are zero so each source
/// advertises the same noise at every target level. That is the regime the
/// restoration argument needs: level-stable noise makes the pooling weights
/// constant in tau once the kernel flattens, and a constant positive
/// combination of per-source monotone curves is monotone no matter how
/// badly the means dip. With target-varying noise a dipped source can keep
/// dominant weight at its own level at every bandwidth, and no search can
/// succeed; realistic surfaces of that kind are exercised end to end by the
/// study criteria instead.
fn random_stage_one(
    rng: &mut ChaCha8Rng,
    grid: &QuantileLevelGrid,
    points: usize,
    draws: usize,
    monotone: bool,
) -> StageOneStats {
    let p = grid.len();
    let noise_sd = if monotone {
        0.0
    } else {
        0.05 + 0.75 * rng.random::<f64>()
    };
    let mut moments = Vec::with_capacity(points * p);
    for _ in 0..points {
        let intercept = -2.0 + 4.0 * rng.random::<f64>();
        let scale = 0.5 + 1.5 * rng.random::<f64>();
        for &tau in grid.levels() {
            let m_loc = intercept + scale * std_normal_quantile(tau).unwrap() + noise_sd * normal(rng);
            let m_scale = 0.2 + rng.random::<f64>();
            let v_loc = 0.005 + 0.095 * rng.random::<f64>();
            moments.push([m_loc, m_scale, v_loc, 0.0, 0.0]);
        }
    }
    if !monotone {
        for _ in 0..5 {
            let i = rng.random_range(0..points);
            let j = rng.random_range(0..p);
            moments[i * p + j][0] -= 1.0 + 2.0 * rng.random::<f64>();
        }
    }
    StageOneStats::from_parts(grid.levels().to_vec(), points, vec![draws; p], moments).unwrap()
}

struct PipelineRun {
    bandwidth: f64,
    crossings_standard: usize,
    crossings_adjusted: usize,
    standard: Vec<f64>,
    surface: AdjustedQuantileSurface,
    data: SimulatedData,
}

/// Generate -> fit -> adjust, the full pipeline on one simulated dataset.
/// `eval_points` caps how many observations become evaluation points.
fn run_pipeline(
    design: SimulationDesign,
    n: usize,
    basis: &BasisSpec,
    grid: &QuantileLevelGrid,
    sampler: &SamplerConfig,
    mode: AdjustmentMode,
    seed: u64,
    eval_points: Option<usize>,
) -> PipelineRun {
    let data = design.generate(n, seed).unwrap();
    let dm = build_design(&data.x, data.num_covariates, basis).unwrap();
    let mut cfg = sampler.clone();
    cfg.seed = derive_seed(seed, 1);
    let fits = fit_all_levels(&dm, &data.y, grid, &cfg).unwrap();
    let rows = match eval_points {
        Some(m) => &dm.values()[..m * dm.cols],
        None => dm.values(),
    };
    let stats = StageOneStats::build(&fits, rows).unwrap();
    let standard = stats.standard_surface();
    let crossings_standard =
        detect_crossing(grid.levels(), stats.num_points(), &standard, CROSSING_TOL).len();
    let template = GpConfig::new(1.0, mode);
    let (bandwidth, surface) = search_min_bandwidth(&stats, &template).unwrap();
    let crossings_adjusted = surface.detect_crossing(CROSSING_TOL).len();
    PipelineRun {
        bandwidth,
        crossings_standard,
        crossings_adjusted,
        standard,
        surface,
        data,
    }
}

#[test]
fn criterion_1_searched_surfaces_never_cross_within_time_budget() {
    let _guard = serial();
    let grid = grid_91();
    let points = 100;
    let template = GpConfig::new(1.0, AdjustmentMode::Gpr);
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC01);
    let mut failures: Vec<String> = Vec::new();
    let mut max_secs = 0.0f64;
    for instance in 0..100 {
        let stats = random_stage_one(&mut rng, &grid, points, 50, instance % 10 == 0);
        let started = Instant::now();
        match search_min_bandwidth(&stats, &template) {
            Ok((bandwidth, surface)) => {
                let secs = started.elapsed().as_secs_f64();
                max_secs = max_secs.max(secs);
                let violations = surface.detect_crossing(CROSSING_TOL).len();
                if violations > 0 {
                    failures.push(format!("instance {instance}: {violations} violations at b={bandwidth:.3e}"));
                }
                if secs >= SEARCH_TIME_LIMIT_SECS {
                    failures.push(format!("instance {instance}: search took {secs:.2}s"));
                }
            }
            Err(err) => failures.push(format!("instance {instance}: search failed: {err}")),
        }
    }
    let pass = failures.is_empty();
    report(
        1,
        pass,
        &format!(
            "100 randomized 91-level surfaces at 100 points, zero violations at tol {CROSSING_TOL:.0e}, max search {max_secs:.2}s (limit {SEARCH_TIME_LIMIT_SECS}s)"
        ),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_2_reduced_solve_matches_full_sample_solve() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC02);
    let mut failures: Vec<String> = Vec::new();
    let mut max_gap = 0.0f64;
    for instance in 0..200 {
        let p = rng.random_range(2..=5);
        let levels: Vec<f64> = loop {
            let mut draft: Vec<f64> = (0..p).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect();
            draft.sort_by(f64::total_cmp);
            if draft.windows(2).all(|w| w[1] - w[0] >= 0.01) {
                break draft;
            }
        };
        let draws: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                let t = rng.random_range(2..=50);
                let center = -3.0 + 6.0 * rng.random::<f64>();
                (0..t).map(|_| center + normal(&mut rng)).collect()
            })
            .collect();
        let variances: Vec<f64> = (0..p).map(|_| 0.05 + 1.95 * rng.random::<f64>()).collect();
        let num_draws: Vec<usize> = draws.iter().map(Vec::len).collect();
        let means: Vec<f64> = draws
            .iter()
            .map(|d| d.iter().sum::<f64>() / d.len() as f64)
            .collect();
        let mut cfg = GpConfig::new(0.05 + 1.95 * rng.random::<f64>(), AdjustmentMode::Gpr);
        cfg.sigma_k_sq = 10.0 + 190.0 * rng.random::<f64>();
        cfg.jitter = 1e-10 * cfg.sigma_k_sq;
        let tau = levels[rng.random_range(0..p)];

        let src = SourceStats {
            levels: &levels,
            means: &means,
            variances: &variances,
            num_draws: &num_draws,
        };
        let reduced = gp_predict(&src, tau, &cfg).unwrap();
        let (full_mean, full_var) =
            gp_predict_full_sample(&levels, &draws, &variances, tau, &cfg).unwrap();
        let gap = (reduced.mean - full_mean)
            .abs()
            .max((reduced.variance - full_var).abs());
        max_gap = max_gap.max(gap);
        if gap > EQUIVALENCE_TOL {
            failures.push(format!("instance {instance}: gap {gap:.3e}"));
        }
    }
    let pass = failures.is_empty();
    report(
        2,
        pass,
        &format!("200 random instances (P<=5, T<=50): reduced vs full-sample solve, max gap {max_gap:.2e} (tol {EQUIVALENCE_TOL:.0e})"),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_3_bandwidth_limits_recover_identity_and_plain_average() {
    let _guard = serial();
    let grid = grid_91();
    let p = grid.len();
    let points = 3;

    // Small bandwidth: only the matched source survives in the kernel, so
    // the adjusted surface collapses onto the standard one.
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC03);
    let mut moments = Vec::with_capacity(points * p);
    for _ in 0..points {
        let intercept = -2.0 + 4.0 * rng.random::<f64>();
        let scale = 0.5 + 1.5 * rng.random::<f64>();
        for &tau in grid.levels() {
            let m_loc = intercept + scale * std_normal_quantile(tau).unwrap() + 0.3 * normal(&mut rng);
            let v_loc = 0.01 + 0.09 * rng.random::<f64>();
            moments.push([m_loc, 0.2 + rng.random::<f64>(), v_loc, 0.0, 0.0]);
        }
    }
    let stats =
        StageOneStats::from_parts(grid.levels().to_vec(), points, vec![500; p], moments).unwrap();
    let standard = stats.standard_surface();
    let mut cfg = GpConfig::new(SMALL_BANDWIDTH, AdjustmentMode::Gpr);
    let surface = adjust_surface(&stats, &cfg).unwrap();
    let range = standard.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - standard.iter().copied().fold(f64::INFINITY, f64::min);
    let max_dev = surface
        .values()
        .iter()
        .zip(&standard)
        .map(|(a, s)| (a - s).abs())
        .fold(0.0f64, f64::max);
    let small_ok = max_dev <= SMALL_B_REL_TOL * range;

    // Large bandwidth with equalized noise: every source gets the same
    // weight, so each prediction is the plain average over sources.
    let mut moments = Vec::with_capacity(points * p);
    let mut averages = Vec::with_capacity(points);
    for _ in 0..points {
        let mut sum = 0.0;
        for _ in 0..p {
            let m_loc = 1.0 + 5.0 * rng.random::<f64>();
            sum += m_loc;
            moments.push([m_loc, 0.0, 0.1, 0.0, 0.0]);
        }
        averages.push(sum / p as f64);
    }
    let stats =
        StageOneStats::from_parts(grid.levels().to_vec(), points, vec![100; p], moments).unwrap();
    cfg.bandwidth = LARGE_BANDWIDTH;
    let surface = adjust_surface(&stats, &cfg).unwrap();
    let mut max_rel = 0.0f64;
    for i in 0..points {
        for l in 0..p {
            let rel = (surface.value(i, l) - averages[i]).abs() / averages[i].abs();
            max_rel = max_rel.max(rel);
        }
    }
    let large_ok = max_rel <= LARGE_B_REL_TOL;

    let pass = small_ok && large_ok;
    report(
        3,
        pass,
        &format!(
            "b={SMALL_BANDWIDTH:.0e} tracks the standard surface (max dev {:.2e} vs {:.2e} allowed); b={LARGE_BANDWIDTH:.0e} with equal noise matches the plain average (max rel dev {max_rel:.2e}, tol {LARGE_B_REL_TOL:.0e})",
            max_dev,
            SMALL_B_REL_TOL * range
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_sampler_recovers_empirical_quantiles() {
    let _guard = serial();
    let n = 500;
    let levels = [0.1, 0.5, 0.9];
    let sampler = SamplerConfig {
        total_iterations: 3000,
        burn_in: 500,
        thin: 5,
        ..SamplerConfig::default()
    };
    let design = DesignMatrix::from_raw(vec![1.0; n], n, 1).unwrap();
    let seeds: Vec<u64> = (0..20).collect();
    let outcomes: Vec<bool> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xAC04, seed));
            let y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut sorted = y.clone();
            sorted.sort_by(f64::total_cmp);
            levels.iter().all(|&p| {
                let mut cfg = sampler.clone();
                cfg.seed = derive_seed(seed, 1 + (p * 10.0) as u64);
                let draws = fit_ald_regression(&design, &y, p, &cfg).unwrap();
                let posterior_mean: f64 = (0..draws.num_draws)
                    .map(|t| draws.beta_draw(t)[0])
                    .sum::<f64>()
                    / draws.num_draws as f64;
                let oracle = sorted[((n - 1) as f64 * p).ceil() as usize];
                (posterior_mean - oracle).abs() <= QUANTILE_RECOVERY_TOL
            })
        })
        .collect();
    let passes = outcomes.iter().filter(|&&ok| ok).count();
    let pass = passes >= 18;
    report(
        4,
        pass,
        &format!(
            "intercept-only fits on n={n} normal data: {passes}/20 seeds inside +-{QUANTILE_RECOVERY_TOL} of the empirical quantile at tau in {{0.1, 0.5, 0.9}} (need >= 18)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_standard_fits_cross_often_and_adjusted_never() {
    let _guard = serial();
    let grid = grid_91();
    let sampler = study_sampler();
    let basis = BasisSpec::linear();
    let replicates = 50usize;
    let mut failures: Vec<String> = Vec::new();
    let mut summary = String::new();
    for design_id in 1..=4u32 {
        let design = SimulationDesign::from_id(design_id).unwrap();
        let runs: Vec<(usize, usize)> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(0xAC05 + design_id as u64, r as u64);
                let run = run_pipeline(
                    design,
                    100,
                    &basis,
                    &grid,
                    &sampler,
                    AdjustmentMode::Gpr,
                    seed,
                    None,
                );
                (run.crossings_standard, run.crossings_adjusted)
            })
            .collect();
        let crossed_before = runs.iter().filter(|(b, _)| *b > 0).count();
        let crossed_after = runs.iter().filter(|(_, a)| *a > 0).count();
        let needed = if design_id == 4 { 45 } else { 35 };
        if crossed_before < needed {
            failures.push(format!(
                "design {design_id}: only {crossed_before}/{replicates} standard fits crossed (need >= {needed})"
            ));
        }
        if crossed_after != 0 {
            failures.push(format!(
                "design {design_id}: {crossed_after} adjusted fits still cross"
            ));
        }
        summary.push_str(&format!("D{design_id} {crossed_before}/{replicates}; "));
    }
    let pass = failures.is_empty();
    report(
        5,
        pass,
        &format!(
            "standard-fit crossing prevalence at n=100 over 91 levels: {summary}adjusted fits crossed in 0 replicates"
        ),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_6_adjustment_does_not_hurt_rmise() {
    let _guard = serial();
    // The full 91-level grid matters here: with sources only 0.05 apart the
    // minimal bandwidth is large relative to the spacing and over-smooths
    // steep tail regions (design 2's intercept has slope 1/tau near the
    // edges), which turns tail levels into artificial losses.
    let grid = grid_91();
    let p = grid.len();
    let sampler = study_sampler();
    let replicates = 50usize;
    let mut failures: Vec<String> = Vec::new();
    let mut summary = String::new();
    for (design_id, basis) in [
        (2u32, BasisSpec::linear()),
        (3, BasisSpec::linear()),
        (5, BasisSpec::cubic_spline(25)),
    ] {
        let design = SimulationDesign::from_id(design_id).unwrap();
        let per_rep: Vec<(Vec<f64>, Vec<f64>)> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(0xAC06 + design_id as u64, r as u64);
                let run = run_pipeline(
                    design,
                    100,
                    &basis,
                    &grid,
                    &sampler,
                    AdjustmentMode::Gpr,
                    seed,
                    None,
                );
                let k = run.data.num_covariates;
                let n = run.data.y.len();
                let mut truth = vec![0.0; n];
                let mut column = vec![0.0; n];
                let mut rmise_standard = Vec::with_capacity(p);
                let mut rmise_adjusted = Vec::with_capacity(p);
                for (j, &tau) in grid.levels().iter().enumerate() {
                    for i in 0..n {
                        truth[i] = design
                            .true_quantile(&run.data.x[i * k..(i + 1) * k], tau)
                            .unwrap();
                    }
                    for i in 0..n {
                        column[i] = run.standard[i * p + j];
                    }
                    rmise_standard.push(rmise(&truth, &column).unwrap());
                    for i in 0..n {
                        column[i] = run.surface.value(i, j);
                    }
                    rmise_adjusted.push(rmise(&truth, &column).unwrap());
                }
                (rmise_standard, rmise_adjusted)
            })
            .collect();
        let mut improved = 0usize;
        let mut worst_ratio = 0.0f64;
        for j in 0..p {
            let mean_std: f64 =
                per_rep.iter().map(|(s, _)| s[j]).sum::<f64>() / replicates as f64;
            let mean_adj: f64 =
                per_rep.iter().map(|(_, a)| a[j]).sum::<f64>() / replicates as f64;
            if mean_adj <= mean_std {
                improved += 1;
            }
            worst_ratio = worst_ratio.max(mean_adj / mean_std);
        }
        // 60% of 91 levels rounds up to 55.
        if improved * 10 < p * 6 {
            failures.push(format!(
                "design {design_id}: adjusted mean RMISE better at only {improved}/{p} levels"
            ));
        }
        if worst_ratio > RMISE_WORSE_FACTOR {
            failures.push(format!(
                "design {design_id}: adjusted mean RMISE {worst_ratio:.3}x standard at some level"
            ));
        }
        summary.push_str(&format!(
            "D{design_id} {improved}/{p} levels improved, worst ratio {worst_ratio:.3}; "
        ));
    }
    let pass = failures.is_empty();
    report(
        6,
        pass,
        &format!("mean RMISE over {replicates} replicates: {summary}limit {RMISE_WORSE_FACTOR}x"),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_7_fitted_bandwidth_shrinks_with_sample_size() {
    let _guard = serial();
    let grid = grid_91();
    let sampler = study_sampler();
    let basis = BasisSpec::linear();
    let design = SimulationDesign::from_id(1).unwrap();
    let replicates = 20usize;
    let median_for = |n: usize, stream: u64| -> f64 {
        let mut bandwidths: Vec<f64> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(stream, r as u64);
                run_pipeline(
                    design,
                    n,
                    &basis,
                    &grid,
                    &sampler,
                    AdjustmentMode::Gpr,
                    seed,
                    Some(100),
                )
                .bandwidth
            })
            .collect();
        bandwidths.sort_by(f64::total_cmp);
        0.5 * (bandwidths[replicates / 2 - 1] + bandwidths[replicates / 2])
    };
    let median_small = median_for(100, 0xAC07);
    let median_large = median_for(2000, 0xAC07 + 1000);
    let pass = median_large < median_small;
    report(
        7,
        pass,
        &format!(
            "median fitted bandwidth over {replicates} replicates: {median_large:.4e} at n=2000 vs {median_small:.4e} at n=100 (must shrink)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_lgpr_surfaces_stay_affine_in_x() {
    let _guard = serial();
    let grid = grid_91();
    let sampler = study_sampler();
    let basis = BasisSpec::linear();
    let design = SimulationDesign::from_id(3).unwrap();
    let mut worst = 0.0f64;
    let mut failures: Vec<String> = Vec::new();
    for rep in 0..3u64 {
        let run = run_pipeline(
            design,
            100,
            &basis,
            &grid,
            &sampler,
            AdjustmentMode::Lgpr,
            derive_seed(0xAC08, rep),
            None,
        );
        let n = run.data.y.len();
        let xs = &run.data.x;
        let x_mean: f64 = xs.iter().sum::<f64>() / n as f64;
        let x_var: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum::<f64>();
        for (j, &tau) in grid.levels().iter().enumerate() {
            let v_mean: f64 = (0..n).map(|i| run.surface.value(i, j)).sum::<f64>() / n as f64;
            let cov: f64 = (0..n)
                .map(|i| (xs[i] - x_mean) * (run.surface.value(i, j) - v_mean))
                .sum();
            let slope = cov / x_var;
            let intercept = v_mean - slope * x_mean;
            let residual = (0..n)
                .map(|i| (run.surface.value(i, j) - intercept - slope * xs[i]).abs())
                .fold(0.0f64, f64::max);
            worst = worst.max(residual);
            if residual >= AFFINE_RESIDUAL_TOL {
                failures.push(format!(
                    "replicate {rep}, tau {tau}: affine refit residual {residual:.3e}"
                ));
            }
        }
    }
    let pass = failures.is_empty();
    report(
        8,
        pass,
        &format!(
            "LGPR on a linear-truth design: worst affine refit residual {worst:.2e} across 3 replicates x 91 levels (tol {AFFINE_RESIDUAL_TOL:.0e})"
        ),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_9_frozen_math_spot_values() {
    let _guard = serial();
    let mut failures: Vec<String> = Vec::new();

    // The two closed-form branches of the standardized quantile offset meet
    // at tau = p: both evaluate to exactly zero there, and approaching the
    // boundary from either side stays within slope * step of zero.
    for k in 1..20 {
        let p = k as f64 * 0.05;
        let tau = p;
        let lower = (tau / p).ln() / (1.0 - p);
        let upper = -((1.0 - tau) / (1.0 - p)).ln() / p;
        if (lower - upper).abs() > 1e-12 {
            failures.push(format!("offset branches disagree at p={p}"));
        }
        let params = AldParams::new(0.0, 1.0, p).unwrap();
        if ald_quantile(&params, p).unwrap() != 0.0 {
            failures.push(format!("offset at tau=p not exactly zero for p={p}"));
        }
        let step = 1e-12;
        let below = ald_quantile(&params, p - step).unwrap().abs();
        let above = ald_quantile(&params, p + step).unwrap().abs();
        if below.max(above) > 1e-10 {
            failures.push(format!(
                "offset jumps approaching tau=p at p={p}: {below:.2e} / {above:.2e}"
            ));
        }
    }
    // Frozen offset hand values at p=0.5: c(0.1) = 2 ln(0.2), c(0.9) = -2 ln(0.2).
    let params = AldParams::new(0.0, 1.0, 0.5).unwrap();
    let two_ln_fifth = 2.0 * (0.2f64).ln();
    if (ald_quantile(&params, 0.1).unwrap() - two_ln_fifth).abs() > 1e-13 {
        failures.push("offset hand value at (p=0.5, tau=0.1)".into());
    }
    if (ald_quantile(&params, 0.9).unwrap() + two_ln_fifth).abs() > 1e-13 {
        failures.push("offset hand value at (p=0.5, tau=0.9)".into());
    }

    // Squared-exponential kernel: variance at zero distance, e^{-1/2} decay
    // one length-scale away.
    let cfg = GpConfig {
        sigma_k_sq: 2.0,
        bandwidth: 0.1,
        mode: AdjustmentMode::Gpr,
        jitter: 0.0,
    };
    if se_kernel(0.3, 0.3, &cfg) != 2.0 {
        failures.push("kernel at zero distance".into());
    }
    let expected = 2.0 * 0.6065306597126334;
    if (se_kernel(0.3, 0.4, &cfg) - expected).abs() > 1e-12 {
        failures.push("kernel one length-scale away".into());
    }

    // RMISE of a fixed error pattern: sqrt((9 + 16) / 2) = sqrt(12.5).
    let r = rmise(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
    if (r - 3.5355339059327378).abs() > 1e-12 {
        failures.push(format!("rmise hand value: {r}"));
    }

    // Normal quantile accuracy against frozen references.
    for (tau, reference) in [
        (0.5, 0.0),
        (0.975, 1.959963984540054),
        (0.9, 1.2815515655446004),
        (0.025, -1.959963984540054),
        (1e-9, -5.997807015007686),
    ] {
        let got = std_normal_quantile(tau).unwrap();
        if (got - reference).abs() > NORMAL_QUANTILE_TOL {
            failures.push(format!("normal quantile at {tau}: {got} vs {reference}"));
        }
    }

    let pass = failures.is_empty();
    report(
        9,
        pass,
        "offset branch continuity at tau=p, kernel and RMISE hand values, normal quantile references within 1e-9",
    );
    assert!(pass, "{failures:?}");
}
