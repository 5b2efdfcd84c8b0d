//! Quantile curves induced by a fitted ALD model.
//!
//! A fit at level p induces an entire quantile function: draw t gives
//! Q_t(tau) = mu_t + sigma_t c(tau, p), where c is the scale-free quantile
//! offset of the standardized ALD. Posterior moments over t are therefore
//! exact affine transforms of the joint (mu, sigma) moments, so the stats
//! for every (point, fit level, target tau) triple come from five cached
//! numbers instead of a pass over the draws.

use crate::ald::{check_level, quantile_offset};
use crate::error::Error;
use crate::fmath;
use crate::sampler::PosteriorDraws;
use crate::Result;
use alloc::format;
use alloc::vec::Vec;

/// Strictly increasing quantile levels, each inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileLevelGrid {
    levels: Vec<f64>,
}

impl QuantileLevelGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("quantile grid is empty".into()));
        }
        for &p in &levels {
            check_level(p)?;
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "quantile levels must be strictly increasing".into(),
            ));
        }
        Ok(QuantileLevelGrid { levels })
    }

    /// Inclusive arithmetic grid `start, start + step, ..., stop`. The stop
    /// must sit on the step lattice to within 1e-9.
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Config("grid step must be positive".into()));
        }
        if !(stop >= start) {
            return Err(Error::Config("grid stop must be at or above start".into()));
        }
        let count = fmath::round((stop - start) / step) as usize;
        if (start + count as f64 * step - stop).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "grid stop {stop} is not start + k * step for any integer k"
            )));
        }
        let levels = (0..=count).map(|i| start + i as f64 * step).collect();
        QuantileLevelGrid::new(levels)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Posterior mean and variance (sample variance, T - 1 denominator) of an
/// induced quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedQuantileStats {
    pub mean: f64,
    pub variance: f64,
    pub num_draws: usize,
}

/// Per-draw induced quantiles Q_t(tau) = location_t + scale_t c(tau, p).
pub fn induced_quantile_draws(
    location: &[f64],
    scale: &[f64],
    p: f64,
    tau: f64,
) -> Result<Vec<f64>> {
    check_level(p)?;
    check_level(tau)?;
    if location.len() != scale.len() {
        return Err(Error::shape(
            location.len(),
            scale.len(),
            "location and scale draw counts",
        ));
    }
    let c = quantile_offset(p, tau);
    Ok(location
        .iter()
        .zip(scale)
        .map(|(m, s)| m + s * c)
        .collect())
}

/// Sample mean and variance of the induced quantile draws, computed in one
/// pass (Welford). Needs at least two draws.
pub fn induced_stats(location: &[f64], scale: &[f64], p: f64, tau: f64) -> Result<InducedQuantileStats> {
    let draws = induced_quantile_draws(location, scale, p, tau)?;
    if draws.len() < 2 {
        return Err(Error::Data("variance needs at least two draws".into()));
    }
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for (t, &v) in draws.iter().enumerate() {
        let d = v - mean;
        mean += d / (t + 1) as f64;
        m2 += d * (v - mean);
    }
    Ok(InducedQuantileStats {
        mean,
        variance: m2 / (draws.len() - 1) as f64,
        num_draws: draws.len(),
    })
}

/// Stage-one estimate at tau: the posterior mean location of the fit. Only
/// meaningful when the fit level matches tau, so a mismatch is logged.
pub fn standard_estimate(draws: &PosteriorDraws, basis_row: &[f64], tau: f64) -> Result<f64> {
    check_level(tau)?;
    if (tau - draws.p).abs() > 1e-12 {
        log::warn!(
            "standard estimate at tau = {tau} read from a fit at p = {}",
            draws.p
        );
    }
    let loc = draws.location_draws(basis_row)?;
    Ok(loc.iter().sum::<f64>() / loc.len() as f64)
}

/// Joint posterior moments of (location, scale) per (prediction point, fit
/// level): mean of each, variance of each, and their covariance. All
/// induced-quantile stats derive from these five numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOneStats {
    levels: Vec<f64>,
    num_points: usize,
    draws_per_level: Vec<usize>,
    /// Indexed `point * levels.len() + level`:
    /// `[mean_loc, mean_scale, var_loc, var_scale, cov]`.
    moments: Vec<[f64; 5]>,
}

impl StageOneStats {
    /// Summarize fitted levels at a set of prediction points given as
    /// row-major basis rows (one row per point, fits[j].num_coeffs wide).
    pub fn build(fits: &[PosteriorDraws], basis_rows: &[f64]) -> Result<Self> {
        if fits.is_empty() {
            return Err(Error::Config("no fitted levels".into()));
        }
        let k = fits[0].num_coeffs;
        for f in fits {
            if f.num_coeffs != k {
                return Err(Error::shape(k, f.num_coeffs, "coefficient counts across levels"));
            }
            if f.num_draws < 2 {
                return Err(Error::Data("variance needs at least two draws".into()));
            }
        }
        if fits.windows(2).any(|w| w[1].p <= w[0].p) {
            return Err(Error::Config(
                "fitted levels must be strictly increasing".into(),
            ));
        }
        if basis_rows.is_empty() || basis_rows.len() % k != 0 {
            return Err(Error::shape(k, basis_rows.len(), "basis rows must be points * coeffs"));
        }
        let num_points = basis_rows.len() / k;
        let num_levels = fits.len();
        let mut moments = Vec::with_capacity(num_points * num_levels);
        for point in 0..num_points {
            let row = &basis_rows[point * k..(point + 1) * k];
            for fit in fits {
                moments.push(joint_moments(fit, row));
            }
        }
        Ok(StageOneStats {
            levels: fits.iter().map(|f| f.p).collect(),
            num_points,
            draws_per_level: fits.iter().map(|f| f.num_draws).collect(),
            moments,
        })
    }

    /// Assemble from precomputed moments (tests, or reload from disk).
    pub fn from_parts(
        levels: Vec<f64>,
        num_points: usize,
        draws_per_level: Vec<usize>,
        moments: Vec<[f64; 5]>,
    ) -> Result<Self> {
        let grid = QuantileLevelGrid::new(levels)?;
        let levels = grid.levels.clone();
        if draws_per_level.len() != levels.len() {
            return Err(Error::shape(
                levels.len(),
                draws_per_level.len(),
                "draw counts per level",
            ));
        }
        if draws_per_level.iter().any(|&t| t < 2) {
            return Err(Error::Data("variance needs at least two draws".into()));
        }
        if num_points == 0 {
            return Err(Error::Config("need at least one evaluation point".into()));
        }
        if moments.len() != num_points * levels.len() {
            return Err(Error::shape(
                num_points * levels.len(),
                moments.len(),
                "moment entries",
            ));
        }
        for m in &moments {
            if m.iter().any(|v| !v.is_finite()) || m[2] < 0.0 || m[3] < 0.0 {
                return Err(Error::Data(
                    "moments must be finite with nonnegative variances".into(),
                ));
            }
        }
        Ok(StageOneStats {
            levels,
            num_points,
            draws_per_level,
            moments,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn draws_per_level(&self) -> &[usize] {
        &self.draws_per_level
    }

    pub fn moments_at(&self, point: usize, level: usize) -> &[f64; 5] {
        &self.moments[point * self.levels.len() + level]
    }

    /// Induced-quantile stats at `tau` for one point, from the fit at
    /// `levels()[level]`. Exact affine transform of the cached moments;
    /// matches the per-draw computation to rounding error.
    pub fn stats_at(&self, point: usize, level: usize, tau: f64) -> Result<InducedQuantileStats> {
        check_level(tau)?;
        if point >= self.num_points || level >= self.levels.len() {
            return Err(Error::Config("point or level index out of range".into()));
        }
        let c = quantile_offset(self.levels[level], tau);
        let [m_loc, m_scale, v_loc, v_scale, cov] = *self.moments_at(point, level);
        let variance = v_loc + c * c * v_scale + 2.0 * c * cov;
        Ok(InducedQuantileStats {
            mean: m_loc + c * m_scale,
            variance: variance.max(0.0),
            num_draws: self.draws_per_level[level],
        })
    }

    /// Stage-one surface: posterior mean location per point at each fit's
    /// own level (the offset vanishes at tau = p). Row-major
    /// `point * levels.len() + level`.
    pub fn standard_surface(&self) -> Vec<f64> {
        self.moments.iter().map(|m| m[0]).collect()
    }
}

/// Welford pass over (location, scale) draws: means, sample variances, and
/// covariance with the T - 1 denominator.
fn joint_moments(fit: &PosteriorDraws, basis_row: &[f64]) -> [f64; 5] {
    let sigmas = fit.sigma_draws();
    let k = fit.num_coeffs;
    let mut m_loc = 0.0f64;
    let mut m_scale = 0.0f64;
    let mut v_loc = 0.0f64;
    let mut v_scale = 0.0f64;
    let mut cov = 0.0f64;
    for t in 0..fit.num_draws {
        let loc: f64 = fit.beta_draw(t)[..k]
            .iter()
            .zip(basis_row)
            .map(|(b, x)| b * x)
            .sum();
        let s = sigmas[t];
        let nf = (t + 1) as f64;
        let d_loc = loc - m_loc;
        m_loc += d_loc / nf;
        let d_scale = s - m_scale;
        m_scale += d_scale / nf;
        v_loc += d_loc * (loc - m_loc);
        v_scale += d_scale * (s - m_scale);
        cov += d_loc * (s - m_scale);
    }
    let denom = (fit.num_draws - 1) as f64;
    [m_loc, m_scale, v_loc / denom, v_scale / denom, cov / denom]
}
