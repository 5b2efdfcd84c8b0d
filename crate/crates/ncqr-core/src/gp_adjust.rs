//! Stage-two adjustment: Gaussian-process pooling of induced quantiles
//! across fit levels, crossing detection, and the minimal-bandwidth search.
//!
//! For one target level tau at one point, the P induced posterior means are
//! treated as noisy observations of the true quantile, with noise variance
//! equal to the induced posterior variance divided by the draw count. A
//! zero-mean GP over the level index with squared-exponential kernel gives
//! the adjusted estimate as a weighted combination of all P sources. The
//! kernel bandwidth is the single free parameter: wide enough and the
//! weights equalize, which cannot cross; the search below finds the smallest
//! verified non-crossing bandwidth.

use crate::ald::quantile_offset;
use crate::error::Error;
use crate::fmath;
use crate::induced::{QuantileLevelGrid, StageOneStats};
use crate::linalg;
use crate::Result;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Default prior variance of the GP (kernel value at zero distance).
pub const DEFAULT_SIGNAL_VARIANCE: f64 = 100.0;
/// Default jitter, as a fraction of the signal variance, added to the
/// diagonal of every solve.
pub const JITTER_SCALE: f64 = 1e-10;
/// Noise entries below this fraction of the signal variance are floored so
/// degenerate (zero-variance) sources keep the solve positive definite.
pub const VARIANCE_FLOOR_SCALE: f64 = 1e-12;
/// Adjacent levels count as crossing when the drop exceeds this.
pub const CROSSING_TOL: f64 = 1e-10;
/// Bandwidth search: starting probe, geometric ramp factor, hard cap, and
/// relative width of the final bisection bracket.
pub const BANDWIDTH_FLOOR: f64 = 1e-3;
pub const BANDWIDTH_GROWTH: f64 = 1.5;
pub const BANDWIDTH_CAP: f64 = 1e6;
pub const BANDWIDTH_REL_TOL: f64 = 1e-2;

/// Safety cap on the total draw count accepted by the full-sample solve.
const FULL_SAMPLE_CAP: usize = 4096;

/// How the per-source noise diagonal is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustmentMode {
    /// Exact per-point noise: one solve per (point, target level).
    Gpr,
    /// Noise averaged over evaluation points, so the pooling weights are
    /// shared across points. Preserves affine structure of linear fits and
    /// is much cheaper.
    Lgpr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpConfig {
    /// Kernel value at zero distance (prior variance of the GP).
    pub sigma_k_sq: f64,
    /// Squared-exponential length scale over quantile levels.
    pub bandwidth: f64,
    pub mode: AdjustmentMode,
    /// Added to the solve diagonal for conditioning.
    pub jitter: f64,
}

impl GpConfig {
    pub fn new(bandwidth: f64, mode: AdjustmentMode) -> Self {
        GpConfig {
            sigma_k_sq: DEFAULT_SIGNAL_VARIANCE,
            bandwidth,
            mode,
            jitter: JITTER_SCALE * DEFAULT_SIGNAL_VARIANCE,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma_k_sq > 0.0) || !self.sigma_k_sq.is_finite() {
            return Err(Error::Config("signal variance must be positive".into()));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return Err(Error::Config("bandwidth must be positive".into()));
        }
        if !(self.jitter >= 0.0) || !self.jitter.is_finite() {
            return Err(Error::Config("jitter must be nonnegative".into()));
        }
        Ok(())
    }

    fn variance_floor(&self) -> f64 {
        VARIANCE_FLOOR_SCALE * self.sigma_k_sq
    }
}

/// Squared-exponential kernel over quantile levels.
pub fn se_kernel(p: f64, p_prime: f64, cfg: &GpConfig) -> f64 {
    let d = (p - p_prime) / cfg.bandwidth;
    cfg.sigma_k_sq * fmath::exp(-0.5 * d * d)
}

/// Induced posterior summaries at a fixed (target level, point), one entry
/// per source fit: the observations the GP pools.
#[derive(Debug, Clone, Copy)]
pub struct SourceStats<'a> {
    /// Levels the sources were fitted at.
    pub levels: &'a [f64],
    /// Induced posterior means at the target level.
    pub means: &'a [f64],
    /// Full induced posterior variances at the target level (not divided by
    /// the draw count).
    pub variances: &'a [f64],
    /// Retained draw count per source.
    pub num_draws: &'a [usize],
}

impl SourceStats<'_> {
    fn validate(&self) -> Result<()> {
        let p = self.levels.len();
        if p == 0 {
            return Err(Error::Config("need at least one source level".into()));
        }
        if self.means.len() != p || self.variances.len() != p || self.num_draws.len() != p {
            return Err(Error::shape(p, self.means.len(), "source stats lengths"));
        }
        for j in 0..p {
            crate::ald::check_level(self.levels[j])?;
            if !self.means[j].is_finite() || !(self.variances[j] >= 0.0) {
                return Err(Error::Data("source stats must be finite with nonnegative variance".into()));
            }
            if self.num_draws[j] == 0 {
                return Err(Error::Data("source draw count must be positive".into()));
            }
        }
        Ok(())
    }

    /// Noise diagonal entry for source j: floored variance of the mean.
    fn noise(&self, j: usize, cfg: &GpConfig) -> f64 {
        (self.variances[j] / self.num_draws[j] as f64).max(cfg.variance_floor())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpPrediction {
    pub mean: f64,
    /// Predictive variance: latent GP variance plus the full induced
    /// variance of the source fitted at the target level itself.
    pub variance: f64,
    /// Pooling weight per source; the adjusted mean is `weights . means`.
    pub weights: Vec<f64>,
}

/// Index of the source fitted at the target level; the predictive variance
/// adds that source's own induced variance.
fn target_source(levels: &[f64], tau: f64) -> Result<usize> {
    levels
        .iter()
        .position(|&p| (p - tau).abs() <= 1e-12)
        .ok_or_else(|| Error::Config(format!("target level {tau} is not among the source levels")))
}

/// Adjusted estimate at one (target level, point) from per-source induced
/// means, by the level-aggregated solve: C = K + diag(variance/T) + jitter.
pub fn gp_predict(src: &SourceStats, tau: f64, cfg: &GpConfig) -> Result<GpPrediction> {
    cfg.validate()?;
    src.validate()?;
    crate::ald::check_level(tau)?;
    let target = target_source(src.levels, tau)?;
    let p = src.levels.len();

    let mut c = vec![0.0f64; p * p];
    for a in 0..p {
        for b in a..p {
            let k = se_kernel(src.levels[a], src.levels[b], cfg);
            c[a * p + b] = k;
            c[b * p + a] = k;
        }
        c[a * p + a] += src.noise(a, cfg) + cfg.jitter;
    }
    linalg::cholesky_in_place(&mut c, p)?;

    let mut weights: Vec<f64> = src
        .levels
        .iter()
        .map(|&pl| se_kernel(pl, tau, cfg))
        .collect();
    let k_tau = weights.clone();
    linalg::solve_spd_in_place(&c, p, &mut weights);

    let mean = weights.iter().zip(src.means).map(|(w, m)| w * m).sum();
    let latent = (cfg.sigma_k_sq
        - weights.iter().zip(&k_tau).map(|(w, k)| w * k).sum::<f64>())
    .max(0.0);
    Ok(GpPrediction {
        mean,
        variance: latent + src.variances[target],
        weights,
    })
}

/// Brute-force oracle: the same posterior computed from every retained draw
/// instead of the per-source means. One GP observation per draw, noise equal
/// to the full induced variance of its source.
///
/// The stabilizers are defined on the level-aggregated system, so here the
/// per-draw noise is the aggregated noise times the source draw count: both
/// solves then regularize the same posterior and agree to rounding error.
pub fn gp_predict_full_sample(
    levels: &[f64],
    draws: &[Vec<f64>],
    variances: &[f64],
    tau: f64,
    cfg: &GpConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    crate::ald::check_level(tau)?;
    let p = levels.len();
    if p == 0 || draws.len() != p || variances.len() != p {
        return Err(Error::shape(p, draws.len(), "draw groups per level"));
    }
    let num_draws: Vec<usize> = draws.iter().map(|d| d.len()).collect();
    let total: usize = num_draws.iter().sum();
    if total > FULL_SAMPLE_CAP {
        return Err(Error::Config(format!(
            "full-sample solve refused: {total} draws exceeds the cap of {FULL_SAMPLE_CAP}"
        )));
    }
    let means: Vec<f64> = draws
        .iter()
        .map(|d| d.iter().sum::<f64>() / d.len().max(1) as f64)
        .collect();
    let src = SourceStats {
        levels,
        means: &means,
        variances,
        num_draws: &num_draws,
    };
    src.validate()?;
    let target = target_source(levels, tau)?;

    let mut level_of = Vec::with_capacity(total);
    let mut y = Vec::with_capacity(total);
    for (j, group) in draws.iter().enumerate() {
        for &d in group {
            if !d.is_finite() {
                return Err(Error::Data("non-finite induced draw".into()));
            }
            level_of.push(j);
            y.push(d);
        }
    }

    let mut c = vec![0.0f64; total * total];
    for a in 0..total {
        for b in a..total {
            let k = se_kernel(levels[level_of[a]], levels[level_of[b]], cfg);
            c[a * total + b] = k;
            c[b * total + a] = k;
        }
        let j = level_of[a];
        c[a * total + a] += num_draws[j] as f64 * (src.noise(j, cfg) + cfg.jitter);
    }
    linalg::cholesky_in_place(&mut c, total)?;

    let k_tau: Vec<f64> = level_of
        .iter()
        .map(|&j| se_kernel(levels[j], tau, cfg))
        .collect();
    let mut alpha = y;
    linalg::solve_spd_in_place(&c, total, &mut alpha);
    let mean = alpha.iter().zip(&k_tau).map(|(a, k)| a * k).sum();

    let mut beta = k_tau.clone();
    linalg::solve_spd_in_place(&c, total, &mut beta);
    let latent = (cfg.sigma_k_sq
        - beta.iter().zip(&k_tau).map(|(b, k)| b * k).sum::<f64>())
    .max(0.0);
    Ok((mean, latent + variances[target]))
}

/// One adjacent-level order violation at an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingViolation {
    pub point: usize,
    pub lower_level: f64,
    pub upper_level: f64,
    /// How far the upper-level value fell below the lower-level value.
    pub gap: f64,
}

/// Scan a row-major (point x level) value matrix for adjacent levels where
/// the value drops by more than `tol`.
pub fn detect_crossing(
    levels: &[f64],
    num_points: usize,
    values: &[f64],
    tol: f64,
) -> Vec<CrossingViolation> {
    let p = levels.len();
    debug_assert_eq!(values.len(), num_points * p);
    let mut out = Vec::new();
    for point in 0..num_points {
        let row = &values[point * p..(point + 1) * p];
        for j in 0..p.saturating_sub(1) {
            let gap = row[j] - row[j + 1];
            if gap > tol {
                out.push(CrossingViolation {
                    point,
                    lower_level: levels[j],
                    upper_level: levels[j + 1],
                    gap,
                });
            }
        }
    }
    out
}

/// Adjusted quantile surface over (evaluation point, target level), with
/// predictive variances and the bandwidth it was computed at.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedQuantileSurface {
    pub grid: QuantileLevelGrid,
    pub num_points: usize,
    values: Vec<f64>,
    variances: Vec<f64>,
    pub bandwidth: f64,
    pub mode: AdjustmentMode,
}

impl AdjustedQuantileSurface {
    pub fn value(&self, point: usize, level: usize) -> f64 {
        self.values[point * self.grid.len() + level]
    }

    pub fn variance(&self, point: usize, level: usize) -> f64 {
        self.variances[point * self.grid.len() + level]
    }

    /// Row-major (point x level) adjusted values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row-major (point x level) predictive variances.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn detect_crossing(&self, tol: f64) -> Vec<CrossingViolation> {
        detect_crossing(self.grid.levels(), self.num_points, &self.values, tol)
    }
}

/// Noise entry of the level-aggregated solve for (point, source j, target
/// level l), straight from the cached stage-one moments.
struct Engine<'a> {
    stats: &'a StageOneStats,
    cfg: GpConfig,
    p: usize,
    n: usize,
    /// Quantile offsets c(p_j, tau_l), indexed l * p + j. Independent of the
    /// bandwidth, so shared across all probes.
    offsets: Vec<f64>,
    /// True when every source's induced variance is the same at every target
    /// level (scale variance and covariance all zero). The solve matrix is
    /// then shared across target levels and factored once per point.
    level_stable: bool,
}

enum Probe {
    Monotone,
    Crossing { point: usize },
}

impl<'a> Engine<'a> {
    fn new(stats: &'a StageOneStats, cfg: &GpConfig) -> Result<Self> {
        cfg.validate()?;
        let levels = stats.levels();
        let p = levels.len();
        let n = stats.num_points();
        let mut offsets = vec![0.0f64; p * p];
        for l in 0..p {
            for j in 0..p {
                offsets[l * p + j] = quantile_offset(levels[j], levels[l]);
            }
        }
        let level_stable = (0..n).all(|point| {
            (0..p).all(|j| {
                let m = stats.moments_at(point, j);
                m[3] == 0.0 && m[4] == 0.0
            })
        });
        Ok(Engine {
            stats,
            cfg: *cfg,
            p,
            n,
            offsets,
            level_stable,
        })
    }

    fn mean_at(&self, point: usize, j: usize, l: usize) -> f64 {
        let m = self.stats.moments_at(point, j);
        m[0] + self.offsets[l * self.p + j] * m[1]
    }

    fn var_at(&self, point: usize, j: usize, l: usize) -> f64 {
        let m = self.stats.moments_at(point, j);
        let c = self.offsets[l * self.p + j];
        (m[2] + c * c * m[3] + 2.0 * c * m[4]).max(0.0)
    }

    fn noise_at(&self, point: usize, j: usize, l: usize) -> f64 {
        (self.var_at(point, j, l) / self.stats.draws_per_level()[j] as f64)
            .max(self.cfg.variance_floor())
    }

    fn kernel(&self, bandwidth: f64) -> Vec<f64> {
        let levels = self.stats.levels();
        let cfg = GpConfig {
            bandwidth,
            ..self.cfg
        };
        let mut k = vec![0.0f64; self.p * self.p];
        for a in 0..self.p {
            for b in a..self.p {
                let v = se_kernel(levels[a], levels[b], &cfg);
                k[a * self.p + b] = v;
                k[b * self.p + a] = v;
            }
        }
        k
    }

    /// Σ̄′ per target level, for LGPR: noise averaged over points.
    fn averaged_noise(&self, l: usize) -> Vec<f64> {
        let mut avg = vec![0.0f64; self.p];
        for point in 0..self.n {
            for (j, a) in avg.iter_mut().enumerate() {
                *a += self.noise_at(point, j, l);
            }
        }
        for a in avg.iter_mut() {
            *a /= self.n as f64;
        }
        avg
    }

    /// LGPR weights for every target level: w_l = C_l^{-1} k_l with the
    /// point-averaged noise. Also returns the shared latent variances.
    fn lgpr_weights(&self, kmat: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = self.p;
        let mut weights = vec![0.0f64; p * p];
        let mut latents = vec![0.0f64; p];
        let mut c = vec![0.0f64; p * p];
        for l in 0..p {
            c.copy_from_slice(kmat);
            for (j, nj) in self.averaged_noise(l).iter().enumerate() {
                c[j * p + j] += nj + self.cfg.jitter;
            }
            linalg::cholesky_in_place(&mut c, p)?;
            let w = &mut weights[l * p..(l + 1) * p];
            w.copy_from_slice(&kmat[l * p..(l + 1) * p]);
            linalg::solve_spd_in_place(&c, p, w);
            let dot: f64 = w
                .iter()
                .zip(&kmat[l * p..(l + 1) * p])
                .map(|(a, b)| a * b)
                .sum();
            latents[l] = (self.cfg.sigma_k_sq - dot).max(0.0);
        }
        Ok((weights, latents))
    }

    /// One row of adjusted means (all target levels at one point), GPR mode:
    /// a fresh solve per level, since the noise diagonal depends on both the
    /// point and the target level. Level-stable noise shares one
    /// factorization across all target levels.
    fn gpr_row(
        &self,
        kmat: &[f64],
        point: usize,
        c: &mut [f64],
        rhs: &mut [f64],
        row: &mut [f64],
    ) -> Result<()> {
        let p = self.p;
        for l in 0..p {
            if l == 0 || !self.level_stable {
                c.copy_from_slice(kmat);
                for j in 0..p {
                    c[j * p + j] += self.noise_at(point, j, l) + self.cfg.jitter;
                }
                linalg::cholesky_in_place(c, p)?;
            }
            for j in 0..p {
                rhs[j] = self.mean_at(point, j, l);
            }
            linalg::solve_spd_in_place(c, p, rhs);
            row[l] = rhs
                .iter()
                .zip(&kmat[l * p..(l + 1) * p])
                .map(|(a, k)| a * k)
                .sum();
        }
        Ok(())
    }

    /// One row of adjusted means, LGPR mode: the precomputed shared weights
    /// applied to this point's induced means.
    fn lgpr_row(&self, weights: &[f64], point: usize, row: &mut [f64]) {
        let p = self.p;
        for l in 0..p {
            row[l] = weights[l * p..(l + 1) * p]
                .iter()
                .enumerate()
                .map(|(j, w)| w * self.mean_at(point, j, l))
                .sum();
        }
    }

    /// Whether the adjusted means at one point cross anywhere on the grid.
    fn point_crosses(&self, kmat: &[f64], lgpr_weights: Option<&[f64]>, point: usize) -> Result<bool> {
        let p = self.p;
        let mut row = vec![0.0f64; p];
        match lgpr_weights {
            Some(weights) => self.lgpr_row(weights, point, &mut row),
            None => {
                let mut c = vec![0.0f64; p * p];
                let mut rhs = vec![0.0f64; p];
                self.gpr_row(kmat, point, &mut c, &mut rhs, &mut row)?;
            }
        }
        Ok(row.windows(2).any(|w| w[0] - w[1] > CROSSING_TOL))
    }

    /// Evaluate adjusted means at one bandwidth and stop at the first
    /// crossing point found. The previously violating point `start` is
    /// re-checked first: during the growth phase it usually still crosses,
    /// which keeps failed probes cheap. The remaining points are scanned in
    /// parallel when the feature is on; which violator gets reported only
    /// seeds the next probe's scan order, so the search outcome does not
    /// depend on thread count.
    fn probe(&self, kmat: &[f64], start: usize) -> Result<Probe> {
        let lgpr = match self.cfg.mode {
            AdjustmentMode::Lgpr => Some(self.lgpr_weights(kmat)?.0),
            AdjustmentMode::Gpr => None,
        };
        let weights = lgpr.as_deref();
        if self.point_crosses(kmat, weights, start)? {
            return Ok(Probe::Crossing { point: start });
        }
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let found = (0..self.n)
                .into_par_iter()
                .filter(|&point| point != start)
                .find_map_any(|point| match self.point_crosses(kmat, weights, point) {
                    Ok(true) => Some(Ok(point)),
                    Ok(false) => None,
                    Err(err) => Some(Err(err)),
                });
            match found {
                Some(Ok(point)) => Ok(Probe::Crossing { point }),
                Some(Err(err)) => Err(err),
                None => Ok(Probe::Monotone),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            for step in 1..self.n {
                let point = (start + step) % self.n;
                if self.point_crosses(kmat, weights, point)? {
                    return Ok(Probe::Crossing { point });
                }
            }
            Ok(Probe::Monotone)
        }
    }

    /// Adjusted means and predictive variances at one point, GPR mode. Each
    /// target level reuses its factorization for both solves (mean and
    /// latent variance).
    fn gpr_full_row(
        &self,
        kmat: &[f64],
        point: usize,
        values: &mut [f64],
        variances: &mut [f64],
    ) -> Result<()> {
        let p = self.p;
        let mut c = vec![0.0f64; p * p];
        let mut rhs = vec![0.0f64; p];
        let mut beta = vec![0.0f64; p];
        for l in 0..p {
            if l == 0 || !self.level_stable {
                c.copy_from_slice(kmat);
                for j in 0..p {
                    c[j * p + j] += self.noise_at(point, j, l) + self.cfg.jitter;
                }
                linalg::cholesky_in_place(&mut c, p)?;
            }
            for j in 0..p {
                rhs[j] = self.mean_at(point, j, l);
            }
            linalg::solve_spd_in_place(&c, p, &mut rhs);
            let kcol = &kmat[l * p..(l + 1) * p];
            values[l] = rhs.iter().zip(kcol).map(|(a, k)| a * k).sum();
            beta.copy_from_slice(kcol);
            linalg::solve_spd_in_place(&c, p, &mut beta);
            let latent = (self.cfg.sigma_k_sq
                - beta.iter().zip(kcol).map(|(b, k)| b * k).sum::<f64>())
            .max(0.0);
            variances[l] = latent + self.var_at(point, l, l);
        }
        Ok(())
    }

    /// Full surface with predictive variances at one bandwidth.
    fn surface(&self, bandwidth: f64) -> Result<AdjustedQuantileSurface> {
        let p = self.p;
        let kmat = self.kernel(bandwidth);
        let mut values = vec![0.0f64; self.n * p];
        let mut variances = vec![0.0f64; self.n * p];
        match self.cfg.mode {
            AdjustmentMode::Lgpr => {
                let (weights, latents) = self.lgpr_weights(&kmat)?;
                for point in 0..self.n {
                    self.lgpr_row(&weights, point, &mut values[point * p..(point + 1) * p]);
                    for l in 0..p {
                        variances[point * p + l] = latents[l] + self.var_at(point, l, l);
                    }
                }
            }
            AdjustmentMode::Gpr => {
                #[cfg(feature = "parallel")]
                {
                    use rayon::prelude::*;
                    values
                        .par_chunks_mut(p)
                        .zip(variances.par_chunks_mut(p))
                        .enumerate()
                        .try_for_each(|(point, (vrow, srow))| {
                            self.gpr_full_row(&kmat, point, vrow, srow)
                        })?;
                }
                #[cfg(not(feature = "parallel"))]
                for point in 0..self.n {
                    self.gpr_full_row(
                        &kmat,
                        point,
                        &mut values[point * p..(point + 1) * p],
                        &mut variances[point * p..(point + 1) * p],
                    )?;
                }
            }
        }
        Ok(AdjustedQuantileSurface {
            grid: QuantileLevelGrid::new(self.stats.levels().to_vec())?,
            num_points: self.n,
            values,
            variances,
            bandwidth,
            mode: self.cfg.mode,
        })
    }
}

/// Adjusted surface at the bandwidth fixed in `cfg`.
pub fn adjust_surface(stats: &StageOneStats, cfg: &GpConfig) -> Result<AdjustedQuantileSurface> {
    Engine::new(stats, cfg)?.surface(cfg.bandwidth)
}

/// Point-averaged noise diagonal Σ̄′ at one target level: the LGPR noise
/// shared by every evaluation point.
pub fn lgpr_average_covariance(stats: &StageOneStats, tau: f64) -> Result<Vec<f64>> {
    crate::ald::check_level(tau)?;
    let cfg = GpConfig::new(1.0, AdjustmentMode::Lgpr);
    let engine = Engine::new(stats, &cfg)?;
    let l = target_source(stats.levels(), tau)?;
    Ok(engine.averaged_noise(l))
}

/// Smallest verified non-crossing bandwidth and its surface.
///
/// Probes geometrically up from the floor until a non-crossing bandwidth is
/// found, then bisects the bracket down to 1e-2 relative width. Every
/// candidate is verified directly (non-crossing need not be monotone in the
/// bandwidth), and the returned surface was itself checked. `cfg.bandwidth`
/// is ignored; mode, signal variance, and jitter are taken from it.
pub fn search_min_bandwidth(
    stats: &StageOneStats,
    cfg: &GpConfig,
) -> Result<(f64, AdjustedQuantileSurface)> {
    let template = GpConfig {
        bandwidth: BANDWIDTH_FLOOR,
        ..*cfg
    };
    let engine = Engine::new(stats, &template)?;
    let mut hint = 0usize;
    let mut probes = 0usize;
    let check = |b: f64, hint: &mut usize, probes: &mut usize| -> Result<bool> {
        *probes += 1;
        match engine.probe(&engine.kernel(b), *hint)? {
            Probe::Monotone => Ok(true),
            Probe::Crossing { point } => {
                *hint = point;
                Ok(false)
            }
        }
    };

    let mut lo = BANDWIDTH_FLOOR;
    if check(lo, &mut hint, &mut probes)? {
        log::debug!("bandwidth search: floor {lo} already monotone");
        return Ok((lo, engine.surface(lo)?));
    }
    let mut hi = lo;
    loop {
        let next = (hi * BANDWIDTH_GROWTH).min(BANDWIDTH_CAP);
        if next <= hi {
            return Err(Error::Fit(format!(
                "no non-crossing bandwidth at or below {BANDWIDTH_CAP} after {probes} probes"
            )));
        }
        lo = hi;
        hi = next;
        if check(hi, &mut hint, &mut probes)? {
            break;
        }
        if hi >= BANDWIDTH_CAP {
            return Err(Error::Fit(format!(
                "no non-crossing bandwidth at or below {BANDWIDTH_CAP} after {probes} probes"
            )));
        }
    }
    while hi - lo > BANDWIDTH_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if check(mid, &mut hint, &mut probes)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    log::debug!("bandwidth search: {hi} after {probes} probes");
    Ok((hi, engine.surface(hi)?))
}
