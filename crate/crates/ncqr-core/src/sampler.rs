//! Gibbs sampler for Bayesian quantile regression under the asymmetric
//! Laplace working likelihood.
//!
//! The ALD is an exponential mixture of normals: with z ~ Exp(mean sigma),
//!
//! ```text
//! y | z ~ N(x'beta + theta z, omega^2 sigma z),
//! theta = (1 - 2p) / (p (1 - p)),  omega^2 = 2 / (p (1 - p)),
//! ```
//!
//! which makes every full conditional a standard draw: z is reciprocal
//! inverse Gaussian, beta is multivariate normal, sigma is inverse gamma.

use crate::basis::DesignMatrix;
use crate::error::Error;
use crate::induced::QuantileLevelGrid;
use crate::linalg;
use crate::stream::derive_seed;
use crate::Result;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, InverseGaussian, StandardNormal};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// MCMC run length and priors. The defaults keep 1000 draws: 31500
/// iterations, the first 1500 discarded, every 30th retained.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub total_iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Prior sd of each coefficient, beta ~ N(0, sd^2 I).
    pub beta_prior_sd: f64,
    /// sigma ~ InverseGamma(shape, rate).
    pub sigma_prior_shape: f64,
    pub sigma_prior_rate: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            total_iterations: 31_500,
            burn_in: 1_500,
            thin: 30,
            beta_prior_sd: 100.0,
            sigma_prior_shape: 0.01,
            sigma_prior_rate: 0.01,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn num_retained(&self) -> usize {
        (self.total_iterations - self.burn_in) / self.thin
    }

    fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::Config("thin must be >= 1".into()));
        }
        if self.burn_in >= self.total_iterations {
            return Err(Error::Config(format!(
                "burn-in {} must be below total iterations {}",
                self.burn_in, self.total_iterations
            )));
        }
        if self.num_retained() == 0 {
            return Err(Error::Config(
                "no retained draws: total - burn_in is below thin".into(),
            ));
        }
        if !(self.beta_prior_sd > 0.0)
            || !(self.sigma_prior_shape > 0.0)
            || !(self.sigma_prior_rate > 0.0)
        {
            return Err(Error::Config("prior parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Retained posterior draws from one quantile-level fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    /// Quantile level the working likelihood was tilted to.
    pub p: f64,
    pub num_draws: usize,
    pub num_coeffs: usize,
    beta: Vec<f64>,
    sigma: Vec<f64>,
    /// Fingerprint of the design matrix the draws were fitted against.
    pub design_ref: u64,
}

impl PosteriorDraws {
    pub fn from_parts(
        p: f64,
        num_coeffs: usize,
        beta: Vec<f64>,
        sigma: Vec<f64>,
        design_ref: u64,
    ) -> Result<Self> {
        crate::ald::check_level(p)?;
        if num_coeffs == 0 || beta.len() % num_coeffs != 0 {
            return Err(Error::shape(
                num_coeffs,
                beta.len(),
                "beta slice must be num_draws * num_coeffs",
            ));
        }
        let num_draws = beta.len() / num_coeffs;
        if sigma.len() != num_draws {
            return Err(Error::shape(num_draws, sigma.len(), "sigma draws"));
        }
        if sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::Data("sigma draws must be positive and finite".into()));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Data("beta draws must be finite".into()));
        }
        Ok(PosteriorDraws {
            p,
            num_draws,
            num_coeffs,
            beta,
            sigma,
            design_ref,
        })
    }

    pub fn beta_draw(&self, t: usize) -> &[f64] {
        &self.beta[t * self.num_coeffs..(t + 1) * self.num_coeffs]
    }

    pub fn beta_flat(&self) -> &[f64] {
        &self.beta
    }

    pub fn sigma_draws(&self) -> &[f64] {
        &self.sigma
    }

    /// Location draws x'beta_t for one basis row.
    pub fn location_draws(&self, basis_row: &[f64]) -> Result<Vec<f64>> {
        if basis_row.len() != self.num_coeffs {
            return Err(Error::shape(
                self.num_coeffs,
                basis_row.len(),
                "basis row vs coefficient count",
            ));
        }
        Ok((0..self.num_draws)
            .map(|t| {
                self.beta_draw(t)
                    .iter()
                    .zip(basis_row)
                    .map(|(b, x)| b * x)
                    .sum()
            })
            .collect())
    }
}

/// Residuals smaller than this (in chi) use the exact Gamma limit of the
/// reciprocal inverse Gaussian draw.
const CHI_FLOOR: f64 = 1e-12;

/// Fit one quantile level by Gibbs sampling.
///
/// Fails if the response length does not match the design, the design is
/// rank-deficient, or the configuration is inconsistent.
pub fn fit_ald_regression(
    design: &DesignMatrix,
    y: &[f64],
    p: f64,
    config: &SamplerConfig,
) -> Result<PosteriorDraws> {
    crate::ald::check_level(p)?;
    config.validate()?;
    if y.len() != design.rows {
        return Err(Error::shape(design.rows, y.len(), "response length"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite response value".into()));
    }
    check_full_rank(design)?;

    let n = design.rows;
    let k = design.cols;
    let nf = n as f64;
    let theta = (1.0 - 2.0 * p) / (p * (1.0 - p));
    let omega_sq = 2.0 / (p * (1.0 - p));
    let prior_precision = 1.0 / (config.beta_prior_sd * config.beta_prior_sd);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut beta = vec![0.0f64; k];
    let mut sigma = 1.0f64;
    let mut z = vec![1.0f64; n];
    let mut resid = y.to_vec();
    let mut precision = vec![0.0f64; k * k];
    let mut rhs = vec![0.0f64; k];
    let mut draw = vec![0.0f64; k];

    let retained = config.num_retained();
    let mut beta_out = Vec::with_capacity(retained * k);
    let mut sigma_out = Vec::with_capacity(retained);

    for iter in 1..=config.total_iterations {
        // z_i | beta, sigma: 1/z_i ~ InverseGaussian(sqrt(psi/chi_i), psi)
        // with chi_i = r_i^2/(omega^2 sigma), psi = 1/(2 p (1-p) sigma).
        let psi = 1.0 / (2.0 * p * (1.0 - p) * sigma);
        for i in 0..n {
            let chi = resid[i] * resid[i] / (omega_sq * sigma);
            z[i] = if chi < CHI_FLOOR {
                let g = Gamma::new(0.5, 2.0 / psi)
                    .map_err(|e| Error::Numerical(format!("gamma mixing draw: {e}")))?;
                g.sample(&mut rng).max(f64::MIN_POSITIVE)
            } else {
                let ig = InverseGaussian::new(crate::fmath::sqrt(psi / chi), psi)
                    .map_err(|e| Error::Numerical(format!("inverse gaussian draw: {e}")))?;
                let v: f64 = ig.sample(&mut rng);
                (1.0 / v).clamp(f64::MIN_POSITIVE, f64::MAX)
            };
        }

        // beta | z, sigma: N(m, P^-1) with P = X'WX + prior, W_ii = 1/(omega^2 sigma z_i).
        precision.fill(0.0);
        rhs.fill(0.0);
        for i in 0..n {
            let w = 1.0 / (omega_sq * sigma * z[i]);
            let row = design.row(i);
            let adj = (y[i] - theta * z[i]) * w;
            for a in 0..k {
                rhs[a] += row[a] * adj;
                let wa = row[a] * w;
                for b in a..k {
                    precision[a * k + b] += wa * row[b];
                }
            }
        }
        for a in 0..k {
            precision[a * k + a] += prior_precision;
            for b in 0..a {
                precision[a * k + b] = precision[b * k + a];
            }
        }
        linalg::cholesky_in_place(&mut precision, k)?;
        linalg::solve_spd_in_place(&precision, k, &mut rhs);
        for v in draw.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal);
        }
        linalg::solve_lower_transpose_in_place(&precision, k, &mut draw);
        for a in 0..k {
            beta[a] = rhs[a] + draw[a];
        }
        for i in 0..n {
            let row = design.row(i);
            let fit: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
            resid[i] = y[i] - fit;
        }

        // sigma | beta, z: InverseGamma(a0 + 3n/2, b0 + sum z + sum (r - theta z)^2 / (2 omega^2 z)).
        let mut rate = config.sigma_prior_rate;
        for i in 0..n {
            let e = resid[i] - theta * z[i];
            rate += z[i] + e * e / (2.0 * omega_sq * z[i]);
        }
        let shape = config.sigma_prior_shape + 1.5 * nf;
        let g = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::Numerical(format!("sigma draw: {e}")))?;
        sigma = 1.0 / g.sample(&mut rng).max(f64::MIN_POSITIVE);

        if iter > config.burn_in && (iter - config.burn_in) % config.thin == 0 {
            beta_out.extend_from_slice(&beta);
            sigma_out.push(sigma);
        }
    }

    PosteriorDraws::from_parts(p, k, beta_out, sigma_out, design.fingerprint())
}

/// Fit every level of the grid, each with a seed derived from the base seed
/// and the level index, so results are reproducible and order-independent.
pub fn fit_all_levels(
    design: &DesignMatrix,
    y: &[f64],
    grid: &QuantileLevelGrid,
    config: &SamplerConfig,
) -> Result<Vec<PosteriorDraws>> {
    let fit_one = |(i, &p): (usize, &f64)| {
        let mut per_level = config.clone();
        per_level.seed = derive_seed(config.seed, i as u64);
        fit_ald_regression(design, y, p, &per_level)
    };
    #[cfg(feature = "parallel")]
    {
        grid.levels()
            .par_iter()
            .enumerate()
            .map(fit_one)
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.levels().iter().enumerate().map(fit_one).collect()
    }
}

/// X'X must admit a Cholesky factor; a zero or negative pivot means some
/// column is a linear combination of the others.
fn check_full_rank(design: &DesignMatrix) -> Result<()> {
    let k = design.cols;
    let mut gram = vec![0.0f64; k * k];
    for i in 0..design.rows {
        let row = design.row(i);
        for a in 0..k {
            for b in a..k {
                gram[a * k + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            gram[a * k + b] = gram[b * k + a];
        }
    }
    linalg::cholesky_in_place(&mut gram, k)
        .map_err(|_| Error::Data("design matrix is rank-deficient".into()))?;
    Ok(())
}
