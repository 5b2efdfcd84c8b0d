//! Asymmetric Laplace distribution primitives.
//!
//! The ALD is the working likelihood for Bayesian quantile regression: its
//! maximum-likelihood location at skewness `p` is the `p`-quantile of the
//! data. Only the pieces needed by the two-stage pipeline live here: the
//! check function, the log-likelihood in log space, and the closed-form
//! quantile function used to induce quantiles at levels other than `p`.

use crate::error::Error;
use crate::fmath;
use crate::Result;

/// Parameters of one fitted ALD model: location, scale, and the skewness `p`
/// (the quantile level the model targets).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AldParams {
    pub mu: f64,
    pub sigma: f64,
    pub p: f64,
}

impl AldParams {
    pub fn new(mu: f64, sigma: f64, p: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Domain("ALD scale sigma must be positive"));
        }
        check_level(p)?;
        Ok(AldParams { mu, sigma, p })
    }
}

pub(crate) fn check_level(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain("quantile level must lie strictly in (0, 1)"));
    }
    Ok(())
}

/// Check function `rho_tau(u) = u * (tau - I(u < 0))`.
///
/// Nonnegative, zero only at `u = 0`; its minimizer over a sample is the
/// empirical `tau`-quantile.
pub fn check_function(u: f64, tau: f64) -> Result<f64> {
    check_level(tau)?;
    Ok(u * (tau - if u < 0.0 { 1.0 } else { 0.0 }))
}

/// ALD log-likelihood of `y` with per-observation locations `mu`, common
/// scale `sigma`, and skewness `p`:
/// `n * log(p(1-p)/sigma) - sum_i rho_p((y_i - mu_i)/sigma)`.
pub fn ald_log_likelihood(y: &[f64], mu: &[f64], sigma: f64, p: f64) -> Result<f64> {
    if y.len() != mu.len() {
        return Err(Error::shape(y.len(), mu.len(), "mu must match y length"));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain("ALD scale sigma must be positive"));
    }
    check_level(p)?;
    let n = y.len() as f64;
    let mut kernel = 0.0;
    for (yi, mi) in y.iter().zip(mu.iter()) {
        let u = (yi - mi) / sigma;
        kernel += u * (p - if u < 0.0 { 1.0 } else { 0.0 });
    }
    Ok(n * fmath::ln(p * (1.0 - p) / sigma) - kernel)
}

/// Scale-free part of the ALD quantile function: `(Q(tau) - mu) / sigma`.
///
/// Lower branch for `tau <= p`, upper branch otherwise; both branches agree
/// at `tau = p`.
#[inline]
pub(crate) fn quantile_offset(p: f64, tau: f64) -> f64 {
    if tau <= p {
        fmath::ln(tau / p) / (1.0 - p)
    } else {
        -fmath::ln((1.0 - tau) / (1.0 - p)) / p
    }
}

/// Quantile function of a fitted ALD model, evaluated at any level `tau`.
pub fn ald_quantile(params: &AldParams, tau: f64) -> Result<f64> {
    check_level(tau)?;
    Ok(params.mu + params.sigma * quantile_offset(params.p, tau))
}
