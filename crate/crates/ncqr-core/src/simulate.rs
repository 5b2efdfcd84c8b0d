//! Benchmark data generators with known true quantile functions, plus the
//! RMISE metric used to score estimates against them.
//!
//! Designs 1 through 4 are linear in the covariates with level-dependent
//! coefficients: Y = b0(U) + sum_j X_j b_j(U) with U uniform, so the true
//! conditional quantile is Q(tau|x) = b0(tau) + sum_j x_j b_j(tau). Designs
//! 5 and 6 are heteroscedastic Gaussian models Y = f(x) + g(x) e, with
//! Q(tau|x) = f(x) + g(x) PhiInv(tau).

use crate::ald::check_level;
use crate::error::Error;
use crate::fmath;
use crate::Result;
use alloc::format;
use alloc::vec::Vec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationDesign {
    Design1,
    Design2,
    Design3,
    Design4,
    Design5,
    Design6,
}

/// One generated dataset: row-major covariates and the response.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub num_covariates: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SimulationDesign {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(SimulationDesign::Design1),
            2 => Ok(SimulationDesign::Design2),
            3 => Ok(SimulationDesign::Design3),
            4 => Ok(SimulationDesign::Design4),
            5 => Ok(SimulationDesign::Design5),
            6 => Ok(SimulationDesign::Design6),
            other => Err(Error::Config(format!("unknown design id {other} (valid: 1..=6)"))),
        }
    }

    pub fn id(&self) -> u32 {
        match self {
            SimulationDesign::Design1 => 1,
            SimulationDesign::Design2 => 2,
            SimulationDesign::Design3 => 3,
            SimulationDesign::Design4 => 4,
            SimulationDesign::Design5 => 5,
            SimulationDesign::Design6 => 6,
        }
    }

    pub fn all() -> [SimulationDesign; 6] {
        [
            SimulationDesign::Design1,
            SimulationDesign::Design2,
            SimulationDesign::Design3,
            SimulationDesign::Design4,
            SimulationDesign::Design5,
            SimulationDesign::Design6,
        ]
    }

    pub fn num_covariates(&self) -> usize {
        match self {
            SimulationDesign::Design4 => 5,
            _ => 1,
        }
    }

    fn is_coefficient_design(&self) -> bool {
        self.id() <= 4
    }

    /// Covariates are uniform on (-1, 1) for the coefficient designs and on
    /// (0, 1) for the heteroscedastic ones.
    fn covariate_low(&self) -> f64 {
        if self.is_coefficient_design() {
            -1.0
        } else {
            0.0
        }
    }

    /// Level-dependent coefficient b_j(tau), j = 0 for the intercept.
    fn coefficient(&self, j: usize, tau: f64) -> f64 {
        match (self, j) {
            (SimulationDesign::Design1, 0) => fmath::ln(tau / (1.0 - tau)),
            (SimulationDesign::Design1, 1) => 2.0,
            (SimulationDesign::Design2, 0) => {
                let d = 0.5 - tau;
                d.signum() * fmath::ln(1.0 - 2.0 * d.abs())
            }
            (SimulationDesign::Design2, 1) => 2.0 * tau,
            (SimulationDesign::Design3, 0) => std_normal_quantile_unchecked(tau),
            (SimulationDesign::Design3, 1) => 2.0 * (tau - 0.5).min(0.0),
            (SimulationDesign::Design4, 0) => 2.0 * std_normal_quantile_unchecked(tau),
            (SimulationDesign::Design4, 1) => 2.0 * (tau - 0.5).min(0.0),
            (SimulationDesign::Design4, 2) => 2.0 * tau,
            (SimulationDesign::Design4, 3) => 2.0,
            (SimulationDesign::Design4, 4) => 1.0,
            (SimulationDesign::Design4, 5) => 0.0,
            _ => unreachable!("coefficient index out of range"),
        }
    }

    fn mean_fn(&self, x: f64) -> f64 {
        match self {
            SimulationDesign::Design5 => 0.5 + 2.0 * x + fmath::sin(2.0 * core::f64::consts::PI * x - 0.5),
            SimulationDesign::Design6 => 3.0 * x,
            _ => unreachable!("mean function only exists for heteroscedastic designs"),
        }
    }

    fn scale_fn(&self, x: f64) -> f64 {
        match self {
            SimulationDesign::Design5 => 1.0,
            SimulationDesign::Design6 => {
                0.5 + 2.0 * x + fmath::sin(2.0 * core::f64::consts::PI * x - 0.5)
            }
            _ => unreachable!("scale function only exists for heteroscedastic designs"),
        }
    }

    /// True conditional quantile Q(tau|x).
    pub fn true_quantile(&self, x_row: &[f64], tau: f64) -> Result<f64> {
        check_level(tau)?;
        if x_row.len() != self.num_covariates() {
            return Err(Error::shape(
                self.num_covariates(),
                x_row.len(),
                "covariate row width",
            ));
        }
        if self.is_coefficient_design() {
            let mut q = self.coefficient(0, tau);
            for (j, &x) in x_row.iter().enumerate() {
                q += x * self.coefficient(j + 1, tau);
            }
            Ok(q)
        } else {
            Ok(self.mean_fn(x_row[0]) + self.scale_fn(x_row[0]) * std_normal_quantile(tau)?)
        }
    }

    /// One response draw at a fixed covariate row.
    pub fn sample_response<R: Rng + ?Sized>(&self, x_row: &[f64], rng: &mut R) -> Result<f64> {
        if self.is_coefficient_design() {
            let u = loop {
                let u = rng.random::<f64>();
                if u > 0.0 {
                    break u;
                }
            };
            self.true_quantile(x_row, u)
        } else {
            let x = x_row[0];
            let scale = self.scale_fn(x);
            if !(scale > 0.0) {
                return Err(Error::Numerical(format!(
                    "scale function is not positive at x = {x}"
                )));
            }
            let e: f64 = StandardNormal.sample(rng);
            Ok(self.mean_fn(x) + scale * e)
        }
    }

    /// Generate n observations. Deterministic given the seed; per
    /// observation, the covariates are drawn first, then the response.
    pub fn generate(&self, n: usize, seed: u64) -> Result<SimulatedData> {
        if n == 0 {
            return Err(Error::Config("sample size must be positive".into()));
        }
        let m = self.num_covariates();
        let lo = self.covariate_low();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::with_capacity(n * m);
        let mut y = Vec::with_capacity(n);
        let mut row = [0.0f64; 8];
        for _ in 0..n {
            for j in 0..m {
                row[j] = rng.random_range(lo..1.0);
            }
            x.extend_from_slice(&row[..m]);
            y.push(self.sample_response(&row[..m], &mut rng)?);
        }
        Ok(SimulatedData {
            num_covariates: m,
            x,
            y,
        })
    }
}

/// Root mean integrated squared error at one level:
/// sqrt((1/n) sum_i (truth_i - estimate_i)^2).
pub fn rmise(truth: &[f64], estimates: &[f64]) -> Result<f64> {
    if truth.len() != estimates.len() {
        return Err(Error::shape(truth.len(), estimates.len(), "rmise lengths"));
    }
    if truth.is_empty() {
        return Err(Error::Config("rmise needs at least one point".into()));
    }
    let sum: f64 = truth
        .iter()
        .zip(estimates)
        .map(|(t, e)| (t - e) * (t - e))
        .sum();
    Ok(fmath::sqrt(sum / truth.len() as f64))
}

/// Inverse standard-normal CDF via the Wichura rational approximations
/// (AS 241, PPND16 constants); absolute error well below 1e-9.
pub fn std_normal_quantile(tau: f64) -> Result<f64> {
    check_level(tau)?;
    Ok(std_normal_quantile_unchecked(tau))
}

fn std_normal_quantile_unchecked(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.3871328727963666080e0,
        1.3314166789178437745e2,
        1.9715909503065514427e3,
        1.3731693765509461125e4,
        4.5921953931549871457e4,
        6.7265770927008700853e4,
        3.3430575583588128105e4,
        2.5090809287301226727e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.2313330701600911252e1,
        6.8718700749205790830e2,
        5.3941960214247511077e3,
        2.1213794301586595867e4,
        3.9307895800092710610e4,
        2.8729085735721942674e4,
        5.2264952788528545610e3,
    ];
    const C: [f64; 8] = [
        1.42343711074968357734e0,
        4.63033784615654529590e0,
        5.76949722146069140550e0,
        3.64784832476320460504e0,
        1.27045825245236838258e0,
        2.41780725177450611770e-1,
        2.27238449892691845833e-2,
        7.74545014278341407640e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.05319162663775882187e0,
        1.67638483018380384940e0,
        6.89767334985100004550e-1,
        1.48103976427480074590e-1,
        1.51986665636164571966e-2,
        5.47593808499534494600e-4,
        1.05075007164441684324e-9,
    ];
    const E: [f64; 8] = [
        6.65790464350110377720e0,
        5.46378491116411436990e0,
        1.78482653991729133580e0,
        2.96560571828504891230e-1,
        2.65321895265761230930e-2,
        1.24266094738807843860e-3,
        2.71155556874348757815e-5,
        2.01033439929228813265e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.99832206555887937690e-1,
        1.36929880922735805310e-1,
        1.48753612908506148525e-2,
        7.86869131145613259100e-4,
        1.84631831751005468180e-5,
        1.42151175831644588870e-7,
        2.04426310338993978564e-15,
    ];
    fn poly(c: &[f64; 8], r: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * r + k)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = fmath::sqrt(-fmath::ln(r));
    let value = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle for PhiInv: Simpson integration of the standard
    /// normal density from 0 to q must give tau - 1/2.
    fn normal_mass_to(q: f64) -> f64 {
        let steps = 40_000usize;
        let h = q / steps as f64;
        let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * core::f64::consts::PI).sqrt();
        let mut sum = phi(0.0) + phi(q);
        for j in 1..steps {
            sum += phi(j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0
    }

    #[test]
    fn normal_quantile_matches_integral_oracle() {
        // Covers all three rational-approximation branches, including the
        // far tail below exp(-25).
        for &tau in &[
            1e-12, 1e-9, 1e-6, 0.001, 0.01, 0.05, 0.1, 0.3, 0.5, 0.6, 0.9, 0.95, 0.975, 0.99,
            0.999, 1.0 - 1e-6, 1.0 - 1e-9,
        ] {
            let q = std_normal_quantile(tau).unwrap();
            let mass = 0.5 + normal_mass_to(q);
            assert!(
                (mass - tau).abs() < 1e-9 * tau.max(1e-3),
                "tau {tau}: quantile {q} integrates to {mass}"
            );
        }
    }

    #[test]
    fn normal_quantile_spot_values() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        assert!((std_normal_quantile(0.975).unwrap() - 1.959963984540054).abs() < 1e-9);
        assert!((std_normal_quantile(0.9).unwrap() - 1.2815515655446004).abs() < 1e-9);
        assert!((std_normal_quantile(1e-9).unwrap() - (-5.997807015007687)).abs() < 1e-8);
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
    }

    proptest! {
        #[test]
        fn normal_quantile_is_antisymmetric(tau in 1e-6f64..0.5) {
            let a = std_normal_quantile(tau).unwrap();
            let b = std_normal_quantile(1.0 - tau).unwrap();
            prop_assert!((a + b).abs() < 1e-9);
            prop_assert!(a < 0.0);
        }
    }

    #[test]
    fn oracle_spot_values() {
        let d1 = SimulationDesign::Design1;
        assert!((d1.true_quantile(&[0.7], 0.5).unwrap() - 1.4).abs() < 1e-15);

        let d2 = SimulationDesign::Design2;
        let want = -core::f64::consts::LN_2 + 0.25;
        assert!((d2.true_quantile(&[0.5], 0.25).unwrap() - want).abs() < 1e-15);

        let d3 = SimulationDesign::Design3;
        assert_eq!(d3.true_quantile(&[-0.9], 0.5).unwrap(), 0.0);

        let d6 = SimulationDesign::Design6;
        assert!((d6.true_quantile(&[0.25], 0.5).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn oracles_are_monotone_in_tau() {
        let mut xrng = ChaCha8Rng::seed_from_u64(8);
        for design in SimulationDesign::all() {
            let m = design.num_covariates();
            let lo = design.covariate_low();
            for _ in 0..50 {
                let row: Vec<f64> = (0..m).map(|_| xrng.random_range(lo..1.0)).collect();
                let mut prev = f64::NEG_INFINITY;
                for i in 1..1000 {
                    let tau = i as f64 / 1000.0;
                    let q = design.true_quantile(&row, tau).unwrap();
                    assert!(
                        q >= prev - 1e-12,
                        "design {} not monotone at tau {tau}, x {row:?}",
                        design.id()
                    );
                    prev = q;
                }
            }
        }
    }

    #[test]
    fn empirical_quantiles_converge_to_oracle() {
        // Designs 5 and 6 generate through normal draws, so this checks the
        // analytic quantile against an independent sampling path. Design 1
        // exercises the inverse-transform route.
        let n = 1_000_000usize;
        for (design, x) in [
            (SimulationDesign::Design1, 0.4),
            (SimulationDesign::Design5, 0.3),
            (SimulationDesign::Design6, 0.7),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(design.id() as u64);
            let mut sample: Vec<f64> = (0..n)
                .map(|_| design.sample_response(&[x], &mut rng).unwrap())
                .collect();
            sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for &tau in &[0.1, 0.5, 0.9] {
                let emp = sample[((n - 1) as f64 * tau).round() as usize];
                let truth = design.true_quantile(&[x], tau).unwrap();
                assert!(
                    (emp - truth).abs() < 0.01,
                    "design {} tau {tau}: empirical {emp} vs true {truth}",
                    design.id()
                );
            }
        }
    }

    #[test]
    fn design4_last_covariate_is_inert() {
        let d = SimulationDesign::Design4;
        for &tau in &[0.1, 0.5, 0.93] {
            let a = d.true_quantile(&[0.3, -0.2, 0.9, 0.1, -0.8], tau).unwrap();
            let b = d.true_quantile(&[0.3, -0.2, 0.9, 0.1, 0.55], tau).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn generation_is_deterministic_and_in_range() {
        let d = SimulationDesign::Design4;
        let a = d.generate(200, 99).unwrap();
        let b = d.generate(200, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_covariates, 5);
        assert_eq!(a.x.len(), 1000);
        assert!(a.x.iter().all(|&v| (-1.0..1.0).contains(&v)));
        assert!(a.y.iter().all(|v| v.is_finite()));
        assert_ne!(a, d.generate(200, 100).unwrap());

        let d5 = SimulationDesign::Design5.generate(100, 1).unwrap();
        assert!(d5.x.iter().all(|&v| (0.0..1.0).contains(&v)));

        assert!(SimulationDesign::from_id(0).is_err());
        assert!(SimulationDesign::from_id(7).is_err());
        assert!(d.generate(0, 1).is_err());
    }

    #[test]
    fn rmise_hand_values() {
        assert_eq!(rmise(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let offset = rmise(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]).unwrap();
        assert!((offset - 0.5).abs() < 1e-15);
        assert!((rmise(&[0.0, 0.0], &[1.0, -1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((rmise(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 3.5355339059327378).abs() < 1e-15);
        assert!(rmise(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmise(&[], &[]).is_err());
    }
}
