//! Design matrices for linear, polynomial, and cubic B-spline regression.
//!
//! Every model form supported by the pipeline is `basis row . beta`, so the
//! sampler and the adjustment never see raw covariates, only expanded rows.

use crate::error::Error;
use crate::Result;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub(crate) const SPLINE_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Linear,
    Polynomial { degree: usize },
    CubicSpline { interior_knots: usize },
}

/// How raw covariates expand into regression columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub include_intercept: bool,
}

impl BasisSpec {
    pub fn linear() -> Self {
        BasisSpec {
            kind: BasisKind::Linear,
            include_intercept: true,
        }
    }

    pub fn polynomial(degree: usize) -> Self {
        BasisSpec {
            kind: BasisKind::Polynomial { degree },
            include_intercept: true,
        }
    }

    /// Clamped cubic B-spline basis with equally spaced interior knots. The
    /// basis spans constants (rows sum to one), so there is no intercept.
    pub fn cubic_spline(interior_knots: usize) -> Self {
        BasisSpec {
            kind: BasisKind::CubicSpline { interior_knots },
            include_intercept: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            BasisKind::Linear => Ok(()),
            BasisKind::Polynomial { degree } => {
                if degree < 1 {
                    Err(Error::Config("polynomial degree must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
            BasisKind::CubicSpline { interior_knots } => {
                if interior_knots < 1 {
                    Err(Error::Config("spline needs at least one interior knot".into()))
                } else if self.include_intercept {
                    Err(Error::Config(
                        "cubic spline basis spans constants; an explicit intercept would be rank-deficient"
                            .into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Number of columns produced for `num_covariates` raw covariates.
    pub fn num_columns(&self, num_covariates: usize) -> usize {
        let intercept = usize::from(self.include_intercept);
        match self.kind {
            BasisKind::Linear => intercept + num_covariates,
            BasisKind::Polynomial { degree } => intercept + num_covariates * degree,
            BasisKind::CubicSpline { interior_knots } => interior_knots + SPLINE_DEGREE + 1,
        }
    }
}

/// Expanded regression matrix plus the covariate ranges the expansion was
/// built from (needed to reproduce spline knots out of sample).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub rows: usize,
    pub cols: usize,
    values: Vec<f64>,
    pub covariate_range: Vec<(f64, f64)>,
}

impl DesignMatrix {
    /// Wrap an already-expanded row-major matrix, for callers that bring
    /// their own basis (an intercept-only column, external features, ...).
    /// No covariate ranges are recorded, so `eval_basis_row` does not apply.
    pub fn from_raw(values: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::shape(
                rows * cols,
                values.len(),
                "raw design must be rows * cols values",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value in raw design".into()));
        }
        if rows < cols {
            return Err(Error::Data(format!(
                "underdetermined: {rows} rows for a {cols}-column basis"
            )));
        }
        Ok(DesignMatrix {
            rows,
            cols,
            values,
            covariate_range: Vec::new(),
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// FNV-1a over shape and value bits; identifies the matrix a set of
    /// posterior draws was fitted against.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        mix(self.rows as u64);
        mix(self.cols as u64);
        for v in &self.values {
            mix(v.to_bits());
        }
        h
    }
}

fn covariate_ranges(x_raw: &[f64], n: usize, m: usize) -> Result<Vec<(f64, f64)>> {
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); m];
    for i in 0..n {
        for j in 0..m {
            let v = x_raw[i * m + j];
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite covariate at row {i}, column {j}"
                )));
            }
            let r = &mut ranges[j];
            r.0 = r.0.min(v);
            r.1 = r.1.max(v);
        }
    }
    Ok(ranges)
}

/// Expand `n x m` row-major raw covariates into a design matrix.
///
/// Spline knots are placed equally spaced over the observed covariate range
/// with clamped (repeated) boundary knots; the same range is recorded so
/// out-of-sample rows reproduce the fitted basis exactly.
pub fn build_design(x_raw: &[f64], num_covariates: usize, spec: &BasisSpec) -> Result<DesignMatrix> {
    spec.validate()?;
    if num_covariates == 0 || x_raw.len() % num_covariates != 0 {
        return Err(Error::shape(
            num_covariates,
            x_raw.len(),
            "raw covariate slice must be n * num_covariates",
        ));
    }
    let n = x_raw.len() / num_covariates;
    let ranges = covariate_ranges(x_raw, n, num_covariates)?;
    let cols = spec.num_columns(num_covariates);
    if n < cols {
        return Err(Error::Data(format!(
            "underdetermined: {n} rows for a {cols}-column basis"
        )));
    }
    if let BasisKind::CubicSpline { .. } = spec.kind {
        if num_covariates != 1 {
            return Err(Error::Config(
                "cubic spline basis supports a single raw covariate".into(),
            ));
        }
        let (lo, hi) = ranges[0];
        if !(hi > lo) {
            return Err(Error::Data(
                "spline covariate range is degenerate (all values equal)".into(),
            ));
        }
    }
    let mut values = vec![0.0; n * cols];
    for i in 0..n {
        expand_row(
            &x_raw[i * num_covariates..(i + 1) * num_covariates],
            spec,
            &ranges,
            &mut values[i * cols..(i + 1) * cols],
        );
    }
    Ok(DesignMatrix {
        rows: n,
        cols,
        values,
        covariate_range: ranges,
    })
}

/// Expand one out-of-sample covariate vector with the basis and ranges of a
/// previous `build_design` call. Spline inputs beyond the fitted range are
/// clamped to the boundary.
pub fn eval_basis_row(x_new: &[f64], spec: &BasisSpec, fitted_range: &[(f64, f64)]) -> Result<Vec<f64>> {
    spec.validate()?;
    if x_new.len() != fitted_range.len() {
        return Err(Error::shape(
            fitted_range.len(),
            x_new.len(),
            "covariate vector must match fitted range count",
        ));
    }
    for v in x_new {
        if !v.is_finite() {
            return Err(Error::Data("non-finite covariate in basis row".into()));
        }
    }
    let mut row = vec![0.0; spec.num_columns(x_new.len())];
    expand_row(x_new, spec, fitted_range, &mut row);
    Ok(row)
}

fn expand_row(x: &[f64], spec: &BasisSpec, ranges: &[(f64, f64)], out: &mut [f64]) {
    match spec.kind {
        BasisKind::Linear => {
            let mut c = 0;
            if spec.include_intercept {
                out[c] = 1.0;
                c += 1;
            }
            out[c..c + x.len()].copy_from_slice(x);
        }
        BasisKind::Polynomial { degree } => {
            let mut c = 0;
            if spec.include_intercept {
                out[c] = 1.0;
                c += 1;
            }
            for &v in x {
                let mut pow = 1.0;
                for _ in 0..degree {
                    pow *= v;
                    out[c] = pow;
                    c += 1;
                }
            }
        }
        BasisKind::CubicSpline { interior_knots } => {
            let (lo, hi) = ranges[0];
            let u = x[0].clamp(lo, hi);
            let knots = clamped_knots(lo, hi, interior_knots);
            bspline_row(&knots, SPLINE_DEGREE, u, out);
        }
    }
}

/// Clamped knot vector: boundary knots repeated `degree + 1` times around
/// `interior_knots` equally spaced interior knots.
fn clamped_knots(lo: f64, hi: f64, interior_knots: usize) -> Vec<f64> {
    let mut knots = Vec::with_capacity(interior_knots + 2 * (SPLINE_DEGREE + 1));
    for _ in 0..=SPLINE_DEGREE {
        knots.push(lo);
    }
    let gap = (hi - lo) / (interior_knots as f64 + 1.0);
    for i in 1..=interior_knots {
        knots.push(lo + gap * i as f64);
    }
    for _ in 0..=SPLINE_DEGREE {
        knots.push(hi);
    }
    knots
}

/// Evaluate all B-spline basis functions at `u` into `out` (zeros except the
/// `degree + 1` functions supported on the containing span). Uses the
/// standard triangular recurrence over the nonzero window.
fn bspline_row(knots: &[f64], degree: usize, u: f64, out: &mut [f64]) {
    let num_basis = knots.len() - degree - 1;
    // Containing span: knots[s] <= u < knots[s+1], clamped to valid spans;
    // u at the right boundary belongs to the last span.
    let mut span = num_basis - 1;
    if u < knots[num_basis] {
        let mut lo = degree;
        let mut hi = num_basis - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if u < knots[mid] {
                hi = mid - 1;
            } else if u >= knots[mid + 1] {
                lo = mid + 1;
            } else {
                lo = mid;
                hi = mid;
            }
        }
        span = lo;
    }

    let mut n = [0.0f64; SPLINE_DEGREE + 1];
    let mut left = [0.0f64; SPLINE_DEGREE + 1];
    let mut right = [0.0f64; SPLINE_DEGREE + 1];
    n[0] = 1.0;
    for j in 1..=degree {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            let tmp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        n[j] = saved;
    }
    for v in out.iter_mut() {
        *v = 0.0;
    }
    out[span - degree..=span].copy_from_slice(&n[..=degree]);
}
