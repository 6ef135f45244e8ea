//! Hellinger-distance test between two Wishart models with a common number
//! of looks.
//!
//! For ML estimates `Σ₁` (from `m` samples) and `Σᵢ` (from `n` samples) the
//! statistic is
//!
//! ```text
//! S_H = 8mn/(m+n) · [1 − ( |((Σ₁⁻¹ + Σᵢ⁻¹)/2)⁻¹| / √(|Σ₁| |Σᵢ|) )^L]
//! ```
//!
//! which is asymptotically χ² with as many degrees of freedom as `Σ` has
//! real parameters (nine for a 3×3 Hermitian matrix). When the same sample
//! is tested `t` times the per-test level comes from the Šidák correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix3;
use crate::special::gamma_q;

/// Real parameters of a 3×3 complex Hermitian matrix.
pub const WISHART_DOF: usize = 9;

/// Family-wise level used when none is given.
pub const DEFAULT_ALPHA: f64 = 0.80;

/// Directional regions compared against the central one.
pub const DEFAULT_NUM_TESTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Family-wise significance level α.
    pub alpha: f64,
    /// Number of tests `t` sharing one sample.
    pub num_tests: usize,
    /// Degrees of freedom `M` of the reference χ² law.
    pub dof: usize,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            num_tests: DEFAULT_NUM_TESTS,
            dof: WISHART_DOF,
        }
    }
}

impl TestConfig {
    pub fn new(alpha: f64, num_tests: usize, dof: usize) -> Result<Self> {
        let config = Self {
            alpha,
            num_tests,
            dof,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        sidak_level(self.alpha, self.num_tests)?;
        if self.dof == 0 {
            return Err(Error::InvalidDof(self.dof));
        }
        Ok(())
    }

    /// Per-test level η.
    pub fn corrected_level(&self) -> Result<f64> {
        sidak_level(self.alpha, self.num_tests)
    }
}

/// Outcome of one test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestDecision {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// A covariance estimate with its inverse and log-determinant cached, so a
/// central estimate can be compared against many others cheaply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedCovariance {
    sigma: HermitianMatrix3,
    inverse: HermitianMatrix3,
    log_det: f64,
}

impl PreparedCovariance {
    /// Fails with `NotPositiveDefinite` outside the HPD cone.
    pub fn new(sigma: HermitianMatrix3) -> Result<Self> {
        let log_det = sigma.log_det()?;
        let inverse = sigma.inverse()?;
        Ok(Self {
            sigma,
            inverse,
            log_det,
        })
    }

    pub fn sigma(&self) -> &HermitianMatrix3 {
        &self.sigma
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }
}

/// `( |H| / √(|Σ₁||Σᵢ|) )^L` with `H` the harmonic-mean matrix, evaluated in
/// log space and clamped to `[0, 1]`.
pub fn affinity(first: &PreparedCovariance, other: &PreparedCovariance, looks: f64) -> Result<f64> {
    let half_sum = (first.inverse + other.inverse).scale(0.5);
    // log |H| = -log |(Σ₁⁻¹ + Σᵢ⁻¹)/2|
    let log_det_harmonic = -half_sum.log_det()?;
    let log_ratio = log_det_harmonic - 0.5 * first.log_det - 0.5 * other.log_det;
    Ok((looks * log_ratio).exp().clamp(0.0, 1.0))
}

/// Scaled Hellinger statistic on prepared estimates.
pub fn hellinger_prepared(
    first: &PreparedCovariance,
    other: &PreparedCovariance,
    m: usize,
    n: usize,
    looks: f64,
) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidSampleSize { m, n });
    }
    if !(looks > 2.0 && looks.is_finite()) {
        return Err(Error::InvalidLooks(looks));
    }
    let (m, n) = (m as f64, n as f64);
    let scale = 8.0 * m * n / (m + n);
    let stat = scale * (1.0 - affinity(first, other, looks)?);
    Ok(stat.max(0.0))
}

/// Scaled Hellinger statistic `S_H` between two HPD estimates.
pub fn hellinger_statistic(
    sigma1: &HermitianMatrix3,
    sigma_i: &HermitianMatrix3,
    m: usize,
    n: usize,
    looks: f64,
) -> Result<f64> {
    let first = PreparedCovariance::new(*sigma1)?;
    let other = PreparedCovariance::new(*sigma_i)?;
    hellinger_prepared(&first, &other, m, n, looks)
}

/// `Pr(χ²_dof > s)`.
pub fn chi2_survival(s: f64, dof: usize) -> f64 {
    assert!(dof > 0, "chi-squared needs at least one degree of freedom");
    if s <= 0.0 {
        return 1.0;
    }
    gamma_q(dof as f64 / 2.0, s / 2.0)
}

/// Šidák per-test level `η = 1 − (1 − α)^(1/t)`.
pub fn sidak_level(alpha: f64, num_tests: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || num_tests == 0 {
        return Err(Error::InvalidLevel { alpha, num_tests });
    }
    // 1 - exp(ln(1-α)/t), written to stay accurate for tiny α.
    Ok(-((-alpha).ln_1p() / num_tests as f64).exp_m1())
}

/// Decision for the hypothesis `Σ₁ = Σᵢ` on prepared estimates.
pub fn test_prepared(
    first: &PreparedCovariance,
    other: &PreparedCovariance,
    m: usize,
    n: usize,
    looks: f64,
    level: f64,
    dof: usize,
) -> Result<TestDecision> {
    let statistic = hellinger_prepared(first, other, m, n, looks)?;
    let p_value = chi2_survival(statistic, dof);
    Ok(TestDecision {
        statistic,
        p_value,
        reject: p_value <= level,
    })
}

/// Tests whether two estimates come from the same Wishart model.
pub fn test_same_distribution(
    sigma1: &HermitianMatrix3,
    sigma_i: &HermitianMatrix3,
    m: usize,
    n: usize,
    looks: f64,
    config: &TestConfig,
) -> Result<TestDecision> {
    config.validate()?;
    let level = config.corrected_level()?;
    let first = PreparedCovariance::new(*sigma1)?;
    let other = PreparedCovariance::new(*sigma_i)?;
    test_prepared(&first, &other, m, n, looks, level, config.dof)
}
