//! The scaled complex Wishart model `W(Σ, L)` for multilook covariance
//! matrices: density, maximum-likelihood estimation and sampling.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, outer_product, HermitianMatrix3, LowerTriangular3};
use crate::special::ln_gamma;

/// Seedable deterministic generator used by every sampler in the crate.
pub type RandomStream = ChaCha8Rng;

/// A stream seeded from a single 64-bit seed.
pub fn random_stream(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream number `index` under `seed`. Used to split work
/// (for example one stream per image row) without sharing a generator.
pub fn substream(seed: u64, index: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One realisation of the scattering vector `[S_VV, S_VH, S_HH]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringSample(pub [Complex64; 3]);

impl ScatteringSample {
    pub fn outer(&self) -> HermitianMatrix3 {
        outer_product(&self.0)
    }
}

/// Parameters `(Σ, L)` of the scaled complex Wishart distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartModel {
    sigma: HermitianMatrix3,
    looks: f64,
    factor: LowerTriangular3,
    sigma_inv: HermitianMatrix3,
}

impl WishartModel {
    /// `sigma` must be Hermitian positive definite and `looks` positive.
    ///
    /// The density additionally needs `looks > 2` and the sampler an integer
    /// number of looks; those are checked where they apply.
    pub fn new(sigma: HermitianMatrix3, looks: f64) -> Result<Self> {
        if !(looks.is_finite() && looks > 0.0) {
            return Err(Error::InvalidLooks(looks));
        }
        let factor = sigma.cholesky()?;
        let sigma_inv = sigma.inverse()?;
        Ok(Self {
            sigma,
            looks,
            factor,
            sigma_inv,
        })
    }

    pub fn sigma(&self) -> &HermitianMatrix3 {
        &self.sigma
    }

    pub fn looks(&self) -> f64 {
        self.looks
    }

    /// `log f(z; Σ, L)`, defined for `z` in the HPD cone and `L > 2`.
    pub fn log_density(&self, z: &HermitianMatrix3) -> Result<f64> {
        let l = self.looks;
        if l <= 2.0 {
            return Err(Error::InvalidLooks(l));
        }
        let log_det_z = z.log_det()?;
        let log_det_sigma = self.factor.log_det();
        let trace = self.sigma_inv.trace_product(z);
        Ok(3.0 * l * l.ln() + (l - 3.0) * log_det_z
            - l * log_det_sigma
            - ln_multivariate_gamma3(l)
            - l * trace)
    }

    /// Sum of `log_density` over a sample.
    pub fn log_likelihood(&self, samples: &[HermitianMatrix3]) -> Result<f64> {
        samples.iter().map(|z| self.log_density(z)).sum()
    }

    /// One draw of `y = C g` with `C C* = Σ`.
    pub fn draw_scattering<R: Rng + ?Sized>(&self, rng: &mut R) -> ScatteringSample {
        let g = [
            circular_gaussian(rng),
            circular_gaussian(rng),
            circular_gaussian(rng),
        ];
        ScatteringSample(self.factor.mul_vec(&g))
    }

    /// `Z = L⁻¹ Σ_ℓ y_ℓ y_ℓ*` over `L` independent scattering vectors.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<HermitianMatrix3> {
        let looks = integer_looks(self.looks)?;
        let mut acc = [0.0; 9];
        for _ in 0..looks {
            let outer = self.draw_scattering(rng).outer().to_reals();
            for (a, v) in acc.iter_mut().zip(outer) {
                *a += v;
            }
        }
        let w = 1.0 / looks as f64;
        Ok(HermitianMatrix3::from_reals(acc.map(|a| a * w)))
    }
}

/// `ln Γ₃(L) = 3 ln π + Σ_{i=0}^{2} ln Γ(L - i)`.
pub fn ln_multivariate_gamma3(looks: f64) -> f64 {
    3.0 * PI.ln() + ln_gamma(looks) + ln_gamma(looks - 1.0) + ln_gamma(looks - 2.0)
}

/// Maximum-likelihood estimate of `Σ` with `L` known: the sample mean.
pub fn ml_estimate(samples: &[HermitianMatrix3]) -> Result<HermitianMatrix3> {
    linalg::mean(samples)
}

/// Zero-mean circular complex Gaussian vector with covariance `sigma`.
pub fn sample_gaussian_vector<R: Rng + ?Sized>(
    sigma: &HermitianMatrix3,
    rng: &mut R,
) -> Result<ScatteringSample> {
    let factor = sigma.cholesky()?;
    let g = [
        circular_gaussian(rng),
        circular_gaussian(rng),
        circular_gaussian(rng),
    ];
    Ok(ScatteringSample(factor.mul_vec(&g)))
}

/// Standard circular complex Gaussian: real and imaginary parts are
/// independent `N(0, 1/2)`, so `E|g|² = 1`.
fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

fn integer_looks(looks: f64) -> Result<usize> {
    if looks >= 1.0 && looks.fract() == 0.0 && looks <= u32::MAX as f64 {
        Ok(looks as usize)
    } else {
        Err(Error::InvalidLooks(looks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_density_at_identity() {
        // 12 ln 4 - (3 ln π + ln 6 + ln 2 + ln 1) - 12
        let model = WishartModel::new(HermitianMatrix3::identity(), 4.0).unwrap();
        let expected = 12.0 * 4f64.ln() - (3.0 * PI.ln() + 12f64.ln()) - 12.0;
        let got = model.log_density(&HermitianMatrix3::identity()).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn log_density_rejects_bad_inputs() {
        let model = WishartModel::new(HermitianMatrix3::identity(), 2.0).unwrap();
        assert!(matches!(
            model.log_density(&HermitianMatrix3::identity()),
            Err(Error::InvalidLooks(_))
        ));
        let model = WishartModel::new(HermitianMatrix3::identity(), 4.0).unwrap();
        let singular = HermitianMatrix3::from_diag([1.0, 0.0, 1.0]);
        assert!(matches!(
            model.log_density(&singular),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(WishartModel::new(HermitianMatrix3::from_diag([1.0, -1.0, 1.0]), 4.0).is_err());
        assert!(WishartModel::new(HermitianMatrix3::identity(), 0.0).is_err());
    }

    #[test]
    fn fractional_looks_allowed_for_density_not_sampling() {
        let model = WishartModel::new(HermitianMatrix3::identity(), 3.5).unwrap();
        assert!(model.log_density(&HermitianMatrix3::identity()).is_ok());
        let mut rng = random_stream(1);
        assert!(matches!(
            model.sample(&mut rng),
            Err(Error::InvalidLooks(_))
        ));
    }

    #[test]
    fn single_look_sample_is_rank_one() {
        let model = WishartModel::new(HermitianMatrix3::identity(), 1.0).unwrap();
        let mut rng = random_stream(7);
        for _ in 0..100 {
            let z = model.sample(&mut rng).unwrap();
            assert!(z.det().abs() < 1e-10);
        }
    }

    #[test]
    fn ml_estimate_small_cases() {
        let i = HermitianMatrix3::identity();
        assert_eq!(ml_estimate(&[i]).unwrap(), i);
        let got = ml_estimate(&[
            HermitianMatrix3::from_diag([1.0; 3]),
            HermitianMatrix3::from_diag([3.0; 3]),
        ])
        .unwrap();
        assert_eq!(got, HermitianMatrix3::from_diag([2.0; 3]));
        assert!(matches!(ml_estimate(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn substreams_differ_and_replay() {
        let a: u64 = substream(3, 0).random();
        let b: u64 = substream(3, 1).random();
        let a2: u64 = substream(3, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }
}
