//! Gaussian kernel bandwidths.
//!
//! Only the Gaussian kernel is used, so every kernel evaluation in the crate
//! goes through [`normal_cdf`](crate::numerics::normal_cdf). All selectors here
//! are normal-reference rules driven by the sample standard deviation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{sample_sd, PairedSample};

/// Scalar bandwidth, in data units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth1D(f64);

impl Bandwidth1D {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(Self(h))
        } else {
            Err(Error::Domain(format!("bandwidth must be positive and finite, got {h}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Symmetric positive-definite 2×2 bandwidth matrix, acting as the covariance
/// of the bivariate Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthMatrix2D {
    h11: f64,
    h12: f64,
    h22: f64,
}

impl BandwidthMatrix2D {
    pub fn new(h11: f64, h12: f64, h22: f64) -> Result<Self> {
        let finite = h11.is_finite() && h12.is_finite() && h22.is_finite();
        if !finite || h11 <= 0.0 || h11 * h22 - h12 * h12 <= 0.0 {
            return Err(Error::Domain(format!(
                "bandwidth matrix [[{h11}, {h12}], [{h12}, {h22}]] is not positive definite"
            )));
        }
        Ok(Self { h11, h12, h22 })
    }

    pub fn diagonal(hx: f64, hy: f64) -> Result<Self> {
        Self::new(hx * hx, 0.0, hy * hy)
    }

    pub fn h11(&self) -> f64 {
        self.h11
    }

    pub fn h12(&self) -> f64 {
        self.h12
    }

    pub fn h22(&self) -> f64 {
        self.h22
    }

    /// Variance of `V − U` when `(U, V)` has covariance `self`.
    pub fn difference_variance(&self) -> f64 {
        self.h11 + self.h22 - 2.0 * self.h12
    }

    /// Lower Cholesky factor `(l11, l21, l22)`.
    pub fn cholesky(&self) -> (f64, f64, f64) {
        let l11 = self.h11.sqrt();
        let l21 = self.h12 / l11;
        let l22 = (self.h22 - l21 * l21).sqrt();
        (l11, l21, l22)
    }
}

fn positive_sd(v: &[f64]) -> Result<f64> {
    let sd = sample_sd(v)?;
    if sd > 0.0 {
        Ok(sd)
    } else {
        Err(Error::Degenerate("sample standard deviation is zero".into()))
    }
}

/// Silverman's rule of thumb for density estimation: `(4σ̂⁵ / 3n)^{1/5}`.
pub fn silverman_density_bw(v: &[f64]) -> Result<Bandwidth1D> {
    let sd = positive_sd(v)?;
    let n = v.len() as f64;
    Bandwidth1D::new((4.0 * sd.powi(5) / (3.0 * n)).powf(0.2))
}

/// Normal-reference bandwidth for kernel distribution-function estimation:
/// `1.587 σ̂ n^{−1/3}`.
pub fn cdf_bw(v: &[f64]) -> Result<Bandwidth1D> {
    let sd = positive_sd(v)?;
    let n = v.len() as f64;
    Bandwidth1D::new(1.587 * sd * n.powf(-1.0 / 3.0))
}

/// Diagonal bivariate bandwidth `diag(σ̂_x² n^{−1/3}, σ̂_y² n^{−1/3})`,
/// i.e. per-axis scales `σ̂ n^{−1/6}`.
pub fn diagonal_bw_2d(s: &PairedSample) -> Result<BandwidthMatrix2D> {
    let sx = positive_sd(s.xs())?;
    let sy = positive_sd(s.ys())?;
    let shrink = (s.len() as f64).powf(-1.0 / 6.0);
    BandwidthMatrix2D::diagonal(sx * shrink, sy * shrink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// A sample of length n with mean 0 and n−1 standard deviation exactly `sd`
    /// (up to rounding).
    fn with_sd(n: usize, sd: f64) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let s = sample_sd(&raw).unwrap();
        let m = raw.iter().sum::<f64>() / n as f64;
        raw.iter().map(|x| (x - m) * sd / s).collect()
    }

    #[test]
    fn silverman_examples() {
        let h = silverman_density_bw(&with_sd(100, 1.0)).unwrap().get();
        assert!((h - (4.0f64 / 300.0).powf(0.2)).abs() < 1e-12);
        assert!((h - 0.4217).abs() < 1e-4);
        let v = with_sd(50, 1.3);
        let scaled: Vec<f64> = v.iter().map(|x| 2.5 * x).collect();
        let (a, b) = (
            silverman_density_bw(&v).unwrap().get(),
            silverman_density_bw(&scaled).unwrap().get(),
        );
        assert!((b - 2.5 * a).abs() < 1e-12);
        let small = silverman_density_bw(&with_sd(10, 1.0)).unwrap().get();
        let large = silverman_density_bw(&with_sd(10_000, 1.0)).unwrap().get();
        assert!(large < small);
    }

    #[test]
    fn cdf_bw_examples() {
        let h = cdf_bw(&with_sd(1000, 1.0)).unwrap().get();
        assert!((h - 0.1587).abs() < 1e-12);
        let v = with_sd(40, 0.7);
        let scaled: Vec<f64> = v.iter().map(|x| 3.0 * x).collect();
        assert!((cdf_bw(&scaled).unwrap().get() - 3.0 * cdf_bw(&v).unwrap().get()).abs() < 1e-12);
        // h → 0 and n·h → ∞.
        let h_big = cdf_bw(&with_sd(100_000, 1.0)).unwrap().get();
        assert!(h_big < h && 100_000.0 * h_big > 1000.0 * h);
    }

    #[test]
    fn diagonal_2d_example() {
        let v = with_sd(64, 1.0);
        let s = PairedSample::from_columns(v.clone(), v.iter().rev().copied().collect()).unwrap();
        let h = diagonal_bw_2d(&s).unwrap();
        assert!((h.h11().sqrt() - 0.5).abs() < 1e-12);
        assert!((h.h22().sqrt() - 0.5).abs() < 1e-12);
        assert_eq!(h.h12(), 0.0);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(
            silverman_density_bw(&[2.0, 2.0, 2.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(cdf_bw(&[1.0; 4]), Err(Error::Degenerate(_))));
        let s = PairedSample::new(&[(1.0, 0.0), (1.0, 2.0), (1.0, 5.0)]).unwrap();
        assert!(matches!(diagonal_bw_2d(&s), Err(Error::Degenerate(_))));
        assert!(Bandwidth1D::new(0.0).is_err());
        assert!(Bandwidth1D::new(f64::NAN).is_err());
        assert!(BandwidthMatrix2D::new(1.0, 1.0, 1.0).is_err());
        assert!(BandwidthMatrix2D::new(-1.0, 0.0, 1.0).is_err());
        assert!(BandwidthMatrix2D::new(1.0, 0.5, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn bandwidths_positive_and_shift_invariant(
            v in prop::collection::vec(-50.0..50.0f64, 3..60),
            c in -100.0..100.0f64,
        ) {
            prop_assume!(sample_sd(&v).unwrap() > 1e-6);
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            for rule in [silverman_density_bw, cdf_bw] {
                let a = rule(&v).unwrap().get();
                let b = rule(&shifted).unwrap().get();
                prop_assert!(a > 0.0 && a.is_finite());
                prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
            }
            let s = PairedSample::from_columns(v.clone(), shifted).unwrap();
            let h = diagonal_bw_2d(&s).unwrap();
            prop_assert!(h.h11() > 0.0 && h.h22() > 0.0);
        }
    }
}
