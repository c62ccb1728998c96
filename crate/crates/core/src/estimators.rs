//! Estimators of `θ = P(X < Y)`.
//!
//! Estimators on the differences `z = y − x` evaluate a survival-function
//! estimate of `Z` at zero. The bivariate kernel estimator integrates a
//! Gaussian product-kernel density over `{x < y}`, and the independence
//! baseline convolves two marginal kernel density estimates. Every Gaussian
//! integral is evaluated in closed form; the Monte Carlo versions are kept as
//! cross-checks.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{cdf_bw, diagonal_bw_2d, silverman_density_bw, Bandwidth1D, BandwidthMatrix2D};
use crate::logconcave::{fit_logconcave, fit_smoothed};
use crate::numerics::{normal_cdf, RngStream};
use crate::sample::{DiffSample, PairedSample, ThetaEstimate};

pub use crate::sample::Method;

/// Fixed bandwidth replacing a method's default selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandwidthOverride {
    /// Kernel 1D bandwidth, or the common marginal bandwidth for
    /// Independent/Paired.
    Scalar(Bandwidth1D),
    /// Kernel 2D bandwidth matrix.
    Matrix(BandwidthMatrix2D),
}

/// Which estimator to run, with optional overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub method: Method,
    pub bandwidth: Option<BandwidthOverride>,
    /// Draws for Monte Carlo evaluation; `None` selects the closed form.
    pub mc_samples: Option<usize>,
}

impl EstimatorSpec {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            bandwidth: None,
            mc_samples: None,
        }
    }

    pub fn with_bandwidth(mut self, bw: BandwidthOverride) -> Result<Self> {
        let ok = matches!(
            (self.method, bw),
            (
                Method::Kernel1D | Method::Independent | Method::Paired,
                BandwidthOverride::Scalar(_)
            ) | (Method::Kernel2D, BandwidthOverride::Matrix(_))
        );
        if !ok {
            return Err(Error::Domain(format!(
                "bandwidth override {bw:?} does not apply to {}",
                self.method
            )));
        }
        self.bandwidth = Some(bw);
        Ok(self)
    }

    /// Evaluates the estimator on `s`. Methods on differences use `s.differences()`;
    /// Independent and Paired use the two columns as marginal samples.
    ///
    /// `rng` is consumed only when `mc_samples` is set and the method has a
    /// Monte Carlo path (Kernel 2D).
    pub fn estimate(&self, s: &PairedSample, rng: Option<RngStream>) -> Result<ThetaEstimate> {
        let mut est = match self.method {
            Method::Ecdf => theta_ecdf(&s.differences()),
            Method::Kernel1D => {
                let z = s.differences();
                let h = match self.bandwidth {
                    Some(BandwidthOverride::Scalar(h)) => h,
                    _ => cdf_bw(z.values())?,
                };
                theta_kernel_1d(&z, h)
            }
            Method::Mle1D => theta_logconcave(&s.differences())?,
            Method::Smle1D => theta_smoothed_logconcave(&s.differences())?,
            Method::Kernel2D => {
                let h = match self.bandwidth {
                    Some(BandwidthOverride::Matrix(h)) => h,
                    _ => diagonal_bw_2d(s)?,
                };
                match (self.mc_samples, rng) {
                    (Some(m), Some(stream)) => theta_kernel_2d_mc(s, h, m, stream)?,
                    (Some(_), None) => return Err(Error::Domain("Monte Carlo evaluation needs an RNG stream".into())),
                    _ => theta_kernel_2d(s, h),
                }
            }
            Method::Independent | Method::Paired => {
                let (hx, hy) = match self.bandwidth {
                    Some(BandwidthOverride::Scalar(h)) => (h, h),
                    _ => (silverman_density_bw(s.xs())?, silverman_density_bw(s.ys())?),
                };
                theta_independent(s.xs(), s.ys(), hx, hy)?
            }
        };
        est.method = self.method;
        Ok(est)
    }
}

impl EstimatorSpec {
    /// Evaluates Independent/Paired on two marginal samples of possibly
    /// different lengths.
    pub fn estimate_marginals(&self, xs: &[f64], ys: &[f64]) -> Result<ThetaEstimate> {
        if !matches!(self.method, Method::Independent | Method::Paired) {
            return Err(Error::Domain(format!(
                "{} needs paired observations, not two marginal samples",
                self.method
            )));
        }
        let (hx, hy) = match self.bandwidth {
            Some(BandwidthOverride::Scalar(h)) => (h, h),
            _ => (silverman_density_bw(xs)?, silverman_density_bw(ys)?),
        };
        let mut est = theta_independent(xs, ys, hx, hy)?;
        est.method = self.method;
        Ok(est)
    }
}

/// Proportion of strictly positive differences.
pub fn theta_ecdf(z: &DiffSample) -> ThetaEstimate {
    let positive = z.values().iter().filter(|&&v| v > 0.0).count();
    ThetaEstimate::new(positive as f64 / z.len() as f64, Method::Ecdf)
}

/// Gaussian-kernel survival estimate at zero, `(1/n) Σ Φ(z_j / h)`.
pub fn theta_kernel_1d(z: &DiffSample, h: Bandwidth1D) -> ThetaEstimate {
    let h = h.get();
    let sum: f64 = z.values().iter().map(|&v| normal_cdf(v / h)).sum();
    ThetaEstimate::new(sum / z.len() as f64, Method::Kernel1D)
}

/// `1 − F̂(0)` for the log-concave MLE of `z`.
pub fn theta_logconcave(z: &DiffSample) -> Result<ThetaEstimate> {
    let fit = fit_logconcave(z)?;
    Ok(ThetaEstimate::new(1.0 - fit.cdf(0.0), Method::Mle1D))
}

/// `1 − F̃(0)` for the smoothed log-concave estimate of `z`.
pub fn theta_smoothed_logconcave(z: &DiffSample) -> Result<ThetaEstimate> {
    let fit = fit_smoothed(z)?;
    Ok(ThetaEstimate::new(1.0 - fit.cdf(0.0), Method::Smle1D))
}

/// Mass of the bivariate Gaussian kernel estimate on `{x < y}`.
///
/// The kernel centered at `(x_j, y_j)` with covariance `H` puts mass
/// `Φ((y_j − x_j) / sd)` there, `sd² = h11 + h22 − 2 h12`.
pub fn theta_kernel_2d(s: &PairedSample, h: BandwidthMatrix2D) -> ThetaEstimate {
    let sd = h.difference_variance().sqrt();
    let sum: f64 = s.pairs().map(|(x, y)| normal_cdf((y - x) / sd)).sum();
    ThetaEstimate::new(sum / s.len() as f64, Method::Kernel2D)
}

/// Monte Carlo version of [`theta_kernel_2d`]: sample from the kernel mixture
/// and count draws with `u < v`.
pub fn theta_kernel_2d_mc(
    s: &PairedSample,
    h: BandwidthMatrix2D,
    m: usize,
    stream: RngStream,
) -> Result<ThetaEstimate> {
    if m == 0 {
        return Err(Error::Domain("Monte Carlo needs at least one draw".into()));
    }
    let mut rng = stream.rng();
    let (l11, l21, l22) = h.cholesky();
    let (xs, ys) = (s.xs(), s.ys());
    let mut hits = 0usize;
    for _ in 0..m {
        let j = rng.random_range(0..s.len());
        let e1: f64 = rng.sample(StandardNormal);
        let e2: f64 = rng.sample(StandardNormal);
        let u = xs[j] + l11 * e1;
        let v = ys[j] + l21 * e1 + l22 * e2;
        if u < v {
            hits += 1;
        }
    }
    Ok(ThetaEstimate::new(hits as f64 / m as f64, Method::Kernel2D))
}

/// `P(X' < Y')` for independent `X' ~ f̂_X`, `Y' ~ f̂_Y`, the Gaussian kernel
/// density estimates of the two marginal samples.
pub fn theta_independent(xs: &[f64], ys: &[f64], hx: Bandwidth1D, hy: Bandwidth1D) -> Result<ThetaEstimate> {
    for v in [xs, ys] {
        if v.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: v.len(),
            });
        }
        if let Some(index) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    let sd = (hx.get().powi(2) + hy.get().powi(2)).sqrt();
    let mut total = 0.0;
    for &y in ys {
        let row: f64 = xs.iter().map(|&x| normal_cdf((y - x) / sd)).sum();
        total += row;
    }
    Ok(ThetaEstimate::new(
        total / (xs.len() * ys.len()) as f64,
        Method::Independent,
    ))
}

/// Monte Carlo version of [`theta_independent`], drawing each coordinate from
/// its own kernel mixture.
pub fn theta_independent_mc(
    xs: &[f64],
    ys: &[f64],
    hx: Bandwidth1D,
    hy: Bandwidth1D,
    m: usize,
    stream: RngStream,
) -> Result<ThetaEstimate> {
    if m == 0 || xs.is_empty() || ys.is_empty() {
        return Err(Error::Domain("Monte Carlo needs draws and nonempty samples".into()));
    }
    let mut rng = stream.rng();
    let mut hits = 0usize;
    for _ in 0..m {
        let x = xs[rng.random_range(0..xs.len())] + hx.get() * rng.sample::<f64, _>(StandardNormal);
        let y = ys[rng.random_range(0..ys.len())] + hy.get() * rng.sample::<f64, _>(StandardNormal);
        if x < y {
            hits += 1;
        }
    }
    Ok(ThetaEstimate::new(hits as f64 / m as f64, Method::Independent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Seed;
    use proptest::prelude::*;

    fn z(v: &[f64]) -> DiffSample {
        DiffSample::new(v.to_vec()).unwrap()
    }

    fn bw(h: f64) -> Bandwidth1D {
        Bandwidth1D::new(h).unwrap()
    }

    #[test]
    fn ecdf_examples() {
        assert!((theta_ecdf(&z(&[-1.0, 2.0, 3.0])).value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(theta_ecdf(&z(&[1.0, 2.0])).value, 1.0);
        assert_eq!(theta_ecdf(&z(&[-1.0, -2.0])).value, 0.0);
        assert_eq!(theta_ecdf(&z(&[0.0, 0.0, 1.0, -1.0])).value, 0.25);
    }

    #[test]
    fn kernel_1d_examples() {
        let zero = DiffSample::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(theta_kernel_1d(&zero, bw(0.3)).value, 0.5);
        assert!((theta_kernel_1d(&z(&[-1.0, 1.0]), bw(0.7)).value - 0.5).abs() < 1e-15);
        let v = z(&[-0.3, 0.2, 1.5, 2.0, -4.0]);
        assert!((theta_kernel_1d(&v, bw(1e-12)).value - theta_ecdf(&v).value).abs() < 1e-12);
    }

    #[test]
    fn logconcave_examples() {
        assert!((theta_logconcave(&z(&[-1.0, 1.0])).unwrap().value - 0.5).abs() < 1e-12);
        assert_eq!(theta_logconcave(&z(&[0.5, 1.0, 3.0])).unwrap().value, 1.0);
        let sym = z(&[-2.0, -0.5, 0.5, 2.0]);
        assert!((theta_smoothed_logconcave(&sym).unwrap().value - 0.5).abs() < 1e-8);
        assert!(theta_logconcave(&z(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn kernel_2d_examples() {
        let single = PairedSample::new(&[(0.0, 0.0), (0.0, 0.0)]).unwrap();
        let h = BandwidthMatrix2D::new(0.7, 0.2, 1.3).unwrap();
        assert_eq!(theta_kernel_2d(&single, h).value, 0.5);

        let s = PairedSample::new(&[(0.1, 0.4), (1.0, -0.2), (2.5, 3.1), (-1.0, 0.0)]).unwrap();
        let hh = 0.37;
        let diag = BandwidthMatrix2D::diagonal(hh, hh).unwrap();
        let via_1d = theta_kernel_1d(&s.differences(), bw(hh * 2f64.sqrt())).value;
        assert!((theta_kernel_2d(&s, diag).value - via_1d).abs() < 1e-12);
    }

    #[test]
    fn kernel_2d_mc_matches_closed_form() {
        let s = PairedSample::new(&[(0.1, 0.4), (1.0, -0.2), (2.5, 3.1), (-1.0, 0.0), (0.3, 0.9)]).unwrap();
        let h = BandwidthMatrix2D::new(0.5, 0.2, 0.8).unwrap();
        let exact = theta_kernel_2d(&s, h).value;
        let stream = RngStream::new(Seed(1), 0);
        let m = 400_000;
        let mc = theta_kernel_2d_mc(&s, h, m, stream).unwrap().value;
        let se = (exact * (1.0 - exact) / m as f64).sqrt();
        assert!((mc - exact).abs() < 4.0 * se);
        assert_eq!(mc, theta_kernel_2d_mc(&s, h, m, stream).unwrap().value);
        // Vanishing bandwidth recovers the empirical estimator.
        let tiny = BandwidthMatrix2D::diagonal(1e-9, 1e-9).unwrap();
        let near = theta_kernel_2d_mc(&s, tiny, 10_000, stream).unwrap().value;
        let ecdf = theta_ecdf(&s.differences()).value;
        assert!((near - ecdf).abs() < 0.03);
    }

    #[test]
    fn independent_examples() {
        let v = [0.3, 1.2, -0.4, 2.2];
        assert!((theta_independent(&v, &v, bw(0.5), bw(0.5)).unwrap().value - 0.5).abs() < 1e-15);
        let far = theta_independent(&[0.0, 0.0], &[10.0, 10.0], bw(0.1), bw(0.1))
            .unwrap()
            .value;
        assert!(far > 1.0 - 1e-12);
        assert!(theta_independent(&[1.0], &[1.0, 2.0], bw(1.0), bw(1.0)).is_err());
        let xs = [0.1, 0.5, -0.3];
        let ys = [0.9, 0.2, 1.1, 0.4];
        let exact = theta_independent(&xs, &ys, bw(0.3), bw(0.6)).unwrap().value;
        let m = 400_000;
        let mc = theta_independent_mc(&xs, &ys, bw(0.3), bw(0.6), m, RngStream::new(Seed(4), 0))
            .unwrap()
            .value;
        assert!((mc - exact).abs() < 4.0 * (exact * (1.0 - exact) / m as f64).sqrt());
    }

    #[test]
    fn spec_overrides_and_dispatch() {
        let s = PairedSample::new(&[(0.1, 0.4), (1.0, -0.2), (2.5, 3.1), (-1.0, 0.0), (0.3, 0.9)]).unwrap();
        let h = bw(0.2);
        let spec = EstimatorSpec::new(Method::Kernel1D)
            .with_bandwidth(BandwidthOverride::Scalar(h))
            .unwrap();
        let got = spec.estimate(&s, None).unwrap();
        assert_eq!(got.method, Method::Kernel1D);
        assert_eq!(got.value, theta_kernel_1d(&s.differences(), h).value);
        assert!(EstimatorSpec::new(Method::Ecdf)
            .with_bandwidth(BandwidthOverride::Scalar(h))
            .is_err());
        let paired = EstimatorSpec::new(Method::Paired).estimate(&s, None).unwrap();
        assert_eq!(paired.method, Method::Paired);
        let mc = EstimatorSpec {
            mc_samples: Some(10),
            ..EstimatorSpec::new(Method::Kernel2D)
        };
        assert!(mc.estimate(&s, None).is_err());
    }

    fn sample_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 4..30)
    }

    fn all_estimates(s: &PairedSample) -> Vec<f64> {
        Method::ALL
            .iter()
            .map(|&m| EstimatorSpec::new(m).estimate(s, None).unwrap().value)
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn outputs_in_unit_interval_and_swap_antisymmetric(pairs in sample_strategy()) {
            let s = PairedSample::new(&pairs).unwrap();
            prop_assume!(s.differences().values().iter().all(|&v| v.abs() > 1e-9));
            prop_assume!(kernels_ok(&s));
            let a = all_estimates(&s);
            let b = all_estimates(&s.swapped());
            for (m, (x, y)) in Method::ALL.iter().zip(a.iter().zip(&b)) {
                prop_assert!((0.0..=1.0).contains(x));
                prop_assert!((x + y - 1.0).abs() < 1e-9, "{m}: {x} + {y}");
            }
        }

        #[test]
        fn shift_invariant(pairs in sample_strategy(), c in -20.0..20.0f64) {
            let s = PairedSample::new(&pairs).unwrap();
            prop_assume!(kernels_ok(&s));
            let shifted: Vec<_> = pairs.iter().map(|&(x, y)| (x + c, y + c)).collect();
            let t = PairedSample::new(&shifted).unwrap();
            // Shifting perturbs z by rounding only; keep clear of the ECDF jump.
            prop_assume!(s.differences().values().iter().all(|&v| v.abs() > 1e-9));
            for (x, y) in all_estimates(&s).iter().zip(all_estimates(&t)) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn kernels_increase_with_y(pairs in sample_strategy(), d in 0.01..2.0f64) {
            let s = PairedSample::new(&pairs).unwrap();
            prop_assume!(kernels_ok(&s));
            let up: Vec<_> = pairs.iter().map(|&(x, y)| (x, y + d)).collect();
            let t = PairedSample::new(&up).unwrap();
            prop_assume!(s.differences().values().iter().any(|v| v.abs() < 2.0));
            let h1 = bw(0.5);
            let h2 = BandwidthMatrix2D::new(0.3, 0.1, 0.4).unwrap();
            prop_assert!(theta_kernel_1d(&t.differences(), h1).value > theta_kernel_1d(&s.differences(), h1).value);
            prop_assert!(theta_kernel_2d(&t, h2).value > theta_kernel_2d(&s, h2).value);
        }
    }

    fn kernels_ok(s: &PairedSample) -> bool {
        let z = s.differences();
        diagonal_bw_2d(s).is_ok() && cdf_bw(z.values()).is_ok() && fit_logconcave(&z).is_ok()
    }
}
