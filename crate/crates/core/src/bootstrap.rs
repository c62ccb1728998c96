//! Nonparametric bootstrap for the θ estimators.
//!
//! Replicate `r` always draws its resample from RNG stream `r`, so results
//! do not depend on how replicates are scheduled across threads. Replicates
//! run on the ambient rayon pool; wrap calls in `ThreadPool::install` to bound
//! parallelism.
//!
//! Interval endpoints taken from the replicate distribution use the type-7
//! quantile rule (linear interpolation between order statistics).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, Method};
use crate::numerics::{normal_cdf, normal_quantile, RngStream};
use crate::sample::{mean, sample_sd, PairedSample, Seed, ThetaEstimate};

pub const DEFAULT_REPLICATES: usize = 2000;
/// Fresh resamples tried for one replicate before giving up.
pub const MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResamplingScheme {
    /// Draw couple indices with replacement, keeping each `(x_i, y_i)` intact.
    PairedResample,
    /// Draw `x` and `y` indices independently, discarding the pairing.
    IndependentResample,
}

impl ResamplingScheme {
    /// The scheme each method is bootstrapped with by default.
    pub fn default_for(method: Method) -> Self {
        match method {
            Method::Independent => ResamplingScheme::IndependentResample,
            _ => ResamplingScheme::PairedResample,
        }
    }

    fn check(self, method: Method) -> Result<()> {
        match (self, method) {
            (ResamplingScheme::IndependentResample, m) if !matches!(m, Method::Independent | Method::Paired) => {
                Err(Error::Domain(format!(
                    "{m} uses paired observations and cannot be bootstrapped with independent resampling"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub point: ThetaEstimate,
    pub replicates: Vec<f64>,
    pub scheme: ResamplingScheme,
    pub seed: Seed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CiKind {
    Normal,
    Basic,
    Percentile,
    BCa,
}

impl CiKind {
    pub const ALL: [CiKind; 4] = [CiKind::Normal, CiKind::Basic, CiKind::Percentile, CiKind::BCa];

    pub fn label(self) -> &'static str {
        match self {
            CiKind::Normal => "Normal",
            CiKind::Basic => "Basic",
            CiKind::Percentile => "Percentile",
            CiKind::BCa => "BCa",
        }
    }
}

/// A bootstrap confidence interval. Endpoints are never clipped;
/// `outside_unit` flags intervals reaching outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub kind: CiKind,
    pub level: f64,
    pub outside_unit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ConfidenceInterval {
    fn new(lo: f64, hi: f64, kind: CiKind, level: f64) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        Self {
            lo,
            hi,
            kind,
            level,
            outside_unit: lo < 0.0 || hi > 1.0,
            warning: None,
        }
    }

    /// The interval intersected with `[0, 1]`.
    pub fn clipped(&self) -> (f64, f64) {
        (self.lo.clamp(0.0, 1.0), self.hi.clamp(0.0, 1.0))
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Bootstraps `spec` on `data` with `b` replicates.
///
/// A replicate whose resample makes the estimator fail (for instance a
/// resample with a single distinct difference) is redrawn from stream
/// `r + k·b` on retry `k`, up to [`MAX_RETRIES`] times.
pub fn run_bootstrap(
    data: &PairedSample,
    spec: &EstimatorSpec,
    scheme: ResamplingScheme,
    b: usize,
    seed: Seed,
) -> Result<BootstrapResult> {
    run_with_draw(data, spec, scheme, b, seed, draw_indices)
}

fn draw_indices(stream: RngStream, n: usize, scheme: ResamplingScheme) -> (Vec<usize>, Vec<usize>) {
    let mut rng = stream.rng();
    let first: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let second = match scheme {
        ResamplingScheme::PairedResample => first.clone(),
        ResamplingScheme::IndependentResample => (0..n).map(|_| rng.random_range(0..n)).collect(),
    };
    (first, second)
}

fn run_with_draw<D>(
    data: &PairedSample,
    spec: &EstimatorSpec,
    scheme: ResamplingScheme,
    b: usize,
    seed: Seed,
    draw: D,
) -> Result<BootstrapResult>
where
    D: Fn(RngStream, usize, ResamplingScheme) -> (Vec<usize>, Vec<usize>) + Sync,
{
    if b == 0 {
        return Err(Error::Domain("bootstrap needs at least one replicate".into()));
    }
    scheme.check(spec.method)?;
    let n = data.len();
    let point = spec.estimate(data, mc_stream(seed, b, usize::MAX))?;
    let replicates = (0..b)
        .into_par_iter()
        .map(|r| {
            let mut last_err = None;
            for attempt in 0..=MAX_RETRIES {
                let stream = RngStream::new(seed, (r + attempt * b) as u64);
                let (ix, iy) = draw(stream, n, scheme);
                let xs = ix.iter().map(|&i| data.xs()[i]).collect();
                let ys = iy.iter().map(|&i| data.ys()[i]).collect();
                let outcome = PairedSample::from_columns(xs, ys).and_then(|s| spec.estimate(&s, mc_stream(seed, b, r)));
                match outcome {
                    Ok(est) => return Ok(est.value),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(Error::Resample {
                replicate: r,
                attempts: MAX_RETRIES + 1,
                source: Box::new(last_err.expect("at least one attempt")),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(BootstrapResult {
        point,
        replicates,
        scheme,
        seed,
    })
}

// Streams for Monte Carlo estimator paths live past every resampling stream.
fn mc_stream(seed: Seed, b: usize, r: usize) -> Option<RngStream> {
    let base = ((MAX_RETRIES + 1) * b) as u64;
    Some(RngStream::new(seed, base.wrapping_add(1).wrapping_add(r as u64)))
}

/// Leave-one-out estimates for the BCa acceleration.
///
/// Under paired resampling one couple is dropped at a time. Under independent
/// resampling each `x_i` and then each `y_j` is dropped in turn, giving
/// `n_x + n_y` values.
pub fn jackknife(data: &PairedSample, spec: &EstimatorSpec, scheme: ResamplingScheme) -> Result<Vec<f64>> {
    scheme.check(spec.method)?;
    let n = data.len();
    match scheme {
        ResamplingScheme::PairedResample => (0..n)
            .into_par_iter()
            .map(|i| {
                let s = data.leave_one_out(i)?;
                Ok(spec.estimate(&s, mc_stream(Seed(0), n, i))?.value)
            })
            .collect(),
        ResamplingScheme::IndependentResample => (0..2 * n)
            .into_par_iter()
            .map(|k| {
                let drop = |v: &[f64], skip: usize| -> Vec<f64> {
                    v.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &x)| x)
                        .collect()
                };
                let (xs, ys) = if k < n {
                    (drop(data.xs(), k), data.ys().to_vec())
                } else {
                    (data.xs().to_vec(), drop(data.ys(), k - n))
                };
                Ok(spec.estimate_marginals(&xs, &ys)?.value)
            })
            .collect(),
    }
}

/// Type-7 quantile of sorted values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn check_level(level: f64) -> Result<f64> {
    if level > 0.0 && level < 1.0 {
        Ok(1.0 - level)
    } else {
        Err(Error::Domain(format!(
            "confidence level must lie in (0, 1), got {level}"
        )))
    }
}

/// Bias-corrected normal interval: `2θ̂ − mean(θ*) ± z_{1−α/2} sd(θ*)`.
pub fn ci_normal(r: &BootstrapResult, level: f64) -> Result<ConfidenceInterval> {
    let alpha = check_level(level)?;
    if r.replicates.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: r.replicates.len(),
        });
    }
    let center = 2.0 * r.point.value - mean(&r.replicates);
    let half = normal_quantile(1.0 - alpha / 2.0)? * sample_sd(&r.replicates)?;
    Ok(ConfidenceInterval::new(
        center - half,
        center + half,
        CiKind::Normal,
        level,
    ))
}

/// Basic interval: `(2θ̂ − q_{1−α/2}, 2θ̂ − q_{α/2})`.
pub fn ci_basic(r: &BootstrapResult, level: f64) -> Result<ConfidenceInterval> {
    let alpha = check_level(level)?;
    let s = sorted(&r.replicates);
    let p = r.point.value;
    Ok(ConfidenceInterval::new(
        2.0 * p - quantile_sorted(&s, 1.0 - alpha / 2.0),
        2.0 * p - quantile_sorted(&s, alpha / 2.0),
        CiKind::Basic,
        level,
    ))
}

/// Percentile interval: `(q_{α/2}, q_{1−α/2})`.
pub fn ci_percentile(r: &BootstrapResult, level: f64) -> Result<ConfidenceInterval> {
    let alpha = check_level(level)?;
    let s = sorted(&r.replicates);
    Ok(ConfidenceInterval::new(
        quantile_sorted(&s, alpha / 2.0),
        quantile_sorted(&s, 1.0 - alpha / 2.0),
        CiKind::Percentile,
        level,
    ))
}

/// Bias-correction `z0 = Φ⁻¹(#{θ* < θ̂} / B)`.
pub fn bca_bias_correction(r: &BootstrapResult) -> Result<f64> {
    let below = r.replicates.iter().filter(|&&v| v < r.point.value).count();
    let b = r.replicates.len();
    if below == 0 || below == b {
        return Err(Error::BcaUndefined(format!(
            "{below} of {b} replicates fall below the point estimate; increase B"
        )));
    }
    normal_quantile(below as f64 / b as f64)
}

/// Jackknife acceleration `Σ d³ / (6 (Σ d²)^{3/2})`, `d_i = θ̄ − θ_(i)`.
/// Returns `None` when the jackknife values have no spread.
pub fn bca_acceleration(jack: &[f64]) -> Option<f64> {
    let m = mean(jack);
    let (mut s2, mut s3) = (0.0, 0.0);
    for &t in jack {
        let d = m - t;
        s2 += d * d;
        s3 += d * d * d;
    }
    if s2 > 0.0 {
        Some(s3 / (6.0 * s2.powf(1.5)))
    } else {
        None
    }
}

/// Bias-corrected and accelerated percentile interval.
pub fn ci_bca(r: &BootstrapResult, jack: &[f64], level: f64) -> Result<ConfidenceInterval> {
    let alpha = check_level(level)?;
    if jack.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: jack.len(),
        });
    }
    let z0 = bca_bias_correction(r)?;
    let (a, warning) = match bca_acceleration(jack) {
        Some(a) => (a, None),
        None => (
            0.0,
            Some("jackknife values have zero variance; acceleration set to 0".to_string()),
        ),
    };
    let adjust = |zq: f64| {
        let w = z0 + zq;
        let denom = 1.0 - a * w;
        if denom > 0.0 {
            normal_cdf(z0 + w / denom)
        } else if w > 0.0 {
            1.0
        } else {
            0.0
        }
    };
    let lo_p = adjust(normal_quantile(alpha / 2.0)?);
    let hi_p = adjust(normal_quantile(1.0 - alpha / 2.0)?);
    let s = sorted(&r.replicates);
    let mut ci = ConfidenceInterval::new(quantile_sorted(&s, lo_p), quantile_sorted(&s, hi_p), CiKind::BCa, level);
    ci.warning = warning;
    Ok(ci)
}
