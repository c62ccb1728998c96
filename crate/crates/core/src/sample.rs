//! Sample containers and basic sample statistics.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// `n` couples `(x_i, y_i)` measured on the same experimental unit.
///
/// Construction rejects fewer than two couples and any non-finite coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::from_columns(xs, ys)
    }

    pub fn from_columns(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Domain(format!(
                "column lengths differ ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        check_values(&xs)?;
        check_values(&ys)?;
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// Always false for a constructed sample; provided for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn pairs(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// The differences `z_i = y_i − x_i`, in sample order.
    pub fn differences(&self) -> DiffSample {
        let z = self.pairs().map(|(x, y)| y - x).collect();
        DiffSample { z }
    }

    /// The sample with the roles of `x` and `y` exchanged.
    pub fn swapped(&self) -> PairedSample {
        PairedSample {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }

    /// Couples selected by `indices` (repeats allowed). Fails if fewer than two indices.
    pub fn select(&self, indices: &[usize]) -> Result<PairedSample> {
        let xs = indices.iter().map(|&i| self.xs[i]).collect();
        let ys = indices.iter().map(|&i| self.ys[i]).collect();
        PairedSample::from_columns(xs, ys)
    }

    /// The sample with couple `skip` removed.
    pub fn leave_one_out(&self, skip: usize) -> Result<PairedSample> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i != skip).collect();
        self.select(&keep)
    }

    /// Pearson correlation of the two coordinates.
    pub fn pearson_correlation(&self) -> Result<f64> {
        let n = self.len() as f64;
        let mx = self.xs.iter().sum::<f64>() / n;
        let my = self.ys.iter().sum::<f64>() / n;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (x, y) in self.pairs() {
            let (dx, dy) = (x - mx, y - my);
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        if sxx <= 0.0 || syy <= 0.0 {
            return Err(Error::Degenerate(
                "correlation needs nonzero variance in both coordinates".into(),
            ));
        }
        Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
    }
}

/// The differences `z = y − x` of a paired sample, or any univariate sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffSample {
    z: Vec<f64>,
}

impl DiffSample {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        check_values(&z)?;
        Ok(Self { z })
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    /// Always false for a constructed sample.
    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

impl From<&PairedSample> for DiffSample {
    fn from(s: &PairedSample) -> Self {
        s.differences()
    }
}

fn check_values(v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: v.len(),
        });
    }
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance with the `n − 1` denominator.
pub fn sample_variance(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: v.len(),
        });
    }
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    Ok(ss / (v.len() - 1) as f64)
}

/// Sample standard deviation with the `n − 1` denominator.
pub fn sample_sd(v: &[f64]) -> Result<f64> {
    sample_variance(v).map(f64::sqrt)
}

/// Random seed for every stochastic procedure in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Seed(pub u64);

/// Which estimator produced a [`ThetaEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Ecdf,
    Kernel1D,
    Mle1D,
    Smle1D,
    Kernel2D,
    Independent,
    Paired,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Independent,
        Method::Paired,
        Method::Ecdf,
        Method::Kernel1D,
        Method::Kernel2D,
        Method::Mle1D,
        Method::Smle1D,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Ecdf => "ECDF",
            Method::Kernel1D => "Kernel 1D",
            Method::Mle1D => "MLE 1D",
            Method::Smle1D => "SMLE 1D",
            Method::Kernel2D => "Kernel 2D",
            Method::Independent => "Independent",
            Method::Paired => "Paired",
        }
    }

    /// Lowercase identifier used on the command line and in file names.
    pub fn slug(self) -> &'static str {
        match self {
            Method::Ecdf => "ecdf",
            Method::Kernel1D => "kernel1d",
            Method::Mle1D => "mle1d",
            Method::Smle1D => "smle1d",
            Method::Kernel2D => "kernel2d",
            Method::Independent => "independent",
            Method::Paired => "paired",
        }
    }

    pub fn from_slug(s: &str) -> Option<Method> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Method::ALL.into_iter().find(|m| m.slug() == key)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A point estimate of `θ = P(X < Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub value: f64,
    pub method: Method,
}

impl ThetaEstimate {
    pub(crate) fn new(value: f64, method: Method) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            method,
        }
    }
}
