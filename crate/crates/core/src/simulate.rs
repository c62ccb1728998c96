//! Bivariate sinh-arcsinh data and quadrature ground truths.
//!
//! `(G1, G2)` is a standard bivariate normal with correlation `rho`; each
//! margin is pushed through `σ sinh((asinh(g) + ε) / δ)`. `ε` controls skewness
//! and `δ > 1` lightens the tails.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{adaptive_quad, normal_cdf, normal_pdf, QuadratureSpec, RngStream};
use crate::sample::PairedSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinhArcsinhParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl SinhArcsinhParams {
    pub fn new(sigma1: f64, sigma2: f64, rho: f64, eps1: f64, eps2: f64, delta1: f64, delta2: f64) -> Result<Self> {
        let p = Self {
            sigma1,
            sigma2,
            rho,
            eps1,
            eps2,
            delta1,
            delta2,
        };
        p.validate()?;
        Ok(p)
    }

    /// The skewed, light-tailed, correlated configuration
    /// `(σ1, σ2, ρ, ε1, ε2, δ1, δ2) = (1, 1, 0.75, 0, 1, 1, 2)`.
    pub fn reference() -> Self {
        Self {
            sigma1: 1.0,
            sigma2: 1.0,
            rho: 0.75,
            eps1: 0.0,
            eps2: 1.0,
            delta1: 1.0,
            delta2: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.sigma1,
            self.sigma2,
            self.rho,
            self.eps1,
            self.eps2,
            self.delta1,
            self.delta2,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sinh-arcsinh parameters must be finite".into()));
        }
        if self.sigma1 <= 0.0 || self.sigma2 <= 0.0 {
            return Err(Error::Domain("sinh-arcsinh scales must be positive".into()));
        }
        if self.delta1 <= 0.0 || self.delta2 <= 0.0 {
            return Err(Error::Domain("sinh-arcsinh tail parameters must be positive".into()));
        }
        if self.rho.abs() >= 1.0 {
            return Err(Error::Domain("correlation must lie strictly inside (-1, 1)".into()));
        }
        Ok(())
    }

    /// Parses `σ1,σ2,ρ,ε1,ε2,δ1,δ2`.
    pub fn parse(s: &str) -> Result<Self> {
        let values: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Domain(format!("bad parameter list {s:?}: {e}")))?;
        match values[..] {
            [s1, s2, r, e1, e2, d1, d2] => Self::new(s1, s2, r, e1, e2, d1, d2),
            _ => Err(Error::Domain(format!(
                "expected 7 comma-separated parameters, got {}",
                values.len()
            ))),
        }
    }

    fn with_rho(self, rho: f64) -> Self {
        Self { rho, ..self }
    }

    /// Same distribution with the margin labels exchanged.
    pub fn swap_margins(self) -> Self {
        Self {
            sigma1: self.sigma2,
            sigma2: self.sigma1,
            eps1: self.eps2,
            eps2: self.eps1,
            delta1: self.delta2,
            delta2: self.delta1,
            ..self
        }
    }
}

/// `σ sinh((asinh(u) + ε) / δ)`.
pub fn sas_transform(u: f64, sigma: f64, eps: f64, delta: f64) -> f64 {
    sigma * ((u.asinh() + eps) / delta).sinh()
}

/// Inverse of [`sas_transform`]: `sinh(δ asinh(t / σ) − ε)`.
pub fn sas_inverse(t: f64, sigma: f64, eps: f64, delta: f64) -> f64 {
    (delta * (t / sigma).asinh() - eps).sinh()
}

pub fn sample_sas(p: &SinhArcsinhParams, n: usize, stream: RngStream) -> Result<PairedSample> {
    p.validate()?;
    let mut rng = stream.rng();
    let c = (1.0 - p.rho * p.rho).sqrt();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let g1: f64 = rng.sample(StandardNormal);
        let e: f64 = rng.sample(StandardNormal);
        let g2 = p.rho * g1 + c * e;
        xs.push(sas_transform(g1, p.sigma1, p.eps1, p.delta1));
        ys.push(sas_transform(g2, p.sigma2, p.eps2, p.delta2));
    }
    PairedSample::from_columns(xs, ys)
}

fn quad_spec(tol: f64) -> Result<QuadratureSpec> {
    QuadratureSpec::new(tol, 10_000)
}

/// `P(X < Y)` by one-dimensional quadrature in the Gaussian layer:
///
/// ```text
///   θ = ∫ φ(g) Φ((b(g) − ρ g) / √(1 − ρ²)) dg,   b(g) = sas1⁻¹(sas2(g)).
/// ```
pub fn theta_oracle(p: &SinhArcsinhParams, tol: f64) -> Result<f64> {
    p.validate()?;
    let c = (1.0 - p.rho * p.rho).sqrt();
    let integrand = |g: f64| {
        let y = sas_transform(g, p.sigma2, p.eps2, p.delta2);
        let bound = sas_inverse(y, p.sigma1, p.eps1, p.delta1);
        normal_pdf(g) * normal_cdf((bound - p.rho * g) / c)
    };
    let theta = adaptive_quad(integrand, f64::NEG_INFINITY, f64::INFINITY, quad_spec(tol)?)?;
    Ok(theta.clamp(0.0, 1.0))
}

/// `P(X' < Y')` for independent draws from the two margins.
pub fn theta_independent_oracle(p: &SinhArcsinhParams, tol: f64) -> Result<f64> {
    theta_oracle(&p.with_rho(0.0), tol)
}

/// Pearson correlation of `(X, Y)`.
///
/// Marginal moments are one-dimensional integrals; the cross moment
/// `E[X Y] = ∫ φ(g) sas2(g) E[sas1(ρ g + √(1 − ρ²) e)] dg` nests one quadrature
/// inside another.
pub fn correlation_oracle(p: &SinhArcsinhParams, tol: f64) -> Result<f64> {
    p.validate()?;
    // Moments are O(1); a tighter inner tolerance keeps the outer error in budget.
    let spec = quad_spec(tol * 0.1)?;
    let inner_spec = quad_spec(tol * 0.01)?;
    let inf = f64::INFINITY;
    let x_of = |g: f64| sas_transform(g, p.sigma1, p.eps1, p.delta1);
    let y_of = |g: f64| sas_transform(g, p.sigma2, p.eps2, p.delta2);
    let ex = adaptive_quad(|g| normal_pdf(g) * x_of(g), -inf, inf, spec)?;
    let ey = adaptive_quad(|g| normal_pdf(g) * y_of(g), -inf, inf, spec)?;
    let exx = adaptive_quad(|g| normal_pdf(g) * x_of(g).powi(2), -inf, inf, spec)?;
    let eyy = adaptive_quad(|g| normal_pdf(g) * y_of(g).powi(2), -inf, inf, spec)?;
    let c = (1.0 - p.rho * p.rho).sqrt();
    let mut inner_err = None;
    let exy = adaptive_quad(
        |g| {
            let cond = adaptive_quad(|e| normal_pdf(e) * x_of(p.rho * g + c * e), -inf, inf, inner_spec);
            match cond {
                Ok(v) => normal_pdf(g) * y_of(g) * v,
                Err(e) => {
                    inner_err.get_or_insert(e);
                    0.0
                }
            }
        },
        -inf,
        inf,
        spec,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    let vx = exx - ex * ex;
    let vy = eyy - ey * ey;
    Ok(((exy - ex * ey) / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// Monte Carlo estimate of `P(X < Y)` with `m` draws.
pub fn theta_monte_carlo(p: &SinhArcsinhParams, m: usize, stream: RngStream) -> Result<f64> {
    let s = sample_sas(p, m.max(2), stream)?;
    let hits = s.pairs().filter(|(x, y)| x < y).count();
    Ok(hits as f64 / s.len() as f64)
}
