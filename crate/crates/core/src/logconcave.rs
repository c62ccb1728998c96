//! Univariate log-concave maximum likelihood density estimation.
//!
//! The MLE over all log-concave densities has a log-density `φ` that is
//! concave and piecewise linear with kinks only at observations. It maximizes
//!
//! ```text
//!   L(φ) = Σ_i w_i φ(x_i) − ∫ exp φ(t) dt
//! ```
//!
//! over such `φ`, where `x_i` are the distinct observations with weights
//! `w_i` (multiplicity / n). The maximizer automatically integrates to one.
//!
//! The fit uses an active-set method over knot sets. For a fixed knot set
//! `φ` is linear between knots and `L` is a smooth concave function of the
//! knot values; its maximizer is found by Newton's method with a tridiagonal
//! Hessian. Knots whose kink turns convex are dropped by stepping back to the
//! feasible boundary, and a new knot is added wherever the directional
//! derivative of `L` in the direction of an extra concave kink is positive.
//!
//! The smoothed variant convolves the MLE with a centered Gaussian whose
//! variance restores the sample variance.

use crate::error::{Error, Result};
use crate::numerics::{adaptive_quad, normal_cdf, QuadratureSpec};
use crate::sample::{mean, sample_variance, DiffSample};

/// Gradient tolerance (standardized units) for adding a knot.
const KNOT_TOL: f64 = 1e-9;
/// Kinks at or below this value (standardized units) are treated as zero.
const KINK_EPS: f64 = 1e-12;
const MAX_NEWTON: usize = 200;

/// Log-concave MLE: `φ` is linear between consecutive knots, `f̂ = exp φ` on
/// `[knots[0], knots[last]]` and zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConcaveFit {
    knots: Vec<f64>,
    phi: Vec<f64>,
    // Mass of f̂ to the left of each knot.
    cumulative: Vec<f64>,
}

impl LogConcaveFit {
    /// Builds a fit from explicit knots and log-density values. The result is
    /// renormalized to integrate to one; concavity is checked.
    pub fn from_parts(knots: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != phi.len() {
            return Err(Error::Domain("need at least two knots with matching values".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) || phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain(
                "knots must increase strictly and values be finite".into(),
            ));
        }
        let slopes: Vec<f64> = (0..knots.len() - 1)
            .map(|a| (phi[a + 1] - phi[a]) / (knots[a + 1] - knots[a]))
            .collect();
        if slopes.windows(2).any(|s| s[1] > s[0] + 1e-9 * (1.0 + s[0].abs())) {
            return Err(Error::Domain("log-density is not concave".into()));
        }
        let mut fit = Self {
            knots,
            phi,
            cumulative: Vec::new(),
        };
        fit.normalize();
        Ok(fit)
    }

    fn normalize(&mut self) {
        let total: f64 = (0..self.knots.len() - 1).map(|a| self.segment_mass(a)).sum();
        let shift = total.ln();
        self.phi.iter_mut().for_each(|p| *p -= shift);
        let mut acc = 0.0;
        self.cumulative = std::iter::once(0.0)
            .chain((0..self.knots.len() - 1).map(|a| {
                acc += self.segment_mass(a);
                acc
            }))
            .collect();
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Log-density at the knots.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    fn segment_mass(&self, a: usize) -> f64 {
        let width = self.knots[a + 1] - self.knots[a];
        width * exp_linear_moments(self.phi[a], self.phi[a + 1]).0
    }

    fn segment_of(&self, t: f64) -> usize {
        // Index a with knots[a] <= t < knots[a + 1], clamped to valid segments.
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.saturating_sub(1).min(self.knots.len() - 2)
    }

    /// Log-density at `t`; `-∞` outside the support.
    pub fn log_density(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return f64::NEG_INFINITY;
        }
        let a = self.segment_of(t);
        let lambda = (t - self.knots[a]) / (self.knots[a + 1] - self.knots[a]);
        (1.0 - lambda) * self.phi[a] + lambda * self.phi[a + 1]
    }

    pub fn density(&self, t: f64) -> f64 {
        self.log_density(t).exp()
    }

    /// Distribution function, integrating the exp-linear pieces in closed form.
    pub fn cdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let a = self.segment_of(t);
        let width = self.knots[a + 1] - self.knots[a];
        let tau = t - self.knots[a];
        let slope = (self.phi[a + 1] - self.phi[a]) / width;
        let partial = tau * self.phi[a].exp() * g0(slope * tau);
        (self.cumulative[a] + partial).clamp(0.0, 1.0)
    }

    /// Inverse distribution function on `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let last = self.knots.len() - 1;
        let a = self
            .cumulative
            .partition_point(|&c| c <= p)
            .saturating_sub(1)
            .min(last - 1);
        let width = self.knots[a + 1] - self.knots[a];
        let slope = (self.phi[a + 1] - self.phi[a]) / width;
        // Solve e^{φ_a} (e^{slope τ} − 1) / slope = r for τ.
        let r = (p - self.cumulative[a]).max(0.0) * (-self.phi[a]).exp();
        let x = slope * r;
        let tau = if x.abs() < 1e-12 {
            r * (1.0 - 0.5 * x)
        } else if x <= -1.0 {
            width
        } else {
            x.ln_1p() / slope
        };
        self.knots[a] + tau.clamp(0.0, width)
    }

    /// Integral of `f̂` (one up to rounding).
    pub fn total_mass(&self) -> f64 {
        (0..self.knots.len() - 1).map(|a| self.segment_mass(a)).sum()
    }

    fn moments_about(&self, center: f64) -> (f64, f64, f64) {
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for a in 0..self.knots.len() - 1 {
            let width = self.knots[a + 1] - self.knots[a];
            let left = self.knots[a] - center;
            let (j0, j1, j2) = exp_linear_moments(self.phi[a], self.phi[a + 1]);
            m0 += width * j0;
            m1 += width * (left * j0 + width * j1);
            m2 += width * (left * left * j0 + 2.0 * left * width * j1 + width * width * j2);
        }
        (m0, m1, m2)
    }

    pub fn mean(&self) -> f64 {
        let center = 0.5 * (self.knots[0] + self.knots[self.knots.len() - 1]);
        let (m0, m1, _) = self.moments_about(center);
        center + m1 / m0
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let (m0, _, m2) = self.moments_about(mu);
        m2 / m0
    }

    /// `(1/n) Σ φ̂(z_i) − ∫ exp φ̂`, the quantity the fit maximizes.
    pub fn objective(&self, z: &DiffSample) -> f64 {
        let loglik = z.values().iter().map(|&t| self.log_density(t)).sum::<f64>() / z.len() as f64;
        loglik - self.total_mass()
    }
}

/// Log-concave MLE convolved with `N(0, gamma2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedFit {
    pub base: LogConcaveFit,
    pub gamma2: f64,
}

impl SmoothedFit {
    /// Distribution function of the convolution. Reduces exactly to the base
    /// distribution function when `gamma2 == 0`.
    pub fn cdf(&self, t: f64) -> f64 {
        if self.gamma2 <= 0.0 {
            return self.base.cdf(t);
        }
        let gamma = self.gamma2.sqrt();
        let knots = &self.base.knots;
        let segments = knots.len() - 1;
        let spec = QuadratureSpec {
            abs_tol: 1e-11 / segments as f64,
            max_subdivisions: 500,
        };
        let mut total = 0.0;
        for a in 0..segments {
            let integrand = |x: f64| self.base.density(x) * normal_cdf((t - x) / gamma);
            let piece = match adaptive_quad(integrand, knots[a], knots[a + 1], spec) {
                Ok(v) => v,
                Err(Error::NonConvergence { estimate, .. }) => estimate,
                Err(_) => 0.0,
            };
            total += piece;
        }
        total.clamp(0.0, 1.0)
    }

    pub fn variance(&self) -> f64 {
        self.base.variance() + self.gamma2
    }
}

/// Log-concave MLE of the distribution of `z`.
pub fn fit_logconcave(z: &DiffSample) -> Result<LogConcaveFit> {
    let (x, w) = collapse_ties(z.values());
    if x.len() < 2 {
        return Err(Error::Degenerate(
            "log-concave fit needs at least two distinct values".into(),
        ));
    }
    let center = mean(z.values());
    let scale = sample_variance(z.values())?.sqrt();
    let u: Vec<f64> = x.iter().map(|v| (v - center) / scale).collect();
    let (knots, phi_u) = active_set(&u, &w)?;
    let knot_x: Vec<f64> = knots.iter().map(|&k| x[k]).collect();
    let phi_x: Vec<f64> = knots.iter().map(|&k| phi_u[k] - scale.ln()).collect();
    let mut fit = LogConcaveFit {
        knots: knot_x,
        phi: phi_x,
        cumulative: Vec::new(),
    };
    fit.normalize();
    Ok(fit)
}

/// Log-concave MLE plus the Gaussian smoothing variance `max(0, S² − Var(f̂))`.
pub fn fit_smoothed(z: &DiffSample) -> Result<SmoothedFit> {
    let base = fit_logconcave(z)?;
    let s2 = sample_variance(z.values())?;
    let gamma2 = (s2 - base.variance()).max(0.0);
    Ok(SmoothedFit { base, gamma2 })
}

pub fn logconcave_cdf(fit: &LogConcaveFit, t: f64) -> f64 {
    fit.cdf(t)
}

pub fn smoothed_cdf(fit: &SmoothedFit, t: f64) -> f64 {
    fit.cdf(t)
}

/// Sorted distinct values and their relative frequencies.
fn collapse_ties(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mut xs: Vec<f64> = Vec::with_capacity(sorted.len());
    let mut counts: Vec<usize> = Vec::with_capacity(sorted.len());
    for v in sorted {
        match xs.last() {
            Some(&last) if last == v => *counts.last_mut().expect("paired with xs") += 1,
            _ => {
                xs.push(v);
                counts.push(1);
            }
        }
    }
    let w = counts.into_iter().map(|c| c as f64 / n).collect();
    (xs, w)
}

// ---------------------------------------------------------------------------
// Exp-linear segment integrals.

/// `G_k(d) = ∫_0^1 t^k e^{t d} dt` for k = 0, 1, 2.
fn g_funcs(d: f64) -> (f64, f64, f64) {
    if d.abs() < 0.5 {
        let mut term = 1.0; // d^l / l!
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for l in 0..25 {
            let lf = l as f64;
            s0 += term / (lf + 1.0);
            s1 += term / (lf + 2.0);
            s2 += term / (lf + 3.0);
            term *= d / (lf + 1.0);
        }
        (s0, s1, s2)
    } else {
        let ed = d.exp();
        let g0 = d.exp_m1() / d;
        let g1 = (ed - g0) / d;
        let g2 = (ed - 2.0 * g1) / d;
        (g0, g1, g2)
    }
}

fn g0(d: f64) -> f64 {
    if d.abs() < 1e-5 {
        1.0 + d * (0.5 + d / 6.0)
    } else {
        d.exp_m1() / d
    }
}

/// `J_k(r, s) = ∫_0^1 t^k exp((1 − t) r + t s) dt` for k = 0, 1, 2, evaluated
/// from the larger endpoint so the exponential never overflows needlessly.
fn exp_linear_moments(r: f64, s: f64) -> (f64, f64, f64) {
    if s <= r {
        let (g0, g1, g2) = g_funcs(s - r);
        let e = r.exp();
        (e * g0, e * g1, e * g2)
    } else {
        let (g0, g1, g2) = g_funcs(r - s);
        let e = s.exp();
        (e * g0, e * (g0 - g1), e * (g0 - 2.0 * g1 + g2))
    }
}

// ---------------------------------------------------------------------------
// Active-set optimizer on standardized, tie-free data.

/// Returns knot indices and the optimal `φ` at every data point.
fn active_set(u: &[f64], w: &[f64]) -> Result<(Vec<usize>, Vec<f64>)> {
    let m = u.len();
    let mut knots = vec![0, m - 1];
    let mut phi = vec![-(u[m - 1] - u[0]).ln(); m];
    let max_iter = 20 * m + 100;
    for _ in 0..max_iter {
        let start: Vec<f64> = knots.iter().map(|&k| phi[k]).collect();
        let beta = newton_on_knots(u, w, &knots, start)?;
        let candidate = interpolate(u, &knots, &beta);

        // Step back toward the feasible region if some knot turned convex.
        let mut step = 1.0;
        for &k in &knots[1..knots.len() - 1] {
            let kc = kink(u, &candidate, k);
            if kc < -KINK_EPS {
                let kp = kink(u, &phi, k).max(0.0);
                step = f64::min(step, kp / (kp - kc));
            }
        }
        if step < 1.0 {
            for (p, c) in phi.iter_mut().zip(&candidate) {
                *p += step * (c - *p);
            }
            let before = knots.len();
            let keep: Vec<usize> = knots
                .iter()
                .copied()
                .filter(|&k| k == 0 || k == m - 1 || kink(u, &phi, k) > KINK_EPS)
                .collect();
            knots = keep;
            if knots.len() == before {
                // The blocking knot sits at rounding level; drop the most convex one.
                let worst = knots[1..knots.len() - 1]
                    .iter()
                    .copied()
                    .min_by(|&a, &b| kink(u, &candidate, a).total_cmp(&kink(u, &candidate, b)))
                    .expect("an interior knot blocked the step");
                knots.retain(|&k| k != worst);
            }
            // Knots were removed, so re-linearize φ over the surviving knot set.
            let vals: Vec<f64> = knots.iter().map(|&k| phi[k]).collect();
            phi = interpolate(u, &knots, &vals);
            continue;
        }
        phi = candidate;

        let derivs = knot_derivatives(u, w, &phi);
        let best = (1..m - 1)
            .filter(|j| knots.binary_search(j).is_err())
            .map(|j| (j, derivs[j]))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, d)) if d > KNOT_TOL => {
                let pos = knots.binary_search(&j).unwrap_err();
                knots.insert(pos, j);
            }
            _ => return Ok((knots, phi)),
        }
    }
    Err(Error::Optimization(format!(
        "active set did not terminate within {max_iter} iterations"
    )))
}

/// Kink `slope_left − slope_right` of `phi` at interior index `j`
/// (nonnegative for concave `phi`).
fn kink(u: &[f64], phi: &[f64], j: usize) -> f64 {
    let left = (phi[j] - phi[j - 1]) / (u[j] - u[j - 1]);
    let right = (phi[j + 1] - phi[j]) / (u[j + 1] - u[j]);
    left - right
}

fn interpolate(u: &[f64], knots: &[usize], values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for a in 0..knots.len() - 1 {
        let (i0, i1) = (knots[a], knots[a + 1]);
        let span = u[i1] - u[i0];
        for i in i0..=i1 {
            let lambda = (u[i] - u[i0]) / span;
            out[i] = (1.0 - lambda) * values[a] + lambda * values[a + 1];
        }
    }
    out
}

/// Directional derivative of the objective at `phi` in the direction
/// `v_j(t) = −(t − u_j)_+`, for every index `j`.
fn knot_derivatives(u: &[f64], w: &[f64], phi: &[f64]) -> Vec<f64> {
    let m = u.len();
    let mut out = vec![0.0; m];
    let mut weight_after = 0.0; // Σ_{i>j} w_i
    let mut weighted_dist = 0.0; // Σ_{i>j} w_i (u_i − u_j)
    let mut mass_after = 0.0; // ∫_{u_{j+1}}^{u_m} e^φ
    let mut moment = 0.0; // ∫_{u_j}^{u_m} (t − u_j) e^φ
    for j in (0..m - 1).rev() {
        let width = u[j + 1] - u[j];
        weight_after += w[j + 1];
        weighted_dist += width * weight_after;
        let (j0, j1, _) = exp_linear_moments(phi[j], phi[j + 1]);
        moment += width * mass_after + width * width * j1;
        mass_after += width * j0;
        out[j] = moment - weighted_dist;
    }
    out
}

/// Objective restricted to a knot set, in terms of knot values `beta`.
struct KnotProblem {
    widths: Vec<f64>,
    weights: Vec<f64>,
}

impl KnotProblem {
    fn new(u: &[f64], w: &[f64], knots: &[usize]) -> Self {
        let k = knots.len();
        let mut weights = vec![0.0; k];
        for a in 0..k - 1 {
            let (i0, i1) = (knots[a], knots[a + 1]);
            let span = u[i1] - u[i0];
            let upper = if a + 1 == k - 1 { i1 } else { i1 - 1 };
            for i in i0..=upper {
                let lambda = (u[i] - u[i0]) / span;
                weights[a] += (1.0 - lambda) * w[i];
                weights[a + 1] += lambda * w[i];
            }
        }
        let widths = knots.windows(2).map(|p| u[p[1]] - u[p[0]]).collect();
        Self { widths, weights }
    }

    fn value(&self, beta: &[f64]) -> f64 {
        let linear: f64 = self.weights.iter().zip(beta).map(|(c, b)| c * b).sum();
        let integral: f64 = self
            .widths
            .iter()
            .enumerate()
            .map(|(a, d)| d * exp_linear_moments(beta[a], beta[a + 1]).0)
            .sum();
        linear - integral
    }

    /// Gradient and the negated (positive-definite, tridiagonal) Hessian.
    fn derivatives(&self, beta: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let k = beta.len();
        let mut grad = self.weights.clone();
        let mut diag = vec![0.0; k];
        let mut off = vec![0.0; k - 1];
        for (a, &d) in self.widths.iter().enumerate() {
            let (j0, j1, j2) = exp_linear_moments(beta[a], beta[a + 1]);
            grad[a] -= d * (j0 - j1);
            grad[a + 1] -= d * j1;
            diag[a] += d * (j0 - 2.0 * j1 + j2);
            diag[a + 1] += d * j2;
            off[a] += d * (j1 - j2);
        }
        (grad, diag, off)
    }
}

fn newton_on_knots(u: &[f64], w: &[f64], knots: &[usize], mut beta: Vec<f64>) -> Result<Vec<f64>> {
    let problem = KnotProblem::new(u, w, knots);
    let mut value = problem.value(&beta);
    let mut decrement = f64::INFINITY;
    for _ in 0..MAX_NEWTON {
        let (grad, diag, off) = problem.derivatives(&beta);
        let step = solve_tridiagonal(&diag, &off, &grad);
        decrement = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        if !(decrement > 1e-26) {
            return Ok(beta);
        }
        if decrement < 1e-8 {
            // Inside the quadratic-convergence region, where objective values
            // are too flat to drive a line search.
            beta.iter_mut().zip(&step).for_each(|(b, s)| *b += s);
            value = problem.value(&beta);
            continue;
        }
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            let trial_value = problem.value(&trial);
            if trial_value.is_finite() && trial_value >= value + 1e-4 * t * decrement {
                beta = trial;
                value = trial_value;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::Optimization(format!(
                    "line search failed (Newton decrement {decrement:e})"
                )));
            }
        }
    }
    if decrement < 1e-16 {
        return Ok(beta);
    }
    Err(Error::Optimization(format!(
        "Newton iteration on knot values stalled (decrement {decrement:e})"
    )))
}

/// Solves the symmetric tridiagonal system with diagonal `diag` and
/// off-diagonal `off`.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}
