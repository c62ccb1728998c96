//! Log-concave MLE by a log-barrier interior-point method on a fixed grid.
//!
//! Deliberately shares nothing with the library's active-set solver: the
//! unknowns are log-density values at every grid point, concavity is imposed
//! as one inequality per interior grid point, and each barrier subproblem is
//! solved by damped Newton with a banded (pentadiagonal) Cholesky factor.
//! Because every observation sits on the grid, the grid program and the
//! unrestricted one share their optimum.

#![allow(dead_code, clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub struct GridFit {
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
}

impl GridFit {
    /// `(1/n) Σ φ(z_i) − ∫ exp φ`, the log-likelihood of the unnormalized fit.
    pub fn objective(&self, z: &[f64]) -> f64 {
        let loglik = z.iter().map(|&v| self.phi_at(v)).sum::<f64>() / z.len() as f64;
        loglik - self.mass()
    }

    pub fn mass(&self) -> f64 {
        (0..self.grid.len() - 1)
            .map(|k| self.width(k) * seg(self.phi[k], self.phi[k + 1]).j)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        // ∫ t e^φ over a segment, with t = t_k + s·Δ.
        let mut first = 0.0;
        for k in 0..self.grid.len() - 1 {
            let d = self.width(k);
            let s = seg(self.phi[k], self.phi[k + 1]);
            first += d * (self.grid[k] * s.j + d * s.jb);
        }
        first / self.mass()
    }

    fn width(&self, k: usize) -> f64 {
        self.grid[k + 1] - self.grid[k]
    }

    fn phi_at(&self, t: f64) -> f64 {
        let k = self.grid.partition_point(|&g| g <= t).clamp(1, self.grid.len() - 1) - 1;
        let s = (t - self.grid[k]) / self.width(k);
        self.phi[k] + s * (self.phi[k + 1] - self.phi[k])
    }
}

/// `∫₀¹ e^{(1−s)a + s b} ds` and its derivatives in `a`, `b`.
struct Segment {
    j: f64,
    ja: f64,
    jb: f64,
    jaa: f64,
    jab: f64,
    jbb: f64,
}

// m_k(d) = ∫₀¹ s^k e^{d(s−1)} ds for d ≥ 0.
fn moments(d: f64) -> [f64; 3] {
    if d < 2.0 {
        let mut m = [0.0; 3];
        let mut term = 1.0;
        for j in 0..60 {
            for (k, mk) in m.iter_mut().enumerate() {
                *mk += term / (j + k + 1) as f64;
            }
            term *= d / (j + 1) as f64;
        }
        let scale = (-d).exp();
        m.map(|v| v * scale)
    } else {
        let m0 = -(-d).exp_m1() / d;
        let m1 = 1.0 / d - m0 / d;
        let m2 = 1.0 / d - 2.0 * m1 / d;
        [m0, m1, m2]
    }
}

fn seg(a: f64, b: f64) -> Segment {
    let (hi, lo, flip) = if b >= a { (b, a, false) } else { (a, b, true) };
    let [m0, m1, m2] = moments(hi - lo).map(|m| m * hi.exp());
    // Derivatives with s measured towards the larger endpoint.
    let (j_hi, j_lo) = (m1, m0 - m1);
    let (j_hihi, j_hilo, j_lolo) = (m2, m1 - m2, m0 - 2.0 * m1 + m2);
    if flip {
        Segment {
            j: m0,
            ja: j_hi,
            jb: j_lo,
            jaa: j_hihi,
            jab: j_hilo,
            jbb: j_lolo,
        }
    } else {
        Segment {
            j: m0,
            ja: j_lo,
            jb: j_hi,
            jaa: j_lolo,
            jab: j_hilo,
            jbb: j_hihi,
        }
    }
}

/// Distinct data values plus equally spaced fill points, 200 in total unless
/// fill points coincide with data.
pub fn grid_for(z: &[f64], size: usize) -> Vec<f64> {
    let mut distinct = z.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let (lo, hi) = (distinct[0], distinct[distinct.len() - 1]);
    let fill = size.saturating_sub(distinct.len()) + 2;
    let mut grid = distinct;
    grid.extend((1..fill - 1).map(|i| lo + (hi - lo) * i as f64 / (fill - 1) as f64));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

pub fn fit(z: &[f64], size: usize) -> GridFit {
    let grid = grid_for(z, size);
    let n = grid.len();
    let mut weight = vec![0.0; n];
    for &v in z {
        let k = grid.partition_point(|&g| g < v);
        weight[k] += 1.0 / z.len() as f64;
    }
    let m = z.iter().sum::<f64>() / z.len() as f64;
    let s = (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / z.len() as f64).sqrt();
    let mut phi: Vec<f64> = grid
        .iter()
        .map(|t| -0.5 * ((t - m) / s).powi(2) - (s * (2.0 * std::f64::consts::PI).sqrt()).ln())
        .collect();

    let mut mu = 1.0;
    while mu > 1e-10 {
        centering(&grid, &weight, &mut phi, mu);
        mu *= 0.05;
    }
    GridFit { grid, phi }
}

fn constraints(grid: &[f64], phi: &[f64]) -> Vec<f64> {
    (0..grid.len() - 2)
        .map(|k| {
            let s0 = (phi[k + 1] - phi[k]) / (grid[k + 1] - grid[k]);
            let s1 = (phi[k + 2] - phi[k + 1]) / (grid[k + 2] - grid[k + 1]);
            s0 - s1
        })
        .collect()
}

fn barrier_value(grid: &[f64], weight: &[f64], phi: &[f64], mu: f64) -> f64 {
    let c = constraints(grid, phi);
    if c.iter().any(|&v| !(v > 0.0)) {
        return f64::INFINITY;
    }
    let lin: f64 = weight.iter().zip(phi).map(|(w, p)| w * p).sum();
    let mass: f64 = (0..grid.len() - 1)
        .map(|k| (grid[k + 1] - grid[k]) * seg(phi[k], phi[k + 1]).j)
        .sum();
    -lin + mass - mu * c.iter().map(|v| v.ln()).sum::<f64>()
}

fn centering(grid: &[f64], weight: &[f64], phi: &mut [f64], mu: f64) {
    let n = grid.len();
    let mut value = barrier_value(grid, weight, phi, mu);
    for _ in 0..200 {
        // Symmetric band storage: band[i][d] = H[i][i + d], d = 0..=2.
        let mut band = vec![[0.0f64; 3]; n];
        let mut grad: Vec<f64> = weight.iter().map(|w| -w).collect();
        for k in 0..n - 1 {
            let d = grid[k + 1] - grid[k];
            let s = seg(phi[k], phi[k + 1]);
            grad[k] += d * s.ja;
            grad[k + 1] += d * s.jb;
            band[k][0] += d * s.jaa;
            band[k][1] += d * s.jab;
            band[k + 1][0] += d * s.jbb;
        }
        let c = constraints(grid, phi);
        for (k, &ck) in c.iter().enumerate() {
            let (d0, d1) = (grid[k + 1] - grid[k], grid[k + 2] - grid[k + 1]);
            let alpha = [-1.0 / d0, 1.0 / d0 + 1.0 / d1, -1.0 / d1];
            for i in 0..3 {
                grad[k + i] -= mu * alpha[i] / ck;
                for j in i..3 {
                    band[k + i][j - i] += mu * alpha[i] * alpha[j] / (ck * ck);
                }
            }
        }
        let step = band_solve(band, &grad);
        let decrement: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        if decrement < 1e-14 {
            return;
        }
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&step).map(|(p, s)| p - t * s).collect();
            let v = barrier_value(grid, weight, &trial, mu);
            if v <= value - 0.25 * t * decrement {
                phi.copy_from_slice(&trial);
                value = v;
                break;
            }
            t *= 0.5;
            if t < 1e-14 {
                return;
            }
        }
    }
}

// Solves H x = g for symmetric positive-definite H with two off-diagonals.
fn band_solve(mut band: Vec<[f64; 3]>, g: &[f64]) -> Vec<f64> {
    let n = band.len();
    // In-place Cholesky: band[i][d] becomes L[i + d][i].
    for i in 0..n {
        let diag = band[i][0].sqrt();
        band[i][0] = diag;
        for d in 1..3 {
            if i + d < n {
                band[i][d] /= diag;
            }
        }
        for d in 1..3 {
            if i + d >= n {
                continue;
            }
            let lid = band[i][d];
            for e in d..3 {
                if i + e < n {
                    band[i + d][e - d] -= lid * band[i][e];
                }
            }
        }
    }
    let mut y = g.to_vec();
    for i in 0..n {
        for d in 1..3 {
            if i >= d {
                y[i] -= band[i - d][d] * y[i - d];
            }
        }
        y[i] /= band[i][0];
    }
    for i in (0..n).rev() {
        for d in 1..3 {
            if i + d < n {
                y[i] -= band[i][d] * y[i + d];
            }
        }
        y[i] /= band[i][0];
    }
    y
}
