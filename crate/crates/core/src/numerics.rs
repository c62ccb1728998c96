//! Scalar numerical primitives: the standard normal distribution, adaptive
//! Gauss–Kronrod quadrature and reproducible random-number streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sample::Seed;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
///
/// Rational starting point (Acklam) refined by two Halley steps against the
/// erfc-based distribution function.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile needs p in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower tail and reflect, so p and 1 − p give exact negatives.
    let (q, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    let mut x = acklam_lower(q);
    for _ in 0..2 {
        let e = normal_cdf(x) - q;
        let u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(sign * -x)
}

// Initial approximation, relative error about 1e-9, for q <= 0.5.
fn acklam_lower(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if q < 0.024_25 {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    } else {
        let u = q - 0.5;
        let r = u * u;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * u
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Accuracy and effort limits for [`adaptive_quad`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || max_subdivisions == 0 {
            return Err(Error::Domain(
                "quadrature needs abs_tol > 0 and at least one subdivision".into(),
            ));
        }
        Ok(Self {
            abs_tol,
            max_subdivisions,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

// 15-point Kronrod nodes (nonnegative half) and weights, with the embedded
// 7-point Gauss weights on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Globally adaptive 15-point Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// Infinite limits are mapped to a finite range with `x = t / (1 − |t|)`, so
/// `f` must decay fast enough for the transformed integrand to be bounded.
/// The interval with the largest error estimate is bisected until the summed
/// estimate falls below `spec.abs_tol`.
pub fn adaptive_quad<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, spec: QuadratureSpec) -> Result<f64> {
    if a.is_nan() || b.is_nan() || !(a < b) {
        return Err(Error::Domain(format!("quadrature needs a < b, got [{a}, {b}]")));
    }
    if a.is_finite() && b.is_finite() {
        return integrate_finite(&mut f, a, b, spec);
    }
    let to_t = |x: f64| {
        if x.is_infinite() {
            x.signum()
        } else {
            x / (1.0 + x.abs())
        }
    };
    let mut g = |t: f64| {
        let s = 1.0 - t.abs();
        let x = t / s;
        let v = f(x) / (s * s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_finite(&mut g, to_t(a), to_t(b), spec)
}

fn integrate_finite<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, spec: QuadratureSpec) -> Result<f64> {
    let (value, error) = gauss_kronrod(f, a, b);
    let mut pieces = vec![Piece { a, b, value, error }];
    let mut total_err = error;
    let mut subdivisions = 0;
    loop {
        let total: f64 = pieces.iter().map(|p| p.value).sum();
        if !total.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        if total_err <= spec.abs_tol {
            return Ok(total);
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                estimate: total,
                error_estimate: total_err,
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one piece");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval cannot be split further in floating point.
            return Err(Error::NonConvergence {
                estimate: total,
                error_estimate: total_err,
            });
        }
        let (lv, le) = gauss_kronrod(f, p.a, mid);
        let (rv, re) = gauss_kronrod(f, mid, p.b);
        pieces.push(Piece {
            a: p.a,
            b: mid,
            value: lv,
            error: le,
        });
        pieces.push(Piece {
            a: mid,
            b: p.b,
            value: rv,
            error: re,
        });
        total_err = pieces.iter().map(|p| p.error).sum();
        subdivisions += 1;
    }
}

/// A reproducible random-number stream identified by `(seed, stream_index)`.
///
/// Backed by ChaCha8 with the stream index mapped onto ChaCha's 64-bit stream
/// counter, so distinct indices never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: Seed,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: Seed, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.0);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Streams `0..k` for `seed`.
pub fn split_streams(seed: Seed, k: usize) -> Vec<RngStream> {
    (0..k as u64).map(|i| RngStream::new(seed, i)).collect()
}
