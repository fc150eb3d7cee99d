//! Adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Finite pieces are integrated directly. Semi-infinite pieces are mapped
//! onto `[0, 1)` with `x = a + s t / (1 - t)`. A piece can carry an
//! algebraic endpoint exponent `nu` (integrand behaving like
//! `(x - a)^(nu - 1)`), in which case `x = a + w u^(1/nu)` removes the
//! singularity before the adaptive rule sees it.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
}

/// One integration interval, possibly unbounded, with optional endpoint
/// exponents for algebraic singularities or zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub lo_exp: Option<f64>,
    pub hi_exp: Option<f64>,
    /// Length scale for the tail map on unbounded pieces.
    pub scale: f64,
}

impl Piece {
    pub fn new(lo: f64, hi: f64) -> Self {
        Piece {
            lo,
            hi,
            lo_exp: None,
            hi_exp: None,
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_lo_exp(mut self, nu: f64) -> Self {
        self.lo_exp = Some(nu);
        self
    }

    pub fn with_hi_exp(mut self, nu: f64) -> Self {
        self.hi_exp = Some(nu);
        self
    }

    /// Splits at `x` if it lies strictly inside. The left part keeps the
    /// lower exponent, the right part keeps the upper one.
    pub fn split(&self, x: f64) -> Option<(Piece, Piece)> {
        if !(x > self.lo && x < self.hi) {
            return None;
        }
        let left = Piece {
            hi: x,
            hi_exp: None,
            ..*self
        };
        let right = Piece {
            lo: x,
            lo_exp: None,
            ..*self
        };
        Some((left, right))
    }
}

/// Splits every piece at every break point that falls inside it.
pub fn refine(pieces: &[Piece], breaks: &[f64]) -> Vec<Piece> {
    let mut out: Vec<Piece> = pieces.to_vec();
    for &b in breaks.iter().filter(|b| b.is_finite()) {
        let mut next = Vec::with_capacity(out.len() + 1);
        for p in out {
            match p.split(b) {
                Some((l, r)) => {
                    next.push(l);
                    next.push(r);
                }
                None => next.push(p),
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            eps_abs: 1e-13,
            eps_rel: 1e-11,
            max_intervals: 400,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut res_g = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    (value, err)
}

impl Quadrature {
    pub fn new(eps_abs: f64, eps_rel: f64) -> Self {
        Quadrature {
            eps_abs,
            eps_rel,
            ..Default::default()
        }
    }

    /// Adaptive integration over a finite interval.
    pub fn adaptive<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> QuadResult {
        if a == b {
            return QuadResult {
                value: 0.0,
                abs_error: 0.0,
                converged: true,
            };
        }
        let (value, error) = gk21(&f, a, b);
        let mut segments = vec![Segment { a, b, value, error }];
        let mut total = value;
        let mut total_err = error;
        loop {
            if !total.is_finite() || !total_err.is_finite() {
                return QuadResult {
                    value: total,
                    abs_error: total_err,
                    converged: false,
                };
            }
            let tol = self.eps_abs.max(self.eps_rel * total.abs());
            if total_err <= tol {
                return QuadResult {
                    value: total,
                    abs_error: total_err,
                    converged: true,
                };
            }
            if segments.len() >= self.max_intervals {
                break;
            }
            let (worst, _) = segments
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, s)| {
                    if s.error > acc.1 {
                        (i, s.error)
                    } else {
                        acc
                    }
                });
            let seg = segments.swap_remove(worst);
            let mid = 0.5 * (seg.a + seg.b);
            if !(mid > seg.a && mid < seg.b) {
                // interval exhausted at machine resolution
                segments.push(seg);
                break;
            }
            let (v1, e1) = gk21(&f, seg.a, mid);
            let (v2, e2) = gk21(&f, mid, seg.b);
            total += v1 + v2 - seg.value;
            total_err += e1 + e2 - seg.error;
            segments.push(Segment {
                a: seg.a,
                b: mid,
                value: v1,
                error: e1,
            });
            segments.push(Segment {
                a: mid,
                b: seg.b,
                value: v2,
                error: e2,
            });
        }
        // recompute sums to shed accumulated cancellation
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let abs_error: f64 = segments.iter().map(|s| s.error).sum();
        QuadResult {
            value,
            abs_error,
            converged: abs_error <= self.eps_abs.max(self.eps_rel * value.abs()),
        }
    }

    /// Integrates over one piece, applying the tail map or the endpoint
    /// substitution that the piece calls for.
    pub fn piece<F: Fn(f64) -> f64>(&self, f: &F, p: &Piece) -> QuadResult {
        let (lo, hi, s) = (p.lo, p.hi, p.scale);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                let w = hi - lo;
                match (p.lo_exp, p.hi_exp) {
                    (Some(nu), _) if nu != 1.0 => self.adaptive(
                        |u: f64| {
                            let x = lo + w * u.powf(1.0 / nu);
                            guard(f(x) * w / nu * u.powf(1.0 / nu - 1.0))
                        },
                        0.0,
                        1.0,
                    ),
                    (_, Some(nu)) if nu != 1.0 => self.adaptive(
                        |u: f64| {
                            let x = hi - w * u.powf(1.0 / nu);
                            guard(f(x) * w / nu * u.powf(1.0 / nu - 1.0))
                        },
                        0.0,
                        1.0,
                    ),
                    _ => self.adaptive(f, lo, hi),
                }
            }
            (true, false) => self.adaptive(
                |t: f64| {
                    let om = 1.0 - t;
                    let x = lo + s * t / om;
                    if !x.is_finite() {
                        return 0.0;
                    }
                    guard(f(x) * s / (om * om))
                },
                0.0,
                1.0,
            ),
            (false, true) => self.adaptive(
                |t: f64| {
                    let om = 1.0 - t;
                    let x = hi - s * t / om;
                    if !x.is_finite() {
                        return 0.0;
                    }
                    guard(f(x) * s / (om * om))
                },
                0.0,
                1.0,
            ),
            (false, false) => {
                let left = self.piece(f, &Piece::new(f64::NEG_INFINITY, 0.0).with_scale(s));
                let right = self.piece(f, &Piece::new(0.0, f64::INFINITY).with_scale(s));
                QuadResult {
                    value: left.value + right.value,
                    abs_error: left.abs_error + right.abs_error,
                    converged: left.converged && right.converged,
                }
            }
        }
    }

    /// Sum over pieces; fails if any piece does not converge.
    pub fn pieces<F: Fn(f64) -> f64>(&self, f: &F, pieces: &[Piece]) -> Result<f64> {
        let mut value = 0.0;
        let mut error = 0.0;
        let mut ok = true;
        for p in pieces {
            let r = self.piece(f, p);
            value += r.value;
            error += r.abs_error;
            ok &= r.converged;
        }
        let tol = (self.eps_abs * pieces.len().max(1) as f64).max(self.eps_rel * value.abs());
        if value.is_finite() && (ok || error <= tol) {
            Ok(value)
        } else {
            Err(Error::Quadrature { value, error })
        }
    }

    /// Convenience entry point over an arbitrary, possibly unbounded, interval.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        if lo == hi {
            return Ok(0.0);
        }
        if lo > hi {
            return self.integrate(f, hi, lo).map(|v| -v);
        }
        self.pieces(&f, &[Piece::new(lo, hi)])
    }
}

#[inline]
fn guard(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = Quadrature::default();
        let v = q.integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0).unwrap();
        // antiderivative x^4/4 - x^2 + x
        let exact = (4.0 - 4.0 + 2.0) - (0.25 - 1.0 - 1.0);
        assert_relative_eq!(v, exact, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_over_real_line() {
        let q = Quadrature::default();
        let v = q
            .integrate(|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert_relative_eq!(v, (2.0 * PI).sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn exponential_tail() {
        let q = Quadrature::default();
        let v = q.integrate(|x| (-x).exp(), 0.0, f64::INFINITY).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn endpoint_exponent_removes_singularity() {
        let q = Quadrature::default();
        // integral of x^(-1/2) over (0, 1) is 2
        let p = Piece::new(0.0, 1.0).with_lo_exp(0.5);
        let v = q.pieces(&|x: f64| x.powf(-0.5), &[p]).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-13);
        let p = Piece::new(0.0, 1.0).with_hi_exp(0.5);
        let v = q.pieces(&|x: f64| (1.0 - x).powf(-0.5), &[p]).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn refine_splits_at_breaks() {
        let p = Piece::new(0.0, f64::INFINITY).with_lo_exp(0.5);
        let r = refine(&[p], &[1.0, -3.0, 2.0]);
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].hi, 1.0);
        assert_eq!(r[0].lo_exp, Some(0.5));
        assert_eq!(r[1].lo_exp, None);
        assert_eq!(r[2].lo, 2.0);
        assert!(r[2].hi.is_infinite());
    }

    #[test]
    fn divergent_integral_is_reported() {
        let q = Quadrature::default();
        assert!(q.integrate(|x| 1.0 / x, 0.0, 1.0).is_err());
    }

    #[test]
    fn step_function_with_break() {
        let q = Quadrature::default();
        let f = |x: f64| if x < 0.3 { 1.0 } else { 0.0 };
        let pieces = refine(&[Piece::new(0.0, 1.0)], &[0.3]);
        let v = q.pieces(&f, &pieces).unwrap();
        assert_relative_eq!(v, 0.3, max_relative = 1e-14);
    }
}
