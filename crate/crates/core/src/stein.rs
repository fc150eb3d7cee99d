//! Monte Carlo residuals of Stein-type identities, with block-jackknife
//! standard errors.

use serde::Serialize;

use crate::dist::DistSpec;
use crate::error::{Error, Result};
use crate::mc::MonteCarlo;
use crate::transforms::power_bias;

pub const JACKKNIFE_BLOCKS: usize = 20;

/// Label of the default test-function battery, recorded in reports.
pub const BATTERY_VERSION: &str = "v1";

/// An absolutely continuous test function with its derivative.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub f_prime: fn(f64) -> f64,
    /// Bound on `|f'|`; infinite when `f'` is unbounded.
    pub derivative_bound: f64,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TestFunction({})", self.name)
    }
}

fn clipped_cubic(x: f64) -> f64 {
    if x > 2.0 {
        8.0 + 12.0 * (x - 2.0)
    } else if x < -2.0 {
        -8.0 + 12.0 * (x + 2.0)
    } else {
        x * x * x
    }
}

fn clipped_cubic_prime(x: f64) -> f64 {
    if x.abs() > 2.0 {
        12.0
    } else {
        3.0 * x * x
    }
}

/// `x`, `x^2`, `sin`, `cos`, `tanh`, and `x^3` continued linearly outside
/// `[-2, 2]`.
pub fn battery() -> Vec<TestFunction> {
    vec![
        TestFunction {
            name: "x",
            f: |x| x,
            f_prime: |_| 1.0,
            derivative_bound: 1.0,
        },
        TestFunction {
            name: "x^2",
            f: |x| x * x,
            f_prime: |x| 2.0 * x,
            derivative_bound: f64::INFINITY,
        },
        TestFunction {
            name: "sin",
            f: f64::sin,
            f_prime: f64::cos,
            derivative_bound: 1.0,
        },
        TestFunction {
            name: "cos",
            f: f64::cos,
            f_prime: |x| -x.sin(),
            derivative_bound: 1.0,
        },
        TestFunction {
            name: "tanh",
            f: f64::tanh,
            f_prime: |x| 1.0 - x.tanh().powi(2),
            derivative_bound: 1.0,
        },
        TestFunction {
            name: "clipped cubic",
            f: clipped_cubic,
            f_prime: clipped_cubic_prime,
            derivative_bound: 12.0,
        },
    ]
}

pub fn test_function(name: &str) -> Option<TestFunction> {
    battery().into_iter().find(|t| t.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `g(column means)` with a delete-one-block jackknife standard error.
/// All columns must have the same length; rows are blocked jointly.
pub fn jackknife(columns: &[Vec<f64>], g: impl Fn(&[f64]) -> f64) -> Estimate {
    let n = columns[0].len();
    let full: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
    let estimate = g(&full);
    let blocks = JACKKNIFE_BLOCKS.min(n);
    if blocks < 2 {
        return Estimate {
            estimate,
            stderr: f64::NAN,
        };
    }
    let sums: Vec<f64> = columns.iter().map(|c| c.iter().sum()).collect();
    let bounds: Vec<usize> = (0..=blocks).map(|b| b * n / blocks).collect();
    let leave_out: Vec<f64> = (0..blocks)
        .map(|b| {
            let (lo, hi) = (bounds[b], bounds[b + 1]);
            let means: Vec<f64> = columns
                .iter()
                .zip(&sums)
                .map(|(c, s)| (s - c[lo..hi].iter().sum::<f64>()) / (n - (hi - lo)) as f64)
                .collect();
            g(&means)
        })
        .collect();
    let avg = mean(&leave_out);
    let k = blocks as f64;
    let var = (k - 1.0) / k * leave_out.iter().map(|t| (t - avg).powi(2)).sum::<f64>();
    Estimate {
        estimate,
        stderr: var.sqrt(),
    }
}

/// `E f'(W) - E W f(W)`, zero for the standard normal.
pub fn normal_stein_residual(d: &DistSpec, f: &TestFunction, mc: &MonteCarlo, n: usize) -> Result<Estimate> {
    if !d.moment_exists(1.0) {
        return Err(Error::InfiniteMoment {
            alpha: 1.0,
            dist: d.to_string(),
        });
    }
    let w = mc.draw(d, "w", n)?;
    let col: Vec<f64> = w.iter().map(|x| (f.f_prime)(*x) - x * (f.f)(*x)).collect();
    Ok(jackknife(&[col], |m| m[0]))
}

/// `E f'(W) - E f(W) + f(0)`, zero for the unit exponential.
pub fn exp_stein_residual(d: &DistSpec, f: &TestFunction, mc: &MonteCarlo, n: usize) -> Result<Estimate> {
    if !d.is_nonnegative() {
        return Err(Error::domain(format!(
            "exponential Stein operator needs nonnegative support; {d} takes negative values"
        )));
    }
    let f0 = (f.f)(0.0);
    let w = mc.draw(d, "w", n)?;
    let col: Vec<f64> = w.iter().map(|x| (f.f_prime)(*x) - (f.f)(*x) + f0).collect();
    Ok(jackknife(&[col], |m| m[0]))
}

/// `2 E W^2 E f'(V W^(2)) - (E W f(W) - E W f(-W))` with `V` uniform on
/// `(-1, 1)`. Zero for every law with a finite nonzero second moment.
pub fn square_bias_identity_residual(
    d: &DistSpec,
    f: &TestFunction,
    mc: &MonteCarlo,
    n: usize,
) -> Result<Estimate> {
    let biased = power_bias(d, 2.0)?;
    let w = mc.draw(d, "w", n)?;
    let w2 = mc.draw(&biased, "w-biased", n)?;
    let v = mc.draw(&DistSpec::uniform(-1.0, 1.0)?, "v", n)?;
    let sq: Vec<f64> = w.iter().map(|x| x * x).collect();
    let lhs: Vec<f64> = v.iter().zip(&w2).map(|(v, x)| (f.f_prime)(v * x)).collect();
    let rhs: Vec<f64> = w.iter().map(|x| x * ((f.f)(*x) - (f.f)(-x))).collect();
    Ok(jackknife(&[sq, lhs, rhs], |m| 2.0 * m[0] * m[1] - m[2]))
}

/// `E W E f'(U W^(1)) - (E f(W) - f(0))` with `U` uniform on `(0, 1)`.
/// Zero for every nonnegative law with a finite positive mean.
pub fn equilibrium_identity_residual(
    d: &DistSpec,
    f: &TestFunction,
    mc: &MonteCarlo,
    n: usize,
) -> Result<Estimate> {
    if !d.is_nonnegative() {
        return Err(Error::domain(format!(
            "equilibrium identity needs nonnegative support; {d} takes negative values"
        )));
    }
    let biased = power_bias(d, 1.0)?;
    let f0 = (f.f)(0.0);
    let w = mc.draw(d, "w", n)?;
    let w1 = mc.draw(&biased, "w-biased", n)?;
    let u = mc.draw(&DistSpec::uniform(0.0, 1.0)?, "u", n)?;
    let lhs: Vec<f64> = u.iter().zip(&w1).map(|(u, x)| (f.f_prime)(u * x)).collect();
    let rhs: Vec<f64> = w.iter().map(|x| (f.f)(*x) - f0).collect();
    Ok(jackknife(&[w, lhs, rhs], |m| m[0] * m[1] - m[2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_derivatives_match_finite_differences() {
        for t in battery() {
            for x in [-3.1, -1.0, -0.2, 0.0, 0.7, 1.9, 2.5] {
                let h = 1e-6;
                let fd = ((t.f)(x + h) - (t.f)(x - h)) / (2.0 * h);
                assert!((fd - (t.f_prime)(x)).abs() < 1e-5, "{} at {x}", t.name);
                assert!((t.f_prime)(x).abs() <= t.derivative_bound);
            }
        }
    }

    #[test]
    fn jackknife_of_mean_matches_classical_stderr() {
        let mut s = crate::mc::stream(11, 0);
        let x: Vec<f64> = (0..20_000).map(|_| s.uniform()).collect();
        let e = jackknife(std::slice::from_ref(&x), |m| m[0]);
        let mu = mean(&x);
        let sd = (x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt();
        let classical = sd / (x.len() as f64).sqrt();
        assert!((e.estimate - mu).abs() < 1e-15);
        // 19 degrees of freedom: relative error of the estimate is about 0.16
        assert!(
            (e.stderr / classical - 1.0).abs() < 0.6,
            "{} vs {classical}",
            e.stderr
        );
    }

    #[test]
    fn deterministic_column_has_zero_stderr() {
        let e = jackknife(&[vec![1.5; 100]], |m| m[0] - 1.5);
        assert_eq!(e.estimate, 0.0);
        assert!(e.stderr.abs() < 1e-12);
    }

    #[test]
    fn exp_residual_refuses_signed_laws() {
        let mc = MonteCarlo::new(1, 1);
        let f = test_function("x").unwrap();
        assert!(exp_stein_residual(&DistSpec::standard_normal(), &f, &mc, 10).is_err());
        assert!(equilibrium_identity_residual(&DistSpec::standard_normal(), &f, &mc, 10).is_err());
    }
}
