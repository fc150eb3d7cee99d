//! Beta-gamma algebra: beta moments, the gamma moment ladder and its
//! recursion, Carleman sums, the Laplace-transform ODE, the gamma
//! fixed-point check, and the sum-scaling scan for `Y = V (Y_1 + ... + Y_n)`.

use serde_json::json;
use statrs::function::gamma::ln_gamma;

use crate::dist::DistSpec;
use crate::error::{positive, Error, Result};
use crate::mc::MonteCarlo;
use crate::metrics::{ks_two_sample, CheckReport, PassRule, Subtest};
use crate::transforms::{power_bias, power_of, product};

fn ln_beta_moment(r: f64, s: f64, alpha: f64) -> f64 {
    ln_gamma(r + alpha) + ln_gamma(r + s) - ln_gamma(r + alpha + s) - ln_gamma(r)
}

/// `E B_{r,s}^alpha = Gamma(r+alpha) Gamma(r+s) / (Gamma(r+alpha+s) Gamma(r))`.
pub fn beta_moment(r: f64, s: f64, alpha: f64) -> Result<f64> {
    positive("r", r)?;
    positive("s", s)?;
    if !(alpha > -r) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "E B^alpha diverges for alpha = {alpha} <= -r = {}",
            -r
        )));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    Ok(ln_beta_moment(r, s, alpha).exp())
}

/// Terms `a_0..a_K` of `a_k = (a1 Gamma(r) / Gamma(r+s))^k Gamma(r+sk) / Gamma(r)`,
/// stored as logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeq {
    pub r: f64,
    pub s: f64,
    pub a1: f64,
    pub log_terms: Vec<f64>,
}

impl MomentSeq {
    pub fn from_terms(r: f64, s: f64, a1: f64, terms: &[f64]) -> Self {
        MomentSeq {
            r,
            s,
            a1,
            log_terms: terms.iter().map(|t| t.ln()).collect(),
        }
    }

    pub fn terms(&self) -> Vec<f64> {
        self.log_terms.iter().map(|l| l.exp()).collect()
    }

    /// Index of the last term.
    pub fn order(&self) -> usize {
        self.log_terms.len() - 1
    }
}

pub fn moment_sequence(r: f64, s: f64, a1: f64, k_max: usize) -> Result<MomentSeq> {
    positive("r", r)?;
    positive("s", s)?;
    positive("a1", a1)?;
    if k_max < 1 {
        return Err(Error::domain("moment sequence needs K >= 1"));
    }
    let log_c = a1.ln() + ln_gamma(r) - ln_gamma(r + s);
    let mut log_terms = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let kf = k as f64;
        let l = if k == 0 {
            0.0
        } else {
            kf * log_c + ln_gamma(r + s * kf) - ln_gamma(r)
        };
        if !l.is_finite() {
            return Err(Error::Overflow(format!(
                "log a_{k} is not representable for r={r}, s={s}, a1={a1}"
            )));
        }
        log_terms.push(l);
    }
    Ok(MomentSeq { r, s, a1, log_terms })
}

/// Largest relative error of `a_k = E B_{r,s}^{ks} a_{k+1} / a_1` over
/// `k < K`, evaluated in log space.
pub fn recursion_residual(ms: &MomentSeq) -> Result<f64> {
    if ms.log_terms.len() < 3 {
        return Err(Error::domain("recursion check needs K >= 2"));
    }
    let log_a1 = ms.log_terms[1];
    let mut worst = 0.0f64;
    for k in 0..ms.order() {
        let predicted = ln_beta_moment(ms.r, ms.s, ms.s * k as f64) + ms.log_terms[k + 1] - log_a1;
        worst = worst.max((predicted - ms.log_terms[k]).exp_m1().abs());
    }
    Ok(worst)
}

/// Partial sums `S_j = sum_{k <= j} a_{2k}^{-1/(2k)}` for `j = 1..=K`.
pub fn carleman_partial_sums(ms: &MomentSeq, k_max: usize) -> Result<Vec<f64>> {
    if ms.order() < 2 * k_max {
        return Err(Error::domain(format!(
            "need terms up to a_{} for {k_max} Carleman partial sums, have a_{}",
            2 * k_max,
            ms.order()
        )));
    }
    let mut acc = 0.0;
    Ok((1..=k_max)
        .map(|k| {
            acc += (-ms.log_terms[2 * k] / (2 * k) as f64).exp();
            acc
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeResidual {
    pub max_residual: f64,
    pub worst_lambda: f64,
    /// Set when the grid contained `lambda = 0`, which was skipped.
    pub excluded_zero: bool,
}

/// Relative step of the central differences.
pub const ODE_STEP: f64 = 1e-5;

/// Max over the grid of `|phi'(l) - (-phi(l) + phi(l)^n) / ((n-1) l)|`,
/// with `phi'` by central differences of relative step [`ODE_STEP`].
pub fn laplace_ode_residual(phi: impl Fn(f64) -> f64, n: u32, grid: &[f64]) -> Result<OdeResidual> {
    if n < 2 {
        return Err(Error::domain("ODE needs n >= 2"));
    }
    let nf = n as f64;
    let mut out = OdeResidual {
        max_residual: 0.0,
        worst_lambda: f64::NAN,
        excluded_zero: false,
    };
    for &l in grid {
        if l == 0.0 {
            out.excluded_zero = true;
            continue;
        }
        if !(l > 0.0) {
            return Err(Error::domain(format!("Laplace argument {l} must be positive")));
        }
        let h = ODE_STEP * l;
        let d = (phi(l + h) - phi(l - h)) / (2.0 * h);
        let p = phi(l);
        let res = (d - (-p + p.powi(n as i32)) / ((nf - 1.0) * l)).abs();
        if !(res <= out.max_residual) {
            out.max_residual = res;
            out.worst_lambda = l;
        }
    }
    Ok(out)
}

/// `points` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points.max(2) - 1) as f64).exp())
        .collect()
}

/// KS between `candidate` and `B_{r,s}^p W^(s/p)` draws; passes for laws
/// `c G_r^p`. Records the scale estimate `c = mean * Gamma(r) / Gamma(r+p)`.
#[allow(clippy::too_many_arguments)]
pub fn gamma_fixed_point_check(
    r: f64,
    s: f64,
    p: f64,
    candidate: &DistSpec,
    mc: &MonteCarlo,
    n: usize,
    alpha: f64,
) -> Result<CheckReport> {
    positive("p", p)?;
    let rhs = product(
        &power_of(&DistSpec::beta(r, s)?, p)?,
        &power_bias(candidate, s / p)?,
    )?;
    let w = mc.draw(candidate, "candidate", n)?;
    let z = mc.draw(&rhs, "representation", n)?;
    let ks = ks_two_sample(&w, &z, alpha)?;
    let mean = w.iter().sum::<f64>() / n as f64;
    let c = mean * (ln_gamma(r) - ln_gamma(r + p)).exp();
    let mut report = CheckReport::new("gamma-fixed-point", mc.seed, n, mc.chunks, alpha)
        .param("r", r)
        .param("s", s)
        .param("p", p)
        .param("candidate", candidate);
    report.push(Subtest::ks_two("W vs B^p W^(s/p)", ks, n, n).with("c_estimate", c));
    Ok(report.finish(PassRule::All))
}

/// Evidence for `Y = V (Y_1 + ... + Y_n)` with `V ~ Beta(a, (n-1) a)`: a
/// KS decision plus informational moment ratios
/// `E Y^k / (E V^k E S^k)` for `k = 1..=6`.
pub fn conjecture_scan(
    a: f64,
    n: u32,
    candidate: &DistSpec,
    mc: &MonteCarlo,
    samples: usize,
    alpha: f64,
) -> Result<CheckReport> {
    positive("a", a)?;
    if n < 2 {
        return Err(Error::domain("scan needs n >= 2"));
    }
    if !candidate.is_nonnegative() {
        return Err(Error::domain(format!(
            "candidate {candidate} must be nonnegative"
        )));
    }
    if !candidate.moment_exists(1.0) {
        return Err(Error::InfiniteMoment {
            alpha: 1.0,
            dist: candidate.to_string(),
        });
    }
    let b = a * (n - 1) as f64;
    let y = mc.draw(candidate, "y", samples)?;
    let mut sum = vec![0.0; samples];
    for i in 0..n {
        for (acc, v) in sum
            .iter_mut()
            .zip(mc.draw(candidate, &format!("summand-{i}"), samples)?)
        {
            *acc += v;
        }
    }
    let v = mc.draw(&DistSpec::beta(a, b)?, "v", samples)?;
    let z: Vec<f64> = v.iter().zip(&sum).map(|(v, s)| v * s).collect();
    let ks = ks_two_sample(&y, &z, alpha)?;

    let ratios: Vec<f64> = (1..=6)
        .map(|k| {
            let my = y.iter().map(|t| t.powi(k)).sum::<f64>() / samples as f64;
            let ms = sum.iter().map(|t| t.powi(k)).sum::<f64>() / samples as f64;
            Ok(my / (beta_moment(a, b, k as f64)? * ms))
        })
        .collect::<Result<_>>()?;

    let mut report = CheckReport::new("conjecture", mc.seed, samples, mc.chunks, alpha)
        .param("a", a)
        .param("n", n)
        .param("candidate", candidate);
    report.push(Subtest::ks_two(
        "Y vs V * (Y_1 + ... + Y_n)",
        ks,
        samples,
        samples,
    ));
    report.evidence = Some(json!({
        "moment_ratios": ratios,
        "note": "E Y^k / (E V^k E S^k); informational, not part of the decision",
    }));
    Ok(report.finish(PassRule::All))
}

/// `B_{r,s} G_{r+s} = G_r` and `G_a + G_b = G_{a+b}` in law, by KS.
pub fn beta_gamma_identities_check(mc: &MonteCarlo, n: usize, alpha: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("beta-gamma", mc.seed, n, mc.chunks, alpha);
    for (r, s) in [(1.0, 1.0), (0.5, 1.0), (2.0, 3.0)] {
        let lhs = DistSpec::product(DistSpec::beta(r, s)?, DistSpec::gamma(r + s, 1.0)?);
        let x = mc.draw(&lhs, &format!("product-{r}-{s}"), n)?;
        let y = mc.draw(&DistSpec::gamma(r, 1.0)?, &format!("gamma-{r}-{s}"), n)?;
        let ks = ks_two_sample(&x, &y, alpha)?;
        report.push(Subtest::ks_two(
            format!("B({r}, {s}) G({}) vs G({r})", r + s),
            ks,
            n,
            n,
        ));
    }
    for (a, b) in [(1.0, 1.0), (0.5, 0.5)] {
        let ga = mc.draw(&DistSpec::gamma(a, 1.0)?, &format!("sum-left-{a}-{b}"), n)?;
        let gb = mc.draw(&DistSpec::gamma(b, 1.0)?, &format!("sum-right-{a}-{b}"), n)?;
        let x: Vec<f64> = ga.iter().zip(&gb).map(|(u, v)| u + v).collect();
        let y = mc.draw(&DistSpec::gamma(a + b, 1.0)?, &format!("sum-target-{a}-{b}"), n)?;
        let ks = ks_two_sample(&x, &y, alpha)?;
        report.push(Subtest::ks_two(
            format!("G({a}) + G({b}) vs G({})", a + b),
            ks,
            n,
            n,
        ));
    }
    Ok(report.finish(PassRule::All))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_moment_examples() {
        assert!((beta_moment(1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(beta_moment(2.5, 0.3, 0.0).unwrap(), 1.0);
        assert!((beta_moment(0.5, 1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!(beta_moment(0.5, 1.0, -0.5).is_err());
        assert!(beta_moment(0.5, 1.0, -0.4).unwrap() > 0.0);
    }

    #[test]
    fn factorial_ladder() {
        let ms = moment_sequence(1.0, 1.0, 1.0, 6).unwrap();
        let expect = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];
        for (a, b) in ms.terms().iter().zip(expect) {
            assert!((a / b - 1.0).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn recursion_holds_and_detects_perturbation() {
        for (r, s) in [(1.0, 1.0), (0.5, 1.0), (2.0, 3.0)] {
            let ms = moment_sequence(r, s, 1.0, 6).unwrap();
            assert!(recursion_residual(&ms).unwrap() <= 1e-9);
        }
        let mut t = moment_sequence(1.0, 1.0, 1.0, 6).unwrap().terms();
        t[3] *= 1.01;
        let bad = MomentSeq::from_terms(1.0, 1.0, 1.0, &t);
        assert!(recursion_residual(&bad).unwrap() >= 1e-3);
    }

    #[test]
    fn large_orders_stay_finite_in_log_space() {
        let ms = moment_sequence(1.0, 1.0, 1.0, 400).unwrap();
        assert!(ms.log_terms[400].is_finite());
        assert!(ms.terms()[400].is_infinite());
        assert!(recursion_residual(&ms).unwrap() < 1e-9);
    }

    #[test]
    fn carleman_sums_grow() {
        let ms = moment_sequence(1.0, 1.0, 1.0, 200).unwrap();
        let s = carleman_partial_sums(&ms, 100).unwrap();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(s[99] > 2.0 * s[9]);
        assert!(carleman_partial_sums(&ms, 101).is_err());
        // a1 -> 2 a1 multiplies a_{2k} by 2^{2k}
        let ms2 = moment_sequence(1.0, 1.0, 2.0, 20).unwrap();
        let s2 = carleman_partial_sums(&ms2, 10).unwrap();
        let s1 = carleman_partial_sums(&ms, 10).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert!((b / a - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ode_solution_and_non_solution() {
        let grid = log_grid(0.01, 10.0, 200);
        for (n, c) in [(2u32, 1.0), (3, 1.0), (3, 2.0)] {
            let e = 1.0 / (n as f64 - 1.0);
            let res = laplace_ode_residual(|l| (1.0 + c * l).powf(-e), n, &grid).unwrap();
            assert!(res.max_residual <= 1e-8, "n={n} c={c}: {res:?}");
        }
        let res = laplace_ode_residual(|l| (-l).exp(), 3, &grid).unwrap();
        assert!(res.max_residual > 0.01);
        let res = laplace_ode_residual(|l| (1.0 + l).powf(-0.5), 3, &[0.0, 1.0]).unwrap();
        assert!(res.excluded_zero);
    }
}
