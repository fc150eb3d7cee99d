//! Named verification suites.

use distfix::beta_gamma::{
    beta_gamma_identities_check, carleman_partial_sums, conjecture_scan, gamma_fixed_point_check,
    laplace_ode_residual, log_grid, moment_sequence, recursion_residual,
};
use distfix::geometry::{archimedes_check, maxwell_projection_check, rotation_invariance_check};
use distfix::metrics::{ks_two_sample, CheckReport, Decision, PassRule, Subtest};
use distfix::stein::{
    battery, equilibrium_identity_residual, exp_stein_residual, normal_stein_residual,
    square_bias_identity_residual, Estimate, TestFunction, BATTERY_VERSION,
};
use distfix::transforms::{equilibrium_rep, power_of, scale, zero_bias_rep};
use distfix::{derive_seed, DistSpec, MonteCarlo};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::params::Params;

/// Suite names with one-line descriptions, in the order `all` runs them.
pub const SUITES: &[(&str, &str)] = &[
    (
        "archimedes",
        "uniform points on the sphere: uniform coordinates, uniform angle within slabs",
    ),
    (
        "herschel-maxwell",
        "i.i.d. triples keep their marginals under random rotations",
    ),
    (
        "maxwell-projection",
        "X1 has the law of V |X| for Gaussian triples",
    ),
    (
        "stein-normal",
        "E f'(W) = E W f(W) across the battery, and power against a centered exponential",
    ),
    (
        "stein-exp",
        "E f'(W) = E f(W) - f(0) across the battery, and power against Uniform(0, 1)",
    ),
    (
        "lemma-s1",
        "2 E W^2 E f'(V W^(2)) = E W f(W) - E W f(-W) for five laws",
    ),
    (
        "lemma-equilibrium",
        "E W E f'(U W^(1)) = E f(W) - f(0) for three laws",
    ),
    ("gaussian-fixed-point", "W = V W^(2) in law, over five sub-seeds"),
    (
        "exponential-fixed-point",
        "W = U W^(1) in law, plus the equilibrium identity",
    ),
    (
        "gamma-fixed-point",
        "W = B^p W^(s/p) in law for scaled gamma powers",
    ),
    (
        "beta-gamma",
        "B_{r,s} G_{r+s} = G_r and G_a + G_b = G_{a+b} in law",
    ),
    (
        "moment-ladder",
        "closed-form moment sequence and its beta recursion",
    ),
    ("carleman", "partial sums of a_{2k}^(-1/2k) grow without bound"),
    (
        "laplace-ode",
        "Laplace transforms of gamma laws solve the sum-scaling ODE",
    ),
    ("conjecture", "evidence for Y = V (Y_1 + ... + Y_n) with beta V"),
    ("all", "every suite above, each with a seed derived from --seed"),
];

/// Multiple of the standard error under which a residual counts as zero.
pub const RESIDUAL_Z: f64 = 4.0;
/// Multiple of the standard error a residual must exceed to count as a
/// detected departure.
pub const POWER_Z: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub chunks: usize,
    pub alpha: f64,
}

impl RunConfig {
    fn mc(&self) -> MonteCarlo {
        MonteCarlo::new(self.seed, self.chunks)
    }

    fn report(&self, suite: &str) -> CheckReport {
        CheckReport::new(suite, self.seed, self.samples, self.chunks, self.alpha)
    }
}

/// Run the suite called `name`. Reports are a pure function of the name,
/// the parameters and `cfg`.
pub fn run_suite(name: &str, params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    if cfg.samples == 0 {
        return Err(CliError::bad("samples", "must be at least 1"));
    }
    if cfg.chunks == 0 {
        return Err(CliError::bad("chunks", "must be at least 1"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(CliError::bad("alpha", format!("{} is not in (0, 1)", cfg.alpha)));
    }
    let mut report = match name {
        "archimedes" => {
            params.allow(name, &[])?;
            archimedes_check(&cfg.mc(), cfg.samples, cfg.alpha)?
        }
        "herschel-maxwell" => {
            params.allow(name, &["dist", "rotations"])?;
            let d = params.dist("dist", "normal", cfg.seed)?;
            let k = params.value("rotations", 5usize)?;
            if k == 0 {
                return Err(CliError::bad("rotations", "must be at least 1"));
            }
            rotation_invariance_check(&d, &cfg.mc(), cfg.samples, k, cfg.alpha)?
        }
        "maxwell-projection" => {
            params.allow(name, &["dist"])?;
            let d = params.dist("dist", "normal", cfg.seed)?;
            maxwell_projection_check(&d, &cfg.mc(), cfg.samples, cfg.alpha)?
        }
        "stein-normal" => stein_normal(params, cfg)?,
        "stein-exp" => stein_exp(params, cfg)?,
        "lemma-s1" => lemma_s1(params, cfg)?,
        "lemma-equilibrium" => lemma_equilibrium(params, cfg)?,
        "gaussian-fixed-point" => gaussian_fixed_point(params, cfg)?,
        "exponential-fixed-point" => exponential_fixed_point(params, cfg)?,
        "gamma-fixed-point" => gamma_fixed_point(params, cfg)?,
        "beta-gamma" => {
            params.allow(name, &[])?;
            beta_gamma_identities_check(&cfg.mc(), cfg.samples, cfg.alpha)?
        }
        "moment-ladder" => moment_ladder(params, cfg)?,
        "carleman" => carleman(params, cfg)?,
        "laplace-ode" => laplace_ode(params, cfg)?,
        "conjecture" => conjecture(params, cfg)?,
        "all" => all(params, cfg)?,
        other => return Err(CliError::UnknownSuite(other.to_string())),
    };
    for (k, v) in params.iter() {
        report.params.entry(k.to_string()).or_insert_with(|| json!(v));
    }
    Ok(report)
}

fn residual_subtest(name: String, e: Estimate) -> Subtest {
    Subtest::z(name, e.estimate, e.stderr, RESIDUAL_Z)
}

/// Passes when `|estimate| / stderr` reaches [`POWER_Z`].
fn power_subtest(name: String, e: Estimate) -> Subtest {
    let z = distfix::metrics::z_score(e.estimate, e.stderr);
    Subtest::new(name, z, POWER_Z, Decision::AtLeast)
        .with("estimate", e.estimate)
        .with("stderr", e.stderr)
}

type Residual = fn(&DistSpec, &TestFunction, &MonteCarlo, usize) -> distfix::Result<Estimate>;

fn battery_rows(
    report: &mut CheckReport,
    d: &DistSpec,
    residual: Residual,
    cfg: &RunConfig,
    power: bool,
) -> Result<()> {
    for f in battery() {
        let mc = cfg.mc().child(&format!("{d}/{}", f.name));
        let e = residual(d, &f, &mc, cfg.samples)?;
        let name = format!("{d}, f = {}", f.name);
        report.push(if power {
            power_subtest(name, e)
        } else {
            residual_subtest(name, e)
        });
    }
    Ok(())
}

/// A nested report in which at least one battery function must show a
/// departure of [`POWER_Z`] standard errors.
fn power_report(suite: &str, d: &DistSpec, residual: Residual, cfg: &RunConfig) -> Result<CheckReport> {
    let mut r = cfg.report(suite).param("dist", d).param("z", POWER_Z);
    battery_rows(&mut r, d, residual, cfg, true)?;
    Ok(r.finish(PassRule::AtLeast(1)))
}

fn stein_normal(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("stein-normal", &["dist"])?;
    let d = params.dist("dist", "normal", cfg.seed)?;
    let mut r = cfg
        .report("stein-normal")
        .param("dist", &d)
        .param("battery", BATTERY_VERSION)
        .param("z", RESIDUAL_Z);
    battery_rows(&mut r, &d, normal_stein_residual, cfg, false)?;
    let centered = DistSpec::shifted(DistSpec::exponential(1.0)?, -1.0)?;
    r.suites.push(power_report(
        "stein-normal-power",
        &centered,
        normal_stein_residual,
        cfg,
    )?);
    Ok(r.finish(PassRule::All))
}

fn stein_exp(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("stein-exp", &["dist"])?;
    let d = params.dist("dist", "exponential", cfg.seed)?;
    let mut r = cfg
        .report("stein-exp")
        .param("dist", &d)
        .param("battery", BATTERY_VERSION)
        .param("z", RESIDUAL_Z);
    battery_rows(&mut r, &d, exp_stein_residual, cfg, false)?;
    let u = DistSpec::uniform(0.0, 1.0)?;
    r.suites
        .push(power_report("stein-exp-power", &u, exp_stein_residual, cfg)?);
    Ok(r.finish(PassRule::All))
}

fn identity_suite(
    suite: &str,
    params: &Params,
    cfg: &RunConfig,
    defaults: Vec<DistSpec>,
    residual: Residual,
) -> Result<CheckReport> {
    params.allow(suite, &["dist"])?;
    let laws = if params.contains("dist") {
        vec![params.dist("dist", "", cfg.seed)?]
    } else {
        defaults
    };
    let mut r = cfg
        .report(suite)
        .param("dists", laws.iter().map(|d| d.to_string()).collect::<Vec<_>>())
        .param("battery", BATTERY_VERSION)
        .param("z", RESIDUAL_Z);
    for d in &laws {
        battery_rows(&mut r, d, residual, cfg, false)?;
    }
    Ok(r.finish(PassRule::All))
}

fn lemma_s1(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    let laws = vec![
        DistSpec::exponential(1.0)?,
        DistSpec::gamma(2.0, 1.0)?,
        DistSpec::uniform(0.0, 1.0)?,
        DistSpec::standard_normal(),
        DistSpec::rademacher(),
    ];
    identity_suite("lemma-s1", params, cfg, laws, square_bias_identity_residual)
}

fn lemma_equilibrium(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    let laws = vec![
        DistSpec::exponential(1.0)?,
        DistSpec::gamma(2.0, 1.0)?,
        DistSpec::uniform(0.0, 1.0)?,
    ];
    identity_suite(
        "lemma-equilibrium",
        params,
        cfg,
        laws,
        equilibrium_identity_residual,
    )
}

fn gaussian_fixed_point(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("gaussian-fixed-point", &["candidate", "sub_seeds", "required"])?;
    let d = params.dist("candidate", "normal", cfg.seed)?;
    let runs = params.value("sub_seeds", 5usize)?;
    let required = params.value("required", 4usize)?;
    if runs == 0 || required > runs {
        return Err(CliError::bad(
            "required",
            format!("need 1 <= required <= sub_seeds = {runs}"),
        ));
    }
    let rep = zero_bias_rep(&d)?;
    let mut r = cfg
        .report("gaussian-fixed-point")
        .param("candidate", &d)
        .param("representation", &rep)
        .param("sub_seeds", runs)
        .param("required", required);
    for j in 0..runs {
        let mc = cfg.mc().child(&format!("sub-seed-{j}"));
        let w = mc.draw(&d, "candidate", cfg.samples)?;
        let z = mc.draw(&rep, "representation", cfg.samples)?;
        let ks = ks_two_sample(&w, &z, cfg.alpha)?;
        r.push(Subtest::ks_two(
            format!("sub-seed {j}: W vs V W^(2)"),
            ks,
            cfg.samples,
            cfg.samples,
        ));
    }
    Ok(r.finish(PassRule::AtLeast(required)))
}

fn exponential_fixed_point(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("exponential-fixed-point", &["candidate"])?;
    let d = params.dist("candidate", "exponential", cfg.seed)?;
    let rep = equilibrium_rep(&d)?;
    let mc = cfg.mc();
    let w = mc.draw(&d, "candidate", cfg.samples)?;
    let z = mc.draw(&rep, "representation", cfg.samples)?;
    let ks = ks_two_sample(&w, &z, cfg.alpha)?;
    let mut r = cfg
        .report("exponential-fixed-point")
        .param("candidate", &d)
        .param("representation", &rep)
        .param("battery", BATTERY_VERSION)
        .param("z", RESIDUAL_Z);
    r.push(Subtest::ks_two("W vs U W^(1)", ks, cfg.samples, cfg.samples));
    battery_rows(&mut r, &d, equilibrium_identity_residual, cfg, false)?;
    Ok(r.finish(PassRule::All))
}

/// `c G_r^p`, the family fixed by the gamma check with parameters `(r, s, p)`.
fn scaled_gamma_power(r: f64, p: f64, c: f64) -> Result<DistSpec> {
    Ok(scale(&power_of(&DistSpec::gamma(r, 1.0)?, p)?, c)?)
}

fn gamma_fixed_point(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("gamma-fixed-point", &["r", "s", "p", "c", "candidate"])?;
    let mc = cfg.mc();
    if !params.is_empty() {
        let r = params.value("r", 1.0)?;
        let s = params.value("s", 1.0)?;
        let p = params.value("p", 1.0)?;
        let c = params.value("c", 1.0)?;
        let cand = match params.get("candidate") {
            Some(_) => params.dist("candidate", "", cfg.seed)?,
            None => scaled_gamma_power(r, p, c)?,
        };
        return Ok(gamma_fixed_point_check(
            r,
            s,
            p,
            &cand,
            &mc,
            cfg.samples,
            cfg.alpha,
        )?);
    }
    let mut out = cfg.report("gamma-fixed-point");
    for (r, s, p) in [(0.5, 1.0, 0.5), (1.0, 1.0, 1.0), (2.0, 3.0, 1.0)] {
        for c in [1.0, 2.0] {
            let cand = scaled_gamma_power(r, p, c)?;
            let child = mc.child(&format!("r={r},s={s},p={p},c={c}"));
            let rep = gamma_fixed_point_check(r, s, p, &cand, &child, cfg.samples, cfg.alpha)?.param("c", c);
            out.suites.push(rep);
        }
    }
    Ok(out.finish(PassRule::All))
}

fn moment_ladder(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("moment-ladder", &["r", "s", "a1", "k"])?;
    let k = params.value("k", 6usize)?;
    if k < 2 {
        return Err(CliError::bad("k", "recursion needs k >= 2"));
    }
    let mut out = cfg.report("moment-ladder").param("k", k);
    let grid = if params.contains("r") || params.contains("s") || params.contains("a1") {
        vec![(
            params.value("r", 1.0)?,
            params.value("s", 1.0)?,
            params.value("a1", 1.0)?,
        )]
    } else {
        let ms = moment_sequence(1.0, 1.0, 1.0, k)?;
        let mut factorial = 1.0f64;
        let mut worst = 0.0f64;
        for (i, a) in ms.terms().iter().enumerate() {
            if i > 0 {
                factorial *= i as f64;
            }
            worst = worst.max((a / factorial - 1.0).abs());
        }
        out.push(Subtest::new(
            "a_k = k! for r = s = a1 = 1",
            worst,
            1e-9,
            Decision::Tolerance,
        ));
        out.evidence = Some(json!({ "factorial_ladder": ms.terms() }));
        vec![(1.0, 1.0, 1.0), (0.5, 1.0, 1.0), (2.0, 3.0, 1.0)]
    };
    for (r, s, a1) in grid {
        let ms = moment_sequence(r, s, a1, k)?;
        let res = recursion_residual(&ms)?;
        out.push(Subtest::new(
            format!("recursion for r = {r}, s = {s}, a1 = {a1}"),
            res,
            1e-9,
            Decision::Tolerance,
        ));
    }
    Ok(out.finish(PassRule::All))
}

fn carleman(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("carleman", &["r", "s", "a1", "k"])?;
    let r = params.value("r", 1.0)?;
    let s = params.value("s", 1.0)?;
    let a1 = params.value("a1", 1.0)?;
    let k = params.value("k", 100usize)?;
    if k < 10 {
        return Err(CliError::bad("k", "need k >= 10 to compare S_k with S_{k/10}"));
    }
    let ms = moment_sequence(r, s, a1, 2 * k)?;
    let sums = carleman_partial_sums(&ms, k)?;
    let drops = sums.windows(2).filter(|w| w[1] <= w[0]).count();
    let tenth = sums[k / 10 - 1];
    let last = sums[k - 1];
    let mut out = cfg
        .report("carleman")
        .param("r", r)
        .param("s", s)
        .param("a1", a1)
        .param("k", k);
    out.push(Subtest::new(
        "partial sums strictly increase",
        drops as f64,
        0.0,
        Decision::Tolerance,
    ));
    out.push(
        Subtest::new(
            format!("S_{k} / S_{}", k / 10),
            last / tenth,
            2.0,
            Decision::AtLeast,
        )
        .with("S_k", last)
        .with("S_k_over_10", tenth),
    );
    Ok(out.finish(PassRule::All))
}

fn laplace_ode(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("laplace-ode", &["n", "c", "lo", "hi", "points"])?;
    let lo = params.value("lo", 0.01)?;
    let hi = params.value("hi", 10.0)?;
    let points = params.value("points", 200usize)?;
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(CliError::bad("lo", "need 0 < lo < hi and points >= 2"));
    }
    let grid = log_grid(lo, hi, points);
    let pairs = if params.contains("n") || params.contains("c") {
        vec![(params.value("n", 3u32)?, params.value("c", 1.0)?)]
    } else {
        vec![(2, 1.0), (3, 1.0), (3, 2.0)]
    };
    let mut out = cfg
        .report("laplace-ode")
        .param("lo", lo)
        .param("hi", hi)
        .param("points", points);
    for &(n, c) in &pairs {
        if n < 2 || !(c > 0.0) {
            return Err(CliError::bad("n", "need n >= 2 and c > 0"));
        }
        let e = -1.0 / (n as f64 - 1.0);
        let res = laplace_ode_residual(|l| (1.0 + c * l).powf(e), n, &grid)?;
        out.push(
            Subtest::new(
                format!("(1 + {c} l)^(-1/{}) with n = {n}", n - 1),
                res.max_residual,
                1e-8,
                Decision::Tolerance,
            )
            .with("worst_lambda", res.worst_lambda),
        );
        let g = DistSpec::gamma(1.0 / (n as f64 - 1.0), c)?;
        // a quadrature failure turns into NaN, which fails the tolerance
        let res = laplace_ode_residual(|l| g.laplace(l).unwrap_or(f64::NAN), n, &grid)?;
        out.push(
            Subtest::new(
                format!("quadrature Laplace transform of {g} with n = {n}"),
                res.max_residual,
                1e-6,
                Decision::Tolerance,
            )
            .with("worst_lambda", res.worst_lambda),
        );
    }
    let n = pairs[0].0;
    let res = laplace_ode_residual(|l| (-l).exp(), n, &grid)?;
    out.push(
        Subtest::new(
            format!("exp(-l) is not a solution for n = {n}"),
            res.max_residual,
            0.01,
            Decision::AtLeast,
        )
        .with("worst_lambda", res.worst_lambda),
    );
    Ok(out.finish(PassRule::All))
}

fn conjecture(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("conjecture", &["a", "n", "candidate"])?;
    let mc = cfg.mc();
    if !params.is_empty() {
        let a = params.value("a", 1.0)?;
        let n = params.value("n", 2u32)?;
        let cand = match params.get("candidate") {
            Some(_) => params.dist("candidate", "", cfg.seed)?,
            None => DistSpec::gamma(a, 1.0)?,
        };
        return Ok(conjecture_scan(a, n, &cand, &mc, cfg.samples, cfg.alpha)?);
    }
    let mut out = cfg.report("conjecture");
    for (a, n, cand) in [
        (0.5, 3u32, DistSpec::gamma(0.5, 2.0)?),
        (2.0, 2, DistSpec::gamma(2.0, 1.0)?),
        (1.0, 4, DistSpec::gamma(1.0, 1.0)?),
    ] {
        let child = mc.child(&format!("a={a},n={n}"));
        out.suites
            .push(conjecture_scan(a, n, &cand, &child, cfg.samples, cfg.alpha)?);
    }
    Ok(out.finish(PassRule::All))
}

fn all(params: &Params, cfg: &RunConfig) -> Result<CheckReport> {
    params.allow("all", &[])?;
    let mut out = cfg.report("all");
    for (name, _) in SUITES.iter().filter(|(n, _)| *n != "all") {
        let sub = RunConfig {
            seed: derive_seed(cfg.seed, name),
            ..*cfg
        };
        out.suites.push(run_suite(name, &Params::default(), &sub)?);
    }
    Ok(out.finish(PassRule::All))
}
