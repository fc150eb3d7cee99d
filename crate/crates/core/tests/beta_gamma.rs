mod common;

use common::{ln_gamma, simpson, simpson_to_inf};
use distfix::beta_gamma::{
    beta_gamma_identities_check, beta_moment, carleman_partial_sums, conjecture_scan,
    gamma_fixed_point_check, laplace_ode_residual, log_grid, moment_sequence, recursion_residual,
};
use distfix::transforms::{power_of, scale};
use distfix::{parallel_sample, DistSpec, MonteCarlo};

const N: usize = 100_000;
const ALPHA: f64 = 1e-3;

fn lognormal_surrogate(seed: u64) -> DistSpec {
    let z = parallel_sample(&DistSpec::standard_normal(), seed, 20_000, 4)
        .unwrap()
        .values;
    DistSpec::empirical(z.into_iter().map(f64::exp).collect::<Vec<_>>()).unwrap()
}

#[test]
fn beta_moment_matches_uniform_square() {
    // V uniform on (-1, 1): E V^2 = 1/3 and V^2 is Beta(1/2, 1)
    let ev2 = simpson(|v| 0.5 * v * v, -1.0, 1.0, 100);
    assert!((beta_moment(0.5, 1.0, 1.0).unwrap() - ev2).abs() < 1e-12);
    for (r, s, a) in [(2.0, 3.0, 1.5), (0.3, 0.7, -0.2)] {
        let oracle = (ln_gamma(r + a) + ln_gamma(r + s) - ln_gamma(r + a + s) - ln_gamma(r)).exp();
        assert!((beta_moment(r, s, a).unwrap() / oracle - 1.0).abs() < 1e-10);
    }
}

#[test]
fn factorial_ladder_matches_exponential_moments() {
    let ms = moment_sequence(1.0, 1.0, 1.0, 5).unwrap();
    assert_eq!(ms.terms()[0], 1.0);
    for (k, a) in ms.terms().iter().enumerate() {
        let q = simpson_to_inf(|x| x.powi(k as i32) * (-x).exp(), 0.0, 40_000);
        assert!((a / q - 1.0).abs() < 1e-8, "k={k}: {a} vs {q}");
    }
}

#[test]
fn half_gamma_ladder_matches_quadrature() {
    // a1 = E G_{1/2} makes a_k = E G_{1/2}^k; substitute x = t^2 to remove
    // the singularity at zero
    let r = 0.5;
    let a1 = (ln_gamma(1.5) - ln_gamma(0.5)).exp();
    let ms = moment_sequence(r, 1.0, a1, 6).unwrap();
    for (k, a) in ms.terms().iter().enumerate() {
        let q = simpson_to_inf(
            |t| 2.0 * t.powi(2 * k as i32) * (-t * t).exp() / std::f64::consts::PI.sqrt(),
            0.0,
            40_000,
        );
        assert!((a / q - 1.0).abs() < 1e-9, "k={k}: {a} vs {q}");
    }
}

#[test]
fn recursion_holds_on_closed_forms() {
    for (r, s, a1) in [(1.0, 1.0, 1.0), (0.5, 1.0, 1.0), (2.0, 3.0, 0.7), (0.5, 2.5, 3.0)] {
        let ms = moment_sequence(r, s, a1, 12).unwrap();
        assert!(recursion_residual(&ms).unwrap() <= 1e-9, "({r}, {s}, {a1})");
    }
}

#[test]
fn carleman_sums_diverge_slowly() {
    let ms = moment_sequence(1.0, 1.0, 1.0, 200).unwrap();
    let s = carleman_partial_sums(&ms, 100).unwrap();
    assert!(s[0] > 0.0);
    assert!(s.windows(2).all(|w| w[1] > w[0]));
    assert!(s[99] > 2.0 * s[9]);
    // a_{2k}^{-1/(2k)} ~ e / (2k) for factorials
    let term = s[99] - s[98];
    assert!((term * 200.0 / std::f64::consts::E - 1.0).abs() < 0.02, "{term}");
}

#[test]
fn ode_solutions_and_non_solutions() {
    let grid = log_grid(0.01, 10.0, 200);
    for (n, c) in [(2u32, 1.0), (3, 1.0), (3, 2.0)] {
        let phi = |l: f64| (1.0 + c * l).powf(-1.0 / (n as f64 - 1.0));
        let r = laplace_ode_residual(phi, n, &grid).unwrap();
        assert!(r.max_residual <= 1e-8, "n={n} c={c}: {r:?}");
    }
    let r = laplace_ode_residual(|l| (-l).exp(), 3, &grid).unwrap();
    assert!(r.max_residual > 0.01);
    let mut with_zero = grid.clone();
    with_zero.insert(0, 0.0);
    assert!(
        laplace_ode_residual(|l| (1.0 + l).powf(-0.5), 3, &with_zero)
            .unwrap()
            .excluded_zero
    );
}

#[test]
fn ode_holds_for_quadrature_laplace_transform() {
    let g = DistSpec::gamma(0.5, 2.0).unwrap();
    let grid = log_grid(0.01, 10.0, 40);
    let r = laplace_ode_residual(|l| g.laplace(l).unwrap(), 3, &grid).unwrap();
    assert!(r.max_residual <= 1e-6, "{r:?}");
}

#[test]
fn gamma_fixed_point_on_gamma_family() {
    let mc = MonteCarlo::new(42, 4);
    let half = power_of(&DistSpec::gamma(0.5, 1.0).unwrap(), 0.5).unwrap();
    for c in [1.0, 2.0] {
        let cand = scale(&half, c).unwrap();
        let r = gamma_fixed_point_check(0.5, 1.0, 0.5, &cand, &mc, N, ALPHA).unwrap();
        assert!(r.pass, "{}", r.to_json());
        let est = r.subtests[0].values["c_estimate"];
        assert!((est / c - 1.0).abs() < 0.02, "{est}");
    }
    let r =
        gamma_fixed_point_check(1.0, 1.0, 1.0, &DistSpec::exponential(1.0).unwrap(), &mc, N, ALPHA).unwrap();
    assert!(r.pass);
    let r =
        gamma_fixed_point_check(2.0, 3.0, 1.0, &DistSpec::gamma(2.0, 2.0).unwrap(), &mc, N, ALPHA).unwrap();
    assert!(r.pass);
}

#[test]
fn gamma_fixed_point_rejects_other_laws() {
    let mc = MonteCarlo::new(42, 4);
    for cand in [
        DistSpec::uniform(0.0, 1.0).unwrap(),
        DistSpec::point_mass(1.0).unwrap(),
        lognormal_surrogate(5),
    ] {
        let r = gamma_fixed_point_check(1.0, 1.0, 1.0, &cand, &mc, N, ALPHA).unwrap();
        assert!(!r.pass, "{cand}");
    }
    // infinite bias moment
    let heavy = DistSpec::powered(DistSpec::gamma(0.5, 1.0).unwrap(), -1.0).unwrap();
    assert!(gamma_fixed_point_check(1.0, 1.0, 1.0, &heavy, &mc, 100, ALPHA).is_err());
}

#[test]
fn conjecture_scan_on_gamma_candidates() {
    let mc = MonteCarlo::new(42, 4);
    for (a, n, cand) in [
        (0.5, 3, DistSpec::gamma(0.5, 2.0).unwrap()),
        (2.0, 2, DistSpec::gamma(2.0, 1.0).unwrap()),
        (1.0, 4, DistSpec::gamma(1.0, 1.0).unwrap()),
    ] {
        let r = conjecture_scan(a, n, &cand, &mc, N, ALPHA).unwrap();
        assert!(r.pass, "a={a} n={n}: {}", r.to_json());
        let ratios = r.evidence.as_ref().unwrap()["moment_ratios"]
            .as_array()
            .unwrap()
            .clone();
        assert_eq!(ratios.len(), 6);
        assert!((ratios[0].as_f64().unwrap() - 1.0).abs() < 0.02);
    }
}

#[test]
fn conjecture_scan_rejects_non_gamma_candidates() {
    let mc = MonteCarlo::new(42, 4);
    let r = conjecture_scan(1.0, 2, &lognormal_surrogate(6), &mc, N, ALPHA).unwrap();
    assert!(!r.pass);
    let r = conjecture_scan(1.0, 2, &DistSpec::uniform(0.0, 1.0).unwrap(), &mc, N, ALPHA).unwrap();
    assert!(!r.pass);
    assert!(conjecture_scan(1.0, 2, &DistSpec::standard_normal(), &mc, 10, ALPHA).is_err());
}

#[test]
fn beta_gamma_identities_pass() {
    let r = beta_gamma_identities_check(&MonteCarlo::new(42, 4), N, ALPHA).unwrap();
    assert!(r.pass, "{}", r.to_json());
    assert_eq!(r.subtests.len(), 5);
}
