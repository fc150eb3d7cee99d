//! Canonicalizing transformations: power bias, powers, scaling, products,
//! and the `V * W^(2)` and `U * W^(1)` representations.
//!
//! Every function here returns a distribution in normal form: closed-form families
//! absorb what they can, scale factors are pulled outward, and what remains
//! nests as `Scaled(Biased(PowerOf(base, p), alpha), c)`. Two compositions
//! that are equal in law by the bias/power/scale identities then compare
//! equal as values.

use crate::dist::{signed_pow, DistSpec, Law};
use crate::error::{positive, Error, Result};

/// Split `d` as `c * unit` with `unit` a parameter-free representative.
fn split_scale(d: &DistSpec) -> (DistSpec, f64) {
    let unit = |u: Result<DistSpec>| u.expect("unit parameters are valid");
    match *d.law() {
        Law::Gamma { r, scale } if scale != 1.0 => (unit(DistSpec::gamma(r, 1.0)), scale),
        Law::Exponential { rate } if rate != 1.0 => (unit(DistSpec::exponential(1.0)), 1.0 / rate),
        Law::Maxwell { scale } if scale != 1.0 => (unit(DistSpec::maxwell(1.0)), scale),
        Law::Normal { mu, sigma } if mu == 0.0 && sigma != 1.0 => (DistSpec::standard_normal(), sigma),
        Law::Uniform { a, b } if a == 0.0 && b != 1.0 => (unit(DistSpec::uniform(0.0, 1.0)), b),
        Law::Uniform { a, b } if a == -b && b != 1.0 => (unit(DistSpec::uniform(-1.0, 1.0)), b),
        Law::Scaled { ref base, c } => (base.clone(), c),
        _ => (d.clone(), 1.0),
    }
}

/// `c * X` for `c > 0`.
pub fn scale(d: &DistSpec, c: f64) -> Result<DistSpec> {
    positive("c", c)?;
    if c == 1.0 {
        return Ok(d.clone());
    }
    match d.law() {
        Law::Normal { mu, sigma } => DistSpec::normal(mu * c, sigma * c),
        Law::Exponential { rate } => DistSpec::exponential(rate / c),
        Law::Gamma { r, scale } => DistSpec::gamma(*r, scale * c),
        Law::Uniform { a, b } => DistSpec::uniform(a * c, b * c),
        Law::PointMass { x } => DistSpec::point_mass(x * c),
        Law::Maxwell { scale } => DistSpec::maxwell(scale * c),
        Law::Empirical { values } => DistSpec::empirical(values.iter().map(|v| v * c).collect::<Vec<_>>()),
        Law::Scaled { base, c: c0 } => scale(base, c * c0),
        _ => DistSpec::scaled(d.clone(), c),
    }
}

/// `X + offset`.
pub fn shift(d: &DistSpec, offset: f64) -> Result<DistSpec> {
    if offset == 0.0 {
        return Ok(d.clone());
    }
    match d.law() {
        Law::Normal { mu, sigma } => DistSpec::normal(mu + offset, *sigma),
        Law::Uniform { a, b } => DistSpec::uniform(a + offset, b + offset),
        Law::PointMass { x } => DistSpec::point_mass(x + offset),
        Law::Empirical { values } => {
            DistSpec::empirical(values.iter().map(|v| v + offset).collect::<Vec<_>>())
        }
        Law::Shifted { base, offset: o } => shift(base, o + offset),
        _ => DistSpec::shifted(d.clone(), offset),
    }
}

fn strip_rademacher(d: &DistSpec) -> Option<DistSpec> {
    match d.law() {
        Law::Product { left, right } if *left.law() == Law::Rademacher => Some(right.clone()),
        Law::Product { left, right } if *right.law() == Law::Rademacher => Some(left.clone()),
        _ => None,
    }
}

/// Law of `X * Y` for independent `X`, `Y`.
pub fn product(a: &DistSpec, b: &DistSpec) -> Result<DistSpec> {
    for (x, y) in [(a, b), (b, a)] {
        if let Law::PointMass { x: v } = *x.law() {
            if v == 0.0 {
                return DistSpec::point_mass(0.0);
            }
            if v > 0.0 {
                return scale(y, v);
            }
            if y.is_symmetric() {
                return scale(y, -v);
            }
        }
        if *x.law() == Law::Rademacher && y.is_symmetric() {
            return Ok(y.clone());
        }
        // a symmetric factor absorbs a random sign carried by the other
        if x.is_symmetric() {
            if let Some(rest) = strip_rademacher(y) {
                return product(x, &rest);
            }
        }
    }
    let (a0, ca) = split_scale(a);
    let (b0, cb) = split_scale(b);
    let c = ca * cb;
    scale(&DistSpec::product(a0, b0), c)
}

/// Closed forms of the `alpha`-power bias of the base families.
fn closed_bias(d: &DistSpec, alpha: f64) -> Result<Option<DistSpec>> {
    let out = match *d.law() {
        Law::Gamma { r, scale } => DistSpec::gamma(r + alpha, scale)?,
        Law::Exponential { rate } => DistSpec::gamma(1.0 + alpha, 1.0 / rate)?,
        Law::Beta { r, s } => DistSpec::beta(r + alpha, s)?,
        Law::Uniform { a: 0.0, b } => scale(&DistSpec::beta(1.0 + alpha, 1.0)?, b)?,
        Law::Uniform { a, b } if a == -b => product(
            &DistSpec::rademacher(),
            &scale(&DistSpec::beta(1.0 + alpha, 1.0)?, b)?,
        )?,
        Law::PointMass { x } if x != 0.0 => d.clone(),
        Law::Rademacher => d.clone(),
        Law::Normal { mu, sigma } if mu == 0.0 && alpha == 2.0 => {
            product(&DistSpec::rademacher(), &DistSpec::maxwell(sigma)?)?
        }
        // |X| = sigma * sqrt(2 G_{1/2}), and biasing a power of a gamma
        // variable shifts its shape
        Law::Normal { mu: 0.0, sigma } => product(
            &DistSpec::rademacher(),
            &scale(
                &power_of(&DistSpec::gamma((1.0 + alpha) / 2.0, 1.0)?, 0.5)?,
                sigma * 2f64.sqrt(),
            )?,
        )?,
        Law::Maxwell { scale: sigma } => scale(
            &power_of(&DistSpec::gamma((3.0 + alpha) / 2.0, 1.0)?, 0.5)?,
            sigma * 2f64.sqrt(),
        )?,
        _ => return Ok(None),
    };
    Ok(Some(out))
}

/// The `alpha`-power bias `dF^(alpha)(x) = |x|^alpha dF(x) / E|X|^alpha`.
pub fn power_bias(d: &DistSpec, alpha: f64) -> Result<DistSpec> {
    positive("alpha", alpha)?;
    if !d.moment_exists(alpha) {
        return Err(Error::InfiniteMoment {
            alpha,
            dist: d.to_string(),
        });
    }
    if let Law::PointMass { x } = *d.law() {
        if x == 0.0 {
            return Err(Error::Degenerate(format!(
                "E|X|^{alpha} = 0 for {d}; the biased law does not exist"
            )));
        }
    }
    match d.law() {
        Law::Scaled { base, c } => scale(&power_bias(base, alpha)?, *c),
        Law::Biased { base, alpha: a, .. } => power_bias(base, a + alpha),
        Law::PowerOf { base, p } if *p > 0.0 => match closed_bias(base, alpha * p)? {
            Some(b) => power_of(&b, *p),
            None => DistSpec::biased(d.clone(), alpha),
        },
        Law::Product { left, right } => product(&power_bias(left, alpha)?, &power_bias(right, alpha)?),
        _ => match closed_bias(d, alpha)? {
            Some(b) => Ok(b),
            None => DistSpec::biased(d.clone(), alpha),
        },
    }
}

fn is_odd_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p.abs() % 2.0) == 1.0
}

/// Law of `X^p` (sign-preserving for odd integer `p`).
pub fn power_of(d: &DistSpec, p: f64) -> Result<DistSpec> {
    if p == 1.0 {
        return Ok(d.clone());
    }
    // validates the domain and serves as the fallback
    let raw = DistSpec::powered(d.clone(), p)?;
    match *d.law() {
        Law::PointMass { x } => return DistSpec::point_mass(signed_pow(x, p)),
        Law::Rademacher if is_odd_integer(p) => return Ok(d.clone()),
        Law::Empirical { ref values } => {
            return DistSpec::empirical(values.iter().map(|v| signed_pow(*v, p)).collect::<Vec<_>>())
        }
        Law::PowerOf { ref base, p: q } => return power_of(base, q * p),
        Law::Biased { ref base, alpha, .. } if p > 0.0 => return power_bias(&power_of(base, p)?, alpha / p),
        Law::Product { ref left, ref right } => {
            if let (Ok(l), Ok(r)) = (power_of(left, p), power_of(right, p)) {
                return product(&l, &r);
            }
            return Ok(raw);
        }
        Law::Gamma { r, scale } if r == 1.5 && p == 0.5 => return DistSpec::maxwell((scale / 2.0).sqrt()),
        _ => {}
    }
    let (unit, c) = split_scale(d);
    if c != 1.0 {
        return scale(&power_of(&unit, p)?, c.powf(p));
    }
    match *unit.law() {
        Law::Exponential { .. } => power_of(&DistSpec::gamma(1.0, 1.0)?, p),
        Law::Uniform { a, b } if a == 0.0 && b == 1.0 && p > 0.0 => DistSpec::beta(1.0 / p, 1.0),
        Law::Beta { r, s } if s == 1.0 && p > 0.0 => DistSpec::beta(r / p, 1.0),
        Law::Maxwell { .. } => scale(
            &power_of(&DistSpec::gamma(1.5, 1.0)?, p / 2.0)?,
            2f64.powf(p / 2.0),
        ),
        _ => Ok(raw),
    }
}

/// Law of `V * W^(2)` with `V` uniform on `(-1, 1)` independent of the
/// square-biased `W^(2)`. For symmetric laws this is the zero-bias
/// transform; for others it is only this product.
pub fn zero_bias_rep(d: &DistSpec) -> Result<DistSpec> {
    if !d.moment_exists(2.0) {
        return Err(Error::InfiniteMoment {
            alpha: 2.0,
            dist: d.to_string(),
        });
    }
    if d.moment(2.0)? == 0.0 {
        return Err(Error::Degenerate(format!("{d} has zero second moment")));
    }
    product(&DistSpec::uniform(-1.0, 1.0)?, &power_bias(d, 2.0)?)
}

/// Law of `U * W^(1)` with `U` uniform on `(0, 1)` independent of the
/// size-biased `W^(1)` of a nonnegative `W`.
pub fn equilibrium_rep(d: &DistSpec) -> Result<DistSpec> {
    if !d.is_nonnegative() {
        return Err(Error::domain(format!(
            "equilibrium representation needs nonnegative support; {d} takes negative values"
        )));
    }
    if !d.moment_exists(1.0) {
        return Err(Error::InfiniteMoment {
            alpha: 1.0,
            dist: d.to_string(),
        });
    }
    if d.moment(1.0)? == 0.0 {
        return Err(Error::Degenerate(format!("{d} has zero mean")));
    }
    product(&DistSpec::uniform(0.0, 1.0)?, &power_bias(d, 1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma(r: f64, s: f64) -> DistSpec {
        DistSpec::gamma(r, s).unwrap()
    }

    #[test]
    fn bias_examples() {
        assert_eq!(power_bias(&gamma(1.0, 1.0), 1.0).unwrap(), gamma(2.0, 1.0));
        let r = DistSpec::rademacher();
        assert_eq!(power_bias(&r, 2.0).unwrap(), r);
        let u = DistSpec::uniform(0.0, 1.0).unwrap();
        assert_eq!(power_bias(&u, 1.0).unwrap(), DistSpec::beta(2.0, 1.0).unwrap());
        let e = DistSpec::exponential(2.0).unwrap();
        assert_eq!(power_bias(&e, 1.0).unwrap(), gamma(2.0, 0.5));
    }

    #[test]
    fn normal_square_bias_is_signed_maxwell() {
        let n = DistSpec::normal(0.0, 2.0).unwrap();
        let expect = DistSpec::product(DistSpec::rademacher(), DistSpec::maxwell(2.0).unwrap());
        // scale is pulled out of the product
        let got = power_bias(&n, 2.0).unwrap();
        assert_eq!(got.to_string(), "Scaled(Product(Rademacher, Maxwell(1)), 2)");
        assert!((got.moment(2.0).unwrap() - expect.moment(2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn bias_errors() {
        let cauchy_like = DistSpec::powered(DistSpec::standard_normal(), -1.0).unwrap();
        assert!(matches!(
            power_bias(&cauchy_like, 1.0),
            Err(Error::InfiniteMoment { .. })
        ));
        assert!(power_bias(&gamma(1.0, 1.0), 0.0).is_err());
        let zero = DistSpec::point_mass(0.0).unwrap();
        assert!(matches!(power_bias(&zero, 2.0), Err(Error::Degenerate(_))));
        assert!(matches!(zero_bias_rep(&zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bias_power_commutation_is_symbolic() {
        let g = gamma(1.0, 1.0);
        let lhs = power_of(&power_bias(&g, 2.0).unwrap(), 3.0).unwrap();
        let rhs = power_bias(&power_of(&g, 3.0).unwrap(), 2.0 / 3.0).unwrap();
        assert_eq!(lhs, rhs);
        for (a, b) in [(1.0, 2.0), (2.0, 0.5)] {
            for r in [1.0, 0.5] {
                let g = gamma(r, 1.0);
                let lhs = power_of(&power_bias(&g, a).unwrap(), b).unwrap();
                let rhs = power_bias(&power_of(&g, b).unwrap(), a / b).unwrap();
                assert_eq!(lhs, rhs, "r={r} a={a} b={b}");
            }
        }
    }

    #[test]
    fn bias_commutes_with_scale() {
        let e = DistSpec::exponential(1.0).unwrap();
        let lhs = scale(&power_bias(&e, 1.0).unwrap(), 2.0).unwrap();
        let rhs = power_bias(&scale(&e, 2.0).unwrap(), 1.0).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, gamma(2.0, 2.0));
    }

    #[test]
    fn raw_bias_nests_inside_scale() {
        let d = DistSpec::shifted(DistSpec::exponential(1.0).unwrap(), 1.0).unwrap();
        let b = scale(&power_bias(&d, 1.0).unwrap(), 3.0).unwrap();
        assert_eq!(b.to_string(), "Scaled(Biased(Shifted(Exponential(1), 1), 1), 3)");
        let again = power_bias(&scale(&d, 3.0).unwrap(), 1.0).unwrap();
        assert_eq!(
            again.to_string(),
            "Scaled(Biased(Shifted(Exponential(1), 1), 1), 3)"
        );
    }

    #[test]
    fn power_identities() {
        let d = gamma(2.0, 3.0);
        assert_eq!(power_of(&d, 1.0).unwrap(), d);
        assert_eq!(power_of(&power_of(&d, 2.0).unwrap(), 0.5).unwrap(), d);
        let u = DistSpec::uniform(0.0, 1.0).unwrap();
        assert_eq!(power_of(&u, 0.5).unwrap(), DistSpec::beta(2.0, 1.0).unwrap());
        assert_eq!(
            power_of(&gamma(1.5, 2.0), 0.5).unwrap(),
            DistSpec::maxwell(1.0).unwrap()
        );
        assert!(power_of(&DistSpec::standard_normal(), 2.0).is_err());
        let pm = DistSpec::point_mass(-2.0).unwrap();
        assert_eq!(power_of(&pm, 3.0).unwrap(), DistSpec::point_mass(-8.0).unwrap());
    }

    #[test]
    fn representations() {
        let n = DistSpec::standard_normal();
        let z = zero_bias_rep(&n).unwrap();
        assert_eq!(z.to_string(), "Product(Uniform(-1, 1), Maxwell(1))");
        let pm = DistSpec::point_mass(1.0).unwrap();
        assert_eq!(zero_bias_rep(&pm).unwrap(), DistSpec::uniform(-1.0, 1.0).unwrap());
        assert_eq!(
            equilibrium_rep(&pm).unwrap(),
            DistSpec::uniform(0.0, 1.0).unwrap()
        );
        assert_eq!(
            zero_bias_rep(&DistSpec::rademacher()).unwrap(),
            DistSpec::uniform(-1.0, 1.0).unwrap()
        );
        assert!(equilibrium_rep(&n).is_err());
        let g = equilibrium_rep(&gamma(2.0, 1.0)).unwrap();
        assert!((g.moment(1.0).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn product_simplifications() {
        let u = DistSpec::uniform(-1.0, 1.0).unwrap();
        let r = DistSpec::rademacher();
        assert_eq!(product(&r, &u).unwrap(), u);
        let two = DistSpec::point_mass(2.0).unwrap();
        assert_eq!(product(&two, &u).unwrap(), DistSpec::uniform(-2.0, 2.0).unwrap());
        let p = product(&gamma(2.0, 3.0), &DistSpec::exponential(0.5).unwrap()).unwrap();
        assert_eq!(p.to_string(), "Scaled(Product(Gamma(2, 1), Exponential(1)), 6)");
    }
}
