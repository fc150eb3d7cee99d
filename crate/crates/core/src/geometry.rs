//! Uniform points on the sphere, Haar rotations, and the projection and
//! rotation-invariance checks for 3-vectors with i.i.d. coordinates.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::error::Result;
use crate::mc::{MonteCarlo, RngStream};
use crate::metrics::{
    chi_square_critical, chi_square_uniform, ks_one_sample, ks_two_sample, CheckReport, Decision, PassRule,
    Subtest,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn coord(&self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("coordinate index {i} out of range"),
        }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// A proper rotation of R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix(pub [[f64; 3]; 3]);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Rotation represented by the unit quaternion `(w, x, y, z)`.
    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let [w, x, y, z] = q.map(|v| v / n);
        RotationMatrix([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let a = v.as_array();
        let m = &self.0;
        let row = |i: usize| m[i][0] * a[0] + m[i][1] * a[1] + m[i][2] * a[2];
        Vec3::new(row(0), row(1), row(2))
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[j][i];
            }
        }
        RotationMatrix(t)
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let m = &self.0;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Points `(V, sqrt(1 - V^2) cos T, sqrt(1 - V^2) sin T)` with `V` uniform
/// on `(-1, 1)` and `T` uniform on `(0, 2 pi)`, independent.
pub fn sphere_sample(s: &mut RngStream, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            let v = 2.0 * s.uniform() - 1.0;
            let t = 2.0 * PI * s.uniform();
            let r = (1.0 - v * v).max(0.0).sqrt();
            Vec3::new(v, r * t.cos(), r * t.sin())
        })
        .collect()
}

/// Haar-distributed rotation from a uniform unit quaternion.
pub fn random_rotation(s: &mut RngStream) -> RotationMatrix {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(s));
        if q.iter().map(|v| v * v).sum::<f64>() > 1e-12 {
            return RotationMatrix::from_quaternion(q);
        }
    }
}

/// Normalized i.i.d. standard Gaussian 3-vectors.
pub fn gaussian_directions(s: &mut RngStream, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|_| loop {
            let v = Vec3::new(
                StandardNormal.sample(s),
                StandardNormal.sample(s),
                StandardNormal.sample(s),
            );
            let r = v.norm();
            if r > 0.0 {
                break Vec3::new(v.x / r, v.y / r, v.z / r);
            }
        })
        .collect()
}

fn triples(d: &DistSpec, mc: &MonteCarlo, tag: &str, n: usize) -> Result<Vec<Vec3>> {
    let c: Vec<Vec<f64>> = (0..3)
        .map(|i| mc.draw(d, &format!("{tag}-{i}"), n))
        .collect::<Result<_>>()?;
    Ok((0..n).map(|k| Vec3::new(c[0][k], c[1][k], c[2][k])).collect())
}

/// Compare every marginal of `R X` with fresh draws of `d`, for several
/// independent Haar rotations `R` of i.i.d. triples `X`.
pub fn rotation_invariance_check(
    d: &DistSpec,
    mc: &MonteCarlo,
    n: usize,
    rotations: usize,
    alpha: f64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("herschel-maxwell", mc.seed, n, mc.chunks, alpha)
        .param("dist", d)
        .param("rotations", rotations);
    for k in 0..rotations {
        let r = random_rotation(&mut mc.stream(&format!("rotation-{k}")));
        let x: Vec<Vec3> = triples(d, mc, &format!("vector-{k}"), n)?
            .into_iter()
            .map(|v| r.apply(v))
            .collect();
        for i in 0..3 {
            let marginal: Vec<f64> = x.iter().map(|v| v.coord(i)).collect();
            let fresh = mc.draw(d, &format!("reference-{k}-{i}"), n)?;
            let ks = ks_two_sample(&marginal, &fresh, alpha)?;
            report.push(Subtest::ks_two(format!("rotation {k} coordinate {i}"), ks, n, n));
        }
    }
    Ok(report.finish(PassRule::All))
}

/// Two-sample KS between `X1` and `V * |X|` for fresh i.i.d. triples `X`.
pub fn maxwell_projection_check(d: &DistSpec, mc: &MonteCarlo, n: usize, alpha: f64) -> Result<CheckReport> {
    let x1 = mc.draw(d, "coordinate", n)?;
    let v = mc.draw(&DistSpec::uniform(-1.0, 1.0)?, "uniform", n)?;
    let proj: Vec<f64> = triples(d, mc, "vector", n)?
        .iter()
        .zip(&v)
        .map(|(x, v)| v * x.norm())
        .collect();
    let ks = ks_two_sample(&x1, &proj, alpha)?;
    let mut report = CheckReport::new("maxwell-projection", mc.seed, n, mc.chunks, alpha).param("dist", d);
    report.push(Subtest::ks_two("X1 vs V|X|", ks, n, n));
    Ok(report.finish(PassRule::All))
}

pub const SLABS: usize = 8;
pub const ANGLE_BINS: usize = 16;

/// Counts of `atan2(y, x)` in `ANGLE_BINS` bins for each of `SLABS`
/// equal-width slabs of `z`.
pub fn slab_angle_counts(points: &[Vec3]) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; ANGLE_BINS]; SLABS];
    for p in points {
        let slab = (((p.z + 1.0) / 2.0 * SLABS as f64) as usize).min(SLABS - 1);
        let t = p.y.atan2(p.x) + PI;
        let bin = ((t / (2.0 * PI) * ANGLE_BINS as f64) as usize).min(ANGLE_BINS - 1);
        counts[slab][bin] += 1;
    }
    counts
}

/// Sphere sampler checks: each coordinate is uniform on `(-1, 1)`, the
/// angle around the z axis is uniform within every z slab, and each
/// coordinate matches a normalized Gaussian direction.
pub fn archimedes_check(mc: &MonteCarlo, n: usize, alpha: f64) -> Result<CheckReport> {
    let pts = sphere_sample(&mut mc.stream("sphere"), n);
    let uniform = DistSpec::uniform(-1.0, 1.0)?;
    let mut report = CheckReport::new("archimedes", mc.seed, n, mc.chunks, alpha)
        .param("slabs", SLABS)
        .param("angle_bins", ANGLE_BINS);
    for (i, name) in ["x", "y", "z"].iter().enumerate() {
        let c: Vec<f64> = pts.iter().map(|p| p.coord(i)).collect();
        let ks = ks_one_sample(&c, &uniform, alpha)?;
        report.push(Subtest::ks_one(
            format!("{name} marginal vs Uniform(-1, 1)"),
            ks,
            n,
        ));
    }
    let crit = chi_square_critical(ANGLE_BINS - 1, alpha);
    for (k, counts) in slab_angle_counts(&pts).iter().enumerate() {
        let stat = chi_square_uniform(counts);
        report.push(
            Subtest::new(
                format!("angle uniformity in z slab {k}"),
                stat,
                crit,
                Decision::ChiSquare { df: ANGLE_BINS - 1 },
            )
            .with("count", counts.iter().sum::<u64>() as f64),
        );
    }
    let gauss = gaussian_directions(&mut mc.stream("gaussian"), n);
    for (i, name) in ["x", "y", "z"].iter().enumerate() {
        let a: Vec<f64> = pts.iter().map(|p| p.coord(i)).collect();
        let b: Vec<f64> = gauss.iter().map(|p| p.coord(i)).collect();
        let ks = ks_two_sample(&a, &b, alpha)?;
        report.push(Subtest::ks_two(
            format!("{name} vs normalized Gaussian"),
            ks,
            n,
            n,
        ));
    }
    Ok(report.finish(PassRule::All))
}
