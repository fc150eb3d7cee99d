//! Distances, decision thresholds and the report type shared by all checks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::dist::{DistSpec, Kind};
use crate::error::{Error, Result};
use crate::mc::{derive_seed, parallel_sample};

pub const SCHEMA_VERSION: u32 = 1;

/// Asymptotic Kolmogorov critical value `c(alpha) = sqrt(-ln(alpha/2)/2)`.
pub fn ks_critical(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Upper `1 - alpha` quantile of chi-square with `df` degrees of freedom.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("df > 0")
        .inverse_cdf(1.0 - alpha)
}

/// Two-sided standard normal critical value `z_{1 - alpha/2}`.
pub fn z_critical(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub threshold: f64,
}

impl KsResult {
    pub fn pass(&self) -> bool {
        self.statistic <= self.threshold
    }
}

fn sorted(x: &[f64], what: &str) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::domain(format!("{what} sample is empty")));
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::domain(format!("{what} sample contains NaN")));
    }
    let mut v = x.to_vec();
    v.par_sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Supremum distance between the two empirical CDFs, with threshold
/// `c(alpha) * sqrt((n + m) / (n m))`.
pub fn ks_two_sample(x: &[f64], y: &[f64], alpha: f64) -> Result<KsResult> {
    let a = sorted(x, "first")?;
    let b = sorted(y, "second")?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsResult {
        statistic: d,
        threshold: ks_critical(alpha) * ((n + m) / (n * m)).sqrt(),
    })
}

/// Supremum distance between the empirical CDF of `x` and the CDF of `d`,
/// with threshold `c(alpha) / sqrt(n)`. Handles atoms in either.
pub fn ks_one_sample(x: &[f64], d: &DistSpec, alpha: f64) -> Result<KsResult> {
    let a = sorted(x, "")?;
    let n = a.len() as f64;
    let mut uniq: Vec<(f64, usize)> = Vec::new();
    for (k, v) in a.iter().enumerate() {
        match uniq.last_mut() {
            Some(last) if last.0 == *v => last.1 = k + 1,
            _ => uniq.push((*v, k + 1)),
        }
    }
    let continuous = d.kind() == Kind::Continuous;
    let rows: Vec<Result<f64>> = uniq
        .par_iter()
        .enumerate()
        .map(|(u, &(v, upto))| {
            let before = if u == 0 { 0 } else { uniq[u - 1].1 };
            let f = d.cdf(v)?;
            let f_left = if continuous { f } else { d.cdf(v.next_down())? };
            Ok((upto as f64 / n - f)
                .abs()
                .max((before as f64 / n - f_left).abs()))
        })
        .collect();
    let mut stat = 0.0f64;
    for r in rows {
        stat = stat.max(r?);
    }
    Ok(KsResult {
        statistic: stat,
        threshold: ks_critical(alpha) / n.sqrt(),
    })
}

/// Exact 1-Wasserstein distance between two empirical measures, i.e. the
/// integral of `|F^-1(u) - G^-1(u)|` over `u`. Sizes may differ.
pub fn wasserstein1(x: &[f64], y: &[f64]) -> Result<f64> {
    let a = sorted(x, "first")?;
    let b = sorted(y, "second")?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let next_a = (i + 1) as f64 / n;
        let next_b = (j + 1) as f64 / m;
        let next = next_a.min(next_b);
        total += (a[i] - b[j]).abs() * (next - u);
        u = next;
        if next_a <= next {
            i += 1;
        }
        if next_b <= next {
            j += 1;
        }
    }
    Ok(total)
}

/// Pearson statistic of `counts` against equal expected cell counts.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|c| (*c as f64 - e).powi(2) / e).sum()
}

/// How a subtest statistic is compared with its threshold, and how the
/// threshold changes under a Bonferroni correction over `m` subtests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decision {
    KsTwoSample {
        n: usize,
        m: usize,
    },
    KsOneSample {
        n: usize,
    },
    ChiSquare {
        df: usize,
    },
    /// `|estimate| / stderr <= k`.
    ZScore {
        k: f64,
    },
    /// Deterministic numerical tolerance.
    Tolerance,
    /// Passes when the statistic is at least the threshold (power checks).
    AtLeast,
}

impl Decision {
    fn adjusted(&self, threshold: f64, alpha: f64, m: usize) -> f64 {
        let a = alpha / m.max(1) as f64;
        let t = match *self {
            Decision::KsTwoSample { n, m } => {
                let (n, m) = (n as f64, m as f64);
                ks_critical(a) * ((n + m) / (n * m)).sqrt()
            }
            Decision::KsOneSample { n } => ks_critical(a) / (n as f64).sqrt(),
            Decision::ChiSquare { df } => chi_square_critical(df, a),
            Decision::ZScore { k } => k.max(z_critical(a)),
            Decision::Tolerance | Decision::AtLeast => threshold,
        };
        t.max(threshold)
    }

    fn passes(&self, statistic: f64, threshold: f64) -> bool {
        match self {
            Decision::AtLeast => statistic >= threshold,
            _ => statistic <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subtest {
    pub name: String,
    #[serde(with = "real")]
    pub statistic: f64,
    #[serde(with = "real")]
    pub threshold: f64,
    pub pass: bool,
    pub decision: Decision,
    #[serde(with = "real")]
    pub bonferroni_threshold: f64,
    pub bonferroni_pass: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", with = "real_map")]
    pub values: BTreeMap<String, f64>,
}

impl Subtest {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, decision: Decision) -> Self {
        let pass = decision.passes(statistic, threshold);
        Subtest {
            name: name.into(),
            statistic,
            threshold,
            pass,
            decision,
            bonferroni_threshold: threshold,
            bonferroni_pass: pass,
            values: BTreeMap::new(),
        }
    }

    pub fn ks_two(name: impl Into<String>, r: KsResult, n: usize, m: usize) -> Self {
        Self::new(name, r.statistic, r.threshold, Decision::KsTwoSample { n, m })
    }

    pub fn ks_one(name: impl Into<String>, r: KsResult, n: usize) -> Self {
        Self::new(name, r.statistic, r.threshold, Decision::KsOneSample { n })
    }

    /// `|estimate| <= k * stderr`, reported as a z-score. A zero standard
    /// error (deterministic integrand) counts as z = 0 when the estimate
    /// is zero to rounding.
    pub fn z(name: impl Into<String>, estimate: f64, stderr: f64, k: f64) -> Self {
        let z = z_score(estimate, stderr);
        Self::new(name, z, k, Decision::ZScore { k })
            .with("estimate", estimate)
            .with("stderr", stderr)
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    /// Distance from failing: below 1 passes.
    fn ratio(&self) -> f64 {
        match self.decision {
            Decision::AtLeast => self.threshold / self.statistic,
            _ => self.statistic / self.threshold,
        }
    }
}

pub fn z_score(estimate: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        estimate.abs() / stderr
    } else if estimate.abs() < 1e-9 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// How subtests combine into the suite decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassRule {
    All,
    AtLeast(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub suite: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub samples: usize,
    pub chunks: usize,
    #[serde(with = "real")]
    pub alpha: f64,
    #[serde(with = "real")]
    pub statistic: f64,
    #[serde(with = "real")]
    pub threshold: f64,
    pub pass: bool,
    pub bonferroni_pass: bool,
    pub subtests: Vec<Subtest>,
    /// Informational quantities that do not enter the decision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<CheckReport>,
}

impl CheckReport {
    pub fn new(suite: &str, seed: u64, samples: usize, chunks: usize, alpha: f64) -> Self {
        CheckReport {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            params: BTreeMap::new(),
            seed,
            samples,
            chunks,
            alpha,
            statistic: 0.0,
            threshold: 1.0,
            pass: true,
            bonferroni_pass: true,
            subtests: Vec::new(),
            evidence: None,
            suites: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, v: impl Serialize) -> Self {
        let v = serde_json::to_value(v).expect("parameter serializes");
        self.params.insert(key.to_string(), v);
        self
    }

    pub fn push(&mut self, s: Subtest) {
        self.subtests.push(s);
    }

    /// Fill in Bonferroni thresholds and the suite-level decision.
    ///
    /// With one subtest the report carries its statistic and threshold.
    /// With several, `statistic` is the largest normalized ratio (below 1
    /// passes) under [`PassRule::All`], or the number of failing subtests
    /// under [`PassRule::AtLeast`].
    pub fn finish(mut self, rule: PassRule) -> Self {
        let m = self.subtests.len();
        for s in &mut self.subtests {
            s.bonferroni_threshold = s.decision.adjusted(s.threshold, self.alpha, m);
            s.bonferroni_pass = s.decision.passes(s.statistic, s.bonferroni_threshold);
        }
        let passes = self.subtests.iter().filter(|s| s.pass).count();
        let adj_passes = self.subtests.iter().filter(|s| s.bonferroni_pass).count();
        let nested_ok = self.suites.iter().all(|r| r.pass);
        let nested_adj = self.suites.iter().all(|r| r.bonferroni_pass);
        match rule {
            PassRule::All => {
                if m == 1 {
                    self.statistic = self.subtests[0].statistic;
                    self.threshold = self.subtests[0].threshold;
                } else {
                    self.statistic = self.subtests.iter().map(Subtest::ratio).fold(0.0, f64::max);
                    self.threshold = 1.0;
                }
                self.pass = passes == m && nested_ok;
                self.bonferroni_pass = adj_passes == m && nested_adj;
            }
            PassRule::AtLeast(k) => {
                self.statistic = (m - passes) as f64;
                self.threshold = m.saturating_sub(k) as f64;
                self.pass = passes >= k && nested_ok;
                self.bonferroni_pass = adj_passes >= k && nested_adj;
            }
        }
        if self.subtests.is_empty() && !self.suites.is_empty() {
            let failing = self.suites.iter().filter(|r| !r.pass).count();
            self.statistic = failing as f64;
            self.threshold = 0.0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One CSV row per subtest: suite, name, statistic, threshold, pass,
    /// bonferroni threshold, bonferroni pass.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("suite,subtest,statistic,threshold,pass,bonferroni_threshold,bonferroni_pass\n");
        self.csv_rows(&mut out);
        out
    }

    fn csv_rows(&self, out: &mut String) {
        for s in &self.subtests {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.suite,
                csv_field(&s.name),
                s.statistic,
                s.threshold,
                s.pass,
                s.bonferroni_threshold,
                s.bonferroni_pass
            ));
        }
        for r in &self.suites {
            r.csv_rows(out);
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rows `(x, F_hat(x), F(x))` on a grid of `points` sample quantiles, with
/// `F` the CDF of `d`.
pub fn cdf_plot_rows(x: &[f64], d: &DistSpec, points: usize) -> Result<Vec<[f64; 3]>> {
    let a = sorted(x, "")?;
    let n = a.len();
    let points = points.clamp(2, n.max(2));
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let idx = ((k as f64 / (points - 1) as f64) * (n - 1) as f64).round() as usize;
        let v = a[idx];
        let upto = a.partition_point(|y| *y <= v);
        rows.push([v, upto as f64 / n as f64, d.cdf(v)?]);
    }
    Ok(rows)
}

/// Rows `(x, F_hat(x), G_hat(x))` comparing two samples.
pub fn two_sample_plot_rows(x: &[f64], y: &[f64], points: usize) -> Result<Vec<[f64; 3]>> {
    let a = sorted(x, "first")?;
    let b = sorted(y, "second")?;
    let lo = a[0].min(b[0]);
    let hi = a[a.len() - 1].max(b[b.len() - 1]);
    let points = points.max(2);
    let rows = (0..points)
        .map(|k| {
            let v = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            let fa = a.partition_point(|t| *t <= v) as f64 / a.len() as f64;
            let fb = b.partition_point(|t| *t <= v) as f64 / b.len() as f64;
            [v, fa, fb]
        })
        .collect();
    Ok(rows)
}

/// Seeded null runs: `runs` pairs of independent batches from `d`, each
/// compared by the two-sample KS test. Returns the number of rejections.
pub fn null_calibration(d: &DistSpec, seed: u64, runs: usize, n: usize, alpha: f64) -> Result<usize> {
    let mut rejections = 0;
    for r in 0..runs {
        let s = derive_seed(seed, &format!("null-{r}"));
        let x = parallel_sample(d, s, n, 1)?.values;
        let y = parallel_sample(d, derive_seed(s, "other"), n, 1)?.values;
        if !ks_two_sample(&x, &y, alpha)?.pass() {
            rejections += 1;
        }
    }
    Ok(rejections)
}

/// JSON numbers cannot hold infinities or NaN; those become strings.
mod real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub(super) fn parse(r: Repr) -> Result<f64, String> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(|_| format!("not a number: {t}")),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        parse(Repr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

mod real_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serializer};

    struct Wrap(f64);

    impl serde::Serialize for Wrap {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::real::serialize(&self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &Wrap(*v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, super::real::Repr>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| Ok((k, super::real::parse(v).map_err(serde::de::Error::custom)?)))
            .collect()
    }
}
