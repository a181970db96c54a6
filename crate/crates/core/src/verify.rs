//! Numerical checks: sup-error sampling, the adaptive-quadrature oracle,
//! certificate validation and convergence studies.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{NormKind, NormReport, ShallowNet};
use crate::pushforward::EmbeddingCertificate;
use crate::quadrature;

/// Environment variable capping the worker threads (0 or unset = automatic).
pub const THREADS_ENV: &str = "BARRON_BRIDGE_THREADS";

/// Absolute tolerance of [`oracle_integral`].
pub const ORACLE_TOL: f64 = 1e-10;
pub const ORACLE_MAX_SUBDIVISIONS: usize = 10_000;

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
    })
}

/// Sample sets on `[-1, 1]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sampler {
    /// Tensor grid with `n` equispaced points per axis, end points included.
    Grid { n: usize },
    /// `count` uniform points from splitmix64 over a counter started at `seed`.
    Random { count: usize, seed: u64 },
}

impl Sampler {
    /// 1000 grid points for `d = 1`, 10⁴ random points (seed 0) otherwise.
    pub fn default_for(d: usize) -> Self {
        if d == 1 {
            Sampler::Grid { n: 1000 }
        } else {
            Sampler::Random { count: 10_000, seed: 0 }
        }
    }

    pub fn len(&self, d: usize) -> usize {
        match *self {
            Sampler::Grid { n } => n.saturating_pow(d as u32),
            Sampler::Random { count, .. } => count,
        }
    }

    /// The `i`-th sample point, `i < self.len(d)`.
    pub fn point(&self, d: usize, i: usize, out: &mut [f64]) {
        match *self {
            Sampler::Grid { n } => {
                let mut r = i;
                for o in out.iter_mut().take(d) {
                    let k = r % n;
                    r /= n;
                    *o = if n == 1 { 0.0 } else { -1.0 + 2.0 * k as f64 / (n - 1) as f64 };
                }
            }
            Sampler::Random { seed, .. } => {
                for (j, o) in out.iter_mut().take(d).enumerate() {
                    let z = splitmix64(seed.wrapping_add(((i * d + j) as u64).wrapping_mul(GOLDEN)));
                    *o = 2.0 * ((z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)) - 1.0;
                }
            }
        }
    }

    pub fn points(&self, d: usize) -> Vec<Vec<f64>> {
        (0..self.len(d))
            .map(|i| {
                let mut x = vec![0.0; d];
                self.point(d, i, &mut x);
                x
            })
            .collect()
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampler::Grid { n } => write!(f, "grid:{n}"),
            Sampler::Random { count, seed } => write!(f, "rand:{count}:{seed}"),
        }
    }
}

impl FromStr for Sampler {
    type Err = Error;

    /// `grid:N`, `rand:M` or `rand:M:SEED`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad sampler '{s}' (grid:N | rand:M[:SEED])"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["grid", n] if num(n)? > 0 => Ok(Sampler::Grid { n: num(n)? }),
            ["rand", m] if num(m)? > 0 => Ok(Sampler::Random { count: num(m)?, seed: 0 }),
            ["rand", m, seed] if num(m)? > 0 => Ok(Sampler::Random {
                count: num(m)?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `max |f(x) - g(x)|` over the sample set: evaluated in parallel, reduced in
/// sample order.
pub fn sup_error_fn(
    d: usize,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    sampler: Sampler,
) -> f64 {
    let n = sampler.len(d);
    let errs: Vec<f64> = pool().install(|| {
        (0..n)
            .into_par_iter()
            .map_init(
                || vec![0.0; d],
                |x, i| {
                    sampler.point(d, i, x);
                    (f(x) - g(x)).abs()
                },
            )
            .collect()
    });
    errs.into_iter().fold(0.0, |acc, e| if e > acc || e.is_nan() { e } else { acc })
}

pub fn sup_error(a: &ShallowNet, b: &ShallowNet, sampler: Sampler) -> Result<f64> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            got: b.d(),
        });
    }
    Ok(sup_error_fn(a.d(), &|x| a.eval_unchecked(x), &|x| b.eval_unchecked(x), sampler))
}

/// Sup distance between a net and a reference function.
pub fn sup_error_against(net: &ShallowNet, f: &(dyn Fn(&[f64]) -> f64 + Sync), sampler: Sampler) -> f64 {
    sup_error_fn(net.d(), &|x| net.eval_unchecked(x), f, sampler)
}

/// Reference integral `∫_lo^hi f` by adaptive G7-K15 quadrature split at the
/// declared kinks, absolute tolerance [`ORACLE_TOL`].
pub fn oracle_integral(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, kinks: &[f64]) -> Result<f64> {
    let (a, b, sign) = if lo <= hi { (lo, hi, 1.0) } else { (hi, lo, -1.0) };
    let mut breaks = vec![a];
    let mut inner: Vec<f64> = kinks.iter().copied().filter(|&k| k > a && k < b).collect();
    inner.sort_by(f64::total_cmp);
    breaks.extend(inner);
    breaks.push(b);
    Ok(sign * quadrature::adaptive_split(f, &breaks, ORACLE_TOL, ORACLE_MAX_SUBDIVISIONS)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub pass: bool,
    pub constant: f64,
    pub source_norm: f64,
    pub target_norm: f64,
    /// `target - constant · source` from the recomputed norms.
    pub slack: f64,
    pub allowed: f64,
    pub messages: Vec<String>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn recompute(report: &NormReport, net: &ShallowNet) -> f64 {
    match (report.kind, report.s) {
        (NormKind::RepuForm, Some(s)) => net.measure.repu_norm(s),
        _ => net.measure.lipschitz_norm(),
    }
}

/// Recomputes the norms from the emitted nets and tests
/// `target <= constant · source · (1 + tol_rel)`. A spectral source has no
/// net; its recorded norm is used as is.
pub fn check_certificate(
    cert: &EmbeddingCertificate,
    source: Option<&ShallowNet>,
    target: &ShallowNet,
    tol_rel: f64,
) -> CertificateCheck {
    let mut messages = Vec::new();
    let mut pass = true;
    let source_norm = match source {
        Some(net) if cert.source_norm.kind != NormKind::SpectralForm => {
            let v = recompute(&cert.source_norm, net);
            if !same(v, cert.source_norm.value) {
                pass = false;
                messages.push(format!("source norm mismatch: recorded {} recomputed {v}", cert.source_norm.value));
            }
            v
        }
        _ => cert.source_norm.value,
    };
    let target_norm = recompute(&cert.target_norm, target);
    if !same(target_norm, cert.target_norm.value) {
        pass = false;
        messages.push(format!("target norm mismatch: recorded {} recomputed {target_norm}", cert.target_norm.value));
    }
    let slack = target_norm - cert.constant * source_norm;
    let allowed = tol_rel * cert.constant * source_norm;
    if !(slack <= allowed) {
        pass = false;
        messages.push(format!(
            "inequality fails: target {target_norm} > {} x source {source_norm} (slack {slack:e}, allowed {allowed:e})",
            cert.constant
        ));
    }
    if !cert.trusted {
        messages.push("constant relies on an untrusted numeric integral".into());
    }
    CertificateCheck {
        pass,
        constant: cert.constant,
        source_norm,
        target_norm,
        slack,
        allowed,
        messages,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub sup_error: f64,
    pub target_norm: f64,
    pub atoms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    /// Sup errors non-increasing in `N`.
    pub monotone: bool,
}

/// Runs `convert(N)` for each `N` and measures the sup error against
/// `reference`. Non-monotone errors are flagged, not fatal.
pub fn convergence_study(
    ns: &[usize],
    convert: impl Fn(usize) -> Result<ShallowNet>,
    reference: &(dyn Fn(&[f64]) -> f64 + Sync),
    sampler: Sampler,
) -> Result<StudyTable> {
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("N list must be non-empty and increasing, got {ns:?}")));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let net = convert(n)?;
        rows.push(StudyRow {
            n,
            sup_error: sup_error_against(&net, reference, sampler),
            target_norm: net.representation_norm().value,
            atoms: net.measure.len(),
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].sup_error <= w[0].sup_error);
    Ok(StudyTable { rows, monotone })
}
