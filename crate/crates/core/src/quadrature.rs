//! Quadrature rules on `[0, 1]` and an adaptive Gauss-Kronrod integrator.

use std::fmt;
use std::collections::HashMap;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Midpoint,
    Trapezoid,
    GaussLegendre,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Midpoint => "midpoint",
            Rule::Trapezoid => "trapezoid",
            Rule::GaussLegendre => "gauss-legendre",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Rule::Midpoint),
            "trapezoid" => Ok(Rule::Trapezoid),
            "gauss-legendre" | "gl" => Ok(Rule::GaussLegendre),
            other => Err(Error::InvalidArgument(format!(
                "unknown quadrature rule '{other}' (midpoint, trapezoid, gauss-legendre)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: Rule::GaussLegendre,
            nodes: 256,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rule: Rule, nodes: usize) -> Self {
        Self { rule, nodes }
    }

    pub fn gauss_legendre(nodes: usize) -> Self {
        Self::new(Rule::GaussLegendre, nodes)
    }

    /// Nodes (ascending) and positive weights on `[0, 1]`; weights sum to 1.
    pub fn realize(&self) -> Result<Nodes> {
        let n = self.nodes;
        if n == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        let (points, weights) = match self.rule {
            Rule::Midpoint => {
                let h = 1.0 / n as f64;
                ((0..n).map(|k| (k as f64 + 0.5) * h).collect(), vec![h; n])
            }
            Rule::Trapezoid => {
                if n < 2 {
                    return Err(Error::InvalidArgument("trapezoid rule needs N >= 2".into()));
                }
                let h = 1.0 / (n - 1) as f64;
                let mut w = vec![h; n];
                w[0] = h / 2.0;
                w[n - 1] = h / 2.0;
                ((0..n).map(|k| k as f64 * h).collect(), w)
            }
            Rule::GaussLegendre => {
                let (x, w) = &*gauss_legendre_cached(n);
                (
                    x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
                    w.iter().map(|t| 0.5 * t).collect(),
                )
            }
        };
        Ok(Nodes { points, weights })
    }
}

#[derive(Clone, Debug)]
pub struct Nodes {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Nodes {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

type GlCache = Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>;

fn gauss_legendre_cached(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<GlCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("cache lock").get(&n) {
        return hit.clone();
    }
    let rule = Arc::new(gauss_legendre(n));
    cache.lock().expect("cache lock").insert(n, rule.clone());
    rule
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 4.0 * f64::EPSILON {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7-K15 panel: (Kronrod estimate, |K15 - G7|).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive G7-K15 quadrature of `f` over `[a, b]` to absolute
/// tolerance `tol`, bisecting the worst panel until the summed error
/// estimate is below `tol` (or the floating-point floor of the result).
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_subdivisions: usize) -> Result<f64> {
    adaptive_split(f, &[a, b], tol, max_subdivisions)
}

/// [`adaptive`] with the interval pre-split at `breaks` (sorted, including the
/// end points), which is where kinks of the integrand go.
pub fn adaptive_split(
    f: &dyn Fn(f64) -> f64,
    breaks: &[f64],
    tol: f64,
    max_subdivisions: usize,
) -> Result<f64> {
    let mut panels: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    let mut subdivisions = 0;
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let scale: f64 = panels.iter().map(|p| p.2.abs()).sum();
        if err <= tol.max(50.0 * f64::EPSILON * scale) {
            return Ok(total);
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::NonConvergence {
                estimate: err,
                subdivisions,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (a, b, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Err(Error::NonConvergence {
                estimate: err,
                subdivisions,
            });
        }
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
        subdivisions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for rule in [Rule::Midpoint, Rule::Trapezoid, Rule::GaussLegendre] {
            for n in [2, 3, 8, 64, 257, 1024] {
                let q = QuadratureSpec::new(rule, n).realize().unwrap();
                let s: f64 = q.weights.iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "{rule} {n}: {s}");
                assert!(q.weights.iter().all(|&w| w > 0.0));
                assert!(q.points.windows(2).all(|p| p[0] < p[1]));
                assert!(q.points.iter().all(|&p| (0.0..=1.0).contains(&p)));
            }
        }
        assert!(QuadratureSpec::new(Rule::Trapezoid, 1).realize().is_err());
        assert!(QuadratureSpec::new(Rule::Midpoint, 0).realize().is_err());
    }

    #[test]
    fn gauss_legendre_is_exact_for_degree_2n_minus_1() {
        for n in [1usize, 2, 5, 10] {
            let q = QuadratureSpec::gauss_legendre(n).realize().unwrap();
            for deg in 0..2 * n {
                let v: f64 = q.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_kink() {
        let f = |u: f64| 2.0 * (0.8 - u).max(0.0);
        let v = adaptive_split(&f, &[0.0, 0.8, 1.0], 1e-10, 100).unwrap();
        assert!((v - 0.64).abs() < 1e-14);
        let v = adaptive(&f, 0.0, 1.0, 1e-10, 200).unwrap();
        assert!((v - 0.64).abs() < 1e-10);
    }

    #[test]
    fn adaptive_nonconvergence() {
        let f = |u: f64| if u > 0.0 { u.powf(-0.999) } else { 0.0 };
        assert!(matches!(
            adaptive(&f, 0.0, 1.0, 1e-10, 5),
            Err(Error::NonConvergence { .. })
        ));
    }
}
