//! Exact RePU(s) representations of polynomials of degree `<= s`.
//!
//! For pairs `(w_i, b_i)`, `i = 1..p`, `p = C(s+d, d)`, the powers
//! `(⟨x,w_i⟩ + b_i)^s` span the polynomials of degree `<= s` whenever the
//! matrix `W_ij = C(s,|α_j|) · (|α_j| choose α_j) · w_i^{α_j} · b_i^{s-|α_j|}`
//! is invertible. Solving `Wᵀκ = c` and using
//! `z^s = repu_s(z) + (-1)^s repu_s(-z)` turns a polynomial into `2p` atoms.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure, ShallowNet};

/// The first 64 primes.
pub const PRIMES: [u32; 64] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293,
    307, 311,
];

pub const MAX_DIM: usize = PRIMES.len();

/// Highest supported polynomial degree.
pub const MAX_DEGREE: u32 = 8;

/// Default relative residual tolerance of the coefficient solve.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Sign in `z^s = repu_s(z) + SIGN · repu_s(-z)`.
pub fn identity_sign(s: u32) -> f64 {
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `|α|! / Π α_k!`.
pub fn multinomial(alpha: &[u32]) -> f64 {
    let total: u32 = alpha.iter().sum();
    let mut acc = 1.0;
    let mut n = 0;
    for &a in alpha {
        n += a;
        acc *= binomial(n, a);
    }
    debug_assert_eq!(n, total);
    acc
}

/// `x^α = Π x_k^{α_k}`.
pub fn monomial(x: &[f64], alpha: &[u32]) -> f64 {
    x.iter().zip(alpha).fold(1.0, |acc, (x, &a)| acc * x.powi(a as i32))
}

/// All multi-indices `α ∈ ℕ^d` with `|α| <= s`, in colexicographic order
/// (last coordinate most significant).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexTable {
    pub s: u32,
    pub d: usize,
    pub indices: Vec<Vec<u32>>,
}

pub fn colex_cmp(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

impl MultiIndexTable {
    pub fn new(s: u32, d: usize) -> Result<Self> {
        if s == 0 || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "multi-index table needs s, d >= 1 (got s={s}, d={d})"
            )));
        }
        let mut indices = Vec::new();
        let mut cur = vec![0u32; d];
        fill(&mut indices, &mut cur, 0, s);
        indices.sort_by(|a, b| colex_cmp(a, b));
        Ok(Self { s, d, indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.indices
            .binary_search_by(|probe| colex_cmp(probe, alpha))
            .ok()
    }
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, k: usize, budget: u32) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for a in 0..=budget {
        cur[k] = a;
        fill(out, cur, k + 1, budget - a);
    }
    cur[k] = 0;
}

/// Weight schedule of the basis pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasisScale {
    /// `w_i = 2(α_i/s - 1/(d+1))`: the principal lattice of a simplex,
    /// centered. `‖w_i‖₁ <= 2`, well conditioned through `s = 4, d = 3`.
    Lattice,
    /// `w_{i,1} = ratio^{p-i}` and `w_{i,k} = w_{i,1}^{1 + 2(k-1)√prime(k)}`,
    /// so `‖w_i‖₁ <= d`.
    Compact { ratio: f64 },
    /// `w_{i,1} = 1 + 0.3 i` and `w_{i,k} = w_{i,1}^{1 + (k-1)√prime(k)}`.
    /// Weights grow fast; only usable for small `p`.
    Classic,
}

impl Default for BasisScale {
    fn default() -> Self {
        BasisScale::Lattice
    }
}

impl fmt::Display for BasisScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisScale::Lattice => f.write_str("lattice"),
            BasisScale::Compact { ratio } => write!(f, "compact:{ratio}"),
            BasisScale::Classic => f.write_str("classic"),
        }
    }
}

impl FromStr for BasisScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lattice" => Ok(BasisScale::Lattice),
            "classic" => Ok(BasisScale::Classic),
            "compact" => Ok(BasisScale::Compact { ratio: 0.8 }),
            other => match other.strip_prefix("compact:").map(str::parse::<f64>) {
                Some(Ok(ratio)) if ratio > 0.0 && ratio < 1.0 => Ok(BasisScale::Compact { ratio }),
                _ => Err(Error::InvalidArgument(format!(
                    "unknown basis scale '{other}' (lattice, compact[:ratio], classic)"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub w: Vec<f64>,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisPairs {
    pub s: u32,
    pub d: usize,
    pub scale: Option<BasisScale>,
    pub pairs: Vec<Pair>,
    /// 2-norm condition number of `W`.
    pub condition: f64,
}

impl BasisPairs {
    pub fn table(&self) -> MultiIndexTable {
        MultiIndexTable::new(self.s, self.d).expect("validated at construction")
    }

    /// Wraps explicit pairs (for example hand-picked ones).
    pub fn from_pairs(s: u32, d: usize, pairs: Vec<Pair>) -> Result<Self> {
        let table = MultiIndexTable::new(s, d)?;
        if pairs.len() != table.len() {
            return Err(Error::InvalidArgument(format!(
                "need {} pairs for s={s}, d={d}, got {}",
                table.len(),
                pairs.len()
            )));
        }
        if let Some(p) = pairs.iter().find(|p| p.w.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.w.len(),
            });
        }
        let mut out = Self {
            s,
            d,
            scale: None,
            pairs,
            condition: f64::NAN,
        };
        out.condition = condition_number(&assemble_w(&out, &table));
        Ok(out)
    }
}

/// Builds the `p = C(s+d, d)` pairs, all with `b_i = 1`.
pub fn build_pairs(s: u32, d: usize, scale: BasisScale) -> Result<BasisPairs> {
    if s > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "polynomial degree {s} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if d > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "dimension {d} exceeds the prime table ({MAX_DIM})"
        )));
    }
    let table = MultiIndexTable::new(s, d)?;
    let p = table.len();
    let pairs: Vec<Pair> = match scale {
        BasisScale::Lattice => {
            let shift = 1.0 / (d as f64 + 1.0);
            table
                .indices
                .iter()
                .map(|alpha| Pair {
                    w: alpha
                        .iter()
                        .map(|&a| 2.0 * (a as f64 / s as f64 - shift))
                        .collect(),
                    b: 1.0,
                })
                .collect()
        }
        BasisScale::Compact { ratio } => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "compact ratio must lie in (0, 1), got {ratio}"
                )));
            }
            (1..=p)
                .map(|i| {
                    let first = ratio.powi((p - i) as i32);
                    Pair {
                        w: (1..=d)
                            .map(|k| {
                                let e = 1.0 + 2.0 * (k - 1) as f64 * (PRIMES[k - 1] as f64).sqrt();
                                first.powf(e)
                            })
                            .collect(),
                        b: 1.0,
                    }
                })
                .collect()
        }
        BasisScale::Classic => (1..=p)
            .map(|i| {
                let first = 1.0 + 0.3 * i as f64;
                Pair {
                    w: (1..=d)
                        .map(|k| {
                            let e = 1.0 + (k - 1) as f64 * (PRIMES[k - 1] as f64).sqrt();
                            first.powf(e)
                        })
                        .collect(),
                    b: 1.0,
                }
            })
            .collect(),
    };
    let mut out = BasisPairs {
        s,
        d,
        scale: Some(scale),
        pairs,
        condition: f64::NAN,
    };
    out.condition = condition_number(&assemble_w(&out, &table));
    Ok(out)
}

/// `W_ij = C(s,|α_j|) (|α_j| choose α_j) w_i^{α_j} b_i^{s-|α_j|}`, so that
/// `(⟨x,w_i⟩ + b_i)^s = Σ_j W_ij x^{α_j}`.
pub fn assemble_w(pairs: &BasisPairs, table: &MultiIndexTable) -> DMatrix<f64> {
    let p = table.len();
    let s = pairs.s;
    let coef: Vec<f64> = table
        .indices
        .iter()
        .map(|a| {
            let n: u32 = a.iter().sum();
            binomial(s, n) * multinomial(a)
        })
        .collect();
    DMatrix::from_fn(p, p, |i, j| {
        let alpha = &table.indices[j];
        let n: u32 = alpha.iter().sum();
        let pr = &pairs.pairs[i];
        coef[j] * monomial(&pr.w, alpha) * pr.b.powi((s - n) as i32)
    })
}

/// 2-norm condition number `σ_max / σ_min`.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Polynomial of degree `<= s` in `d` variables, monomial basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub d: usize,
    pub s: u32,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub alpha: Vec<u32>,
    pub c: f64,
}

impl Polynomial {
    pub fn new(d: usize, s: u32, terms: Vec<Term>) -> Result<Self> {
        let p = Self { d, s, terms };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.s == 0 {
            return Err(Error::InvalidArgument("polynomial needs d, s >= 1".into()));
        }
        for t in &self.terms {
            if t.alpha.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: t.alpha.len(),
                });
            }
            let deg: u32 = t.alpha.iter().sum();
            if deg > self.s {
                return Err(Error::InvalidArgument(format!(
                    "term {:?} has degree {deg} > s = {}",
                    t.alpha, self.s
                )));
            }
            if !t.c.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.c * monomial(x, &t.alpha)).sum()
    }

    /// Coefficient vector in table order (repeated keys are summed).
    pub fn coefficients(&self, table: &MultiIndexTable) -> Vec<f64> {
        let mut c = vec![0.0; table.len()];
        for t in &self.terms {
            let j = table.position(&t.alpha).expect("validated degree");
            c[j] += t.c;
        }
        c
    }

    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.c.abs()).sum()
    }
}

/// Output of [`poly_to_repu`].
#[derive(Clone, Debug)]
pub struct PolyRepu {
    pub net: ShallowNet,
    pub kappa: Vec<f64>,
    /// `‖Wᵀκ - c‖_∞`.
    pub residual: f64,
    pub condition: f64,
}

/// Solves `Wᵀκ = c` and emits `κ_i` at `(w_i, b_i)` and `(-1)^s κ_i` at
/// `(-w_i, -b_i)`, for all `i` in that order. The result evaluates to the
/// polynomial everywhere on `ℝ^d` under RePU(s).
pub fn poly_to_repu(poly: &Polynomial, pairs: &BasisPairs) -> Result<PolyRepu> {
    poly.validate()?;
    if poly.s != pairs.s {
        return Err(Error::InvalidArgument(format!(
            "polynomial degree bound s={} does not match the basis (s={})",
            poly.s, pairs.s
        )));
    }
    if poly.d != pairs.d {
        return Err(Error::DimensionMismatch {
            expected: pairs.d,
            got: poly.d,
        });
    }
    let table = pairs.table();
    let c = poly.coefficients(&table);
    let (kappa, residual) = solve_transposed(&assemble_w(pairs, &table), &c, pairs.condition)?;

    let sign = identity_sign(pairs.s);
    let mut atoms = Vec::with_capacity(2 * kappa.len());
    for (k, pr) in kappa.iter().zip(&pairs.pairs) {
        atoms.push(Atom::new(pr.w.clone(), pr.b, *k));
    }
    for (k, pr) in kappa.iter().zip(&pairs.pairs) {
        atoms.push(Atom::new(pr.w.iter().map(|v| -v).collect(), -pr.b, sign * k));
    }
    let measure = DiscreteMeasure::new(pairs.d, atoms)?;
    Ok(PolyRepu {
        net: ShallowNet::new(Activation::Repu(pairs.s), measure)?,
        kappa,
        residual,
        condition: pairs.condition,
    })
}

/// LU with partial pivoting on `Wᵀ`, one step of iterative refinement.
fn solve_transposed(w: &DMatrix<f64>, c: &[f64], condition: f64) -> Result<(Vec<f64>, f64)> {
    let wt = w.transpose();
    let rhs = DVector::from_column_slice(c);
    let lu = wt.clone().lu();
    let ill = |residual| Error::IllConditioned { residual, condition };
    let mut kappa = lu.solve(&rhs).ok_or_else(|| ill(f64::INFINITY))?;
    let r = &rhs - &wt * &kappa;
    if let Some(delta) = lu.solve(&r) {
        kappa += delta;
    }
    let residual = (&wt * &kappa - &rhs).amax();
    let scale = rhs.amax().max(1.0);
    if !residual.is_finite() || residual > RESIDUAL_TOL * scale {
        return Err(ill(residual));
    }
    Ok((kappa.iter().copied().collect(), residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_table() {
        assert_eq!(PRIMES.len(), 64);
        for (i, &p) in PRIMES.iter().enumerate() {
            assert!((2..p).take_while(|q| q * q <= p).all(|q| p % q != 0));
            if i > 0 {
                // consecutive: nothing prime in between
                assert!((PRIMES[i - 1] + 1..p).all(|n| (2..n).any(|q| n % q == 0)));
            }
        }
    }

    #[test]
    fn table_order_and_size() {
        for s in 1..=5u32 {
            for d in 1..=4usize {
                let t = MultiIndexTable::new(s, d).unwrap();
                assert_eq!(t.len() as f64, binomial(s + d as u32, d as u32));
                assert!(t.indices.iter().all(|a| a.iter().sum::<u32>() <= s));
                // sorting oracle: reversed tuples must be lexicographically increasing
                let keys: Vec<Vec<u32>> = t.indices.iter().map(|a| a.iter().rev().copied().collect()).collect();
                let mut sorted = keys.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(keys, sorted);
            }
        }
        let t = MultiIndexTable::new(3, 1).unwrap();
        assert_eq!(t.indices, vec![vec![0], vec![1], vec![2], vec![3]]);
        let t = MultiIndexTable::new(1, 2).unwrap();
        assert_eq!(t.indices, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn pair_counts() {
        assert_eq!(build_pairs(2, 1, BasisScale::Lattice).unwrap().pairs.len(), 3);
        for scale in [BasisScale::Lattice, BasisScale::Compact { ratio: 0.8 }, BasisScale::Classic] {
            let p = build_pairs(1, 1, scale).unwrap();
            assert_eq!(p.pairs.len(), 2);
            assert!(p.pairs[0].w[0] < p.pairs[1].w[0]);
            assert!(p.pairs.iter().all(|q| q.b == 1.0));
        }
    }

    #[test]
    fn w_examples() {
        let pairs = BasisPairs::from_pairs(
            1,
            1,
            vec![Pair { w: vec![0.5], b: 1.0 }, Pair { w: vec![1.0], b: 1.0 }],
        )
        .unwrap();
        let w = assemble_w(&pairs, &pairs.table());
        assert_eq!(w, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, 1.0]));
        let pairs = build_pairs(2, 1, BasisScale::Lattice).unwrap();
        let w = assemble_w(&pairs, &pairs.table());
        for i in 0..3 {
            assert_eq!(w[(i, 1)], 2.0 * pairs.pairs[i].w[0]);
        }
    }

    #[test]
    fn s3_d2_is_invertible() {
        for scale in [BasisScale::Lattice, BasisScale::Compact { ratio: 0.8 }, BasisScale::Classic] {
            let pairs = build_pairs(3, 2, scale).unwrap();
            assert_eq!(pairs.pairs.len(), 10);
            let det = assemble_w(&pairs, &pairs.table()).lu().determinant();
            assert!(det != 0.0 && det.is_finite(), "{scale}: {det}");
        }
        assert!(build_pairs(3, 2, BasisScale::Compact { ratio: 0.8 }).unwrap().condition < 1e8);
    }

    #[test]
    fn sign_law() {
        for s in 1..=5u32 {
            let r = Activation::Repu(s);
            for i in 0..1000 {
                let z = -2.0 + 4.0 * i as f64 / 999.0;
                assert_eq!(z.powi(s as i32) - r.value(z) - identity_sign(s) * r.value(-z), 0.0);
            }
        }
    }

    #[test]
    fn identity_poly() {
        let poly = Polynomial::new(1, 1, vec![Term { alpha: vec![1], c: 1.0 }]).unwrap();
        let out = poly_to_repu(&poly, &build_pairs(1, 1, BasisScale::Lattice).unwrap()).unwrap();
        assert_eq!(out.net.measure.len(), 4);
        for i in 0..=60 {
            let z = -3.0 + 0.1 * i as f64;
            assert!((out.net.evaluate(&[z]).unwrap() - z).abs() < 1e-10);
        }
        let sq = Polynomial::new(1, 2, vec![Term { alpha: vec![2], c: 1.0 }]).unwrap();
        let out = poly_to_repu(&sq, &build_pairs(2, 1, BasisScale::Lattice).unwrap()).unwrap();
        for i in 0..=60 {
            let z = -3.0 + 0.1 * i as f64;
            assert!((out.net.evaluate(&[z]).unwrap() - z * z).abs() < 1e-10);
        }
    }

    #[test]
    fn mismatches() {
        let poly = Polynomial::new(1, 2, vec![]).unwrap();
        assert!(poly_to_repu(&poly, &build_pairs(3, 1, BasisScale::Lattice).unwrap()).is_err());
        assert!(Polynomial::new(1, 2, vec![Term { alpha: vec![3], c: 1.0 }]).is_err());
        assert!(Polynomial::new(2, 2, vec![Term { alpha: vec![1], c: 1.0 }]).is_err());
        assert!(build_pairs(9, 1, BasisScale::Lattice).is_err());
        assert!("compact:1.5".parse::<BasisScale>().is_err());
        assert_eq!("compact:0.5".parse::<BasisScale>().unwrap(), BasisScale::Compact { ratio: 0.5 });
    }
}
