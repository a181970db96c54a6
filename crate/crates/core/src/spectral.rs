//! Finite spectral representations `f(x) = Σ c_j e^{i⟨x, ξ_j⟩}` compiled into
//! RePU(s) networks.
//!
//! Per conjugate pair `{ξ, -ξ}` with `ρ = ‖ξ‖₁` and `ξ̂ = ξ/ρ`, the function
//! `c₊ e^{iρv} + c₋ e^{-iρv}` of `v = ⟨x, ξ̂⟩ ∈ [-1, 1]` splits into its
//! degree-`s` Taylor polynomial (collected over all pairs and compiled with
//! [`poly_to_repu`]) and the integral remainder
//! `∫₀¹ (iρ)^{s+1}/s! e^{±iρu} repu_s(±v - u) du`, discretized on the nodes of
//! `[0, 1]` along both directions `±ξ̂`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::measure::{l1, Atom, NormKind, NormReport, ShallowNet};
use crate::poly::{factorial, identity_sign, poly_to_repu, BasisPairs, MultiIndexTable, Polynomial, Term};
use crate::pushforward::{finish, EmbeddingCertificate};
use crate::quadrature::QuadratureSpec;

/// Tolerance of the conjugate-symmetry and realness checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralTerm {
    pub xi: Vec<f64>,
    pub re: f64,
    pub im: f64,
}

impl SpectralTerm {
    pub fn new(xi: Vec<f64>, c: Complex64) -> Self {
        Self { xi, re: c.re, im: c.im }
    }

    pub fn c(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRep {
    pub d: usize,
    pub terms: Vec<SpectralTerm>,
}

/// Index of the `ξ` term and of its `-ξ` partner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConjugatePair {
    pub plus: usize,
    pub minus: usize,
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= SYMMETRY_TOL * a.norm().max(b.norm()).max(1.0)
}

impl SpectralRep {
    pub fn new(d: usize, terms: Vec<SpectralTerm>) -> Result<Self> {
        let r = Self { d, terms };
        r.validate()?;
        Ok(r)
    }

    /// `cos(⟨x, ξ⟩)`.
    pub fn cosine(xi: Vec<f64>) -> Result<Self> {
        let minus = xi.iter().map(|v| -v).collect();
        Self::new(
            xi.len(),
            vec![
                SpectralTerm::new(xi, Complex64::new(0.5, 0.0)),
                SpectralTerm::new(minus, Complex64::new(0.5, 0.0)),
            ],
        )
    }

    /// `sin(⟨x, ξ⟩)`.
    pub fn sine(xi: Vec<f64>) -> Result<Self> {
        let minus = xi.iter().map(|v| -v).collect();
        Self::new(
            xi.len(),
            vec![
                SpectralTerm::new(xi, Complex64::new(0.0, -0.5)),
                SpectralTerm::new(minus, Complex64::new(0.0, 0.5)),
            ],
        )
    }

    /// Checks conjugate symmetry and returns the pairs `{ξ, -ξ}`, `ξ ≠ 0`,
    /// in order of first appearance.
    pub fn pairs(&self) -> Result<Vec<ConjugatePair>> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("spectral representation needs d >= 1".into()));
        }
        let mut zero_seen = false;
        let mut partner = vec![usize::MAX; self.terms.len()];
        let mut out = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            if t.xi.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: t.xi.len(),
                });
            }
            if !(t.re.is_finite() && t.im.is_finite() && t.xi.iter().all(|v| v.is_finite())) {
                return Err(Error::NonFinite("spectral term"));
            }
            if self.terms[..i].iter().any(|u| u.xi == t.xi) {
                return Err(Error::InvalidArgument(format!("frequency {:?} listed twice", t.xi)));
            }
            if t.xi.iter().all(|&v| v == 0.0) {
                if zero_seen {
                    return Err(Error::SymmetryViolated("more than one ξ = 0 term".into()));
                }
                zero_seen = true;
                if t.im.abs() > SYMMETRY_TOL * t.re.abs().max(1.0) {
                    return Err(Error::SymmetryViolated(format!(
                        "ξ = 0 coefficient must be real, got im = {}",
                        t.im
                    )));
                }
                continue;
            }
            if partner[i] != usize::MAX {
                continue;
            }
            let j = self
                .terms
                .iter()
                .position(|u| u.xi.iter().zip(&t.xi).all(|(a, b)| *a == -*b))
                .ok_or_else(|| Error::SymmetryViolated(format!("no term at -ξ for ξ = {:?}", t.xi)))?;
            if !close(self.terms[j].c(), t.c().conj()) {
                return Err(Error::SymmetryViolated(format!(
                    "c(-ξ) = {} is not conj(c(ξ)) = {} for ξ = {:?}",
                    self.terms[j].c(),
                    t.c().conj(),
                    t.xi
                )));
            }
            partner[i] = j;
            partner[j] = i;
            out.push(ConjugatePair { plus: i, minus: j });
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.pairs().map(|_| ())
    }

    /// `Σ c_j e^{i⟨x, ξ_j⟩}` (complex; the imaginary part is round-off).
    pub fn evaluate_complex(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let phase: f64 = t.xi.iter().zip(x).map(|(a, b)| a * b).sum();
                t.c() * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.evaluate_complex(x).re
    }
}

/// `Σ_j (1 + ‖ξ_j‖₁)^s |c_j|`.
pub fn spectral_norm(rep: &SpectralRep, s: u32) -> f64 {
    rep.terms
        .iter()
        .map(|t| (1.0 + l1(&t.xi)).powi(s as i32) * t.c().norm())
        .sum()
}

pub fn spectral_norm_report(rep: &SpectralRep, s: u32) -> NormReport {
    NormReport {
        kind: NormKind::SpectralForm,
        s: Some(s),
        value: spectral_norm(rep, s),
        total_variation: rep.terms.iter().map(|t| t.c().norm()).sum(),
        theta_max: rep.terms.iter().map(|t| l1(&t.xi)).fold(0.0, f64::max),
    }
}

/// Degree-`s` Taylor polynomial at 0: the coefficient of `x^α` is
/// `Re(Σ_j c_j (iξ_j)^α) / α!`.
pub fn taylor_coeffs(rep: &SpectralRep, s: u32) -> Result<Polynomial> {
    rep.validate()?;
    let table = MultiIndexTable::new(s, rep.d)?;
    let mut terms = Vec::with_capacity(table.len());
    for alpha in &table.indices {
        let deg: u32 = alpha.iter().sum();
        let ipow = Complex64::i().powu(deg);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for t in &rep.terms {
            let xa: f64 = t.xi.iter().zip(alpha).map(|(x, &a)| x.powi(a as i32)).product();
            sum += t.c() * ipow * xa;
            scale += t.c().norm() * xa.abs();
        }
        if sum.im.abs() > SYMMETRY_TOL * scale.max(1.0) {
            return Err(Error::SymmetryViolated(format!(
                "Taylor coefficient of x^{alpha:?} has imaginary part {}",
                sum.im
            )));
        }
        let alpha_fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        terms.push(Term {
            alpha: alpha.clone(),
            c: sum.re / alpha_fact,
        });
    }
    Polynomial::new(rep.d, s, terms)
}

/// Compiles `rep` into a RePU(s) net on `[-1, 1]^d`.
///
/// The certificate's constant is the measured ratio
/// `‖target‖_{repu_s} / spectral_norm(rep, s+1)`.
pub fn spectral_to_repu(
    rep: &SpectralRep,
    s: u32,
    pairs: &BasisPairs,
    quad: &QuadratureSpec,
) -> Result<(ShallowNet, EmbeddingCertificate)> {
    let conj_pairs = rep.pairs()?;
    if pairs.s != s || pairs.d != rep.d {
        return Err(Error::InvalidArgument(format!(
            "basis pairs (s={}, d={}) do not match s={s}, d={}",
            pairs.s, pairs.d, rep.d
        )));
    }
    let series = poly_to_repu(&taylor_coeffs(rep, s)?, pairs)?;
    let nodes = quad.realize()?;
    let mut atoms: Vec<Atom> = series.net.measure.atoms.clone();
    atoms.reserve(2 * conj_pairs.len() * nodes.len());

    let reflect = -identity_sign(s);
    let inv_fact = 1.0 / factorial(s);
    for cp in &conj_pairs {
        let (tp, tm) = (&rep.terms[cp.plus], &rep.terms[cp.minus]);
        let rho = l1(&tp.xi);
        let dir: Vec<f64> = tp.xi.iter().map(|v| v / rho).collect();
        let amp = Complex64::i().powu(s + 1) * rho.powi(s as i32 + 1) * inv_fact;
        let (cp_, cm_) = (tp.c(), tm.c());
        let density = |a: Complex64, b: Complex64, u: f64| {
            let e = Complex64::from_polar(1.0, rho * u);
            (amp * (a * e + reflect * b * e.conj())).re
        };
        for (u, w) in nodes.iter() {
            atoms.push(Atom::new(dir.clone(), -u, w * density(cp_, cm_, u)));
        }
        let mdir: Vec<f64> = dir.iter().map(|v| -v).collect();
        for (u, w) in nodes.iter() {
            atoms.push(Atom::new(mdir.clone(), -u, w * density(cm_, cp_, u)));
        }
    }

    let source = spectral_norm_report(rep, s + 1);
    let notes = vec![
        format!(
            "series: {} atoms, solve residual {:e}, cond(W) {:e}",
            series.net.measure.len(),
            series.residual,
            series.condition
        ),
        format!("remainder: {} conjugate pairs x 2 directions x {} nodes", conj_pairs.len(), nodes.len()),
        "constant is the run-measured ratio target / spectral_norm(rep, s+1)".into(),
    ];
    let (net, mut cert) = finish(Activation::Repu(s), rep.d, atoms, source, f64::NAN, Some(*quad), notes)?;
    cert.constant = if source.value > 0.0 {
        cert.target_norm.value / source.value
    } else {
        0.0
    };
    cert.slack = cert.target_norm.value - cert.constant * source.value;
    Ok((net, cert))
}
