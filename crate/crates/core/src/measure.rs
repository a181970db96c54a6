//! Finite signed atomic measures on `ℝ^{d+1}` and the shallow networks they
//! define.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};

/// A Dirac mass `mass · δ_(w, b)`: one neuron.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub w: Vec<f64>,
    pub b: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(w: Vec<f64>, b: f64, mass: f64) -> Self {
        Self { w, b, mass }
    }

    /// `‖w‖₁ + |b|`, the largest `|⟨x,w⟩ + b|` over `x ∈ [-1,1]^d`.
    pub fn reach(&self) -> f64 {
        l1(&self.w) + self.b.abs()
    }

    /// `⟨x, w⟩ + b`, summed left to right.
    #[inline]
    pub fn preactivation(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).fold(0.0, |acc, (w, x)| acc + w * x) + self.b
    }

    fn is_finite(&self) -> bool {
        self.b.is_finite() && self.mass.is_finite() && self.w.iter().all(|v| v.is_finite())
    }
}

pub fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub d: usize,
    pub atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(d: usize, atoms: Vec<Atom>) -> Result<Self> {
        let m = Self { d, atoms };
        m.validate()?;
        Ok(m)
    }

    pub fn empty(d: usize) -> Self {
        Self { d, atoms: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("measure dimension d must be positive".into()));
        }
        for a in &self.atoms {
            if a.w.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: a.w.len(),
                });
            }
            if !a.is_finite() {
                return Err(Error::NonFinite("atom"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `μ(Ω) = Σ mass`, signed, in atom order.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().fold(0.0, |acc, a| acc + a.mass)
    }

    /// `|μ|(Ω) = Σ |mass|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().fold(0.0, |acc, a| acc + a.mass.abs())
    }

    pub fn theta_max(&self) -> f64 {
        self.atoms.iter().map(Atom::reach).fold(0.0, f64::max)
    }

    /// `Σ |mass| (1 + ‖w‖₁ + |b|)`.
    pub fn lipschitz_norm(&self) -> f64 {
        self.atoms
            .iter()
            .fold(0.0, |acc, a| acc + a.mass.abs() * (1.0 + a.reach()))
    }

    /// `Σ |mass| (‖w‖₁ + |b|)^s`.
    pub fn repu_norm(&self, s: u32) -> f64 {
        self.atoms
            .iter()
            .fold(0.0, |acc, a| acc + a.mass.abs() * a.reach().powi(s as i32))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            d: self.d,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.w.clone(), a.b, c * a.mass))
                .collect(),
        }
    }

    /// Concatenation `self + other` (atoms of `self` first).
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(Self { d: self.d, atoms })
    }

    /// Merges atoms with identical `(w, b)` into the first occurrence, then
    /// drops atoms with `|mass| <= tol`. `sup_sigma(θ)` bounds `|σ|` on
    /// `[-θ, θ]` and feeds the reported evaluation bound on `[-1,1]^d`.
    pub fn prune_with(&self, tol: f64, sup_sigma: impl Fn(f64) -> f64) -> Result<Pruned> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("prune tolerance must be >= 0, got {tol}")));
        }
        let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(self.atoms.len());
        let mut merged_atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        let mut merged = 0;
        for a in &self.atoms {
            let key: Vec<u64> = a.w.iter().chain(std::iter::once(&a.b)).map(|v| canonical_bits(*v)).collect();
            match index.get(&key) {
                Some(&i) => {
                    merged_atoms[i].mass += a.mass;
                    merged += 1;
                }
                None => {
                    index.insert(key, merged_atoms.len());
                    merged_atoms.push(a.clone());
                }
            }
        }
        let mut dropped = 0;
        let mut error_bound = 0.0;
        let atoms = merged_atoms
            .into_iter()
            .filter(|a| {
                if a.mass.abs() <= tol {
                    dropped += 1;
                    if a.mass != 0.0 {
                        error_bound += a.mass.abs() * sup_sigma(a.reach());
                    }
                    false
                } else {
                    true
                }
            })
            .collect();
        Ok(Pruned {
            measure: Self { d: self.d, atoms },
            dropped,
            merged,
            error_bound,
        })
    }
}

fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// Result of [`DiscreteMeasure::prune_with`] / [`ShallowNet::prune`].
#[derive(Clone, Debug)]
pub struct Pruned {
    pub measure: DiscreteMeasure,
    pub dropped: usize,
    pub merged: usize,
    /// Bound on `sup_{x ∈ [-1,1]^d} |f_before(x) - f_after(x)|`.
    pub error_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    LipschitzForm,
    RepuForm,
    /// `Σ (1 + ‖ξ‖₁)^s |c|` of a spectral representation.
    SpectralForm,
}

/// A representation norm: the Barron integrand evaluated on one concrete
/// measure, hence an upper bound on the Barron norm of the function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    pub value: f64,
    pub total_variation: f64,
    pub theta_max: f64,
}

impl NormReport {
    pub fn lipschitz(m: &DiscreteMeasure) -> Self {
        Self {
            kind: NormKind::LipschitzForm,
            s: None,
            value: m.lipschitz_norm(),
            total_variation: m.total_variation(),
            theta_max: m.theta_max(),
        }
    }

    pub fn repu(m: &DiscreteMeasure, s: u32) -> Self {
        Self {
            kind: NormKind::RepuForm,
            s: Some(s),
            value: m.repu_norm(s),
            total_variation: m.total_variation(),
            theta_max: m.theta_max(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Summation {
    /// Plain left-to-right sum in atom order.
    #[default]
    Plain,
    /// Neumaier-compensated sum in atom order.
    Compensated,
}

/// `f(x) = Σ mass · σ(⟨x, w⟩ + b)`.
#[derive(Clone, Debug)]
pub struct ShallowNet {
    pub activation: Activation,
    pub measure: DiscreteMeasure,
}

impl ShallowNet {
    pub fn new(activation: Activation, measure: DiscreteMeasure) -> Result<Self> {
        measure.validate()?;
        if let Activation::Repu(0) = activation {
            return Err(Error::InvalidArgument("RePU order must be >= 1".into()));
        }
        Ok(Self { activation, measure })
    }

    pub fn d(&self) -> usize {
        self.measure.d
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.evaluate_with(x, Summation::Plain)
    }

    pub fn evaluate_with(&self, x: &[f64], summation: Summation) -> Result<f64> {
        if x.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("input point"));
        }
        Ok(match summation {
            Summation::Plain => self.eval_unchecked(x),
            Summation::Compensated => {
                let (mut sum, mut comp) = (0.0f64, 0.0f64);
                for a in &self.measure.atoms {
                    let term = a.mass * self.activation.value(a.preactivation(x));
                    let t = sum + term;
                    comp += if sum.abs() >= term.abs() {
                        (sum - t) + term
                    } else {
                        (term - t) + sum
                    };
                    sum = t;
                }
                sum + comp
            }
        })
    }

    /// Plain evaluation without argument checks.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.measure.atoms.iter().fold(0.0, |acc, a| {
            acc + a.mass * self.activation.value(a.preactivation(x))
        })
    }

    /// Lipschitz form for everything except RePU(s), which gets the
    /// RePU form of order s (ReLU is RePU(1)).
    pub fn representation_norm(&self) -> NormReport {
        match self.activation {
            Activation::Repu(s) => NormReport::repu(&self.measure, s),
            _ => NormReport::lipschitz(&self.measure),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.measure.total_mass()
    }

    pub fn prune(&self, tol: f64) -> Result<(ShallowNet, Pruned)> {
        let pruned = self.measure.prune_with(tol, |r| self.activation.sup_abs_on(r))?;
        let net = ShallowNet {
            activation: self.activation.clone(),
            measure: pruned.measure.clone(),
        };
        Ok((net, pruned))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(act: Activation, atoms: Vec<(Vec<f64>, f64, f64)>) -> ShallowNet {
        let d = atoms.first().map_or(1, |a| a.0.len());
        let atoms = atoms.into_iter().map(|(w, b, m)| Atom::new(w, b, m)).collect();
        ShallowNet::new(act, DiscreteMeasure::new(d, atoms).unwrap()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let empty = ShallowNet::new(Activation::tanh(), DiscreteMeasure::empty(2)).unwrap();
        assert_eq!(empty.evaluate(&[0.3, -0.2]).unwrap(), 0.0);
        let r = net(Activation::relu(), vec![(vec![1.0], 0.0, 1.0)]);
        assert_eq!(r.evaluate(&[0.5]).unwrap(), 0.5);
        let sq = net(
            Activation::repu(2).unwrap(),
            vec![(vec![1.0], 0.0, 1.0), (vec![-1.0], 0.0, 1.0)],
        );
        let v = sq.evaluate(&[-0.7]).unwrap();
        assert!((v - 0.49).abs() < 1e-15);
        assert!(matches!(
            r.evaluate(&[0.1, 0.2]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn norm_examples() {
        let r = net(Activation::relu(), vec![(vec![1.0], 0.0, 2.0)]);
        let n = r.representation_norm();
        assert_eq!((n.kind, n.s, n.value), (NormKind::RepuForm, Some(1), 2.0));
        let t = net(Activation::tanh(), vec![(vec![3.0], 1.0, -1.0)]);
        let n = t.representation_norm();
        assert_eq!((n.kind, n.value, n.theta_max), (NormKind::LipschitzForm, 5.0, 4.0));
        let q = net(
            Activation::repu(2).unwrap(),
            vec![(vec![1.0], 1.0, 1.0), (vec![2.0], 0.0, 0.5)],
        );
        assert_eq!(q.representation_norm().value, 6.0);
        // degenerate atom is legal and contributes nothing
        let z = net(Activation::repu(3).unwrap(), vec![(vec![0.0], 0.0, 4.0)]);
        assert_eq!(z.representation_norm().value, 0.0);
        assert_eq!(z.evaluate(&[0.9]).unwrap(), 0.0);
    }

    #[test]
    fn total_mass_examples() {
        let m = DiscreteMeasure::new(
            1,
            vec![Atom::new(vec![1.0], 0.0, 1.0), Atom::new(vec![2.0], 0.0, -1.0)],
        )
        .unwrap();
        assert_eq!(m.total_mass(), 0.0);
        let m = DiscreteMeasure::new(
            1,
            vec![Atom::new(vec![1.0], 0.0, 0.25), Atom::new(vec![2.0], 0.0, 0.75)],
        )
        .unwrap();
        assert_eq!(m.total_mass(), 1.0);
    }

    #[test]
    fn validation() {
        assert!(DiscreteMeasure::new(2, vec![Atom::new(vec![1.0], 0.0, 1.0)]).is_err());
        assert!(DiscreteMeasure::new(1, vec![Atom::new(vec![f64::NAN], 0.0, 1.0)]).is_err());
        assert!(DiscreteMeasure::new(0, vec![]).is_err());
        assert!(ShallowNet::new(Activation::Repu(0), DiscreteMeasure::empty(1)).is_err());
    }

    #[test]
    fn prune_merges_then_drops() {
        let r = net(
            Activation::relu(),
            vec![
                (vec![1.0], 0.0, 1.0),
                (vec![0.5], -0.0, 3.0),
                (vec![1.0], -0.0, -1.0),
                (vec![0.5], 0.0, 1e-12),
            ],
        );
        let (p, rep) = r.prune(0.0).unwrap();
        assert_eq!(rep.merged, 2);
        assert_eq!(rep.dropped, 1);
        assert_eq!(rep.error_bound, 0.0);
        assert_eq!(p.measure.atoms, vec![Atom::new(vec![0.5], -0.0, 3.0 + 1e-12)]);
        let (p, rep) = r.prune(10.0).unwrap();
        assert!(p.measure.is_empty());
        assert!((rep.error_bound - 0.5 * (3.0 + 1e-12)).abs() < 1e-12);
        assert!(r.prune(-1.0).is_err());
    }

    #[test]
    fn compensated_summation_agrees() {
        let r = net(
            Activation::tanh(),
            (0..100)
                .map(|i| (vec![0.01 * i as f64], -0.3, if i % 2 == 0 { 1e8 } else { -1e8 + 1.0 }))
                .collect(),
        );
        let a = r.evaluate(&[0.4]).unwrap();
        let b = r.evaluate_with(&[0.4], Summation::Compensated).unwrap();
        assert!((a - b).abs() < 1e-6 * b.abs().max(1.0));
    }
}
