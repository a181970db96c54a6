use super::{finish, neg, EmbeddingCertificate};
use crate::activation::{Activation, Side};
use crate::error::{Error, Result};
use crate::measure::{Atom, ShallowNet};
use crate::quadrature::QuadratureSpec;

/// `γ̃(φ) = |φ(0)| + |∂φ₊(0)| + |∂φ₋(0)| + 2∫₀^∞|∂²φ₊| + 2∫_{-∞}^0|∂²φ₋|`.
pub fn piecewise_gamma(a: &Activation) -> Result<f64> {
    let Activation::Piecewise(p) = a else {
        return Err(Error::WrongActivation {
            expected: "piecewise".into(),
            found: a.to_string(),
        });
    };
    let (pos, negb) = (p.branch(Side::Pos), p.branch(Side::Neg));
    Ok(a.value(0.0).abs()
        + pos.derivative(1, 0.0).abs()
        + negb.derivative(1, 0.0).abs()
        + 2.0 * p.branch_l1(2, Side::Pos)?.value
        + 2.0 * p.branch_l1(2, Side::Neg)?.value)
}

/// An activation smooth away from 0 to ReLU, expanding each branch at 0.
///
/// With `θ = ‖w‖₁ + |b|`: one atom `(0, 1)` carries `φ(0) μ(Ω)`; each atom
/// contributes `(w, b)` with mass `∂φ₊(0) m`, `(-w, -b)` with
/// `-∂φ₋(0) m`, `(w, b - θu_k)` with `θ ∂²φ₊(θu_k) ω_k m` and
/// `(-w, -b - θu_k)` with `θ ∂²φ₋(-θu_k) ω_k m`. Constant [`piecewise_gamma`].
pub fn piecewise_to_relu(net: &ShallowNet, quad: &QuadratureSpec) -> Result<(ShallowNet, EmbeddingCertificate)> {
    let a = &net.activation;
    let constant = piecewise_gamma(a)?;
    let Activation::Piecewise(p) = a else { unreachable!() };
    let (pos, negb) = (p.branch(Side::Pos), p.branch(Side::Neg));
    let nodes = quad.realize()?;
    let d = net.d();
    let atoms_in = &net.measure.atoms;
    let (d1p, d1n) = (pos.derivative(1, 0.0), negb.derivative(1, 0.0));

    let mut atoms = Vec::with_capacity(1 + atoms_in.len() * (2 + 2 * nodes.len()));
    atoms.push(Atom::new(vec![0.0; d], 1.0, a.value(0.0) * net.total_mass()));
    for at in atoms_in {
        atoms.push(Atom::new(at.w.clone(), at.b, d1p * at.mass));
    }
    for at in atoms_in {
        atoms.push(Atom::new(neg(&at.w), -at.b, -d1n * at.mass));
    }
    for at in atoms_in {
        let theta = at.reach();
        for (u, w) in nodes.iter() {
            let mass = theta * pos.derivative(2, theta * u) * w * at.mass;
            atoms.push(Atom::new(at.w.clone(), at.b - theta * u, mass));
        }
    }
    for at in atoms_in {
        let theta = at.reach();
        for (u, w) in nodes.iter() {
            let mass = theta * negb.derivative(2, -theta * u) * w * at.mass;
            atoms.push(Atom::new(neg(&at.w), -at.b - theta * u, mass));
        }
    }
    let notes = vec![format!("{a} -> relu, branches expanded at 0")];
    finish(
        Activation::relu(),
        d,
        atoms,
        net.representation_norm(),
        constant,
        Some(*quad),
        notes,
    )
}
