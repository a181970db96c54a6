use super::{finish, neg, EmbeddingCertificate};
use crate::activation::{Activation, Side};
use crate::error::{Error, Result};
use crate::measure::{Atom, ShallowNet};
use crate::poly::{factorial, identity_sign, poly_to_repu, BasisPairs, Polynomial, Term};
use crate::quadrature::QuadratureSpec;

/// Derivative that tolerates a kink (a null set for the quadrature).
fn deriv(a: &Activation, k: usize, z: f64) -> Result<f64> {
    match a.derivative(k, z) {
        Err(Error::AmbiguousAtKink { .. }) => a.derivative_branch(k, z, Side::Pos),
        other => other,
    }
}

/// `|φ(y)| + 2|∂φ(y)| + 2(1+|y|) ∫|D²φ|`.
pub fn gamma(a: &Activation, y: f64) -> Result<f64> {
    let l = a.deriv_l1(2)?.value;
    Ok(a.value(y).abs() + 2.0 * deriv(a, 1, y)?.abs() + 2.0 * (1.0 + y.abs()) * l)
}

/// Constant certified by [`taylor_to_relu`] at expansion point `y`:
/// `|φ(y)| + (2+|y|)|∂φ(y)| + 2(1+|y|) ∫|D²φ|`. The extra `|y||∂φ(y)|`
/// pays for the constant atom carrying `φ(y) - y ∂φ(y)`; at `y = 0` this is
/// [`gamma`].
pub fn taylor_constant(a: &Activation, y: f64) -> Result<f64> {
    let l = a.deriv_l1(2)?.value;
    let d1 = deriv(a, 1, y)?.abs();
    Ok(a.value(y).abs() + (2.0 + y.abs()) * d1 + 2.0 * (1.0 + y.abs()) * l)
}

/// `{-5.0, -4.9, ..., 5.0}`.
pub fn default_expansion_grid() -> Vec<f64> {
    (-50..=50).map(|i| i as f64 / 10.0).collect()
}

/// Grid argmin of [`taylor_constant`]; ties go to the smallest `|y|`.
pub fn select_expansion_point(a: &Activation, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() || grid.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidArgument("expansion grid must be finite and non-empty".into()));
    }
    let mut best = (f64::INFINITY, f64::INFINITY);
    for &y in grid {
        let c = taylor_constant(a, y)?;
        if c < best.0 || (c == best.0 && y.abs() < best.1.abs()) {
            best = (c, y);
        }
    }
    Ok(best.1)
}

/// A `C¹` activation with `D²φ ∈ L¹` to ReLU by the second-order Taylor
/// expansion at `y`:
/// `φ(z) = φ(y) + ∂φ(y)(z - y) + ∫ D²φ(t) (z - t)₊ dt` (and its mirror).
///
/// With `θ = ‖w‖₁ + |b| + |y|` each atom `(w, b, m)` contributes
/// `(w, b)` with mass `∂φ(y) m`, `(-w, -b)` with `-∂φ(y) m`,
/// `(w, b - θu_k - y)` with `θ D²φ(y + θu_k) ω_k m` and
/// `(-w, -b - θu_k + y)` with `θ D²φ(y - θu_k) ω_k m`; one atom `(0, 1)`
/// carries `(φ(y) - y ∂φ(y)) μ(Ω)`.
pub fn taylor_to_relu(
    net: &ShallowNet,
    y: f64,
    quad: &QuadratureSpec,
) -> Result<(ShallowNet, EmbeddingCertificate)> {
    let a = &net.activation;
    if !y.is_finite() {
        return Err(Error::NonFinite("expansion point"));
    }
    let l1 = a.deriv_l1(2)?;
    let nodes = quad.realize()?;
    let d = net.d();
    let phi = a.value(y);
    let d1 = deriv(a, 1, y)?;
    let atoms_in = &net.measure.atoms;

    let mut atoms = Vec::with_capacity(1 + atoms_in.len() * (2 + 2 * nodes.len()));
    atoms.push(Atom::new(vec![0.0; d], 1.0, (phi - y * d1) * net.total_mass()));
    for at in atoms_in {
        atoms.push(Atom::new(at.w.clone(), at.b, d1 * at.mass));
    }
    for at in atoms_in {
        atoms.push(Atom::new(neg(&at.w), -at.b, -d1 * at.mass));
    }
    for at in atoms_in {
        let theta = at.reach() + y.abs();
        for (u, w) in nodes.iter() {
            let mass = theta * deriv(a, 2, y + theta * u)? * w * at.mass;
            atoms.push(Atom::new(at.w.clone(), at.b - theta * u - y, mass));
        }
    }
    for at in atoms_in {
        let theta = at.reach() + y.abs();
        for (u, w) in nodes.iter() {
            let mass = theta * deriv(a, 2, y - theta * u)? * w * at.mass;
            atoms.push(Atom::new(neg(&at.w), -at.b - theta * u + y, mass));
        }
    }
    let constant = taylor_constant(a, y)?;
    let notes = vec![
        format!("{a} -> relu, expansion point y = {y}"),
        format!("∫|D²{a}| = {} ({:?})", l1.value, l1.method),
    ];
    let (out, mut cert) = finish(
        Activation::relu(),
        d,
        atoms,
        net.representation_norm(),
        constant,
        Some(*quad),
        notes,
    )?;
    cert.trusted = l1.is_trusted();
    Ok((out, cert))
}

/// A `C^{s+1}` activation to RePU(s) on the bounded set of atoms with reach
/// `<= radius`.
///
/// The degree-`s` Taylor polynomial of `φ` at 0 is written as a univariate
/// RePU(s) measure `Σ κ_j δ_(ω_j, β_j)` and pushed through
/// `((w,b),(ω,β)) ↦ (ωw, ωb + β)`. The remainder
/// `∫₀^z D^{s+1}φ(t) (z-t)^s / s! dt` becomes `(w, b - θt_k)` with mass
/// `θ D^{s+1}φ(θt_k) ω_k m / s!` and `(-w, -b - θt_k)` with mass
/// `(-1)^{s-1} θ D^{s+1}φ(-θt_k) ω_k m / s!`.
///
/// Constant `(1+R)^{s-1} (S + 2^s/s! ∫_{-R}^{R} |D^{s+1}φ|)` with `S` the
/// RePU(s) norm of the univariate series measure.
pub fn taylor_to_repu_s(
    net: &ShallowNet,
    s: u32,
    radius: f64,
    quad: &QuadratureSpec,
    pairs: &BasisPairs,
) -> Result<(ShallowNet, EmbeddingCertificate)> {
    let a = &net.activation;
    if s == 0 {
        return Err(Error::InvalidArgument("target RePU order must be >= 1".into()));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be finite and >= 0, got {radius}")));
    }
    if pairs.s != s || pairs.d != 1 {
        return Err(Error::InvalidArgument(format!(
            "basis must be univariate of order {s} (got s={}, d={})",
            pairs.s, pairs.d
        )));
    }
    for (index, at) in net.measure.atoms.iter().enumerate() {
        let reach = at.reach();
        if reach > radius {
            return Err(Error::AtomOutsideRadius { index, reach, radius });
        }
    }
    let order = s as usize + 1;
    if order > a.max_order() {
        return Err(Error::MissingOracle(format!(
            "{a} declares derivatives up to order {}, order {order} needed",
            a.max_order()
        )));
    }

    let series = Polynomial::new(
        1,
        s,
        (0..=s)
            .map(|k| Ok(Term { alpha: vec![k], c: a.derivative(k as usize, 0.0)? / factorial(k) }))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let series_net = poly_to_repu(&series, pairs)?;
    let series_atoms = &series_net.net.measure.atoms;
    let nodes = quad.realize()?;
    let atoms_in = &net.measure.atoms;
    let d = net.d();

    let mut atoms = Vec::with_capacity(atoms_in.len() * (series_atoms.len() + 2 * nodes.len()));
    for at in atoms_in {
        for g in series_atoms {
            let (om, be) = (g.w[0], g.b);
            atoms.push(Atom::new(
                at.w.iter().map(|v| om * v).collect(),
                om * at.b + be,
                g.mass * at.mass,
            ));
        }
    }
    let inv_fact = 1.0 / factorial(s);
    for at in atoms_in {
        let theta = at.reach();
        for (t, w) in nodes.iter() {
            let mass = theta * a.derivative(order, theta * t)? * inv_fact * w * at.mass;
            atoms.push(Atom::new(at.w.clone(), at.b - theta * t, mass));
        }
    }
    let reflect = -identity_sign(s);
    for at in atoms_in {
        let theta = at.reach();
        for (t, w) in nodes.iter() {
            let mass = reflect * theta * a.derivative(order, -theta * t)? * inv_fact * w * at.mass;
            atoms.push(Atom::new(neg(&at.w), -at.b - theta * t, mass));
        }
    }

    let series_norm = series_net.net.measure.repu_norm(s);
    let local = a.deriv_l1_on(order, -radius, radius)?;
    let constant = (1.0 + radius).powi(s as i32 - 1)
        * (series_norm + 2f64.powi(s as i32) * inv_fact * local.value);
    let notes = vec![
        format!("{a} -> repu{s} on radius R = {radius}"),
        format!(
            "series measure: {} atoms, repu{s} norm {series_norm}, solve residual {:e}, cond(W) {:e}",
            series_atoms.len(),
            series_net.residual,
            series_net.condition
        ),
        format!("∫_[-R,R] |D^{order}{a}| = {}", local.value),
    ];
    finish(
        Activation::Repu(s),
        d,
        atoms,
        net.representation_norm(),
        constant,
        Some(*quad),
        notes,
    )
}
