use super::{finish, EmbeddingCertificate};
use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::measure::{Atom, ShallowNet};
use crate::quadrature::QuadratureSpec;

/// RePU(t+1) to RePU(t) through
/// `repu_{t+1}(z) = (t+1) ∫₀^θ repu_t(z - u) du` for `|z| <= θ`.
///
/// Every atom with reach `θ > 0` becomes `N` atoms `(w, b - θ v_k)` with mass
/// `(t+1) θ ω_k m`; atoms with `θ = 0` are the zero function and are dropped.
/// Constant `2^{t+1} - 1`.
pub fn repu_lower(net: &ShallowNet, quad: &QuadratureSpec) -> Result<(ShallowNet, EmbeddingCertificate)> {
    let s = match net.activation {
        Activation::Repu(s) if s >= 2 => s,
        _ => {
            return Err(Error::WrongActivation {
                expected: "repu(s) with s >= 2".into(),
                found: net.activation.to_string(),
            })
        }
    };
    let t = s - 1;
    let nodes = quad.realize()?;
    let scale = s as f64;
    let mut atoms = Vec::with_capacity(net.measure.len() * nodes.len());
    let mut degenerate = 0;
    for a in &net.measure.atoms {
        let theta = a.reach();
        if theta == 0.0 {
            degenerate += 1;
            continue;
        }
        for (v, w) in nodes.iter() {
            atoms.push(Atom::new(a.w.clone(), a.b - theta * v, scale * theta * w * a.mass));
        }
    }
    let constant = 2f64.powi(s as i32) - 1.0;
    let mut notes = vec![format!("repu{s} -> repu{t}: constant 2^{s} - 1 = {constant}")];
    if degenerate > 0 {
        notes.push(format!("{degenerate} zero-reach atoms dropped"));
    }
    finish(
        Activation::Repu(t),
        net.d(),
        atoms,
        net.representation_norm(),
        constant,
        Some(*quad),
        notes,
    )
}

/// Repeated [`repu_lower`] down to RePU(t); constants multiply.
pub fn repu_lower_to(net: &ShallowNet, t: u32, quad: &QuadratureSpec) -> Result<(ShallowNet, EmbeddingCertificate)> {
    let s = net.activation.repu_order().ok_or_else(|| Error::WrongActivation {
        expected: "repu(s)".into(),
        found: net.activation.to_string(),
    })?;
    if t == 0 || t >= s {
        return Err(Error::InvalidArgument(format!(
            "cannot lower repu{s} to repu{t}: need 1 <= t < s"
        )));
    }
    let mut cur = net.clone();
    let mut constant = 1.0;
    let mut notes = Vec::new();
    for _ in t..s {
        let (next, cert) = repu_lower(&cur, quad)?;
        constant *= cert.constant;
        notes.extend(cert.notes);
        cur = next;
    }
    let cert = EmbeddingCertificate::new(
        net.representation_norm(),
        cur.representation_norm(),
        constant,
        Some(*quad),
        notes,
    );
    Ok((cur, cert))
}
