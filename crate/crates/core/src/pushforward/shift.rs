use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure, ShallowNet};

/// A `∂ζ`-net rewritten as a `ζ`-net, with its approximation bound.
#[derive(Clone, Debug)]
pub struct Shifted {
    pub net: ShallowNet,
    /// `(h/2) · sup|D²ζ| · |μ|(Ω)`, a bound on the sup error over all inputs.
    pub error_bound: f64,
}

/// `∂ζ(z) ≈ (ζ(z + h) - ζ(z)) / h`: each atom `(w, b, m)` becomes
/// `(w, b + h)` with mass `m/h` and `(w, b)` with mass `-m/h`.
///
/// There is no norm inequality here, only the forward-difference bound.
pub fn derivative_shift(net: &ShallowNet, zeta: &Activation, h: f64) -> Result<Shifted> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("shift h must be positive, got {h}")));
    }
    let sup2 = zeta
        .second_deriv_sup()
        .ok_or_else(|| Error::MissingOracle(format!("sup|D²{zeta}| is not available")))?;
    let mut atoms = Vec::with_capacity(2 * net.measure.len());
    for a in &net.measure.atoms {
        atoms.push(Atom::new(a.w.clone(), a.b + h, a.mass / h));
        atoms.push(Atom::new(a.w.clone(), a.b, -a.mass / h));
    }
    let measure = DiscreteMeasure::new(net.d(), atoms)?
        .prune_with(0.0, |_| 0.0)?
        .measure;
    Ok(Shifted {
        net: ShallowNet::new(zeta.clone(), measure)?,
        error_bound: 0.5 * h * sup2 * net.measure.total_variation(),
    })
}
