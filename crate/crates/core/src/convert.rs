//! Picks the construction for a `(source activation, target activation)`
//! pair. Shared by the CLI and the C interface.

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure, ShallowNet};
use crate::poly::{build_pairs, BasisScale};
use crate::pushforward::{
    default_expansion_grid, derivative_shift, piecewise_to_relu, repu_lower_to, select_expansion_point, substitute,
    substitute_checked, taylor_to_relu, taylor_to_repu_s, EmbeddingCertificate, SUBSTITUTE_CHECK_TOL,
};
use crate::quadrature::QuadratureSpec;

/// Tolerance of the pointwise check that a source activation is `∂ζ`.
pub const DERIVATIVE_CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ConvertOptions {
    pub quad: QuadratureSpec,
    /// Taylor expansion point; `None` picks the grid argmin of the constant.
    pub expansion_point: Option<f64>,
    /// Radius of the bounded parameter set, required for smooth to RePU(s >= 2).
    pub radius: Option<f64>,
    /// Shift for the `∂ζ -> ζ` conversion.
    pub h: Option<f64>,
    /// Explicit substitution measure on `ℝ²`.
    pub gamma: Option<DiscreteMeasure>,
    /// Check a user gamma on the reachable range before substituting.
    pub check_gamma: bool,
    pub scale: BasisScale,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        Self {
            quad: QuadratureSpec::default(),
            expansion_point: None,
            radius: None,
            h: None,
            gamma: None,
            check_gamma: true,
            scale: BasisScale::default(),
        }
    }
}

/// Which construction ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Substitute,
    RepuLower,
    PiecewiseToRelu,
    TaylorToRelu,
    TaylorToRepu,
    DerivativeShift,
}

#[derive(Clone, Debug)]
pub struct Converted {
    pub net: ShallowNet,
    pub route: Route,
    /// Absent for the derivative shift, which only proves inclusion.
    pub certificate: Option<EmbeddingCertificate>,
    /// Sup-error bound of the derivative shift.
    pub error_bound: Option<f64>,
}

impl Converted {
    /// No quadrature involved.
    pub fn is_exact(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.quadrature.is_none())
    }
}

fn gamma_of(atoms: &[(f64, f64, f64)]) -> DiscreteMeasure {
    DiscreteMeasure {
        d: 1,
        atoms: atoms.iter().map(|&(w, b, m)| Atom::new(vec![w], b, m)).collect(),
    }
}

/// Known exact substitution measures: `relu6(z) = relu(z) - relu(z - 6)`.
pub fn builtin_gamma(from: &Activation, to: &Activation) -> Option<DiscreteMeasure> {
    match (from, to) {
        (Activation::Relu6, Activation::Repu(1)) => Some(gamma_of(&[(1.0, 0.0, 1.0), (1.0, -6.0, -1.0)])),
        _ => None,
    }
}

pub fn convert(net: &ShallowNet, target: &Activation, opts: &ConvertOptions) -> Result<Converted> {
    let certified = |route, (net, cert): (ShallowNet, EmbeddingCertificate)| Converted {
        net,
        route,
        certificate: Some(cert),
        error_bound: None,
    };
    let source = &net.activation;

    if let Some(g) = &opts.gamma {
        let out = if opts.check_gamma {
            substitute_checked(net, g, target, SUBSTITUTE_CHECK_TOL)?
        } else {
            substitute(net, g, target)?
        };
        return Ok(certified(Route::Substitute, out));
    }

    if let Some(h) = opts.h {
        check_is_derivative(net, target, h)?;
        let out = derivative_shift(net, target, h)?;
        return Ok(Converted {
            net: out.net,
            route: Route::DerivativeShift,
            certificate: None,
            error_bound: Some(out.error_bound),
        });
    }

    if let Some(g) = builtin_gamma(source, target) {
        return Ok(certified(Route::Substitute, substitute(net, &g, target)?));
    }

    match (source, target) {
        (Activation::Repu(s), Activation::Repu(t)) if t < s => {
            Ok(certified(Route::RepuLower, repu_lower_to(net, *t, &opts.quad)?))
        }
        (Activation::Piecewise(_), Activation::Repu(1)) => {
            Ok(certified(Route::PiecewiseToRelu, piecewise_to_relu(net, &opts.quad)?))
        }
        (Activation::Smooth(_) | Activation::Custom(_), Activation::Repu(1)) => {
            let y = match opts.expansion_point {
                Some(y) => y,
                None => select_expansion_point(source, &default_expansion_grid())?,
            };
            Ok(certified(Route::TaylorToRelu, taylor_to_relu(net, y, &opts.quad)?))
        }
        (Activation::Smooth(_) | Activation::Custom(_), Activation::Repu(s)) => {
            let radius = opts.radius.ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "conversion {source} -> {target} needs an explicit radius (largest atom reach is {})",
                    net.measure.theta_max()
                ))
            })?;
            let pairs = build_pairs(*s, 1, opts.scale)?;
            Ok(certified(
                Route::TaylorToRepu,
                taylor_to_repu_s(net, *s, radius, &opts.quad, &pairs)?,
            ))
        }
        _ => Err(Error::NoConstruction {
            from: source.to_string(),
            to: target.to_string(),
        }),
    }
}

/// Checks `σ = ∂ζ` on the range `[-θ_max, θ_max + h]` touched by the shift.
fn check_is_derivative(net: &ShallowNet, zeta: &Activation, h: f64) -> Result<()> {
    let lo = -net.measure.theta_max();
    let hi = -lo + h.max(0.0);
    let n = 1000;
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        let z = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let dz = match zeta.derivative(1, z) {
            Ok(v) => v,
            Err(Error::AmbiguousAtKink { .. }) => continue,
            Err(e) => return Err(e),
        };
        deviation = deviation.max((net.activation.value(z) - dz).abs());
    }
    if deviation > DERIVATIVE_CHECK_TOL {
        return Err(Error::InvalidArgument(format!(
            "{} is not the derivative of {zeta} on [{lo}, {hi}] (max deviation {deviation:e})",
            net.activation
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(a: Activation, w: f64, b: f64) -> ShallowNet {
        ShallowNet::new(a, DiscreteMeasure::new(1, vec![Atom::new(vec![w], b, 1.0)]).unwrap()).unwrap()
    }

    #[test]
    fn routes() {
        let o = ConvertOptions::default();
        let r = |a, t: Activation, o: &ConvertOptions| convert(&single(a, 0.5, 0.1), &t, o).map(|c| c.route);
        assert_eq!(r(Activation::Repu(3), Activation::relu(), &o).unwrap(), Route::RepuLower);
        assert_eq!(r(Activation::elu(), Activation::relu(), &o).unwrap(), Route::PiecewiseToRelu);
        assert_eq!(r(Activation::tanh(), Activation::relu(), &o).unwrap(), Route::TaylorToRelu);
        assert_eq!(r(Activation::Relu6, Activation::relu(), &o).unwrap(), Route::Substitute);
        assert!(matches!(
            r(Activation::tanh(), Activation::Repu(2), &o),
            Err(Error::InvalidArgument(_))
        ));
        let with_r = ConvertOptions { radius: Some(1.0), ..ConvertOptions::default() };
        assert_eq!(r(Activation::tanh(), Activation::Repu(2), &with_r).unwrap(), Route::TaylorToRepu);
        assert!(matches!(
            r(Activation::relu(), Activation::tanh(), &o),
            Err(Error::NoConstruction { .. })
        ));
        let with_h = ConvertOptions { h: Some(1e-3), ..ConvertOptions::default() };
        let c = convert(&single(Activation::logistic(), 1.0, 0.0), &Activation::softplus(), &with_h).unwrap();
        assert_eq!(c.route, Route::DerivativeShift);
        assert!(c.certificate.is_none() && c.error_bound.is_some());
        assert!(convert(&single(Activation::tanh(), 1.0, 0.0), &Activation::softplus(), &with_h).is_err());
    }

    #[test]
    fn relu6_is_exact() {
        let c = convert(&single(Activation::Relu6, 4.0, 3.0), &Activation::relu(), &ConvertOptions::default()).unwrap();
        assert!(c.is_exact());
        assert_eq!(c.certificate.unwrap().constant, 10.0);
    }
}
