//! Activation-changing conversions as push-forwards of the atomic measure.
//!
//! Each conversion returns the converted network together with an
//! [`EmbeddingCertificate`] comparing the representation norms of source and
//! target against the construction's embedding constant. Outputs are passed
//! through `prune(0)` (exact duplicates merged, zero masses dropped); nothing
//! else is removed implicitly.

mod piecewise;
mod repu;
mod shift;
mod substitute;
mod taylor;

pub use piecewise::{piecewise_gamma, piecewise_to_relu};
pub use repu::{repu_lower, repu_lower_to};
pub use shift::{derivative_shift, Shifted};
pub use substitute::{
    kernel_discretize, series_substitute, substitute, substitute_checked, Kernel, SUBSTITUTE_CHECK_POINTS,
    SUBSTITUTE_CHECK_TOL,
};
pub use taylor::{
    gamma, select_expansion_point, taylor_constant, taylor_to_relu, taylor_to_repu_s, default_expansion_grid,
};

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::Result;
use crate::measure::{Atom, DiscreteMeasure, NormReport, ShallowNet};
use crate::quadrature::QuadratureSpec;

/// Norm comparison witnessing `‖f‖_target <= constant · ‖f‖_source`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCertificate {
    pub source_norm: NormReport,
    pub target_norm: NormReport,
    pub constant: f64,
    /// `target - constant · source`; non-positive when the inequality holds
    /// without tolerance.
    pub slack: f64,
    /// `None` for exact constructions.
    pub quadrature: Option<QuadratureSpec>,
    pub notes: Vec<String>,
    /// False when a constant rests on a numeric integral without a tail bound.
    #[serde(default = "yes")]
    pub trusted: bool,
}

fn yes() -> bool {
    true
}

impl EmbeddingCertificate {
    pub fn new(
        source_norm: NormReport,
        target_norm: NormReport,
        constant: f64,
        quadrature: Option<QuadratureSpec>,
        notes: Vec<String>,
    ) -> Self {
        Self {
            slack: target_norm.value - constant * source_norm.value,
            source_norm,
            target_norm,
            constant,
            quadrature,
            notes,
            trusted: true,
        }
    }

    /// `target <= constant · source · (1 + tol_rel)`.
    pub fn holds(&self, tol_rel: f64) -> bool {
        self.slack <= tol_rel * self.constant * self.source_norm.value
    }
}

/// Prunes the raw target measure, wraps it as a net and certifies it.
pub(crate) fn finish(
    activation: Activation,
    d: usize,
    atoms: Vec<Atom>,
    source_norm: NormReport,
    constant: f64,
    quadrature: Option<QuadratureSpec>,
    mut notes: Vec<String>,
) -> Result<(ShallowNet, EmbeddingCertificate)> {
    let raw = DiscreteMeasure::new(d, atoms)?;
    let raw_count = raw.len();
    let pruned = raw.prune_with(0.0, |_| 0.0)?;
    notes.push(format!(
        "output atoms: {} ({} emitted, {} merged, {} zero-mass dropped)",
        pruned.measure.len(),
        raw_count,
        pruned.merged,
        pruned.dropped
    ));
    let net = ShallowNet::new(activation, pruned.measure)?;
    let target_norm = net.representation_norm();
    let cert = EmbeddingCertificate::new(source_norm, target_norm, constant, quadrature, notes);
    Ok((net, cert))
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}
