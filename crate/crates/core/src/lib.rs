//! Shallow networks as finite signed atomic measures, converted between
//! activation functions by explicit push-forwards of the measure, with
//! numerically checked Barron-norm certificates.
//!
//! A network `f(x) = Σ m_i σ(⟨x, w_i⟩ + b_i)` is a [`DiscreteMeasure`] of
//! atoms `(w_i, b_i, m_i)` together with an [`Activation`]. The conversions in
//! [`pushforward`] and [`spectral`] rewrite the measure for a different
//! activation and return an [`EmbeddingCertificate`] comparing the
//! representation norms
//!
//! * Lipschitz form `Σ |m| (1 + ‖w‖₁ + |b|)` for Lipschitz activations,
//! * RePU form `Σ |m| (‖w‖₁ + |b|)^s` for `max(0, z)^s` (ReLU is `s = 1`),
//!
//! against the construction's embedding constant. Representation norms are
//! upper bounds on the Barron norm, which is an infimum over all
//! representations and is not computed.

pub mod activation;
pub mod convert;
pub mod error;
pub mod io;
pub mod measure;
pub mod poly;
pub mod pushforward;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use activation::{Activation, Custom, Piecewise, Side, Smooth};
pub use error::{Error, Result};
pub use measure::{Atom, DiscreteMeasure, NormKind, NormReport, ShallowNet};
pub use pushforward::EmbeddingCertificate;
pub use quadrature::{QuadratureSpec, Rule};
