//! JSON file formats.
//!
//! Net: `{"activation": {"kind": ..., "s": ..., "params": {...}}, "d": ..., "atoms": [{"w": [...], "b": ..., "mass": ...}]}`.
//! Floats are written in shortest round-trip form, so nets survive a
//! write/read cycle bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::activation::{Activation, Smooth};
use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure, ShallowNet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl ActivationSpec {
    fn named(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            s: None,
            params: BTreeMap::new(),
        }
    }

    pub fn from_activation(a: &Activation) -> Result<Self> {
        Ok(match a {
            Activation::Repu(1) => Self::named("relu"),
            Activation::Repu(s) => Self {
                s: Some(*s),
                ..Self::named("repu")
            },
            Activation::Smooth(Smooth::Affine { slope, intercept }) => Self {
                params: [("slope".to_string(), *slope), ("intercept".to_string(), *intercept)].into(),
                ..Self::named("affine")
            },
            Activation::Smooth(f) => Self::named(&f.name()),
            Activation::Relu6 => Self::named("relu6"),
            Activation::Piecewise(p) => {
                let name = p.name();
                if name == "elu" || name == "relu-piecewise" {
                    Self::named(name)
                } else if let Some(alpha) = lrelu_alpha(a) {
                    Self {
                        params: [("alpha".to_string(), alpha)].into(),
                        ..Self::named("lrelu")
                    }
                } else {
                    return Err(Error::InvalidArgument(format!("piecewise activation {name} has no file form")));
                }
            }
            Activation::Custom(c) => {
                return Err(Error::InvalidArgument(format!(
                    "custom activation {} cannot be serialized (library only)",
                    c.name
                )))
            }
        })
    }

    pub fn to_activation(&self) -> Result<Activation> {
        let param = |k: &str, default: Option<f64>| -> Result<f64> {
            match (self.params.get(k), default) {
                (Some(v), _) if v.is_finite() => Ok(*v),
                (Some(_), _) => Err(Error::NonFinite("activation parameter")),
                (None, Some(v)) => Ok(v),
                (None, None) => Err(Error::InvalidArgument(format!("activation {} needs parameter '{k}'", self.kind))),
            }
        };
        let a = match self.kind.as_str() {
            "relu" => Activation::relu(),
            "repu" => Activation::repu(
                self.s
                    .ok_or_else(|| Error::InvalidArgument("repu needs an order \"s\"".into()))?,
            )?,
            "tanh" => Activation::tanh(),
            "arctan" => Activation::arctan(),
            "logi" | "logistic" | "sigmoid" => Activation::logistic(),
            "softplus" => Activation::softplus(),
            "sin" => Activation::sin(),
            "elu" => Activation::elu(),
            "relu6" => Activation::Relu6,
            "relu-piecewise" => Activation::relu_piecewise(),
            "lrelu" | "leaky-relu" => Activation::leaky_relu(param("alpha", Some(0.01))?),
            "affine" => Activation::affine(param("slope", None)?, param("intercept", Some(0.0))?),
            "custom" => {
                return Err(Error::InvalidArgument(
                    "custom activations are library-only and cannot be loaded from files".into(),
                ))
            }
            other => return Err(Error::UnknownActivation(other.into())),
        };
        if self.s.is_some() && self.kind != "repu" {
            return Err(Error::InvalidArgument(format!("activation {} takes no order s", self.kind)));
        }
        Ok(a)
    }
}

fn lrelu_alpha(a: &Activation) -> Option<f64> {
    match a {
        Activation::Piecewise(p) if p.name().starts_with("lrelu") => match p.branch(crate::activation::Side::Neg) {
            Smooth::Affine { slope, .. } => Some(slope),
            _ => None,
        },
        _ => None,
    }
}

/// Parses a command-line activation name: `relu`, `repu3`, `tanh`, `arctan`,
/// `logi`, `softplus`, `sin`, `elu`, `relu6`, `relu-piecewise`, `lrelu`,
/// `lrelu:0.1`.
pub fn parse_activation(name: &str) -> Result<Activation> {
    if let Some(rest) = name.strip_prefix("repu") {
        let s = rest
            .trim_start_matches(':')
            .parse::<u32>()
            .map_err(|_| Error::UnknownActivation(name.into()))?;
        return Activation::repu(s);
    }
    if let Some(alpha) = name.strip_prefix("lrelu:") {
        let alpha = alpha.parse::<f64>().map_err(|_| Error::UnknownActivation(name.into()))?;
        return Ok(Activation::leaky_relu(alpha));
    }
    ActivationSpec::named(name).to_activation()
}

#[derive(Serialize, Deserialize)]
struct NetFile {
    activation: ActivationSpec,
    d: usize,
    atoms: Vec<Atom>,
}

pub fn net_to_json(net: &ShallowNet) -> Result<String> {
    let file = NetFile {
        activation: ActivationSpec::from_activation(&net.activation)?,
        d: net.d(),
        atoms: net.measure.atoms.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn net_from_json(s: &str) -> Result<ShallowNet> {
    let file: NetFile = serde_json::from_str(s)?;
    let activation = file.activation.to_activation()?;
    ShallowNet::new(activation, DiscreteMeasure::new(file.d, file.atoms)?)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_net(path: impl AsRef<Path>) -> Result<ShallowNet> {
    net_from_json(&read_text(path.as_ref())?)
}

pub fn write_net(path: impl AsRef<Path>, net: &ShallowNet) -> Result<()> {
    write_text(path, &net_to_json(net)?)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path.as_ref())?)?)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let mut t = text.to_string();
    t.push('\n');
    let path = path.as_ref();
    fs::write(path, t).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

/// Measure file (for example a substitution gamma): `{"d": ..., "atoms": [...]}`.
pub fn read_measure(path: impl AsRef<Path>) -> Result<DiscreteMeasure> {
    let m: DiscreteMeasure = read_json(path)?;
    m.validate()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let net = ShallowNet::new(
            Activation::repu(3).unwrap(),
            DiscreteMeasure::new(
                2,
                vec![
                    Atom::new(vec![0.1 + 0.2, -1e-300], std::f64::consts::PI, -0.0),
                    Atom::new(vec![1.0 / 3.0, 5e-324], -2.5e17, 1.0 - f64::EPSILON),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let back = net_from_json(&net_to_json(&net).unwrap()).unwrap();
        assert_eq!(back.activation, net.activation);
        for (a, b) in back.measure.atoms.iter().zip(&net.measure.atoms) {
            assert_eq!(a.b.to_bits(), b.b.to_bits());
            assert_eq!(a.mass.to_bits(), b.mass.to_bits());
            for (x, y) in a.w.iter().zip(&b.w) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn field_order() {
        let net = ShallowNet::new(
            Activation::tanh(),
            DiscreteMeasure::new(1, vec![Atom::new(vec![1.0], 0.5, 2.0)]).unwrap(),
        )
        .unwrap();
        let s = net_to_json(&net).unwrap();
        let (a, d, atoms) = (s.find("activation").unwrap(), s.find("\"d\"").unwrap(), s.find("atoms").unwrap());
        assert!(a < d && d < atoms);
        let (w, b, m) = (s.find("\"w\"").unwrap(), s.find("\"b\"").unwrap(), s.find("mass").unwrap());
        assert!(w < b && b < m);
    }

    #[test]
    fn activation_names() {
        for name in ["relu", "repu2", "repu:4", "tanh", "arctan", "logi", "softplus", "sin", "elu", "relu6", "relu-piecewise", "lrelu", "lrelu:0.2"] {
            let a = parse_activation(name).unwrap();
            let spec = ActivationSpec::from_activation(&a).unwrap();
            assert_eq!(spec.to_activation().unwrap(), a, "{name}");
        }
        assert!(matches!(parse_activation("swish"), Err(Error::UnknownActivation(_))));
        assert!(parse_activation("repu0").is_err());
        assert!(parse_activation("custom").is_err());
    }

    #[test]
    fn malformed() {
        assert!(matches!(net_from_json("{"), Err(Error::Json(_))));
        let s = r#"{"activation":{"kind":"relu"},"d":2,"atoms":[{"w":[1.0],"b":0.0,"mass":1.0}]}"#;
        assert!(matches!(net_from_json(s), Err(Error::DimensionMismatch { .. })));
        let s = r#"{"activation":{"kind":"nope"},"d":1,"atoms":[]}"#;
        assert!(matches!(net_from_json(s), Err(Error::UnknownActivation(_))));
    }
}
