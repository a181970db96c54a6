//! Activation descriptors.
//!
//! Every activation supplies its value, derivatives up to a declared order, and
//! the integrability metadata the push-forward constructions need: a Lipschitz
//! constant, `∫|D^k σ|` over the line (or a half-line / bounded window), and
//! `sup|D² σ|`.
//!
//! Builtin smooth activations carry closed-form derivatives to order
//! [`MAX_ORDER`]. Tanh and the logistic sigmoid use the polynomial recurrences
//! `P_{k+1}(t) = q(t) P_k'(t)` in their own value `t`, arctan uses
//! `∂^k arctan = P_k(z) / (1+z²)^k`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;

/// Highest derivative order shipped by the builtins.
pub const MAX_ORDER: usize = 8;

/// Truncation radius for numeric `∫|D^k σ|` over the whole line.
pub const L1_TRUNCATION: f64 = 40.0;

const POLY_LEN: usize = MAX_ORDER + 3;

/// Side of a kink.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Pos,
    Neg,
}

/// How an `∫|D^k σ|` value was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum L1Method {
    Analytic,
    /// Adaptive quadrature on a truncated window. `truncation` bounds the
    /// neglected tail; `trusted` is false when that bound is a guess.
    Numeric { truncation: f64, trusted: bool },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1Norm {
    pub value: f64,
    pub method: L1Method,
}

impl L1Norm {
    fn analytic(value: f64) -> Self {
        Self {
            value,
            method: L1Method::Analytic,
        }
    }

    pub fn is_trusted(&self) -> bool {
        match self.method {
            L1Method::Analytic => true,
            L1Method::Numeric { trusted, .. } => trusted,
        }
    }
}

/// Smooth builtin functions. Also used as the two branches of a
/// [`Piecewise`] activation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smooth {
    Tanh,
    Arctan,
    Logistic,
    Softplus,
    Sin,
    Affine { slope: f64, intercept: f64 },
    ExpM1,
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Coefficients of `P_k` for the recurrence `P_{j+1} = q · P_j'` with `P_0 = t`.
fn value_recurrence(k: usize, q: [f64; 3]) -> [f64; POLY_LEN] {
    let mut p = [0.0; POLY_LEN];
    p[1] = 1.0;
    for _ in 0..k {
        let mut dp = [0.0; POLY_LEN];
        for i in 1..POLY_LEN {
            dp[i - 1] = i as f64 * p[i];
        }
        let mut next = [0.0; POLY_LEN];
        for (i, &c) in dp.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (j, &qj) in q.iter().enumerate() {
                if i + j < POLY_LEN {
                    next[i + j] += c * qj;
                }
            }
        }
        p = next;
    }
    p
}

fn arctan_derivative(k: usize, z: f64) -> f64 {
    if k == 0 {
        return z.atan();
    }
    // P_1 = 1; P_{j+1} = P_j' (1 + z²) - 2 j z P_j
    let mut p = [0.0; POLY_LEN];
    p[0] = 1.0;
    for j in 1..k {
        let mut next = [0.0; POLY_LEN];
        for i in 1..POLY_LEN {
            let d = i as f64 * p[i];
            next[i - 1] += d;
            if i + 1 < POLY_LEN {
                next[i + 1] += d;
            }
        }
        for i in 0..POLY_LEN - 1 {
            next[i + 1] -= 2.0 * j as f64 * p[i];
        }
        p = next;
    }
    horner(&p, z) / (1.0 + z * z).powi(k as i32)
}

impl Smooth {
    pub fn name(&self) -> String {
        match self {
            Smooth::Tanh => "tanh".into(),
            Smooth::Arctan => "arctan".into(),
            Smooth::Logistic => "logi".into(),
            Smooth::Softplus => "softplus".into(),
            Smooth::Sin => "sin".into(),
            Smooth::Affine { slope, intercept } => format!("affine({slope},{intercept})"),
            Smooth::ExpM1 => "expm1".into(),
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        match *self {
            Smooth::Tanh => z.tanh(),
            Smooth::Arctan => z.atan(),
            Smooth::Logistic => logistic(z),
            Smooth::Softplus => softplus(z),
            Smooth::Sin => z.sin(),
            Smooth::Affine { slope, intercept } => slope * z + intercept,
            Smooth::ExpM1 => z.exp_m1(),
        }
    }

    /// `∂^k f(z)` for `k <= MAX_ORDER` (caller checks the order).
    pub fn derivative(&self, k: usize, z: f64) -> f64 {
        if k == 0 {
            return self.value(z);
        }
        match *self {
            Smooth::Tanh => horner(&value_recurrence(k, [1.0, 0.0, -1.0]), z.tanh()),
            Smooth::Logistic => horner(&value_recurrence(k, [0.0, 1.0, -1.0]), logistic(z)),
            Smooth::Softplus => Smooth::Logistic.derivative(k - 1, z),
            Smooth::Arctan => arctan_derivative(k, z),
            Smooth::Sin => match k % 4 {
                0 => z.sin(),
                1 => z.cos(),
                2 => -z.sin(),
                _ => -z.cos(),
            },
            Smooth::Affine { slope, .. } => {
                if k == 1 {
                    slope
                } else {
                    0.0
                }
            }
            Smooth::ExpM1 => z.exp(),
        }
    }

    pub fn lipschitz(&self) -> Option<f64> {
        match *self {
            Smooth::Tanh | Smooth::Arctan | Smooth::Softplus | Smooth::Sin => Some(1.0),
            Smooth::Logistic => Some(0.25),
            Smooth::Affine { slope, .. } => Some(slope.abs()),
            Smooth::ExpM1 => None,
        }
    }

    /// `sup|D²f|` over the line, or over one half-line.
    pub fn second_deriv_sup(&self, side: Option<Side>) -> Option<f64> {
        match (*self, side) {
            (Smooth::Tanh, _) => Some(4.0 / (3.0 * 3f64.sqrt())),
            (Smooth::Arctan, _) => Some(3.0 * 3f64.sqrt() / 8.0),
            (Smooth::Logistic, _) => Some(3f64.sqrt() / 18.0),
            (Smooth::Softplus, _) => Some(0.25),
            (Smooth::Sin, _) => Some(1.0),
            (Smooth::Affine { .. }, _) => Some(0.0),
            (Smooth::ExpM1, Some(Side::Neg)) => Some(1.0),
            (Smooth::ExpM1, _) => None,
        }
    }

    /// Closed-form `∫|D^k f|` over the line or a half-line, when known.
    /// `Some(None)` means known to diverge.
    fn l1_closed_form(&self, k: usize, side: Option<Side>) -> Option<Option<f64>> {
        let half = |full: f64| match side {
            None => full,
            Some(_) => full / 2.0,
        };
        match (*self, k) {
            (_, 0) => None,
            (Smooth::Tanh, 1) | (Smooth::Tanh, 2) => Some(Some(half(2.0))),
            (Smooth::Arctan, 1) => Some(Some(half(PI))),
            (Smooth::Arctan, 2) => Some(Some(half(2.0))),
            (Smooth::Logistic, 1) => Some(Some(half(1.0))),
            (Smooth::Logistic, 2) => Some(Some(half(0.5))),
            (Smooth::Softplus, 1) => match side {
                Some(Side::Neg) => Some(Some(2f64.ln())),
                _ => Some(None),
            },
            (Smooth::Softplus, 2) => Some(Some(half(1.0))),
            (Smooth::Softplus, 3) => Some(Some(half(0.5))),
            (Smooth::Sin, _) => Some(None),
            (Smooth::Affine { slope, .. }, 1) => Some(if slope == 0.0 { Some(0.0) } else { None }),
            (Smooth::Affine { .. }, _) => Some(Some(0.0)),
            (Smooth::ExpM1, _) => match side {
                Some(Side::Neg) => Some(Some(1.0)),
                _ => Some(None),
            },
            _ => None,
        }
    }

    fn sup_abs_between(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            Smooth::Sin => {
                // a crest ±1 lies in [lo, hi] iff some π/2 + jπ does
                let j = ((lo - FRAC_PI_2) / PI).ceil();
                if FRAC_PI_2 + j * PI <= hi {
                    1.0
                } else {
                    lo.sin().abs().max(hi.sin().abs())
                }
            }
            // the remaining builtins are monotone
            _ => self.value(lo).abs().max(self.value(hi).abs()),
        }
    }
}

/// An activation smooth everywhere except at the origin, glued from two
/// smooth branches that agree at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise {
    name: String,
    pos: Smooth,
    neg: Smooth,
}

impl Piecewise {
    pub fn new(name: impl Into<String>, pos: Smooth, neg: Smooth) -> Result<Self> {
        let name = name.into();
        if pos.value(0.0) != neg.value(0.0) {
            return Err(Error::InvalidArgument(format!(
                "piecewise activation {name}: branches disagree at 0 ({} vs {})",
                pos.value(0.0),
                neg.value(0.0)
            )));
        }
        Ok(Self { name, pos, neg })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn branch(&self, side: Side) -> Smooth {
        match side {
            Side::Pos => self.pos,
            Side::Neg => self.neg,
        }
    }

    /// `∫_0^∞ |∂^k φ₊|` or `∫_{-∞}^0 |∂^k φ₋|`.
    pub fn branch_l1(&self, k: usize, side: Side) -> Result<L1Norm> {
        let f = self.branch(side);
        match f.l1_closed_form(k, Some(side)) {
            Some(Some(v)) => Ok(L1Norm::analytic(v)),
            Some(None) => Err(Error::NotIntegrable {
                activation: self.name.clone(),
                what: format!("order-{k} derivative of the {side:?} branch"),
            }),
            None => {
                let g = |z: f64| f.derivative(k, z);
                let anti = |z: f64| f.derivative(k - 1, z);
                match side {
                    Side::Pos => numeric_l1(&g, Some(&anti), 0.0, L1_TRUNCATION, false, true),
                    Side::Neg => numeric_l1(&g, Some(&anti), -L1_TRUNCATION, 0.0, true, false),
                }
            }
        }
    }
}

type Oracle = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied activation. Derivatives are given explicitly, index `k`
/// holding `∂^k σ` (index 0 is the value); nothing is differentiated
/// automatically.
pub struct Custom {
    pub name: String,
    pub derivatives: Vec<Oracle>,
    pub lipschitz: Option<f64>,
    /// Known `∫_ℝ |D^k σ|`, indexed by `k`.
    pub deriv_l1: Vec<Option<f64>>,
    /// Bound on `∫_{|z|>40} |D^k σ|` for the numeric route. Without it numeric
    /// values are flagged untrusted.
    pub tail_bound: Option<f64>,
    pub second_deriv_sup: Option<f64>,
}

impl Custom {
    pub fn new(name: impl Into<String>, value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            derivatives: vec![Box::new(value)],
            lipschitz: None,
            deriv_l1: Vec::new(),
            tail_bound: None,
            second_deriv_sup: None,
        }
    }

    pub fn with_derivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivatives.push(Box::new(f));
        self
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_deriv_l1(mut self, k: usize, value: f64) -> Self {
        if self.deriv_l1.len() <= k {
            self.deriv_l1.resize(k + 1, None);
        }
        self.deriv_l1[k] = Some(value);
        self
    }

    pub fn with_tail_bound(mut self, bound: f64) -> Self {
        self.tail_bound = Some(bound);
        self
    }

    pub fn with_second_deriv_sup(mut self, sup: f64) -> Self {
        self.second_deriv_sup = Some(sup);
        self
    }
}

impl fmt::Debug for Custom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Custom")
            .field("name", &self.name)
            .field("orders", &self.derivatives.len())
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Activation {
    /// `max(0, z)^s`, `s >= 1`. `Repu(1)` is the ReLU.
    Repu(u32),
    Smooth(Smooth),
    /// `min(max(0, z), 6)`.
    Relu6,
    Piecewise(Piecewise),
    Custom(Arc<Custom>),
}

impl PartialEq for Activation {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Activation::Repu(a), Activation::Repu(b)) => a == b,
            (Activation::Smooth(a), Activation::Smooth(b)) => a == b,
            (Activation::Relu6, Activation::Relu6) => true,
            (Activation::Piecewise(a), Activation::Piecewise(b)) => a == b,
            (Activation::Custom(a), Activation::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Repu(1) => write!(f, "relu"),
            Activation::Repu(s) => write!(f, "repu{s}"),
            Activation::Smooth(s) => write!(f, "{}", s.name()),
            Activation::Relu6 => write!(f, "relu6"),
            Activation::Piecewise(p) => write!(f, "{}", p.name),
            Activation::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

impl Activation {
    pub fn relu() -> Self {
        Activation::Repu(1)
    }

    pub fn repu(s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidArgument("RePU order must be >= 1".into()));
        }
        Ok(Activation::Repu(s))
    }

    pub fn tanh() -> Self {
        Activation::Smooth(Smooth::Tanh)
    }

    pub fn arctan() -> Self {
        Activation::Smooth(Smooth::Arctan)
    }

    pub fn logistic() -> Self {
        Activation::Smooth(Smooth::Logistic)
    }

    pub fn softplus() -> Self {
        Activation::Smooth(Smooth::Softplus)
    }

    pub fn sin() -> Self {
        Activation::Smooth(Smooth::Sin)
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        Activation::Smooth(Smooth::Affine { slope, intercept })
    }

    /// `z` for `z >= 0`, `e^z - 1` for `z < 0`.
    pub fn elu() -> Self {
        Activation::Piecewise(Piecewise {
            name: "elu".into(),
            pos: Smooth::Affine {
                slope: 1.0,
                intercept: 0.0,
            },
            neg: Smooth::ExpM1,
        })
    }

    pub fn leaky_relu(alpha: f64) -> Self {
        Activation::Piecewise(Piecewise {
            name: format!("lrelu({alpha})"),
            pos: Smooth::Affine {
                slope: 1.0,
                intercept: 0.0,
            },
            neg: Smooth::Affine {
                slope: alpha,
                intercept: 0.0,
            },
        })
    }

    /// The ReLU written as a piecewise activation with branches `z` and `0`.
    pub fn relu_piecewise() -> Self {
        Activation::Piecewise(Piecewise {
            name: "relu-piecewise".into(),
            pos: Smooth::Affine {
                slope: 1.0,
                intercept: 0.0,
            },
            neg: Smooth::Affine {
                slope: 0.0,
                intercept: 0.0,
            },
        })
    }

    pub fn custom(c: Custom) -> Self {
        Activation::Custom(Arc::new(c))
    }

    pub fn repu_order(&self) -> Option<u32> {
        match self {
            Activation::Repu(s) => Some(*s),
            _ => None,
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        match self {
            Activation::Repu(s) => {
                if z > 0.0 {
                    z.powi(*s as i32)
                } else {
                    0.0
                }
            }
            Activation::Smooth(f) => f.value(z),
            Activation::Relu6 => z.clamp(0.0, 6.0),
            Activation::Piecewise(p) => {
                if z >= 0.0 {
                    p.pos.value(z)
                } else {
                    p.neg.value(z)
                }
            }
            Activation::Custom(c) => (c.derivatives[0])(z),
        }
    }

    pub fn max_order(&self) -> usize {
        match self {
            Activation::Custom(c) => c.derivatives.len() - 1,
            _ => MAX_ORDER,
        }
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.max_order() {
            return Err(Error::OrderExceeded {
                activation: self.to_string(),
                order: k,
                max: self.max_order(),
            });
        }
        Ok(())
    }

    fn ambiguous(&self, k: usize, at: f64) -> Error {
        Error::AmbiguousAtKink {
            activation: self.to_string(),
            order: k,
            at,
        }
    }

    /// `∂^k σ(z)`; `k = 0` is the value. Errors at a kink where the one-sided
    /// derivatives differ; use [`Activation::derivative_branch`] there.
    pub fn derivative(&self, k: usize, z: f64) -> Result<f64> {
        self.derivative_impl(k, z, None)
    }

    /// Like [`Activation::derivative`] but resolves kinks with the given side.
    pub fn derivative_branch(&self, k: usize, z: f64, side: Side) -> Result<f64> {
        self.derivative_impl(k, z, Some(side))
    }

    fn derivative_impl(&self, k: usize, z: f64, side: Option<Side>) -> Result<f64> {
        self.check_order(k)?;
        if k == 0 {
            return Ok(self.value(z));
        }
        match self {
            Activation::Repu(s) => {
                let s = *s as usize;
                let positive = match (z.partial_cmp(&0.0), side) {
                    (Some(std::cmp::Ordering::Greater), _) => true,
                    (Some(std::cmp::Ordering::Less), _) => false,
                    (_, Some(Side::Pos)) => true,
                    (_, Some(Side::Neg)) => false,
                    // one-sided derivatives agree (both 0) below order s
                    _ if k < s => return Ok(0.0),
                    _ => return Err(self.ambiguous(k, z)),
                };
                if !positive || k > s {
                    return Ok(0.0);
                }
                let falling: f64 = ((s - k + 1)..=s).map(|i| i as f64).product();
                Ok(falling * z.max(0.0).powi((s - k) as i32))
            }
            Activation::Smooth(f) => Ok(f.derivative(k, z)),
            Activation::Relu6 => {
                let inside = if z == 0.0 || z == 6.0 {
                    match side {
                        Some(Side::Pos) => z == 0.0,
                        Some(Side::Neg) => z == 6.0,
                        None => return Err(self.ambiguous(k, z)),
                    }
                } else {
                    z > 0.0 && z < 6.0
                };
                Ok(if k == 1 && inside { 1.0 } else { 0.0 })
            }
            Activation::Piecewise(p) => {
                if z > 0.0 {
                    return Ok(p.pos.derivative(k, z));
                }
                if z < 0.0 {
                    return Ok(p.neg.derivative(k, z));
                }
                match side {
                    Some(Side::Pos) => Ok(p.pos.derivative(k, 0.0)),
                    Some(Side::Neg) => Ok(p.neg.derivative(k, 0.0)),
                    None => {
                        let (a, b) = (p.pos.derivative(k, 0.0), p.neg.derivative(k, 0.0));
                        if a == b {
                            Ok(a)
                        } else {
                            Err(self.ambiguous(k, z))
                        }
                    }
                }
            }
            Activation::Custom(c) => Ok((c.derivatives[k])(z)),
        }
    }

    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Activation::Repu(1) => Some(1.0),
            Activation::Repu(_) => None,
            Activation::Smooth(f) => f.lipschitz(),
            Activation::Relu6 => Some(1.0),
            Activation::Piecewise(p) => match (p.pos.lipschitz(), p.neg.lipschitz()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => match (p.pos, p.neg) {
                    // e^z - 1 restricted to z <= 0 has slope at most 1
                    (pos, Smooth::ExpM1) => pos.lipschitz().map(|a| a.max(1.0)),
                    _ => None,
                },
            },
            Activation::Custom(c) => c.lipschitz,
        }
    }

    pub fn second_deriv_sup(&self) -> Option<f64> {
        match self {
            Activation::Repu(2) => Some(2.0),
            Activation::Repu(_) | Activation::Relu6 => None,
            Activation::Smooth(f) => f.second_deriv_sup(None),
            Activation::Piecewise(p) => {
                // a jump in the first derivative puts a Dirac mass in D²
                if p.pos.derivative(1, 0.0) != p.neg.derivative(1, 0.0) {
                    return None;
                }
                let a = p.pos.second_deriv_sup(Some(Side::Pos))?;
                let b = p.neg.second_deriv_sup(Some(Side::Neg))?;
                Some(a.max(b))
            }
            Activation::Custom(c) => c.second_deriv_sup,
        }
    }

    /// `∫_ℝ |D^k σ(z)| dz` for `k >= 1`.
    pub fn deriv_l1(&self, k: usize) -> Result<L1Norm> {
        if k == 0 {
            return Err(Error::InvalidArgument("deriv_l1 needs k >= 1".into()));
        }
        self.check_order(k)?;
        let not_integrable = || Error::NotIntegrable {
            activation: self.to_string(),
            what: format!("D^{k}"),
        };
        match self {
            Activation::Repu(_) | Activation::Relu6 => Err(not_integrable()),
            Activation::Smooth(f) => match f.l1_closed_form(k, None) {
                Some(Some(v)) => Ok(L1Norm::analytic(v)),
                Some(None) => Err(not_integrable()),
                None => {
                    let g = |z: f64| f.derivative(k, z);
                    let anti = |z: f64| f.derivative(k - 1, z);
                    numeric_l1(&g, Some(&anti), -L1_TRUNCATION, L1_TRUNCATION, true, true)
                }
            },
            Activation::Piecewise(p) => {
                // D^k of a piecewise function is in L¹ only if no Dirac mass
                // sits at the junction
                if k >= 2 && p.pos.derivative(k - 1, 0.0) != p.neg.derivative(k - 1, 0.0) {
                    return Err(not_integrable());
                }
                let a = p.branch_l1(k, Side::Pos)?;
                let b = p.branch_l1(k, Side::Neg)?;
                Ok(combine_l1(a, b))
            }
            Activation::Custom(c) => {
                if let Some(Some(v)) = c.deriv_l1.get(k) {
                    return Ok(L1Norm::analytic(*v));
                }
                let f = &c.derivatives[k];
                let g = |z: f64| f(z);
                let mut norm = numeric_l1(&g, None, -L1_TRUNCATION, L1_TRUNCATION, false, false)?;
                norm.method = match c.tail_bound {
                    Some(t) => {
                        norm.value += t;
                        L1Method::Numeric {
                            truncation: t,
                            trusted: true,
                        }
                    }
                    None => L1Method::Numeric {
                        truncation: f64::NAN,
                        trusted: false,
                    },
                };
                Ok(norm)
            }
        }
    }

    /// `∫_lo^hi |D^k σ(z)| dz` over a bounded window, kinks excluded.
    pub fn deriv_l1_on(&self, k: usize, lo: f64, hi: f64) -> Result<L1Norm> {
        self.check_order(k)?;
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!("empty window [{lo}, {hi}]")));
        }
        let kinks = self.kinks();
        if k >= 2 && kinks.iter().any(|&c| c > lo && c < hi) {
            let jump = kinks.iter().any(|&c| {
                self.derivative_branch(k - 1, c, Side::Pos).ok()
                    != self.derivative_branch(k - 1, c, Side::Neg).ok()
            });
            if jump {
                return Err(Error::NotIntegrable {
                    activation: self.to_string(),
                    what: format!("D^{k} on [{lo}, {hi}] (Dirac mass at a kink)"),
                });
            }
        }
        let g = |z: f64| {
            self.derivative(k, z)
                .or_else(|_| self.derivative_branch(k, z, Side::Pos))
                .unwrap_or(0.0)
        };
        let mut breaks = vec![lo];
        breaks.extend(kinks.into_iter().filter(|&c| c > lo && c < hi));
        breaks.push(hi);
        let mut value = 0.0;
        for w in breaks.windows(2) {
            value += numeric_l1(&g, None, w[0], w[1], false, false)?.value;
        }
        Ok(L1Norm {
            value,
            method: L1Method::Numeric {
                truncation: 0.0,
                trusted: true,
            },
        })
    }

    /// Points where the activation is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Activation::Repu(_) | Activation::Piecewise(_) => vec![0.0],
            Activation::Relu6 => vec![0.0, 6.0],
            Activation::Smooth(_) | Activation::Custom(_) => Vec::new(),
        }
    }

    pub fn is_lipschitz(&self) -> bool {
        self.lipschitz().is_some()
    }

    /// `sup_{|z| <= r} |σ(z)|`.
    pub fn sup_abs_on(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            Activation::Repu(s) => r.powi(*s as i32),
            Activation::Smooth(f) => f.sup_abs_between(-r, r),
            Activation::Relu6 => r.min(6.0),
            Activation::Piecewise(p) => p
                .pos
                .sup_abs_between(0.0, r)
                .max(p.neg.sup_abs_between(-r, 0.0)),
            Activation::Custom(c) => {
                let n = 1024;
                let h = 2.0 * r / n as f64;
                let sampled = (0..=n)
                    .map(|i| (c.derivatives[0])(-r + i as f64 * h).abs())
                    .fold(0.0, f64::max);
                sampled + c.lipschitz.unwrap_or(0.0) * h / 2.0
            }
        }
    }
}

fn combine_l1(a: L1Norm, b: L1Norm) -> L1Norm {
    let method = match (a.method, b.method) {
        (L1Method::Analytic, L1Method::Analytic) => L1Method::Analytic,
        (m, L1Method::Analytic) | (L1Method::Analytic, m) => m,
        (
            L1Method::Numeric {
                truncation: t1,
                trusted: u1,
            },
            L1Method::Numeric {
                truncation: t2,
                trusted: u2,
            },
        ) => L1Method::Numeric {
            truncation: t1 + t2,
            trusted: u1 && u2,
        },
    };
    L1Norm {
        value: a.value + b.value,
        method,
    }
}

/// `∫_lo^hi |g|` by adaptive quadrature split at the sign changes of `g`.
/// When `anti` (an antiderivative tending to 0 at infinity) is given, the
/// open ends flagged by `tail_lo`/`tail_hi` add `|anti(end)|` as the tail,
/// which is exact once `anti` is monotone beyond the window.
fn numeric_l1(
    g: &dyn Fn(f64) -> f64,
    anti: Option<&dyn Fn(f64) -> f64>,
    lo: f64,
    hi: f64,
    tail_lo: bool,
    tail_hi: bool,
) -> Result<L1Norm> {
    let scan = 4000;
    let h = (hi - lo) / scan as f64;
    let mut breaks = vec![lo];
    let mut prev = g(lo);
    for i in 1..=scan {
        let z = lo + i as f64 * h;
        let cur = g(z);
        if prev.signum() != cur.signum() && prev != 0.0 && cur != 0.0 {
            let (mut a, mut b) = (z - h, z);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if g(m).signum() == prev.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            breaks.push(0.5 * (a + b));
        }
        prev = cur;
    }
    breaks.push(hi);
    let mut value = 0.0;
    for w in breaks.windows(2) {
        value += quadrature::adaptive(&|z| g(z).abs(), w[0], w[1], 1e-12, 2000)?;
    }
    let mut tail = 0.0;
    if let Some(anti) = anti {
        if tail_lo {
            tail += anti(lo).abs();
        }
        if tail_hi {
            tail += anti(hi).abs();
        }
    }
    Ok(L1Norm {
        value: value + tail,
        method: L1Method::Numeric {
            truncation: tail,
            trusted: anti.is_some() || (!tail_lo && !tail_hi),
        },
    })
}
