use super::{finish, EmbeddingCertificate};
use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure, ShallowNet};
use crate::quadrature::QuadratureSpec;

pub const SUBSTITUTE_CHECK_POINTS: usize = 1000;
pub const SUBSTITUTE_CHECK_TOL: f64 = 1e-9;

/// Rewrites a `φ`-net as a `ψ`-net given `γ = Σ g_j δ_(ω_j, β_j)` on `ℝ²` with
/// `φ(z) = Σ g_j ψ(ω_j z + β_j)` on the reachable range.
///
/// Atoms `(ω_j w_i, ω_j b_i + β_j)` with mass `g_j m_i`, `i` outer. Constant
/// `Σ |g_j| (1 + |ω_j| + |β_j|)`. The identity `γ = δ_(1,0)` reproduces the
/// input bit for bit.
pub fn substitute(
    net: &ShallowNet,
    gamma: &DiscreteMeasure,
    target: &Activation,
) -> Result<(ShallowNet, EmbeddingCertificate)> {
    if gamma.d != 1 {
        return Err(Error::InvalidArgument(format!(
            "gamma must live on ℝ² (weight dimension 1), got weight dimension {}",
            gamma.d
        )));
    }
    gamma.validate()?;
    let mut atoms = Vec::with_capacity(net.measure.len() * gamma.len());
    for at in &net.measure.atoms {
        for g in &gamma.atoms {
            let (om, be) = (g.w[0], g.b);
            let b = if be == 0.0 { om * at.b } else { om * at.b + be };
            atoms.push(Atom::new(at.w.iter().map(|v| om * v).collect(), b, g.mass * at.mass));
        }
    }
    let constant = gamma
        .atoms
        .iter()
        .map(|g| g.mass.abs() * (1.0 + g.w[0].abs() + g.b.abs()))
        .sum();
    let notes = vec![format!(
        "{} -> {target} by substitution with {} gamma atoms",
        net.activation,
        gamma.len()
    )];
    finish(
        target.clone(),
        net.d(),
        atoms,
        net.representation_norm(),
        constant,
        None,
        notes,
    )
}

/// [`substitute`] after checking `Σ g_j ψ(ω_j z + β_j) = φ(z)` on
/// [`SUBSTITUTE_CHECK_POINTS`] points of `[-θ_max, θ_max]`.
pub fn substitute_checked(
    net: &ShallowNet,
    gamma: &DiscreteMeasure,
    target: &Activation,
    tol: f64,
) -> Result<(ShallowNet, EmbeddingCertificate)> {
    if gamma.d != 1 {
        return substitute(net, gamma, target);
    }
    let r = net.measure.theta_max();
    let n = SUBSTITUTE_CHECK_POINTS;
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        let z = if n == 1 { 0.0 } else { -r + 2.0 * r * i as f64 / (n - 1) as f64 };
        let lhs: f64 = gamma
            .atoms
            .iter()
            .map(|g| g.mass * target.value(g.w[0] * z + g.b))
            .sum();
        deviation = deviation.max((lhs - net.activation.value(z)).abs());
    }
    if !(deviation <= tol) {
        return Err(Error::GammaMismatch { deviation, lo: -r, hi: r });
    }
    let (out, mut cert) = substitute(net, gamma, target)?;
    cert.notes.push(format!(
        "gamma checked on {n} points of [-{r}, {r}]: max deviation {deviation:e}"
    ));
    Ok((out, cert))
}

type KernelFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Integrable kernel `η` for convolution activations `ψ * η`.
pub struct Kernel {
    pub eta: KernelFn,
    /// Bound on `∫_{|z| > T} |η|(1 + |z|)`.
    pub tail_bound: Option<f64>,
    /// Closed support `[lo, hi]`, when known; quadrature is restricted to it.
    pub support: Option<(f64, f64)>,
}

impl Kernel {
    pub fn new(eta: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eta: Box::new(eta),
            tail_bound: None,
            support: None,
        }
    }

    pub fn with_tail_bound(mut self, t: f64) -> Self {
        self.tail_bound = Some(t);
        self
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self.tail_bound.get_or_insert(0.0);
        self
    }
}

/// `(ψ * η)(z) = ∫ ψ(z + β) η(-β) dβ`, discretized on `[-T, T]`: atoms
/// `(1, β_k)` with mass `η(-β_k) ω'_k`.
pub fn kernel_discretize(kernel: &Kernel, truncation: f64, quad: &QuadratureSpec) -> Result<DiscreteMeasure> {
    if kernel.tail_bound.is_none() {
        return Err(Error::MissingTailBound(
            "kernel needs a tail bound beyond the truncation (or a compact support)".into(),
        ));
    }
    if !(truncation > 0.0 && truncation.is_finite()) {
        return Err(Error::DegenerateTruncation(format!(
            "truncation T = {truncation} gives an empty gamma"
        )));
    }
    let (mut lo, mut hi) = (-truncation, truncation);
    if let Some((a, b)) = kernel.support {
        // η(-β) ≠ 0 only for β ∈ [-b, -a]
        lo = lo.max(-b);
        hi = hi.min(-a);
    }
    if !(hi > lo) {
        return Err(Error::DegenerateTruncation(format!(
            "kernel support does not meet [-{truncation}, {truncation}]"
        )));
    }
    let nodes = quad.realize()?;
    let len = hi - lo;
    let atoms = nodes
        .iter()
        .map(|(v, w)| {
            let beta = lo + len * v;
            Atom::new(vec![1.0], beta, (kernel.eta)(-beta) * w * len)
        })
        .collect();
    DiscreteMeasure::new(1, atoms)
}

/// `φ(z) = Σ_{k=1}^{K} g(k) ψ(h(k) z)`, truncated at `K`. The constant is the
/// partial sum `Σ_{k<=K} |g(k)| (1 + |h(k)|)`; the tail is not certified.
pub fn series_substitute(
    net: &ShallowNet,
    g: impl Fn(u64) -> f64,
    h: impl Fn(u64) -> f64,
    k_max: u64,
    target: &Activation,
) -> Result<(ShallowNet, EmbeddingCertificate)> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("series truncation K must be >= 1".into()));
    }
    let atoms = (1..=k_max).map(|k| Atom::new(vec![h(k)], 0.0, g(k))).collect();
    let gamma = DiscreteMeasure::new(1, atoms)?;
    let (out, mut cert) = substitute(net, &gamma, target)?;
    cert.notes.push(format!("series truncated at K = {k_max}; tail not certified"));
    Ok((out, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pushforward::repu_lower;

    fn gamma(atoms: &[(f64, f64, f64)]) -> DiscreteMeasure {
        DiscreteMeasure::new(1, atoms.iter().map(|&(w, b, m)| Atom::new(vec![w], b, m)).collect()).unwrap()
    }

    fn tanh_net() -> ShallowNet {
        ShallowNet::new(
            Activation::tanh(),
            DiscreteMeasure::new(
                2,
                vec![Atom::new(vec![0.5, -1.0], 0.2, 1.5), Atom::new(vec![-0.3, 0.1], -0.7, -0.5)],
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identity_gamma() {
        let net = tanh_net();
        let (out, cert) = substitute(&net, &gamma(&[(1.0, 0.0, 1.0)]), &Activation::tanh()).unwrap();
        assert_eq!(out.measure, net.measure);
        assert_eq!(cert.constant, 2.0);
    }

    #[test]
    fn relu6_gamma() {
        let net = ShallowNet::new(
            Activation::Relu6,
            DiscreteMeasure::new(1, vec![Atom::new(vec![4.0], 3.0, 1.0)]).unwrap(),
        )
        .unwrap();
        let g = gamma(&[(1.0, 0.0, 1.0), (1.0, -6.0, -1.0)]);
        let (out, cert) = substitute_checked(&net, &g, &Activation::relu(), SUBSTITUTE_CHECK_TOL).unwrap();
        assert_eq!(cert.constant, 10.0);
        for i in 0..=100 {
            let x = -1.0 + 0.02 * i as f64;
            assert!((out.evaluate(&[x]).unwrap() - net.evaluate(&[x]).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_gamma_is_caught() {
        let g = gamma(&[(1.0, 0.0, 1.0)]);
        assert!(matches!(
            substitute_checked(&tanh_net(), &g, &Activation::relu(), SUBSTITUTE_CHECK_TOL),
            Err(Error::GammaMismatch { .. })
        ));
        let bad = DiscreteMeasure::new(2, vec![]).unwrap();
        assert!(substitute(&tanh_net(), &bad, &Activation::relu()).is_err());
    }

    #[test]
    fn narrow_gaussian_is_nearly_identity() {
        let sigma = 1e-3;
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let k = Kernel::new(move |z| norm * (-0.5 * (z / sigma).powi(2)).exp()).with_tail_bound(1e-30);
        let g = kernel_discretize(&k, 0.02, &QuadratureSpec::gauss_legendre(256)).unwrap();
        let net = tanh_net();
        let (out, _) = substitute(&net, &g, &Activation::tanh()).unwrap();
        for i in 0..=20 {
            for j in 0..=20 {
                let x = [-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
                assert!((out.evaluate(&x).unwrap() - net.evaluate(&x).unwrap()).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn uniform_kernel_reproduces_repu_lowering() {
        // repu_2 = repu_1 * (2 · 1_[0, c]) on |z| <= c
        let net = ShallowNet::new(
            Activation::Repu(2),
            DiscreteMeasure::new(1, vec![Atom::new(vec![1.0], 0.3, 1.0)]).unwrap(),
        )
        .unwrap();
        let c = net.measure.theta_max();
        let quad = QuadratureSpec::gauss_legendre(128);
        let k = Kernel::new(|_| 2.0).with_support(0.0, c);
        let g = kernel_discretize(&k, c, &quad).unwrap();
        let (a, _) = substitute(&net, &g, &Activation::relu()).unwrap();
        let (b, _) = repu_lower(&net, &quad).unwrap();
        for i in 0..=100 {
            let x = -1.0 + 0.02 * i as f64;
            assert!((a.evaluate(&[x]).unwrap() - b.evaluate(&[x]).unwrap()).abs() < 1e-3);
        }
        assert_eq!(a.measure.len(), b.measure.len());
    }

    #[test]
    fn kernel_errors() {
        let quad = QuadratureSpec::default();
        assert!(matches!(
            kernel_discretize(&Kernel::new(|_| 1.0), 1.0, &quad),
            Err(Error::MissingTailBound(_))
        ));
        assert!(matches!(
            kernel_discretize(&Kernel::new(|_| 1.0).with_tail_bound(0.0), 0.0, &quad),
            Err(Error::DegenerateTruncation(_))
        ));
    }

    #[test]
    fn series_constants() {
        let net = tanh_net();
        let (out, cert) = series_substitute(&net, |k| if k == 1 { 1.0 } else { 0.0 }, |_| 1.0, 5, &Activation::tanh()).unwrap();
        assert_eq!(out.measure, net.measure);
        assert_eq!(cert.constant, 2.0);
        let mut prev = 0.0;
        for k in [1, 2, 4, 8, 16, 32] {
            let (_, cert) = series_substitute(&net, |k| 0.5f64.powi(k as i32), |_| 1.0, k, &Activation::tanh()).unwrap();
            assert!(cert.constant >= prev && cert.constant <= 2.0);
            prev = cert.constant;
        }
        assert!(series_substitute(&net, |_| 1.0, |_| 1.0, 0, &Activation::tanh()).is_err());
    }
}
