//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! values and the runtime. Exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use barron_bridge::poly::{binomial, build_pairs, identity_sign, poly_to_repu, BasisScale, MultiIndexTable, Polynomial, Term};
use barron_bridge::pushforward::{
    default_expansion_grid, gamma, piecewise_to_relu, repu_lower, substitute, taylor_to_relu, taylor_to_repu_s,
    derivative_shift,
};
use barron_bridge::spectral::{spectral_norm, spectral_to_repu, SpectralRep};
use barron_bridge::verify::{check_certificate, oracle_integral, sup_error, sup_error_against, Sampler};
use barron_bridge::{Activation, DiscreteMeasure, QuadratureSpec, Result, Rule};
use common::*;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn gl(n: usize) -> QuadratureSpec {
    QuadratureSpec::new(Rule::GaussLegendre, n)
}

fn relu(z: f64) -> f64 {
    z.max(0.0)
}

fn c1_sign_law() -> Result<Outcome> {
    let zs = grid(-2.0, 2.0, 1000);
    let mut exact = true;
    let mut alt_failures = 0;
    for s in 1..=5u32 {
        let r = Activation::repu(s)?;
        for &z in &zs {
            let zs_ = z.powi(s as i32);
            exact &= zs_ - r.value(z) - identity_sign(s) * r.value(-z) == 0.0;
            // the opposite sign convention (-1)^{s-1}
            if zs_ != r.value(z) - identity_sign(s) * r.value(-z) {
                alt_failures += 1;
            }
        }
    }
    outcome(
        exact && alt_failures > 0,
        format!("sign (-1)^s exact on 5x1000 points; sign (-1)^(s-1) fails at {alt_failures} of them"),
    )
}

fn c2_poly_round_trip() -> Result<Outcome> {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut ok = true;
    for s in 1..=4u32 {
        for d in 1..=3usize {
            let t0 = Instant::now();
            let table = MultiIndexTable::new(s, d)?;
            let terms: Vec<Term> =
                table.indices.iter().map(|a| Term { alpha: a.clone(), c: r.random_range(-1.0..=1.0) }).collect();
            let p = Polynomial::new(d, s, terms)?;
            let res = poly_to_repu(&p, &build_pairs(s, d, BasisScale::Lattice)?)?;
            let scale = 1.0 + p.coeff_l1();
            for x in random_points(&mut r, d, 1000) {
                let exact: f64 = p
                    .terms
                    .iter()
                    .map(|t| t.c * x.iter().zip(&t.alpha).map(|(v, e)| v.powi(*e as i32)).product::<f64>())
                    .sum();
                worst = worst.max((res.net.evaluate(&x)? - exact).abs() / scale);
            }
            ok &= res.net.measure.len() == 2 * binomial(s + d as u32, d as u32) as usize;
            worst_residual = worst_residual.max(res.residual);
            slowest = slowest.max(t0.elapsed());
        }
    }
    ok &= worst <= 1e-8 && worst_residual < 1e-9 && slowest < Duration::from_secs(1);
    outcome(
        ok,
        format!("max err/(1+|c|_1) = {worst:.2e}, max residual = {worst_residual:.2e}, atoms = 2 C(s+d,d), slowest case {slowest:.2?}"),
    )
}

fn c3_hierarchy() -> Result<Outcome> {
    let src = single(Activation::repu(2)?, 1.0, 0.3, 1.0);
    let theta = 1.3;
    // reference: 2 ∫_0^θ relu(z - u) du by adaptive quadrature
    let oracle = |x: &[f64]| {
        let z = x[0] + 0.3;
        oracle_integral(&|u| 2.0 * relu(z - u), 0.0, theta, &[z]).expect("oracle converges")
    };
    let closed = |x: &[f64]| relu(x[0] + 0.3).powi(2);
    let oracle_gap = sup_error_fn_1d(&oracle, &closed);
    let mut errs = Vec::new();
    let mut cert_ok = true;
    for n in [8, 32, 128] {
        let (out, cert) = repu_lower(&src, &gl(n))?;
        errs.push(sup_error_against(&out, &oracle, Sampler::Grid { n: 1000 }));
        if n == 128 {
            cert_ok = cert.target_norm.value <= 3.0 * cert.source_norm.value * 1.05
                && check_certificate(&cert, Some(&src), &out, 0.05).pass;
        }
    }
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing && errs[2] <= 1e-3 && cert_ok && oracle_gap < 1e-10,
        format!("errors N=8,32,128: {:.2e}, {:.2e}, {:.2e}; certificate with constant 3 holds", errs[0], errs[1], errs[2]),
    )
}

fn sup_error_fn_1d(f: &dyn Fn(&[f64]) -> f64, g: &dyn Fn(&[f64]) -> f64) -> f64 {
    grid(-1.0, 1.0, 1000).into_iter().map(|x| (f(&[x]) - g(&[x])).abs()).fold(0.0, f64::max)
}

fn c4_exact_substitution() -> Result<Outcome> {
    let atoms = random_atoms(&mut rng(4), 3, 50, 1.0);
    let src = net(Activation::leaky_relu(0.01), 3, atoms.clone());
    let g = DiscreteMeasure::new(1, vec![atom1(1.0, 0.0, 1.0), atom1(-1.0, 0.0, -0.01)])?;
    let (out, cert) = substitute(&src, &g, &Activation::relu())?;
    let oracle = |x: &[f64]| direct(&atoms, |z| if z >= 0.0 { z } else { 0.01 * z }, x);
    let err = sup_error_against(&out, &oracle, Sampler::Random { count: 10_000, seed: 0 });
    let lrelu_ok = err <= 1e-12 && (cert.constant - 2.02).abs() < 1e-15 && cert.slack <= 1e-9
        && check_certificate(&cert, Some(&src), &out, 1e-9).pass;

    let six = net(Activation::Relu6, 3, random_atoms(&mut rng(40), 3, 20, 4.0));
    let g6 = DiscreteMeasure::new(1, vec![atom1(1.0, 0.0, 1.0), atom1(1.0, -6.0, -1.0)])?;
    let (out6, cert6) = substitute(&six, &g6, &Activation::relu())?;
    let oracle6 = |x: &[f64]| direct(&six.measure.atoms, |z| z.clamp(0.0, 6.0), x);
    let err6 = sup_error_against(&out6, &oracle6, Sampler::Random { count: 10_000, seed: 0 });
    let six_ok = err6 <= 1e-12 && cert6.constant == 10.0 && cert6.slack <= 1e-9;
    outcome(
        lrelu_ok && six_ok,
        format!(
            "lrelu: err {err:.2e}, constant {}, slack {:.3e}; relu6: err {err6:.2e}, constant {}",
            cert.constant, cert.slack, cert6.constant
        ),
    )
}

fn c5_taylor_relu() -> Result<Outcome> {
    let src = single(Activation::tanh(), 1.0, 0.0, 1.0);
    let l1 = Activation::tanh().deriv_l1(2)?;
    let (out, cert) = taylor_to_relu(&src, 0.0, &gl(1024))?;
    let err = sup_error_against(&out, &|x: &[f64]| x[0].tanh(), Sampler::Grid { n: 1000 });
    let mut all_y = true;
    for y in default_expansion_grid() {
        let (o, c) = taylor_to_relu(&src, y, &gl(1024))?;
        let g = gamma(&Activation::tanh(), y)?;
        all_y &= c.holds(0.05) && o.representation_norm().value <= g * c.source_norm.value * 1.05;
    }
    outcome(
        err <= 1e-3 && l1.value == 2.0 && !matches!(l1.method, barron_bridge::activation::L1Method::Numeric { .. })
            && cert.constant == 6.0 && all_y,
        format!("err {err:.2e} at N=1024, deriv_l1(tanh,2) = {} (analytic), constant {}, bound holds for all 101 grid y", l1.value, cert.constant),
    )
}

fn c6_taylor_repu2() -> Result<Outcome> {
    let src = single(Activation::sin(), 0.7, 0.1, 1.0);
    let pairs = build_pairs(2, 1, BasisScale::Lattice)?;
    let (out, cert) = taylor_to_repu_s(&src, 2, 1.0, &gl(512), &pairs)?;
    let err = sup_error_against(&out, &|x: &[f64]| (0.7 * x[0] + 0.1).sin(), Sampler::Grid { n: 1000 });
    let check = check_certificate(&cert, Some(&src), &out, 0.05);
    outcome(
        err <= 1e-3 && check.pass,
        format!("err {err:.2e} at N=512, target {:.4} <= {:.4} x source {:.4}", check.target_norm, check.constant, check.source_norm),
    )
}

fn c7_derivative_shift() -> Result<Outcome> {
    let src = net(
        Activation::logistic(),
        1,
        vec![atom1(1.0, 0.0, 1.0), atom1(-2.0, 0.5, -0.7), atom1(0.5, -1.0, 0.4)],
    );
    let tv = src.measure.total_variation();
    let err = |h: f64| -> Result<f64> {
        let s = derivative_shift(&src, &Activation::softplus(), h)?;
        sup_error(&s.net, &src, Sampler::Grid { n: 1000 })
    };
    let (e1, e2) = (err(1e-3)?, err(5e-4)?);
    let bound = 0.5 * 1e-3 * 0.25 * tv;
    let ratio = e1 / e2;
    outcome(
        e1 <= bound && (ratio - 2.0).abs() <= 0.2,
        format!("err(h=1e-3) {e1:.3e} <= bound {bound:.3e}; err(h)/err(h/2) = {ratio:.4}"),
    )
}

fn c8_spectral() -> Result<Outcome> {
    let rep = SpectralRep::cosine(vec![1.0, 2.0])?;
    let norm3 = spectral_norm(&rep, 3);
    let pairs = build_pairs(2, 2, BasisScale::Lattice)?;
    let (out, cert) = spectral_to_repu(&rep, 2, &pairs, &gl(512))?;
    let err = sup_error_against(&out, &|x: &[f64]| (x[0] + 2.0 * x[1]).cos(), Sampler::Grid { n: 50 });
    let (_, cert256) = spectral_to_repu(&rep, 2, &pairs, &gl(256))?;
    let c = cert.constant;
    let stable = (cert256.constant - c).abs() <= 0.1 * c;
    let holds = out.measure.repu_norm(2) <= c * 64.0 * (1.0 + 1e-12);
    outcome(
        err <= 1e-3 && norm3 == 64.0 && holds && stable,
        format!("err {err:.2e} on 50x50 grid, spectral_norm = {norm3}, C = {c:.4} (N=256: {:.4})", cert256.constant),
    )
}

fn c9_piecewise() -> Result<Outcome> {
    let atoms = random_atoms(&mut rng(9), 2, 6, 1.0);
    let src = net(Activation::elu(), 2, atoms.clone());
    let (out, cert) = piecewise_to_relu(&src, &gl(512))?;
    let elu = |z: f64| if z >= 0.0 { z } else { z.exp_m1() };
    let err = sup_error_against(&out, &|x: &[f64]| direct(&atoms, elu, x), Sampler::Random { count: 10_000, seed: 0 });
    let rp = net(Activation::relu_piecewise(), 2, atoms.clone());
    let (rout, _) = piecewise_to_relu(&rp, &gl(512))?;
    let degenerate = rout.measure == rp.measure && rout.activation == Activation::relu();
    outcome(
        err <= 1e-3 && cert.constant == 4.0 && check_certificate(&cert, Some(&src), &out, 0.05).pass && degenerate,
        format!("err {err:.2e} at N=512, constant {}, relu piecewise form returned unchanged: {degenerate}", cert.constant),
    )
}

fn c10_composition() -> Result<Outcome> {
    let rep = SpectralRep::cosine(vec![1.0])?;
    let (two, _) = spectral_to_repu(&rep, 2, &build_pairs(2, 1, BasisScale::Lattice)?, &gl(512))?;
    let (lowered, _) = repu_lower(&two, &gl(128))?;
    let (one, _) = spectral_to_repu(&rep, 1, &build_pairs(1, 1, BasisScale::Lattice)?, &gl(512))?;
    let gap = sup_error(&lowered, &one, Sampler::Grid { n: 1000 })?;
    let cos = |x: &[f64]| x[0].cos();
    let (e_two, e_low, e_one) = (
        sup_error_against(&two, &cos, Sampler::Grid { n: 1000 }),
        sup_error_against(&lowered, &cos, Sampler::Grid { n: 1000 }),
        sup_error_against(&one, &cos, Sampler::Grid { n: 1000 }),
    );
    outcome(
        gap <= 3e-3,
        format!("|lowered - direct| = {gap:.2e} (vs cos: s=2 {e_two:.1e}, lowered {e_low:.1e}, s=1 {e_one:.1e})"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>, Duration); 10] = [
        ("identity sign law", c1_sign_law, Duration::from_millis(100)),
        ("polynomial round trip", c2_poly_round_trip, Duration::from_secs(12)),
        ("RePU hierarchy", c3_hierarchy, Duration::from_secs(1)),
        ("exact substitution", c4_exact_substitution, Duration::from_secs(1)),
        ("Taylor to ReLU", c5_taylor_relu, Duration::from_secs(2)),
        ("Taylor to RePU2", c6_taylor_repu2, Duration::from_secs(2)),
        ("derivative shift", c7_derivative_shift, Duration::from_secs(1)),
        ("spectral to RePU2", c8_spectral, Duration::from_secs(5)),
        ("piecewise to ReLU", c9_piecewise, Duration::from_secs(2)),
        ("composition consistency", c10_composition, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let res = run();
        let took = t0.elapsed();
        let (pass, detail) = match res {
            Ok(o) => (o.pass && took < budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2}. {name}: {detail} [{took:.2?}, budget {budget:.0?}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

