#![allow(dead_code)]

use barron_bridge::{Activation, Atom, DiscreteMeasure, ShallowNet};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn atom1(w: f64, b: f64, m: f64) -> Atom {
    Atom::new(vec![w], b, m)
}

pub fn net(a: Activation, d: usize, atoms: Vec<Atom>) -> ShallowNet {
    ShallowNet::new(a, DiscreteMeasure::new(d, atoms).unwrap()).unwrap()
}

pub fn single(a: Activation, w: f64, b: f64, m: f64) -> ShallowNet {
    net(a, 1, vec![atom1(w, b, m)])
}

/// Atoms with weights and biases uniform in `[-scale, scale]`, masses in `[-1, 1]`.
pub fn random_atoms(rng: &mut StdRng, d: usize, n: usize, scale: f64) -> Vec<Atom> {
    (0..n)
        .map(|_| {
            let w = (0..d).map(|_| rng.random_range(-scale..scale)).collect();
            Atom::new(w, rng.random_range(-scale..scale), rng.random_range(-1.0..1.0))
        })
        .collect()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut StdRng, d: usize, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect()
}

pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Direct evaluation `Σ m σ(⟨w,x⟩ + b)` with the activation given as a plain closure.
pub fn direct(atoms: &[Atom], sigma: impl Fn(f64) -> f64, x: &[f64]) -> f64 {
    atoms
        .iter()
        .map(|a| a.mass * sigma(a.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + a.b))
        .sum()
}

/// Composite Simpson on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
