#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ueda::germ::{FlatFactor, GermTriple};
use ueda::scalar::cx;
use ueda::series::{JetShape, LaurentPoly, ModeWindow, TransverseJet};

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c64(a, b))
}

/// Laurent polynomial with modes in `[-spread, spread]` inside `window`.
pub fn laurent(window: ModeWindow, spread: i32) -> impl Strategy<Value = LaurentPoly<f64>> {
    proptest::collection::vec(coeff(), (2 * spread + 1) as usize).prop_map(move |cs| {
        let modes: Vec<(i32, Complex64)> = cs.into_iter().enumerate().map(|(i, c)| (i as i32 - spread, c)).collect();
        LaurentPoly::from_modes(window, &modes).unwrap()
    })
}

/// Jet whose entries have modes in `[-spread, spread]`; `keep` selects the
/// admissible `(ν, μ)`.
pub fn jet(
    shape: JetShape,
    window: ModeWindow,
    spread: i32,
    keep: fn(usize, usize) -> bool,
) -> impl Strategy<Value = TransverseJet<f64>> {
    let n = shape.len();
    proptest::collection::vec(laurent(window, spread), n).prop_map(move |ps| {
        let mut j = TransverseJet::zero(shape, window);
        for ((nu, mu), p) in shape.iter().zip(ps) {
            if keep(nu, mu) {
                j.set(nu, mu, p).unwrap();
            }
        }
        j
    })
}

pub fn max_diff(a: &TransverseJet<f64>, b: &TransverseJet<f64>) -> f64 {
    a.distance(b).unwrap()
}

pub fn laurent_rng(rng: &mut ChaCha8Rng, window: ModeWindow, spread: i32, scale: f64) -> LaurentPoly<f64> {
    let mut p = LaurentPoly::zero(window);
    for n in -spread..=spread {
        if window.contains(n) {
            p.set(n, cx(scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0))).unwrap();
        }
    }
    p
}

/// Torsion factor `exp(2πi k/p)` with `p ≤ max_order`.
pub fn torsion_rng(rng: &mut ChaCha8Rng, max_order: u32) -> FlatFactor<f64> {
    let p = rng.gen_range(1..=max_order);
    let k = rng.gen_range(0..p as i64);
    FlatFactor::root_of_unity(k, p)
}

pub fn linear(shape: JetShape, window: ModeWindow) -> GermTriple<f64> {
    GermTriple::linear(cx(2.0, 0.0), FlatFactor::one(), FlatFactor::one(), shape, window)
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if b.norm() == 0.0 {
        d
    } else {
        d / b.norm()
    }
}
