//! Twisted coboundaries on the model curve.
//!
//! For `δ_λ(G)(x) = G(x) − λ·G(ρx)` the mode-n coefficient is multiplied by
//! `1 − λρⁿ`. With `|ρ| > 1` and `|λ| = 1` this vanishes only for `n = 0`,
//! `λ = 1`, so the first cohomology of the flat bundle is the mode-0 line.

use crate::error::{Error, Result};
use crate::germ::GermTriple;
use crate::scalar::{cabs, cone, cpowi, Cx, Real};
use crate::series::{LaurentPoly, ModeWindow};

/// Default resonance tolerance on `|1 − λρⁿ|`.
pub const RESONANCE_TOL: f64 = 1e-9;

fn denominator<T: Real>(lambda: &Cx<T>, rho: &Cx<T>, n: i32) -> Cx<T> {
    cone::<T>() - lambda.clone() * cpowi(rho, n as i64)
}

fn is_resonant<T: Real>(d: &Cx<T>, tol: f64) -> bool {
    cabs(d).to_f64() <= tol
}

/// Modes `n` in the window with `|λρⁿ − 1| ≤ tol`.
pub fn resonant_modes<T: Real>(lambda: &Cx<T>, rho: &Cx<T>, window: ModeWindow, tol: f64) -> Vec<i32> {
    window
        .modes()
        .filter(|&n| is_resonant(&denominator(lambda, rho, n), tol))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaOutcome<T: Real> {
    pub solution: LaurentPoly<T>,
    /// Resonant-mode part of the input; what `δ_λ` cannot reach.
    pub residue: LaurentPoly<T>,
    /// Largest `1/|1 − λρⁿ|` over the modes that were actually divided.
    pub max_denominator_inverse: T,
}

/// Solves `δ_λ G = h − residue` mode by mode; resonant modes of `G` are zero.
pub fn solve_delta<T: Real>(h: &LaurentPoly<T>, lambda: &Cx<T>, rho: &Cx<T>, tol: f64) -> DeltaOutcome<T> {
    let window = h.window();
    let mut solution = LaurentPoly::zero(window);
    let mut residue = LaurentPoly::zero(window);
    let mut max_inv = T::zero();
    if let Some((lo, hi)) = h.support() {
        for n in lo..=hi {
            let c = h.coeff(n);
            if c.re.is_zero() && c.im.is_zero() {
                continue;
            }
            let d = denominator(lambda, rho, n);
            // set() cannot fail: n lies inside the input window
            if is_resonant(&d, tol) {
                residue.set(n, c).expect("mode in window");
            } else {
                max_inv = max_inv.max_of(T::one() / cabs(&d));
                solution.set(n, c / d).expect("mode in window");
            }
        }
    }
    DeltaOutcome { solution, residue, max_denominator_inverse: max_inv }
}

/// `δ_λ(G)` itself.
pub fn apply_delta<T: Real>(g: &LaurentPoly<T>, lambda: &Cx<T>, rho: &Cx<T>) -> LaurentPoly<T> {
    let mut out = LaurentPoly::zero(g.window());
    for (n, c) in g.modes() {
        if !(c.re.is_zero() && c.im.is_zero()) {
            out.set(n, c.clone() * denominator(lambda, rho, n)).expect("mode in window");
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct KSConstant<T: Real> {
    pub value: T,
    /// Mode attaining the maximum.
    pub mode: i32,
    pub lambda: Cx<T>,
}

/// `max 1/|1 − λρⁿ|` over the non-resonant modes of the window.
pub fn ks_constant<T: Real>(lambda: &Cx<T>, rho: &Cx<T>, window: ModeWindow, tol: f64) -> Result<KSConstant<T>> {
    let mut best: Option<(T, i32)> = None;
    for n in window.modes() {
        let d = denominator(lambda, rho, n);
        if is_resonant(&d, tol) {
            continue;
        }
        let inv = T::one() / cabs(&d);
        if best.as_ref().map_or(true, |(b, _)| inv > *b) {
            best = Some((inv, n));
        }
    }
    let (value, mode) = best.ok_or_else(|| {
        Error::Precondition(format!("no non-resonant mode in window {window}"))
    })?;
    Ok(KSConstant { value, mode, lambda: lambda.clone() })
}

/// Twisting factors met by the flattening stages up to `(max_n, max_m)`:
/// `t^{1−ν} s^{−μ}` for the w-stages and `t^{−ν} s^{1−μ}` for the z-stages.
///
/// With torsion orders the exponents are reduced, so the list is finite and
/// free of repeats.
pub fn stage_factors<T: Real>(g: &GermTriple<T>, max_n: usize, max_m: usize) -> Result<Vec<Cx<T>>> {
    let (Some(pt), Some(ps)) = (g.t.torsion_order, g.s.torsion_order) else {
        return Err(Error::Precondition(
            "t and s need torsion orders; use diophantine_estimate for non-torsion factors".into(),
        ));
    };
    let (pt, ps) = (pt as i64, ps as i64);
    let mut exps: Vec<(i64, i64)> = Vec::new();
    for nu in 1..=max_n as i64 {
        for mu in 0..=max_m as i64 {
            for e in [((1 - nu).rem_euclid(pt), (-mu).rem_euclid(ps)), ((-nu).rem_euclid(pt), (1 - mu).rem_euclid(ps))] {
                if !exps.contains(&e) {
                    exps.push(e);
                }
            }
        }
    }
    exps.sort();
    Ok(exps
        .into_iter()
        .map(|(a, b)| cpowi(&g.t.value, a) * cpowi(&g.s.value, b))
        .collect())
}

/// Largest [`ks_constant`] over all [`stage_factors`].
pub fn aggregate_ks<T: Real>(
    g: &GermTriple<T>,
    max_n: usize,
    max_m: usize,
    window: ModeWindow,
    tol: f64,
) -> Result<KSConstant<T>> {
    let mut best: Option<KSConstant<T>> = None;
    for lambda in stage_factors(g, max_n, max_m)? {
        let k = ks_constant(&lambda, &g.rho, window, tol)?;
        if best.as_ref().map_or(true, |b| k.value > b.value) {
            best = Some(k);
        }
    }
    best.ok_or_else(|| Error::Precondition("no stage factors".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiophantineEstimate {
    /// `d_k` for k = 1..N.
    pub gaps: Vec<f64>,
    /// Least-squares slope of `|log d_k|` against `log k`.
    pub exponent: f64,
}

/// Gap proxies `d_k = min_{|n| ≤ k} |1 − λᵏρⁿ|` over non-resonant pairs.
pub fn diophantine_estimate<T: Real>(lambda: &Cx<T>, rho: &Cx<T>, n_max: usize, tol: f64) -> DiophantineEstimate {
    let mut gaps = Vec::with_capacity(n_max);
    for k in 1..=n_max as i64 {
        let lk = cpowi(lambda, k);
        let mut best = f64::INFINITY;
        for n in -k..=k {
            let d = cabs(&(cone::<T>() - lk.clone() * cpowi(rho, n))).to_f64();
            if d > tol && d < best {
                best = d;
            }
        }
        gaps.push(best);
    }
    let pts: Vec<(f64, f64)> = gaps
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .map(|(i, d)| (((i + 1) as f64).ln(), d.ln().abs()))
        .collect();
    DiophantineEstimate { exponent: slope(&pts), gaps }
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::FlatFactor;
    use crate::scalar::{cx, root_of_unity};
    use crate::series::JetShape;

    fn c(re: f64, im: f64) -> Cx<f64> {
        cx(re, im)
    }

    #[test]
    fn resonance_only_at_zero() {
        let w = ModeWindow::symmetric(5);
        assert_eq!(resonant_modes(&c(1.0, 0.0), &c(2.0, 0.0), w, RESONANCE_TOL), vec![0]);
        assert!(resonant_modes(&c(0.0, 1.0), &c(2.0, 0.0), w, RESONANCE_TOL).is_empty());
        let e2pi = c((2.0 * std::f64::consts::PI).exp(), 0.0);
        assert_eq!(resonant_modes(&c(1.0, 0.0), &e2pi, w, RESONANCE_TOL), vec![0]);
    }

    #[test]
    fn solve_examples() {
        let w = ModeWindow::symmetric(3);
        let x = LaurentPoly::monomial(w, 1, c(1.0, 0.0)).unwrap();
        let out = solve_delta(&x, &c(1.0, 0.0), &c(2.0, 0.0), RESONANCE_TOL);
        assert_eq!(out.solution.coeff(1), c(-1.0, 0.0));
        assert!(out.residue.is_zero());

        let three = LaurentPoly::constant(w, c(3.0, 0.0));
        let out = solve_delta(&three, &c(1.0, 0.0), &c(2.0, 0.0), RESONANCE_TOL);
        assert!(out.solution.is_zero());
        assert_eq!(out.residue.coeff(0), c(3.0, 0.0));

        let out = solve_delta(&x, &c(0.0, 1.0), &c(2.0, 0.0), RESONANCE_TOL);
        assert!(cabs(&(out.solution.coeff(1) - c(0.2, 0.4))) < 1e-16);
    }

    #[test]
    fn ks_examples() {
        let w5 = ModeWindow::symmetric(5);
        let k = ks_constant(&c(1.0, 0.0), &c(2.0, 0.0), w5, RESONANCE_TOL).unwrap();
        assert_eq!((k.value, k.mode), (2.0, -1));
        // every negative mode n gives 1/(1 + 2ⁿ); the largest is at n = −5
        let k = ks_constant(&c(-1.0, 0.0), &c(2.0, 0.0), w5, RESONANCE_TOL).unwrap();
        assert_eq!((k.value, k.mode), (32.0 / 33.0, -5));
        let k = ks_constant(&c(1.0, 0.0), &c(10.0, 0.0), ModeWindow::symmetric(3), RESONANCE_TOL).unwrap();
        assert!((k.value - 10.0 / 9.0).abs() < 1e-15);
        assert!(ks_constant(&c(1.0, 0.0), &c(2.0, 0.0), ModeWindow::symmetric(0), RESONANCE_TOL).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let shape = JetShape::new(4, 3);
        let win = ModeWindow::symmetric(5);
        let g = GermTriple::<f64>::linear(c(2.0, 0.0), FlatFactor::one(), FlatFactor::one(), shape, win);
        assert_eq!(aggregate_ks(&g, 4, 3, win, RESONANCE_TOL).unwrap().value, 2.0);

        let gi = GermTriple::<f64>::linear(
            c(2.0, 0.0),
            FlatFactor::root_of_unity(1, 4),
            FlatFactor::one(),
            shape,
            win,
        );
        assert_eq!(stage_factors(&gi, 4, 3).unwrap().len(), 4);
        let expect = (0..4)
            .map(|k| ks_constant(&root_of_unity::<f64>(k, 4), &c(2.0, 0.0), win, RESONANCE_TOL).unwrap().value)
            .fold(0.0, f64::max);
        assert_eq!(aggregate_ks(&gi, 4, 3, win, RESONANCE_TOL).unwrap().value, expect);

        let e2pi = (2.0 * std::f64::consts::PI).exp();
        let gh = GermTriple::<f64>::linear(c(e2pi, 0.0), FlatFactor::one(), FlatFactor::one(), shape, win);
        let k = aggregate_ks(&gh, 4, 3, win, RESONANCE_TOL).unwrap();
        assert!((k.value - 1.0 / (1.0 - 1.0 / e2pi)).abs() < 1e-15);

        let gn = GermTriple::<f64>::linear(
            c(2.0, 0.0),
            FlatFactor::new(root_of_unity(1, 7), None),
            FlatFactor::one(),
            shape,
            win,
        );
        assert!(aggregate_ks(&gn, 4, 3, win, RESONANCE_TOL).is_err());
    }

    #[test]
    fn diophantine_torsion_is_flat() {
        let est = diophantine_estimate(&c(1.0, 0.0), &c(2.0, 0.0), 40, RESONANCE_TOL);
        assert!(est.gaps.iter().all(|&d| d == 0.5));
        assert!(est.exponent.abs() < 1e-12);
        let w3: Cx<f64> = root_of_unity(1, 3);
        let est = diophantine_estimate(&w3, &c(2.0, 0.0), 60, RESONANCE_TOL);
        assert!(est.exponent.abs() < 0.05);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let th = 2.0 * std::f64::consts::PI * phi;
        let est = diophantine_estimate(&c(th.cos(), th.sin()), &c(2.0, 0.0), 200, RESONANCE_TOL);
        assert!(est.exponent.is_finite());
    }
}
