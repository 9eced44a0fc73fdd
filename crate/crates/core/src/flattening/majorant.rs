//! Dominant series for the flattening coefficients.
//!
//! `A(X, Y)` is the solution with `A = O(X²)` of
//!
//! ```text
//! A = K·R·[ A(Y + A) / (1 − RY − RA)
//!         + (A(X + A) + M·R·(X + A)²) / ((1 − RX − RA)(1 − RY − RA)) ]
//! ```
//!
//! computed as a truncated jet with X in the w-slot and Y in the z-slot.

use crate::cohomology::{aggregate_ks, ks_constant};
use crate::error::{Error, Result};
use crate::obstructions::ClassKind;
use crate::scalar::{cpowi, creal, Real};
use crate::series::{sup_norm_bound, JetShape, ModeWindow, PolydiscSpec, TransverseJet};

use super::FlatteningOutcome;

#[derive(Clone, Debug, PartialEq)]
pub struct MajorantTable<T: Real> {
    pub k: T,
    pub r: T,
    pub m: T,
    pub shape: JetShape,
    /// Coefficients in lexicographic `(ν, μ)` order; rows below 2 are absent.
    pub coeffs: Vec<((usize, usize), T)>,
    /// Largest coefficient change in one more application of the right side.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> MajorantTable<T> {
    pub fn get(&self, nu: usize, mu: usize) -> T {
        self.coeffs
            .iter()
            .find(|(i, _)| *i == (nu, mu))
            .map_or_else(T::zero, |(_, a)| a.clone())
    }

    /// `1 / max A_{ν,μ}^{1/(ν+μ)}`; infinite when A vanishes.
    pub fn radius_estimate(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((nu, mu), a) in &self.coeffs {
            let a = a.to_f64();
            if a > 0.0 {
                worst = worst.max(a.powf(1.0 / (nu + mu) as f64));
            }
        }
        if worst == 0.0 {
            f64::INFINITY
        } else {
            1.0 / worst
        }
    }
}

fn scalar_window() -> ModeWindow {
    ModeWindow::symmetric(0)
}

/// `1 / (1 − u)` for `u` without constant term.
fn geometric<T: Real>(u: &TransverseJet<T>) -> Result<TransverseJet<T>> {
    let shape = u.shape();
    let one = TransverseJet::monomial(shape, scalar_window(), 0, 0, creal(T::one()));
    let mut acc = one.clone();
    let mut pow = one;
    for _ in 0..=shape.total() {
        pow = pow.mul(u)?;
        if pow.is_zero() {
            break;
        }
        acc = acc.add(&pow)?;
    }
    Ok(acc)
}

fn rhs<T: Real>(a: &TransverseJet<T>, k: &T, r: &T, m: &T) -> Result<TransverseJet<T>> {
    let shape = a.shape();
    let win = scalar_window();
    let x = TransverseJet::var_w(shape, win);
    let y = TransverseJet::var_z(shape, win);
    let rc = creal(r.clone());
    let inv_y = geometric(&y.add(a)?.scale(&rc))?;
    let inv_x = geometric(&x.add(a)?.scale(&rc))?;
    let xa = x.add(a)?;
    let first = a.mul(&y.add(a)?)?.mul(&inv_y)?;
    let num = a.mul(&xa)?.add(&xa.mul(&xa)?.scale(&creal(m.clone() * r.clone())))?;
    let second = num.mul(&inv_x)?.mul(&inv_y)?;
    Ok(first.add(&second)?.scale(&creal(k.clone() * r.clone())))
}

/// Solves the majorant equation by iteration from `A = 0` until the
/// truncated jet is stable.
pub fn solve_majorant<T: Real>(k: T, r: T, m: T, shape: JetShape) -> Result<MajorantTable<T>> {
    if !(k > T::zero() && r > T::zero() && m >= T::zero()) {
        return Err(Error::Precondition(format!("majorant needs K, R > 0 and M >= 0 (got {k}, {r}, {m})")));
    }
    let mut a = TransverseJet::zero(shape, scalar_window());
    // every pass fixes at least one more total degree
    let max_iter = shape.total() + 3;
    let mut iterations = 0;
    loop {
        let next = rhs(&a, &k, &r, &m)?;
        iterations += 1;
        if next == a {
            break;
        }
        if iterations > max_iter {
            return Err(Error::Internal("majorant iteration did not stabilize".into()));
        }
        a = next;
    }
    let residual = rhs(&a, &k, &r, &m)?.distance(&a)?;
    let coeffs = shape
        .iter()
        .filter(|&(nu, _)| nu >= 2)
        .map(|(nu, mu)| ((nu, mu), a.get(nu, mu).coeff(0).re))
        .collect();
    Ok(MajorantTable { k, r, m, shape, coeffs, residual, iterations })
}

/// Coefficients `2K·R^{m+1}·M·(2K+1)ᵐ` of `w·ζᵐ`, m = 0..=order_m, in the
/// dominant series for the row-1 z-change.
pub fn lemma312_majorant<T: Real>(k: &T, r: &T, m: &T, order_m: usize) -> Vec<T> {
    let two = T::from_i64(2);
    let base = two.clone() * k.clone() * r.clone() * m.clone();
    let step = (two * k.clone() + T::one()) * r.clone();
    let mut out = Vec::with_capacity(order_m + 1);
    let mut c = base;
    for _ in 0..=order_m {
        out.push(c.clone());
        c = c * step.clone();
    }
    out
}

#[derive(Clone, Debug)]
pub enum CertifyParams<T: Real> {
    Explicit { k: T, r: T, m: T },
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominationFlag<T: Real> {
    pub kind: ClassKind,
    pub nu: usize,
    pub mu: usize,
    pub bound: T,
    pub majorant: T,
    pub dominated: bool,
}

#[derive(Clone, Debug)]
pub struct Certificate<T: Real> {
    pub k: T,
    pub r: T,
    pub m: T,
    /// Lower bounds the parameters were checked against: KS constant, `1/min radius`, defect sup.
    pub required: (T, T, T),
    /// Parameter problems; a certificate with findings carries no table.
    pub findings: Vec<String>,
    pub table: Option<MajorantTable<T>>,
    pub flags: Vec<DominationFlag<T>>,
    pub q1_flags: Vec<DominationFlag<T>>,
    pub radius: Option<f64>,
}

impl<T: Real> Certificate<T> {
    pub fn all_dominated(&self) -> bool {
        self.table.is_some() && self.flags.iter().chain(&self.q1_flags).all(|f| f.dominated)
    }
}

/// Largest inverse denominator over the twisting factors of all stages.
fn required_k<T: Real>(out: &FlatteningOutcome<T>, tol: f64) -> Result<T> {
    let g = &out.germ;
    let shape = g.shape();
    let window = g.window();
    if g.t.torsion_order.is_some() && g.s.torsion_order.is_some() {
        return Ok(aggregate_ks(g, shape.nw, shape.total(), window, tol)?.value);
    }
    // finitely many stages, so the factors can be enumerated without reduction
    let mut best = T::zero();
    for nu in 1..=shape.nw as i64 {
        for mu in 0..=shape.total() as i64 {
            for (a, b) in [(1 - nu, -mu), (-nu, 1 - mu)] {
                let lambda = cpowi(&g.t.value, a) * cpowi(&g.s.value, b);
                best = best.max_of(ks_constant(&lambda, &g.rho, window, tol)?.value);
            }
        }
    }
    Ok(best)
}

/// Sup bound of the defect tables the majorant has to dominate.
fn required_m<T: Real>(out: &FlatteningOutcome<T>, disc: &PolydiscSpec<T>) -> T {
    sup_norm_bound(&out.extension.g, disc)
        .max_of(sup_norm_bound(&out.extension.q, disc))
        .max_of(sup_norm_bound(&out.germ.q, disc))
}

/// Checks the parameters, solves the majorant and compares it against the
/// computed coefficient tables.
pub fn certify<T: Real>(out: &FlatteningOutcome<T>, params: CertifyParams<T>, tol: f64) -> Result<Certificate<T>> {
    let g = &out.germ;
    let pd = &g.polydisc;
    let min_radius = if pd.r_w < pd.r_z { pd.r_w.clone() } else { pd.r_z.clone() };
    let need_r = T::one() / min_radius;
    let need_k = required_k(out, tol)?;
    let (k, r, m, need_m) = match params {
        CertifyParams::Explicit { k, r, m } => {
            let rr = if r > T::zero() { r.clone() } else { need_r.clone() };
            let disc = pd.with_radii(T::one() / rr.clone(), T::one() / rr);
            let need_m = required_m(out, &disc);
            (k, r, m, need_m)
        }
        CertifyParams::Auto => {
            let disc = pd.with_radii(T::one() / need_r.clone(), T::one() / need_r.clone());
            let need_m = required_m(out, &disc);
            (need_k.clone(), need_r.clone(), need_m.clone() * T::from_i64(2), need_m)
        }
    };

    let mut findings = Vec::new();
    if !out.success {
        findings.push("flattening did not succeed; nothing to certify".to_string());
    }
    if !(k > T::zero() && r > T::zero() && m >= T::zero()) {
        findings.push(format!(
            "parameters must be positive (K = {}, R = {}, M = {})",
            k.to_decimal(),
            r.to_decimal(),
            m.to_decimal()
        ));
    } else {
        if k < need_k {
            findings.push(format!("K too small: {} < KS constant {}", k.to_decimal(), need_k.to_decimal()));
        }
        if r < need_r {
            findings.push(format!("R too small: {} < 1/min(r_w, r_z) = {}", r.to_decimal(), need_r.to_decimal()));
        }
        if m < need_m {
            findings.push(format!("M too small: {} < defect sup bound {}", m.to_decimal(), need_m.to_decimal()));
        }
    }

    let mut cert = Certificate {
        k: k.clone(),
        r: r.clone(),
        m: m.clone(),
        required: (need_k, need_r, need_m),
        findings,
        table: None,
        flags: Vec::new(),
        q1_flags: Vec::new(),
        radius: None,
    };
    if !cert.findings.is_empty() {
        return Ok(cert);
    }

    let shape = g.shape();
    let table = solve_majorant(k.clone(), r.clone(), m.clone(), shape)?;
    let norm = |p: &crate::series::LaurentPoly<T>| p.annulus_norm(&pd.r_in, &pd.r_out);
    for (nu, mu) in shape.iter().filter(|&(nu, _)| nu >= 2) {
        let a = table.get(nu, mu);
        for (kind, jet) in [(ClassKind::U, &out.tables.g), (ClassKind::V, &out.tables.q)] {
            let bound = norm(jet.get(nu, mu));
            cert.flags.push(DominationFlag {
                kind,
                nu,
                mu,
                dominated: bound <= a,
                bound,
                majorant: a.clone(),
            });
        }
    }
    let l312 = lemma312_majorant(&k, &r, &m, out.tables.q1.len().saturating_sub(1));
    for (mu, (p, a)) in out.tables.q1.iter().zip(l312).enumerate() {
        let bound = norm(p);
        cert.q1_flags.push(DominationFlag {
            kind: ClassKind::V,
            nu: 1,
            mu,
            dominated: bound <= a,
            bound,
            majorant: a,
        });
    }
    cert.radius = Some(table.radius_estimate());
    cert.table = Some(table);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_coefficient() {
        let t = solve_majorant(2.0, 1.0, 1.0, JetShape::new(2, 0)).unwrap();
        assert_eq!(t.get(2, 0), 2.0);
        let t = solve_majorant(1.0, 1.0, 1.0, JetShape::new(2, 0)).unwrap();
        assert_eq!(t.get(2, 0), 1.0);
        assert_eq!(t.residual, 0.0);
    }

    #[test]
    fn no_low_rows() {
        let t = solve_majorant(1.5, 2.0, 0.25, JetShape::new(4, 3)).unwrap();
        assert!(t.coeffs.iter().all(|((nu, _), a)| *nu >= 2 && *a >= 0.0));
        assert_eq!(t.residual, 0.0);
        assert!(t.get(2, 0) == 1.5 * 0.25 * 4.0);
    }

    #[test]
    fn lemma312_examples() {
        assert_eq!(lemma312_majorant(&1.0, &1.0, &1.0, 3), vec![2.0, 6.0, 18.0, 54.0]);
        assert_eq!(lemma312_majorant(&1.0, &0.5, &1.0, 2), vec![1.0, 1.5, 2.25]);
        assert!(lemma312_majorant(&1.0, &1.0, &0.0, 3).iter().all(|c| *c == 0.0));
    }
}
