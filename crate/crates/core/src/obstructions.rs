//! Obstruction classes `u_{n,m}` (hypersurface) and `v_{n,m}` (extension of
//! the curve's defining function).
//!
//! In the quotient model a class is a twisted 1-cocycle, i.e. one Laurent
//! polynomial; modulo coboundaries only the mode-0 coefficient survives, and
//! only when the twisting factor is 1.

use std::fmt;

use crate::error::{Error, Result};
use crate::flattening::{normalize_below, Stage};
use crate::germ::{is_unit, GaugeChange, GermTriple, SystemType};
use crate::scalar::{cabs, cone, cpowi, czero, Cx, Real};
use crate::series::LaurentPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassKind {
    /// `u_{n,m}`, read off the w-table at `(n+1, m)`.
    U,
    /// `v_{n,m}`, read off the z-table at `(n, m)`.
    V,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassKind::U => "u",
            ClassKind::V => "v",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerEntry<T: Real> {
    pub kind: ClassKind,
    pub n: usize,
    pub m: usize,
    /// `tⁿsᵐ` for u-classes, `tⁿs^{m−1}` for v-classes.
    pub factor: Cx<T>,
    pub resonant: bool,
    pub class_value: Cx<T>,
    pub cocycle: LaurentPoly<T>,
}

impl<T: Real> LedgerEntry<T> {
    pub fn new(kind: ClassKind, n: usize, m: usize, factor: Cx<T>, cocycle: LaurentPoly<T>, tol: f64) -> Self {
        let resonant = is_unit(&factor, tol);
        let class_value = if resonant { cocycle.coeff(0) } else { czero() };
        LedgerEntry { kind, n, m, factor, resonant, class_value, cocycle }
    }

    pub fn vanishes(&self, tol: f64) -> bool {
        cabs(&self.class_value).to_f64() <= tol
    }

    /// Flattening stage at which this class shows up.
    pub fn stage(&self) -> Stage {
        match self.kind {
            ClassKind::U => Stage::new(ClassKind::U, self.n + 1, self.m),
            ClassKind::V => Stage::new(ClassKind::V, self.n, self.m),
        }
    }
}

impl<T: Real> fmt::Display for LedgerEntry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}_({},{}) = {} {} (factor {} {}, {})",
            self.kind,
            self.n,
            self.m,
            self.class_value.re,
            self.class_value.im,
            self.factor.re,
            self.factor.im,
            if self.resonant { "resonant" } else { "non-resonant" }
        )
    }
}

/// Classes computed for one germ in one coordinate system; `fingerprint`
/// identifies that germ.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionLedger<T: Real> {
    pub fingerprint: String,
    pub entries: Vec<LedgerEntry<T>>,
}

impl<T: Real> ObstructionLedger<T> {
    pub fn new(g: &GermTriple<T>) -> Self {
        ObstructionLedger { fingerprint: crate::scenario::fingerprint(g), entries: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Earliest entry (in flattening order) whose class does not vanish.
    pub fn first_nonvanishing(&self, tol: f64) -> Option<&LedgerEntry<T>> {
        self.entries
            .iter()
            .filter(|e| !e.vanishes(tol))
            .min_by_key(|e| e.stage())
    }
}

pub(crate) fn u_factor<T: Real>(g: &GermTriple<T>, n: usize, m: usize) -> Cx<T> {
    cpowi(&g.t.value, n as i64) * cpowi(&g.s.value, m as i64)
}

pub(crate) fn v_factor<T: Real>(g: &GermTriple<T>, n: usize, m: usize) -> Cx<T> {
    cpowi(&g.t.value, n as i64) * cpowi(&g.s.value, m as i64 - 1)
}

/// `u_{n,m}`: the w-table entry `(n+1, m)` of a germ of type `(n, m)`.
pub fn compute_unm<T: Real>(g: &GermTriple<T>, n: usize, m: usize, tol: f64) -> Result<LedgerEntry<T>> {
    if n == 0 {
        return Err(Error::Precondition("u-classes start at n = 1".into()));
    }
    if let Some((nu, mu)) = g.first_type_violation(SystemType::new(n, m), tol)? {
        return Err(Error::TypeViolation { n, m, nu, mu });
    }
    Ok(LedgerEntry::new(ClassKind::U, n, m, u_factor(g, n, m), g.g.get(n + 1, m).clone(), tol))
}

/// The graded family `u_{n,0}, u_{n,1}, …` of a germ of type `(n, 0)`.
pub fn compute_un<T: Real>(g: &GermTriple<T>, n: usize, tol: f64) -> Result<Vec<LedgerEntry<T>>> {
    if n == 0 {
        return Err(Error::Precondition("u-classes start at n = 1".into()));
    }
    if let Some((nu, mu)) = g.first_type_violation(SystemType::new(n, 0), tol)? {
        return Err(Error::TypeViolation { n, m: 0, nu, mu });
    }
    let shape = g.shape();
    Ok((0..=shape.row_max(n + 1))
        .map(|m| LedgerEntry::new(ClassKind::U, n, m, u_factor(g, n, m), g.g.get(n + 1, m).clone(), tol))
        .collect())
}

/// `v_{n,m}`: the z-table entry `(n, m)` of a germ of extension type `(n, m)`.
pub fn compute_vnm<T: Real>(g: &GermTriple<T>, n: usize, m: usize, tol: f64) -> Result<LedgerEntry<T>> {
    if n == 0 {
        return Err(Error::Precondition("v-classes start at n = 1".into()));
    }
    if let Some((nu, mu)) = g.first_extension_violation(SystemType::new(n, m), tol)? {
        return Err(Error::TypeViolation { n, m, nu, mu });
    }
    Ok(LedgerEntry::new(ClassKind::V, n, m, v_factor(g, n, m), g.q.get(n, m).clone(), tol))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RescaleCovariance<T: Real> {
    pub before: Vec<LedgerEntry<T>>,
    pub after: Vec<LedgerEntry<T>>,
    /// Mode-0 part `a₀` of the rescale factor.
    pub scale: Cx<T>,
    /// `a₀ⁿ`, the factor expected between the two families.
    pub predicted_ratio: Cx<T>,
}

/// Recomputes the `u_n` family after the unit rescale `w′ ≈ w / a(x)`.
///
/// The rescale is normalized as in [`GaugeChange::unit_rescale`]; its
/// x-dependent remainder breaks the type below row `n+1`, so the rescaled
/// germ is renormalized there before the family is read off.
pub fn unit_rescale_covariance<T: Real>(
    g: &GermTriple<T>,
    a: &LaurentPoly<T>,
    n: usize,
    tol: f64,
) -> Result<RescaleCovariance<T>> {
    let before = compute_un(g, n, tol)?;
    let ch = GaugeChange::unit_rescale(a, g.shape(), &g.polydisc.r_in, &g.polydisc.r_out)?;
    let rescaled = g.apply_gauge(&ch)?;
    let normalized = normalize_below(&rescaled, Stage::new(ClassKind::U, n + 1, 0), tol)?;
    let after = compute_un(&normalized, n, tol)?;
    let a0 = cone::<T>() / ch.scale;
    let predicted_ratio = cpowi(&a0, n as i64);
    Ok(RescaleCovariance { before, after, scale: a0, predicted_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::FlatFactor;
    use crate::scalar::cx;
    use crate::series::{JetShape, ModeWindow};

    fn germ(t: FlatFactor<f64>) -> GermTriple<f64> {
        GermTriple::linear(cx(2.0, 0.0), t, FlatFactor::one(), JetShape::new(4, 3), ModeWindow::symmetric(6))
    }

    #[test]
    fn unm_examples() {
        let g = germ(FlatFactor::one());
        let e = compute_unm(&g, 1, 0, 1e-9).unwrap();
        assert!(e.resonant && e.class_value == czero() && e.cocycle.is_zero());

        let mut h = germ(FlatFactor::one());
        h.g.add_term(2, 0, 0, cx(0.5, 0.0)).unwrap();
        assert_eq!(compute_unm(&h, 1, 0, 1e-9).unwrap().class_value, cx(0.5, 0.0));
        assert!(matches!(
            compute_unm(&h, 1, 1, 1e-9),
            Err(Error::TypeViolation { nu: 2, mu: 0, .. })
        ));

        let mut k = germ(FlatFactor::one());
        k.g.add_term(2, 0, 1, cx(1.0, 0.0)).unwrap();
        let e = compute_unm(&k, 1, 0, 1e-9).unwrap();
        assert!(e.resonant && e.class_value == czero());
    }

    #[test]
    fn un_family() {
        let mut g = germ(FlatFactor::one());
        g.g.add_term(2, 1, 0, cx(1.0, 0.0)).unwrap();
        let fam = compute_un(&g, 1, 1e-9).unwrap();
        assert_eq!(fam[0].class_value, czero());
        assert_eq!(fam[1].class_value, cx(1.0, 0.0));

        let mut h = germ(FlatFactor::root_of_unity(1, 4));
        h.g.add_term(2, 0, 1, cx(1.0, 0.0)).unwrap();
        let fam = compute_un(&h, 1, 1e-9).unwrap();
        assert!(!fam[0].resonant && fam[0].class_value == czero());
    }

    #[test]
    fn vnm_examples() {
        let mut g = germ(FlatFactor::one());
        assert_eq!(compute_vnm(&g, 1, 0, 1e-9).unwrap().class_value, czero());
        g.q.add_term(1, 0, 0, cx(0.25, 0.0)).unwrap();
        assert_eq!(compute_vnm(&g, 1, 0, 1e-9).unwrap().class_value, cx(0.25, 0.0));
        let mut h = germ(FlatFactor::one());
        h.q.add_term(1, 0, 1, cx(0.25, 0.0)).unwrap();
        assert_eq!(compute_vnm(&h, 1, 0, 1e-9).unwrap().class_value, czero());
    }

    #[test]
    fn constant_rescale_scales_class() {
        let mut g = germ(FlatFactor::one());
        g.g.add_term(2, 0, 0, cx(0.5, 0.0)).unwrap();
        let win = g.window();
        let a = LaurentPoly::constant(win, cx(2.0, 0.0));
        let cov = unit_rescale_covariance(&g, &a, 1, 1e-9).unwrap();
        assert_eq!(cov.before[0].class_value, cx(0.5, 0.0));
        assert!(cabs(&(cov.after[0].class_value.clone() - cx(1.0, 0.0))) < 1e-14);

        let one = LaurentPoly::constant(win, cx(1.0, 0.0));
        let cov = unit_rescale_covariance(&g, &one, 1, 1e-9).unwrap();
        assert_eq!(cov.before, cov.after);
    }
}
