//! The geometric datum in the quotient model: a compact curve `C = ℂ*/⟨ρ⟩`,
//! a hypersurface `S = {w = 0}` and the curve `C = {w = z = 0}`, glued by the
//! deck map
//!
//! ```text
//! Γ(x, w, z) = (ρx, W, Z),   t·W = w + Σ g_{ν,μ}(x) wᵛzᵘ,   s·Z = z + Σ q_{ν,μ}(x) wᵛzᵘ.
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{cabs, cis_zero, cone, cpowi, creal, root_of_unity, Cx, Real};
use crate::series::{
    invert_map, substitute, JetShape, LaurentPoly, ModeWindow, PolydiscSpec, TransverseJet,
};

/// Default tolerance for "vanishes" and unit-modulus checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A unit-modulus constant, optionally of known finite order.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatFactor<T: Real> {
    pub value: Cx<T>,
    pub torsion_order: Option<u32>,
}

impl<T: Real> FlatFactor<T> {
    pub fn new(value: Cx<T>, torsion_order: Option<u32>) -> Self {
        FlatFactor { value, torsion_order }
    }

    pub fn one() -> Self {
        FlatFactor { value: cone(), torsion_order: Some(1) }
    }

    /// `exp(2πi·k/p)` with its exact order recorded.
    pub fn root_of_unity(k: i64, p: u32) -> Self {
        let p = p.max(1);
        let order = p / gcd(k.rem_euclid(p as i64) as u32, p);
        FlatFactor { value: root_of_unity(k, p), torsion_order: Some(order) }
    }

    pub fn findings(&self, name: &str, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let modulus = cabs(&self.value).to_f64();
        if !modulus.is_finite() || (modulus - 1.0).abs() > tol {
            out.push(format!("{name}: unit-modulus violation (|{name}| = {modulus})"));
            return out;
        }
        if let Some(p) = self.torsion_order {
            if p == 0 {
                out.push(format!("{name}: torsion order must be positive"));
            } else if !is_unit(&cpowi(&self.value, p as i64), tol) {
                out.push(format!("{name}: declared torsion order {p} but {name}^{p} != 1"));
            } else if let Some(d) = (1..p).find(|d| p % d == 0 && is_unit(&cpowi(&self.value, *d as i64), tol)) {
                out.push(format!("{name}: declared torsion order {p} is not minimal ({name}^{d} = 1)"));
            }
        }
        out
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn is_unit<T: Real>(z: &Cx<T>, tol: f64) -> bool {
    cabs(&(z.clone() - cone())).to_f64() <= tol
}

/// Lexicographically ordered pair `(n, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SystemType {
    pub n: usize,
    pub m: usize,
}

impl SystemType {
    pub fn new(n: usize, m: usize) -> Self {
        SystemType { n, m }
    }
}

impl fmt::Display for SystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, self.m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GermTriple<T: Real> {
    pub rho: Cx<T>,
    pub t: FlatFactor<T>,
    pub s: FlatFactor<T>,
    pub g: TransverseJet<T>,
    pub q: TransverseJet<T>,
    pub polydisc: PolydiscSpec<T>,
}

impl<T: Real> GermTriple<T> {
    /// The linear germ: `Γ(x, w, z) = (ρx, t⁻¹w, s⁻¹z)`.
    pub fn linear(
        rho: Cx<T>,
        t: FlatFactor<T>,
        s: FlatFactor<T>,
        shape: JetShape,
        window: ModeWindow,
    ) -> Self {
        let polydisc = default_polydisc(&rho);
        GermTriple {
            rho,
            t,
            s,
            g: TransverseJet::zero(shape, window),
            q: TransverseJet::zero(shape, window),
            polydisc,
        }
    }

    pub fn shape(&self) -> JetShape {
        self.g.shape()
    }

    pub fn window(&self) -> ModeWindow {
        self.g.window()
    }

    pub fn validate(&self) -> Vec<String> {
        self.validate_with_tol(DEFAULT_TOL)
    }

    pub fn validate_with_tol(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let r = cabs(&self.rho).to_f64();
        if !(r > 1.0 && r.is_finite()) {
            out.push(format!("rho: deck multiplier must satisfy |rho| > 1 (got {r})"));
        }
        out.extend(self.t.findings("t", tol));
        out.extend(self.s.findings("s", tol));
        if self.g.shape() != self.q.shape() || self.g.window() != self.q.window() {
            out.push("g and q tables have different shapes".into());
            return out;
        }
        for (name, jet) in [("g", &self.g), ("q", &self.q)] {
            for ((nu, mu), p) in jet.terms() {
                if nu == 0 {
                    out.push(format!("{name}: nu=0 entry violation at ({nu},{mu})"));
                }
                if name == "g" && nu == 1 {
                    out.push(format!(
                        "g: entry ({nu},{mu}) nonzero; w must satisfy t*(w o Gamma) = w + O(w^2)"
                    ));
                }
                if p.modes().any(|(_, c)| !c.re.is_finite() || !c.im.is_finite()) {
                    out.push(format!("{name}: non-finite coefficient at ({nu},{mu})"));
                }
            }
        }
        if let Err(e) = self.polydisc.check() {
            out.push(format!("polydisc: {e}"));
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let f = self.validate();
        if f.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(f))
        }
    }

    /// `W = t⁻¹(w + g)`, the w-component of the deck map.
    pub fn deck_w(&self) -> Result<TransverseJet<T>> {
        let w = TransverseJet::var_w(self.shape(), self.window());
        Ok(w.add(&self.g)?.scale(&(cone::<T>() / self.t.value.clone())))
    }

    /// `Z = s⁻¹(z + q)`.
    pub fn deck_z(&self) -> Result<TransverseJet<T>> {
        let z = TransverseJet::var_z(self.shape(), self.window());
        Ok(z.add(&self.q)?.scale(&(cone::<T>() / self.s.value.clone())))
    }

    /// `f∘Γ = f(ρx, W, Z)`.
    pub fn deck_pullback(&self, f: &TransverseJet<T>) -> Result<TransverseJet<T>> {
        substitute(f, &self.deck_w()?, &self.deck_z()?, &self.rho)
    }

    /// True when every g-entry lexicographically below `(n+1, m)` vanishes.
    pub fn check_system_type(&self, ty: SystemType, tol: f64) -> Result<bool> {
        Ok(self.first_type_violation(ty, tol)?.is_none())
    }

    /// Earliest g-entry below `(n+1, m)` that does not vanish.
    pub fn first_type_violation(&self, ty: SystemType, tol: f64) -> Result<Option<(usize, usize)>> {
        let shape = self.shape();
        if !shape.contains(ty.n + 1, ty.m) {
            return Err(Error::Undecidable { nu: ty.n + 1, mu: ty.m });
        }
        Ok(shape
            .iter()
            .take_while(|&(nu, mu)| (nu, mu) < (ty.n + 1, ty.m))
            .find(|&(nu, mu)| self.g.get(nu, mu).max_abs().to_f64() > tol))
    }

    /// True when every q-entry with ν < n, or ν = n and μ < m, vanishes.
    pub fn check_extension_type(&self, ty: SystemType, tol: f64) -> Result<bool> {
        Ok(self.first_extension_violation(ty, tol)?.is_none())
    }

    pub fn first_extension_violation(
        &self,
        ty: SystemType,
        tol: f64,
    ) -> Result<Option<(usize, usize)>> {
        let shape = self.shape();
        if !shape.contains(ty.n, ty.m) {
            return Err(Error::Undecidable { nu: ty.n, mu: ty.m });
        }
        Ok(shape
            .iter()
            .take_while(|&(nu, mu)| (nu, mu) < (ty.n, ty.m))
            .find(|&(nu, mu)| self.q.get(nu, mu).max_abs().to_f64() > tol))
    }

    /// The same germ expressed in the coordinates `(w′, z′)` of `ch`.
    pub fn apply_gauge(&self, ch: &GaugeChange<T>) -> Result<GermTriple<T>> {
        ch.check_against(self)?;
        let (psi_w, psi_z) = ch.map(self.shape(), self.window())?;
        let (inv_w, inv_z) = ch.inverse_map(self.shape(), self.window())?;
        let one = cone::<T>();
        let w_new = TransverseJet::var_w(self.shape(), self.window());
        let z_new = TransverseJet::var_z(self.shape(), self.window());

        let tw = self.deck_pullback(&psi_w)?.scale(&self.t.value);
        let sz = self.deck_pullback(&psi_z)?.scale(&self.s.value);
        // rows that vanish identically for a valid gauge; drop rounding noise there
        let g = substitute(&tw, &inv_w, &inv_z, &one)?.sub(&w_new)?.filter(|nu, _| nu >= 2);
        let q = substitute(&sz, &inv_w, &inv_z, &one)?.sub(&z_new)?.filter(|nu, _| nu >= 1);
        Ok(GermTriple { g, q, ..self.clone() })
    }

    /// Replaces the tables while keeping the rest of the datum.
    pub fn with_tables(&self, g: TransverseJet<T>, q: TransverseJet<T>) -> Self {
        GermTriple { g, q, ..self.clone() }
    }
}

/// Default polydisc: the fundamental annulus `|ρ|^{-1/2} ≤ |x| ≤ |ρ|^{1/2}`, unit transverse radii.
pub fn default_polydisc<T: Real>(rho: &Cx<T>) -> PolydiscSpec<T> {
    let r = cabs(rho).sqrt();
    let r = if r >= T::one() { r } else { T::one() };
    PolydiscSpec { r_in: T::one() / r.clone(), r_out: r, r_w: T::one(), r_z: T::one() }
}

/// Coordinate change `w′ = scale·w + dW`, `z′ = z + dZ`.
///
/// `dW` lives in rows ν ≥ 2; `dZ` in rows ν ≥ 1. A constant `scale` covers the
/// linear part of a unit rescale; see [`GaugeChange::unit_rescale`].
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeChange<T: Real> {
    pub scale: Cx<T>,
    pub dw: TransverseJet<T>,
    pub dz: TransverseJet<T>,
}

impl<T: Real> GaugeChange<T> {
    pub fn identity(shape: JetShape, window: ModeWindow) -> Self {
        GaugeChange {
            scale: cone(),
            dw: TransverseJet::zero(shape, window),
            dz: TransverseJet::zero(shape, window),
        }
    }

    pub fn tangent(dw: TransverseJet<T>, dz: TransverseJet<T>) -> Self {
        GaugeChange { scale: cone(), dw, dz }
    }

    /// Rescale `w′ = w / a(x)` for a nowhere-vanishing `a`, normalized so the
    /// linear coefficient stays constant: `w′ = w/a₀ + (a − a₀)·w²`. The
    /// x-dependent part of `a` is pushed to second order, where it only adds
    /// coboundaries.
    ///
    /// `a` must be dominated by its mode-0 coefficient on the annulus
    /// `r_in ≤ |x| ≤ r_out`.
    pub fn unit_rescale(
        a: &LaurentPoly<T>,
        shape: JetShape,
        r_in: &T,
        r_out: &T,
    ) -> Result<Self> {
        let a0 = a.coeff(0);
        let mut rest = a.clone();
        rest.set(0, creal(T::zero()))?;
        if rest.window() != a.window() {
            return Err(Error::Shape("rescale window".into()));
        }
        if !(cabs(&a0) > rest.annulus_norm(r_in, r_out)) {
            return Err(Error::Precondition(
                "rescale factor may vanish on the annulus (mode 0 does not dominate)".into(),
            ));
        }
        let window = a.window();
        let mut dw = TransverseJet::zero(shape, window);
        if shape.contains(2, 0) {
            dw.set(2, 0, rest)?;
        }
        Ok(GaugeChange {
            scale: cone::<T>() / a0,
            dw,
            dz: TransverseJet::zero(shape, window),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.scale == cone() && self.dw.is_zero() && self.dz.is_zero()
    }

    fn check_against(&self, g: &GermTriple<T>) -> Result<()> {
        if self.dw.shape() != g.shape()
            || self.dz.shape() != g.shape()
            || self.dw.window() != g.window()
            || self.dz.window() != g.window()
        {
            return Err(Error::Shape("gauge and germ shapes differ".into()));
        }
        self.check()
    }

    pub fn check(&self) -> Result<()> {
        if cis_zero(&self.scale) {
            return Err(Error::Precondition("gauge scale must be nonzero".into()));
        }
        if let Some(((nu, mu), _)) = self.dw.terms().find(|((nu, _), _)| *nu < 2) {
            return Err(Error::Precondition(format!(
                "gauge dW has a forbidden entry at ({nu},{mu})"
            )));
        }
        if let Some(((nu, mu), _)) = self.dz.terms().find(|((nu, _), _)| *nu < 1) {
            return Err(Error::Precondition(format!(
                "gauge dZ has a forbidden entry at ({nu},{mu})"
            )));
        }
        Ok(())
    }

    /// `(w′, z′)` as jets in `(w, z)`.
    pub fn map(
        &self,
        shape: JetShape,
        window: ModeWindow,
    ) -> Result<(TransverseJet<T>, TransverseJet<T>)> {
        let w = TransverseJet::var_w(shape, window).scale(&self.scale).add(&self.dw)?;
        let z = TransverseJet::var_z(shape, window).add(&self.dz)?;
        Ok((w, z))
    }

    /// `(w, z)` as jets in `(w′, z′)`.
    pub fn inverse_map(
        &self,
        shape: JetShape,
        window: ModeWindow,
    ) -> Result<(TransverseJet<T>, TransverseJet<T>)> {
        let (_, z) = self.map(shape, window)?;
        let inv_scale = cone::<T>() / self.scale.clone();
        // w + dW/scale has linear part exactly w; invert, then undo the scaling
        let w = TransverseJet::var_w(shape, window).add(&self.dw.scale(&inv_scale))?;
        let (v, zeta) = invert_map(&w, &z)?;
        let unscale_w = TransverseJet::var_w(shape, window).scale(&inv_scale);
        let id_z = TransverseJet::var_z(shape, window);
        let one = cone::<T>();
        Ok((
            substitute(&v, &unscale_w, &id_z, &one)?,
            substitute(&zeta, &unscale_w, &id_z, &one)?,
        ))
    }

    /// The gauge `self` followed by `next`.
    pub fn then(&self, next: &GaugeChange<T>) -> Result<GaugeChange<T>> {
        let shape = self.dw.shape();
        let window = self.dw.window();
        let (w1, z1) = self.map(shape, window)?;
        let (w2, z2) = next.map(shape, window)?;
        let one = cone::<T>();
        let w = substitute(&w2, &w1, &z1, &one)?;
        let z = substitute(&z2, &w1, &z1, &one)?;
        let scale = self.scale.clone() * next.scale.clone();
        let dw = w.sub(&TransverseJet::var_w(shape, window).scale(&scale))?;
        let dz = z.sub(&TransverseJet::var_z(shape, window))?;
        Ok(GaugeChange { scale, dw, dz })
    }
}
