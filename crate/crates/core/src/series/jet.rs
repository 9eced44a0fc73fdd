use std::fmt;

use super::laurent::{LaurentPoly, ModeWindow};
use crate::error::{Error, Result};
use crate::scalar::{cabs, cone, Cx, Real};

/// Truncation orders of a [`TransverseJet`].
///
/// Retained monomials `wᵛzᵘ` satisfy `ν ≤ nw` and `ν + μ ≤ nw + nz`. This
/// staircase contains the `(nw, nz)` box and, unlike the box, is closed under
/// substitution of maps with zero constant term, so every retained
/// coefficient of a composite is determined by retained coefficients only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct JetShape {
    pub nw: usize,
    pub nz: usize,
}

impl JetShape {
    pub fn new(nw: usize, nz: usize) -> Self {
        JetShape { nw, nz }
    }

    pub fn total(&self) -> usize {
        self.nw + self.nz
    }

    pub fn contains(&self, nu: usize, mu: usize) -> bool {
        nu <= self.nw && nu + mu <= self.total()
    }

    /// Number of retained z-exponents in row `nu`.
    fn row_len(&self, nu: usize) -> usize {
        self.total() - nu + 1
    }

    fn row_offset(&self, nu: usize) -> usize {
        // Σ_{k<nu} (T - k + 1)
        let t = self.total();
        nu * (t + 1) - nu * nu.saturating_sub(1) / 2
    }

    pub fn index(&self, nu: usize, mu: usize) -> Option<usize> {
        self.contains(nu, mu).then(|| self.row_offset(nu) + mu)
    }

    pub fn len(&self) -> usize {
        self.row_offset(self.nw + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Retained `(ν, μ)` in lexicographic order.
    pub fn iter(self) -> impl Iterator<Item = (usize, usize)> {
        (0..=self.nw).flat_map(move |nu| (0..self.row_len(nu)).map(move |mu| (nu, mu)))
    }

    /// Largest retained z-exponent in row `nu`.
    pub fn row_max(&self, nu: usize) -> usize {
        self.total() - nu
    }
}

impl fmt::Display for JetShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.nw, self.nz)
    }
}

/// Truncated series `Σ c_{ν,μ}(x) wᵛ zᵘ` with Laurent coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TransverseJet<T: Real> {
    shape: JetShape,
    window: ModeWindow,
    entries: Vec<LaurentPoly<T>>,
}

impl<T: Real> TransverseJet<T> {
    pub fn zero(shape: JetShape, window: ModeWindow) -> Self {
        TransverseJet { shape, window, entries: vec![LaurentPoly::zero(window); shape.len()] }
    }

    /// The jet `c·wᵛzᵘ` for a constant `c`.
    pub fn monomial(shape: JetShape, window: ModeWindow, nu: usize, mu: usize, c: Cx<T>) -> Self {
        let mut j = Self::zero(shape, window);
        if let Some(i) = shape.index(nu, mu) {
            j.entries[i] = LaurentPoly::constant(window, c);
        }
        j
    }

    pub fn var_w(shape: JetShape, window: ModeWindow) -> Self {
        Self::monomial(shape, window, 1, 0, cone())
    }

    pub fn var_z(shape: JetShape, window: ModeWindow) -> Self {
        Self::monomial(shape, window, 0, 1, cone())
    }

    pub fn shape(&self) -> JetShape {
        self.shape
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    /// Coefficient of `wᵛzᵘ`. Panics outside the retained region.
    pub fn get(&self, nu: usize, mu: usize) -> &LaurentPoly<T> {
        let i = self
            .shape
            .index(nu, mu)
            .unwrap_or_else(|| panic!("({nu},{mu}) outside jet shape {}", self.shape));
        &self.entries[i]
    }

    pub fn try_get(&self, nu: usize, mu: usize) -> Option<&LaurentPoly<T>> {
        self.shape.index(nu, mu).map(|i| &self.entries[i])
    }

    pub fn set(&mut self, nu: usize, mu: usize, p: LaurentPoly<T>) -> Result<()> {
        if p.window() != self.window {
            return Err(Error::Shape(format!(
                "entry window {} differs from jet window {}",
                p.window(),
                self.window
            )));
        }
        let i = self.shape.index(nu, mu).ok_or(Error::Undecidable { nu, mu })?;
        self.entries[i] = p;
        Ok(())
    }

    /// Adds `c·xⁿ` to the coefficient of `wᵛzᵘ`.
    pub fn add_term(&mut self, nu: usize, mu: usize, n: i32, c: Cx<T>) -> Result<()> {
        let i = self.shape.index(nu, mu).ok_or(Error::Undecidable { nu, mu })?;
        let cur = self.entries[i].coeff(n);
        self.entries[i].set(n, cur + c)
    }

    /// Nonzero entries as `((ν, μ), coefficient)` in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), &LaurentPoly<T>)> {
        self.shape.iter().zip(&self.entries).filter(|(_, p)| !p.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, p| m.max_of(p.max_abs()))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape || self.window != other.window {
            return Err(Error::Shape(format!(
                "jets of shape {} window {} and shape {} window {}",
                self.shape, self.window, other.shape, other.window
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(TransverseJet { shape: self.shape, window: self.window, entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(TransverseJet { shape: self.shape, window: self.window, entries })
    }

    pub fn neg(&self) -> Self {
        self.map_entries(|p| p.neg())
    }

    pub fn scale(&self, k: &Cx<T>) -> Self {
        self.map_entries(|p| p.scale(k))
    }

    /// `f(c·x, w, z)`.
    pub fn x_scale(&self, c: &Cx<T>) -> Self {
        self.map_entries(|p| p.x_scale(c))
    }

    pub fn map_entries(&self, f: impl Fn(&LaurentPoly<T>) -> LaurentPoly<T>) -> Self {
        TransverseJet {
            shape: self.shape,
            window: self.window,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Cauchy product truncated to the retained region.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let a = self.nonzero_terms();
        let b = other.nonzero_terms();
        let mut out = Self::zero(self.shape, self.window);
        let total = self.shape.total();
        for &((n1, m1), ia, sa) in &a {
            for &((n2, m2), ib, sb) in &b {
                let (nu, mu) = (n1 + n2, m1 + m2);
                if nu > self.shape.nw || nu + mu > total {
                    continue;
                }
                let k = self.shape.row_offset(nu) + mu;
                out.entries[k].add_product_ranges(
                    &self.entries[ia],
                    sa,
                    &other.entries[ib],
                    sb,
                )?;
            }
        }
        Ok(out)
    }

    /// Multiplies every coefficient by the Laurent polynomial `p`.
    pub fn mul_laurent(&self, p: &LaurentPoly<T>) -> Result<Self> {
        let Some(sp) = p.support() else {
            return Ok(Self::zero(self.shape, self.window));
        };
        let mut out = Self::zero(self.shape, self.window);
        for (k, e) in self.entries.iter().enumerate() {
            if let Some(se) = e.support() {
                out.entries[k].add_product_ranges(e, se, p, sp)?;
            }
        }
        Ok(out)
    }

    fn nonzero_terms(&self) -> Vec<((usize, usize), usize, (i32, i32))> {
        self.shape
            .iter()
            .enumerate()
            .filter_map(|(i, nm)| self.entries[i].support().map(|s| (nm, i, s)))
            .collect()
    }

    /// Re-expresses the jet on another shape, dropping entries outside it.
    pub fn reshape(&self, shape: JetShape) -> Self {
        let mut out = Self::zero(shape, self.window);
        for ((nu, mu), p) in self.terms() {
            if let Some(i) = shape.index(nu, mu) {
                out.entries[i] = p.clone();
            }
        }
        out
    }

    pub fn rewindow(&self, window: ModeWindow) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|p| p.rewindow(window))
            .collect::<Result<_>>()?;
        Ok(TransverseJet { shape: self.shape, window, entries })
    }

    /// Keeps only the entries selected by `keep`.
    pub fn filter(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let mut out = self.clone();
        for ((nu, mu), e) in self.shape.iter().zip(out.entries.iter_mut()) {
            if !keep(nu, mu) {
                *e = LaurentPoly::zero(self.window);
            }
        }
        out
    }

    /// Largest coefficient modulus of `self − other`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn map_coeffs<U: Real>(&self, f: impl Fn(&Cx<T>) -> Cx<U> + Copy) -> TransverseJet<U> {
        TransverseJet {
            shape: self.shape,
            window: self.window,
            entries: self.entries.iter().map(|p| p.map_coeffs(f)).collect(),
        }
    }

    /// Largest `|c|` over all retained coefficients and modes, paired with where it sits.
    pub fn argmax(&self) -> Option<((usize, usize, i32), T)> {
        let mut best: Option<((usize, usize, i32), T)> = None;
        for ((nu, mu), p) in self.terms() {
            for (n, c) in p.modes() {
                let a = cabs(c);
                if best.as_ref().map_or(true, |(_, b)| a > *b) {
                    best = Some(((nu, mu, n), a));
                }
            }
        }
        best
    }
}
