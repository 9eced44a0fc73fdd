use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{cabs, cis_zero, cpowi, czero, Cx, Real};

/// Inclusive range of retained x-modes. Always contains mode 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeWindow {
    pub min: i32,
    pub max: i32,
}

impl ModeWindow {
    pub fn new(min: i32, max: i32) -> Result<Self> {
        if min > 0 || max < 0 {
            return Err(Error::Precondition(format!(
                "mode window [{min}, {max}] must contain 0"
            )));
        }
        Ok(ModeWindow { min, max })
    }

    pub fn symmetric(k: i32) -> Self {
        let k = k.abs();
        ModeWindow { min: -k, max: k }
    }

    pub fn len(&self) -> usize {
        (self.max - self.min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i32) -> bool {
        self.min <= n && n <= self.max
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<i32> {
        self.min..=self.max
    }

    fn overflow(&self, mode: i32) -> Error {
        Error::WindowOverflow { mode, min: self.min, max: self.max }
    }
}

impl fmt::Display for ModeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.min, self.max)
    }
}

/// Finite Laurent polynomial `Σ c_n xⁿ` over a fixed mode window.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly<T: Real> {
    window: ModeWindow,
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> LaurentPoly<T> {
    pub fn zero(window: ModeWindow) -> Self {
        LaurentPoly { window, coeffs: vec![czero(); window.len()] }
    }

    pub fn constant(window: ModeWindow, c: Cx<T>) -> Self {
        let mut p = Self::zero(window);
        p.coeffs[(-window.min) as usize] = c;
        p
    }

    pub fn monomial(window: ModeWindow, n: i32, c: Cx<T>) -> Result<Self> {
        let mut p = Self::zero(window);
        p.set(n, c)?;
        Ok(p)
    }

    pub fn from_modes(window: ModeWindow, modes: &[(i32, Cx<T>)]) -> Result<Self> {
        let mut p = Self::zero(window);
        for (n, c) in modes {
            let cur = p.coeff(*n);
            p.set(*n, cur + c.clone())?;
        }
        Ok(p)
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    pub fn coeff(&self, n: i32) -> Cx<T> {
        if self.window.contains(n) {
            self.coeffs[(n - self.window.min) as usize].clone()
        } else {
            czero()
        }
    }

    pub fn coeff_ref(&self, n: i32) -> &Cx<T> {
        &self.coeffs[(n - self.window.min) as usize]
    }

    pub fn set(&mut self, n: i32, c: Cx<T>) -> Result<()> {
        if !self.window.contains(n) {
            if cis_zero(&c) {
                return Ok(());
            }
            return Err(self.window.overflow(n));
        }
        self.coeffs[(n - self.window.min) as usize] = c;
        Ok(())
    }

    /// `(mode, coefficient)` pairs over the whole window, zeros included.
    pub fn modes(&self) -> impl Iterator<Item = (i32, &Cx<T>)> {
        let min = self.window.min;
        self.coeffs.iter().enumerate().map(move |(i, c)| (min + i as i32, c))
    }

    /// Smallest and largest mode carrying a nonzero coefficient.
    pub fn support(&self) -> Option<(i32, i32)> {
        let lo = self.coeffs.iter().position(|c| !cis_zero(c))?;
        let hi = self.coeffs.iter().rposition(|c| !cis_zero(c))?;
        Some((lo as i32 + self.window.min, hi as i32 + self.window.min))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(cis_zero)
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max_of(cabs(c)))
    }

    fn check_window(&self, other: &Self) -> Result<()> {
        if self.window != other.window {
            return Err(Error::Shape(format!(
                "mode windows {} and {} differ",
                self.window, other.window
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(LaurentPoly { window: self.window, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(LaurentPoly { window: self.window, coeffs })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_window(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !cis_zero(b) {
                *a = a.clone() + b.clone();
            }
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            window: self.window,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, k: &Cx<T>) -> Self {
        LaurentPoly {
            window: self.window,
            coeffs: self.coeffs.iter().map(|c| c.clone() * k.clone()).collect(),
        }
    }

    /// Adds `a·b` into `self`; products landing outside the window are an error.
    pub fn add_product(&mut self, a: &Self, b: &Self) -> Result<()> {
        let (Some(sa), Some(sb)) = (a.support(), b.support()) else {
            return Ok(());
        };
        self.add_product_ranges(a, sa, b, sb)
    }

    pub(crate) fn add_product_ranges(
        &mut self,
        a: &Self,
        (alo, ahi): (i32, i32),
        b: &Self,
        (blo, bhi): (i32, i32),
    ) -> Result<()> {
        if alo + blo < self.window.min {
            return Err(self.window.overflow(alo + blo));
        }
        if ahi + bhi > self.window.max {
            return Err(self.window.overflow(ahi + bhi));
        }
        for i in alo..=ahi {
            let ai = a.coeff_ref(i);
            if cis_zero(ai) {
                continue;
            }
            for j in blo..=bhi {
                let bj = b.coeff_ref(j);
                if cis_zero(bj) {
                    continue;
                }
                let k = (i + j - self.window.min) as usize;
                self.coeffs[k] = self.coeffs[k].clone() + ai.clone() * bj.clone();
            }
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        let mut out = Self::zero(self.window);
        out.add_product(self, other)?;
        Ok(out)
    }

    /// `p(c·x)`: mode n is multiplied by cⁿ.
    pub fn x_scale(&self, c: &Cx<T>) -> Self {
        let mut out = self.clone();
        if let Some((lo, hi)) = self.support() {
            for n in lo..=hi {
                let k = (n - self.window.min) as usize;
                if !cis_zero(&out.coeffs[k]) {
                    out.coeffs[k] = out.coeffs[k].clone() * cpowi(c, n as i64);
                }
            }
        }
        out
    }

    /// Weighted ℓ¹ norm on the annulus `r_in ≤ |x| ≤ r_out`; mode n carries
    /// weight `max(r_inⁿ, r_outⁿ)`. Bounds the sup norm on the annulus.
    pub fn annulus_norm(&self, r_in: &T, r_out: &T) -> T {
        let mut acc = T::zero();
        for (n, c) in self.modes() {
            if cis_zero(c) {
                continue;
            }
            let w = r_in.powi(n).max_of(r_out.powi(n));
            acc = acc + cabs(c) * w;
        }
        acc
    }

    pub fn eval(&self, x: &Cx<T>) -> Cx<T> {
        let mut acc = czero::<T>();
        for (n, c) in self.modes() {
            if !cis_zero(c) {
                acc = acc + c.clone() * cpowi(x, n as i64);
            }
        }
        acc
    }

    pub fn map_coeffs<U: Real>(&self, f: impl Fn(&Cx<T>) -> Cx<U>) -> LaurentPoly<U> {
        LaurentPoly { window: self.window, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Same coefficients on a wider (or narrower) window.
    pub fn rewindow(&self, window: ModeWindow) -> Result<Self> {
        let mut out = Self::zero(window);
        for (n, c) in self.modes() {
            out.set(n, c.clone())?;
        }
        Ok(out)
    }
}
