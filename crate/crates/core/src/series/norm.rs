use super::jet::TransverseJet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Polydisc `{r_in ≤ |x| ≤ r_out, |w| < r_w, |z| < r_z}` over the fundamental annulus.
#[derive(Clone, Debug, PartialEq)]
pub struct PolydiscSpec<T: Real> {
    pub r_in: T,
    pub r_out: T,
    pub r_w: T,
    pub r_z: T,
}

impl<T: Real> PolydiscSpec<T> {
    pub fn new(r_in: T, r_out: T, r_w: T, r_z: T) -> Result<Self> {
        let d = PolydiscSpec { r_in, r_out, r_w, r_z };
        d.check()?;
        Ok(d)
    }

    pub fn check(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        if !(self.r_in > zero && self.r_in <= one && self.r_out >= one) {
            return Err(Error::Precondition(format!(
                "annulus radii must satisfy 0 < r_in <= 1 <= r_out (got {}, {})",
                self.r_in, self.r_out
            )));
        }
        if !(self.r_w > zero && self.r_z > zero) {
            return Err(Error::Precondition("polydisc radii must be positive".into()));
        }
        Ok(())
    }

    /// Same annulus, transverse radii replaced.
    pub fn with_radii(&self, r_w: T, r_z: T) -> Self {
        PolydiscSpec { r_in: self.r_in.clone(), r_out: self.r_out.clone(), r_w, r_z }
    }
}

/// Coefficient ℓ¹ bound `Σ |c_{ν,μ,n}| · max(r_inⁿ, r_outⁿ) · r_wᵛ · r_zᵘ`.
///
/// Dominates the supremum of `f` on the polydisc.
pub fn sup_norm_bound<T: Real>(f: &TransverseJet<T>, d: &PolydiscSpec<T>) -> T {
    let mut acc = T::zero();
    for ((nu, mu), p) in f.terms() {
        let w = d.r_w.powi(nu as i32) * d.r_z.powi(mu as i32);
        acc = acc + p.annulus_norm(&d.r_in, &d.r_out) * w;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::series::{JetShape, LaurentPoly, ModeWindow};

    #[test]
    fn examples() {
        let s = JetShape::new(2, 0);
        let win = ModeWindow::symmetric(1);
        let d = PolydiscSpec::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let mut f = TransverseJet::<f64>::zero(s, win);
        f.set(
            0,
            0,
            LaurentPoly::from_modes(win, &[(1, cx(1.0, 0.0)), (-1, cx(2.0, 0.0))]).unwrap(),
        )
        .unwrap();
        assert_eq!(sup_norm_bound(&f, &d), 4.0);
        assert_eq!(sup_norm_bound(&TransverseJet::zero(s, win), &d), 0.0);
        let g = TransverseJet::monomial(s, win, 2, 0, cx(5.0, 0.0));
        assert_eq!(sup_norm_bound(&g, &d.with_radii(0.5, 1.0)), 1.25);
    }

    #[test]
    fn rejects_bad_annulus() {
        assert!(PolydiscSpec::new(1.5, 2.0, 1.0, 1.0).is_err());
        assert!(PolydiscSpec::new(0.5, 2.0, 0.0, 1.0).is_err());
    }
}
