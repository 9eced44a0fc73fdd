use super::jet::TransverseJet;
use super::laurent::LaurentPoly;
use crate::error::{Error, Result};
use crate::scalar::{cis_zero, cone, Cx, Real};

fn check_same<T: Real>(f: &TransverseJet<T>, g: &TransverseJet<T>, what: &str) -> Result<()> {
    if f.shape() != g.shape() || f.window() != g.window() {
        return Err(Error::Shape(format!("{what}: shape/window mismatch")));
    }
    Ok(())
}

/// `f(c·x, W, Z)` truncated to the shape of `f`.
///
/// `W` must be w-like (no pure-z terms), both maps must have zero constant
/// term and nonvanishing diagonal linear coefficients.
pub fn substitute<T: Real>(
    f: &TransverseJet<T>,
    w: &TransverseJet<T>,
    z: &TransverseJet<T>,
    x_scale: &Cx<T>,
) -> Result<TransverseJet<T>> {
    check_same(f, w, "substitute")?;
    check_same(f, z, "substitute")?;
    let shape = f.shape();
    let window = f.window();
    if cis_zero(x_scale) {
        return Err(Error::Precondition("x-scale must be nonzero".into()));
    }
    if !z.get(0, 0).is_zero() {
        return Err(Error::Precondition("Z has a constant term".into()));
    }
    if let Some(mu) = (0..=shape.row_max(0)).find(|&mu| !w.get(0, mu).is_zero()) {
        return Err(Error::Precondition(format!(
            "W is not w-like: coefficient of z^{mu} is nonzero"
        )));
    }
    if shape.nw >= 1 && w.get(1, 0).is_zero() {
        return Err(Error::Precondition("linear part of W is not invertible".into()));
    }
    if shape.total() >= 1 && z.get(0, 1).is_zero() {
        return Err(Error::Precondition("linear part of Z is not invertible".into()));
    }

    let one = TransverseJet::monomial(shape, window, 0, 0, cone());
    let mut zpow = Vec::with_capacity(shape.total() + 1);
    zpow.push(one);
    for k in 1..=shape.total() {
        let next = zpow[k - 1].mul(z)?;
        zpow.push(next);
    }

    // Horner in W over the rows P_ν = Σ_μ f_{ν,μ}(c·x) Zᵘ
    let row = |nu: usize| -> Result<TransverseJet<T>> {
        let mut acc = TransverseJet::zero(shape, window);
        for (mu, zp) in zpow.iter().enumerate().take(shape.row_max(nu) + 1) {
            let c = f.get(nu, mu);
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&zp.mul_laurent(&c.x_scale(x_scale))?)?;
        }
        Ok(acc)
    };
    let mut acc = row(shape.nw)?;
    for nu in (0..shape.nw).rev() {
        acc = if acc.is_zero() { acc } else { acc.mul(w)? };
        acc = acc.add(&row(nu)?)?;
    }
    Ok(acc)
}

fn is_exact_one<T: Real>(p: &LaurentPoly<T>) -> bool {
    p.support() == Some((0, 0)) && p.coeff(0) == cone()
}

/// Inverse of the map `(w, z) ↦ (W, Z)`.
///
/// The map must fix the origin with linear part `w ↦ w`, `z ↦ z + c(x)·w`
/// (tangent to the identity up to a unipotent shear). Returns `(V, ZETA)`
/// with `W(V, ZETA) = w` and `Z(V, ZETA) = z` on every retained coefficient.
pub fn invert_map<T: Real>(
    w: &TransverseJet<T>,
    z: &TransverseJet<T>,
) -> Result<(TransverseJet<T>, TransverseJet<T>)> {
    check_same(w, z, "invert_map")?;
    let shape = w.shape();
    let window = w.window();
    let tangent = w.get(0, 0).is_zero()
        && z.get(0, 0).is_zero()
        && (shape.nw == 0 || is_exact_one(w.get(1, 0)))
        && (shape.total() == 0 || w.get(0, 1).is_zero())
        && (shape.total() == 0 || is_exact_one(z.get(0, 1)));
    if !tangent {
        return Err(Error::Precondition("map is not tangent to the identity".into()));
    }
    let id_w = TransverseJet::var_w(shape, window);
    let id_z = TransverseJet::var_z(shape, window);
    let nw = w.sub(&id_w)?;
    let nz = z.sub(&id_z)?;
    let one = cone::<T>();

    let mut v = id_w.clone();
    let mut zeta = id_z.clone();
    // each sweep fixes at least one more graded piece; the shear needs two per degree
    let max_iter = 2 * (shape.total() + 2);
    for _ in 0..max_iter {
        let v_next = id_w.sub(&substitute(&nw, &v, &zeta, &one)?)?;
        let z_next = id_z.sub(&substitute(&nz, &v, &zeta, &one)?)?;
        if v_next == v && z_next == zeta {
            return Ok((v, zeta));
        }
        v = v_next;
        zeta = z_next;
    }
    Ok((v, zeta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::series::{JetShape, ModeWindow};

    fn c(re: f64) -> Cx<f64> {
        cx(re, 0.0)
    }

    #[test]
    fn substitute_linear_shear() {
        let s = JetShape::new(2, 1);
        let win = ModeWindow::symmetric(1);
        let w = TransverseJet::<f64>::var_w(s, win);
        let z = TransverseJet::<f64>::var_z(s, win);
        let f = TransverseJet::monomial(s, win, 2, 0, c(1.0));
        let big_w = w.add(&z.mul(&w).unwrap()).unwrap();
        let out = substitute(&f, &big_w, &z, &c(1.0)).unwrap();
        // (w + wz)² = w² + 2w²z + w²z², the last term beyond total degree 3
        assert_eq!(out.get(2, 0).coeff(0), c(1.0));
        assert_eq!(out.get(2, 1).coeff(0), c(2.0));
        assert_eq!(out.terms().count(), 2);
    }

    #[test]
    fn substitute_rejects_z_like_w() {
        let s = JetShape::new(2, 1);
        let win = ModeWindow::symmetric(1);
        let w = TransverseJet::<f64>::var_w(s, win);
        let z = TransverseJet::<f64>::var_z(s, win);
        let f = w.clone();
        assert!(substitute(&f, &w.add(&z).unwrap(), &z, &c(1.0)).is_err());
        assert!(substitute(&f, &w, &z, &c(0.0)).is_err());
    }

    #[test]
    fn inverse_of_w_plus_w2() {
        let s = JetShape::new(3, 0);
        let win = ModeWindow::symmetric(1);
        let w = TransverseJet::<f64>::var_w(s, win);
        let z = TransverseJet::<f64>::var_z(s, win);
        let big_w = w.add(&TransverseJet::monomial(s, win, 2, 0, c(1.0))).unwrap();
        let (v, _) = invert_map(&big_w, &z).unwrap();
        assert_eq!(v.get(1, 0).coeff(0), c(1.0));
        assert_eq!(v.get(2, 0).coeff(0), c(-1.0));
        assert_eq!(v.get(3, 0).coeff(0), c(2.0));
    }

    #[test]
    fn inverse_of_z_plus_wz() {
        let s = JetShape::new(2, 1);
        let win = ModeWindow::symmetric(1);
        let w = TransverseJet::<f64>::var_w(s, win);
        let z = TransverseJet::<f64>::var_z(s, win);
        let big_z = z.add(&w.mul(&z).unwrap()).unwrap();
        let (v, zeta) = invert_map(&w, &big_z).unwrap();
        assert_eq!(v, w);
        assert_eq!(zeta.get(0, 1).coeff(0), c(1.0));
        assert_eq!(zeta.get(1, 1).coeff(0), c(-1.0));
        assert_eq!(zeta.get(2, 1).coeff(0), c(1.0));
    }

    #[test]
    fn inverse_handles_shear() {
        let s = JetShape::new(3, 2);
        let win = ModeWindow::symmetric(6);
        let w = TransverseJet::<f64>::var_w(s, win);
        let z = TransverseJet::<f64>::var_z(s, win);
        let mut big_z = z.clone();
        big_z.add_term(1, 0, 1, c(0.5)).unwrap();
        big_z.add_term(1, 1, 0, c(0.25)).unwrap();
        let mut big_w = w.clone();
        big_w.add_term(2, 1, 0, c(0.3)).unwrap();
        let (v, zeta) = invert_map(&big_w, &big_z).unwrap();
        let one = c(1.0);
        let back_w = substitute(&big_w, &v, &zeta, &one).unwrap();
        let back_z = substitute(&big_z, &v, &zeta, &one).unwrap();
        assert!(back_w.distance(&w).unwrap() < 1e-14);
        assert!(back_z.distance(&z).unwrap() < 1e-14);
    }
}
