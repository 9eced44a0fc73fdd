mod common;

use common::*;
use proptest::prelude::*;
use ueda::scalar::cx;
use ueda::series::{invert_map, substitute, sup_norm_bound, JetShape, ModeWindow, PolydiscSpec, TransverseJet};

const W8: ModeWindow = ModeWindow { min: -8, max: 8 };

fn any_entry(_: usize, _: usize) -> bool {
    true
}

fn w_like(nu: usize, mu: usize) -> bool {
    nu >= 1 && nu + mu >= 2
}

fn z_higher(nu: usize, mu: usize) -> bool {
    nu + mu >= 2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laurent_ring_laws(a in laurent(W8, 2), b in laurent(W8, 2), c in laurent(W8, 2)) {
        let ab = a.mul(&b).unwrap();
        prop_assert!(ab.sub(&b.mul(&a).unwrap()).unwrap().max_abs() < 1e-15);
        let lhs = ab.mul(&c).unwrap();
        let rhs = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        let dist = a.mul(&b.add(&c).unwrap()).unwrap();
        let sum = ab.add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(dist.sub(&sum).unwrap().max_abs() < 1e-12);
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn annulus_norm_is_submultiplicative(a in laurent(W8, 3), b in laurent(W8, 3), r in 0.3f64..1.0) {
        let ab = a.mul(&b).unwrap();
        let (ri, ro) = (r, 1.0 / r);
        prop_assert!(ab.annulus_norm(&ri, &ro) <= a.annulus_norm(&ri, &ro) * b.annulus_norm(&ri, &ro) * (1.0 + 1e-12));
    }

    #[test]
    fn jet_ring_laws(
        a in jet(JetShape::new(3, 2), W8, 1, any_entry),
        b in jet(JetShape::new(3, 2), W8, 1, any_entry),
        c in jet(JetShape::new(3, 2), W8, 1, any_entry),
    ) {
        let ab = a.mul(&b).unwrap();
        prop_assert!(max_diff(&ab, &b.mul(&a).unwrap()) < 1e-12);
        prop_assert!(max_diff(&ab.mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap()) < 1e-11);
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = ab.add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn sup_bound_is_submultiplicative(
        a in jet(JetShape::new(3, 2), W8, 1, any_entry),
        b in jet(JetShape::new(3, 2), W8, 1, any_entry),
        rw in 0.2f64..2.0,
        rz in 0.2f64..2.0,
    ) {
        let d = PolydiscSpec::new(0.5, 2.0, rw, rz).unwrap();
        let ab = a.mul(&b).unwrap();
        prop_assert!(sup_norm_bound(&ab, &d) <= sup_norm_bound(&a, &d) * sup_norm_bound(&b, &d) * (1.0 + 1e-12));
    }

    #[test]
    fn substitution_is_a_homomorphism(
        f in jet(JetShape::new(3, 2), W8, 1, any_entry),
        g in jet(JetShape::new(3, 2), W8, 1, any_entry),
        hw in jet(JetShape::new(3, 2), W8, 1, w_like),
        hz in jet(JetShape::new(3, 2), W8, 1, z_higher),
        scale_x in prop_oneof![Just(1.0f64), Just(2.0), Just(-0.5)],
    ) {
        let shape = JetShape::new(3, 2);
        let w = TransverseJet::var_w(shape, W8).scale(&cx(1.5, 0.5)).add(&hw).unwrap();
        let z = TransverseJet::var_z(shape, W8).add(&hz).unwrap();
        let xs = cx(scale_x, 0.0);
        let sf = substitute(&f, &w, &z, &xs).unwrap();
        let sg = substitute(&g, &w, &z, &xs).unwrap();
        let prod = substitute(&f.mul(&g).unwrap(), &w, &z, &xs).unwrap();
        prop_assert!(max_diff(&prod, &sf.mul(&sg).unwrap()) < 1e-9 * (1.0 + prod.max_abs()));
        let sum = substitute(&f.add(&g).unwrap(), &w, &z, &xs).unwrap();
        prop_assert!(max_diff(&sum, &sf.add(&sg).unwrap()) < 1e-12 * (1.0 + sum.max_abs()));
    }

    #[test]
    fn inversion_round_trip(
        hw in jet(JetShape::new(3, 3), W8, 1, w_like),
        hz in jet(JetShape::new(3, 3), W8, 1, z_higher),
        shear in coeff(),
    ) {
        let shape = JetShape::new(3, 3);
        let hw = hw.scale(&cx(0.3, 0.0));
        let hz = hz.scale(&cx(0.3, 0.0));
        let w = TransverseJet::var_w(shape, W8).add(&hw).unwrap();
        let mut z = TransverseJet::var_z(shape, W8).add(&hz).unwrap();
        z.add_term(1, 0, 0, shear).unwrap();
        let (v, zeta) = invert_map(&w, &z).unwrap();
        let one = cx(1.0, 0.0);
        let idw = TransverseJet::var_w(shape, W8);
        let idz = TransverseJet::var_z(shape, W8);
        prop_assert!(max_diff(&substitute(&v, &w, &z, &one).unwrap(), &idw) < 1e-12);
        prop_assert!(max_diff(&substitute(&zeta, &w, &z, &one).unwrap(), &idz) < 1e-12);
        prop_assert!(max_diff(&substitute(&w, &v, &zeta, &one).unwrap(), &idw) < 1e-12);
        prop_assert!(max_diff(&substitute(&z, &v, &zeta, &one).unwrap(), &idz) < 1e-12);
    }
}

#[test]
fn substitute_rejects_constant_in_z() {
    let s = JetShape::new(2, 1);
    let f = TransverseJet::<f64>::var_w(s, W8);
    let w = TransverseJet::var_w(s, W8);
    let mut z = TransverseJet::var_z(s, W8);
    z.add_term(0, 0, 0, cx(1.0, 0.0)).unwrap();
    assert!(substitute(&f, &w, &z, &cx(1.0, 0.0)).is_err());
}

#[test]
fn window_overflow_is_reported() {
    let win = ModeWindow::symmetric(1);
    let s = JetShape::new(2, 0);
    let mut a = TransverseJet::<f64>::zero(s, win);
    a.add_term(1, 0, 1, cx(1.0, 0.0)).unwrap();
    assert!(matches!(a.mul(&a), Err(ueda::Error::WindowOverflow { mode: 2, .. })));
}
