use num_bigint::BigInt;

use super::*;
use crate::envelope::{build_envelope, AlgebraPresentation};
use crate::exactalg::{BaseDpRing, ModuleDescription};

fn env(base: BaseDpRing, chart: &[&str], gens: &[&str], n: u32, w: u32) -> EnvelopePresentation {
    let m = BigInt::from((1..=n as u64).product::<u64>());
    build_envelope(&AlgebraPresentation::parse(base, chart, gens).unwrap(), TruncationParams { m, n, weight_cutoff: Some(w) }).unwrap()
}

#[test]
fn one_variable_rule() {
    let e = env(BaseDpRing::integers(), &["x"], &["x"], 6, 6);
    let dr = DeRhamComplex::new(&e.carrier);
    let c = &e.carrier;
    let t3 = FormElement::single(c, 0, 0, &c.parse("t^[3]", 0).unwrap());
    assert_eq!(dr.render(&dr.differential(&t3)), "(t^[2])·dx");
    assert!(dr.differential(&FormElement::single(c, 0, 0, &c.one())).is_zero());
}

#[test]
fn two_variable_leibniz() {
    let e = env(BaseDpRing::integers(), &["x", "y"], &["x", "y"], 6, 6);
    let dr = DeRhamComplex::new(&e.carrier);
    let c = &e.carrier;
    let f = FormElement::single(c, 0, 0, &c.parse("t1^[2]*t2^[1]", 0).unwrap());
    let want = FormElement::single(c, 0, 1, &c.parse("t1^[1]*t2^[1]", 0).unwrap())
        .add(c, &FormElement::single(c, 0, 2, &c.parse("t1^[2]", 0).unwrap()));
    assert_eq!(dr.differential(&f), want);
}

#[test]
fn wedge_signs() {
    assert_eq!(wedge_masks(3, 2), vec![0b011, 0b101, 0b110]);
    assert_eq!(wedge_left(0, 0b10), Some((0b11, false)));
    assert_eq!(wedge_left(1, 0b01), Some((0b11, true)));
    assert_eq!(wedge_right(0b01, 1), Some((0b11, false)));
    assert_eq!(wedge_right(0b10, 0), Some((0b11, true)));
    assert_eq!(wedge_left(1, 0b10), None);
}

#[test]
fn homotopy_examples() {
    let h = poincare_homotopy(&BaseDpRing::integers(), 1, 6).unwrap();
    let c = h.carrier().clone();
    let dt = FormElement::single(&c, 0, 1, &c.one());
    assert_eq!(h.k(&dt), FormElement::single(&c, 0, 0, &c.parse("t^[1]", 0).unwrap()));
    let t2 = FormElement::single(&c, 0, 0, &c.parse("t^[2]", 0).unwrap());
    assert!(h.defect(&t2).is_zero());
    let one = FormElement::single(&c, 0, 0, &c.one());
    let dx = h.complex();
    assert!(h.k(&dx.differential(&one)).add(&c, &dx.differential(&h.k(&one))).is_zero());
    for ring in [BaseDpRing::integers(), BaseDpRing::modular(9).unwrap()] {
        assert!(poincare_homotopy(&ring, 2, 5).unwrap().verify(5));
    }
}

#[test]
fn free_pd_algebra_is_acyclic_in_positive_weight() {
    let h = poincare_homotopy(&BaseDpRing::integers(), 2, 4).unwrap();
    for w in 0..=4 {
        let cx = h.complex().slice(WeightBand::Exact(w)).unwrap();
        assert!(cx.check_complex().unwrap());
        for i in 0..=2 {
            let want = if w == 0 && i == 0 { ModuleDescription::free(1) } else { ModuleDescription::zero() };
            assert_eq!(cx.homology(i).unwrap(), want, "weight {w} degree {i}");
        }
    }
}

#[test]
fn affine_line_weight_pattern() {
    let e = env(BaseDpRing::modular(3).unwrap(), &["x"], &[], 3, 8);
    let dr = DeRhamComplex::new(&e.carrier);
    for w in 1..=8 {
        let h1 = dr.slice(WeightBand::Exact(w)).unwrap().homology(1).unwrap();
        let want = if w % 3 == 0 { ModuleDescription::free(1) } else { ModuleDescription::zero() };
        assert_eq!(h1, want, "total weight {w}");
    }
    let e = env(BaseDpRing::integers(), &["x"], &[], 1, 8);
    let dr = DeRhamComplex::new(&e.carrier);
    for k in 1..=8u32 {
        let h1 = dr.slice(WeightBand::Exact(k)).unwrap().homology(1).unwrap();
        assert_eq!(h1, ModuleDescription::cyclic(e.carrier.ring(), &BigInt::from(k)), "weight {k}");
    }
}

#[test]
fn zero_twist_is_the_plain_complex() {
    let e = env(BaseDpRing::modular(4).unwrap(), &["x"], &["x^2"], 4, 6);
    let c = &e.carrier;
    let plain = DeRhamComplex::new(c);
    let twisted = DeRhamComplex::twisted(c, vec![0], &[vec![vec![c.zero()]]], c).unwrap();
    for w in 0..=6 {
        assert_eq!(plain.slice(WeightBand::Exact(w)).unwrap(), twisted.slice(WeightBand::Exact(w)).unwrap());
    }
}

#[test]
fn truncation_adds_second_kind_relations() {
    // D^{2,2} of (x) over ℤ: t^{[2]} has modulus 2, so d(2t^{[2]}) = 2t·dx is a relation
    let e = build_envelope(
        &AlgebraPresentation::parse(BaseDpRing::integers(), &["x"], &["x"]).unwrap(),
        TruncationParams { m: 2.into(), n: 2, weight_cutoff: Some(4) },
    )
    .unwrap();
    let dr = DeRhamComplex::new(&e.carrier);
    let cx = dr.slice(WeightBand::Exact(2)).unwrap();
    assert!(cx.check_complex().unwrap() && cx.check_well_defined().unwrap());
    assert_eq!(cx.homology(0).unwrap(), ModuleDescription::zero());
    assert_eq!(cx.homology(1).unwrap(), ModuleDescription::zero());
}
