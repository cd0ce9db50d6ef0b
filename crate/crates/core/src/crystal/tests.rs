use super::*;
use crate::envelope::{build_envelope, AlgebraPresentation};
use crate::exactalg::BaseDpRing;

fn env(base: BaseDpRing, chart: &[&str], gens: &[&str], n: u32, w: u32) -> EnvelopePresentation {
    build_envelope(&AlgebraPresentation::parse(base, chart, gens).unwrap(), TruncationParams { m: factorial(n as u64), n, weight_cutoff: Some(w) })
        .unwrap()
}

fn constant_matrix(c: &Carrier, m: &[[i64; 2]; 2]) -> CarrierMatrix {
    m.iter().map(|row| row.iter().map(|&a| c.from_i64(a)).collect()).collect()
}

#[test]
fn integrability() {
    let e = env(BaseDpRing::integers(), &["x", "y"], &[], 2, 4);
    assert!(check_integrable(&ConnectionData::structure(&e, 2), 4));
    let p = plain_carrier(&e.carrier);
    let g1 = constant_matrix(&p, &[[0, 1], [0, 0]]);
    let g2 = constant_matrix(&p, &[[0, 0], [1, 0]]);
    let c = ConnectionData::new(&e, 2, vec![0, 0], vec![g1, g2]).unwrap();
    assert!(!check_integrable(&c, 4));
    let e1 = env(BaseDpRing::integers(), &["x"], &[], 2, 4);
    let p1 = plain_carrier(&e1.carrier);
    let c1 = ConnectionData::new(&e1, 2, vec![0], vec![vec![vec![p1.parse("x^2 + 3", 0).unwrap()]]]).unwrap();
    assert!(check_integrable(&c1, 4));
}

#[test]
fn leibniz_rule() {
    let e = env(BaseDpRing::modular(4).unwrap(), &["x"], &["x"], 4, 6);
    let p = plain_carrier(&e.carrier);
    let c = ConnectionData::new(&e, 4, vec![0], vec![vec![vec![p.parse("2*t^[1]", 0).unwrap()]]]).unwrap();
    let th = c.theta(0);
    let f = p.parse("t^[2] + 3*t^[1]", 0).unwrap();
    let m = vec![p.parse("t^[1] + 1", 0).unwrap()];
    let lhs = th.apply(&p, &[p.mul(&f, &m[0])]);
    let rhs = p.add(&p.mul(&p.partial_chart(0, &f), &m[0]), &p.mul(&f, &th.apply(&p, &m)[0]));
    assert_eq!(lhs[0], rhs);
}

#[test]
fn quasi_nilpotence_controls() {
    for p in [2u64, 3, 5] {
        let e = env(BaseDpRing::modular(p).unwrap(), &["x"], &[], p as u32, 2 * p as u32);
        let q = check_pd_quasinilpotent(&ConnectionData::structure(&e, p as u32), 16, 2 * p as u32);
        assert_eq!(q.witness(p as u32), Some(p as u32), "p = {p}");
        assert_eq!(q.witness(1), Some(1));
    }
    let e = env(BaseDpRing::integers(), &["x"], &[], 3, 4);
    let p = plain_carrier(&e.carrier);
    let c = ConnectionData::new(&e, 3, vec![0], vec![vec![vec![p.one()]]]).unwrap();
    match check_pd_quasinilpotent(&c, 10, 4) {
        QuasiNilpotence::NotWithinBound { level, k_max, .. } => assert_eq!((level, k_max), (3, 10)),
        other => panic!("{other:?}"),
    }
    let e = env(BaseDpRing::rationals(), &["x"], &[], 3, 4);
    let p = plain_carrier(&e.carrier);
    let c = ConnectionData::new(&e, 3, vec![0], vec![vec![vec![p.one()]]]).unwrap();
    assert_eq!(check_pd_quasinilpotent(&c, 10, 4), QuasiNilpotence::Verified { witnesses: vec![(1, 1), (2, 1), (3, 1)] });
}

#[test]
fn thickening_torsion() {
    let e = env(BaseDpRing::integers(), &["x"], &["x"], 2, 4);
    assert!(PdThickening::from_carrier(&e.carrier).is_ok());
    assert!(PdThickening::new(&e.carrier, 2.into(), 3).is_ok());
    assert!(matches!(PdThickening::new(&e.carrier, 1.into(), 2), Err(CrystalError::Torsion(_))));
    assert!(matches!(PdThickening::new(&e.carrier, 2.into(), 1), Err(CrystalError::Torsion(_))));
}

struct Setup {
    c: ConnectionData,
    q: QuasiNilpotence,
    b: PdThickening,
}

fn setup(gamma: &str) -> Setup {
    let e = env(BaseDpRing::modular(4).unwrap(), &["x"], &["x"], 4, 6);
    let p = plain_carrier(&e.carrier);
    let c = ConnectionData::new(&e, 4, vec![0], vec![vec![vec![p.parse(gamma, 0).unwrap()]]]).unwrap();
    let q = check_pd_quasinilpotent(&c, 16, 6);
    assert!(q.is_verified(), "{q:?}");
    let b = PdThickening::from_carrier(&e.carrier).unwrap();
    Setup { c, q, b }
}

fn shift(s: &Setup, b: &str) -> CarrierMap {
    let bc = s.b.carrier();
    CarrierMap::new(bc, bc, vec![bc.add(&bc.chart_var(0), &bc.parse(b, 0).unwrap())], vec![]).unwrap()
}

#[test]
fn transitions_of_the_structure_crystal() {
    let s = setup("0");
    let (f, g) = (shift(&s, "0"), shift(&s, "t^[2]"));
    let bc = s.b.carrier();
    assert_eq!(transition_iso(&s.c, &s.q, &f, &f, &s.b).unwrap(), identity_matrix(bc, 1));
    assert_eq!(transition_iso(&s.c, &s.q, &f, &g, &s.b).unwrap(), identity_matrix(bc, 1));
    // the section x: c(x⊗1) = g(x) + b = f(x)
    let x = vec![s.c.plain().chart_var(0)];
    let got = transition_apply(&s.c, &s.q, &f, &g, &s.b, &x).unwrap();
    let b = bc.sub(&f.chart_images()[0], &g.chart_images()[0]);
    assert_eq!(got[0], bc.add(&g.chart_images()[0], &b));
    assert_eq!(got[0], f.chart_images()[0]);
}

#[test]
fn cocycle_and_inverse_with_twist() {
    let s = setup("2*t^[1]");
    let (f, g, h) = (shift(&s, "0"), shift(&s, "t^[2] + 3*t^[1]"), shift(&s, "2*t^[3]"));
    assert!(cocycle_check(&s.c, &s.q, &f, &g, &h, &s.b).unwrap());
    assert!(inverse_check(&s.c, &s.q, &f, &g, &s.b).unwrap());
    let fg = transition_iso(&s.c, &s.q, &f, &g, &s.b).unwrap();
    assert_ne!(fg, identity_matrix(s.b.carrier(), 1));
}

#[test]
fn transition_refuses_without_certificate() {
    let s = setup("0");
    let f = shift(&s, "0");
    let bad = QuasiNilpotence::NotWithinBound { level: 4, direction: 0, element: "1".into(), k_max: 1 };
    assert!(matches!(transition_iso(&s.c, &bad, &f, &f, &s.b), Err(CrystalError::NotVerified(_))));
}
