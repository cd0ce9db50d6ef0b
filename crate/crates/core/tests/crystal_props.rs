use proptest::prelude::*;

use pdcris::crystal::{check_pd_quasinilpotent, cocycle_check, identity_matrix, inverse_check, transition_iso, ConnectionData, PdThickening, QuasiNilpotence};
use pdcris::derham::plain_carrier;
use pdcris::envelope::{build_envelope, AlgebraPresentation, Carrier, CarrierElement, CarrierMap, EnvelopePresentation};
use pdcris::exactalg::BaseDpRing;
use pdcris::pdpoly::TruncationParams;

const CUTOFF: u32 = 6;

fn env(base: BaseDpRing, n: u32) -> EnvelopePresentation {
    let m = (1..=n as u64).map(num_bigint::BigInt::from).product();
    build_envelope(&AlgebraPresentation::parse(base, &["x"], &["x"]).unwrap(), TruncationParams { m, n, weight_cutoff: Some(CUTOFF) }).unwrap()
}

/// (ℤ/4, level 4) or (F_3, level 3), chart x, J = (x).
fn base(case: usize) -> EnvelopePresentation {
    if case == 0 {
        env(BaseDpRing::modular(4).unwrap(), 4)
    } else {
        env(BaseDpRing::modular(3).unwrap(), 3)
    }
}

/// Σ c·x^a·t^[k] over the picks, with k ≥ min_pd so that the result lies in the pd ideal when min_pd ≥ 1.
fn element(c: &Carrier, min_pd: u32, picks: &[(u32, u32, i64)]) -> CarrierElement {
    let mut out = c.zero();
    for &(a, k, coef) in picks {
        let k = k.max(min_pd);
        if a + k > CUTOFF {
            continue;
        }
        let term = c.parse(&format!("{coef}*x^{a}*t^[{k}]"), 0).unwrap();
        out = c.add(&out, &term);
    }
    out
}

/// Weights [0, s + 1] with the single entry Γ[0][1] homogeneous of weight s.
fn connection(e: &EnvelopePresentation, s: u32, picks: &[(u32, i64)]) -> ConnectionData {
    let p = plain_carrier(&e.carrier);
    let mut entry = p.zero();
    for &(a, coef) in picks {
        let a = a.min(s);
        entry = p.add(&entry, &p.parse(&format!("{coef}*x^{a}*t^[{}]", s - a), 0).unwrap());
    }
    let gamma = vec![vec![vec![p.zero(), entry], vec![p.zero(), p.zero()]]];
    ConnectionData::new(e, e.carrier.truncation().n, vec![0, s + 1], gamma).unwrap()
}

fn shift(bc: &Carrier, b: &CarrierElement) -> CarrierMap {
    CarrierMap::new(bc, bc, vec![bc.add(&bc.chart_var(0), b)], vec![]).unwrap()
}

fn verified(c: &ConnectionData) -> QuasiNilpotence {
    let q = check_pd_quasinilpotent(c, 16, CUTOFF);
    assert!(q.is_verified(), "{q:?}");
    q
}

fn shifts() -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
    prop::collection::vec((0u32..=3, 1u32..=4, -3i64..=3), 0..4)
}

/// Weight ≤ 3, so products of two stay inside the cutoff.
fn small() -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
    prop::collection::vec((0u32..=1, 0u32..=2, -3i64..=3), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn leibniz_rule(case in 0usize..2, s in 0u32..=2, g in prop::collection::vec((0u32..=2, -3i64..=3), 1..3), f in small(), m0 in small(), m1 in small()) {
        let e = base(case);
        let c = connection(&e, s, &g);
        prop_assert!(c.is_graded());
        let p = c.plain().clone();
        let th = c.theta(0);
        let f = element(&p, 0, &f);
        let m = vec![element(&p, 0, &m0), element(&p, 0, &m1)];
        let fm: Vec<_> = m.iter().map(|y| p.mul(&f, y)).collect();
        let tm = th.apply(&p, &m);
        let rhs: Vec<_> = (0..2).map(|l| p.add(&p.mul(&p.partial_chart(0, &f), &m[l]), &p.mul(&f, &tm[l]))).collect();
        prop_assert_eq!(th.apply(&p, &fm), rhs);
    }

    #[test]
    fn cocycle_and_inverse(case in 0usize..2, s in 0u32..=2, g in prop::collection::vec((0u32..=2, -3i64..=3), 1..3), b1 in shifts(), b2 in shifts(), b3 in shifts()) {
        let e = base(case);
        let c = connection(&e, s, &g);
        let q = verified(&c);
        let b = PdThickening::from_carrier(&e.carrier).unwrap();
        let bc = b.carrier();
        let (f, g, h) = (shift(bc, &element(bc, 1, &b1)), shift(bc, &element(bc, 1, &b2)), shift(bc, &element(bc, 1, &b3)));
        prop_assert!(cocycle_check(&c, &q, &f, &g, &h, &b).unwrap());
        prop_assert!(inverse_check(&c, &q, &f, &g, &b).unwrap());
        prop_assert_eq!(transition_iso(&c, &q, &f, &f, &b).unwrap(), identity_matrix(bc, 2));
    }

    #[test]
    fn transitions_are_compatible_across_levels(case in 0usize..2, s in 0u32..=2, g in prop::collection::vec((0u32..=2, -3i64..=3), 1..3), b1 in shifts(), b2 in shifts()) {
        let e = base(case);
        let c = connection(&e, s, &g);
        let q = verified(&c);
        let top = e.carrier.truncation().n;
        let hi = PdThickening::from_carrier(&c.level_carrier(top, Some(CUTOFF))).unwrap();
        let lo = PdThickening::from_carrier(&c.level_carrier(2, Some(CUTOFF))).unwrap();
        let (hc, lc) = (hi.carrier(), lo.carrier());
        let (x1, x2) = (element(hc, 1, &b1), element(hc, 1, &b2));
        let big = transition_iso(&c, &q, &shift(hc, &x1), &shift(hc, &x2), &hi).unwrap();
        let small = transition_iso(&c, &q, &shift(lc, &lc.reduce(x1)), &shift(lc, &lc.reduce(x2)), &lo).unwrap();
        for (rb, rs) in big.iter().zip(&small) {
            for (yb, ys) in rb.iter().zip(rs) {
                prop_assert_eq!(lc.reduce(yb.clone()), lc.reduce(ys.clone()));
            }
        }
    }
}
