use super::*;
use crate::derham::plain_carrier;
use crate::envelope::{build_envelope, AlgebraPresentation, EnvelopePresentation};
use crate::pdpoly::TruncationParams;
use crate::exactalg::{BaseDpRing, ModuleDescription};

fn env(base: BaseDpRing, chart: &[&str], gens: &[&str], n: u32, w: u32) -> EnvelopePresentation {
    let m = num_bigint::BigInt::from((1..=n as u64).product::<u64>());
    build_envelope(&AlgebraPresentation::parse(base, chart, gens).unwrap(), TruncationParams { m, n, weight_cutoff: Some(w) }).unwrap()
}

fn request(degrees: Vec<usize>, n: u32, nu_max: usize, w_max: u32) -> CohomologyRequest {
    CohomologyRequest { degrees, n, nu_max, w_max, side: Side::Both, k_max: 16 }
}

fn at(r: &CohomologyReport, degree: usize, w: u32) -> &WeightResult {
    let d = r.degrees.iter().find(|d| d.degree == degree).unwrap();
    d.weights.iter().find(|x| x.total_weight == Some(w)).unwrap()
}

#[test]
fn line_over_f2() {
    let e = env(BaseDpRing::modular(2).unwrap(), &["x"], &[], 2, 6);
    let c = ConnectionData::structure(&e, 2);
    let r = crys_cohomology(&c, &request(vec![0, 1], 2, 2, 6)).unwrap();
    assert!(r.graded && r.sides_agree());
    for w in 0..=6 {
        let want = if w % 2 == 0 { ModuleDescription::free(1) } else { ModuleDescription::zero() };
        assert_eq!(at(&r, 0, w).ca, Some(want), "H^0 weight {w}");
    }
    for w in 1..=6 {
        let want = if w % 2 == 0 { ModuleDescription::free(1) } else { ModuleDescription::zero() };
        let h = at(&r, 1, w);
        assert_eq!((h.ca.clone(), h.label), (Some(want), Some(w - 1)), "H^1 weight {w}");
    }
}

#[test]
fn line_over_f3_first_cohomology() {
    let e = env(BaseDpRing::modular(3).unwrap(), &["x"], &[], 3, 7);
    let c = ConnectionData::structure(&e, 3);
    let r = crys_cohomology(&c, &request(vec![1], 3, 2, 7)).unwrap();
    assert!(r.sides_agree());
    for w in 1..=7 {
        let h = at(&r, 1, w);
        let want = if w % 3 == 0 { ModuleDescription::free(1) } else { ModuleDescription::zero() };
        assert_eq!(h.de_rham, Some(want), "weight {w}");
    }
}

fn twisted() -> ConnectionData {
    let e = env(BaseDpRing::modular(4).unwrap(), &["x"], &["x"], 2, 5);
    let p = plain_carrier(&e.carrier);
    let z = p.zero();
    let g = vec![vec![z.clone(), p.parse("2*t^[1] + x", 0).unwrap()], vec![z.clone(), z]];
    ConnectionData::new(&e, 2, vec![0, 2], vec![g]).unwrap()
}

#[test]
fn twisted_sides_agree() {
    let c = twisted();
    let r = crys_cohomology(&c, &request(vec![0, 1], 2, 2, 5)).unwrap();
    assert!(r.graded);
    assert!(r.sides_agree(), "{r:?}");
}

#[test]
fn double_complex_structure() {
    for c in [ConnectionData::structure(&env(BaseDpRing::modular(2).unwrap(), &["x"], &[], 2, 4), 2), twisted()] {
        let q = check_pd_quasinilpotent(&c, 16, 4);
        let dc = build_double_complex(&c, &q, 2, 3, 4).unwrap();
        for w in 0..=4 {
            let s = dc.slice(WeightBand::Exact(w), 3, true).unwrap();
            assert!(s.check_anticommute().unwrap(), "weight {w}");
            assert!(s.tot(3).unwrap().check_complex().unwrap(), "weight {w}");
            assert!(s.columns_acyclic().unwrap(), "weight {w}");
            assert!(s.cofaces_agree().unwrap(), "weight {w}");
            let e = compare_edges(&s, 0, 1).unwrap();
            assert!(e.column_edge_qiso && e.row_edge_qiso, "weight {w}");
        }
    }
}

#[test]
fn refusals() {
    let e = env(BaseDpRing::modular(2).unwrap(), &["x"], &[], 2, 4);
    let c = ConnectionData::structure(&e, 2);
    assert!(matches!(crys_cohomology(&c, &request(vec![1], 2, 1, 4)), Err(CechError::Range(_))));
    assert!(matches!(crys_cohomology(&c, &request(vec![0], 3, 1, 4)), Err(CechError::Range(_))));
    let q = check_pd_quasinilpotent(&c, 16, 4);
    let s = build_double_complex(&c, &q, 2, 2, 4).unwrap().slice(WeightBand::Exact(2), 2, false).unwrap();
    assert!(matches!(compare_edges(&s, 0, 1), Err(CechError::Range(_))));
}

#[test]
fn cech_alexander_complex() {
    let e = env(BaseDpRing::modular(2).unwrap(), &["x"], &[], 2, 6);
    let c = ConnectionData::structure(&e, 2);
    let q = check_pd_quasinilpotent(&c, 16, 6);
    let ca = cech_alexander(&c, &q, 2, 2, 6).unwrap();
    assert_eq!(ca.level_carrier(0), &c.level_carrier(2, Some(6)));
    for w in 0..=6 {
        let cx = ca.slice(WeightBand::Exact(w)).unwrap();
        assert!(cx.check_complex().unwrap() && cx.check_well_defined().unwrap());
        let want = if w % 2 == 0 { ModuleDescription::free(1) } else { ModuleDescription::zero() };
        assert_eq!(cx.homology(0).unwrap(), want, "weight {w}");
    }
}
