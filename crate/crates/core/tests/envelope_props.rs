use proptest::prelude::*;

use pdcris::derham::plain_carrier;
use pdcris::envelope::{alternating_coface_sum, build_envelope, codegeneracy_maps, coface_maps, fiber_power_envelope, AlgebraPresentation, Carrier, CarrierElement, CarrierMap, EnvelopePresentation};
use pdcris::exactalg::BaseDpRing;
use pdcris::pdpoly::TruncationParams;

fn factorial(n: u32) -> num_bigint::BigInt {
    (1..=n as u64).map(num_bigint::BigInt::from).product()
}

fn env(base: BaseDpRing, chart: &[&str], gens: &[&str], n: u32, w: u32) -> EnvelopePresentation {
    build_envelope(&AlgebraPresentation::parse(base, chart, gens).unwrap(), TruncationParams { m: factorial(n), n, weight_cutoff: Some(w) }).unwrap()
}

fn cases() -> Vec<EnvelopePresentation> {
    vec![
        env(BaseDpRing::integers(), &["x"], &["x"], 3, 5),
        env(BaseDpRing::modular(4).unwrap(), &["x"], &["x^2"], 4, 5),
        env(BaseDpRing::modular(2).unwrap(), &["x", "y"], &["y"], 2, 4),
        env(BaseDpRing::modular(3).unwrap(), &["x"], &[], 3, 5),
    ]
}

/// Random element of the carrier built from its own basis through weight w.
fn random_element(c: &Carrier, w: u32, picks: &[(usize, i64)]) -> CarrierElement {
    let basis = c.basis_upto(w);
    let mut out = c.zero();
    for &(i, k) in picks {
        out = c.add(&out, &c.monomial(basis[i % basis.len()].clone(), c.ring().from_i64(k)));
    }
    out
}

#[test]
fn cosimplicial_identities() {
    for e in cases() {
        let levels: Vec<_> = (0..=3).map(|nu| fiber_power_envelope(&e, nu)).collect();
        let d: Vec<Vec<CarrierMap>> = (0..3).map(|nu| coface_maps(&levels[nu], &levels[nu + 1])).collect();
        let s: Vec<Vec<CarrierMap>> = (0..3).map(|nu| codegeneracy_maps(&levels[nu + 1], &levels[nu])).collect();
        for nu in 0..2 {
            // d^j d^i = d^i d^{j−1} for i < j
            for j in 0..=nu + 2 {
                for i in 0..j {
                    assert!(d[nu + 1][j].after(&d[nu][i]).unwrap().same_as(&d[nu + 1][i].after(&d[nu][j - 1]).unwrap()), "δδ ν={nu} i={i} j={j}");
                }
            }
            // s^j s^i = s^i s^{j+1} for i ≤ j, maps D(ν+2) → D(ν)
            for j in 0..=nu {
                for i in 0..=j {
                    assert!(s[nu][j].after(&s[nu + 1][i]).unwrap().same_as(&s[nu][i].after(&s[nu + 1][j + 1]).unwrap()), "σσ ν={nu} i={i} j={j}");
                }
            }
        }
        for nu in 0..3 {
            let id = CarrierMap::new(&levels[nu].carrier, &levels[nu].carrier, (0..e.carrier.chart_arity()).map(|j| levels[nu].carrier.chart_var(j)).collect(), (0..levels[nu].carrier.xi_arity()).map(|k| levels[nu].carrier.xi_var(k)).collect()).unwrap();
            for j in 0..=nu {
                for i in 0..=nu + 1 {
                    let sd = s[nu][j].after(&d[nu][i]).unwrap();
                    if i == j || i == j + 1 {
                        assert!(sd.same_as(&id), "σδ = id, ν={nu} i={i} j={j}");
                    } else if i < j {
                        assert!(sd.same_as(&d[nu - 1][i].after(&s[nu - 1][j - 1]).unwrap()), "σδ ν={nu} i={i} j={j}");
                    } else {
                        assert!(sd.same_as(&d[nu - 1][i - 1].after(&s[nu - 1][j]).unwrap()), "σδ ν={nu} i={i} j={j}");
                    }
                }
            }
        }
    }
}

#[test]
fn free_ranks_of_fiber_levels() {
    // J = 0: level ν is A[x] ⊗ A⟨ξ⟩ on d(ν+1) variables, so weight w has C(w + k − 1, k − 1) monomials
    let binom = |n: u64, k: u64| (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
    for d in 1..=2 {
        let chart: Vec<&str> = ["x", "y"][..d].to_vec();
        let e = env(BaseDpRing::integers(), &chart, &[], 7, 6);
        for nu in 0..=2 {
            let c = fiber_power_envelope(&e, nu).carrier;
            let k = (d * (nu + 1)) as u64;
            for w in 0..=6u64 {
                assert_eq!(c.basis(w as u32).len() as u64, binom(w + k - 1, k - 1), "d={d} ν={nu} w={w}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coface_sums_square_to_zero(case in 0usize..4, nu in 0usize..2, picks in prop::collection::vec((0usize..64, -5i64..=5), 1..5)) {
        let e = &cases()[case];
        let l: Vec<_> = (nu..=nu + 2).map(|v| fiber_power_envelope(e, v)).collect();
        let y = random_element(&l[0].carrier, 5, &picks);
        let once = alternating_coface_sum(&coface_maps(&l[0], &l[1]), &y);
        let twice = alternating_coface_sum(&coface_maps(&l[1], &l[2]), &once);
        prop_assert!(twice.is_zero());
    }

    #[test]
    fn tower_levels_commute(case in 0usize..4, n in 1u32..=4, n2 in 1u32..=4, picks in prop::collection::vec((0usize..64, -9i64..=9), 1..6)) {
        let (hi, lo) = (n.max(n2), n.min(n2));
        let e = &cases()[case];
        let plain = plain_carrier(&e.carrier);
        let level = |k: u32| e.carrier.with_truncation(TruncationParams { m: factorial(k), n: k, weight_cutoff: Some(5) });
        let y = random_element(&plain, 5, &picks);
        let (top, bottom) = (level(hi), level(lo));
        prop_assert_eq!(bottom.reduce(top.reduce(y.clone())), bottom.reduce(y));
    }
}
