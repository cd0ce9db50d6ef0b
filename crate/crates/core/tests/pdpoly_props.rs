use num_bigint::BigInt;
use proptest::prelude::*;

use pdcris::exactalg::BaseDpRing;
use pdcris::pdpoly::{binomial, pd_gamma, pd_mul, pd_pow, substitute, truncate, MultiIndex, PdElement, TruncationParams};

fn rings() -> Vec<BaseDpRing> {
    vec![BaseDpRing::integers(), BaseDpRing::rationals(), BaseDpRing::modular(4).unwrap(), BaseDpRing::standard_p(3, 2).unwrap()]
}

fn factorial(k: u32) -> BigInt {
    (1..=k as u64).map(BigInt::from).product()
}

/// Terms (exponents, coefficient) without constant term and of weight in 1..=max_w.
fn terms(arity: usize, max_w: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0u32..=max_w, arity), -6i64..=6), 1..4).prop_map(move |ts| {
        ts.into_iter()
            .map(|(mut e, c)| {
                while e.iter().sum::<u32>() > max_w {
                    let i = e.iter().position(|&x| x > 0).unwrap();
                    e[i] -= 1;
                }
                if e.iter().all(|&x| x == 0) {
                    e[0] = 1;
                }
                (e, c)
            })
            .collect()
    })
}

fn element(ring: &BaseDpRing, arity: usize, ts: &[(Vec<u32>, i64)]) -> PdElement {
    let mut x = PdElement::zero(ring, arity);
    for (e, c) in ts {
        x = x.add(&PdElement::monomial(ring, MultiIndex(e.clone()), ring.from_i64(*c))).unwrap();
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorial_times_gamma_is_power(r in 0usize..4, arity in 1usize..=3, ts in terms(3, 3), k in 0u32..=4) {
        let ring = &rings()[r];
        let ts: Vec<_> = ts.into_iter().map(|(e, c)| (e[..arity].to_vec(), c)).filter(|(e, _)| e.iter().any(|&x| x > 0)).collect();
        let x = element(ring, arity, &ts);
        let g = pd_gamma(k, &x).unwrap();
        prop_assert_eq!(g.scale(&ring.from_bigint(&factorial(k))), pd_pow(&x, k));
    }

    #[test]
    fn addition_axiom(r in 0usize..4, a in terms(2, 3), b in terms(2, 3), k in 0u32..=4) {
        let ring = &rings()[r];
        let (x, y) = (element(ring, 2, &a), element(ring, 2, &b));
        let lhs = pd_gamma(k, &x.add(&y).unwrap()).unwrap();
        let mut rhs = PdElement::zero(ring, 2);
        for i in 0..=k {
            rhs = rhs.add(&pd_mul(&pd_gamma(i, &x).unwrap(), &pd_gamma(k - i, &y).unwrap()).unwrap()).unwrap();
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn homogeneity_and_products(r in 0usize..4, a in terms(2, 3), lambda in -5i64..=5, i in 0u32..=3, j in 0u32..=3) {
        let ring = &rings()[r];
        let x = element(ring, 2, &a);
        let l = ring.from_i64(lambda);
        let lk = ring.from_bigint(&BigInt::from(lambda).pow(i));
        prop_assert_eq!(pd_gamma(i, &x.scale(&l)).unwrap(), pd_gamma(i, &x).unwrap().scale(&lk));
        let prod = pd_mul(&pd_gamma(i, &x).unwrap(), &pd_gamma(j, &x).unwrap()).unwrap();
        let c = ring.from_bigint(&binomial((i + j) as u64, i as u64));
        prop_assert_eq!(prod, pd_gamma(i + j, &x).unwrap().scale(&c));
    }

    #[test]
    fn multiplication_is_associative_and_commutative(r in 0usize..4, a in terms(3, 2), b in terms(3, 2), c in terms(3, 2)) {
        let ring = &rings()[r];
        let (x, y, z) = (element(ring, 3, &a), element(ring, 3, &b), element(ring, 3, &c));
        prop_assert_eq!(pd_mul(&x, &y).unwrap(), pd_mul(&y, &x).unwrap());
        prop_assert_eq!(pd_mul(&pd_mul(&x, &y).unwrap(), &z).unwrap(), pd_mul(&x, &pd_mul(&y, &z).unwrap()).unwrap());
    }

    #[test]
    fn substitution_is_functorial(r in 0usize..4, a in terms(2, 3), f0 in terms(2, 2), f1 in terms(2, 2), g0 in terms(2, 2), g1 in terms(2, 2)) {
        let ring = &rings()[r];
        let x = element(ring, 2, &a);
        let f = [element(ring, 2, &f0), element(ring, 2, &f1)];
        let g = [element(ring, 2, &g0), element(ring, 2, &g1)];
        let gf: Vec<PdElement> = f.iter().map(|fi| substitute(fi, &g).unwrap()).collect();
        prop_assert_eq!(substitute(&substitute(&x, &f).unwrap(), &g).unwrap(), substitute(&x, &gf).unwrap());
    }

    #[test]
    fn truncation_is_an_idempotent_ring_map(r in 0usize..4, a in terms(2, 3), b in terms(2, 3), m in 1i64..=6, n in 1u32..=4, cut in prop::option::of(2u32..=6)) {
        let ring = &rings()[r];
        let p = TruncationParams { m: m.into(), n, weight_cutoff: cut };
        let (x, y) = (element(ring, 2, &a), element(ring, 2, &b));
        let tx = truncate(&x, &p).value;
        prop_assert_eq!(truncate(&tx, &p).value, tx.clone());
        let ty = truncate(&y, &p).value;
        prop_assert_eq!(truncate(&pd_mul(&x, &y).unwrap(), &p).value, truncate(&pd_mul(&tx, &ty).unwrap(), &p).value);
        prop_assert_eq!(truncate(&x.add(&y).unwrap(), &p).value, truncate(&tx.add(&ty).unwrap(), &p).value);
    }
}
