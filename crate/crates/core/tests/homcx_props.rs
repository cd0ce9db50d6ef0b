use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use pdcris::exactalg::{BaseDpRing, IntMatrix, ModuleDescription};
use pdcris::homcx::{is_quasi_iso, mapping_cone, ComplexMap, FiniteComplex, PresentedModule};

/// Dense matrix over ℤ/n with `rows` rows, acting on column vectors.
#[derive(Clone, Debug)]
struct Dense {
    n: i64,
    rows: usize,
    cols: usize,
    a: Vec<Vec<i64>>,
}

impl Dense {
    fn apply(&self, v: &[i64]) -> Vec<i64> {
        self.a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum::<i64>().rem_euclid(self.n)).collect()
    }

    fn mul(&self, o: &Dense) -> Dense {
        let a = (0..self.rows).map(|i| (0..o.cols).map(|j| (0..self.cols).map(|k| self.a[i][k] * o.a[k][j]).sum::<i64>().rem_euclid(self.n)).collect()).collect();
        Dense { n: self.n, rows: self.rows, cols: o.cols, a }
    }

    fn to_int(&self, ring: &BaseDpRing) -> IntMatrix {
        if self.rows == 0 {
            return IntMatrix::zeros(ring, 0, self.cols);
        }
        IntMatrix::from_i64(ring, &self.a)
    }
}

fn all_vectors(n: i64, len: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|v| (0..n).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

/// Element-order histogram of a finite abelian group determines it up to isomorphism.
fn order_histogram_of_description(n: i64, m: &ModuleDescription) -> BTreeMap<i64, usize> {
    let mut orders: Vec<i64> = vec![n; m.free_rank];
    orders.extend(m.torsion.iter().map(|d| d.to_i64().unwrap()));
    let mut hist = BTreeMap::new();
    let mut elems: Vec<Vec<i64>> = vec![vec![]];
    for &o in &orders {
        elems = elems.into_iter().flat_map(|v| (0..o).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    for e in elems {
        let ord = (1..=n).find(|&k| e.iter().zip(&orders).all(|(x, o)| (k * x) % o == 0)).unwrap();
        *hist.entry(ord).or_insert(0) += 1;
    }
    hist
}

/// Order histogram of ker(out) / im(inc) by enumeration; each coset is counted once.
fn order_histogram_brute(n: i64, g: usize, inc: Option<&Dense>, out: Option<&Dense>) -> BTreeMap<i64, usize> {
    let image: std::collections::BTreeSet<Vec<i64>> = match inc {
        Some(d) => all_vectors(n, d.cols).iter().map(|v| d.apply(v)).collect(),
        None => [vec![0; g]].into_iter().collect(),
    };
    let kernel: Vec<Vec<i64>> = all_vectors(n, g).into_iter().filter(|v| out.is_none_or(|d| d.apply(v).iter().all(|&x| x == 0))).collect();
    let mut hist = BTreeMap::new();
    for v in &kernel {
        let ord = (1..=n).find(|&k| image.contains(&v.iter().map(|x| (k * x).rem_euclid(n)).collect::<Vec<_>>())).unwrap();
        *hist.entry(ord).or_insert(0usize) += 1;
    }
    hist.values_mut().for_each(|c| *c /= image.len());
    hist
}

/// Random C⁰ → C¹ → C² over ℤ/n with d¹d⁰ = 0: d⁰ has columns drawn from ker d¹.
fn random_complex(n: i64, g: [usize; 3], seeds: &[i64]) -> (Dense, Dense) {
    let mut s = seeds.iter().cycle();
    let d1 = Dense { n, rows: g[2], cols: g[1], a: (0..g[2]).map(|_| (0..g[1]).map(|_| s.next().unwrap().rem_euclid(n)).collect()).collect() };
    let ker: Vec<Vec<i64>> = all_vectors(n, g[1]).into_iter().filter(|v| d1.apply(v).iter().all(|&x| x == 0)).collect();
    let cols: Vec<Vec<i64>> = (0..g[0]).map(|_| ker[s.next().unwrap().unsigned_abs() as usize % ker.len()].clone()).collect();
    let d0 = Dense { n, rows: g[1], cols: g[0], a: (0..g[1]).map(|i| cols.iter().map(|c| c[i]).collect()).collect() };
    (d0, d1)
}

fn to_complex(ring: &BaseDpRing, g: [usize; 3], d0: &Dense, d1: &Dense) -> FiniteComplex {
    let terms = g.iter().map(|&k| PresentedModule::free(ring, k)).collect();
    FiniteComplex::new(ring, 0, terms, vec![d0.to_int(ring), d1.to_int(ring)]).unwrap()
}

/// Unimodular matrix and its inverse as products of elementary row operations.
fn unimodular(n: i64, size: usize, ops: &[(usize, usize, i64)]) -> (Dense, Dense) {
    let id = |k: usize| Dense { n, rows: k, cols: k, a: (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect() };
    let (mut u, mut v) = (id(size), id(size));
    for &(i, j, c) in ops {
        let (i, j) = (i % size, j % size);
        if i == j {
            continue;
        }
        let (mut e, mut f) = (id(size), id(size));
        e.a[i][j] = c.rem_euclid(n);
        f.a[i][j] = (-c).rem_euclid(n);
        u = e.mul(&u);
        v = v.mul(&f);
    }
    (u, v)
}

fn gens() -> impl Strategy<Value = [usize; 3]> {
    (1usize..=3, 1usize..=3, 1usize..=3).prop_map(|(a, b, c)| [a, b, c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homology_matches_enumeration(n in 2i64..=8, g in gens(), seeds in prop::collection::vec(-20i64..20, 24)) {
        let ring = BaseDpRing::modular(n as u64).unwrap();
        let (d0, d1) = random_complex(n, g, &seeds);
        let c = to_complex(&ring, g, &d0, &d1);
        prop_assert!(c.check_complex().unwrap());
        let brute = [
            order_histogram_brute(n, g[0], None, Some(&d0)),
            order_histogram_brute(n, g[1], Some(&d0), Some(&d1)),
            order_histogram_brute(n, g[2], Some(&d1), None),
        ];
        for k in 0..3 {
            let h = c.homology(k as i64).unwrap();
            prop_assert!(h.torsion.iter().all(|d| (BigInt::from(n) % d) == BigInt::from(0)));
            prop_assert_eq!(order_histogram_of_description(n, &h), brute[k].clone(), "degree {}", k);
        }
    }

    #[test]
    fn cones_of_identity_and_zero(n in 2i64..=8, g in gens(), seeds in prop::collection::vec(-20i64..20, 24)) {
        let ring = BaseDpRing::modular(n as u64).unwrap();
        let (d0, d1) = random_complex(n, g, &seeds);
        let c = to_complex(&ring, g, &d0, &d1);
        let id = ComplexMap::identity(&c);
        prop_assert!(id.check_chain_map().unwrap());
        let cone = mapping_cone(&id).unwrap();
        prop_assert!(cone.check_complex().unwrap());
        for k in -1..=2 {
            prop_assert!(cone.homology(k).unwrap().is_zero());
        }
        prop_assert!(is_quasi_iso(&id, 0, 2).unwrap());
        // cone(0: C → C) = C[1] ⊕ C
        let zero = ComplexMap::new(c.clone(), c.clone(), g.iter().map(|&k| IntMatrix::zeros(&ring, k, k)).collect()).unwrap();
        let cone = mapping_cone(&zero).unwrap();
        for k in -1..=2 {
            let expect = c.homology(k + 1).unwrap().direct_sum(&c.homology(k).unwrap(), &ring);
            prop_assert_eq!(cone.homology(k).unwrap(), expect, "degree {}", k);
        }
    }

    #[test]
    fn homology_is_invariant_under_basis_change(
        n in 2i64..=8,
        g in gens(),
        seeds in prop::collection::vec(-20i64..20, 24),
        ops in prop::collection::vec((0usize..3, 0usize..3, -5i64..=5), 3 * 4),
    ) {
        let ring = BaseDpRing::modular(n as u64).unwrap();
        let (d0, d1) = random_complex(n, g, &seeds);
        let c = to_complex(&ring, g, &d0, &d1);
        let p: Vec<(Dense, Dense)> = (0..3).map(|k| unimodular(n, g[k], &ops[4 * k..4 * k + 4])).collect();
        // d' = P_{k+1} d P_k^{-1}
        let e0 = p[1].0.mul(&d0).mul(&p[0].1);
        let e1 = p[2].0.mul(&d1).mul(&p[1].1);
        let c2 = to_complex(&ring, g, &e0, &e1);
        prop_assert!(c2.check_complex().unwrap());
        for k in 0..3 {
            prop_assert_eq!(c.homology(k).unwrap(), c2.homology(k).unwrap());
        }
        let f = ComplexMap::new(c, c2, p.iter().map(|(u, _)| u.to_int(&ring)).collect()).unwrap();
        prop_assert!(f.check_chain_map().unwrap());
        prop_assert!(is_quasi_iso(&f, 0, 2).unwrap());
    }
}
