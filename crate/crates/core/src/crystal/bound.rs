//! Torsion bound for pd ideals: if m·x^{[n]} = 0 for all x ∈ I then m·I^{[N]} = 0.
//!
//! Checked on ℤ⟨t_1..t_d⟩ modulo a sub-ideal J_test of the ideal generated by all m·x^{[n]}:
//! membership of m·t^{[K]} in J_test implies it in the true ideal, so the check is sound.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exactalg::{BaseDpRing, Coefficient};
use crate::pdpoly::{pd_gamma, pd_mul, MultiIndex, PdElement};

use super::CrystalError;

/// max(n, ⌈2n²·log₂ n⌉) for n ≥ 2, and 1 for n = 1.
pub fn pd_nilpotence_bound(_m: u64, n: u32) -> u32 {
    if n <= 1 {
        return 1;
    }
    // smallest N with 2^N ≥ n^{2n²}
    let target = BigInt::from(n).pow(2 * n * n);
    let bits = target.bits() as u32;
    let exact = BigInt::one() << (bits - 1) == target;
    let big_n = if exact { bits - 1 } else { bits };
    big_n.max(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub m: u64,
    pub n: u32,
    pub vars: usize,
    pub bound: u32,
    pub cap: u32,
    /// Number of products m·t^{[K]} tested.
    pub tested: usize,
    pub counterexamples: Vec<String>,
    /// lcm over tested K of the least a with a·t^{[K]} ∈ J_test; "0" if some K has none.
    pub observed_multiplier: String,
    /// The bound exceeds the cap, so nothing was tested.
    pub vacuous: bool,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn monomials(d: usize, w: u32) -> Vec<MultiIndex> {
    fn go(d: usize, w: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == d {
            prefix.push(w);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=w).rev() {
            prefix.push(a);
            go(d, w - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(d, w, &mut Vec::with_capacity(d), &mut out);
    out
}

fn int(c: &Coefficient) -> BigInt {
    c.to_bigint().expect("integer coefficients")
}

/// Row span over ℤ in echelon form, plus per-column moduli from single-term relations.
struct Lattice {
    cols: usize,
    pivots: Vec<Option<Vec<BigInt>>>,
    diag: Vec<BigInt>,
}

impl Lattice {
    fn new(cols: usize) -> Self {
        Lattice { cols, pivots: vec![None; cols], diag: vec![BigInt::zero(); cols] }
    }

    fn reduce_diag(&self, v: &mut [BigInt], skip: usize) {
        for (j, x) in v.iter_mut().enumerate() {
            if j != skip && !self.diag[j].is_zero() {
                *x = x.mod_floor(&self.diag[j]);
            }
        }
    }

    fn add(&mut self, mut v: Vec<BigInt>) {
        let nz: Vec<usize> = (0..self.cols).filter(|&j| !v[j].is_zero()).collect();
        if nz.len() == 1 {
            let j = nz[0];
            self.diag[j] = self.diag[j].gcd(&v[j]);
            return;
        }
        self.reduce_diag(&mut v, usize::MAX);
        for col in 0..self.cols {
            if v[col].is_zero() {
                continue;
            }
            match self.pivots[col].take() {
                None => {
                    if v[col].is_negative() {
                        v.iter_mut().for_each(|x| *x = -&*x);
                    }
                    self.reduce_diag(&mut v, col);
                    self.pivots[col] = Some(v);
                    return;
                }
                Some(r) => {
                    let (a, b) = (r[col].clone(), v[col].clone());
                    let e = a.extended_gcd(&b);
                    let (ag, bg) = (&a / &e.gcd, &b / &e.gcd);
                    let mut top: Vec<BigInt> = r.iter().zip(&v).map(|(x, y)| &e.x * x + &e.y * y).collect();
                    let mut rest: Vec<BigInt> = r.iter().zip(&v).map(|(x, y)| &ag * y - &bg * x).collect();
                    self.reduce_diag(&mut top, col);
                    self.reduce_diag(&mut rest, usize::MAX);
                    self.pivots[col] = Some(top);
                    v = rest;
                }
            }
        }
    }

    /// Whether c·e_j lies in the span.
    fn contains_multiple(&self, j: usize, c: &BigInt) -> bool {
        let g = self.least_multiple(j);
        if g.is_zero() {
            c.is_zero()
        } else {
            c.is_multiple_of(&g)
        }
    }

    /// Least a > 0 with a·e_j in the span, or 0 if none.
    fn least_multiple(&self, j: usize) -> BigInt {
        // with column j moved last, the span meets ℤ·e_j exactly in the last pivot row
        let perm = |v: &[BigInt]| -> Vec<BigInt> {
            let mut w: Vec<BigInt> = v.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, x)| x.clone()).collect();
            w.push(v[j].clone());
            w
        };
        let mut all = Lattice::new(self.cols);
        for row in self.pivots.iter().flatten() {
            all.insert_plain(perm(row));
        }
        for (i, g) in self.diag.iter().enumerate() {
            if !g.is_zero() {
                let mut v = vec![BigInt::zero(); self.cols];
                v[i] = g.clone();
                all.insert_plain(perm(&v));
            }
        }
        match &all.pivots[self.cols - 1] {
            Some(r) => r[self.cols - 1].abs(),
            None => BigInt::zero(),
        }
    }

    fn insert_plain(&mut self, mut v: Vec<BigInt>) {
        for col in 0..self.cols {
            if v[col].is_zero() {
                continue;
            }
            match self.pivots[col].take() {
                None => {
                    self.pivots[col] = Some(v);
                    return;
                }
                Some(r) => {
                    let (a, b) = (r[col].clone(), v[col].clone());
                    let e = a.extended_gcd(&b);
                    let (ag, bg) = (&a / &e.gcd, &b / &e.gcd);
                    self.pivots[col] = Some(r.iter().zip(&v).map(|(x, y)| &e.x * x + &e.y * y).collect());
                    v = r.iter().zip(&v).map(|(x, y)| &ag * y - &bg * x).collect();
                }
            }
        }
    }
}

/// Least g > 0 with g·e_k in the span of (c1^k c2^{n−k})_k over c ∈ {0..n}².
fn lattice_multiples(n: u32) -> Vec<BigInt> {
    let mut lat = Lattice::new(n as usize + 1);
    for c1 in 0..=n as u64 {
        for c2 in 0..=n as u64 {
            let v: Vec<BigInt> = (0..=n).map(|k| BigInt::from(c1).pow(k) * BigInt::from(c2).pow(n - k)).collect();
            if v.iter().any(|x| !x.is_zero()) {
                lat.insert_plain(v);
            }
        }
    }
    (0..=n as usize)
        .map(|k| {
            let mut g = BigInt::one();
            // the Vandermonde rows give full rank, so some multiple exists
            while !lat.contains_multiple(k, &g) {
                g += 1;
            }
            g
        })
        .collect()
}

fn weight_of(x: &PdElement) -> Result<u32, CrystalError> {
    let ws: Vec<u32> = x.terms().map(|(k, _)| k.weight()).collect();
    match ws.first() {
        Some(&w) if w > 0 && ws.iter().all(|&v| v == w) => Ok(w),
        _ => Err(CrystalError::Dimension("test elements must be homogeneous of positive weight".into())),
    }
}

/// Tests m·t^{[K]} ∈ J_test for bound ≤ |K| ≤ cap in ℤ⟨t_1..t_vars⟩, where J_test is generated by
/// m·γ_n(u), m·γ_n(c₁u + c₂u′) for monomials of equal weight, g_k·m·γ_k(u)γ_{n−k}(u′) for monomials
/// of different weight, and m·γ_n(x) for the homogeneous `extra` elements.
pub fn check_nilpotence_bound(m: u64, n: u32, vars: usize, cap: u32, extra: &[PdElement]) -> Result<BoundCheck, CrystalError> {
    if m == 0 || n == 0 || vars == 0 {
        return Err(CrystalError::Dimension("m, n and the variable count must be positive".into()));
    }
    let bound = pd_nilpotence_bound(m, n);
    let mut out = BoundCheck { m, n, vars, bound, cap, tested: 0, counterexamples: Vec::new(), observed_multiplier: "1".into(), vacuous: bound > cap };
    let mut multiplier = BigInt::one();
    if out.vacuous {
        return Ok(out);
    }
    let ring = BaseDpRing::integers();
    let mc = ring.from_u64(m);
    let mono = |k: &MultiIndex| PdElement::monomial(&ring, k.clone(), ring.one());
    let by_weight: Vec<Vec<MultiIndex>> = (0..=cap).map(|w| monomials(vars, w)).collect();
    let pd = |e: crate::pdpoly::PdError| CrystalError::Dimension(e.to_string());

    // homogeneous generators with their weights
    let mut gens: Vec<(u32, PdElement)> = Vec::new();
    for wu in 1..=cap / n {
        for (i, u) in by_weight[wu as usize].iter().enumerate() {
            gens.push((n * wu, pd_gamma(n, &mono(u)).map_err(pd)?.scale(&mc)));
            for u2 in &by_weight[wu as usize][i + 1..] {
                for c1 in 1..=n as i64 {
                    for c2 in 1..=n as i64 {
                        let x = mono(u).scale(&ring.from_i64(c1)).add(&mono(u2).scale(&ring.from_i64(c2))).map_err(pd)?;
                        gens.push((n * wu, pd_gamma(n, &x).map_err(pd)?.scale(&mc)));
                    }
                }
            }
        }
    }
    let g = lattice_multiples(n);
    for wu in 1..=cap {
        for wv in wu + 1..=cap {
            for k in 1..n {
                let w = k * wu + (n - k) * wv;
                if w > cap {
                    continue;
                }
                for u in &by_weight[wu as usize] {
                    for v in &by_weight[wv as usize] {
                        let a = pd_gamma(k, &mono(u)).map_err(pd)?;
                        let b = pd_gamma(n - k, &mono(v)).map_err(pd)?;
                        let s = ring.mul(&mc, &ring.from_bigint(&g[k as usize]));
                        gens.push((w, pd_mul(&a, &b).map_err(pd)?.scale(&s)));
                    }
                }
            }
        }
    }
    for x in extra {
        if x.arity() != vars {
            return Err(CrystalError::Dimension(format!("test element has arity {}, expected {vars}", x.arity())));
        }
        let w = n * weight_of(x)?;
        if w <= cap {
            gens.push((w, pd_gamma(n, x).map_err(pd)?.scale(&mc)));
        }
    }

    // ascending weights, so single-term members can feed the pd closure γ_k(a·t^{[K]}) ∈ J
    for w in 1..=cap {
        let cols = &by_weight[w as usize];
        let index: BTreeMap<&MultiIndex, usize> = cols.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut lat = Lattice::new(cols.len());
        for (wg, gen) in &gens {
            if *wg > w {
                continue;
            }
            for y in &by_weight[(w - wg) as usize] {
                let prod = pd_mul(gen, &mono(y)).map_err(pd)?;
                let mut v = vec![BigInt::zero(); cols.len()];
                for (k, c) in prod.terms() {
                    v[index[k]] = int(c);
                }
                if v.iter().any(|x| !x.is_zero()) {
                    lat.add(v);
                }
            }
        }
        if w >= bound {
            for (j, k) in cols.iter().enumerate() {
                out.tested += 1;
                let a = lat.least_multiple(j);
                multiplier = if a.is_zero() || multiplier.is_zero() { BigInt::zero() } else { multiplier.lcm(&a) };
                if !lat.contains_multiple(j, &BigInt::from(m)) {
                    out.counterexamples.push(format!("{m}·t^[{}]", k.0.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")));
                }
            }
        }
        for (j, k) in cols.iter().enumerate() {
            let a = lat.least_multiple(j);
            if a.is_zero() {
                continue;
            }
            for e in 2..=cap / w {
                let x = PdElement::monomial(&ring, k.clone(), ring.from_bigint(&a));
                gens.push((e * w, pd_gamma(e, &x).map_err(pd)?));
            }
        }
    }
    out.observed_multiplier = multiplier.to_string();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values() {
        assert_eq!(pd_nilpotence_bound(1, 1), 1);
        assert_eq!(pd_nilpotence_bound(2, 2), 8);
        assert_eq!(pd_nilpotence_bound(3, 3), 29);
        assert_eq!(pd_nilpotence_bound(1, 4), 64);
    }

    #[test]
    fn lattice_for_squares() {
        assert_eq!(lattice_multiples(2), vec![BigInt::one(); 3]);
    }

    #[test]
    fn one_variable_square_bound() {
        // F_3⟨t⟩/I² satisfies x^{[2]} = x²/2 = 0 on I but keeps t^{[9]} = γ_3(t^{[3]}) ≠ 0,
        // so odd weights with prime-power binomial gcds survive for every m
        for m in 1..=3 {
            let r = check_nilpotence_bound(m, 2, 1, 16, &[]).unwrap();
            assert_eq!(r.tested, 9);
            assert_eq!(r.counterexamples, vec![format!("{m}·t^[9]"), format!("{m}·t^[11]"), format!("{m}·t^[13]")]);
            assert!(!r.passed());
        }
        let r = check_nilpotence_bound(1, 2, 1, 16, &[]).unwrap();
        assert_eq!(r.observed_multiplier, (3 * 11 * 13).to_string());
        assert!(check_nilpotence_bound(1, 3, 1, 16, &[]).unwrap().vacuous);
    }

    #[test]
    fn below_the_bound_fails_in_one_variable() {
        // t^{[1]} is not killed: m·x^{[2]} = 0 says nothing about weight one
        let mut lat = Lattice::new(1);
        lat.add(vec![BigInt::from(6)]);
        assert!(!lat.contains_multiple(0, &BigInt::from(2)));
        assert!(lat.contains_multiple(0, &BigInt::from(12)));
    }
}
