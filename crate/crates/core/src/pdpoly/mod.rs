//! Free divided power polynomial algebras A⟨t₁,…,t_d⟩ and their truncations D^{m,n}.

pub mod syntax;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactalg::{factorial, BaseDpRing, Coefficient, ExactAlgError};

pub use syntax::SyntaxError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PdError {
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("ring mismatch")]
    RingMismatch,
    #[error("divided powers need an element without constant term")]
    NonzeroConstantTerm,
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("unknown variable '{name}' at column {column}")]
    UnknownVariable { name: String, column: usize },
    #[error(transparent)]
    Ring(#[from] ExactAlgError),
}

/// Binomial coefficient C(n, k) as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// (ij)! / (i!·(j!)^i), the coefficient in γ_i(t^{[j]}) = c·t^{[ij]}.
pub fn gamma_of_divided_power(i: u64, j: u64) -> BigInt {
    let mut den = factorial(i);
    let fj = factorial(j);
    for _ in 0..i {
        den *= &fj;
    }
    factorial(i * j) / den
}

/// (ij)! / (j!)^i, the coefficient in (t^{[j]})^i = c·t^{[ij]}.
pub fn power_of_divided_power(i: u64, j: u64) -> BigInt {
    let mut den = BigInt::one();
    let fj = factorial(j);
    for _ in 0..i {
        den *= &fj;
    }
    factorial(i * j) / den
}

/// Exponent vector K of t^{[K]}; ordered by (weight, lexicographic exponents).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(arity: usize) -> Self {
        MultiIndex(vec![0; arity])
    }

    pub fn unit(arity: usize, i: usize) -> Self {
        let mut v = vec![0; arity];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finitely supported Σ a_K t^{[K]} with no stored zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdElement {
    ring: BaseDpRing,
    arity: usize,
    terms: BTreeMap<MultiIndex, Coefficient>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationParams {
    /// Torsion multiplier m ≥ 1.
    pub m: BigInt,
    /// pd level n ≥ 1.
    pub n: u32,
    pub weight_cutoff: Option<u32>,
}

/// Result of `truncate`: the canonical representative and whether weight-cutoff dropping occurred.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncated {
    pub value: PdElement,
    pub filtration_truncated: bool,
}

impl PdElement {
    pub fn zero(ring: &BaseDpRing, arity: usize) -> Self {
        PdElement { ring: ring.clone(), arity, terms: BTreeMap::new() }
    }

    pub fn constant(ring: &BaseDpRing, arity: usize, c: Coefficient) -> Self {
        Self::monomial(ring, MultiIndex::zero(arity), c)
    }

    pub fn one(ring: &BaseDpRing, arity: usize) -> Self {
        Self::constant(ring, arity, ring.one())
    }

    /// t_i^{[1]}.
    pub fn var(ring: &BaseDpRing, arity: usize, i: usize) -> Self {
        Self::monomial(ring, MultiIndex::unit(arity, i), ring.one())
    }

    pub fn monomial(ring: &BaseDpRing, k: MultiIndex, c: Coefficient) -> Self {
        let arity = k.arity();
        let mut e = Self::zero(ring, arity);
        e.add_term(k, c);
        e
    }

    pub fn ring(&self) -> &BaseDpRing {
        &self.ring
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Coefficient)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, k: &MultiIndex) -> Coefficient {
        self.terms.get(k).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn constant_term(&self) -> Coefficient {
        self.coefficient(&MultiIndex::zero(self.arity))
    }

    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.weight()).max()
    }

    pub fn add_term(&mut self, k: MultiIndex, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let ring = &self.ring;
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = ring.add(o.get(), &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check(&self, other: &PdElement) -> Result<(), PdError> {
        if self.arity != other.arity {
            return Err(PdError::ArityMismatch(self.arity, other.arity));
        }
        if self.ring != other.ring {
            return Err(PdError::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &PdElement) -> Result<PdElement, PdError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PdElement) -> Result<PdElement, PdError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PdElement {
        self.scale(&self.ring.from_i64(-1))
    }

    pub fn scale(&self, s: &Coefficient) -> PdElement {
        let mut out = Self::zero(&self.ring, self.arity);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), self.ring.mul(c, s));
        }
        out
    }

    /// Renders with the given variable names (defaults t1, t2, …).
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            let txt = c.to_string();
            let (neg, abs) = match txt.strip_prefix('-') {
                Some(a) => (true, a.to_string()),
                None => (false, txt),
            };
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in k.0.iter().enumerate() {
                if e > 0 {
                    factors.push(format!("{}^[{}]", names[i], e));
                }
            }
            if factors.is_empty() {
                s.push_str(&abs);
            } else {
                if abs != "1" {
                    s.push_str(&abs);
                    s.push('*');
                }
                s.push_str(&factors.join("*"));
            }
        }
        s
    }

    pub fn default_names(arity: usize) -> Vec<String> {
        if arity == 1 {
            vec!["t".into()]
        } else {
            (1..=arity).map(|i| format!("t{i}")).collect()
        }
    }

    /// Parses the pd syntax, e.g. `3*t1^[2]*t2 - t2^[3]`. A bare variable means its first divided power;
    /// an ordinary power `t^k` means the k-fold product.
    pub fn parse(text: &str, ring: &BaseDpRing, names: &[String]) -> Result<PdElement, PdError> {
        let arity = names.len();
        let mut out = Self::zero(ring, arity);
        for term in syntax::parse_terms(text, 0)? {
            let mut e = Self::constant(ring, arity, ring.from_rational(&term.coeff)?);
            for f in term.factors {
                let i = names
                    .iter()
                    .position(|n| *n == f.name)
                    .ok_or(PdError::UnknownVariable { name: f.name.clone(), column: f.column })?;
                let factor = if f.divided {
                    let mut k = MultiIndex::zero(arity);
                    k.0[i] = f.exponent;
                    Self::monomial(ring, k, ring.one())
                } else {
                    pd_pow(&Self::var(ring, arity, i), f.exponent)
                };
                e = pd_mul(&e, &factor)?;
            }
            out = out.add(&e)?;
        }
        Ok(out)
    }
}

impl fmt::Display for PdElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&Self::default_names(self.arity)))
    }
}

fn monomial_product(ring: &BaseDpRing, a: &MultiIndex, b: &MultiIndex) -> (MultiIndex, Coefficient) {
    let mut c = BigInt::one();
    let k: Vec<u32> = a
        .0
        .iter()
        .zip(&b.0)
        .map(|(&i, &j)| {
            if i > 0 && j > 0 {
                c *= binomial((i + j) as u64, i as u64);
            }
            i + j
        })
        .collect();
    (MultiIndex(k), ring.from_bigint(&c))
}

/// Exact product in A⟨t⟩.
pub fn pd_mul(a: &PdElement, b: &PdElement) -> Result<PdElement, PdError> {
    a.check(b)?;
    let ring = &a.ring;
    let mut out = PdElement::zero(ring, a.arity);
    for (ka, ca) in &a.terms {
        for (kb, cb) in &b.terms {
            let (k, c) = monomial_product(ring, ka, kb);
            out.add_term(k, ring.mul(&ring.mul(ca, cb), &c));
        }
    }
    Ok(out)
}

/// Ordinary power x^k.
pub fn pd_pow(x: &PdElement, k: u32) -> PdElement {
    let mut r = PdElement::one(&x.ring, x.arity);
    for _ in 0..k {
        r = pd_mul(&r, x).expect("same algebra");
    }
    r
}

/// γ_j(t^{[K]}) for a pd monomial with |K| ≥ 1.
pub(crate) fn gamma_monomial_coeff(k: &[u32], j: u64) -> (Vec<u32>, BigInt) {
    let first = k.iter().position(|&e| e > 0).expect("monomial in the augmentation ideal");
    let mut c = BigInt::one();
    let out: Vec<u32> = k
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            if e > 0 {
                if i == first {
                    c *= gamma_of_divided_power(j, e as u64);
                } else {
                    c *= power_of_divided_power(j, e as u64);
                }
            }
            e * j as u32
        })
        .collect();
    (out, c)
}

/// γ_k(x) for x without constant term.
pub fn pd_gamma(k: u32, x: &PdElement) -> Result<PdElement, PdError> {
    if !x.constant_term().is_zero() {
        return Err(PdError::NonzeroConstantTerm);
    }
    let ring = &x.ring;
    let arity = x.arity;
    let terms: Vec<(&MultiIndex, &Coefficient)> = x.terms.iter().collect();
    // table[j] = γ_j(sum of terms processed so far), built from the last term backwards
    let mut table: Vec<PdElement> = (0..=k).map(|j| if j == 0 { PdElement::one(ring, arity) } else { PdElement::zero(ring, arity) }).collect();
    for (mono, coef) in terms.into_iter().rev() {
        let single: Vec<PdElement> = (0..=k)
            .map(|j| {
                if j == 0 {
                    return PdElement::one(ring, arity);
                }
                let (e, c) = gamma_monomial_coeff(&mono.0, j as u64);
                let cj = ring.pow(coef, j);
                PdElement::monomial(ring, MultiIndex(e), ring.mul(&cj, &ring.from_bigint(&c)))
            })
            .collect();
        let mut next = Vec::with_capacity(table.len());
        for j in 0..=k as usize {
            let mut acc = PdElement::zero(ring, arity);
            for i in 0..=j {
                if single[i].is_zero() || table[j - i].is_zero() {
                    continue;
                }
                acc = acc.add(&pd_mul(&single[i], &table[j - i])?)?;
            }
            next.push(acc);
        }
        table = next;
    }
    Ok(table.swap_remove(k as usize))
}

/// True iff every monomial of x has weight ≥ n.
pub fn ideal_power_membership(x: &PdElement, n: u32) -> bool {
    x.terms.keys().all(|k| k.weight() >= n)
}

/// Canonical representative in D^{m,n} = A⟨t⟩/m⟨t⟩₊^{[n]}, with optional weight cutoff.
pub fn truncate(x: &PdElement, p: &TruncationParams) -> Truncated {
    let ring = &x.ring;
    let eff = ring.modulus_effect(&p.m);
    let mut out = PdElement::zero(ring, x.arity);
    let mut dropped = false;
    for (k, c) in &x.terms {
        let w = k.weight();
        if p.weight_cutoff.is_some_and(|cut| w > cut) {
            dropped = true;
            continue;
        }
        let c = if w >= p.n { ring.apply_effect(c, &eff) } else { c.clone() };
        out.add_term(k.clone(), c);
    }
    Truncated { value: out, filtration_truncated: dropped }
}

/// Image under the pd algebra map t_j ↦ images[j].
pub fn substitute(x: &PdElement, images: &[PdElement]) -> Result<PdElement, PdError> {
    if images.len() != x.arity {
        return Err(PdError::ArityMismatch(images.len(), x.arity));
    }
    let Some(first) = images.first() else {
        return Ok(x.clone());
    };
    let (ring, arity) = (first.ring.clone(), first.arity);
    for img in images {
        if img.arity != arity {
            return Err(PdError::ArityMismatch(img.arity, arity));
        }
        if !img.constant_term().is_zero() {
            return Err(PdError::NonzeroConstantTerm);
        }
    }
    let mut cache: Vec<BTreeMap<u32, PdElement>> = vec![BTreeMap::new(); images.len()];
    let mut out = PdElement::zero(&ring, arity);
    for (k, c) in &x.terms {
        let mut term = PdElement::constant(&ring, arity, ring.from_rational(&c.to_rational())?);
        for (j, &e) in k.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !cache[j].contains_key(&e) {
                let g = pd_gamma(e, &images[j])?;
                cache[j].insert(e, g);
            }
            term = pd_mul(&term, &cache[j][&e])?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> BaseDpRing {
        BaseDpRing::integers()
    }

    fn mono(ring: &BaseDpRing, k: &[u32], c: i64) -> PdElement {
        PdElement::monomial(ring, MultiIndex(k.to_vec()), ring.from_i64(c))
    }

    #[test]
    fn documented_products() {
        let r = z();
        assert_eq!(pd_mul(&mono(&r, &[1], 1), &mono(&r, &[1], 1)).unwrap(), mono(&r, &[2], 2));
        assert_eq!(pd_mul(&mono(&r, &[2], 1), &mono(&r, &[3], 1)).unwrap(), mono(&r, &[5], 10));
        assert_eq!(pd_mul(&mono(&r, &[1, 0], 1), &mono(&r, &[0, 1], 1)).unwrap(), mono(&r, &[1, 1], 1));
    }

    #[test]
    fn documented_gammas() {
        let r = z();
        assert_eq!(pd_gamma(2, &mono(&r, &[1], 1)).unwrap(), mono(&r, &[2], 1));
        assert_eq!(pd_gamma(2, &mono(&r, &[2], 1)).unwrap(), mono(&r, &[4], 3));
        assert_eq!(pd_gamma(3, &mono(&r, &[1], 2)).unwrap(), mono(&r, &[3], 8));
        assert_eq!(pd_gamma(2, &PdElement::one(&r, 1)), Err(PdError::NonzeroConstantTerm));
    }

    #[test]
    fn documented_membership() {
        let r = z();
        assert!(ideal_power_membership(&mono(&r, &[3], 1), 2));
        let x = mono(&r, &[0], 1).add(&mono(&r, &[2], 1)).unwrap();
        assert!(!ideal_power_membership(&x, 1));
        assert!(ideal_power_membership(&mono(&r, &[1, 2], 1), 3));
    }

    #[test]
    fn documented_truncations() {
        let r = z();
        let x = mono(&r, &[1], 1).add(&mono(&r, &[3], 5)).unwrap();
        let two = BigInt::from(2);
        let t = truncate(&x, &TruncationParams { m: two.clone(), n: 2, weight_cutoff: None });
        assert_eq!(t.value, mono(&r, &[1], 1).add(&mono(&r, &[3], 1)).unwrap());
        let one = BigInt::from(1);
        assert!(truncate(&mono(&r, &[2], 1), &TruncationParams { m: one.clone(), n: 2, weight_cutoff: None }).value.is_zero());
        let four = BigInt::from(4);
        let x = mono(&r, &[0], 7).add(&mono(&r, &[5], 4)).unwrap();
        assert_eq!(truncate(&x, &TruncationParams { m: four.clone(), n: 3, weight_cutoff: None }).value, mono(&r, &[0], 7));
        let t = truncate(&x, &TruncationParams { m: four.clone(), n: 3, weight_cutoff: Some(4) });
        assert!(t.filtration_truncated);
    }

    #[test]
    fn documented_substitutions() {
        let r = z();
        let uv = mono(&r, &[1, 0], 1).add(&mono(&r, &[0, 1], 1)).unwrap();
        let got = substitute(&mono(&r, &[2], 1), std::slice::from_ref(&uv)).unwrap();
        let want = mono(&r, &[2, 0], 1).add(&mono(&r, &[1, 1], 1)).unwrap().add(&mono(&r, &[0, 2], 1)).unwrap();
        assert_eq!(got, want);
        assert!(substitute(&mono(&r, &[1], 1), &[PdElement::zero(&r, 1)]).unwrap().is_zero());
        assert_eq!(substitute(&mono(&r, &[3], 1), &[mono(&r, &[1], 2)]).unwrap(), mono(&r, &[3], 8));
    }

    #[test]
    fn parse_and_render_round_trip() {
        let r = z();
        let names = vec!["t1".to_string(), "t2".to_string()];
        let x = PdElement::parse("t1^[3]*t2^[1] - 2*t2^[2] + 7", &r, &names).unwrap();
        let again = PdElement::parse(&x.render(&names), &r, &names).unwrap();
        assert_eq!(x, again);
        assert_eq!(x.render(&names), "7 - 2*t2^[2] + t1^[3]*t2^[1]");
        let sq = PdElement::parse("t1^2", &r, &names).unwrap();
        assert_eq!(sq, mono(&r, &[2, 0], 2));
        match PdElement::parse("t1^[2", &r, &names) {
            Err(PdError::Syntax(e)) => assert_eq!(e.column, 4),
            other => panic!("{other:?}"),
        }
    }
}
