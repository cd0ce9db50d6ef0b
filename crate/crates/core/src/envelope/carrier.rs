use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exactalg::{BaseDpRing, Coefficient, ModulusEffect, PdStructure};
use crate::pdpoly::{binomial, gamma_monomial_coeff, syntax, TruncationParams};

use super::poly::{divides, push_term, Poly};
use super::EnvelopeError;

/// Exponent vector laid out as [chart α | pd T^{[K]} | fiber ξ^{[L]}].
pub type Exponents = Vec<u32>;

/// Element of a carrier in the basis x^α T^{[K]} ξ^{[L]}, α standard.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct CarrierElement {
    pub(crate) terms: BTreeMap<Exponents, Coefficient>,
}

impl CarrierElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Coefficient)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &[u32]) -> Option<&Coefficient> {
        self.terms.get(e)
    }
}

/// Normal form of x^γ in the untruncated envelope: (α, K, c) triples.
type NfTerms = Vec<(Exponents, Exponents, Coefficient)>;

struct Generator {
    lead: Exponents,
    inv_lc: Coefficient,
    tail: Vec<(Exponents, Coefficient)>,
}

pub(crate) struct NormalForms {
    gens: Vec<Generator>,
    npd: usize,
    cache: Mutex<HashMap<Exponents, Arc<NfTerms>>>,
}

impl NormalForms {
    pub(crate) fn new(ring: &BaseDpRing, polys: &[Poly]) -> Result<Self, EnvelopeError> {
        let mut gens = Vec::new();
        for (i, f) in polys.iter().enumerate() {
            let (lead, lc) = f.leading().ok_or(EnvelopeError::BasisHypothesis(format!("generator {} is zero", i + 1)))?;
            let inv_lc = ring
                .inv(lc)
                .ok_or_else(|| EnvelopeError::BasisHypothesis(format!("generator {} has a non-unit leading coefficient", i + 1)))?;
            let tail = f.terms().filter(|(e, _)| *e != lead).map(|(e, c)| (e.clone(), c.clone())).collect();
            gens.push(Generator { lead: lead.clone(), inv_lc, tail });
        }
        Ok(NormalForms { npd: gens.len(), gens, cache: Mutex::new(HashMap::new()) })
    }

    pub(crate) fn is_standard(&self, alpha: &[u32]) -> bool {
        !self.gens.iter().any(|g| divides(&g.lead, alpha))
    }

    fn nf(&self, ring: &BaseDpRing, alpha: &[u32]) -> Arc<NfTerms> {
        if let Some(v) = self.cache.lock().expect("normal form cache").get(alpha) {
            return v.clone();
        }
        let res = match self.gens.iter().position(|g| divides(&g.lead, alpha)) {
            None => vec![(alpha.to_vec(), vec![0; self.npd], ring.one())],
            Some(i) => {
                let g = &self.gens[i];
                let rest: Exponents = alpha.iter().zip(&g.lead).map(|(a, b)| a - b).collect();
                let mut acc: BTreeMap<(Exponents, Exponents), Coefficient> = BTreeMap::new();
                let mut push = |a: Exponents, k: Exponents, c: Coefficient| {
                    let key = (a, k);
                    let s = match acc.get(&key) {
                        Some(o) => ring.add(o, &c),
                        None => c,
                    };
                    if s.is_zero() {
                        acc.remove(&key);
                    } else {
                        acc.insert(key, s);
                    }
                };
                for (a, k, c) in self.nf(ring, &rest).iter() {
                    let mut k2 = k.clone();
                    k2[i] += 1;
                    let c2 = ring.mul(c, &ring.from_u64(k2[i] as u64));
                    push(a.clone(), k2, ring.mul(&c2, &g.inv_lc));
                }
                for (beta, b) in &g.tail {
                    let shifted: Exponents = rest.iter().zip(beta).map(|(x, y)| x + y).collect();
                    let sb = ring.neg(&ring.mul(b, &g.inv_lc));
                    for (a, k, c) in self.nf(ring, &shifted).iter() {
                        push(a.clone(), k.clone(), ring.mul(c, &sb));
                    }
                }
                acc.into_iter().map(|((a, k), c)| (a, k, c)).collect()
            }
        };
        let res = Arc::new(res);
        self.cache.lock().expect("normal form cache").insert(alpha.to_vec(), res.clone());
        res
    }
}

pub(crate) struct CarrierCore {
    pub(crate) ring: BaseDpRing,
    pub(crate) chart_names: Vec<String>,
    pub(crate) pd_names: Vec<String>,
    pub(crate) gens: Vec<Poly>,
    pub(crate) t_weights: Vec<u32>,
    pub(crate) annotated: bool,
    pub(crate) graded: bool,
    pub(crate) trunc: TruncationParams,
    effects: Vec<ModulusEffect>,
    nf: Arc<NormalForms>,
}

/// Truncated envelope D(ν)^{m,n} as an algebra with explicit A-basis.
#[derive(Clone)]
pub struct Carrier {
    core: Arc<CarrierCore>,
    xi: usize,
    nu: usize,
}

impl fmt::Debug for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Carrier")
            .field("ring", &self.core.ring)
            .field("chart", &self.core.chart_names)
            .field("pd", &self.core.pd_names)
            .field("nu", &self.nu)
            .field("trunc", &self.core.trunc)
            .finish()
    }
}

impl PartialEq for Carrier {
    fn eq(&self, o: &Self) -> bool {
        self.nu == o.nu
            && self.xi == o.xi
            && self.core.ring == o.core.ring
            && self.core.chart_names == o.core.chart_names
            && self.core.gens == o.core.gens
            && self.core.annotated == o.core.annotated
            && self.core.trunc == o.core.trunc
    }
}

fn effects_for(ring: &BaseDpRing, trunc: &TruncationParams, annotated: bool) -> Vec<ModulusEffect> {
    (0..=trunc.n)
        .map(|h| {
            if h >= trunc.n {
                ring.modulus_effect(&trunc.m)
            } else if annotated {
                let PdStructure::StandardP { p, .. } = ring.pd() else { unreachable!("annotated carriers are standard-p") };
                let v = ring.min_valuation_gamma_p_from((trunc.n - h) as u64).unwrap_or(0);
                ring.modulus_effect(&(&trunc.m * BigInt::from(*p).pow(v)))
            } else {
                ModulusEffect::Free
            }
        })
        .collect()
}

impl Carrier {
    pub(crate) fn new(
        ring: &BaseDpRing,
        chart_names: Vec<String>,
        pd_names: Vec<String>,
        gens: Vec<Poly>,
        annotated: bool,
        trunc: TruncationParams,
    ) -> Result<Self, EnvelopeError> {
        let nf = Arc::new(NormalForms::new(ring, &gens)?);
        let graded = gens.iter().all(|g| g.is_homogeneous());
        let t_weights = gens.iter().map(|g| g.degree().unwrap_or(0)).collect();
        let effects = effects_for(ring, &trunc, annotated);
        let core = CarrierCore { ring: ring.clone(), chart_names, pd_names, gens, t_weights, annotated, graded, trunc, effects, nf };
        Ok(Carrier { core: Arc::new(core), xi: 0, nu: 0 })
    }

    /// Same envelope with ν·d fiber variables ξ.
    pub fn with_level(&self, nu: usize) -> Carrier {
        Carrier { core: self.core.clone(), xi: nu * self.chart_arity(), nu }
    }

    /// Same envelope and level under other truncation parameters.
    pub fn with_truncation(&self, trunc: TruncationParams) -> Carrier {
        let c = &self.core;
        let core = CarrierCore {
            ring: c.ring.clone(),
            chart_names: c.chart_names.clone(),
            pd_names: c.pd_names.clone(),
            gens: c.gens.clone(),
            t_weights: c.t_weights.clone(),
            annotated: c.annotated,
            graded: c.graded,
            effects: effects_for(&c.ring, &trunc, c.annotated),
            trunc,
            nf: c.nf.clone(),
        };
        Carrier { core: Arc::new(core), xi: self.xi, nu: self.nu }
    }

    pub fn ring(&self) -> &BaseDpRing {
        &self.core.ring
    }

    pub fn level(&self) -> usize {
        self.nu
    }

    pub fn chart_arity(&self) -> usize {
        self.core.chart_names.len()
    }

    pub fn pd_arity(&self) -> usize {
        self.core.gens.len()
    }

    pub fn xi_arity(&self) -> usize {
        self.xi
    }

    pub fn nvars(&self) -> usize {
        self.chart_arity() + self.pd_arity() + self.xi
    }

    pub fn chart_names(&self) -> &[String] {
        &self.core.chart_names
    }

    pub fn pd_names(&self) -> &[String] {
        &self.core.pd_names
    }

    pub fn generators(&self) -> &[Poly] {
        &self.core.gens
    }

    pub fn pd_weights(&self) -> &[u32] {
        &self.core.t_weights
    }

    pub fn is_graded(&self) -> bool {
        self.core.graded
    }

    pub fn is_annotated(&self) -> bool {
        self.core.annotated
    }

    pub fn truncation(&self) -> &TruncationParams {
        &self.core.trunc
    }

    pub fn weight_cutoff(&self) -> Option<u32> {
        self.core.trunc.weight_cutoff
    }

    pub(crate) fn same_envelope(&self, o: &Carrier) -> bool {
        Arc::ptr_eq(&self.core, &o.core) || (self.core.gens == o.core.gens && self.core.ring == o.core.ring && self.core.trunc == o.core.trunc)
    }

    /// Names of ξ variables: slot s ≥ 1 and chart variable j.
    pub fn xi_names(&self) -> Vec<String> {
        let d = self.chart_arity();
        (0..self.xi)
            .map(|k| {
                let (s, j) = (k / d + 1, k % d);
                if d == 1 {
                    format!("xi{s}")
                } else {
                    format!("xi{s}_{}", self.core.chart_names[j])
                }
            })
            .collect()
    }

    /// (slot, chart variable) of each ξ.
    pub fn xi_dictionary(&self) -> Vec<(usize, usize)> {
        let d = self.chart_arity();
        (0..self.xi).map(|k| (k / d + 1, k % d)).collect()
    }

    pub fn xi_index(&self, slot: usize, j: usize) -> usize {
        (slot - 1) * self.chart_arity() + j
    }

    pub fn variable_names(&self) -> Vec<String> {
        let mut v = self.core.chart_names.clone();
        v.extend(self.core.pd_names.iter().cloned());
        v.extend(self.xi_names());
        v
    }

    pub fn weight(&self, e: &[u32]) -> u32 {
        let (d, p) = (self.chart_arity(), self.pd_arity());
        let a: u32 = e[..d].iter().sum();
        let k: u32 = e[d..d + p].iter().zip(&self.core.t_weights).map(|(k, w)| k * w).sum();
        let l: u32 = e[d + p..].iter().sum();
        a + k + l
    }

    pub fn pd_weight(&self, e: &[u32]) -> u32 {
        e[self.chart_arity()..].iter().sum()
    }

    pub fn effect(&self, pd_weight: u32) -> &ModulusEffect {
        &self.core.effects[pd_weight.min(self.core.trunc.n) as usize]
    }

    /// Generator of the annihilator ideal of a basis element: None when free.
    pub fn relation_modulus(&self, e: &[u32]) -> Option<BigInt> {
        match self.effect(self.pd_weight(e)) {
            ModulusEffect::Free => None,
            ModulusEffect::Kill => Some(BigInt::one()),
            ModulusEffect::Reduce(g) => Some(g.clone()),
        }
    }

    pub fn is_standard(&self, e: &[u32]) -> bool {
        self.core.nf.is_standard(&e[..self.chart_arity()])
    }

    fn insert(&self, acc: &mut BTreeMap<Exponents, Coefficient>, e: Exponents, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let s = match acc.get(&e) {
            Some(o) => self.core.ring.add(o, &c),
            None => c,
        };
        if s.is_zero() {
            acc.remove(&e);
        } else {
            acc.insert(e, s);
        }
    }

    /// Canonical representative: cutoff and moduli applied.
    pub fn reduce(&self, x: CarrierElement) -> CarrierElement {
        let cut = self.core.trunc.weight_cutoff;
        let mut out = BTreeMap::new();
        for (e, c) in x.terms {
            if cut.is_some_and(|w| self.weight(&e) > w) {
                continue;
            }
            let c = self.core.ring.apply_effect(&c, self.effect(self.pd_weight(&e)));
            if !c.is_zero() {
                out.insert(e, c);
            }
        }
        CarrierElement { terms: out }
    }

    pub fn zero(&self) -> CarrierElement {
        CarrierElement::zero()
    }

    pub fn constant(&self, c: Coefficient) -> CarrierElement {
        self.monomial(vec![0; self.nvars()], c)
    }

    pub fn one(&self) -> CarrierElement {
        self.constant(self.core.ring.one())
    }

    pub fn from_i64(&self, c: i64) -> CarrierElement {
        self.constant(self.core.ring.from_i64(c))
    }

    /// c·x^α T^{[K]} ξ^{[L]} for a standard exponent.
    pub fn monomial(&self, e: Exponents, c: Coefficient) -> CarrierElement {
        debug_assert_eq!(e.len(), self.nvars());
        let mut t = BTreeMap::new();
        t.insert(e, c);
        self.reduce(CarrierElement { terms: t })
    }

    fn unit(&self, v: usize) -> Exponents {
        let mut e = vec![0; self.nvars()];
        e[v] = 1;
        e
    }

    /// Image of the chart variable x_j (a normal form, so possibly involving T).
    pub fn chart_var(&self, j: usize) -> CarrierElement {
        let mut a = vec![0; self.chart_arity()];
        a[j] = 1;
        self.x_power(&a)
    }

    pub fn pd_var(&self, i: usize) -> CarrierElement {
        self.monomial(self.unit(self.chart_arity() + i), self.core.ring.one())
    }

    pub fn xi_var(&self, k: usize) -> CarrierElement {
        self.monomial(self.unit(self.chart_arity() + self.pd_arity() + k), self.core.ring.one())
    }

    /// Normal form of x^α.
    pub fn x_power(&self, alpha: &[u32]) -> CarrierElement {
        let ring = &self.core.ring;
        let mut acc = BTreeMap::new();
        for (a, k, c) in self.core.nf.nf(ring, alpha).iter() {
            let mut e = a.clone();
            e.extend_from_slice(k);
            e.resize(self.nvars(), 0);
            self.insert(&mut acc, e, c.clone());
        }
        self.reduce(CarrierElement { terms: acc })
    }

    pub fn from_poly(&self, p: &Poly) -> CarrierElement {
        let mut out = self.zero();
        for (a, c) in p.terms() {
            out = self.add(&out, &self.scale(&self.x_power(a), c));
        }
        out
    }

    pub fn add(&self, a: &CarrierElement, b: &CarrierElement) -> CarrierElement {
        let mut t = a.terms.clone();
        for (e, c) in &b.terms {
            self.insert(&mut t, e.clone(), c.clone());
        }
        self.reduce(CarrierElement { terms: t })
    }

    pub fn sub(&self, a: &CarrierElement, b: &CarrierElement) -> CarrierElement {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &CarrierElement) -> CarrierElement {
        self.scale(a, &self.core.ring.from_i64(-1))
    }

    pub fn scale(&self, a: &CarrierElement, s: &Coefficient) -> CarrierElement {
        let mut t = BTreeMap::new();
        for (e, c) in &a.terms {
            self.insert(&mut t, e.clone(), self.core.ring.mul(c, s));
        }
        self.reduce(CarrierElement { terms: t })
    }

    fn mul_into(&self, acc: &mut BTreeMap<Exponents, Coefficient>, a: &[u32], ca: &Coefficient, b: &[u32], cb: &Coefficient) {
        let ring = &self.core.ring;
        let (d, p) = (self.chart_arity(), self.pd_arity());
        if self.core.graded {
            if let Some(w) = self.core.trunc.weight_cutoff {
                if self.weight(a) + self.weight(b) > w {
                    return;
                }
            }
        }
        let mut c0 = BigInt::one();
        let mut pd: Exponents = Vec::with_capacity(p + self.xi);
        for v in d..self.nvars() {
            if a[v] > 0 && b[v] > 0 {
                c0 *= binomial((a[v] + b[v]) as u64, a[v] as u64);
            }
            pd.push(a[v] + b[v]);
        }
        let base = ring.mul(&ring.mul(ca, cb), &ring.from_bigint(&c0));
        if base.is_zero() {
            return;
        }
        let alpha: Exponents = a[..d].iter().zip(&b[..d]).map(|(x, y)| x + y).collect();
        if p == 0 {
            let mut e = alpha;
            e.extend_from_slice(&pd);
            self.insert(acc, e, base);
            return;
        }
        for (a2, k2, c2) in self.core.nf.nf(ring, &alpha).iter() {
            let mut c = BigInt::one();
            let mut e = a2.clone();
            for i in 0..p {
                if k2[i] > 0 && pd[i] > 0 {
                    c *= binomial((k2[i] + pd[i]) as u64, k2[i] as u64);
                }
                e.push(k2[i] + pd[i]);
            }
            e.extend_from_slice(&pd[p..]);
            let coef = ring.mul(&ring.mul(&base, c2), &ring.from_bigint(&c));
            self.insert(acc, e, coef);
        }
    }

    pub fn mul(&self, a: &CarrierElement, b: &CarrierElement) -> CarrierElement {
        let mut acc = BTreeMap::new();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                self.mul_into(&mut acc, ea, ca, eb, cb);
            }
        }
        self.reduce(CarrierElement { terms: acc })
    }

    pub fn pow(&self, a: &CarrierElement, k: u32) -> CarrierElement {
        let mut r = self.one();
        for _ in 0..k {
            r = self.mul(&r, a);
        }
        r
    }

    /// Membership in the pd ideal (pd-weight ≥ 1 span, plus I₀ on the annotated carrier).
    pub fn in_pd_ideal(&self, y: &CarrierElement) -> bool {
        y.terms.iter().all(|(e, c)| self.pd_weight(e) >= 1 || self.base_pd_part(c).is_some())
    }

    /// c = p·u in the base pd ideal: returns u.
    fn base_pd_part(&self, c: &Coefficient) -> Option<Coefficient> {
        if !self.core.annotated {
            return None;
        }
        let PdStructure::StandardP { p, .. } = self.core.ring.pd() else { return None };
        let x = c.to_bigint()?;
        let p = BigInt::from(*p);
        (&x % &p).is_zero().then(|| self.core.ring.from_bigint(&(x / p)))
    }

    fn gamma_term(&self, j: u32, e: &[u32], c: &Coefficient) -> Result<CarrierElement, EnvelopeError> {
        let ring = &self.core.ring;
        let d = self.chart_arity();
        if j == 0 {
            return Ok(self.one());
        }
        let jalpha: Exponents = e[..d].iter().map(|a| a * j).collect();
        if self.pd_weight(e) == 0 {
            let u = self.base_pd_part(c).ok_or(EnvelopeError::NotInPdIdeal)?;
            let g = ring.gamma_of_p(j as u64).ok_or(EnvelopeError::NotInPdIdeal)?;
            return Ok(self.scale(&self.x_power(&jalpha), &ring.mul(&ring.pow(&u, j), &g)));
        }
        let (pd, k) = gamma_monomial_coeff(&e[d..], j as u64);
        let mut m = vec![0; d];
        m.extend(pd);
        let coef = ring.mul(&ring.pow(c, j), &ring.from_bigint(&k));
        Ok(self.mul(&self.x_power(&jalpha), &self.monomial(m, coef)))
    }

    /// γ_k(y) for y in the pd ideal.
    pub fn gamma(&self, k: u32, y: &CarrierElement) -> Result<CarrierElement, EnvelopeError> {
        if !self.in_pd_ideal(y) {
            return Err(EnvelopeError::NotInPdIdeal);
        }
        let mut table: Vec<CarrierElement> = (0..=k).map(|j| if j == 0 { self.one() } else { self.zero() }).collect();
        for (e, c) in y.terms.iter().rev() {
            let single: Vec<CarrierElement> = (0..=k).map(|j| self.gamma_term(j, e, c)).collect::<Result<_, _>>()?;
            let mut next = Vec::with_capacity(table.len());
            for j in 0..=k as usize {
                let mut acc = self.zero();
                for i in 0..=j {
                    if single[i].is_zero() || table[j - i].is_zero() {
                        continue;
                    }
                    acc = self.add(&acc, &self.mul(&single[i], &table[j - i]));
                }
                next.push(acc);
            }
            table = next;
        }
        Ok(table.swap_remove(k as usize))
    }

    /// Σ c·Π images^α with ordinary powers.
    pub fn eval_poly(&self, p: &Poly, images: &[CarrierElement]) -> CarrierElement {
        let mut powers: Vec<Vec<CarrierElement>> = vec![vec![self.one()]; images.len()];
        let mut out = self.zero();
        for (a, c) in p.terms() {
            let mut t = self.constant(c.clone());
            for (j, &k) in a.iter().enumerate() {
                while powers[j].len() <= k as usize {
                    let next = self.mul(powers[j].last().expect("nonempty"), &images[j]);
                    powers[j].push(next);
                }
                t = self.mul(&t, &powers[j][k as usize]);
            }
            out = self.add(&out, &t);
        }
        out
    }

    /// ∂/∂x_j with ξ held fixed; T^{[K]} differentiates through ∂f_i/∂x_j.
    pub fn partial_chart(&self, j: usize, y: &CarrierElement) -> CarrierElement {
        let ring = &self.core.ring;
        let (d, p) = (self.chart_arity(), self.pd_arity());
        let dfs: Vec<CarrierElement> = self.core.gens.iter().map(|f| self.from_poly(&f.partial(j))).collect();
        let mut out = BTreeMap::new();
        let mut extra = self.zero();
        for (e, c) in &y.terms {
            if e[j] > 0 {
                let mut f = e.clone();
                f[j] -= 1;
                self.insert(&mut out, f, ring.mul(c, &ring.from_u64(e[j] as u64)));
            }
            for i in 0..p {
                if e[d + i] > 0 && !dfs[i].is_zero() {
                    let mut f = e.clone();
                    f[d + i] -= 1;
                    extra = self.add(&extra, &self.mul(&self.monomial(f, c.clone()), &dfs[i]));
                }
            }
        }
        self.add(&self.reduce(CarrierElement { terms: out }), &extra)
    }

    /// ∂/∂ξ_k: ξ^{[L]} ↦ ξ^{[L − e_k]}.
    pub fn partial_xi(&self, k: usize, y: &CarrierElement) -> CarrierElement {
        let v = self.chart_arity() + self.pd_arity() + k;
        let mut out = BTreeMap::new();
        for (e, c) in &y.terms {
            if e[v] > 0 {
                let mut f = e.clone();
                f[v] -= 1;
                self.insert(&mut out, f, c.clone());
            }
        }
        self.reduce(CarrierElement { terms: out })
    }

    /// Extends an element of a lower level of the same envelope by ξ = 0 coordinates.
    pub fn lift(&self, from: &Carrier, y: &CarrierElement) -> CarrierElement {
        assert!(from.xi <= self.xi && from.chart_arity() == self.chart_arity() && from.pd_arity() == self.pd_arity());
        let mut t = BTreeMap::new();
        for (e, c) in &y.terms {
            let mut f = e.clone();
            f.resize(self.nvars(), 0);
            t.insert(f, c.clone());
        }
        self.reduce(CarrierElement { terms: t })
    }

    fn var_weights(&self) -> Vec<u32> {
        let mut w = vec![1; self.chart_arity()];
        w.extend_from_slice(&self.core.t_weights);
        w.extend(std::iter::repeat_n(1, self.xi));
        w
    }

    /// Basis exponents of exact weight w (killed elements omitted), in canonical order.
    pub fn basis(&self, w: u32) -> Vec<Exponents> {
        let mut out = self.standard_monomials(w);
        out.retain(|e| *self.effect(self.pd_weight(e)) != ModulusEffect::Kill);
        out
    }

    /// Standard exponents of exact weight w, killed ones included.
    pub fn standard_monomials(&self, w: u32) -> Vec<Exponents> {
        let weights = self.var_weights();
        let mut out = Vec::new();
        let mut cur = vec![0u32; weights.len()];
        fn rec(v: usize, rem: u32, weights: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Exponents>) {
            if v == weights.len() {
                if rem == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            let mut k = 0;
            loop {
                if k * weights[v] > rem {
                    break;
                }
                cur[v] = k;
                rec(v + 1, rem - k * weights[v], weights, cur, out);
                if weights[v] == 0 {
                    break;
                }
                k += 1;
            }
            cur[v] = 0;
        }
        rec(0, w, &weights, &mut cur, &mut out);
        out.retain(|e| self.is_standard(e));
        out.sort();
        out
    }

    pub fn basis_upto(&self, w: u32) -> Vec<Exponents> {
        let mut v: Vec<Exponents> = (0..=w).flat_map(|k| self.basis(k)).collect();
        v.sort();
        v
    }

    pub fn render(&self, y: &CarrierElement) -> String {
        if y.is_zero() {
            return "0".into();
        }
        let names = self.variable_names();
        let d = self.chart_arity();
        let mut keys: Vec<&Exponents> = y.terms.keys().collect();
        keys.sort_by(|a, b| self.weight(a).cmp(&self.weight(b)).then_with(|| b.cmp(a)));
        let mut s = String::new();
        for (idx, e) in keys.into_iter().enumerate() {
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| {
                    if v < d {
                        if k == 1 { names[v].clone() } else { format!("{}^{}", names[v], k) }
                    } else {
                        format!("{}^[{}]", names[v], k)
                    }
                })
                .collect();
            push_term(&mut s, idx == 0, &y.terms[e], &factors);
        }
        s
    }

    /// Parses an element; pd and fiber variables accept `^[k]`, ordinary powers multiply out.
    pub fn parse(&self, text: &str, column_offset: usize) -> Result<CarrierElement, EnvelopeError> {
        let ring = &self.core.ring;
        let names = self.variable_names();
        let d = self.chart_arity();
        let mut out = self.zero();
        for term in syntax::parse_terms(text, column_offset)? {
            let mut t = self.constant(ring.from_rational(&term.coeff)?);
            for f in &term.factors {
                let v = names.iter().position(|n| *n == f.name).ok_or_else(|| EnvelopeError::UnknownSymbol {
                    name: f.name.clone(),
                    column: f.column + column_offset,
                })?;
                let factor = if v < d {
                    if f.divided {
                        return Err(EnvelopeError::Syntax(syntax::SyntaxError {
                            column: f.column + column_offset,
                            message: format!("chart variable '{}' has no divided powers", f.name),
                        }));
                    }
                    let mut a = vec![0; d];
                    a[v] = f.exponent;
                    self.x_power(&a)
                } else if f.divided {
                    let mut e = vec![0; self.nvars()];
                    e[v] = f.exponent;
                    self.monomial(e, ring.one())
                } else {
                    let mut e = vec![0; self.nvars()];
                    e[v] = 1;
                    self.pow(&self.monomial(e, ring.one()), f.exponent)
                };
                t = self.mul(&t, &factor);
            }
            out = self.add(&out, &t);
        }
        Ok(out)
    }

    /// Largest coefficient modulus over pd weights, for dumps.
    pub fn moduli(&self) -> Vec<(u32, ModulusEffect)> {
        self.core.effects.iter().enumerate().map(|(h, e)| (h as u32, e.clone())).collect()
    }
}
