//! pd de Rham complexes of truncated envelopes, optionally twisted by a connection on a free
//! module, sliced by total weight; and the contracting homotopy of a free pd algebra.
//!
//! A form is Σ a·e_k ⊗ dz_S with a in the carrier, e_k a module generator and dz_S a wedge of
//! frame symbols (dx_j, then dξ_k). Total weight is wt(a) + wt(e_k) + |S|; every differential
//! here preserves it on graded data.

mod homotopy;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::envelope::{Carrier, CarrierElement, EnvelopeError, EnvelopePresentation, Exponents};
use crate::exactalg::{Coefficient, IntMatrix};
use crate::homcx::{FiniteComplex, HomError, PresentedModule};
use crate::pdpoly::TruncationParams;

pub use homotopy::{poincare_homotopy, PoincareHomotopy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeRhamError {
    #[error("exact weight slices need graded data; use a weight band instead")]
    NotGraded,
    #[error("connection is not integrable")]
    NotIntegrable,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("image leaves the weight band: {0}")]
    OutsideBand(String),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Hom(#[from] HomError),
}

/// One exact total weight, or all weights up to a bound (filtered data, not a true slice).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightBand {
    Exact(u32),
    UpTo(u32),
}

impl WeightBand {
    pub fn top(&self) -> u32 {
        match self {
            WeightBand::Exact(w) | WeightBand::UpTo(w) => *w,
        }
    }

    fn weights(&self) -> std::ops::RangeInclusive<u32> {
        match self {
            WeightBand::Exact(w) => *w..=*w,
            WeightBand::UpTo(w) => 0..=*w,
        }
    }
}

/// (module generator, carrier exponent, wedge mask over the frame).
pub type FormKey = (usize, Exponents, u32);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormElement {
    terms: BTreeMap<(usize, u32), CarrierElement>,
}

impl FormElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// y·e_k ⊗ dz_mask.
    pub fn single(c: &Carrier, k: usize, mask: u32, y: &CarrierElement) -> Self {
        let mut out = Self::zero();
        out.add_component(c, k, mask, y, false);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, u32), &CarrierElement)> {
        self.terms.iter()
    }

    pub fn component(&self, k: usize, mask: u32) -> Option<&CarrierElement> {
        self.terms.get(&(k, mask))
    }

    /// Adds ±y to the (k, mask) component, arithmetic in `c`.
    pub fn add_component(&mut self, c: &Carrier, k: usize, mask: u32, y: &CarrierElement, negate: bool) {
        if y.is_zero() {
            return;
        }
        let y = if negate { c.neg(y) } else { y.clone() };
        let s = match self.terms.get(&(k, mask)) {
            Some(o) => c.add(o, &y),
            None => y,
        };
        if s.is_zero() {
            self.terms.remove(&(k, mask));
        } else {
            self.terms.insert((k, mask), s);
        }
    }

    pub fn add(&self, c: &Carrier, other: &FormElement) -> FormElement {
        let mut out = self.clone();
        for ((k, m), y) in &other.terms {
            out.add_component(c, *k, *m, y, false);
        }
        out
    }

    pub fn sub(&self, c: &Carrier, other: &FormElement) -> FormElement {
        let mut out = self.clone();
        for ((k, m), y) in &other.terms {
            out.add_component(c, *k, *m, y, true);
        }
        out
    }

    pub fn scale(&self, c: &Carrier, s: &Coefficient) -> FormElement {
        let mut out = FormElement::zero();
        for ((k, m), y) in &self.terms {
            out.add_component(c, *k, *m, &c.scale(y, s), false);
        }
        out
    }

    /// Canonical representative in `c`.
    pub fn reduce(&self, c: &Carrier) -> FormElement {
        let mut out = FormElement::zero();
        for ((k, m), y) in &self.terms {
            out.add_component(c, *k, *m, &c.reduce(y.clone()), false);
        }
        out
    }
}

/// Wedge masks of μ symbols out of `size`, lexicographic on sorted index lists.
pub fn wedge_masks(size: usize, mu: usize) -> Vec<u32> {
    fn rec(start: usize, size: usize, left: usize, mask: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for j in start..size {
            if size - j >= left {
                rec(j + 1, size, left - 1, mask | (1 << j), out);
            }
        }
    }
    let mut out = Vec::new();
    if mu <= size {
        rec(0, size, mu, 0, &mut out);
    }
    out
}

/// dz_j ∧ dz_S = ±dz_{S∪j}; None when j ∈ S. The flag is true for the minus sign.
pub fn wedge_left(j: usize, mask: u32) -> Option<(u32, bool)> {
    if mask & (1 << j) != 0 {
        return None;
    }
    let below = (mask & ((1u32 << j) - 1)).count_ones();
    Some((mask | (1 << j), below % 2 == 1))
}

/// dz_S ∧ dz_j = ±dz_{S∪j}; None when j ∈ S.
pub fn wedge_right(mask: u32, j: usize) -> Option<(u32, bool)> {
    if mask & (1 << j) != 0 {
        return None;
    }
    let above = (mask >> (j + 1)).count_ones();
    Some((mask | (1 << j), above % 2 == 1))
}

/// Ordered generators of one term.
#[derive(Clone, Debug, Default)]
pub struct FormBasis {
    keys: Vec<FormKey>,
    index: HashMap<FormKey, usize>,
}

impl FormBasis {
    pub fn new(keys: Vec<FormKey>) -> Self {
        let index = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        FormBasis { keys, index }
    }

    pub fn keys(&self) -> &[FormKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn position(&self, key: &FormKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Sparse coordinates of x; fails when a term is not a generator.
    pub fn coordinates(&self, x: &FormElement) -> Result<Vec<(usize, Coefficient)>, DeRhamError> {
        let mut out = Vec::new();
        for ((k, mask), a) in x.terms() {
            for (e, c) in a.terms() {
                let key = (*k, e.clone(), *mask);
                let i = self.position(&key).ok_or_else(|| DeRhamError::OutsideBand(format!("{key:?}")))?;
                out.push((i, c.clone()));
            }
        }
        out.sort_by_key(|x| x.0);
        Ok(out)
    }

    pub fn dense(&self, x: &FormElement, c: &Carrier) -> Result<Vec<Coefficient>, DeRhamError> {
        let mut v = vec![c.ring().zero(); self.len()];
        for (i, a) in self.coordinates(x)? {
            v[i] = a;
        }
        Ok(v)
    }

    pub fn element(&self, v: &[Coefficient], c: &Carrier) -> FormElement {
        let mut out = FormElement::zero();
        for (i, a) in v.iter().enumerate() {
            if !a.is_zero() {
                let (k, e, m) = &self.keys[i];
                out.add_component(c, *k, *m, &c.monomial(e.clone(), a.clone()), false);
            }
        }
        out
    }
}

/// The truncation-free carrier with the same envelope, level and weight cutoff.
pub fn plain_carrier(c: &Carrier) -> Carrier {
    c.with_truncation(TruncationParams { m: 0.into(), n: 1, weight_cutoff: c.weight_cutoff() })
}

/// M ⊗ Ω* over one carrier, M free with generator weights and connection matrices Γ_j on
/// the chart directions (θ_j e_k = Σ_l Γ_j[l][k] e_l); the ξ directions carry plain derivatives.
#[derive(Clone, Debug)]
pub struct DeRhamComplex {
    carrier: Carrier,
    plain: Carrier,
    frame: Vec<String>,
    weights: Vec<u32>,
    gamma: Vec<Vec<Vec<CarrierElement>>>,
    graded: bool,
}

impl DeRhamComplex {
    /// The untwisted complex Ω* of the carrier.
    pub fn new(carrier: &Carrier) -> Self {
        Self::twisted(carrier, vec![0], &[], carrier).expect("rank one without connection")
    }

    /// `gamma` is indexed [direction][row][column] with entries in `from` (a lower level of the
    /// same envelope); an empty `gamma` means Γ = 0.
    pub fn twisted(
        carrier: &Carrier,
        weights: Vec<u32>,
        gamma: &[Vec<Vec<CarrierElement>>],
        from: &Carrier,
    ) -> Result<Self, DeRhamError> {
        let plain = plain_carrier(carrier);
        let (d, r) = (carrier.chart_arity(), weights.len());
        if !gamma.is_empty() && (gamma.len() != d || gamma.iter().any(|g| g.len() != r || g.iter().any(|row| row.len() != r))) {
            return Err(DeRhamError::Dimension(format!("need {d} connection matrices of size {r}×{r}")));
        }
        let gamma: Vec<Vec<Vec<CarrierElement>>> =
            gamma.iter().map(|g| g.iter().map(|row| row.iter().map(|y| plain.lift(from, y)).collect()).collect()).collect();
        let mut graded = carrier.is_graded();
        for g in &gamma {
            for (l, row) in g.iter().enumerate() {
                for (k, y) in row.iter().enumerate() {
                    graded &= y.terms().all(|(e, _)| plain.weight(e) + weights[l] + 1 == weights[k]);
                }
            }
        }
        let mut frame: Vec<String> = carrier.chart_names().iter().map(|n| format!("d{n}")).collect();
        frame.extend(carrier.xi_names().iter().map(|n| format!("d{n}")));
        Ok(DeRhamComplex { carrier: carrier.clone(), plain, frame, weights, gamma, graded })
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn plain(&self) -> &Carrier {
        &self.plain
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn frame(&self) -> &[String] {
        &self.frame
    }

    pub fn set_frame_names(&mut self, names: Vec<String>) {
        assert_eq!(names.len(), self.frame.len());
        self.frame = names;
    }

    pub fn frame_size(&self) -> usize {
        self.frame.len()
    }

    /// Whether every differential preserves total weight exactly.
    pub fn is_graded(&self) -> bool {
        self.graded
    }

    fn collect_keys(&self, mu: usize, band: WeightBand, killed: bool) -> Vec<FormKey> {
        let mut out = Vec::new();
        let mu32 = mu as u32;
        for mask in wedge_masks(self.frame_size(), mu) {
            for (k, &wk) in self.weights.iter().enumerate() {
                for w in band.weights() {
                    if w < mu32 + wk {
                        continue;
                    }
                    let exps = if killed { self.carrier.standard_monomials(w - mu32 - wk) } else { self.carrier.basis(w - mu32 - wk) };
                    out.extend(exps.into_iter().map(|e| (k, e, mask)));
                }
            }
        }
        out
    }

    /// Generators of degree μ in the band: wedge masks lexicographic, then module index, then exponent.
    pub fn keys(&self, mu: usize, band: WeightBand) -> Vec<FormKey> {
        self.collect_keys(mu, band, false)
    }

    pub fn generator(&self, key: &FormKey) -> FormElement {
        let mut out = FormElement::zero();
        out.add_component(&self.plain, key.0, key.2, &self.plain.monomial(key.1.clone(), self.plain.ring().one()), false);
        out
    }

    /// ∇ on representatives, without truncation.
    pub fn nabla_plain(&self, x: &FormElement) -> FormElement {
        let p = &self.plain;
        let d = p.chart_arity();
        let mut out = FormElement::zero();
        for ((k, mask), a) in x.terms() {
            for dir in 0..self.frame_size() {
                let Some((m2, neg)) = wedge_left(dir, *mask) else { continue };
                let da = if dir < d { p.partial_chart(dir, a) } else { p.partial_xi(dir - d, a) };
                out.add_component(p, *k, m2, &da, neg);
                if dir < d && !self.gamma.is_empty() {
                    for l in 0..self.rank() {
                        let g = &self.gamma[dir][l][*k];
                        if !g.is_zero() {
                            out.add_component(p, l, m2, &p.mul(a, g), neg);
                        }
                    }
                }
            }
        }
        out
    }

    /// ∇(m ⊗ ω) = Σ_j θ_j(m) ⊗ dz_j ∧ ω + m ⊗ dω, reduced in the truncated carrier.
    pub fn differential(&self, x: &FormElement) -> FormElement {
        self.nabla_plain(x).reduce(&self.carrier)
    }

    pub fn basis(&self, mu: usize, band: WeightBand) -> FormBasis {
        FormBasis::new(self.keys(mu, band))
    }

    /// Degree-μ term: generators modulo c·g (modulus c of g) and ∇(c′·g′) for g′ of degree μ−1.
    pub fn term(&self, mu: usize, band: WeightBand, basis: &FormBasis) -> Result<PresentedModule, DeRhamError> {
        let ring = self.carrier.ring();
        let mut rows: Vec<Vec<(usize, Coefficient)>> = Vec::new();
        for (i, key) in basis.keys().iter().enumerate() {
            if let Some(c) = self.carrier.relation_modulus(&key.1) {
                rows.push(vec![(i, ring.from_bigint(&c))]);
            }
        }
        if mu >= 1 {
            for key in self.collect_keys(mu - 1, band, true) {
                if let Some(c) = self.carrier.relation_modulus(&key.1) {
                    let x = self.generator(&key).scale(&self.plain, &ring.from_bigint(&c));
                    let row = basis.coordinates(&self.differential(&x))?;
                    if !row.is_empty() {
                        rows.push(row);
                    }
                }
            }
        }
        Ok(PresentedModule::new(basis.len(), IntMatrix::from_sparse_rows(ring, basis.len(), rows))?)
    }

    /// Matrix of ∇ from degree μ (columns) to μ+1 (rows).
    pub fn boundary(&self, src: &FormBasis, tgt: &FormBasis) -> Result<IntMatrix, DeRhamError> {
        let cols = src.keys().iter().map(|k| tgt.coordinates(&self.differential(&self.generator(k)))).collect::<Result<Vec<_>, _>>()?;
        Ok(IntMatrix::from_columns(self.carrier.ring(), tgt.len(), &cols))
    }

    /// The band as a complex in degrees 0..=top.
    pub fn slice_to(&self, band: WeightBand, top: usize) -> Result<FiniteComplex, DeRhamError> {
        if matches!(band, WeightBand::Exact(_)) && !self.graded {
            return Err(DeRhamError::NotGraded);
        }
        let top = top.min(self.frame_size());
        let bases: Vec<FormBasis> = (0..=top).map(|mu| self.basis(mu, band)).collect();
        let terms = bases.iter().enumerate().map(|(mu, b)| self.term(mu, band, b)).collect::<Result<Vec<_>, _>>()?;
        let bds = bases.windows(2).map(|w| self.boundary(&w[0], &w[1])).collect::<Result<Vec<_>, _>>()?;
        Ok(FiniteComplex::new(self.carrier.ring(), 0, terms, bds)?)
    }

    pub fn slice(&self, band: WeightBand) -> Result<FiniteComplex, DeRhamError> {
        self.slice_to(band, self.frame_size())
    }

    pub fn render(&self, x: &FormElement) -> String {
        if x.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = x
            .terms()
            .map(|((k, mask), a)| {
                let mut s = format!("({})", self.carrier.render(a));
                if self.rank() > 1 {
                    s.push_str(&format!("·e{}", k + 1));
                }
                let wedge: Vec<&str> = (0..self.frame_size()).filter(|j| mask & (1 << j) != 0).map(|j| self.frame[j].as_str()).collect();
                if !wedge.is_empty() {
                    s.push('·');
                    s.push_str(&wedge.join("∧"));
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
}

/// Ω* of the envelope at level 0, one weight band.
pub fn derham_complex(env: &EnvelopePresentation, band: WeightBand) -> Result<FiniteComplex, DeRhamError> {
    DeRhamComplex::new(&env.carrier).slice(band)
}

#[cfg(test)]
mod tests;
