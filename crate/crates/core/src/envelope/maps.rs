use std::collections::HashMap;
use std::sync::Mutex;

use crate::exactalg::Coefficient;

use super::carrier::{Carrier, CarrierElement};
use super::presentation::CosimplicialLevel;
use super::EnvelopeError;

/// Divided power algebra map between carriers, fixed by the images of chart and ξ variables.
/// Images of the T_i are f_i(chart images).
#[derive(Debug)]
pub struct CarrierMap {
    source: Carrier,
    target: Carrier,
    chart_images: Vec<CarrierElement>,
    pd_images: Vec<CarrierElement>,
    xi_images: Vec<CarrierElement>,
    cache: Mutex<HashMap<(usize, u32), CarrierElement>>,
}

impl Clone for CarrierMap {
    fn clone(&self) -> Self {
        CarrierMap {
            source: self.source.clone(),
            target: self.target.clone(),
            chart_images: self.chart_images.clone(),
            pd_images: self.pd_images.clone(),
            xi_images: self.xi_images.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl CarrierMap {
    pub fn new(
        source: &Carrier,
        target: &Carrier,
        chart_images: Vec<CarrierElement>,
        xi_images: Vec<CarrierElement>,
    ) -> Result<CarrierMap, EnvelopeError> {
        if chart_images.len() != source.chart_arity() || xi_images.len() != source.xi_arity() {
            return Err(EnvelopeError::NotPdMap("wrong number of generator images".into()));
        }
        if source.ring() != target.ring() {
            return Err(EnvelopeError::NotPdMap("different base rings".into()));
        }
        let pd_images: Vec<CarrierElement> = source.generators().iter().map(|f| target.eval_poly(f, &chart_images)).collect();
        for (i, y) in pd_images.iter().enumerate() {
            if !target.in_pd_ideal(y) {
                return Err(EnvelopeError::NotPdMap(format!("image of {} is not in the pd ideal", source.pd_names()[i])));
            }
        }
        for (k, y) in xi_images.iter().enumerate() {
            if !target.in_pd_ideal(y) {
                return Err(EnvelopeError::NotPdMap(format!("image of {} is not in the pd ideal", source.xi_names()[k])));
            }
        }
        let (ts, tt) = (source.truncation(), target.truncation());
        let ring = source.ring();
        if !(tt.n <= ts.n && ring.divisible_by(&ring.from_bigint(&ts.m), &tt.m)) && !source.same_envelope(target) {
            return Err(EnvelopeError::NotPdMap("source truncation does not factor through the target".into()));
        }
        Ok(CarrierMap {
            source: source.clone(),
            target: target.clone(),
            chart_images,
            pd_images,
            xi_images,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn source(&self) -> &Carrier {
        &self.source
    }

    pub fn target(&self) -> &Carrier {
        &self.target
    }

    pub fn chart_images(&self) -> &[CarrierElement] {
        &self.chart_images
    }

    pub fn xi_images(&self) -> &[CarrierElement] {
        &self.xi_images
    }

    /// Image of variable `v` (layout index) raised to its k-th power or divided power.
    fn factor(&self, v: usize, k: u32) -> CarrierElement {
        if let Some(y) = self.cache.lock().expect("map cache").get(&(v, k)) {
            return y.clone();
        }
        let (d, p) = (self.source.chart_arity(), self.source.pd_arity());
        let t = &self.target;
        let y = if v < d {
            if k == 0 { t.one() } else { t.mul(&self.factor(v, k - 1), &self.chart_images[v]) }
        } else {
            let img = if v < d + p { &self.pd_images[v - d] } else { &self.xi_images[v - d - p] };
            t.gamma(k, img).expect("images checked to lie in the pd ideal")
        };
        self.cache.lock().expect("map cache").insert((v, k), y.clone());
        y
    }

    pub fn apply_monomial(&self, e: &[u32], c: &Coefficient) -> CarrierElement {
        let t = &self.target;
        let mut out = t.constant(c.clone());
        for (v, &k) in e.iter().enumerate() {
            if k > 0 && !out.is_zero() {
                out = t.mul(&out, &self.factor(v, k));
            }
        }
        out
    }

    pub fn apply(&self, y: &CarrierElement) -> CarrierElement {
        let mut out = self.target.zero();
        for (e, c) in y.terms() {
            out = self.target.add(&out, &self.apply_monomial(e, c));
        }
        out
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &CarrierMap) -> Result<CarrierMap, EnvelopeError> {
        let chart = first.chart_images.iter().map(|y| self.apply(y)).collect();
        let xi = first.xi_images.iter().map(|y| self.apply(y)).collect();
        CarrierMap::new(&first.source, &self.target, chart, xi)
    }

    /// Equality on generators (hence as maps).
    pub fn same_as(&self, o: &CarrierMap) -> bool {
        self.chart_images == o.chart_images && self.xi_images == o.xi_images
    }
}

/// Map induced by a monotone slot map φ: x^{(s)} ↦ x^{(φ s)}; in ξ-coordinates
/// x ↦ x − ξ^{(φ0)} and ξ^{(s)} ↦ ξ^{(φs)} − ξ^{(φ0)}, with ξ^{(0)} = 0.
pub fn slot_map(source: &Carrier, target: &Carrier, phi: &[usize]) -> CarrierMap {
    let d = source.chart_arity();
    assert_eq!(phi.len(), source.level() + 1);
    let xi = |s: usize, j: usize| if s == 0 { target.zero() } else { target.xi_var(target.xi_index(s, j)) };
    let chart = (0..d).map(|j| target.sub(&target.chart_var(j), &xi(phi[0], j))).collect();
    let xis = source.xi_dictionary().into_iter().map(|(s, j)| target.sub(&xi(phi[s], j), &xi(phi[0], j))).collect();
    CarrierMap::new(source, target, chart, xis).expect("slot maps are pd maps")
}

fn std_coface(nu: usize, i: usize) -> Vec<usize> {
    (0..=nu).map(|s| if s < i { s } else { s + 1 }).collect()
}

fn std_codegeneracy(nu: usize, i: usize) -> Vec<usize> {
    (0..=nu + 1).map(|s| if s <= i { s } else { s - 1 }).collect()
}

/// The ν+2 cofaces D(ν) → D(ν+1); the i-th skips tensor slot ν+1−i, so at ν = 0 they are x ↦ x, x ↦ x − ξ.
pub fn coface_maps(src: &CosimplicialLevel, tgt: &CosimplicialLevel) -> Vec<CarrierMap> {
    assert_eq!(src.nu + 1, tgt.nu);
    (0..=src.nu + 1).map(|i| slot_map(&src.carrier, &tgt.carrier, &std_coface(src.nu, src.nu + 1 - i))).collect()
}

/// The ν+1 codegeneracies D(ν+1) → D(ν); the i-th merges slots ν−i and ν+1−i.
pub fn codegeneracy_maps(src: &CosimplicialLevel, tgt: &CosimplicialLevel) -> Vec<CarrierMap> {
    assert_eq!(src.nu, tgt.nu + 1);
    (0..=tgt.nu).map(|i| slot_map(&src.carrier, &tgt.carrier, &std_codegeneracy(tgt.nu, tgt.nu - i))).collect()
}

/// Σ_i (−1)^i coface_i(y).
pub fn alternating_coface_sum(cofaces: &[CarrierMap], y: &CarrierElement) -> CarrierElement {
    let t = cofaces[0].target();
    let mut out = t.zero();
    for (i, c) in cofaces.iter().enumerate() {
        let img = c.apply(y);
        out = if i % 2 == 0 { t.add(&out, &img) } else { t.sub(&out, &img) };
    }
    out
}
