//! Crystals as towers of free modules over truncated envelopes with an integrable connection:
//! θ-operators, integrability and pd quasi-nilpotence checks, evaluation on pd thickenings and
//! the transition isomorphisms c_{f,g}(m⊗1) = Σ_K g(θ^K m)·b^{[K]}, b = f(x) − g(x).
//!
//! Level n of the tower is D_n = D / n!·I^{[n]}. Only free modules are supported.

mod bound;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::derham::{plain_carrier, DeRhamComplex, DeRhamError};
use crate::envelope::{Carrier, CarrierElement, CarrierMap, EnvelopeError, EnvelopePresentation};
use crate::exactalg::{factorial, ModulusEffect, PdStructure};
use crate::pdpoly::TruncationParams;

pub use bound::{check_nilpotence_bound, pd_nilpotence_bound, BoundCheck};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrystalError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a divided power map: {0}")]
    NotPdMap(String),
    #[error("torsion condition fails: {0}")]
    Torsion(String),
    #[error("quasi-nilpotence not verified: {0}")]
    NotVerified(String),
    #[error("connection is not integrable")]
    NotIntegrable,
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    DeRham(#[from] DeRhamError),
}

/// Coefficients on e_1..e_r.
pub type ModuleVector = Vec<CarrierElement>;

/// Square matrix over a carrier, indexed [row][column]; column k is the image of e_k.
pub type CarrierMatrix = Vec<Vec<CarrierElement>>;

/// A free module M on e_1..e_r over the envelope with θ_j e_k = ∂_j e_k + Σ_l Γ_j[l][k] e_l,
/// stored once on representatives and read at every level n ≤ n_max.
#[derive(Clone, Debug)]
pub struct ConnectionData {
    env: EnvelopePresentation,
    n_max: u32,
    weights: Vec<u32>,
    gamma: Vec<CarrierMatrix>,
    plain: Carrier,
}

impl ConnectionData {
    /// The structure crystal: rank one, Γ = 0.
    pub fn structure(env: &EnvelopePresentation, n_max: u32) -> Self {
        let plain = plain_carrier(&env.carrier);
        let d = env.carrier.chart_arity();
        ConnectionData { env: env.clone(), n_max, weights: vec![0], gamma: vec![vec![vec![plain.zero()]]; d], plain }
    }

    /// `gamma[j][l][k]` over the envelope; `weights` are the generator weights.
    pub fn new(env: &EnvelopePresentation, n_max: u32, weights: Vec<u32>, gamma: Vec<CarrierMatrix>) -> Result<Self, CrystalError> {
        let plain = plain_carrier(&env.carrier);
        let (d, r) = (env.carrier.chart_arity(), weights.len());
        if r == 0 {
            return Err(CrystalError::Dimension("rank must be positive".into()));
        }
        if gamma.len() != d {
            return Err(CrystalError::Dimension(format!("expected {d} connection matrices, got {}", gamma.len())));
        }
        for (j, g) in gamma.iter().enumerate() {
            if g.len() != r || g.iter().any(|row| row.len() != r) {
                return Err(CrystalError::Dimension(format!("connection matrix {} is not {r}×{r}", j + 1)));
            }
        }
        if n_max == 0 {
            return Err(CrystalError::Dimension("n_max must be at least 1".into()));
        }
        let gamma = gamma.into_iter().map(|g| g.into_iter().map(|row| row.into_iter().map(|y| plain.reduce(y)).collect()).collect()).collect();
        Ok(ConnectionData { env: env.clone(), n_max, weights, gamma, plain })
    }

    /// Entries in the carrier syntax of the envelope.
    pub fn parse(env: &EnvelopePresentation, n_max: u32, weights: Vec<u32>, matrices: &[Vec<Vec<String>>]) -> Result<Self, CrystalError> {
        let plain = plain_carrier(&env.carrier);
        let gamma = matrices
            .iter()
            .map(|g| g.iter().map(|row| row.iter().map(|s| plain.parse(s, 0)).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(env, n_max, weights, gamma)
    }

    pub fn env(&self) -> &EnvelopePresentation {
        &self.env
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn gamma(&self) -> &[CarrierMatrix] {
        &self.gamma
    }

    /// The envelope without truncation, where Γ lives.
    pub fn plain(&self) -> &Carrier {
        &self.plain
    }

    pub fn chart_arity(&self) -> usize {
        self.env.carrier.chart_arity()
    }

    pub fn is_structure(&self) -> bool {
        self.rank() == 1 && self.gamma.iter().all(|g| g[0][0].is_zero())
    }

    /// Every Γ_j[l][k] is homogeneous of weight w_k − w_l − 1 over a graded envelope.
    pub fn is_graded(&self) -> bool {
        self.env.carrier.is_graded()
            && self.gamma.iter().all(|g| {
                g.iter().enumerate().all(|(l, row)| {
                    row.iter().enumerate().all(|(k, y)| y.terms().all(|(e, _)| self.plain.weight(e) + self.weights[l] + 1 == self.weights[k]))
                })
            })
    }

    pub fn level_truncation(&self, n: u32, cutoff: Option<u32>) -> TruncationParams {
        TruncationParams { m: factorial(n as u64), n, weight_cutoff: cutoff }
    }

    /// D_n at fiber level 0.
    pub fn level_carrier(&self, n: u32, cutoff: Option<u32>) -> Carrier {
        self.env.carrier.with_truncation(self.level_truncation(n, cutoff))
    }

    pub fn theta(&self, j: usize) -> ThetaOperator {
        ThetaOperator { direction: j, gamma: self.gamma[j].clone(), source: self.plain.clone() }
    }

    /// M ⊗ Ω* over `carrier` (any level of the same envelope).
    pub fn derham(&self, carrier: &Carrier) -> Result<DeRhamComplex, CrystalError> {
        let gamma = if self.is_structure() { vec![] } else { self.gamma.clone() };
        Ok(DeRhamComplex::twisted(carrier, self.weights.clone(), &gamma, &self.plain)?)
    }

    /// e_k as a module vector over `c`.
    pub fn generator(&self, c: &Carrier, k: usize) -> ModuleVector {
        (0..self.rank()).map(|l| if l == k { c.one() } else { c.zero() }).collect()
    }

    /// θ^K e_k for all k, on representatives over `c` (a plain carrier of the same envelope).
    pub fn theta_power(&self, c: &Carrier, big_k: &[u32], memo: &mut BTreeMap<Vec<u32>, Vec<ModuleVector>>) -> Vec<ModuleVector> {
        if let Some(v) = memo.get(big_k) {
            return v.clone();
        }
        let out: Vec<ModuleVector> = match big_k.iter().position(|&a| a > 0) {
            None => (0..self.rank()).map(|k| self.generator(c, k)).collect(),
            Some(j) => {
                let mut prev = big_k.to_vec();
                prev[j] -= 1;
                let th = self.theta(j);
                self.theta_power(c, &prev, memo).iter().map(|v| th.apply(c, v)).collect()
            }
        };
        memo.insert(big_k.to_vec(), out.clone());
        out
    }
}

/// θ_j = ∂_j + Γ_j on module vectors over any level of the envelope.
#[derive(Clone, Debug)]
pub struct ThetaOperator {
    direction: usize,
    gamma: CarrierMatrix,
    source: Carrier,
}

impl ThetaOperator {
    pub fn direction(&self) -> usize {
        self.direction
    }

    pub fn apply(&self, c: &Carrier, v: &[CarrierElement]) -> ModuleVector {
        let r = v.len();
        (0..r)
            .map(|l| {
                let mut acc = c.partial_chart(self.direction, &v[l]);
                for (k, vk) in v.iter().enumerate() {
                    let g = &self.gamma[l][k];
                    if !g.is_zero() && !vk.is_zero() {
                        acc = c.add(&acc, &c.mul(&c.lift(&self.source, g), vk));
                    }
                }
                acc
            })
            .collect()
    }
}

/// [θ_i, θ_j] e_k = 0 for all i < j and k through weight w, at every level n ≤ n_max.
pub fn check_integrable(c: &ConnectionData, w: u32) -> bool {
    let d = c.chart_arity();
    let p = plain_carrier(&c.env.carrier.with_truncation(TruncationParams { m: 0.into(), n: 1, weight_cutoff: Some(w) }));
    for i in 0..d {
        for j in i + 1..d {
            let (ti, tj) = (c.theta(i), c.theta(j));
            for k in 0..c.rank() {
                let e = c.generator(&p, k);
                let a = ti.apply(&p, &tj.apply(&p, &e));
                let b = tj.apply(&p, &ti.apply(&p, &e));
                for n in 1..=c.n_max {
                    let level = c.level_carrier(n, Some(w));
                    if a.iter().zip(&b).any(|(x, y)| !level.reduce(p.sub(x, y)).is_zero()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Outcome of the semi-decision for pd quasi-nilpotence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QuasiNilpotence {
    /// Per level n, the least k ≥ 1 that works for every tested element and direction.
    Verified { witnesses: Vec<(u32, u32)> },
    /// Inconclusive: no k ≤ k_max worked for this element; not a disproof.
    NotWithinBound { level: u32, direction: usize, element: String, k_max: u32 },
}

impl QuasiNilpotence {
    pub fn is_verified(&self) -> bool {
        matches!(self, QuasiNilpotence::Verified { .. })
    }

    pub fn witness(&self, level: u32) -> Option<u32> {
        match self {
            QuasiNilpotence::Verified { witnesses } => witnesses.iter().find(|(n, _)| *n == level).map(|x| x.1),
            QuasiNilpotence::NotWithinBound { .. } => None,
        }
    }

    pub fn max_witness(&self) -> Option<u32> {
        match self {
            QuasiNilpotence::Verified { witnesses } => witnesses.iter().map(|x| x.1).max(),
            QuasiNilpotence::NotWithinBound { .. } => None,
        }
    }
}

/// Whether v ∈ f·M_n, tested on the canonical representative coefficientwise.
fn divisible(level: &Carrier, v: &[CarrierElement], f: &BigInt) -> bool {
    let ring = level.ring();
    v.iter().all(|y| {
        level.reduce(y.clone()).terms().all(|(e, c)| {
            let g = match level.relation_modulus(e) {
                None => f.clone(),
                Some(m) => f.gcd(&m),
            };
            ring.divisible_by(c, &g)
        })
    })
}

/// For each level n ≤ n_max, element x^α·e_k through weight w and direction j, finds the least
/// k ≥ 1 with θ_j^k(x^α e_k) ∈ n!·M_n.
pub fn check_pd_quasinilpotent(c: &ConnectionData, k_max: u32, w: u32) -> QuasiNilpotence {
    let d = c.chart_arity();
    let p = c.env.carrier.with_truncation(TruncationParams { m: 0.into(), n: 1, weight_cutoff: Some(w) });
    let mut witnesses = Vec::new();
    // the top level is the strongest condition, so failures are reported there first
    for n in (1..=c.n_max).rev() {
        let level = c.level_carrier(n, Some(w));
        let f = factorial(n as u64);
        let mut best = 1;
        for k in 0..c.rank() {
            if c.weights[k] > w {
                continue;
            }
            for e in level.basis_upto(w - c.weights[k]) {
                for j in 0..d {
                    let th = c.theta(j);
                    let mut v: ModuleVector = (0..c.rank()).map(|l| if l == k { p.monomial(e.clone(), p.ring().one()) } else { p.zero() }).collect();
                    let mut found = None;
                    for it in 1..=k_max {
                        v = th.apply(&p, &v);
                        if divisible(&level, &v, &f) {
                            found = Some(it);
                            break;
                        }
                    }
                    match found {
                        Some(it) => best = best.max(it),
                        None => {
                            let mut elem = level.render(&level.monomial(e.clone(), level.ring().one()));
                            if c.rank() > 1 {
                                elem = format!("({elem})·e{}", k + 1);
                            }
                            return QuasiNilpotence::NotWithinBound { level: n, direction: j, element: elem, k_max };
                        }
                    }
                }
            }
        }
        witnesses.push((n, best));
    }
    witnesses.reverse();
    QuasiNilpotence::Verified { witnesses }
}

/// A pd thickening (B, I, γ) with m·I^{[n]} = 0, B a truncated envelope carrier and I its pd ideal.
#[derive(Clone, Debug)]
pub struct PdThickening {
    carrier: Carrier,
    m: BigInt,
    n: u32,
}

impl PdThickening {
    /// Verifies m·I^{[n]} = 0 against the carrier's moduli.
    pub fn new(carrier: &Carrier, m: BigInt, n: u32) -> Result<Self, CrystalError> {
        let ring = carrier.ring();
        let top = n.max(carrier.truncation().n);
        for h in 0..=top {
            let need = if h >= n {
                Some(m.clone())
            } else if carrier.is_annotated() {
                match (ring.pd(), ring.min_valuation_gamma_p_from((n - h) as u64)) {
                    (PdStructure::StandardP { p, .. }, Some(v)) => Some(&m * BigInt::from(*p).pow(v)),
                    _ => None,
                }
            } else {
                None
            };
            if let Some(x) = need {
                let ok = match carrier.effect(h) {
                    ModulusEffect::Kill => true,
                    ModulusEffect::Reduce(g) => (&x % g) == BigInt::from(0),
                    ModulusEffect::Free => ring.is_zero(&ring.from_bigint(&x)),
                };
                if !ok {
                    return Err(CrystalError::Torsion(format!("{m}·I^[{n}] ≠ 0 at pd weight {h}")));
                }
            }
        }
        Ok(PdThickening { carrier: carrier.clone(), m, n })
    }

    /// The thickening given by the carrier's own truncation.
    pub fn from_carrier(carrier: &Carrier) -> Result<Self, CrystalError> {
        let t = carrier.truncation();
        Self::new(carrier, t.m.clone(), t.n)
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn torsion(&self) -> (&BigInt, u32) {
        (&self.m, self.n)
    }
}

/// M_N ⊗_{D_N, f} B: free on the images of e_1..e_r.
#[derive(Clone, Debug)]
pub struct CrystalValue {
    pub carrier: Carrier,
    pub rank: usize,
    pub weights: Vec<u32>,
    pub level: u32,
}

fn check_map(c: &ConnectionData, f: &CarrierMap, b: &PdThickening) -> Result<u32, CrystalError> {
    let src = f.source();
    if src.level() != 0 || src.chart_arity() != c.chart_arity() || src.generators() != c.env.carrier.generators() {
        return Err(CrystalError::NotPdMap("source is not a level of the crystal's envelope".into()));
    }
    if *f.target() != b.carrier {
        return Err(CrystalError::NotPdMap("target is not the thickening".into()));
    }
    let n = src.truncation().n;
    if n > c.n_max {
        return Err(CrystalError::NotPdMap(format!("source level {n} exceeds n_max = {}", c.n_max)));
    }
    Ok(n)
}

pub fn crystal_evaluate(c: &ConnectionData, f: &CarrierMap, b: &PdThickening) -> Result<CrystalValue, CrystalError> {
    let level = check_map(c, f, b)?;
    Ok(CrystalValue { carrier: b.carrier.clone(), rank: c.rank(), weights: c.weights.clone(), level })
}

/// c_{f,g}(v⊗1) = Σ_K g(θ^K v)·b^{[K]} with b_j = f(x_j) − g(x_j); `v` is given on
/// representatives over the plain carrier of the source.
pub fn transition_apply(
    c: &ConnectionData,
    qn: &QuasiNilpotence,
    f: &CarrierMap,
    g: &CarrierMap,
    b: &PdThickening,
    v: &[CarrierElement],
) -> Result<ModuleVector, CrystalError> {
    let n = check_map(c, f, b)?;
    if check_map(c, g, b)? != n || f.source() != g.source() {
        return Err(CrystalError::NotPdMap("f and g have different sources".into()));
    }
    if v.len() != c.rank() {
        return Err(CrystalError::Dimension(format!("module vector of length {}, rank {}", v.len(), c.rank())));
    }
    let kstar = qn.witness(n).ok_or_else(|| CrystalError::NotVerified(format!("no quasi-nilpotence certificate at level {n}")))?;
    let d = c.chart_arity();
    let bc = &b.carrier;
    let diffs: Vec<CarrierElement> = (0..d).map(|j| bc.sub(&f.chart_images()[j], &g.chart_images()[j])).collect();
    if diffs.iter().any(|y| !bc.in_pd_ideal(y)) {
        return Err(CrystalError::NotPdMap("f − g does not land in the pd ideal".into()));
    }
    // terms with |K| ≥ max(N, d(k*−1)+1) are N!-divisible and land in N!·I^{[N]} = 0
    let s_max = (n as usize).max(d * (kstar as usize - 1) + 1) - 1;
    let mut bpow: Vec<Vec<CarrierElement>> = Vec::with_capacity(d);
    for y in &diffs {
        let mut pw = Vec::with_capacity(s_max + 1);
        for a in 0..=s_max {
            pw.push(bc.gamma(a as u32, y)?);
        }
        bpow.push(pw);
    }
    let p = plain_carrier(f.source());
    let mut cur: Vec<(Vec<u32>, ModuleVector)> = vec![(vec![0; d], v.iter().map(|y| p.lift(&c.plain, y)).collect())];
    let mut out: ModuleVector = vec![bc.zero(); c.rank()];
    for s in 0..=s_max {
        for (big_k, th) in &cur {
            let mut bk = bc.one();
            for (j, &a) in big_k.iter().enumerate() {
                bk = bc.mul(&bk, &bpow[j][a as usize]);
            }
            if bk.is_zero() {
                continue;
            }
            for (l, y) in th.iter().enumerate() {
                if !y.is_zero() {
                    out[l] = bc.add(&out[l], &bc.mul(&g.apply(y), &bk));
                }
            }
        }
        if s == s_max {
            break;
        }
        // next layer: raise the last nonzero direction or any later one, so each K appears once
        let mut next = Vec::new();
        for (big_k, th) in &cur {
            let from = big_k.iter().rposition(|&a| a > 0).unwrap_or(0);
            for j in from..d {
                let mut k2 = big_k.clone();
                k2[j] += 1;
                next.push((k2, c.theta(j).apply(&p, th)));
            }
        }
        cur = next;
    }
    Ok(out)
}

/// Matrix of c_{f,g}: f^*M → g^*M over B, column k the image of e_k.
pub fn transition_iso(c: &ConnectionData, qn: &QuasiNilpotence, f: &CarrierMap, g: &CarrierMap, b: &PdThickening) -> Result<CarrierMatrix, CrystalError> {
    let r = c.rank();
    let mut out = vec![vec![b.carrier.zero(); r]; r];
    for k in 0..r {
        let col = transition_apply(c, qn, f, g, b, &c.generator(&c.plain, k))?;
        for (l, y) in col.into_iter().enumerate() {
            out[l][k] = y;
        }
    }
    Ok(out)
}

pub fn matrix_mul(c: &Carrier, a: &CarrierMatrix, b: &CarrierMatrix) -> CarrierMatrix {
    let r = a.len();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let mut acc = c.zero();
                    for (k, bk) in b.iter().enumerate() {
                        acc = c.add(&acc, &c.mul(&a[i][k], &bk[j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn identity_matrix(c: &Carrier, r: usize) -> CarrierMatrix {
    (0..r).map(|i| (0..r).map(|j| if i == j { c.one() } else { c.zero() }).collect()).collect()
}

/// c_{g,h} ∘ c_{f,g} = c_{f,h}.
pub fn cocycle_check(
    c: &ConnectionData,
    qn: &QuasiNilpotence,
    f: &CarrierMap,
    g: &CarrierMap,
    h: &CarrierMap,
    b: &PdThickening,
) -> Result<bool, CrystalError> {
    let fg = transition_iso(c, qn, f, g, b)?;
    let gh = transition_iso(c, qn, g, h, b)?;
    let fh = transition_iso(c, qn, f, h, b)?;
    Ok(matrix_mul(&b.carrier, &gh, &fg) == fh)
}

/// c_{g,f} ∘ c_{f,g} = id and c_{f,g} ∘ c_{g,f} = id.
pub fn inverse_check(c: &ConnectionData, qn: &QuasiNilpotence, f: &CarrierMap, g: &CarrierMap, b: &PdThickening) -> Result<bool, CrystalError> {
    let fg = transition_iso(c, qn, f, g, b)?;
    let gf = transition_iso(c, qn, g, f, b)?;
    let id = identity_matrix(&b.carrier, c.rank());
    Ok(matrix_mul(&b.carrier, &gf, &fg) == id && matrix_mul(&b.carrier, &fg, &gf) == id)
}

#[cfg(test)]
mod tests;
