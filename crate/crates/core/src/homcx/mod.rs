//! Bounded cochain complexes of finitely presented modules over the base ring.
//!
//! Sign conventions live here only. The cone of f: C → D has cone^k = C^{k+1} ⊕ D^k with
//! differential [[−d_C, 0], [−f, d_D]].

use thiserror::Error;

use crate::exactalg::{kernel, module_from_relations, solve_linear, BaseDpRing, Coefficient, ExactAlgError, IntMatrix, ModuleDescription};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("d∘d ≠ 0 modulo relations at degree {0}")]
    NotAComplex(i64),
    #[error("boundary at degree {0} does not respect relations")]
    IllDefined(i64),
    #[error("map does not commute with boundaries at degree {0}")]
    NotAChainMap(i64),
    #[error(transparent)]
    Ring(#[from] ExactAlgError),
}

/// A^gens modulo the row span of `rels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentedModule {
    pub gens: usize,
    pub rels: IntMatrix,
}

impl PresentedModule {
    pub fn free(ring: &BaseDpRing, gens: usize) -> Self {
        PresentedModule { gens, rels: IntMatrix::zeros(ring, 0, gens) }
    }

    pub fn new(gens: usize, rels: IntMatrix) -> Result<Self, HomError> {
        if rels.cols() != gens {
            return Err(HomError::DimensionMismatch(format!("relations have {} columns for {gens} generators", rels.cols())));
        }
        Ok(PresentedModule { gens, rels })
    }

    pub fn describe(&self) -> Result<ModuleDescription, HomError> {
        Ok(module_from_relations(self.gens, &self.rels)?)
    }

    /// True iff v is zero in the module.
    pub fn is_zero_vector(&self, v: &[Coefficient]) -> Result<bool, HomError> {
        if v.iter().all(|c| c.is_zero()) {
            return Ok(true);
        }
        Ok(solve_linear(&self.rels.transpose(), v)?.is_some())
    }
}

/// C^start → C^{start+1} → ⋯; `boundaries[k]` maps terms[k] to terms[k+1] acting on columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteComplex {
    pub ring: BaseDpRing,
    pub start: i64,
    pub terms: Vec<PresentedModule>,
    pub boundaries: Vec<IntMatrix>,
}

/// Degreewise matrices f^k: C^k → D^k on columns, for k in the source range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexMap {
    pub source: FiniteComplex,
    pub target: FiniteComplex,
    pub components: Vec<IntMatrix>,
}

impl FiniteComplex {
    pub fn new(ring: &BaseDpRing, start: i64, terms: Vec<PresentedModule>, boundaries: Vec<IntMatrix>) -> Result<Self, HomError> {
        if boundaries.len() + 1 != terms.len().max(1) && !(terms.is_empty() && boundaries.is_empty()) {
            return Err(HomError::DimensionMismatch("need one boundary between each pair of terms".into()));
        }
        for (k, d) in boundaries.iter().enumerate() {
            if d.cols() != terms[k].gens || d.rows() != terms[k + 1].gens {
                return Err(HomError::DimensionMismatch(format!("boundary at degree {}", start + k as i64)));
            }
        }
        Ok(FiniteComplex { ring: ring.clone(), start, terms, boundaries })
    }

    pub fn zero(ring: &BaseDpRing) -> Self {
        FiniteComplex { ring: ring.clone(), start: 0, terms: vec![], boundaries: vec![] }
    }

    pub fn end(&self) -> i64 {
        self.start + self.terms.len() as i64
    }

    fn idx(&self, i: i64) -> Option<usize> {
        (i >= self.start && i < self.end()).then(|| (i - self.start) as usize)
    }

    pub fn term(&self, i: i64) -> PresentedModule {
        match self.idx(i) {
            Some(k) => self.terms[k].clone(),
            None => PresentedModule::free(&self.ring, 0),
        }
    }

    pub fn gens(&self, i: i64) -> usize {
        self.idx(i).map_or(0, |k| self.terms[k].gens)
    }

    /// d^i: C^i → C^{i+1}.
    pub fn boundary(&self, i: i64) -> IntMatrix {
        match (self.idx(i), self.idx(i + 1)) {
            (Some(k), Some(_)) => self.boundaries[k].clone(),
            _ => IntMatrix::zeros(&self.ring, self.gens(i + 1), self.gens(i)),
        }
    }

    /// Whether every column of `m` vanishes in the module C^i.
    fn columns_vanish(&self, i: i64, m: &IntMatrix) -> Result<bool, HomError> {
        let t = self.term(i);
        let mt = m.transpose();
        for r in 0..mt.rows() {
            let v: Vec<Coefficient> = (0..mt.cols()).map(|j| mt.get(r, j)).collect();
            if !t.is_zero_vector(&v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// d∘d = 0 modulo relations in every degree.
    pub fn check_complex(&self) -> Result<bool, HomError> {
        for i in self.start..self.end() - 1 {
            let dd = self.boundary(i + 1).mul(&self.boundary(i))?;
            if !self.columns_vanish(i + 2, &dd)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Each boundary maps relations to relations.
    pub fn check_well_defined(&self) -> Result<bool, HomError> {
        for i in self.start..self.end() {
            let img = self.boundary(i).mul(&self.term(i).rels.transpose())?;
            if !self.columns_vanish(i + 1, &img)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Generators (columns) of Z^i = {x : d x ∈ Rel_{i+1}}.
    pub fn cycles(&self, i: i64) -> Result<IntMatrix, HomError> {
        let g = self.gens(i);
        let d = self.boundary(i);
        let rel = self.term(i + 1).rels.transpose();
        let k = kernel(&d.hstack(&rel)?);
        Ok(k.select_rows(&(0..g).collect::<Vec<_>>()))
    }

    /// Columns spanning B^i + Rel_i.
    pub fn boundaries_and_relations(&self, i: i64) -> Result<IntMatrix, HomError> {
        Ok(self.boundary(i - 1).hstack(&self.term(i).rels.transpose())?)
    }

    /// Whether v ∈ B^i + Rel_i.
    pub fn is_boundary(&self, i: i64, v: &[Coefficient]) -> Result<bool, HomError> {
        if v.iter().all(|c| c.is_zero()) {
            return Ok(true);
        }
        Ok(solve_linear(&self.boundaries_and_relations(i)?, v)?.is_some())
    }

    /// H^i as an invariant-factor description.
    pub fn homology(&self, i: i64) -> Result<ModuleDescription, HomError> {
        let z = self.cycles(i)?;
        let s = z.cols();
        if s == 0 {
            return Ok(ModuleDescription::zero());
        }
        let big = z.hstack(&self.boundaries_and_relations(i)?)?;
        let l = kernel(&big).select_rows(&(0..s).collect::<Vec<_>>());
        Ok(module_from_relations(s, &l.transpose())?)
    }

    /// Homology in every degree of the complex.
    pub fn all_homology(&self) -> Result<Vec<(i64, ModuleDescription)>, HomError> {
        (self.start..self.end()).map(|i| Ok((i, self.homology(i)?))).collect()
    }
}

impl ComplexMap {
    pub fn new(source: FiniteComplex, target: FiniteComplex, components: Vec<IntMatrix>) -> Result<Self, HomError> {
        if components.len() != source.terms.len() {
            return Err(HomError::DimensionMismatch("one component per source degree".into()));
        }
        for (k, f) in components.iter().enumerate() {
            let i = source.start + k as i64;
            if f.cols() != source.gens(i) || f.rows() != target.gens(i) {
                return Err(HomError::DimensionMismatch(format!("component at degree {i}")));
            }
        }
        Ok(ComplexMap { source, target, components })
    }

    pub fn component(&self, i: i64) -> IntMatrix {
        match self.source.idx(i) {
            Some(k) => self.components[k].clone(),
            None => IntMatrix::zeros(&self.source.ring, self.target.gens(i), self.source.gens(i)),
        }
    }

    pub fn identity(c: &FiniteComplex) -> Self {
        let comps = c.terms.iter().map(|t| IntMatrix::identity(&c.ring, t.gens)).collect();
        ComplexMap { source: c.clone(), target: c.clone(), components: comps }
    }

    /// f d = d f modulo target relations.
    pub fn check_chain_map(&self) -> Result<bool, HomError> {
        let lo = self.source.start.min(self.target.start);
        let hi = self.source.end().max(self.target.end());
        for i in lo..hi {
            let a = self.component(i + 1).mul(&self.source.boundary(i))?;
            let b = self.target.boundary(i).mul(&self.component(i))?;
            if !self.target.columns_vanish(i + 1, &a.sub(&b)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// cone^k = C^{k+1} ⊕ D^k, differential [[−d_C, 0], [−f, d_D]].
pub fn mapping_cone(f: &ComplexMap) -> Result<FiniteComplex, HomError> {
    let (src, tgt) = (&f.source, &f.target);
    let ring = &src.ring;
    let lo = (src.start - 1).min(tgt.start);
    let hi = (src.end() - 1).max(tgt.end());
    let minus = ring.from_i64(-1);
    let mut terms = Vec::new();
    for k in lo..hi {
        let (a, b) = (src.term(k + 1), tgt.term(k));
        let rels = block_diag(ring, &a.rels, &b.rels)?;
        terms.push(PresentedModule::new(a.gens + b.gens, rels)?);
    }
    let mut bds = Vec::new();
    for k in lo..hi - 1 {
        let top = src.boundary(k + 1).scale(&minus).hstack(&IntMatrix::zeros(ring, src.gens(k + 2), tgt.gens(k)))?;
        let bottom = f.component(k + 1).scale(&minus).hstack(&tgt.boundary(k))?;
        bds.push(top.vstack(&bottom)?);
    }
    FiniteComplex::new(ring, lo, terms, bds)
}

fn block_diag(ring: &BaseDpRing, a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix, HomError> {
    let top = a.hstack(&IntMatrix::zeros(ring, a.rows(), b.cols()))?;
    let bottom = IntMatrix::zeros(ring, b.rows(), a.cols()).hstack(b)?;
    Ok(top.vstack(&bottom)?)
}

/// True iff H^k(cone f) = 0 for k ∈ [lo − 1, hi], i.e. H^k(f) is bijective for k ∈ [lo, hi].
pub fn is_quasi_iso(f: &ComplexMap, lo: i64, hi: i64) -> Result<bool, HomError> {
    let c = mapping_cone(f)?;
    for k in lo - 1..=hi {
        if !c.homology(k)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
