use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::exactalg::{solve_linear, BaseDpRing, IntMatrix, PdStructure};
use crate::pdpoly::TruncationParams;

use super::carrier::Carrier;
use super::poly::Poly;
use super::EnvelopeError;

/// R = P/J with P = A[chart] and J = (ideal_gens).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraPresentation {
    pub base: BaseDpRing,
    pub chart: Vec<String>,
    /// Optional second generating set of J, checked against `ideal_gens`.
    pub relations: Option<Vec<Poly>>,
    pub ideal_gens: Vec<Poly>,
    /// Declared weights of the f_i; each must equal the degree of a homogeneous f_i.
    pub declared_weights: Vec<Option<u32>>,
    /// Names of the pd variables T_i (defaults t or t1..te).
    pub pd_names: Option<Vec<String>>,
}

impl AlgebraPresentation {
    pub fn new(base: BaseDpRing, chart: Vec<String>, ideal_gens: Vec<Poly>) -> Self {
        let n = ideal_gens.len();
        AlgebraPresentation { base, chart, relations: None, ideal_gens, declared_weights: vec![None; n], pd_names: None }
    }

    /// Parses generators given as expressions in the chart variables.
    pub fn parse(base: BaseDpRing, chart: &[&str], gens: &[&str]) -> Result<Self, EnvelopeError> {
        let chart: Vec<String> = chart.iter().map(|s| s.to_string()).collect();
        let polys = gens.iter().map(|g| Poly::parse(g, &base, &chart, 0)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(base, chart, polys))
    }
}

/// D^{m,n}_{P,η}(J) presented as a truncated pd algebra with T_i ↦ f_i.
#[derive(Clone, Debug)]
pub struct EnvelopePresentation {
    pub source: AlgebraPresentation,
    pub trunc: TruncationParams,
    pub carrier: Carrier,
    /// Set for J = (p) under the standard structure: the envelope is P itself.
    pub annotation: Option<String>,
    /// df_i as coefficient lists over dx_1..dx_d.
    pub differentials: Vec<Vec<Poly>>,
    /// How the J/J² basis hypothesis was established.
    pub basis_check: String,
}

impl EnvelopePresentation {
    pub fn is_graded(&self) -> bool {
        self.carrier.is_graded()
    }

    /// Human-readable presentation: generators, relations, weights.
    pub fn dump(&self) -> String {
        let c = &self.carrier;
        let mut s = String::new();
        let _ = writeln!(s, "base: {}", c.ring());
        let _ = writeln!(s, "chart: {}", c.chart_names().join(", "));
        for (i, f) in c.generators().iter().enumerate() {
            let _ = writeln!(s, "pd variable {} ↦ {} (weight {})", c.pd_names()[i], f.render(c.chart_names()), c.pd_weights()[i]);
        }
        if let Some(a) = &self.annotation {
            let _ = writeln!(s, "annotation: {a}");
        }
        let _ = writeln!(s, "truncation: m = {}, n = {}, weight cutoff = {:?}", self.trunc.m, self.trunc.n, self.trunc.weight_cutoff);
        let _ = writeln!(s, "grading: {}", if c.is_graded() { "exact" } else { "filtered" });
        let _ = writeln!(s, "basis hypothesis: {}", self.basis_check);
        s
    }
}

/// Level ν of the cosimplicial envelope: D(ν)_n = D_n⟨ξ_{s,j}⟩ truncated.
#[derive(Clone, Debug)]
pub struct CosimplicialLevel {
    pub nu: usize,
    pub carrier: Carrier,
    /// ξ index ↦ (tensor slot s ≥ 1, chart variable j).
    pub dictionary: Vec<(usize, usize)>,
}

fn default_pd_names(e: usize) -> Vec<String> {
    if e == 1 {
        vec!["t".into()]
    } else {
        (1..=e).map(|i| format!("t{i}")).collect()
    }
}

/// The constant p·unit, when `f` is one.
fn is_p_times_unit(f: &Poly, base: &BaseDpRing, p: u64) -> bool {
    if f.degree() != Some(0) {
        return false;
    }
    let c = f.terms().next().expect("nonzero").1.to_bigint().unwrap_or_default();
    let p = BigInt::from(p);
    if !(&c % &p).is_zero() {
        return false;
    }
    base.is_unit(&base.from_bigint(&(c / p)))
}

fn check_relations(src: &AlgebraPresentation, carrier: &Carrier, bound: u32) -> Result<(), EnvelopeError> {
    let Some(rels) = &src.relations else { return Ok(()) };
    let d = src.chart.len();
    let base = &src.base;
    // relations ⊆ (f): the T-free part of the normal form is the remainder modulo the Gröbner basis f.
    let plain = carrier.with_truncation(TruncationParams { m: BigInt::zero(), n: 1, weight_cutoff: None });
    for (k, r) in rels.iter().enumerate() {
        let nf = plain.from_poly(r);
        if nf.terms().any(|(e, _)| e[d..].iter().all(|&x| x == 0)) {
            return Err(EnvelopeError::RelationMismatch(format!("relation {} is not in the ideal of the generators", k + 1)));
        }
    }
    // (f) ⊆ (relations) through the degree bound: solve f_i = Σ q_k r_k.
    let mut monos: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(v: usize, rem: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if v == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=rem {
            cur[v] = k;
            rec(v + 1, rem - k, cur, out);
        }
        cur[v] = 0;
    }
    rec(0, bound, &mut cur, &mut monos);
    let index = |e: &Vec<u32>| monos.iter().position(|m| m == e);
    let mut columns: Vec<Vec<(usize, crate::exactalg::Coefficient)>> = Vec::new();
    for r in rels {
        let rd = r.degree().unwrap_or(0);
        for m in monos.iter().filter(|m| m.iter().sum::<u32>() + rd <= bound) {
            let prod = r.mul_monomial(m);
            let mut col: Vec<(usize, _)> = prod.terms().map(|(e, c)| (index(e).expect("within bound"), c.clone())).collect();
            col.sort_by_key(|x| x.0);
            columns.push(col);
        }
    }
    let mat = IntMatrix::from_columns(base, monos.len(), &columns);
    for (i, f) in src.ideal_gens.iter().enumerate() {
        let mut v = vec![base.zero(); monos.len()];
        for (e, c) in f.terms() {
            match index(e) {
                Some(k) => v[k] = c.clone(),
                None => return Err(EnvelopeError::RelationMismatch(format!("generator {} exceeds the degree bound {bound}", i + 1))),
            }
        }
        if solve_linear(&mat, &v)?.is_none() {
            return Err(EnvelopeError::RelationMismatch(format!(
                "generator {} is not in the ideal of the relations through degree {bound}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Builds D^{m,n}_{P,η}(J).
pub fn build_envelope(src: &AlgebraPresentation, trunc: TruncationParams) -> Result<EnvelopePresentation, EnvelopeError> {
    if trunc.n == 0 || trunc.m <= BigInt::zero() {
        return Err(EnvelopeError::InvalidTruncation("m and n must be at least 1".into()));
    }
    let d = src.chart.len();
    let base = &src.base;
    for f in &src.ideal_gens {
        if f.nvars() != d || f.ring() != base {
            return Err(EnvelopeError::Unsupported("generator over a different chart or ring".into()));
        }
    }
    let gens: Vec<Poly> = src.ideal_gens.iter().filter(|f| !f.is_zero()).cloned().collect();
    if let PdStructure::StandardP { p, .. } = base.pd() {
        let with_p = gens.iter().filter(|f| is_p_times_unit(f, base, *p)).count();
        if with_p == 1 && gens.len() == 1 {
            let carrier = Carrier::new(base, src.chart.clone(), vec![], vec![], true, trunc.clone())?;
            return Ok(EnvelopePresentation {
                source: src.clone(),
                trunc,
                carrier,
                annotation: Some("envelope = P".into()),
                differentials: vec![],
                basis_check: "J = (p) carries the base divided powers".into(),
            });
        }
        if with_p > 0 {
            return Err(EnvelopeError::Unsupported("an ideal containing p must be exactly (p)".into()));
        }
    }
    for (i, f) in gens.iter().enumerate() {
        if f.degree() == Some(0) {
            return Err(EnvelopeError::BasisHypothesis(format!("generator {} is constant", i + 1)));
        }
    }
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let (a, _) = gens[i].leading().expect("nonzero");
            let (b, _) = gens[j].leading().expect("nonzero");
            if a.iter().zip(b).any(|(x, y)| *x > 0 && *y > 0) {
                return Err(EnvelopeError::BasisHypothesis(format!(
                    "leading monomials of generators {} and {} are not coprime",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    for (i, w) in src.declared_weights.iter().enumerate() {
        if let (Some(w), Some(f)) = (w, src.ideal_gens.get(i)) {
            if !f.is_homogeneous() || f.degree() != Some(*w) {
                return Err(EnvelopeError::Unsupported(format!("declared weight {w} of generator {} does not match", i + 1)));
            }
        }
    }
    let graded = gens.iter().all(|f| f.is_homogeneous());
    if !graded && trunc.weight_cutoff.is_none() {
        return Err(EnvelopeError::MissingWeightCutoff);
    }
    let names = match &src.pd_names {
        Some(n) if n.len() == gens.len() => n.clone(),
        Some(_) => return Err(EnvelopeError::Unsupported("pd variable names do not match the generators".into())),
        None => default_pd_names(gens.len()),
    };
    if names.iter().any(|n| src.chart.contains(n)) {
        return Err(EnvelopeError::Unsupported("pd variable names collide with chart variables".into()));
    }
    let carrier = Carrier::new(base, src.chart.clone(), names, gens.clone(), false, trunc.clone())?;
    let bound = src
        .relations
        .iter()
        .flatten()
        .chain(gens.iter())
        .filter_map(|p| p.degree())
        .max()
        .unwrap_or(0)
        .max(trunc.weight_cutoff.unwrap_or(0))
        .min(12);
    check_relations(src, &carrier, bound)?;
    let differentials = gens.iter().map(|f| (0..d).map(|j| f.partial(j)).collect()).collect();
    let basis_check = if gens.is_empty() {
        "J = 0".into()
    } else {
        "unit leading coefficients and pairwise coprime leading monomials: a regular sequence, so the classes form a basis of J/J²".into()
    };
    Ok(EnvelopePresentation { source: src.clone(), trunc, carrier, annotation: None, differentials, basis_check })
}

/// Level ν of the fiber-power envelope.
pub fn fiber_power_envelope(env: &EnvelopePresentation, nu: usize) -> CosimplicialLevel {
    let carrier = env.carrier.with_level(nu);
    let dictionary = carrier.xi_dictionary();
    CosimplicialLevel { nu, carrier, dictionary }
}
