//! Čech-Alexander complexes of crystals, the double complex E^{μ,ν} = M(ν)_n ⊗ Ω^μ_{D(ν)_n},
//! its total complex with the two edge projections, and the cohomology driver.
//!
//! Level ν is D(ν)_n = D_n⟨ξ_{s,j}⟩ with x in tensor slot 0, and M(ν) is M pulled back along
//! slot 0. A coface that moves slot 0 acts on module generators through the transition matrix
//! c_{ι₁,ι₀}. Horizontal maps are ∇; on column μ the vertical map is (−1)^μ times the
//! alternating coface sum, which makes every square anticommute.

use serde::Serialize;
use thiserror::Error;

use crate::crystal::{check_pd_quasinilpotent, transition_iso, CarrierMatrix, ConnectionData, CrystalError, PdThickening, QuasiNilpotence};
use crate::derham::{wedge_right, DeRhamComplex, DeRhamError, FormBasis, FormElement, WeightBand};
use crate::envelope::{coface_maps, fiber_power_envelope, Carrier, CarrierElement, CarrierMap, CosimplicialLevel, EnvelopeError};
use crate::exactalg::{BaseDpRing, Coefficient, IntMatrix, ModuleDescription};
use crate::homcx::{is_quasi_iso, ComplexMap, FiniteComplex, HomError, PresentedModule};

#[cfg(test)]
mod tests;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CechError {
    #[error("out of range: {0}")]
    Range(String),
    #[error("quasi-nilpotence not verified within k_max = {0}; refusing to build transition maps")]
    NotVerified(u32),
    #[error(transparent)]
    Crystal(#[from] CrystalError),
    #[error(transparent)]
    DeRham(#[from] DeRhamError),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
}

/// One coface D(ν) → D(ν+1) with d(image) of every frame direction and, when it moves
/// slot 0, the matrix of c_{ι₁,ι₀} on module generators.
#[derive(Clone, Debug)]
struct Coface {
    map: CarrierMap,
    frame_images: Vec<Vec<(usize, CarrierElement)>>,
    taylor: Option<CarrierMatrix>,
}

#[derive(Clone, Debug)]
struct Level {
    carrier: Carrier,
    dr: DeRhamComplex,
}

/// Levels ν = 0..=ν_max at truncation n with weight cutoff w_max, and their cofaces.
#[derive(Clone, Debug)]
pub struct DoubleComplex {
    conn: ConnectionData,
    n: u32,
    nu_max: usize,
    w_max: u32,
    levels: Vec<Level>,
    cofaces: Vec<Vec<Coface>>,
}

/// Frame differentials of an image: Σ_dir ∂_dir(y)·dz_dir.
fn differential_of(t: &Carrier, y: &CarrierElement) -> Vec<(usize, CarrierElement)> {
    let d = t.chart_arity();
    let mut out = Vec::new();
    for dir in 0..d + t.xi_arity() {
        let c = if dir < d { t.partial_chart(dir, y) } else { t.partial_xi(dir - d, y) };
        if !c.is_zero() {
            out.push((dir, c));
        }
    }
    out
}

/// x ↦ x − ξ_{1,·} from level 0 into `t` (ι₁), or x ↦ x (ι₀).
fn slot_inclusion(base: &Carrier, t: &Carrier, slot: usize) -> Result<CarrierMap, EnvelopeError> {
    let d = base.chart_arity();
    let chart = (0..d)
        .map(|j| if slot == 0 { t.chart_var(j) } else { t.sub(&t.chart_var(j), &t.xi_var(t.xi_index(slot, j))) })
        .collect();
    CarrierMap::new(base, t, chart, vec![])
}

/// Builds levels 0..=ν_max; needs a verified certificate at level n for the transition matrices.
pub fn build_double_complex(conn: &ConnectionData, qn: &QuasiNilpotence, n: u32, nu_max: usize, w_max: u32) -> Result<DoubleComplex, CechError> {
    if n == 0 || n > conn.n_max() {
        return Err(CechError::Range(format!("truncation level {n} outside 1..={}", conn.n_max())));
    }
    let base = conn.level_carrier(n, Some(w_max));
    let mut env = conn.env().clone();
    env.trunc = base.truncation().clone();
    env.carrier = base.clone();
    let cls: Vec<CosimplicialLevel> = (0..=nu_max).map(|nu| fiber_power_envelope(&env, nu)).collect();
    let levels = cls.iter().map(|cl| Ok(Level { carrier: cl.carrier.clone(), dr: conn.derham(&cl.carrier)? })).collect::<Result<Vec<_>, CechError>>()?;
    let mut cofaces = Vec::new();
    for nu in 0..nu_max {
        let t = &cls[nu + 1].carrier;
        let maps = coface_maps(&cls[nu], &cls[nu + 1]);
        let mut taylor = None;
        if !conn.is_structure() {
            let b = PdThickening::from_carrier(t)?;
            let (i1, i0) = (slot_inclusion(&base, t, 1)?, slot_inclusion(&base, t, 0)?);
            taylor = Some(transition_iso(conn, qn, &i1, &i0, &b)?);
        }
        let mut row = Vec::new();
        for (i, map) in maps.into_iter().enumerate() {
            let src = map.source();
            let d = src.chart_arity();
            let frame_images = (0..d + src.xi_arity())
                .map(|dir| differential_of(t, if dir < d { &map.chart_images()[dir] } else { &map.xi_images()[dir - d] }))
                .collect();
            // exposed coface ν+1 is the only one moving slot 0
            let moves = i == nu + 1;
            row.push(Coface { map, frame_images, taylor: if moves { taylor.clone() } else { None } });
        }
        cofaces.push(row);
    }
    Ok(DoubleComplex { conn: conn.clone(), n, nu_max, w_max, levels, cofaces })
}

/// One weight band of the double complex, with μ ≤ mu_top.
#[derive(Clone, Debug)]
pub struct DoubleSlice {
    pub band: WeightBand,
    pub ring: BaseDpRing,
    pub nu_max: usize,
    pub mu_top: usize,
    /// bases[ν][μ]
    pub bases: Vec<Vec<FormBasis>>,
    pub terms: Vec<Vec<PresentedModule>>,
    /// horizontal[ν][μ]: E^{μ,ν} → E^{μ+1,ν}, for μ < mu_top.
    pub horizontal: Vec<Vec<IntMatrix>>,
    /// vertical[ν][μ]: E^{μ,ν} → E^{μ,ν+1} with the (−1)^μ sign, for ν < ν_max.
    pub vertical: Vec<Vec<IntMatrix>>,
    /// cofaces[ν][i][μ]: the unsigned pullback along coface i.
    pub cofaces: Vec<Vec<Vec<IntMatrix>>>,
}

impl DoubleComplex {
    pub fn nu_max(&self) -> usize {
        self.nu_max
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn w_max(&self) -> u32 {
        self.w_max
    }

    pub fn ring(&self) -> &BaseDpRing {
        self.levels[0].carrier.ring()
    }

    pub fn connection(&self) -> &ConnectionData {
        &self.conn
    }

    /// Whether every map preserves total weight, so exact weight slices are complete.
    pub fn is_graded(&self) -> bool {
        self.levels[0].dr.is_graded()
    }

    pub fn frame_size(&self, nu: usize) -> usize {
        self.levels[nu].dr.frame_size()
    }

    pub fn level_complex(&self, nu: usize) -> &DeRhamComplex {
        &self.levels[nu].dr
    }

    /// Pullback along coface i of level ν, on representatives, reduced at level ν+1.
    pub fn pullback(&self, nu: usize, i: usize, x: &FormElement) -> FormElement {
        let cf = &self.cofaces[nu][i];
        let t = cf.map.target();
        let r = self.conn.rank();
        let mut out = FormElement::zero();
        for ((k, mask), a) in x.terms() {
            let fa = cf.map.apply(a);
            if fa.is_zero() {
                continue;
            }
            let mut cur = FormElement::zero();
            match &cf.taylor {
                None => cur.add_component(t, *k, 0, &fa, false),
                Some(tm) => {
                    for (l, row) in tm.iter().enumerate().take(r) {
                        cur.add_component(t, l, 0, &t.mul(&fa, &row[*k]), false);
                    }
                }
            }
            for s in 0..32 {
                if mask & (1 << s) == 0 {
                    continue;
                }
                let mut next = FormElement::zero();
                for ((l, m), y) in cur.terms() {
                    for (dir, c) in &cf.frame_images[s] {
                        if let Some((m2, neg)) = wedge_right(*m, *dir) {
                            next.add_component(t, *l, m2, &t.mul(y, c), neg);
                        }
                    }
                }
                cur = next;
            }
            out = out.add(t, &cur);
        }
        out
    }

    /// Σ_i (−1)^i pullback_i(x).
    pub fn coface_sum(&self, nu: usize, x: &FormElement) -> FormElement {
        let t = &self.levels[nu + 1].carrier;
        let mut out = FormElement::zero();
        for i in 0..self.cofaces[nu].len() {
            let img = self.pullback(nu, i, x);
            out = if i % 2 == 0 { out.add(t, &img) } else { out.sub(t, &img) };
        }
        out
    }

    fn basis(&self, mu: usize, nu: usize, band: WeightBand) -> FormBasis {
        if mu > self.frame_size(nu) {
            FormBasis::new(vec![])
        } else {
            self.levels[nu].dr.basis(mu, band)
        }
    }

    fn pullback_matrix(&self, nu: usize, i: usize, src: &FormBasis, tgt: &FormBasis) -> Result<IntMatrix, CechError> {
        let dr = &self.levels[nu].dr;
        let cols = src.keys().iter().map(|k| tgt.coordinates(&self.pullback(nu, i, &dr.generator(k)))).collect::<Result<Vec<_>, _>>()?;
        Ok(IntMatrix::from_columns(self.ring(), tgt.len(), &cols))
    }

    /// All terms and maps of one band for μ ≤ mu_top; `with_cofaces` also stores each pullback.
    pub fn slice(&self, band: WeightBand, mu_top: usize, with_cofaces: bool) -> Result<DoubleSlice, CechError> {
        if matches!(band, WeightBand::Exact(_)) && !self.is_graded() {
            return Err(DeRhamError::NotGraded.into());
        }
        let ring = self.ring().clone();
        let bases: Vec<Vec<FormBasis>> = (0..=self.nu_max).map(|nu| (0..=mu_top).map(|mu| self.basis(mu, nu, band)).collect()).collect();
        let mut terms = Vec::new();
        let mut horizontal = Vec::new();
        for (nu, bs) in bases.iter().enumerate() {
            let dr = &self.levels[nu].dr;
            terms.push(bs.iter().enumerate().map(|(mu, b)| dr.term(mu, band, b)).collect::<Result<Vec<_>, _>>()?);
            horizontal.push(bs.windows(2).map(|w| dr.boundary(&w[0], &w[1])).collect::<Result<Vec<_>, _>>()?);
        }
        let mut vertical = Vec::new();
        let mut cofaces = Vec::new();
        let minus = ring.from_i64(-1);
        for nu in 0..self.nu_max {
            let mut per_coface: Vec<Vec<IntMatrix>> = Vec::new();
            let mut sums = Vec::new();
            for mu in 0..=mu_top {
                let (src, tgt) = (&bases[nu][mu], &bases[nu + 1][mu]);
                if with_cofaces {
                    let ms = (0..self.cofaces[nu].len()).map(|i| self.pullback_matrix(nu, i, src, tgt)).collect::<Result<Vec<_>, _>>()?;
                    let mut sum = IntMatrix::zeros(&ring, tgt.len(), src.len());
                    for (i, m) in ms.iter().enumerate() {
                        sum = if i % 2 == 0 { sum.add(m) } else { sum.sub(m) }.map_err(HomError::from)?;
                    }
                    for (i, m) in ms.into_iter().enumerate() {
                        if per_coface.len() <= i {
                            per_coface.push(Vec::new());
                        }
                        per_coface[i].push(m);
                    }
                    sums.push(sum);
                } else {
                    let dr = &self.levels[nu].dr;
                    let cols = src.keys().iter().map(|k| tgt.coordinates(&self.coface_sum(nu, &dr.generator(k)))).collect::<Result<Vec<_>, _>>()?;
                    sums.push(IntMatrix::from_columns(&ring, tgt.len(), &cols));
                }
            }
            for (mu, s) in sums.iter_mut().enumerate() {
                if mu % 2 == 1 {
                    *s = s.scale(&minus);
                }
            }
            vertical.push(sums);
            cofaces.push(per_coface);
        }
        Ok(DoubleSlice { band, ring, nu_max: self.nu_max, mu_top, bases, terms, horizontal, vertical, cofaces })
    }
}

fn block_rows(ring: &BaseDpRing, blocks: &[&PresentedModule]) -> Result<PresentedModule, HomError> {
    let total: usize = blocks.iter().map(|b| b.gens).sum();
    let mut rows = Vec::new();
    let mut off = 0;
    for b in blocks {
        for r in 0..b.rels.rows() {
            rows.push(b.rels.row_entries(r).iter().map(|(j, c)| (j + off, c.clone())).collect());
        }
        off += b.gens;
    }
    PresentedModule::new(total, IntMatrix::from_sparse_rows(ring, total, rows))
}

/// Places `m` at row offset `ro` and column offset `co` in `out`.
fn place(out: &mut [Vec<(usize, Coefficient)>], m: &IntMatrix, ro: usize, co: usize) {
    for r in 0..m.rows() {
        for (c, v) in m.row_entries(r) {
            out[ro + r].push((co + c, v.clone()));
        }
    }
}

impl DoubleSlice {
    fn term(&self, mu: usize, nu: usize) -> &PresentedModule {
        &self.terms[nu][mu]
    }

    /// E^{*,ν} in degrees 0..=mu_top.
    pub fn row(&self, nu: usize) -> Result<FiniteComplex, CechError> {
        Ok(FiniteComplex::new(&self.ring, 0, self.terms[nu].clone(), self.horizontal[nu].clone())?)
    }

    /// E^{μ,*} in degrees 0..=ν_max, with its (−1)^μ sign.
    pub fn column(&self, mu: usize) -> Result<FiniteComplex, CechError> {
        let terms = (0..=self.nu_max).map(|nu| self.term(mu, nu).clone()).collect();
        let bds = (0..self.nu_max).map(|nu| self.vertical[nu][mu].clone()).collect();
        Ok(FiniteComplex::new(&self.ring, 0, terms, bds)?)
    }

    /// Offsets of the blocks E^{i−ν,ν}, ν = 0..=i, inside Tot^i.
    fn tot_blocks(&self, i: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut off = 0;
        for nu in 0..=i.min(self.nu_max) {
            let mu = i - nu;
            if mu > self.mu_top {
                continue;
            }
            out.push((mu, nu, off));
            off += self.bases[nu][mu].len();
        }
        out
    }

    /// Tot^i = ⊕_ν E^{i−ν,ν} for i = 0..=top, top ≤ min(ν_max, mu_top).
    pub fn tot(&self, top: usize) -> Result<FiniteComplex, CechError> {
        if top > self.nu_max || top > self.mu_top {
            return Err(CechError::Range(format!("total degree {top} needs ν_max and μ range at least {top}")));
        }
        let mut terms = Vec::new();
        for i in 0..=top {
            let blocks: Vec<&PresentedModule> = self.tot_blocks(i).iter().map(|(mu, nu, _)| self.term(*mu, *nu)).collect();
            terms.push(block_rows(&self.ring, &blocks)?);
        }
        let mut bds = Vec::new();
        for i in 0..top {
            let (src, tgt) = (self.tot_blocks(i), self.tot_blocks(i + 1));
            let mut rows = vec![Vec::new(); terms[i + 1].gens];
            for &(mu, nu, co) in &src {
                for &(mu2, nu2, ro) in &tgt {
                    if nu2 == nu && mu2 == mu + 1 {
                        place(&mut rows, &self.horizontal[nu][mu], ro, co);
                    } else if mu2 == mu && nu2 == nu + 1 {
                        place(&mut rows, &self.vertical[nu][mu], ro, co);
                    }
                }
            }
            let m = IntMatrix::from_sparse_rows(&self.ring, terms[i].gens, rows);
            bds.push(m);
        }
        Ok(FiniteComplex::new(&self.ring, 0, terms, bds)?)
    }

    /// Projection of Tot onto the block with μ = 0 (`to_column`) or ν = 0.
    pub fn edge(&self, tot: &FiniteComplex, to_column: bool) -> Result<ComplexMap, CechError> {
        let top = (tot.end() - 1) as usize;
        let target = if to_column {
            let c = self.column(0)?;
            FiniteComplex::new(&self.ring, 0, c.terms[..=top].to_vec(), c.boundaries[..top].to_vec())?
        } else {
            let r = self.row(0)?;
            let t = top.min(r.terms.len() - 1);
            FiniteComplex::new(&self.ring, 0, r.terms[..=t].to_vec(), r.boundaries[..t].to_vec())?
        };
        let mut comps = Vec::new();
        for i in 0..=top {
            let mut m = IntMatrix::zeros(&self.ring, target.gens(i as i64), tot.gens(i as i64));
            for (mu, nu, off) in self.tot_blocks(i) {
                if (to_column && mu == 0) || (!to_column && nu == 0) {
                    for r in 0..target.gens(i as i64) {
                        m.set(r, off + r, self.ring.one());
                    }
                }
            }
            comps.push(m);
        }
        Ok(ComplexMap::new(tot.clone(), target, comps)?)
    }

    /// Every square anticommutes modulo the relations of its corner.
    pub fn check_anticommute(&self) -> Result<bool, CechError> {
        for nu in 0..self.nu_max {
            for mu in 0..self.mu_top {
                let a = self.vertical[nu][mu + 1].mul(&self.horizontal[nu][mu]).map_err(HomError::from)?;
                let b = self.horizontal[nu + 1][mu].mul(&self.vertical[nu][mu]).map_err(HomError::from)?;
                let s = a.add(&b).map_err(HomError::from)?.transpose();
                let t = self.term(mu + 1, nu + 1);
                for r in 0..s.rows() {
                    let v: Vec<Coefficient> = (0..s.cols()).map(|j| s.get(r, j)).collect();
                    if !t.is_zero_vector(&v)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// H^ν(E^{μ,*}) = 0 for 0 < μ ≤ mu_top and ν < ν_max.
    pub fn columns_acyclic(&self) -> Result<bool, CechError> {
        for mu in 1..=self.mu_top {
            let c = self.column(mu)?;
            for nu in 0..self.nu_max {
                if !c.homology(nu as i64)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Every coface pullback is a chain map of rows, and all induce the same map on H^i for
    /// i < mu_top (rows truncated at mu_top are exact below it).
    pub fn cofaces_agree(&self) -> Result<bool, CechError> {
        if self.cofaces.iter().any(|c| c.is_empty()) {
            return Err(CechError::Range("slice built without per-coface matrices".into()));
        }
        for nu in 0..self.nu_max {
            let (src, tgt) = (self.row(nu)?, self.row(nu + 1)?);
            for m in &self.cofaces[nu] {
                if !ComplexMap::new(src.clone(), tgt.clone(), m.clone())?.check_chain_map()? {
                    return Ok(false);
                }
            }
            for i in 0..self.mu_top {
                let z = src.cycles(i as i64)?;
                let zt = z.transpose();
                let p0 = &self.cofaces[nu][0][i];
                for pj in &self.cofaces[nu][1..] {
                    let diff = pj[i].sub(p0).map_err(HomError::from)?;
                    for r in 0..zt.rows() {
                        let col: Vec<Coefficient> = (0..zt.cols()).map(|j| zt.get(r, j)).collect();
                        let v = diff.mul_vec(&col).map_err(HomError::from)?;
                        if !tgt.is_boundary(i as i64, &v)? {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}

/// M(0) → M(1) → ⋯ → M(ν_max) with the alternating coface sums, per weight band.
#[derive(Clone, Debug)]
pub struct CechAlexanderComplex {
    dc: DoubleComplex,
}

impl CechAlexanderComplex {
    pub fn nu_max(&self) -> usize {
        self.dc.nu_max
    }

    pub fn is_graded(&self) -> bool {
        self.dc.is_graded()
    }

    /// M(ν) at level n as a free module over the level-ν carrier.
    pub fn level_carrier(&self, nu: usize) -> &Carrier {
        &self.dc.levels[nu].carrier
    }

    pub fn slice(&self, band: WeightBand) -> Result<FiniteComplex, CechError> {
        self.dc.slice(band, 0, false)?.column(0)
    }
}

pub fn cech_alexander(conn: &ConnectionData, qn: &QuasiNilpotence, n: u32, nu_max: usize, w_max: u32) -> Result<CechAlexanderComplex, CechError> {
    Ok(CechAlexanderComplex { dc: build_double_complex(conn, qn, n, nu_max, w_max)? })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeReport {
    pub column_edge_qiso: bool,
    pub row_edge_qiso: bool,
}

/// Both edge projections of Tot are quasi-isomorphisms in degrees lo..=hi (hi ≤ ν_max − 2).
pub fn compare_edges(s: &DoubleSlice, lo: usize, hi: usize) -> Result<EdgeReport, CechError> {
    if hi + 2 > s.nu_max || hi + 2 > s.mu_top {
        return Err(CechError::Range(format!("edge comparison through degree {hi} needs ν_max and μ range ≥ {}", hi + 2)));
    }
    let tot = s.tot(hi + 2)?;
    let col = s.edge(&tot, true)?;
    let row = s.edge(&tot, false)?;
    Ok(EdgeReport { column_edge_qiso: is_quasi_iso(&col, lo as i64, hi as i64)?, row_edge_qiso: is_quasi_iso(&row, lo as i64, hi as i64)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Ca,
    DeRham,
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyRequest {
    pub degrees: Vec<usize>,
    pub n: u32,
    pub nu_max: usize,
    pub w_max: u32,
    pub side: Side,
    pub k_max: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightResult {
    /// Total weight of the slice; absent for a filtered band.
    pub total_weight: Option<u32>,
    /// Total weight minus degree, the weight of the coefficient of a class.
    pub label: Option<u32>,
    /// Upper end of a filtered band.
    pub up_to: Option<u32>,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ca: Option<ModuleDescription>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub de_rham: Option<ModuleDescription>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeResult {
    pub degree: usize,
    pub weights: Vec<WeightResult>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    pub graded: bool,
    pub quasi_nilpotence: QuasiNilpotence,
    pub degrees: Vec<DegreeResult>,
}

impl CohomologyReport {
    /// Whether both sides agree at every complete weight where both were computed.
    pub fn sides_agree(&self) -> bool {
        self.degrees.iter().all(|d| d.weights.iter().all(|w| !w.complete || w.agree != Some(false)))
    }
}

fn bands(graded: bool, w_max: u32) -> Vec<WeightBand> {
    if graded {
        (0..=w_max).map(WeightBand::Exact).collect()
    } else {
        vec![WeightBand::UpTo(w_max)]
    }
}

/// H^i of the CA complex and/or the de Rham complex at level n, per total weight ≤ w_max.
pub fn crys_cohomology(conn: &ConnectionData, req: &CohomologyRequest) -> Result<CohomologyReport, CechError> {
    let top = req.degrees.iter().copied().max().unwrap_or(0);
    let wants_ca = req.side != Side::DeRham;
    if wants_ca && req.nu_max < top + 1 {
        return Err(CechError::Range(format!("H^{top} on the CA side needs ν_max ≥ {}, got {}", top + 1, req.nu_max)));
    }
    let qn = check_pd_quasinilpotent(conn, req.k_max, req.w_max);
    let base = conn.level_carrier(req.n, Some(req.w_max));
    let dr = conn.derham(&base)?;
    let graded = dr.is_graded();
    let dc = if wants_ca {
        if !qn.is_verified() && !conn.is_structure() {
            return Err(CechError::NotVerified(req.k_max));
        }
        Some(build_double_complex(conn, &qn, req.n, req.nu_max, req.w_max)?)
    } else {
        None
    };
    let mut degrees: Vec<DegreeResult> = req.degrees.iter().map(|&i| DegreeResult { degree: i, weights: vec![] }).collect();
    for band in bands(graded, req.w_max) {
        let ca_cx = match &dc {
            Some(dc) => Some(dc.slice(band, 0, false)?.column(0)?),
            None => None,
        };
        let dr_cx = if req.side != Side::Ca { Some(dr.slice(band)?) } else { None };
        for d in degrees.iter_mut() {
            let i = d.degree;
            let (total_weight, label, up_to) = match band {
                WeightBand::Exact(w) if w < i as u32 => continue,
                WeightBand::Exact(w) => (Some(w), Some(w - i as u32), None),
                WeightBand::UpTo(w) => (None, None, Some(w)),
            };
            let ca = ca_cx.as_ref().map(|c| c.homology(i as i64)).transpose()?;
            let de_rham = dr_cx.as_ref().map(|c| c.homology(i as i64)).transpose()?;
            let agree = match (&ca, &de_rham) {
                (Some(a), Some(b)) => Some(a == b),
                _ => None,
            };
            d.weights.push(WeightResult { total_weight, label, up_to, complete: graded, ca, de_rham, agree });
        }
    }
    Ok(CohomologyReport { graded, quasi_nilpotence: qn, degrees })
}

/// Per weight and degree, whether the de Rham sides of two presentations agree.
pub fn compare_de_rham(a: &ConnectionData, b: &ConnectionData, n: u32, degrees: &[usize], w_max: u32) -> Result<Vec<(usize, WeightBand, bool)>, CechError> {
    let (da, db) = (a.derham(&a.level_carrier(n, Some(w_max)))?, b.derham(&b.level_carrier(n, Some(w_max)))?);
    let graded = da.is_graded() && db.is_graded();
    let mut out = Vec::new();
    for band in bands(graded, w_max) {
        let (ca, cb) = (da.slice(band)?, db.slice(band)?);
        for &i in degrees {
            out.push((i, band, ca.homology(i as i64)? == cb.homology(i as i64)?));
        }
    }
    Ok(out)
}
