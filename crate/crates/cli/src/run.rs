use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};

use pdcris::cechcomp::{build_double_complex, compare_de_rham, compare_edges, crys_cohomology, CechError, CohomologyRequest, Side};
use pdcris::crystal::{check_integrable, check_pd_quasinilpotent, ConnectionData, CrystalError};
use pdcris::derham::{plain_carrier, DeRhamError, WeightBand};
use pdcris::envelope::{build_envelope, AlgebraPresentation, EnvelopeError, EnvelopePresentation, Poly};
use pdcris::exactalg::BaseDpRing;
use pdcris::homcx::HomError;
use pdcris::pdpoly::TruncationParams;

use crate::problem::{CrystalSpec, Located, ProblemFile, RingSpec, SideSpec, Task};
use crate::CliError;

pub const SCHEMA: u32 = 1;

/// Command-line values that replace the file's [compute] entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub weight_cutoff: Option<u32>,
    pub level: Option<u32>,
    pub nu_max: Option<usize>,
    pub kmax: Option<u32>,
    pub side: Option<SideSpec>,
}

impl Overrides {
    pub fn apply(&self, p: &mut ProblemFile) {
        let c = &mut p.compute;
        c.weight_cutoff = self.weight_cutoff.unwrap_or(c.weight_cutoff);
        c.level = self.level.unwrap_or(c.level);
        c.nu_max = self.nu_max.or(c.nu_max);
        c.kmax = self.kmax.unwrap_or(c.kmax);
        c.side = self.side.unwrap_or(c.side);
    }
}

/// A problem checked against the core library: one envelope and connection per presentation.
#[derive(Clone, Debug)]
pub struct Problem {
    pub file: ProblemFile,
    pub ring: BaseDpRing,
    pub envs: Vec<EnvelopePresentation>,
    pub conns: Vec<ConnectionData>,
}

fn envelope_err(e: EnvelopeError, at: &Located) -> CliError {
    match e {
        EnvelopeError::Syntax(s) => CliError::Syntax { line: at.line, column: s.column, message: s.message },
        EnvelopeError::UnknownSymbol { name, column } => CliError::Syntax { line: at.line, column, message: format!("unknown symbol '{name}'") },
        other => CliError::Input { module: "envelope", message: other.to_string() },
    }
}

fn hom_err(e: HomError) -> CliError {
    match e {
        HomError::Ring(r) => CliError::Input { module: "exactalg", message: r.to_string() },
        other => CliError::Internal { module: "homcx", message: other.to_string() },
    }
}

fn derham_err(e: DeRhamError) -> CliError {
    match e {
        DeRhamError::Hom(h) => hom_err(h),
        DeRhamError::Envelope(en) => CliError::Input { module: "envelope", message: en.to_string() },
        DeRhamError::NotGraded | DeRhamError::Dimension(_) => CliError::Input { module: "derham", message: e.to_string() },
        other => CliError::Internal { module: "derham", message: other.to_string() },
    }
}

fn crystal_err(e: CrystalError) -> CliError {
    match e {
        CrystalError::NotVerified(m) => CliError::Refusal { module: "crystal", message: m },
        CrystalError::DeRham(d) => derham_err(d),
        other => CliError::Input { module: "crystal", message: other.to_string() },
    }
}

fn cech_err(e: CechError) -> CliError {
    match e {
        CechError::Range(m) => CliError::Input { module: "cechcomp", message: m },
        CechError::NotVerified(_) => CliError::Refusal { module: "cechcomp", message: e.to_string() },
        CechError::Crystal(c) => crystal_err(c),
        CechError::DeRham(d) => derham_err(d),
        CechError::Hom(h) => hom_err(h),
        CechError::Envelope(en) => CliError::Input { module: "envelope", message: en.to_string() },
    }
}

fn base_ring(p: &ProblemFile) -> Result<BaseDpRing, CliError> {
    let bad = |m: String| CliError::Semantic { section: "base".into(), message: m };
    match (p.base.ring, p.base.standard_pd) {
        (RingSpec::Integers, false) => Ok(BaseDpRing::integers()),
        (RingSpec::Rationals, false) => Ok(BaseDpRing::rationals()),
        (RingSpec::Modular(n), false) => BaseDpRing::modular(n).map_err(|e| bad(e.to_string())),
        (RingSpec::Modular(n), true) => {
            let p0 = (2..=n).find(|q| n % q == 0).ok_or_else(|| bad(format!("modulus {n} is not a prime power")))?;
            let mut e = 0;
            let mut r = n;
            while r % p0 == 0 {
                r /= p0;
                e += 1;
            }
            if r != 1 {
                return Err(bad(format!("standard divided powers need a prime power modulus, got {n}")));
            }
            BaseDpRing::standard_p(p0, e).map_err(|e| bad(e.to_string()))
        }
        (_, true) => Err(bad("standard divided powers need a ring Z/p^e".into())),
    }
}

fn polys(items: &[Located], ring: &BaseDpRing, chart: &[String]) -> Result<Vec<Poly>, CliError> {
    items.iter().map(|g| Poly::parse(&g.text, ring, chart, g.column - 1).map_err(|e| envelope_err(e, g))).collect()
}

pub fn validate(file: &ProblemFile) -> Result<Problem, CliError> {
    let ring = base_ring(file)?;
    let c = &file.compute;
    let trunc = TruncationParams { m: (1..=c.level as u64).map(BigInt::from).product(), n: c.level, weight_cutoff: Some(c.weight_cutoff) };
    let mut envs = Vec::new();
    for pr in &file.presentations {
        let mut ap = AlgebraPresentation::new(ring.clone(), pr.chart.clone(), polys(&pr.ideal, &ring, &pr.chart)?);
        if let Some(r) = &pr.relations {
            ap.relations = Some(polys(r, &ring, &pr.chart)?);
        }
        if let Some(w) = &pr.weights {
            ap.declared_weights = w.clone();
        }
        ap.pd_names = pr.pd_names.clone();
        envs.push(build_envelope(&ap, trunc.clone()).map_err(|e| CliError::Input { module: "envelope", message: e.to_string() })?);
    }
    let conns = match &file.crystal {
        CrystalSpec::Structure => envs.iter().map(|e| ConnectionData::structure(e, c.level)).collect(),
        CrystalSpec::Connection { rank, weights, gamma } => {
            let env = &envs[0];
            let plain = plain_carrier(&env.carrier);
            let mut mats = vec![vec![vec![plain.zero(); *rank]; *rank]; env.carrier.chart_arity()];
            for (dir, rows) in gamma {
                let j = env.carrier.chart_names().iter().position(|n| n == dir).expect("checked at parse time");
                for (l, row) in rows.iter().enumerate() {
                    for (k, entry) in row.iter().enumerate() {
                        mats[j][l][k] = plain.parse(&entry.text, entry.column - 1).map_err(|e| envelope_err(e, entry))?;
                    }
                }
            }
            let conn = ConnectionData::new(env, c.level, weights.clone(), mats).map_err(|e| CliError::Semantic { section: "crystal".into(), message: e.to_string() })?;
            vec![conn]
        }
    };
    Ok(Problem { file: file.clone(), ring, envs, conns })
}

fn echo(p: &Problem) -> Value {
    let f = &p.file;
    let c = &f.compute;
    let presentations: Vec<Value> = f
        .presentations
        .iter()
        .map(|pr| json!({"chart": pr.chart, "ideal": pr.ideal.iter().map(|g| g.text.clone()).collect::<Vec<_>>()}))
        .collect();
    let crystal = match &f.crystal {
        CrystalSpec::Structure => json!("structure"),
        CrystalSpec::Connection { rank, weights, .. } => json!({"rank": rank, "weights": weights}),
    };
    json!({
        "name": c.task.name(),
        "base": p.ring.to_string(),
        "presentations": presentations,
        "crystal": crystal,
        "degrees": [c.degrees.0, c.degrees.1],
        "level": c.level,
        "nu_max": c.nu_max(),
        "weight_cutoff": c.weight_cutoff,
        "side": c.side.name(),
        "kmax": c.kmax,
    })
}

/// Over ℤ/N the level-n envelope is the full one once N | n!; no claim over ℤ or ℚ.
fn stable_level(ring: &BaseDpRing, n: u32) -> Option<bool> {
    let m = ring.modulus()?;
    let f: BigInt = (1..=n as u64).map(BigInt::from).product();
    Some((f % m).is_zero())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn cohomology(p: &Problem) -> Result<Value, CliError> {
    let c = &p.file.compute;
    let side = match c.side {
        SideSpec::Ca => Side::Ca,
        SideSpec::DeRham => Side::DeRham,
        SideSpec::Both => Side::Both,
    };
    let req = CohomologyRequest { degrees: (c.degrees.0..=c.degrees.1).collect(), n: c.level, nu_max: c.nu_max(), w_max: c.weight_cutoff, side, k_max: c.kmax };
    let r = crys_cohomology(&p.conns[0], &req).map_err(cech_err)?;
    Ok(json!({
        "graded": r.graded,
        "stable_level": stable_level(&p.ring, c.level),
        "quasi_nilpotence": to_value(&r.quasi_nilpotence),
        "degrees": to_value(&r.degrees),
        "sides_agree": if side == Side::Both { Some(r.sides_agree()) } else { None },
    }))
}

fn compare(p: &Problem) -> Result<Value, CliError> {
    let c = &p.file.compute;
    let (lo, hi, nu_max, w) = (c.degrees.0, c.degrees.1, c.nu_max(), c.weight_cutoff);
    let mut charts = Vec::new();
    let mut all = true;
    for (idx, conn) in p.conns.iter().enumerate() {
        let qn = check_pd_quasinilpotent(conn, c.kmax, w);
        if !qn.is_verified() && !conn.is_structure() {
            return Err(CliError::Refusal { module: "crystal", message: format!("quasi-nilpotence not verified within k_max = {}", c.kmax) });
        }
        let dc = build_double_complex(conn, &qn, c.level, nu_max, w).map_err(cech_err)?;
        let bands: Vec<WeightBand> = if dc.is_graded() { (0..=w).map(WeightBand::Exact).collect() } else { vec![WeightBand::UpTo(w)] };
        let mut rows = Vec::new();
        for band in bands {
            let s = dc.slice(band, nu_max, true).map_err(cech_err)?;
            let label = match band {
                WeightBand::Exact(x) => json!({"total_weight": x}),
                WeightBand::UpTo(x) => json!({"up_to": x}),
            };
            if !s.check_anticommute().map_err(cech_err)? {
                return Err(CliError::Internal { module: "cechcomp", message: format!("presentation {}: a square fails to anticommute at {label}", idx + 1) });
            }
            let e = compare_edges(&s, lo, hi).map_err(cech_err)?;
            let complete = dc.is_graded();
            all &= !complete || (e.column_edge_qiso && e.row_edge_qiso);
            rows.push(json!({
                "band": label,
                "complete": complete,
                "columns_acyclic": s.columns_acyclic().map_err(cech_err)?,
                "cofaces_agree": s.cofaces_agree().map_err(cech_err)?,
                "column_edge_qiso": e.column_edge_qiso,
                "row_edge_qiso": e.row_edge_qiso,
            }));
        }
        charts.push(json!({"presentation": idx + 1, "weights": rows}));
    }
    let mut embedding = Vec::new();
    let degrees: Vec<usize> = (lo..=hi).collect();
    for (k, other) in p.conns.iter().enumerate().skip(1) {
        for (i, band, agree) in compare_de_rham(&p.conns[0], other, c.level, &degrees, w).map_err(cech_err)? {
            let label = match band {
                WeightBand::Exact(x) => json!({"total_weight": x}),
                WeightBand::UpTo(x) => json!({"up_to": x}),
            };
            embedding.push(json!({"presentations": [1, k + 1], "degree": i, "band": label, "agree": agree}));
        }
    }
    let independent = if p.conns.len() > 1 { Some(embedding.iter().all(|e| e["agree"] == json!(true))) } else { None };
    Ok(json!({
        "edges": charts,
        "all_edges_qiso": all,
        "embedding": embedding,
        "embedding_independent": independent,
    }))
}

fn verify_connection(p: &Problem) -> Value {
    let c = &p.file.compute;
    let conn = &p.conns[0];
    let qn = check_pd_quasinilpotent(conn, c.kmax, c.weight_cutoff);
    json!({
        "integrable": check_integrable(conn, c.weight_cutoff),
        "quasi_nilpotence": to_value(&qn),
        "inconclusive": !qn.is_verified(),
    })
}

fn envelope_dump(p: &Problem) -> Value {
    let out: Vec<Value> = p
        .envs
        .iter()
        .map(|e| {
            let c = &e.carrier;
            let pd: Vec<Value> = (0..c.pd_arity())
                .map(|i| json!({"name": c.pd_names()[i], "image": c.generators()[i].render(c.chart_names()), "weight": c.pd_weights()[i]}))
                .collect();
            json!({
                "chart": c.chart_names(),
                "pd_variables": pd,
                "annotation": e.annotation,
                "graded": c.is_graded(),
                "basis_hypothesis": e.basis_check,
                "dump": e.dump().lines().collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "envelopes": out })
}

/// Runs the task and wraps the result with the schema version and the task echo.
pub fn run(p: &Problem) -> Result<Value, CliError> {
    let result = match p.file.compute.task {
        Task::Cohomology => cohomology(p)?,
        Task::Compare => compare(p)?,
        Task::VerifyConnection => verify_connection(p),
        Task::EnvelopeDump => envelope_dump(p),
    };
    Ok(json!({ "schema": SCHEMA, "task": echo(p), "result": result }))
}
