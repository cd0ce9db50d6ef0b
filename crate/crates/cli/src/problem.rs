//! Problem files: line-oriented `[section]` blocks of `key = value` pairs.
//!
//! ```text
//! [base]
//! ring = Z/4            # Z, Q or Z/N
//! pd = trivial          # or standard, for N = p^e
//! [presentation]        # repeatable; the compare task checks charts against each other
//! chart = x, y
//! ideal = x^2, y
//! [crystal]
//! structure             # or: rank, weights, gamma.<chart variable> = row; row
//! [compute]
//! task = cohomology
//! degrees = 0..2
//! ```

use std::fmt::{self, Write as _};

use crate::CliError;

/// A value with the position it was read from; equality ignores the position.
#[derive(Clone, Debug)]
pub struct Located {
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Located {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for Located {}

impl fmt::Display for Located {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingSpec {
    Integers,
    Rationals,
    Modular(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseSpec {
    pub ring: RingSpec,
    pub standard_pd: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentationSpec {
    pub chart: Vec<String>,
    pub ideal: Vec<Located>,
    pub relations: Option<Vec<Located>>,
    /// `_` leaves a weight undeclared.
    pub weights: Option<Vec<Option<u32>>>,
    pub pd_names: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrystalSpec {
    Structure,
    Connection {
        rank: usize,
        weights: Vec<u32>,
        /// (chart variable, rows of entries); missing directions are zero.
        gamma: Vec<(String, Vec<Vec<Located>>)>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Cohomology,
    Compare,
    VerifyConnection,
    EnvelopeDump,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Cohomology => "cohomology",
            Task::Compare => "compare",
            Task::VerifyConnection => "verify-connection",
            Task::EnvelopeDump => "envelope-dump",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideSpec {
    Ca,
    DeRham,
    Both,
}

impl SideSpec {
    pub fn name(self) -> &'static str {
        match self {
            SideSpec::Ca => "ca",
            SideSpec::DeRham => "de-rham",
            SideSpec::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ca" => Some(SideSpec::Ca),
            "de-rham" | "derham" => Some(SideSpec::DeRham),
            "both" => Some(SideSpec::Both),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputeSpec {
    pub task: Task,
    /// Inclusive degree range.
    pub degrees: (usize, usize),
    pub level: u32,
    pub nu_max: Option<usize>,
    pub weight_cutoff: u32,
    pub side: SideSpec,
    pub kmax: u32,
}

impl ComputeSpec {
    /// Explicit ν_max, or two levels past the top degree.
    pub fn nu_max(&self) -> usize {
        self.nu_max.unwrap_or(self.degrees.1 + 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub base: BaseSpec,
    pub presentations: Vec<PresentationSpec>,
    pub crystal: CrystalSpec,
    pub compute: ComputeSpec,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Syntax { line, column, message: message.into() }
}

fn semantic(section: &str, message: impl Into<String>) -> CliError {
    CliError::Semantic { section: section.into(), message: message.into() }
}

/// Splits on `sep`, trimming; columns are 1-based within the line.
fn split(value: &str, start: usize, line: usize, sep: char) -> Vec<Located> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in value.split(sep) {
        let lead = part.len() - part.trim_start().len();
        out.push(Located { text: part.trim().to_string(), line, column: start + value[..offset + lead].chars().count() });
        offset += part.len() + sep.len_utf8();
    }
    out
}

fn number<T: std::str::FromStr>(v: &Located, what: &str) -> Result<T, CliError> {
    v.text.parse().map_err(|_| syntax(v.line, v.column, format!("expected {what}, found '{}'", v.text)))
}

fn identifier(v: &Located) -> Result<String, CliError> {
    let ok = v.text.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && v.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(v.text.clone())
    } else {
        Err(syntax(v.line, v.column, format!("invalid variable name '{}'", v.text)))
    }
}

fn nonempty(v: &Located) -> Result<Located, CliError> {
    if v.text.is_empty() {
        Err(syntax(v.line, v.column, "empty entry"))
    } else {
        Ok(v.clone())
    }
}

#[derive(Default)]
struct Raw {
    // (section name, header line, entries)
    sections: Vec<(String, usize, Vec<(Located, Located)>)>,
}

fn read_raw(text: &str) -> Result<Raw, CliError> {
    let mut raw = Raw::default();
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let body = full.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = body.chars().count() - body.trim_start().chars().count();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| syntax(line, lead + 1, "unclosed section header"))?;
            raw.sections.push((name.trim().to_string(), line, Vec::new()));
            continue;
        }
        let Some(section) = raw.sections.last_mut() else {
            return Err(syntax(line, lead + 1, "entry before the first section"));
        };
        let (key, value) = match body.find('=') {
            Some(eq) => {
                let v = &body[eq + 1..];
                let vlead = v.chars().count() - v.trim_start().chars().count();
                (body[..eq].trim(), Located { text: v.trim().to_string(), line, column: body[..eq + 1].chars().count() + vlead + 1 })
            }
            None => (trimmed, Located { text: String::new(), line, column: 0 }),
        };
        if key.is_empty() {
            return Err(syntax(line, lead + 1, "missing key"));
        }
        section.2.push((Located { text: key.to_string(), line, column: lead + 1 }, value));
    }
    Ok(raw)
}

fn list(v: &Located) -> Vec<Located> {
    if v.text.is_empty() {
        return vec![];
    }
    split(&v.text, v.column, v.line, ',')
}

fn parse_base(entries: &[(Located, Located)], line: usize) -> Result<BaseSpec, CliError> {
    let mut ring = None;
    let mut standard_pd = false;
    for (k, v) in entries {
        match k.text.as_str() {
            "ring" => {
                ring = Some(match v.text.as_str() {
                    "Z" => RingSpec::Integers,
                    "Q" => RingSpec::Rationals,
                    t => match t.strip_prefix("Z/") {
                        Some(n) => RingSpec::Modular(n.trim().parse().map_err(|_| syntax(v.line, v.column + 2, format!("expected a modulus, found '{n}'")))?),
                        None => return Err(syntax(v.line, v.column, format!("unknown ring '{t}' (expected Z, Q or Z/N)"))),
                    },
                })
            }
            "pd" => {
                standard_pd = match v.text.as_str() {
                    "trivial" => false,
                    "standard" => true,
                    t => return Err(syntax(v.line, v.column, format!("unknown pd structure '{t}' (expected trivial or standard)"))),
                }
            }
            other => return Err(syntax(k.line, k.column, format!("unknown key '{other}' in [base]"))),
        }
    }
    let ring = ring.ok_or_else(|| syntax(line, 1, "[base] needs a ring"))?;
    Ok(BaseSpec { ring, standard_pd })
}

fn parse_presentation(entries: &[(Located, Located)], line: usize) -> Result<PresentationSpec, CliError> {
    let mut p = PresentationSpec { chart: vec![], ideal: vec![], relations: None, weights: None, pd_names: None };
    let mut seen_chart = false;
    for (k, v) in entries {
        match k.text.as_str() {
            "chart" => {
                p.chart = list(v).iter().map(identifier).collect::<Result<_, _>>()?;
                seen_chart = true;
            }
            "ideal" => p.ideal = list(v).iter().map(nonempty).collect::<Result<_, _>>()?,
            "relations" => p.relations = Some(list(v).iter().map(nonempty).collect::<Result<_, _>>()?),
            "weights" => {
                p.weights = Some(list(v).iter().map(|w| if w.text == "_" { Ok(None) } else { number(w, "a weight or _").map(Some) }).collect::<Result<_, _>>()?)
            }
            "pd_names" => p.pd_names = Some(list(v).iter().map(identifier).collect::<Result<_, _>>()?),
            other => return Err(syntax(k.line, k.column, format!("unknown key '{other}' in [presentation]"))),
        }
    }
    if !seen_chart {
        return Err(syntax(line, 1, "[presentation] needs a chart"));
    }
    Ok(p)
}

fn parse_crystal(entries: &[(Located, Located)], line: usize) -> Result<CrystalSpec, CliError> {
    if entries.len() == 1 && entries[0].0.text == "structure" && entries[0].1.text.is_empty() {
        return Ok(CrystalSpec::Structure);
    }
    let mut rank = None;
    let mut weights = None;
    let mut gamma = Vec::new();
    for (k, v) in entries {
        match k.text.as_str() {
            "rank" => rank = Some(number::<usize>(v, "a rank")?),
            "weights" => weights = Some(list(v).iter().map(|w| number(w, "a weight")).collect::<Result<Vec<u32>, _>>()?),
            "structure" => return Err(syntax(k.line, k.column, "'structure' must be the only entry of [crystal]")),
            key => {
                let Some(dir) = key.strip_prefix("gamma.") else {
                    return Err(syntax(k.line, k.column, format!("unknown key '{key}' in [crystal]")));
                };
                let rows = split(&v.text, v.column, v.line, ';').iter().map(|r| split(&r.text, r.column, r.line, ',').iter().map(nonempty).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
                gamma.push((dir.to_string(), rows));
            }
        }
    }
    let rank = rank.ok_or_else(|| syntax(line, 1, "[crystal] needs 'structure' or a rank"))?;
    let weights = weights.unwrap_or_else(|| vec![0; rank]);
    Ok(CrystalSpec::Connection { rank, weights, gamma })
}

fn parse_compute(entries: &[(Located, Located)], line: usize) -> Result<ComputeSpec, CliError> {
    let mut c = ComputeSpec { task: Task::Cohomology, degrees: (0, 1), level: 2, nu_max: None, weight_cutoff: 6, side: SideSpec::Both, kmax: 16 };
    let mut task = false;
    for (k, v) in entries {
        match k.text.as_str() {
            "task" => {
                c.task = match v.text.as_str() {
                    "cohomology" => Task::Cohomology,
                    "compare" => Task::Compare,
                    "verify-connection" => Task::VerifyConnection,
                    "envelope-dump" => Task::EnvelopeDump,
                    t => return Err(syntax(v.line, v.column, format!("unknown task '{t}'"))),
                };
                task = true;
            }
            "degrees" => {
                c.degrees = match v.text.find("..") {
                    Some(at) => {
                        let (a, b) = (&v.text[..at], &v.text[at + 2..]);
                        let pos = |t: &str, col: usize| Located { text: t.trim().to_string(), line: v.line, column: col };
                        (number(&pos(a, v.column), "a degree")?, number(&pos(b, v.column + v.text[..at + 2].chars().count()), "a degree")?)
                    }
                    None => {
                        let d = number(v, "a degree or a range a..b")?;
                        (d, d)
                    }
                };
                if c.degrees.0 > c.degrees.1 {
                    return Err(syntax(v.line, v.column, "empty degree range"));
                }
            }
            "level" => c.level = number(v, "a level")?,
            "nu_max" => c.nu_max = Some(number(v, "ν_max")?),
            "weight_cutoff" => c.weight_cutoff = number(v, "a weight cutoff")?,
            "side" => c.side = SideSpec::parse(&v.text).ok_or_else(|| syntax(v.line, v.column, format!("unknown side '{}' (expected ca, de-rham or both)", v.text)))?,
            "kmax" => c.kmax = number(v, "k_max")?,
            other => return Err(syntax(k.line, k.column, format!("unknown key '{other}' in [compute]"))),
        }
    }
    if !task {
        return Err(syntax(line, 1, "[compute] needs a task"));
    }
    if c.level == 0 {
        return Err(semantic("compute", "level must be at least 1"));
    }
    Ok(c)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, CliError> {
    let raw = read_raw(text)?;
    let (mut base, mut crystal, mut compute) = (None, None, None);
    let mut presentations = Vec::new();
    for (name, line, entries) in &raw.sections {
        let once = |seen: bool| if seen { Err(syntax(*line, 1, format!("duplicate section [{name}]"))) } else { Ok(()) };
        match name.as_str() {
            "base" => {
                once(base.is_some())?;
                base = Some(parse_base(entries, *line)?);
            }
            "presentation" => presentations.push(parse_presentation(entries, *line)?),
            "crystal" => {
                once(crystal.is_some())?;
                crystal = Some(parse_crystal(entries, *line)?);
            }
            "compute" => {
                once(compute.is_some())?;
                compute = Some(parse_compute(entries, *line)?);
            }
            other => return Err(syntax(*line, 1, format!("unknown section [{other}]"))),
        }
    }
    let base = base.ok_or_else(|| semantic("base", "missing section"))?;
    if presentations.is_empty() {
        return Err(semantic("presentation", "missing section"));
    }
    let p = ProblemFile { base, presentations, crystal: crystal.unwrap_or(CrystalSpec::Structure), compute: compute.ok_or_else(|| semantic("compute", "missing section"))? };
    check_shapes(&p)?;
    Ok(p)
}

/// Dimension checks that need no ring arithmetic.
fn check_shapes(p: &ProblemFile) -> Result<(), CliError> {
    for (i, pr) in p.presentations.iter().enumerate() {
        if let Some(w) = &pr.weights {
            if w.len() != pr.ideal.len() {
                return Err(semantic("presentation", format!("presentation {}: {} weights for {} ideal generators", i + 1, w.len(), pr.ideal.len())));
            }
        }
        if let Some(n) = &pr.pd_names {
            if n.len() != pr.ideal.len() {
                return Err(semantic("presentation", format!("presentation {}: {} pd names for {} ideal generators", i + 1, n.len(), pr.ideal.len())));
            }
        }
    }
    if let CrystalSpec::Connection { rank, weights, gamma } = &p.crystal {
        if *rank == 0 {
            return Err(semantic("crystal", "rank must be positive"));
        }
        if p.presentations.len() > 1 {
            return Err(semantic("crystal", "several presentations need the structure crystal"));
        }
        if weights.len() != *rank {
            return Err(semantic("crystal", format!("{} weights for rank {rank}", weights.len())));
        }
        let chart = &p.presentations[0].chart;
        for (dir, rows) in gamma {
            if !chart.contains(dir) {
                return Err(semantic("crystal", format!("gamma.{dir}: '{dir}' is not a chart variable")));
            }
            if rows.len() != *rank || rows.iter().any(|r| r.len() != *rank) {
                return Err(semantic("crystal", format!("gamma.{dir} must be a {rank}×{rank} matrix")));
            }
        }
        if gamma.iter().enumerate().any(|(i, (d, _))| gamma[..i].iter().any(|(e, _)| e == d)) {
            return Err(semantic("crystal", "a direction is given twice"));
        }
    }
    Ok(())
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl ProblemFile {
    /// Canonical text; parses back to an equal problem.
    pub fn to_text(&self) -> String {
        let mut s = String::from("[base]\n");
        let ring = match self.base.ring {
            RingSpec::Integers => "Z".to_string(),
            RingSpec::Rationals => "Q".to_string(),
            RingSpec::Modular(n) => format!("Z/{n}"),
        };
        let _ = writeln!(s, "ring = {ring}\npd = {}", if self.base.standard_pd { "standard" } else { "trivial" });
        for p in &self.presentations {
            let _ = writeln!(s, "\n[presentation]\nchart = {}\nideal = {}", join(&p.chart), join(&p.ideal));
            if let Some(r) = &p.relations {
                let _ = writeln!(s, "relations = {}", join(r));
            }
            if let Some(w) = &p.weights {
                let ws: Vec<String> = w.iter().map(|x| x.map_or("_".into(), |v| v.to_string())).collect();
                let _ = writeln!(s, "weights = {}", ws.join(", "));
            }
            if let Some(n) = &p.pd_names {
                let _ = writeln!(s, "pd_names = {}", join(n));
            }
        }
        s.push_str("\n[crystal]\n");
        match &self.crystal {
            CrystalSpec::Structure => s.push_str("structure\n"),
            CrystalSpec::Connection { rank, weights, gamma } => {
                let _ = writeln!(s, "rank = {rank}\nweights = {}", join(weights));
                for (dir, rows) in gamma {
                    let rs: Vec<String> = rows.iter().map(|r| join(r)).collect();
                    let _ = writeln!(s, "gamma.{dir} = {}", rs.join("; "));
                }
            }
        }
        let c = &self.compute;
        let _ = writeln!(s, "\n[compute]\ntask = {}\ndegrees = {}..{}\nlevel = {}", c.task.name(), c.degrees.0, c.degrees.1, c.level);
        if let Some(nu) = c.nu_max {
            let _ = writeln!(s, "nu_max = {nu}");
        }
        let _ = writeln!(s, "weight_cutoff = {}\nside = {}\nkmax = {}", c.weight_cutoff, c.side.name(), c.kmax);
        s
    }
}
