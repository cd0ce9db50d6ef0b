use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::exactalg::{BaseDpRing, Coefficient};
use crate::pdpoly::syntax;

use super::EnvelopeError;

/// Graded lexicographic order on exponent vectors.
pub fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
    da.cmp(&db).then_with(|| a.cmp(b))
}

pub(crate) fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Sparse polynomial over a base ring in named chart variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    ring: BaseDpRing,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Coefficient>,
}

impl Poly {
    pub fn zero(ring: &BaseDpRing, nvars: usize) -> Self {
        Poly { ring: ring.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(ring: &BaseDpRing, nvars: usize, c: Coefficient) -> Self {
        let mut p = Self::zero(ring, nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(ring: &BaseDpRing, nvars: usize, j: usize) -> Self {
        let mut e = vec![0; nvars];
        e[j] = 1;
        let mut p = Self::zero(ring, nvars);
        p.add_term(e, ring.one());
        p
    }

    pub fn ring(&self) -> &BaseDpRing {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Coefficient)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let s = match self.terms.get(&e) {
            Some(old) => self.ring.add(old, &c),
            None => c,
        };
        if s.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, s);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&self.ring.from_i64(-1)))
    }

    pub fn scale(&self, s: &Coefficient) -> Poly {
        let mut r = Self::zero(&self.ring, self.nvars);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), self.ring.mul(c, s));
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Self::zero(&self.ring, self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                r.add_term(e, self.ring.mul(ca, cb));
            }
        }
        r
    }

    pub fn mul_monomial(&self, m: &[u32]) -> Poly {
        let mut r = Self::zero(&self.ring, self.nvars);
        for (a, c) in &self.terms {
            r.add_term(a.iter().zip(m).map(|(x, y)| x + y).collect(), c.clone());
        }
        r
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut d = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match d.next() {
            None => true,
            Some(first) => d.all(|x| x == first),
        }
    }

    /// Leading exponent and coefficient under grlex.
    pub fn leading(&self) -> Option<(&Vec<u32>, &Coefficient)> {
        self.terms.iter().max_by(|a, b| grlex(a.0, b.0))
    }

    pub fn partial(&self, j: usize) -> Poly {
        let mut r = Self::zero(&self.ring, self.nvars);
        for (e, c) in &self.terms {
            if e[j] > 0 {
                let mut f = e.clone();
                f[j] -= 1;
                r.add_term(f, self.ring.mul(c, &self.ring.from_u64(e[j] as u64)));
            }
        }
        r
    }

    pub fn parse(text: &str, ring: &BaseDpRing, names: &[String], column_offset: usize) -> Result<Poly, EnvelopeError> {
        let n = names.len();
        let mut out = Self::zero(ring, n);
        for term in syntax::parse_terms(text, column_offset)? {
            let mut e = vec![0u32; n];
            for f in &term.factors {
                let j = names.iter().position(|x| *x == f.name).ok_or_else(|| EnvelopeError::UnknownSymbol {
                    name: f.name.clone(),
                    column: f.column + column_offset,
                })?;
                if f.divided {
                    return Err(EnvelopeError::Syntax(syntax::SyntaxError {
                        column: f.column + column_offset,
                        message: format!("chart variable '{}' has no divided powers", f.name),
                    }));
                }
                e[j] += f.exponent;
            }
            out.add_term(e, ring.from_rational(&term.coeff)?);
        }
        Ok(out)
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| grlex(b, a));
        let mut s = String::new();
        for (idx, e) in keys.into_iter().enumerate() {
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { names[j].clone() } else { format!("{}^{}", names[j], k) })
                .collect();
            push_term(&mut s, idx == 0, &self.terms[e], &factors);
        }
        s
    }
}

/// Appends `± c*f1*f2` in canonical form.
pub(crate) fn push_term(s: &mut String, first: bool, c: &Coefficient, factors: &[String]) {
    let txt = c.to_string();
    let (neg, abs) = match txt.strip_prefix('-') {
        Some(a) => (true, a.to_string()),
        None => (false, txt),
    };
    if first {
        if neg {
            s.push('-');
        }
    } else {
        s.push_str(if neg { " - " } else { " + " });
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_render_and_leading() {
        let r = BaseDpRing::integers();
        let names = vec!["x".to_string(), "y".to_string()];
        let p = Poly::parse("x^2 - 3*x*y + y^3", &r, &names, 0).unwrap();
        assert_eq!(p.leading().unwrap().0, &vec![0, 3]);
        assert!(!p.is_homogeneous());
        assert_eq!(p.render(&names), "y^3 + x^2 - 3*x*y");
        assert_eq!(Poly::parse(&p.render(&names), &r, &names, 0).unwrap(), p);
        assert_eq!(p.partial(0), Poly::parse("2*x - 3*y", &r, &names, 0).unwrap());
        assert!(Poly::parse("z", &r, &names, 0).is_err());
    }
}
