use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::ring::residue_u64;
use super::{BaseDpRing, Coefficient, ExactAlgError, RingKind};

/// Matrix over a base ring, stored as sorted sparse rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    ring: BaseDpRing,
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, Coefficient)>>,
}

impl IntMatrix {
    pub fn zeros(ring: &BaseDpRing, rows: usize, cols: usize) -> Self {
        IntMatrix { ring: ring.clone(), rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(ring: &BaseDpRing, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i].push((i, ring.one()));
        }
        m
    }

    pub fn from_rows(ring: &BaseDpRing, rows: Vec<Vec<Coefficient>>, cols: usize) -> Result<Self, ExactAlgError> {
        let mut m = Self::zeros(ring, rows.len(), cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(ExactAlgError::DimensionMismatch(format!("row {i} has {} entries, expected {cols}", r.len())));
            }
            m.data[i] = r.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        }
        Ok(m)
    }

    /// Convenience constructor; entries are mapped into the ring.
    pub fn from_i64(ring: &BaseDpRing, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rs = rows.iter().map(|r| r.iter().map(|&a| ring.from_i64(a)).collect()).collect();
        Self::from_rows(ring, rs, cols).expect("rectangular input")
    }

    /// Builds from sparse columns; entries are assumed canonical in the ring.
    pub fn from_columns(ring: &BaseDpRing, rows: usize, columns: &[Vec<(usize, Coefficient)>]) -> Self {
        let mut m = Self::zeros(ring, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, c) in col {
                if !c.is_zero() {
                    m.data[*i].push((j, c.clone()));
                }
            }
        }
        m
    }

    pub fn from_sparse_rows(ring: &BaseDpRing, cols: usize, rows: Vec<Vec<(usize, Coefficient)>>) -> Self {
        let mut data = rows;
        for r in data.iter_mut() {
            r.retain(|(_, c)| !c.is_zero());
            r.sort_by_key(|(j, _)| *j);
        }
        IntMatrix { ring: ring.clone(), rows: data.len(), cols, data }
    }

    pub fn ring(&self) -> &BaseDpRing {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_entries(&self, i: usize) -> &[(usize, Coefficient)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Coefficient {
        match self.data[i].binary_search_by_key(&j, |(k, _)| *k) {
            Ok(pos) => self.data[i][pos].1.clone(),
            Err(_) => self.ring.zero(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: Coefficient) {
        let row = &mut self.data[i];
        match row.binary_search_by_key(&j, |(k, _)| *k) {
            Ok(pos) => {
                if c.is_zero() {
                    row.remove(pos);
                } else {
                    row[pos].1 = c;
                }
            }
            Err(pos) => {
                if !c.is_zero() {
                    row.insert(pos, (j, c));
                }
            }
        }
    }

    pub fn push_row(&mut self, mut row: Vec<(usize, Coefficient)>) {
        row.retain(|(_, c)| !c.is_zero());
        row.sort_by_key(|(j, _)| *j);
        self.data.push(row);
        self.rows += 1;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, ExactAlgError> {
        if self.cols != other.rows {
            return Err(ExactAlgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ring = &self.ring;
        let mut out = IntMatrix::zeros(ring, self.rows, other.cols);
        let mut acc: Vec<Option<Coefficient>> = vec![None; other.cols];
        let mut touched = Vec::new();
        for i in 0..self.rows {
            for (k, a) in &self.data[i] {
                for (j, b) in &other.data[*k] {
                    let p = ring.mul(a, b);
                    match &mut acc[*j] {
                        Some(s) => *s = ring.add(s, &p),
                        slot @ None => {
                            *slot = Some(p);
                            touched.push(*j);
                        }
                    }
                }
            }
            touched.sort_unstable();
            for j in touched.drain(..) {
                if let Some(c) = acc[j].take() {
                    if !c.is_zero() {
                        out.data[i].push((j, c));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Coefficient]) -> Result<Vec<Coefficient>, ExactAlgError> {
        if v.len() != self.cols {
            return Err(ExactAlgError::DimensionMismatch(format!("{}x{} times vector of length {}", self.rows, self.cols, v.len())));
        }
        Ok(self
            .data
            .iter()
            .map(|r| r.iter().fold(self.ring.zero(), |s, (j, a)| self.ring.add(&s, &self.ring.mul(a, &v[*j]))))
            .collect())
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(&self.ring, self.cols, self.rows);
        for (i, r) in self.data.iter().enumerate() {
            for (j, c) in r {
                out.data[*j].push((i, c.clone()));
            }
        }
        out
    }

    pub fn sub(&self, other: &IntMatrix) -> Result<IntMatrix, ExactAlgError> {
        self.add_scaled(other, &self.ring.from_i64(-1))
    }

    pub fn add(&self, other: &IntMatrix) -> Result<IntMatrix, ExactAlgError> {
        self.add_scaled(other, &self.ring.one())
    }

    fn add_scaled(&self, other: &IntMatrix, s: &Coefficient) -> Result<IntMatrix, ExactAlgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(ExactAlgError::DimensionMismatch("matrix sum".into()));
        }
        let mut out = self.clone();
        for (i, r) in other.data.iter().enumerate() {
            for (j, c) in r {
                let v = self.ring.add(&out.get(i, *j), &self.ring.mul(s, c));
                out.set(i, *j, v);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Coefficient) -> IntMatrix {
        let mut out = self.clone();
        for r in out.data.iter_mut() {
            for e in r.iter_mut() {
                e.1 = self.ring.mul(&e.1, s);
            }
            r.retain(|(_, c)| !c.is_zero());
        }
        out
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &IntMatrix) -> Result<IntMatrix, ExactAlgError> {
        if self.rows != other.rows {
            return Err(ExactAlgError::DimensionMismatch("hstack row counts".into()));
        }
        let mut out = self.clone();
        out.cols += other.cols;
        for (i, r) in other.data.iter().enumerate() {
            out.data[i].extend(r.iter().map(|(j, c)| (j + self.cols, c.clone())));
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &IntMatrix) -> Result<IntMatrix, ExactAlgError> {
        if self.cols != other.cols {
            return Err(ExactAlgError::DimensionMismatch("vstack column counts".into()));
        }
        let mut out = self.clone();
        out.rows += other.rows;
        out.data.extend(other.data.iter().cloned());
        Ok(out)
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        IntMatrix { ring: self.ring.clone(), rows: idx.len(), cols: self.cols, data: idx.iter().map(|&i| self.data[i].clone()).collect() }
    }

    pub fn to_dense(&self) -> Vec<Vec<Coefficient>> {
        let mut out = vec![vec![self.ring.zero(); self.cols]; self.rows];
        for (i, r) in self.data.iter().enumerate() {
            for (j, c) in r {
                out[i][*j] = c.clone();
            }
        }
        out
    }

    pub(crate) fn dense_bigint(&self) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![BigInt::from(0); self.cols]; self.rows];
        for (i, r) in self.data.iter().enumerate() {
            for (j, c) in r {
                out[i][*j] = c.to_bigint().expect("integer entry");
            }
        }
        out
    }

    pub(crate) fn dense_u64(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0u64; self.cols]; self.rows];
        for (i, r) in self.data.iter().enumerate() {
            for (j, c) in r {
                out[i][*j] = residue_u64(c);
            }
        }
        out
    }

    pub(crate) fn dense_rational(&self) -> Vec<Vec<BigRational>> {
        let mut out = vec![vec![BigRational::from_integer(BigInt::from(0)); self.cols]; self.rows];
        for (i, r) in self.data.iter().enumerate() {
            for (j, c) in r {
                out[i][*j] = c.to_rational();
            }
        }
        out
    }

    pub(crate) fn from_dense_bigint(ring: &BaseDpRing, m: &[Vec<BigInt>], cols: usize) -> IntMatrix {
        let rows = m.iter().map(|r| r.iter().enumerate().map(|(j, a)| (j, ring.from_bigint(a))).collect()).collect();
        Self::from_sparse_rows(ring, cols, rows)
    }

    pub(crate) fn from_dense_u64(ring: &BaseDpRing, m: &[Vec<u64>], cols: usize) -> IntMatrix {
        let rows = m.iter().map(|r| r.iter().enumerate().map(|(j, a)| (j, ring.from_u64(*a))).collect()).collect();
        Self::from_sparse_rows(ring, cols, rows)
    }

    /// Exact determinant of a square matrix (fraction-free elimination over ℚ).
    pub fn determinant(&self) -> Result<Coefficient, ExactAlgError> {
        if self.rows != self.cols {
            return Err(ExactAlgError::DimensionMismatch("determinant of non-square matrix".into()));
        }
        let mut a = self.dense_rational();
        let n = self.rows;
        let mut det = BigRational::from_integer(BigInt::from(1));
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| a[i][c] != BigRational::from_integer(BigInt::from(0))) else {
                return Ok(self.ring.zero());
            };
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            let piv = a[c][c].clone();
            det *= piv.clone();
            for i in c + 1..n {
                if a[i][c] != BigRational::from_integer(BigInt::from(0)) {
                    let f = &a[i][c] / &piv;
                    for j in c..n {
                        let t = &f * &a[c][j];
                        a[i][j] -= t;
                    }
                }
            }
        }
        match self.ring.kind() {
            RingKind::Rationals => Ok(Coefficient::Rat(det)),
            _ => Ok(self.ring.from_bigint(&det.to_integer())),
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.to_dense();
        write!(f, "[")?;
        for (i, r) in d.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, c) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
