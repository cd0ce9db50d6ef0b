use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{ExactAlgError, IntMatrix, RingKind};

pub(crate) struct Snf {
    pub diag: Vec<BigInt>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

struct State {
    a: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    v: Vec<Vec<BigInt>>,
    rows: usize,
    cols: usize,
    track: bool,
}

impl State {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            if self.track {
                self.u.swap(i, j);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for r in self.a.iter_mut() {
                r.swap(i, j);
            }
            if self.track {
                for r in self.v.iter_mut() {
                    r.swap(i, j);
                }
            }
        }
    }

    /// row_i -= q·row_t
    fn row_sub(&mut self, i: usize, t: usize, q: &BigInt) {
        let (src, dst) = two_mut(&mut self.a, t, i);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            if !s.is_zero() {
                *d -= q * s;
            }
        }
        if self.track {
            let (src, dst) = two_mut(&mut self.u, t, i);
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                if !s.is_zero() {
                    *d -= q * s;
                }
            }
        }
    }

    /// col_j -= q·col_t
    fn col_sub(&mut self, j: usize, t: usize, q: &BigInt) {
        for r in self.a.iter_mut() {
            if !r[t].is_zero() {
                let s = q * &r[t];
                r[j] -= s;
            }
        }
        if self.track {
            for r in self.v.iter_mut() {
                if !r[t].is_zero() {
                    let s = q * &r[t];
                    r[j] -= s;
                }
            }
        }
    }

    fn negate_row(&mut self, t: usize) {
        for x in self.a[t].iter_mut() {
            *x = -&*x;
        }
        if self.track {
            for x in self.u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }

    fn min_in(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = &self.a[i][j];
                if !x.is_zero() {
                    let ab = x.abs();
                    if best.as_ref().is_none_or(|b| ab < b.2) {
                        let one = ab.is_one();
                        best = Some((i, j, ab));
                        if one {
                            return best.map(|b| (b.0, b.1));
                        }
                    }
                }
            }
        }
        best.map(|b| (b.0, b.1))
    }
}

fn two_mut<T>(v: &mut [T], src: usize, dst: usize) -> (&T, &mut T) {
    assert_ne!(src, dst);
    if src < dst {
        let (a, b) = v.split_at_mut(dst);
        (&a[src], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(src);
        (&b[0], &mut a[dst])
    }
}

pub(crate) fn snf_dense(a: Vec<Vec<BigInt>>, rows: usize, cols: usize, track: bool) -> Snf {
    let mut s = State {
        a,
        u: if track { identity(rows) } else { vec![] },
        v: if track { identity(cols) } else { vec![] },
        rows,
        cols,
        track,
    };
    let r = rows.min(cols);
    let mut diag = Vec::new();
    for t in 0..r {
        let Some((pi, pj)) = s.min_in(t) else { break };
        s.swap_rows(t, pi);
        s.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !s.a[i][t].is_zero() {
                    let q = s.a[i][t].div_floor(&s.a[t][t]);
                    s.row_sub(i, t, &q);
                    if !s.a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !s.a[t][j].is_zero() {
                    let q = s.a[t][j].div_floor(&s.a[t][t]);
                    s.col_sub(j, t, &q);
                    if !s.a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // smallest remainder in row t or column t becomes the new pivot
                let mut best = (t, t, s.a[t][t].abs());
                for i in t + 1..rows {
                    let x = s.a[i][t].abs();
                    if !x.is_zero() && x < best.2 {
                        best = (i, t, x);
                    }
                }
                for j in t + 1..cols {
                    let x = s.a[t][j].abs();
                    if !x.is_zero() && x < best.2 {
                        best = (t, j, x);
                    }
                }
                s.swap_rows(t, best.0);
                s.swap_cols(t, best.1);
                continue;
            }
            let piv = s.a[t][t].clone();
            let mut bad = None;
            'find: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&s.a[i][j] % &piv).is_zero() {
                        bad = Some(i);
                        break 'find;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let m1 = -BigInt::one();
                    s.row_sub(t, i, &m1);
                }
                None => break,
            }
        }
        if s.a[t][t].is_negative() {
            s.negate_row(t);
        }
        diag.push(s.a[t][t].clone());
    }
    Snf { diag, u: s.u, v: s.v, d: s.a }
}

/// Smith normal form over ℤ: returns (D, U, V) with U·m·V = D.
pub fn smith_normal_form(m: &IntMatrix) -> Result<(IntMatrix, IntMatrix, IntMatrix), ExactAlgError> {
    if *m.ring().kind() != RingKind::Integers {
        return Err(ExactAlgError::WrongRing { expected: "Z", got: m.ring().to_string() });
    }
    let (rows, cols) = (m.rows(), m.cols());
    let s = snf_dense(m.dense_bigint(), rows, cols, true);
    let ring = m.ring();
    Ok((
        IntMatrix::from_dense_bigint(ring, &s.d, cols),
        IntMatrix::from_dense_bigint(ring, &s.u, rows),
        IntMatrix::from_dense_bigint(ring, &s.v, cols),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::BaseDpRing;

    fn check(rows: &[Vec<i64>]) -> Vec<BigInt> {
        let z = BaseDpRing::integers();
        let m = IntMatrix::from_i64(&z, rows);
        let (d, u, v) = smith_normal_form(&m).unwrap();
        assert_eq!(u.mul(&m).unwrap().mul(&v).unwrap(), d);
        assert!(u.determinant().unwrap().to_bigint().unwrap().abs().is_one());
        assert!(v.determinant().unwrap().to_bigint().unwrap().abs().is_one());
        let k = rows.len().min(rows[0].len());
        let diag: Vec<BigInt> = (0..k).map(|i| d.get(i, i).to_bigint().unwrap()).collect();
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                if i != j {
                    assert!(d.get(i, j).is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            if !w[0].is_zero() {
                assert!((&w[1] % &w[0]).is_zero());
            } else {
                assert!(w[1].is_zero());
            }
        }
        diag
    }

    #[test]
    fn documented_cases() {
        assert_eq!(check(&[vec![1, 0], vec![0, 1]]), vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(check(&[vec![2, 4], vec![6, 8]]), vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(check(&[vec![0]]), vec![BigInt::from(0)]);
    }

    #[test]
    fn divisibility_repair() {
        assert_eq!(check(&[vec![2, 0], vec![0, 3]]), vec![BigInt::from(1), BigInt::from(6)]);
        check(&[vec![4, 6, 10], vec![6, 9, 15], vec![1, 0, 7]]);
        check(&[vec![0, 0, 3], vec![0, 5, 0]]);
    }
}
