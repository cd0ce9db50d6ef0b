use super::{ExactAlgError, IntMatrix, RingKind};

#[inline]
pub(crate) fn mulm(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

#[inline]
pub(crate) fn addm(a: u64, b: u64, n: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % n as u128) as u64
}

#[inline]
pub(crate) fn subm(a: u64, b: u64, n: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        n - (b - a)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

fn to_res(x: i128, n: u64) -> u64 {
    x.rem_euclid(n as i128) as u64
}

/// Unimodular [[s,t],[u,v]] with s·a + t·b = g and u·a + v·b = 0.
pub(crate) fn gcdex(a: u64, b: u64, n: u64) -> (u64, u64, u64, u64) {
    if a != 0 && b % a == 0 {
        return (1, 0, subm(0, b / a, n), 1);
    }
    let (g, s, t) = egcd(a as i128, b as i128);
    let u = -(b as i128) / g;
    let v = (a as i128) / g;
    (to_res(s, n), to_res(t, n), to_res(u, n), to_res(v, n))
}

pub(crate) fn inv_mod(a: u64, n: u64) -> Option<u64> {
    let (g, x, _) = egcd(a as i128, n as i128);
    if g == 1 {
        Some(to_res(x, n))
    } else {
        None
    }
}

/// Unit u with u·a ≡ gcd(a, n) (mod n).
pub(crate) fn unit_normalizer(a: u64, n: u64) -> u64 {
    if a == 0 {
        return 1;
    }
    let g = gcd(a, n);
    let n1 = n / g;
    if n1 == 1 {
        return 1;
    }
    let u0 = inv_mod((a / g) % n1, n1).expect("coprime after dividing by gcd");
    let mut u = u0;
    while gcd(u, n) != 1 {
        u += n1;
    }
    u % n
}

/// Howell form of the row span. Returns (pivot column, row) pairs in echelon order.
pub(crate) fn howell_rows(rows: Vec<Vec<u64>>, ncols: usize, n: u64) -> Vec<(usize, Vec<u64>)> {
    let mut pool: Vec<Vec<u64>> = rows.into_iter().filter(|r| r.iter().any(|&x| x != 0)).collect();
    let mut result: Vec<(usize, Vec<u64>)> = Vec::new();
    for col in 0..ncols {
        let mut piv: Option<Vec<u64>> = None;
        let mut rest = Vec::with_capacity(pool.len());
        for mut r in pool.drain(..) {
            if r[col] == 0 {
                rest.push(r);
                continue;
            }
            match piv.as_mut() {
                None => piv = Some(r),
                Some(p) => {
                    let (s, t, u, v) = gcdex(p[col], r[col], n);
                    if s == 1 && t == 0 && v == 1 {
                        for j in col..ncols {
                            if p[j] != 0 {
                                r[j] = addm(r[j], mulm(u, p[j], n), n);
                            }
                        }
                    } else {
                        for j in col..ncols {
                            let (pj, rj) = (p[j], r[j]);
                            if pj == 0 && rj == 0 {
                                continue;
                            }
                            p[j] = addm(mulm(s, pj, n), mulm(t, rj, n), n);
                            r[j] = addm(mulm(u, pj, n), mulm(v, rj, n), n);
                        }
                    }
                    debug_assert_eq!(r[col], 0);
                    if r.iter().any(|&x| x != 0) {
                        rest.push(r);
                    }
                }
            }
        }
        pool = rest;
        if let Some(mut p) = piv {
            let u = unit_normalizer(p[col], n);
            if u != 1 {
                for x in p[col..].iter_mut() {
                    *x = mulm(*x, u, n);
                }
            }
            let g = p[col];
            let ann = n / g;
            if ann != n && g != 1 {
                let a: Vec<u64> = p.iter().map(|&x| mulm(x, ann, n)).collect();
                if a.iter().any(|&x| x != 0) {
                    pool.push(a);
                }
            }
            result.push((col, p));
        }
    }
    // reduce entries above pivots into [0, pivot)
    for i in 0..result.len() {
        for j in i + 1..result.len() {
            let (cj, gj) = (result[j].0, result[j].1[result[j].0]);
            let x = result[i].1[cj];
            let q = x / gj;
            if q != 0 {
                let (head, tail) = result.split_at_mut(j);
                let row_i = &mut head[i].1;
                let row_j = &tail[0].1;
                for k in cj..ncols {
                    if row_j[k] != 0 {
                        row_i[k] = subm(row_i[k], mulm(q, row_j[k], n), n);
                    }
                }
            }
        }
    }
    result
}

/// Reduces v by a Howell basis; returns the combination used, or None if v is outside the span.
pub(crate) fn howell_reduce(h: &[(usize, Vec<u64>)], v: &[u64], n: u64) -> Option<Vec<u64>> {
    let mut v = v.to_vec();
    let mut coeffs = vec![0u64; h.len()];
    for (idx, (c, row)) in h.iter().enumerate() {
        let x = v[*c];
        if x == 0 {
            continue;
        }
        let g = row[*c];
        if x % g != 0 {
            return None;
        }
        let q = x / g;
        coeffs[idx] = q;
        for k in *c..v.len() {
            if row[k] != 0 {
                v[k] = subm(v[k], mulm(q, row[k], n), n);
            }
        }
    }
    if v.iter().all(|&x| x == 0) {
        Some(coeffs)
    } else {
        None
    }
}

/// Generators of the left kernel {y : y·b = 0} of a dense matrix with `ncols` columns.
pub(crate) fn left_kernel(b: &[Vec<u64>], ncols: usize, n: u64) -> Vec<Vec<u64>> {
    let r = b.len();
    let aug: Vec<Vec<u64>> = b
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut v = Vec::with_capacity(ncols + r);
            v.extend_from_slice(row);
            v.extend((0..r).map(|k| u64::from(k == i)));
            v
        })
        .collect();
    howell_rows(aug, ncols + r, n)
        .into_iter()
        .filter(|(c, _)| *c >= ncols)
        .map(|(_, row)| row[ncols..].to_vec())
        .collect()
}

/// Invariant orders of (ℤ/n)^ncols / rowspan: one divisor of n per column (n means free summand).
pub(crate) fn cyclic_orders(rows: Vec<Vec<u64>>, ncols: usize, n: u64) -> Vec<u64> {
    let h = howell_rows(rows, ncols, n);
    let mut a: Vec<Vec<u64>> = h.into_iter().map(|(_, r)| r).collect();
    let rows = a.len();
    let mut orders = Vec::new();
    let mut t = 0;
    let mut used_cols = vec![false; ncols];
    while t < rows {
        // pivot: entry with smallest gcd with n
        let mut best: Option<(usize, usize, u64)> = None;
        for i in t..rows {
            for j in 0..ncols {
                if used_cols[j] || a[i][j] == 0 {
                    continue;
                }
                let g = gcd(a[i][j], n);
                if best.is_none_or(|b| g < b.2) {
                    best = Some((i, j, g));
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        a.swap(t, pi);
        loop {
            let u = unit_normalizer(a[t][pj], n);
            if u != 1 {
                for x in a[t].iter_mut() {
                    *x = mulm(*x, u, n);
                }
            }
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][pj] != 0 {
                    let (s, tt, u, v) = gcdex(a[t][pj], a[i][pj], n);
                    for j in 0..ncols {
                        let (x, y) = (a[t][j], a[i][j]);
                        a[t][j] = addm(mulm(s, x, n), mulm(tt, y, n), n);
                        a[i][j] = addm(mulm(u, x, n), mulm(v, y, n), n);
                    }
                }
            }
            for j in 0..ncols {
                if j == pj || used_cols[j] || a[t][j] == 0 {
                    continue;
                }
                let (s, tt, u, v) = gcdex(a[t][pj], a[t][j], n);
                for row in a.iter_mut() {
                    let (x, y) = (row[pj], row[j]);
                    row[pj] = addm(mulm(s, x, n), mulm(tt, y, n), n);
                    row[j] = addm(mulm(u, x, n), mulm(v, y, n), n);
                }
                clean = false;
            }
            if clean {
                break;
            }
            if (t + 1..rows).any(|i| a[i][pj] != 0) {
                continue;
            }
            if (0..ncols).all(|j| j == pj || used_cols[j] || a[t][j] == 0) {
                break;
            }
        }
        let g = gcd(a[t][pj], n);
        orders.push(g);
        used_cols[pj] = true;
        t += 1;
    }
    for used in used_cols {
        if !used {
            orders.push(n);
        }
    }
    orders
}

/// Howell canonical form of the row span over ℤ/N.
pub fn howell_form(m: &IntMatrix) -> Result<IntMatrix, ExactAlgError> {
    let RingKind::IntegersModN(n) = *m.ring().kind() else {
        return Err(ExactAlgError::WrongRing { expected: "Z/N", got: m.ring().to_string() });
    };
    let h = howell_rows(m.dense_u64(), m.cols(), n);
    let rows: Vec<Vec<u64>> = h.into_iter().map(|(_, r)| r).collect();
    Ok(IntMatrix::from_dense_u64(m.ring(), &rows, m.cols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::BaseDpRing;
    use std::collections::BTreeSet;

    fn span(rows: &[Vec<u64>], n: u64) -> BTreeSet<Vec<u64>> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut s = BTreeSet::new();
        s.insert(vec![0; cols]);
        loop {
            let mut next = s.clone();
            for v in &s {
                for r in rows {
                    let w: Vec<u64> = v.iter().zip(r).map(|(a, b)| (a + b) % n).collect();
                    next.insert(w);
                }
            }
            if next.len() == s.len() {
                return s;
            }
            s = next;
        }
    }

    #[test]
    fn howell_documented_cases() {
        let r = BaseDpRing::modular(4).unwrap();
        let id = IntMatrix::identity(&r, 2);
        assert_eq!(howell_form(&id).unwrap(), id);
        let two = IntMatrix::from_i64(&r, &[vec![2]]);
        assert_eq!(howell_form(&two).unwrap(), two);
        let m = IntMatrix::from_i64(&r, &[vec![2, 0], vec![0, 2], vec![1, 1]]);
        let h = howell_form(&m).unwrap();
        let s1 = span(&m.dense_u64(), 4);
        let s2 = span(&h.dense_u64(), 4);
        assert_eq!(s1.len(), 8);
        assert_eq!(s1, s2);
    }

    #[test]
    fn howell_is_canonical_on_equal_spans() {
        let r = BaseDpRing::modular(12).unwrap();
        let a = IntMatrix::from_i64(&r, &[vec![4, 6, 0], vec![0, 3, 9]]);
        let b = IntMatrix::from_i64(&r, &[vec![4, 9, 9], vec![0, 3, 9], vec![8, 0, 6]]);
        assert_eq!(span(&a.dense_u64(), 12), span(&b.dense_u64(), 12));
        assert_eq!(howell_form(&a).unwrap(), howell_form(&b).unwrap());
    }

    #[test]
    fn kernel_mod_n() {
        let k = left_kernel(&[vec![2], vec![2]], 1, 4);
        let s = span(&k, 4);
        let expect: BTreeSet<Vec<u64>> = (0..4u64)
            .flat_map(|a| (0..4u64).map(move |b| vec![a, b]))
            .filter(|v| (2 * v[0] + 2 * v[1]) % 4 == 0)
            .collect();
        assert_eq!(s, expect);
    }

    #[test]
    fn cyclic_orders_small() {
        let mut o = cyclic_orders(vec![vec![2]], 1, 4);
        o.sort();
        assert_eq!(o, vec![2]);
        let mut o = cyclic_orders(vec![vec![2, 3]], 2, 12);
        o.sort();
        assert_eq!(o, vec![1, 12]);
    }
}
