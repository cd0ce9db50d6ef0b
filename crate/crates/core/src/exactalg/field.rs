use num_rational::BigRational;
use num_traits::{One, Zero};

/// Reduced row echelon form in place; returns pivot columns.
pub(crate) fn rref(a: &mut Vec<Vec<BigRational>>, ncols: usize) -> Vec<usize> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let (src, dst) = if i < r {
                    let (lo, hi) = a.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = a.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    if !s.is_zero() {
                        *d -= &f * s;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    pivots
}

/// Basis of the right kernel of a dense matrix.
pub(crate) fn kernel_basis(m: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (row, &pc) in a.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

pub(crate) fn rank(m: &[Vec<BigRational>], ncols: usize) -> usize {
    let mut a = m.to_vec();
    rref(&mut a, ncols).len()
}

/// Solves m·x = v.
pub(crate) fn solve(m: &[Vec<BigRational>], ncols: usize, v: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .zip(v)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let pivots = rref(&mut a, ncols + 1);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (row, &pc) in a.iter().zip(&pivots) {
        x[pc] = row[ncols].clone();
    }
    Some(x)
}
