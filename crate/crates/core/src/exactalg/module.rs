use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::howell::{cyclic_orders, howell_reduce, howell_rows, left_kernel};
use super::snf::snf_dense;
use super::{field, BaseDpRing, Coefficient, ExactAlgError, IntMatrix, RingKind};

/// Finitely generated module over the base ring: A^free_rank ⊕ ⊕ A/(d_i), d_1 | d_2 | ….
///
/// Over ℤ/N the free part counts summands isomorphic to ℤ/N itself and every torsion order divides N.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleDescription {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl ModuleDescription {
    pub fn zero() -> Self {
        ModuleDescription { free_rank: 0, torsion: vec![] }
    }

    pub fn free(rank: usize) -> Self {
        ModuleDescription { free_rank: rank, torsion: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// The cyclic module A/(g), normalized for the ring.
    pub fn cyclic(ring: &BaseDpRing, g: &BigInt) -> Self {
        match ring.kind() {
            RingKind::Rationals => {
                if g.is_zero() {
                    Self::free(1)
                } else {
                    Self::zero()
                }
            }
            RingKind::Integers => Self::from_orders(ring, vec![g.clone()]),
            RingKind::IntegersModN(n) => Self::from_orders(ring, vec![g.gcd(&BigInt::from(*n))]),
        }
    }

    /// Builds from cyclic summand orders (0 meaning free over ℤ, N meaning free over ℤ/N).
    pub(crate) fn from_orders(ring: &BaseDpRing, orders: Vec<BigInt>) -> Self {
        let free_marker = match ring.kind() {
            RingKind::IntegersModN(n) => BigInt::from(*n),
            _ => BigInt::zero(),
        };
        let mut free_rank = 0;
        let mut tors: Vec<BigInt> = Vec::new();
        for o in orders {
            if o == free_marker {
                free_rank += 1;
            } else if !o.is_one() && !o.is_zero() {
                tors.push(o);
            }
        }
        // normalize to a divisibility chain
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..tors.len() {
                for j in i + 1..tors.len() {
                    let g = tors[i].gcd(&tors[j]);
                    let l = tors[i].lcm(&tors[j]);
                    if g != tors[i] || l != tors[j] {
                        tors[i] = g;
                        tors[j] = l;
                        changed = true;
                    }
                }
            }
        }
        tors.retain(|t| !t.is_one());
        // over ℤ/N with N not a prime power, merging can produce ℤ/N itself
        let merged = tors.iter().filter(|t| **t == free_marker).count();
        free_rank += merged;
        tors.retain(|t| *t != free_marker);
        tors.sort();
        ModuleDescription { free_rank, torsion: tors }
    }

    pub fn direct_sum(&self, other: &Self, ring: &BaseDpRing) -> Self {
        let marker = match ring.kind() {
            RingKind::IntegersModN(n) => BigInt::from(*n),
            _ => BigInt::zero(),
        };
        let mut orders: Vec<BigInt> = self.torsion.iter().chain(other.torsion.iter()).cloned().collect();
        orders.extend(std::iter::repeat_n(marker, self.free_rank + other.free_rank));
        Self::from_orders(ring, orders)
    }
}

impl fmt::Display for ModuleDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("A^{}", self.free_rank));
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for ModuleDescription {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ModuleDescription", 2)?;
        st.serialize_field("free_rank", &self.free_rank)?;
        let tors: Vec<TorsionEntry> = self.torsion.iter().map(TorsionEntry).collect();
        st.serialize_field("torsion", &tors)?;
        st.end()
    }
}

struct TorsionEntry<'a>(&'a BigInt);

impl Serialize for TorsionEntry<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

/// Invariant-factor description of A^gens / rowspan(rels).
pub fn module_from_relations(gens: usize, rels: &IntMatrix) -> Result<ModuleDescription, ExactAlgError> {
    if rels.cols() != gens {
        return Err(ExactAlgError::DimensionMismatch(format!("relations have {} columns, expected {gens}", rels.cols())));
    }
    let ring = rels.ring();
    match ring.kind() {
        RingKind::Integers => {
            let s = snf_dense(rels.dense_bigint(), rels.rows(), gens, false);
            let mut orders: Vec<BigInt> = s.diag.iter().filter(|d| !d.is_zero()).cloned().collect();
            orders.extend(std::iter::repeat_n(BigInt::zero(), gens - orders.len()));
            Ok(ModuleDescription::from_orders(ring, orders))
        }
        RingKind::Rationals => {
            let r = field::rank(&rels.dense_rational(), gens);
            Ok(ModuleDescription::free(gens - r))
        }
        RingKind::IntegersModN(n) => {
            let orders = cyclic_orders(rels.dense_u64(), gens, *n);
            Ok(ModuleDescription::from_orders(ring, orders.into_iter().map(BigInt::from).collect()))
        }
    }
}

/// Columns generating the right kernel {x : m·x = 0}.
pub fn kernel(m: &IntMatrix) -> IntMatrix {
    let ring = m.ring();
    let cols = m.cols();
    let vecs: Vec<Vec<Coefficient>> = match ring.kind() {
        RingKind::Integers => {
            let s = snf_dense(m.dense_bigint(), m.rows(), cols, true);
            let rank = s.diag.iter().filter(|d| !d.is_zero()).count();
            (rank..cols).map(|j| (0..cols).map(|i| ring.from_bigint(&s.v[i][j])).collect()).collect()
        }
        RingKind::Rationals => field::kernel_basis(&m.dense_rational(), cols)
            .into_iter()
            .map(|v| v.into_iter().map(Coefficient::Rat).collect())
            .collect(),
        RingKind::IntegersModN(n) => {
            let t = m.transpose().dense_u64();
            left_kernel(&t, m.rows(), *n).into_iter().map(|v| v.iter().map(|&a| ring.from_u64(a)).collect()).collect()
        }
    };
    let columns: Vec<Vec<(usize, Coefficient)>> =
        vecs.into_iter().map(|v| v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect()).collect();
    IntMatrix::from_columns(ring, cols, &columns)
}

/// Some x with m·x = v, or None when v is not in the column span.
pub fn solve_linear(m: &IntMatrix, v: &[Coefficient]) -> Result<Option<Vec<Coefficient>>, ExactAlgError> {
    if v.len() != m.rows() {
        return Err(ExactAlgError::DimensionMismatch(format!("matrix has {} rows, vector has {} entries", m.rows(), v.len())));
    }
    let ring = m.ring();
    let cols = m.cols();
    match ring.kind() {
        RingKind::Rationals => {
            let rhs: Vec<BigRational> = v.iter().map(|c| c.to_rational()).collect();
            Ok(field::solve(&m.dense_rational(), cols, &rhs).map(|x| x.into_iter().map(Coefficient::Rat).collect()))
        }
        RingKind::Integers => {
            let s = snf_dense(m.dense_bigint(), m.rows(), cols, true);
            let vb: Vec<BigInt> = v.iter().map(|c| c.to_bigint().expect("integer")).collect();
            let uv: Vec<BigInt> = s.u.iter().map(|row| row.iter().zip(&vb).map(|(a, b)| a * b).sum()).collect();
            let mut y = vec![BigInt::zero(); cols];
            for (i, val) in uv.iter().enumerate() {
                let d = s.diag.get(i).cloned().unwrap_or_else(BigInt::zero);
                if d.is_zero() {
                    if !val.is_zero() {
                        return Ok(None);
                    }
                } else {
                    if !(val % &d).is_zero() {
                        return Ok(None);
                    }
                    y[i] = val / &d;
                }
            }
            let x = (0..cols).map(|i| ring.from_bigint(&(0..cols).map(|j| &s.v[i][j] * &y[j]).sum::<BigInt>())).collect();
            Ok(Some(x))
        }
        RingKind::IntegersModN(n) => {
            let n = *n;
            let mt = m.transpose().dense_u64();
            let r = m.rows();
            let aug: Vec<Vec<u64>> = mt
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut w = row.clone();
                    w.extend((0..cols).map(|k| u64::from(k == i)));
                    w
                })
                .collect();
            let h = howell_rows(aug, r + cols, n);
            let hv: Vec<(usize, Vec<u64>)> = h.iter().filter(|(c, _)| *c < r).map(|(c, row)| (*c, row[..r].to_vec())).collect();
            let target: Vec<u64> = v.iter().map(super::residue_u64).collect();
            let Some(q) = howell_reduce(&hv, &target, n) else { return Ok(None) };
            let mut x = vec![0u64; cols];
            for (k, (_, row)) in h.iter().filter(|(c, _)| *c < r).enumerate() {
                if q[k] != 0 {
                    for j in 0..cols {
                        x[j] = super::howell::addm(x[j], super::howell::mulm(q[k], row[r + j], n), n);
                    }
                }
            }
            Ok(Some(x.into_iter().map(|a| ring.from_u64(a)).collect()))
        }
    }
}

/// True iff v lies in the row span of m.
pub fn row_span_contains(m: &IntMatrix, v: &[Coefficient]) -> Result<bool, ExactAlgError> {
    Ok(solve_linear(&m.transpose(), v)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_module_cases() {
        let z = BaseDpRing::integers();
        assert_eq!(module_from_relations(1, &IntMatrix::zeros(&z, 0, 1)).unwrap(), ModuleDescription::free(1));
        let m = module_from_relations(2, &IntMatrix::from_i64(&z, &[vec![2, 0], vec![0, 3]])).unwrap();
        assert_eq!(m, ModuleDescription { free_rank: 0, torsion: vec![BigInt::from(6)] });
        let z4 = BaseDpRing::modular(4).unwrap();
        let m = module_from_relations(1, &IntMatrix::from_i64(&z4, &[vec![2]])).unwrap();
        assert_eq!(m, ModuleDescription { free_rank: 0, torsion: vec![BigInt::from(2)] });
    }

    #[test]
    fn documented_solve_cases() {
        let z = BaseDpRing::integers();
        let id = IntMatrix::identity(&z, 3);
        let v: Vec<Coefficient> = [4, -1, 7].iter().map(|&a| z.from_i64(a)).collect();
        assert_eq!(solve_linear(&id, &v).unwrap(), Some(v.clone()));
        let two = IntMatrix::from_i64(&z, &[vec![2]]);
        assert_eq!(solve_linear(&two, &[z.one()]).unwrap(), None);
        let z4 = BaseDpRing::modular(4).unwrap();
        let two4 = IntMatrix::from_i64(&z4, &[vec![2]]);
        let x = solve_linear(&two4, &[z4.from_i64(2)]).unwrap().unwrap();
        assert!(x[0] == z4.from_i64(1) || x[0] == z4.from_i64(3));
        assert!(solve_linear(&id, &[z.one()]).is_err());
    }

    #[test]
    fn kernels_annihilate() {
        for ring in [BaseDpRing::integers(), BaseDpRing::rationals(), BaseDpRing::modular(12).unwrap()] {
            let m = IntMatrix::from_i64(&ring, &[vec![2, 4, 6], vec![3, 6, 9]]);
            let k = kernel(&m);
            assert!(m.mul(&k).unwrap().is_zero());
            assert!(k.cols() >= 2);
        }
    }
}
