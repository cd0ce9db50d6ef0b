use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::ExactAlgError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Integers,
    Rationals,
    IntegersModN(u64),
}

/// Divided power structure on the base ideal I₀.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PdStructure {
    /// I₀ = 0.
    Trivial,
    /// I₀ = (p) in ℤ/p^e with γ_k(p) = p^k/k!.
    StandardP { p: u64, e: u32 },
}

/// Exact scalar. Integer rings use `Int` with canonical residues, ℚ uses `Rat`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coefficient {
    Int(BigInt),
    Rat(BigRational),
}

impl Coefficient {
    pub fn to_rational(&self) -> BigRational {
        match self {
            Coefficient::Int(a) => BigRational::from_integer(a.clone()),
            Coefficient::Rat(q) => q.clone(),
        }
    }

    /// Integer value, if this is an integral representative.
    pub fn to_bigint(&self) -> Option<BigInt> {
        match self {
            Coefficient::Int(a) => Some(a.clone()),
            Coefficient::Rat(q) if q.is_integer() => Some(q.to_integer()),
            Coefficient::Rat(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Int(a) => a.is_zero(),
            Coefficient::Rat(q) => q.is_zero(),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Int(a) => write!(f, "{a}"),
            Coefficient::Rat(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Coefficient::Rat(q) => write!(f, "{}/{}", q.numer(), q.denom()),
        }
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Effect of the ideal m·A on coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModulusEffect {
    /// m·A = 0: no reduction.
    Free,
    /// m·A = A: the coefficient is killed.
    Kill,
    /// Reduce to the canonical residue modulo this positive integer.
    Reduce(BigInt),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseDpRing {
    kind: RingKind,
    pd: PdStructure,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u64;
    while q * q <= p {
        if p % q == 0 {
            return false;
        }
        q += 1;
    }
    true
}

pub(crate) fn factorial(n: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 2..=n {
        r *= i;
    }
    r
}

impl BaseDpRing {
    pub fn integers() -> Self {
        BaseDpRing { kind: RingKind::Integers, pd: PdStructure::Trivial }
    }

    pub fn rationals() -> Self {
        BaseDpRing { kind: RingKind::Rationals, pd: PdStructure::Trivial }
    }

    pub fn modular(n: u64) -> Result<Self, ExactAlgError> {
        if n < 2 {
            return Err(ExactAlgError::InvalidRing(format!("modulus must be at least 2, got {n}")));
        }
        if n > (1u64 << 62) {
            return Err(ExactAlgError::InvalidRing(format!("modulus {n} too large")));
        }
        Ok(BaseDpRing { kind: RingKind::IntegersModN(n), pd: PdStructure::Trivial })
    }

    /// ℤ/p^e with the standard divided powers on (p).
    pub fn standard_p(p: u64, e: u32) -> Result<Self, ExactAlgError> {
        if !is_prime(p) {
            return Err(ExactAlgError::InvalidRing(format!("{p} is not prime")));
        }
        if e == 0 {
            return Err(ExactAlgError::InvalidRing("exponent must be positive".into()));
        }
        let n = p
            .checked_pow(e)
            .filter(|n| *n <= (1u64 << 62))
            .ok_or_else(|| ExactAlgError::InvalidRing(format!("{p}^{e} too large")))?;
        if n < 2 {
            return Err(ExactAlgError::InvalidRing("modulus must be at least 2".into()));
        }
        Ok(BaseDpRing { kind: RingKind::IntegersModN(n), pd: PdStructure::StandardP { p, e } })
    }

    pub fn kind(&self) -> &RingKind {
        &self.kind
    }

    pub fn pd(&self) -> &PdStructure {
        &self.pd
    }

    pub fn modulus(&self) -> Option<u64> {
        match self.kind {
            RingKind::IntegersModN(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_field(&self) -> bool {
        match self.kind {
            RingKind::Rationals => true,
            RingKind::IntegersModN(n) => is_prime(n),
            RingKind::Integers => false,
        }
    }

    /// Generators of I₀.
    pub fn pd_ideal(&self) -> Vec<Coefficient> {
        match self.pd {
            PdStructure::Trivial => vec![],
            PdStructure::StandardP { p, .. } => vec![self.from_u64(p)],
        }
    }

    pub fn zero(&self) -> Coefficient {
        match self.kind {
            RingKind::Rationals => Coefficient::Rat(BigRational::zero()),
            _ => Coefficient::Int(BigInt::zero()),
        }
    }

    pub fn one(&self) -> Coefficient {
        self.from_i64(1)
    }

    pub fn from_i64(&self, a: i64) -> Coefficient {
        self.from_bigint(&BigInt::from(a))
    }

    pub fn from_u64(&self, a: u64) -> Coefficient {
        self.from_bigint(&BigInt::from(a))
    }

    pub fn from_bigint(&self, a: &BigInt) -> Coefficient {
        match self.kind {
            RingKind::Integers => Coefficient::Int(a.clone()),
            RingKind::Rationals => Coefficient::Rat(BigRational::from_integer(a.clone())),
            RingKind::IntegersModN(n) => Coefficient::Int(a.mod_floor(&BigInt::from(n))),
        }
    }

    pub fn from_rational(&self, q: &BigRational) -> Result<Coefficient, ExactAlgError> {
        match self.kind {
            RingKind::Rationals => Ok(Coefficient::Rat(q.clone())),
            RingKind::Integers => {
                if q.is_integer() {
                    Ok(Coefficient::Int(q.to_integer()))
                } else {
                    Err(ExactAlgError::NotInvertible(format!("{} is not an integer", q)))
                }
            }
            RingKind::IntegersModN(_) => {
                let num = self.from_bigint(q.numer());
                let den = self.from_bigint(q.denom());
                let inv = self
                    .inv(&den)
                    .ok_or_else(|| ExactAlgError::NotInvertible(format!("denominator {} mod {}", q.denom(), self)))?;
                Ok(self.mul(&num, &inv))
            }
        }
    }

    fn canon(&self, a: BigInt) -> Coefficient {
        match self.kind {
            RingKind::IntegersModN(n) => Coefficient::Int(a.mod_floor(&BigInt::from(n))),
            RingKind::Integers => Coefficient::Int(a),
            RingKind::Rationals => Coefficient::Rat(BigRational::from_integer(a)),
        }
    }

    pub fn add(&self, a: &Coefficient, b: &Coefficient) -> Coefficient {
        match (a, b) {
            (Coefficient::Int(x), Coefficient::Int(y)) => self.canon(x + y),
            _ => Coefficient::Rat(a.to_rational() + b.to_rational()),
        }
    }

    pub fn sub(&self, a: &Coefficient, b: &Coefficient) -> Coefficient {
        match (a, b) {
            (Coefficient::Int(x), Coefficient::Int(y)) => self.canon(x - y),
            _ => Coefficient::Rat(a.to_rational() - b.to_rational()),
        }
    }

    pub fn neg(&self, a: &Coefficient) -> Coefficient {
        match a {
            Coefficient::Int(x) => self.canon(-x),
            Coefficient::Rat(q) => Coefficient::Rat(-q),
        }
    }

    pub fn mul(&self, a: &Coefficient, b: &Coefficient) -> Coefficient {
        match (a, b) {
            (Coefficient::Int(x), Coefficient::Int(y)) => self.canon(x * y),
            _ => Coefficient::Rat(a.to_rational() * b.to_rational()),
        }
    }

    pub fn mul_int(&self, a: &Coefficient, k: &BigInt) -> Coefficient {
        match a {
            Coefficient::Int(x) => self.canon(x * k),
            Coefficient::Rat(q) => Coefficient::Rat(q * BigRational::from_integer(k.clone())),
        }
    }

    pub fn pow(&self, a: &Coefficient, k: u32) -> Coefficient {
        let mut r = self.one();
        for _ in 0..k {
            r = self.mul(&r, a);
        }
        r
    }

    pub fn is_zero(&self, a: &Coefficient) -> bool {
        a.is_zero()
    }

    pub fn inv(&self, a: &Coefficient) -> Option<Coefficient> {
        match (&self.kind, a) {
            (RingKind::Rationals, Coefficient::Rat(q)) => {
                if q.is_zero() {
                    None
                } else {
                    Some(Coefficient::Rat(q.recip()))
                }
            }
            (RingKind::Integers, Coefficient::Int(x)) => {
                if x.abs().is_one() {
                    Some(Coefficient::Int(x.clone()))
                } else {
                    None
                }
            }
            (RingKind::IntegersModN(n), Coefficient::Int(x)) => {
                let n = BigInt::from(*n);
                let e = x.extended_gcd(&n);
                if e.gcd.is_one() {
                    Some(Coefficient::Int(e.x.mod_floor(&n)))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_unit(&self, a: &Coefficient) -> bool {
        self.inv(a).is_some()
    }

    /// How the ideal m·A acts on coefficients.
    pub fn modulus_effect(&self, m: &BigInt) -> ModulusEffect {
        match self.kind {
            RingKind::Rationals => {
                if m.is_zero() {
                    ModulusEffect::Free
                } else {
                    ModulusEffect::Kill
                }
            }
            RingKind::Integers => {
                if m.is_zero() {
                    ModulusEffect::Free
                } else if m.abs().is_one() {
                    ModulusEffect::Kill
                } else {
                    ModulusEffect::Reduce(m.abs())
                }
            }
            RingKind::IntegersModN(n) => {
                let n = BigInt::from(n);
                let g = m.gcd(&n);
                if g == n {
                    ModulusEffect::Free
                } else if g.is_one() {
                    ModulusEffect::Kill
                } else {
                    ModulusEffect::Reduce(g)
                }
            }
        }
    }

    /// Canonical representative of a in A/mA.
    pub fn reduce_mod(&self, a: &Coefficient, m: &BigInt) -> Coefficient {
        self.apply_effect(a, &self.modulus_effect(m))
    }

    pub fn apply_effect(&self, a: &Coefficient, eff: &ModulusEffect) -> Coefficient {
        match eff {
            ModulusEffect::Free => a.clone(),
            ModulusEffect::Kill => self.zero(),
            ModulusEffect::Reduce(c) => match a {
                Coefficient::Int(x) => Coefficient::Int(x.mod_floor(c)),
                Coefficient::Rat(_) => self.zero(),
            },
        }
    }

    /// True iff a ∈ d·A.
    pub fn divisible_by(&self, a: &Coefficient, d: &BigInt) -> bool {
        match (&self.kind, a) {
            (RingKind::Rationals, _) => !d.is_zero() || a.is_zero(),
            (RingKind::Integers, Coefficient::Int(x)) => {
                if d.is_zero() {
                    x.is_zero()
                } else {
                    (x % d).is_zero()
                }
            }
            (RingKind::IntegersModN(n), Coefficient::Int(x)) => {
                let g = d.gcd(&BigInt::from(*n));
                (x % g).is_zero()
            }
            _ => false,
        }
    }

    /// γ_k(p) = p^k/k! for the standard structure on (p).
    pub fn gamma_of_p(&self, k: u64) -> Option<Coefficient> {
        let PdStructure::StandardP { p, .. } = self.pd else {
            return None;
        };
        let (v, unit) = split_factorial(k, p);
        let pk = BigInt::from(p).pow((k - v) as u32);
        let u = self.from_bigint(&unit);
        let inv = self.inv(&u)?;
        Some(self.mul(&self.from_bigint(&pk), &inv))
    }

    /// Smallest exponent s with γ_a(p) ∈ p^s·A for all a ≥ k, capped at e.
    pub fn min_valuation_gamma_p_from(&self, k: u64) -> Option<u32> {
        let PdStructure::StandardP { p, e } = self.pd else {
            return None;
        };
        if k == 0 {
            return Some(0);
        }
        if p == 2 {
            // γ_{2^j}(2) has valuation exactly 1.
            return Some(1);
        }
        let mut best = e as u64;
        // v(a) = a − v_p(a!) ≥ (p−2)a/(p−1)+1/(p−1); scan until it cannot drop below best.
        let mut a = k;
        loop {
            let vp = legendre(a, p);
            let val = a - vp;
            best = best.min(val);
            if best <= 1 {
                break;
            }
            if (p - 2) * a >= (p - 1) * best {
                break;
            }
            a += 1;
        }
        Some(best as u32)
    }
}

fn legendre(k: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut q = k / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v
}

/// k! = p^v · unit.
fn split_factorial(k: u64, p: u64) -> (u64, BigInt) {
    let mut unit = BigInt::one();
    let mut v = 0;
    for i in 2..=k {
        let mut j = i;
        while j % p == 0 {
            j /= p;
            v += 1;
        }
        unit *= j;
    }
    (v, unit)
}

impl fmt::Display for BaseDpRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, &self.pd) {
            (RingKind::Integers, _) => write!(f, "Z"),
            (RingKind::Rationals, _) => write!(f, "Q"),
            (RingKind::IntegersModN(n), PdStructure::Trivial) => write!(f, "Z/{n}"),
            (RingKind::IntegersModN(_), PdStructure::StandardP { p, e }) => write!(f, "Z/{p}^{e} (standard pd on ({p}))"),
        }
    }
}

/// Integer value of a coefficient as u64 residue, for modular rings.
pub(crate) fn residue_u64(a: &Coefficient) -> u64 {
    match a {
        Coefficient::Int(x) => x.to_u64().expect("canonical residue"),
        Coefficient::Rat(q) => q.to_integer().to_u64().expect("canonical residue"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residues_are_canonical() {
        let r = BaseDpRing::modular(4).unwrap();
        assert_eq!(r.from_i64(-1), Coefficient::Int(BigInt::from(3)));
        assert_eq!(r.add(&r.from_i64(3), &r.from_i64(3)), r.from_i64(2));
    }

    #[test]
    fn rational_into_modular() {
        let r = BaseDpRing::modular(9).unwrap();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let h = r.from_rational(&half).unwrap();
        assert_eq!(r.mul(&h, &r.from_i64(2)), r.one());
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!(r.from_rational(&third).is_err());
    }

    #[test]
    fn standard_divided_powers_of_p() {
        let r = BaseDpRing::standard_p(2, 2).unwrap();
        assert_eq!(r.gamma_of_p(1), Some(r.from_i64(2)));
        assert_eq!(r.gamma_of_p(2), Some(r.from_i64(2)));
        assert_eq!(r.gamma_of_p(3), Some(r.from_i64(0)));
        assert_eq!(r.gamma_of_p(4), Some(r.from_i64(2)));
        let r3 = BaseDpRing::standard_p(3, 2).unwrap();
        // 27/6 = 9/2 ≡ 0 mod 9
        assert_eq!(r3.gamma_of_p(3), Some(r3.zero()));
        assert_eq!(r3.gamma_of_p(2), Some(r3.from_i64(0)));
        assert_eq!(r3.gamma_of_p(1), Some(r3.from_i64(3)));
    }

    #[test]
    fn gamma_valuation_floor() {
        let r = BaseDpRing::standard_p(2, 3).unwrap();
        for k in 1..20 {
            assert_eq!(r.min_valuation_gamma_p_from(k), Some(1));
        }
        let r3 = BaseDpRing::standard_p(3, 2).unwrap();
        assert_eq!(r3.min_valuation_gamma_p_from(1), Some(1));
        assert_eq!(r3.min_valuation_gamma_p_from(3), Some(2));
    }

    #[test]
    fn modulus_effects() {
        let r = BaseDpRing::modular(12).unwrap();
        assert_eq!(r.modulus_effect(&BigInt::from(24)), ModulusEffect::Free);
        assert_eq!(r.modulus_effect(&BigInt::from(5)), ModulusEffect::Kill);
        assert_eq!(r.modulus_effect(&BigInt::from(2)), ModulusEffect::Reduce(BigInt::from(2)));
        let q = BaseDpRing::rationals();
        assert_eq!(q.modulus_effect(&BigInt::from(6)), ModulusEffect::Kill);
    }
}
