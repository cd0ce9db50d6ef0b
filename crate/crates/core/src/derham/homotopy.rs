use crate::envelope::{build_envelope, AlgebraPresentation, Carrier, Poly};
use crate::exactalg::{BaseDpRing, Coefficient};
use crate::pdpoly::TruncationParams;

use super::{DeRhamComplex, DeRhamError, FormElement, WeightBand};

/// Homotopy data on Ω* of A⟨t₁..t_d⟩: k, the unit inclusion f and the constant-term projection h.
#[derive(Clone, Debug)]
pub struct PoincareHomotopy {
    complex: DeRhamComplex,
    d: usize,
}

/// One variable: k(t^{[j]}dt) = t^{[j+1]}, k = 0 on functions.
fn k_one(j: u32, has_dt: bool) -> Option<(u32, bool)> {
    has_dt.then_some((j + 1, false))
}

/// One variable: f∘h keeps the constant function only.
fn fh_one(j: u32, has_dt: bool) -> bool {
    j == 0 && !has_dt
}

/// The free pd algebra in d variables through weight w, as the envelope of (x₁..x_d) in A[x].
pub fn poincare_homotopy(ring: &BaseDpRing, d: usize, w: u32) -> Result<PoincareHomotopy, DeRhamError> {
    let chart: Vec<String> = if d == 1 { vec!["x".into()] } else { (1..=d).map(|i| format!("x{i}")).collect() };
    let gens: Vec<Poly> = (0..d).map(|j| Poly::var(ring, d, j)).collect();
    let mut src = AlgebraPresentation::new(ring.clone(), chart, gens);
    let pd: Vec<String> = if d == 1 { vec!["t".into()] } else { (1..=d).map(|i| format!("t{i}")).collect() };
    src.pd_names = Some(pd.clone());
    let env = build_envelope(&src, TruncationParams { m: 1.into(), n: w + 1, weight_cutoff: Some(w) })?;
    let mut complex = DeRhamComplex::new(&env.carrier);
    complex.set_frame_names(pd.iter().map(|n| format!("d{n}")).collect());
    Ok(PoincareHomotopy { complex, d })
}

impl PoincareHomotopy {
    pub fn complex(&self) -> &DeRhamComplex {
        &self.complex
    }

    pub fn carrier(&self) -> &Carrier {
        self.complex.carrier()
    }

    /// Tensor assembly k = Σ_i (fh)^{⊗(i−1)} ⊗ k_i ⊗ id, Koszul signs included.
    pub fn k(&self, x: &FormElement) -> FormElement {
        let c = self.carrier();
        let d = self.d;
        let mut out = FormElement::zero();
        for ((m, mask), a) in x.terms() {
            for (e, coef) in a.terms() {
                for i in 0..d {
                    let before_ok = (0..i).all(|l| fh_one(e[d + l], mask & (1 << l) != 0));
                    if !before_ok {
                        break;
                    }
                    let Some((j, keeps_dt)) = k_one(e[d + i], mask & (1 << i) != 0) else { continue };
                    let mut e2 = e.clone();
                    e2[d + i] = j;
                    let mask2 = if keeps_dt { *mask } else { mask & !(1 << i) };
                    // dt_i leaves from behind the forms of the earlier factors, all of degree zero here
                    let sign = (mask & ((1 << i) - 1)).count_ones() % 2 == 1;
                    out.add_component(c, *m, mask2, &c.monomial(e2, coef.clone()), sign);
                }
            }
        }
        out
    }

    /// f(h(x)): the constant function part.
    pub fn fh(&self, x: &FormElement) -> FormElement {
        let c = self.carrier();
        let mut out = FormElement::zero();
        if let Some(a) = x.component(0, 0) {
            let zero = vec![0; c.nvars()];
            if let Some(v) = a.coefficient(&zero) {
                out.add_component(c, 0, 0, &c.constant(v.clone()), false);
            }
        }
        out
    }

    pub fn h(&self, x: &FormElement) -> Coefficient {
        let c = self.carrier();
        x.component(0, 0).and_then(|a| a.coefficient(&vec![0; c.nvars()]).cloned()).unwrap_or_else(|| c.ring().zero())
    }

    pub fn f(&self, a: &Coefficient) -> FormElement {
        let c = self.carrier();
        let mut out = FormElement::zero();
        out.add_component(c, 0, 0, &c.constant(a.clone()), false);
        out
    }

    /// k∘d + d∘k − (id − f∘h) applied to x.
    pub fn defect(&self, x: &FormElement) -> FormElement {
        let c = self.carrier();
        let dx = &self.complex;
        let lhs = self.k(&dx.differential(x)).add(c, &dx.differential(&self.k(x)));
        lhs.sub(c, &x.sub(c, &self.fh(x)))
    }

    /// Whether the homotopy identity holds on every generator of weight ≤ w in every degree.
    pub fn verify(&self, w: u32) -> bool {
        (0..=self.d).all(|mu| {
            self.complex.keys(mu, WeightBand::UpTo(w)).iter().all(|key| self.defect(&self.complex.generator(key).reduce(self.carrier())).is_zero())
        })
    }
}
