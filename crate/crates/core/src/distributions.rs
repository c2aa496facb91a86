//! Laws of odd functions as finite symmetric discrete distributions, and the
//! reductions and constants derived from them.
//!
//! An odd `f` enters `I_p(v, f)` only through its law, so the underlying
//! probability space and its involution are never materialized.

use serde::{Deserialize, Serialize};

use crate::constants::{a_const, b_const};
use crate::error::{Error, Result};

/// Tolerance on `Σ 2 t_j <= 1` for rounding in user-provided masses.
const MASS_TOL: f64 = 1e-12;

/// `P(f = level) = P(f = -level) = mass`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub level: f64,
    pub mass: f64,
}

/// Law of an odd simple function: atoms with strictly decreasing positive
/// levels, plus an implicit zero atom of mass `1 - 2 Σ t_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Atom>", into = "Vec<Atom>")]
pub struct SymmetricAtoms {
    atoms: Vec<Atom>,
}

impl TryFrom<Vec<Atom>> for SymmetricAtoms {
    type Error = Error;

    fn try_from(atoms: Vec<Atom>) -> Result<Self> {
        SymmetricAtoms::new(atoms.into_iter().map(|a| (a.level, a.mass)).collect())
    }
}

impl From<SymmetricAtoms> for Vec<Atom> {
    fn from(f: SymmetricAtoms) -> Self {
        f.atoms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FNorms {
    /// `‖f‖_1 = 2 Σ a_j t_j`
    pub l1: f64,
    /// `‖f‖_∞ = max a_j`
    pub linf: f64,
    /// `μ(supp f) = 2 Σ t_j`
    pub supp: f64,
}

/// Which reading of the Theorem 1(3) lower constant to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L2ConstantVariant {
    /// `min{supp^{1/p-1}, supp^{-1/2}}`, the value the derivation supports.
    Min,
    /// `max{supp^{1/p-1}, supp^{-1/2}}`, as printed in the theorem statement.
    PaperMax,
}

/// Result of the supremum over top-`s` superlevel sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerConstant {
    pub c: f64,
    pub witness_s: f64,
}

impl SymmetricAtoms {
    /// Builds a law from `(level, mass)` pairs in any order.
    pub fn new(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, t) in &pairs {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidAtoms(format!("level must be positive, got {a}")));
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidAtoms(format!("mass must be positive, got {t}")));
            }
        }
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidAtoms("levels must be distinct".into()));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if 2.0 * total > 1.0 + MASS_TOL {
            return Err(Error::InvalidAtoms(format!(
                "total mass 2·Σt = {} exceeds 1",
                2.0 * total
            )));
        }
        Ok(SymmetricAtoms {
            atoms: pairs
                .into_iter()
                .map(|(level, mass)| Atom { level, mass })
                .collect(),
        })
    }

    /// The Rademacher law: `±1` with probability 1/2 each.
    pub fn rademacher() -> Self {
        SymmetricAtoms {
            atoms: vec![Atom {
                level: 1.0,
                mass: 0.5,
            }],
        }
    }

    /// `f ≡ 0`.
    pub fn zero() -> Self {
        SymmetricAtoms { atoms: Vec::new() }
    }

    /// `a (1_S - 1_{-S})` with `μ(S) = t`.
    pub fn two_valued(level: f64, t: f64) -> Result<Self> {
        SymmetricAtoms::new(vec![(level, t)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    /// One-sided mass `Σ t_j = μ{f > 0}`.
    pub fn positive_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Mass of the zero atom.
    pub fn zero_mass(&self) -> f64 {
        (1.0 - 2.0 * self.positive_mass()).max(0.0)
    }

    /// Law of `k f` for `k >= 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be >= 0, got {k}")));
        }
        if k == 0.0 {
            return Ok(SymmetricAtoms::zero());
        }
        Ok(SymmetricAtoms {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    level: k * a.level,
                    mass: a.mass,
                })
                .collect(),
        })
    }

    /// `(value, probability)` pairs of the full law, zero atom first when present.
    pub fn law(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.atoms.len() + 1);
        let z = self.zero_mass();
        if z > 0.0 {
            out.push((0.0, z));
        }
        for a in &self.atoms {
            out.push((a.level, a.mass));
            out.push((-a.level, a.mass));
        }
        out
    }

    pub fn f_norms(&self) -> FNorms {
        FNorms {
            l1: 2.0 * self.atoms.iter().map(|a| a.level * a.mass).sum::<f64>(),
            linf: self.atoms.first().map_or(0.0, |a| a.level),
            supp: 2.0 * self.positive_mass(),
        }
    }

    /// `E[f²] = 2 Σ a_j² t_j`.
    pub fn second_moment(&self) -> f64 {
        2.0 * self.atoms.iter().map(|a| a.level * a.level * a.mass).sum::<f64>()
    }

    /// Prefix sums of the masses: the one-sided measures of the superlevel
    /// sets `{f >= a_j}`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.atoms
            .iter()
            .scan(0.0, |acc, a| {
                *acc += a.mass;
                Some(*acc)
            })
            .collect()
    }

    /// `∫_A f` over the top-`s` superlevel set `A` (one side only), splitting
    /// the boundary atom fractionally.
    pub fn top_integral(&self, s: f64) -> f64 {
        let mut rem = s;
        let mut acc = 0.0;
        for a in &self.atoms {
            if rem <= 0.0 {
                break;
            }
            let take = rem.min(a.mass);
            acc += a.level * take;
            rem -= take;
        }
        acc
    }

    /// Law of `h_A = (‖f|_{A∪-A}‖_1 / 2μ(A)) (1_A - 1_{-A})` for the top-`s`
    /// superlevel set `A`.
    pub fn superlevel_reduction(&self, s: f64) -> Result<SymmetricAtoms> {
        let total = self.positive_mass();
        if !(s > 0.0 && s <= total * (1.0 + MASS_TOL)) {
            return Err(Error::Domain(format!(
                "superlevel measure must lie in (0, {total}], got {s}"
            )));
        }
        let s = s.min(total);
        let h = self.top_integral(s) / s;
        SymmetricAtoms::two_valued(h, s)
    }

    /// The dominating two-valued law `‖f‖_∞ (1_A - 1_{-A})`, `A = {f > 0}`.
    pub fn envelope_upper(&self) -> Result<SymmetricAtoms> {
        let top = self
            .atoms
            .first()
            .ok_or_else(|| Error::Domain("envelope of f ≡ 0 is undefined".into()))?;
        SymmetricAtoms::two_valued(top.level, self.positive_mass())
    }

    /// `c_{f,p,q} = A_q sup_s min{(2s)^{1/p-1}, (2s)^{-1/2}} · 2 ∫_{top s} f`.
    ///
    /// For fixed `μ(S) = s` the restricted `L^1` mass is largest on the top
    /// superlevel set, so the supremum runs over `s ∈ (0, Σt]` only. With
    /// `2s <= 1` the minimum is `(2s)^e`, `e = max(1/p - 1, -1/2)`. On each
    /// atom piece the objective is `s^e (c0 + a s)` with `c0 >= 0` because
    /// levels decrease; for `e < 0` its only critical point is a minimum, so
    /// the supremum is attained at a breakpoint.
    pub fn theorem1_lower_constant(&self, p: f64, q: f64) -> Result<LowerConstant> {
        if !(p >= 1.0 && q >= 1.0) {
            return Err(Error::Domain(format!("exponents must be >= 1, got p={p}, q={q}")));
        }
        if q > p {
            return Err(Error::Precondition(format!(
                "lower bound requires q <= p, got q={q} > p={p}"
            )));
        }
        if self.is_zero() {
            return Err(Error::Domain("lower constant of f ≡ 0 is undefined".into()));
        }
        let e = (1.0 / p - 1.0).max(-0.5);
        let objective = |s: f64| 2.0 * (2.0 * s).powf(e) * self.top_integral(s);
        let mut best = LowerConstant {
            c: f64::NEG_INFINITY,
            witness_s: 0.0,
        };
        let mut consider = |s: f64| {
            let g = objective(s);
            if g > best.c {
                best = LowerConstant { c: g, witness_s: s };
            }
        };
        for s in self.breakpoints() {
            consider(s);
        }
        best.c *= a_const(q);
        Ok(best)
    }

    /// `C_{f,p,q} = B_q max{μ(supp f)^{1/p}, μ(supp f)^{1/2}} ‖f‖_∞`.
    pub fn theorem1_upper_constant(&self, p: f64, q: f64) -> Result<f64> {
        if !(p >= 1.0 && q >= 1.0) {
            return Err(Error::Domain(format!("exponents must be >= 1, got p={p}, q={q}")));
        }
        if q < p {
            return Err(Error::Precondition(format!(
                "upper bound requires q >= p, got q={q} < p={p}"
            )));
        }
        let n = self.f_norms();
        Ok(b_const(q) * n.supp.powf(1.0 / p).max(n.supp.sqrt()) * n.linf)
    }

    /// Lower constant for `L^2` spaces with `q = p` and `S = {f > 0}`.
    pub fn theorem1_l2_lower_constant(&self, p: f64, variant: L2ConstantVariant) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("p must be >= 1, got {p}")));
        }
        if self.is_zero() {
            return Err(Error::Domain("lower constant of f ≡ 0 is undefined".into()));
        }
        let n = self.f_norms();
        let x = n.supp.powf(1.0 / p - 1.0);
        let y = n.supp.powf(-0.5);
        let factor = match variant {
            L2ConstantVariant::Min => x.min(y),
            L2ConstantVariant::PaperMax => x.max(y),
        };
        Ok(a_const(p) * factor * n.l1)
    }

    /// Upper constant for `L^2` spaces with `q = p`.
    pub fn theorem1_l2_upper_constant(&self, p: f64) -> Result<f64> {
        self.theorem1_upper_constant(p, p)
    }
}

/// An odd step function `Σ c_i (1_{X_i} - 1_{-X_i})` on disjoint symmetric
/// cells of measure `μ(X_i) = mass_i`. Values may have either sign and need
/// not be ordered, so sums and couplings of functions on a shared partition
/// are representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    masses: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(masses: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if masses.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: masses.len(),
                got: values.len(),
            });
        }
        if masses.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidAtoms("cell masses must be positive".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidAtoms("cell values must be finite".into()));
        }
        if 2.0 * masses.iter().sum::<f64>() > 1.0 + MASS_TOL {
            return Err(Error::InvalidAtoms("total cell mass exceeds 1/2".into()));
        }
        Ok(StepFunction { masses, values })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `λ f` for any real `λ`.
    pub fn scaled(&self, lambda: f64) -> StepFunction {
        StepFunction {
            masses: self.masses.clone(),
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }

    /// Pointwise sum on the shared partition.
    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        if self.masses != other.masses {
            return Err(Error::Precondition(
                "step functions must share the same partition".into(),
            ));
        }
        Ok(StepFunction {
            masses: self.masses.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `(value, probability)` pairs; cells with value 0 are folded into the
    /// zero atom.
    pub fn law(&self) -> Vec<(f64, f64)> {
        let mut zero = 1.0 - 2.0 * self.masses.iter().sum::<f64>();
        let mut out = Vec::with_capacity(2 * self.values.len() + 1);
        for (&t, &c) in self.masses.iter().zip(&self.values) {
            if c == 0.0 {
                zero += 2.0 * t;
            } else {
                out.push((c, t));
                out.push((-c, t));
            }
        }
        if zero > MASS_TOL {
            out.insert(0, (0.0, zero));
        }
        out
    }
}

impl From<&SymmetricAtoms> for StepFunction {
    fn from(f: &SymmetricAtoms) -> Self {
        StepFunction {
            masses: f.atoms.iter().map(|a| a.mass).collect(),
            values: f.atoms.iter().map(|a| a.level).collect(),
        }
    }
}
