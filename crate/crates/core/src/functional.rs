//! The moment functional `I_p(v, f) = (E ‖Σ f(x_i) v_i‖^p)^{1/p}` with i.i.d.
//! coordinates `x_i`, computed exactly by enumerating the law of `f` or by
//! seeded Monte Carlo, and the checks built on it.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::distributions::{L2ConstantVariant, StepFunction, SymmetricAtoms};
use crate::error::{Error, Result};
use crate::norms::NormSpec;
use crate::rng::stream_rng;
use crate::sum::CompensatedSum;
use crate::{le_slack, slack, REL_SLACK};

/// `n` vectors in ℝ^d, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorTuple {
    n: usize,
    d: usize,
    rows: Vec<f64>,
}

impl VectorTuple {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if n == 0 || d == 0 {
            return Err(Error::Domain("vector tuple needs n >= 1 and d >= 1".into()));
        }
        let mut flat = Vec::with_capacity(n * d);
        for r in &rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::from_flat(n, d, flat)
    }

    pub fn from_flat(n: usize, d: usize, rows: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Domain("vector tuple needs n >= 1 and d >= 1".into()));
        }
        if rows.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: rows.len(),
            });
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("vector entries must be finite".into()));
        }
        Ok(VectorTuple { n, d, rows })
    }

    /// Scalars `v_i ∈ ℝ` as a tuple with `d = 1`.
    pub fn scalars(v: &[f64]) -> Result<Self> {
        Self::from_flat(v.len(), 1, v.to_vec())
    }

    pub fn zeros(n: usize, d: usize) -> Result<Self> {
        Self::from_flat(n, d, vec![0.0; n * d])
    }

    /// Entries i.i.d. standard normal.
    pub(crate) fn random<R: Rng>(n: usize, d: usize, rng: &mut R) -> Self {
        let rows = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
        VectorTuple { n, d, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.rows
    }

    pub fn scaled(&self, lambda: f64) -> VectorTuple {
        VectorTuple {
            n: self.n,
            d: self.d,
            rows: self.rows.iter().map(|x| lambda * x).collect(),
        }
    }

    pub fn add(&self, other: &VectorTuple) -> Result<VectorTuple> {
        if (self.n, self.d) != (other.n, other.d) {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.d,
                got: other.n * other.d,
            });
        }
        Ok(VectorTuple {
            n: self.n,
            d: self.d,
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a + b).collect(),
        })
    }

    /// Rows reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> VectorTuple {
        let mut rows = Vec::with_capacity(self.rows.len());
        for &i in perm {
            rows.extend_from_slice(self.row(i));
        }
        VectorTuple {
            n: self.n,
            d: self.d,
            rows,
        }
    }

    /// `Σ_i v_i`.
    pub fn row_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.d];
        for r in self.rows() {
            for (a, b) in s.iter_mut().zip(r) {
                *a += b;
            }
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&x| x == 0.0)
    }

    /// `sqrt(Σ ‖v_i‖²)` under `norm`.
    pub fn l2_of_norms(&self, norm: &NormSpec) -> Result<f64> {
        check_dim(self, norm)?;
        let mut acc = 0.0;
        for r in self.rows() {
            let x = norm.eval_unchecked(r)?;
            acc += x * x;
        }
        Ok(acc.sqrt())
    }

    pub fn frobenius(&self) -> f64 {
        self.rows.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn check_dim(v: &VectorTuple, norm: &NormSpec) -> Result<()> {
    if norm.dim() != v.d {
        return Err(Error::DimensionMismatch {
            expected: norm.dim(),
            got: v.d,
        });
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("moment exponent must be finite and >= 1, got {p}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IpMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpResult {
    pub value: f64,
    pub pth_power: f64,
    pub method: IpMethod,
    /// Standard error of the p-th power mean; Monte Carlo only.
    pub stderr: Option<f64>,
    pub terms_evaluated: u64,
}

impl IpResult {
    fn exact(pth_power: f64, p: f64, terms: u64) -> Self {
        IpResult {
            value: pth_power.powf(1.0 / p),
            pth_power,
            method: IpMethod::Exact,
            stderr: None,
            terms_evaluated: terms,
        }
    }

    /// `I_p` interval from `mean ± k·stderr` mapped through `x ↦ x^{1/p}`.
    pub fn interval(&self, p: f64, k: f64) -> (f64, f64) {
        let se = self.stderr.unwrap_or(0.0);
        let lo = (self.pth_power - k * se).max(0.0).powf(1.0 / p);
        let hi = (self.pth_power + k * se).powf(1.0 / p);
        (lo, hi)
    }
}

/// Exact `I_p(v, f)` for an arbitrary finite law `(value, probability)`.
///
/// Every assignment in `law^n` is visited once; the count is checked against
/// `budget` before any work starts.
pub fn ipf_exact_law(
    v: &VectorTuple,
    law: &[(f64, f64)],
    p: f64,
    norm: &NormSpec,
    budget: u64,
) -> Result<IpResult> {
    check_p(p)?;
    check_dim(v, norm)?;
    let law: Vec<(f64, f64)> = law.iter().copied().filter(|&(_, w)| w > 0.0).collect();
    // f ≡ 0 or v = 0: every term vanishes
    if law.iter().all(|&(c, _)| c == 0.0) || v.is_zero() {
        return Ok(IpResult::exact(0.0, p, 0));
    }
    let terms = (law.len() as u128).pow(v.n as u32);
    if terms > budget as u128 {
        return Err(Error::BudgetExceeded { terms, budget });
    }
    let mut acc = CompensatedSum::default();
    let mut partial = vec![vec![0.0; v.d]; v.n + 1];
    enumerate_law(v, &law, p, norm, 0, 1.0, &mut partial, &mut acc)?;
    Ok(IpResult::exact(acc.value(), p, terms as u64))
}

#[allow(clippy::too_many_arguments)]
fn enumerate_law(
    v: &VectorTuple,
    law: &[(f64, f64)],
    p: f64,
    norm: &NormSpec,
    depth: usize,
    weight: f64,
    partial: &mut [Vec<f64>],
    acc: &mut CompensatedSum,
) -> Result<()> {
    if depth == v.n {
        let x = norm.eval_unchecked(&partial[depth])?;
        if x > 0.0 {
            acc.add(weight * x.powf(p));
        }
        return Ok(());
    }
    let row = v.row(depth);
    for &(c, w) in law {
        let (head, tail) = partial.split_at_mut(depth + 1);
        let (src, dst) = (&head[depth], &mut tail[0]);
        for ((o, s), r) in dst.iter_mut().zip(src).zip(row) {
            *o = s + c * r;
        }
        enumerate_law(v, law, p, norm, depth + 1, weight * w, partial, acc)?;
    }
    Ok(())
}

/// Exact `I_p(v, f)` by enumerating all `(2m+1)^n` coordinate assignments.
pub fn ipf_exact(
    v: &VectorTuple,
    f: &SymmetricAtoms,
    p: f64,
    norm: &NormSpec,
    budget: u64,
) -> Result<IpResult> {
    ipf_exact_law(v, &f.law(), p, norm, budget)
}

/// Exact `I_p(v, f)` for an odd step function.
pub fn ipf_exact_step(
    v: &VectorTuple,
    f: &StepFunction,
    p: f64,
    norm: &NormSpec,
    budget: u64,
) -> Result<IpResult> {
    ipf_exact_law(v, &f.law(), p, norm, budget)
}

/// `I_p(v, 1_S - 1_{-S})` with `μ(S) = t`, through the subset expansion
/// `Σ_k t^k (1-2t)^{n-k} Σ_{|J|=k} Σ_{ε ∈ {±1}^J} ‖Σ_{j∈J} ε_j v_j‖^p`.
pub fn ipf_two_valued_exact(
    v: &VectorTuple,
    t: f64,
    p: f64,
    norm: &NormSpec,
    budget: u64,
) -> Result<IpResult> {
    check_p(p)?;
    check_dim(v, norm)?;
    if !(t > 0.0 && t <= 0.5) {
        return Err(Error::Domain(format!("one-sided mass must lie in (0, 1/2], got {t}")));
    }
    let n = v.n;
    if n >= 40 {
        return Err(Error::BudgetExceeded {
            terms: 3u128.pow(n as u32),
            budget,
        });
    }
    // Σ_k C(n,k) 2^k = 3^n sign-pattern terms
    let terms = 3u128.pow(n as u32);
    if terms > budget as u128 {
        return Err(Error::BudgetExceeded { terms, budget });
    }
    let zero = 1.0 - 2.0 * t;
    let mut acc = CompensatedSum::default();
    let mut x = vec![0.0; v.d];
    for mask in 1u64..(1u64 << n) {
        let k = mask.count_ones() as i32;
        let coef = t.powi(k) * zero.powi(n as i32 - k);
        if coef == 0.0 {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let mut inner = CompensatedSum::default();
        for signs in 0u64..(1u64 << k) {
            x.iter_mut().for_each(|c| *c = 0.0);
            for (b, &i) in members.iter().enumerate() {
                let eps = if signs >> b & 1 == 1 { -1.0 } else { 1.0 };
                for (c, r) in x.iter_mut().zip(v.row(i)) {
                    *c += eps * r;
                }
            }
            let nx = norm.eval_unchecked(&x)?;
            if nx > 0.0 {
                inner.add(nx.powf(p));
            }
        }
        acc.add(coef * inner.value());
    }
    Ok(IpResult::exact(acc.value(), p, terms as u64))
}

const MC_BATCH: u64 = 4096;

/// Monte Carlo estimate of `I_p(v, f)^p`. Batch `b` draws from ChaCha stream
/// `b` of `seed`, so the estimate depends only on `(seed, samples)`.
pub fn ipf_monte_carlo(
    v: &VectorTuple,
    f: &SymmetricAtoms,
    p: f64,
    norm: &NormSpec,
    samples: u64,
    seed: u64,
) -> Result<IpResult> {
    check_p(p)?;
    check_dim(v, norm)?;
    if samples < 2 {
        return Err(Error::Domain(format!("Monte Carlo needs at least 2 samples, got {samples}")));
    }
    if f.is_zero() || v.is_zero() {
        return Ok(IpResult {
            value: 0.0,
            pth_power: 0.0,
            method: IpMethod::MonteCarlo,
            stderr: Some(0.0),
            terms_evaluated: samples,
        });
    }
    let law = f.law();
    let cumulative: Vec<f64> = law
        .iter()
        .scan(0.0, |acc, &(_, w)| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let draw = |u: f64| -> f64 {
        let idx = cumulative.partition_point(|&c| c <= u).min(law.len() - 1);
        law[idx].0
    };
    // Welford with the batch structure fixed by MC_BATCH.
    let mut count = 0u64;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut x = vec![0.0; v.d];
    let batches = samples.div_ceil(MC_BATCH);
    for b in 0..batches {
        let mut rng = stream_rng(seed, b);
        let in_batch = MC_BATCH.min(samples - b * MC_BATCH);
        for _ in 0..in_batch {
            x.iter_mut().for_each(|c| *c = 0.0);
            for i in 0..v.n {
                let c = draw(unit.sample(&mut rng));
                if c != 0.0 {
                    for (o, r) in x.iter_mut().zip(v.row(i)) {
                        *o += c * r;
                    }
                }
            }
            let nx = norm.eval_unchecked(&x)?;
            let y = if nx > 0.0 { nx.powf(p) } else { 0.0 };
            count += 1;
            let delta = y - mean;
            mean += delta / count as f64;
            m2 += delta * (y - mean);
        }
    }
    let var = m2 / (count - 1) as f64;
    Ok(IpResult {
        value: mean.powf(1.0 / p),
        pth_power: mean,
        method: IpMethod::MonteCarlo,
        stderr: Some((var / count as f64).sqrt()),
        terms_evaluated: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub side: BoundSide,
    pub p: f64,
    pub q: f64,
    pub i_p: f64,
    pub bound_constant: f64,
    /// `sqrt(Σ ‖v_i‖²)`
    pub l2_norm: f64,
    pub rhs: f64,
    /// `i_p - rhs` for the lower side, `rhs - i_p` for the upper side.
    pub margin: f64,
    pub holds: bool,
    /// Maximizing one-sided measure of the lower constant.
    pub witness_s: Option<f64>,
}

/// Checks `I_p(v,f) >= c_{f,p,q} sqrt(Σ‖v_i‖²)` or
/// `I_p(v,f) <= C_{f,p,q} sqrt(Σ‖v_i‖²)`. The Hanner cotype / type
/// hypothesis on `norm` is the caller's assertion.
pub fn verify_theorem1(
    v: &VectorTuple,
    f: &SymmetricAtoms,
    p: f64,
    q: f64,
    norm: &NormSpec,
    side: BoundSide,
    budget: u64,
) -> Result<Theorem1Report> {
    let (constant, witness_s) = match side {
        BoundSide::Lower => {
            let c = f.theorem1_lower_constant(p, q)?;
            (c.c, Some(c.witness_s))
        }
        BoundSide::Upper => (f.theorem1_upper_constant(p, q)?, None),
    };
    let i_p = ipf_exact(v, f, p, norm, budget)?.value;
    let l2_norm = v.l2_of_norms(norm)?;
    let rhs = constant * l2_norm;
    let (margin, holds) = match side {
        BoundSide::Lower => (i_p - rhs, le_slack(rhs, i_p, REL_SLACK)),
        BoundSide::Upper => (rhs - i_p, le_slack(i_p, rhs, REL_SLACK)),
    };
    Ok(Theorem1Report {
        side,
        p,
        q,
        i_p,
        bound_constant: constant,
        l2_norm,
        rhs,
        margin,
        holds,
        witness_s,
    })
}

/// The `L^2`, `q = p` variant of the Theorem-1 check. The lower constant
/// follows `variant`; the upper constant is the same for both.
pub fn verify_theorem1_l2(
    v: &VectorTuple,
    f: &SymmetricAtoms,
    p: f64,
    norm: &NormSpec,
    side: BoundSide,
    variant: L2ConstantVariant,
    budget: u64,
) -> Result<Theorem1Report> {
    let constant = match side {
        BoundSide::Lower => f.theorem1_l2_lower_constant(p, variant)?,
        BoundSide::Upper => f.theorem1_l2_upper_constant(p)?,
    };
    let i_p = ipf_exact(v, f, p, norm, budget)?.value;
    let l2_norm = v.l2_of_norms(norm)?;
    let rhs = constant * l2_norm;
    let (margin, holds) = match side {
        BoundSide::Lower => (i_p - rhs, le_slack(rhs, i_p, REL_SLACK)),
        BoundSide::Upper => (rhs - i_p, le_slack(i_p, rhs, REL_SLACK)),
    };
    Ok(Theorem1Report {
        side,
        p,
        q: p,
        i_p,
        bound_constant: constant,
        l2_norm,
        rhs,
        margin,
        holds,
        witness_s: None,
    })
}

/// Outcome of a randomized norm-axiom search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormAxiomReport {
    pub trials: usize,
    pub homogeneity_failures: usize,
    pub evenness_failures: usize,
    pub triangle_failures: usize,
    pub definiteness_failures: usize,
    pub max_homogeneity_rel_err: f64,
    pub max_triangle_excess: f64,
    pub zero_is_zero: bool,
    pub precondition_met: bool,
    /// Definiteness is sampled, never proven.
    pub definiteness_mode: String,
    pub passed: bool,
}

impl NormAxiomReport {
    fn new(trials: usize, precondition_met: bool) -> Self {
        NormAxiomReport {
            trials,
            homogeneity_failures: 0,
            evenness_failures: 0,
            triangle_failures: 0,
            definiteness_failures: 0,
            max_homogeneity_rel_err: 0.0,
            max_triangle_excess: 0.0,
            zero_is_zero: true,
            precondition_met,
            definiteness_mode: "falsification search".into(),
            passed: false,
        }
    }

    fn check_homogeneity(&mut self, scaled: f64, factor: f64, base: f64) {
        let want = factor * base;
        let err = (scaled - want).abs();
        if want > 0.0 {
            self.max_homogeneity_rel_err = self.max_homogeneity_rel_err.max(err / want);
        }
        if err > slack(scaled, want, REL_SLACK) {
            self.homogeneity_failures += 1;
        }
    }

    fn check_triangle(&mut self, lhs: f64, a: f64, b: f64) {
        let excess = lhs - (a + b);
        self.max_triangle_excess = self.max_triangle_excess.max(excess);
        if !le_slack(lhs, a + b, REL_SLACK) {
            self.triangle_failures += 1;
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.homogeneity_failures == 0
            && self.evenness_failures == 0
            && self.triangle_failures == 0
            && self.definiteness_failures == 0
            && self.zero_is_zero;
        self
    }
}

/// Randomized check that `v ↦ I_p(v, f)` is a norm on `E^n`: homogeneity,
/// the triangle inequality and definiteness on sampled tuples.
pub fn check_value_norm_axioms(
    f: &SymmetricAtoms,
    p: f64,
    norm: &NormSpec,
    trials: usize,
    seed: u64,
    budget: u64,
) -> Result<NormAxiomReport> {
    check_p(p)?;
    let mut report = NormAxiomReport::new(trials, !f.is_zero());
    let d = norm.dim();
    let law = f.law();
    let ip = |v: &VectorTuple| ipf_exact_law(v, &law, p, norm, budget).map(|r| r.value);
    let mut rng = stream_rng(seed, 0x7661_6c75);
    for trial in 0..trials {
        let n = 1 + trial % 4;
        let v = VectorTuple::random(n, d, &mut rng);
        let u = VectorTuple::random(n, d, &mut rng);
        let lambda: f64 = rng.random_range(-3.0..3.0);
        let iv = ip(&v)?;
        let iu = ip(&u)?;
        report.check_homogeneity(ip(&v.scaled(lambda))?, lambda.abs(), iv);
        let neg = ip(&v.scaled(-1.0))?;
        if (neg - iv).abs() > slack(neg, iv, REL_SLACK) {
            report.evenness_failures += 1;
        }
        report.check_triangle(ip(&v.add(&u)?)?, iv, iu);
        if !(iv > 0.0) {
            report.definiteness_failures += 1;
        }
        if trial == 0 {
            report.zero_is_zero = ip(&VectorTuple::zeros(n, d)?)? == 0.0;
        }
    }
    Ok(report.finish())
}

fn random_step_function<R: Rng>(rng: &mut R, cells: usize) -> StepFunction {
    let total: f64 = rng.random_range(0.05..=0.5);
    let raw: Vec<f64> = (0..cells).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let masses = raw.iter().map(|r| total * r / s).collect();
    let values = (0..cells).map(|_| StandardNormal.sample(rng)).collect();
    StepFunction::new(masses, values).expect("valid by construction")
}

/// Randomized check that `f ↦ I_p(v, f)` is a norm on odd step functions:
/// homogeneity, evenness, sub-additivity on a shared partition, and
/// definiteness. Requires `Σ v_i ≠ 0`.
pub fn check_argument_norm_axioms(
    v: &VectorTuple,
    p: f64,
    norm: &NormSpec,
    trials: usize,
    seed: u64,
    budget: u64,
) -> Result<NormAxiomReport> {
    check_p(p)?;
    check_dim(v, norm)?;
    if v.row_sum().iter().all(|&x| x == 0.0) {
        return Err(Error::Precondition(
            "I_p(v, ·) is a norm only when Σ v_i ≠ 0; the given tuple sums to zero".into(),
        ));
    }
    let mut report = NormAxiomReport::new(trials, true);
    let ip = |f: &StepFunction| ipf_exact_step(v, f, p, norm, budget).map(|r| r.value);
    let mut rng = stream_rng(seed, 0x6172_6775);
    for trial in 0..trials {
        let cells = 1 + trial % 3;
        let f = random_step_function(&mut rng, cells);
        let g = StepFunction::new(
            f.masses().to_vec(),
            (0..cells).map(|_| StandardNormal.sample(&mut rng)).collect(),
        )?;
        let k: f64 = rng.random_range(-3.0..3.0);
        let i_f = ip(&f)?;
        report.check_homogeneity(ip(&f.scaled(k))?, k.abs(), i_f);
        let i_neg = ip(&f.scaled(-1.0))?;
        if (i_neg - i_f).abs() > slack(i_neg, i_f, REL_SLACK) {
            report.evenness_failures += 1;
        }
        report.check_triangle(ip(&f.add(&g)?)?, i_f, ip(&g)?);
        if !f.is_zero() && !(i_f > 0.0) {
            report.definiteness_failures += 1;
        }
        if trial == 0 {
            report.zero_is_zero = ip(&f.scaled(0.0))? == 0.0;
        }
    }
    Ok(report.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub i_f: f64,
    pub i_g: f64,
    pub holds: bool,
}

/// `I_p(v, f) >= I_p(v, g)` for step functions on a shared partition with
/// `f_i >= g_i >= 0` cellwise.
pub fn check_coupled_monotonicity(
    v: &VectorTuple,
    p: f64,
    norm: &NormSpec,
    f: &StepFunction,
    g: &StepFunction,
    budget: u64,
) -> Result<MonotonicityReport> {
    if f.masses() != g.masses() {
        return Err(Error::Precondition("f and g must share the mass vector".into()));
    }
    if f.values().iter().zip(g.values()).any(|(a, b)| !(a >= b && *b >= 0.0)) {
        return Err(Error::Precondition(
            "coupling requires f_i >= g_i >= 0 on every cell".into(),
        ));
    }
    let i_f = ipf_exact_step(v, f, p, norm, budget)?.value;
    let i_g = ipf_exact_step(v, g, p, norm, budget)?.value;
    Ok(MonotonicityReport {
        i_f,
        i_g,
        holds: le_slack(i_g, i_f, REL_SLACK),
    })
}

/// Level monotonicity for two laws paired atom by atom.
pub fn check_level_monotonicity(
    v: &VectorTuple,
    p: f64,
    norm: &NormSpec,
    f: &SymmetricAtoms,
    g: &SymmetricAtoms,
    budget: u64,
) -> Result<MonotonicityReport> {
    check_coupled_monotonicity(v, p, norm, &f.into(), &g.into(), budget)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarycenterReport {
    pub i_envelope: f64,
    pub i_f: f64,
    /// `(s, I_p(v, h_s))` at every atom-prefix breakpoint.
    pub reductions: Vec<(f64, f64)>,
    pub holds: bool,
}

/// `I_p(v, envelope) >= I_p(v, f) >= I_p(v, h_s)` at every breakpoint `s`.
pub fn check_barycenter_reduction(
    v: &VectorTuple,
    p: f64,
    norm: &NormSpec,
    f: &SymmetricAtoms,
    budget: u64,
) -> Result<BarycenterReport> {
    let i_envelope = ipf_exact(v, &f.envelope_upper()?, p, norm, budget)?.value;
    let i_f = ipf_exact(v, f, p, norm, budget)?.value;
    let mut holds = le_slack(i_f, i_envelope, REL_SLACK);
    let mut reductions = Vec::new();
    for s in f.breakpoints() {
        let h = f.superlevel_reduction(s)?;
        let i_h = ipf_exact(v, &h, p, norm, budget)?.value;
        holds &= le_slack(i_h, i_f, REL_SLACK);
        reductions.push((s, i_h));
    }
    Ok(BarycenterReport {
        i_envelope,
        i_f,
        reductions,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_BUDGET;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const B: u64 = DEFAULT_BUDGET;

    fn abs() -> NormSpec {
        NormSpec::lp(2.0, 1).unwrap()
    }

    #[test]
    fn exact_examples() {
        let v = VectorTuple::scalars(&[1.0, 1.0]).unwrap();
        let r = ipf_exact(&v, &SymmetricAtoms::rademacher(), 2.0, &abs(), B).unwrap();
        assert_relative_eq!(r.value, 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(r.pth_power, 2.0);
        assert_eq!(r.terms_evaluated, 4);
        assert_eq!(r.method, IpMethod::Exact);
        assert!(r.stderr.is_none());
        let v1 = VectorTuple::scalars(&[1.0]).unwrap();
        let f = SymmetricAtoms::two_valued(1.0, 0.25).unwrap();
        assert_relative_eq!(ipf_exact(&v1, &f, 1.0, &abs(), B).unwrap().value, 0.5);
        let z = VectorTuple::zeros(3, 2).unwrap();
        let r = ipf_exact(&z, &f, 2.0, &NormSpec::lp(2.0, 2).unwrap(), B).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn exact_errors() {
        let v = VectorTuple::scalars(&[1.0; 12]).unwrap();
        let f = SymmetricAtoms::new(vec![(2.0, 0.1), (1.0, 0.1)]).unwrap();
        match ipf_exact(&v, &f, 2.0, &abs(), 1000) {
            Err(Error::BudgetExceeded { terms, budget }) => {
                assert_eq!(terms, 5u128.pow(12));
                assert_eq!(budget, 1000);
            }
            other => panic!("{other:?}"),
        }
        let v2 = VectorTuple::new(vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            ipf_exact(&v2, &f, 2.0, &abs(), B),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ipf_exact(&v2, &f, 0.5, &NormSpec::lp(2.0, 2).unwrap(), B).is_err());
    }

    #[test]
    fn two_valued_examples() {
        let v1 = VectorTuple::scalars(&[1.0]).unwrap();
        assert_relative_eq!(
            ipf_two_valued_exact(&v1, 0.25, 1.0, &abs(), B).unwrap().value,
            0.5,
            max_relative = 1e-15
        );
        let v2 = VectorTuple::scalars(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(
            ipf_two_valued_exact(&v2, 0.5, 2.0, &abs(), B).unwrap().value,
            2f64.sqrt(),
            max_relative = 1e-15
        );
        assert!(ipf_two_valued_exact(&v2, 0.6, 2.0, &abs(), B).is_err());
        assert!(ipf_two_valued_exact(&v2, 0.25, 2.0, &abs(), 3).is_err());
    }

    #[test]
    fn two_valued_half_is_rademacher() {
        let mut rng = stream_rng(5, 5);
        let norm = NormSpec::lp(3.0, 2).unwrap();
        for n in 1..=6 {
            let v = VectorTuple::random(n, 2, &mut rng);
            for p in [1.0, 2.5] {
                let a = ipf_two_valued_exact(&v, 0.5, p, &norm, B).unwrap().value;
                let b = ipf_exact(&v, &SymmetricAtoms::rademacher(), p, &norm, B).unwrap().value;
                assert_relative_eq!(a, b, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn monte_carlo_examples() {
        let v = VectorTuple::scalars(&[1.0, 1.0]).unwrap();
        let r = SymmetricAtoms::rademacher();
        let mc = ipf_monte_carlo(&v, &r, 2.0, &abs(), 100_000, 1).unwrap();
        let se = mc.stderr.unwrap();
        assert!(se > 0.0);
        assert!((mc.pth_power - 2.0).abs() <= 4.0 * se, "{mc:?}");
        assert_eq!(mc.terms_evaluated, 100_000);
        let again = ipf_monte_carlo(&v, &r, 2.0, &abs(), 100_000, 1).unwrap();
        assert_eq!(mc, again);
        let z = VectorTuple::zeros(2, 1).unwrap();
        let mz = ipf_monte_carlo(&z, &r, 2.0, &abs(), 10, 0).unwrap();
        assert_eq!((mz.pth_power, mz.stderr), (0.0, Some(0.0)));
        let m0 = ipf_monte_carlo(&v, &SymmetricAtoms::zero(), 2.0, &abs(), 10, 0).unwrap();
        assert_eq!(m0.value, 0.0);
        assert!(ipf_monte_carlo(&v, &r, 2.0, &abs(), 1, 0).is_err());
        let (lo, hi) = mc.interval(2.0, 4.0);
        assert!(lo <= 2f64.sqrt() && 2f64.sqrt() <= hi);
    }

    #[test]
    fn theorem1_examples() {
        let r = SymmetricAtoms::rademacher();
        let v = VectorTuple::scalars(&[1.0, 1.0]).unwrap();
        let rep = verify_theorem1(&v, &r, 1.0, 1.0, &abs(), BoundSide::Lower, B).unwrap();
        assert_relative_eq!(rep.i_p, 1.0);
        assert_relative_eq!(rep.rhs, 1.0, max_relative = 1e-15);
        assert!(rep.holds);
        let v1 = VectorTuple::new(vec![vec![0.3, -1.2]]).unwrap();
        let l2 = NormSpec::lp(2.0, 2).unwrap();
        let rep = verify_theorem1(&v1, &r, 2.0, 2.0, &l2, BoundSide::Lower, B).unwrap();
        assert!(rep.holds);
        assert_relative_eq!(rep.i_p, rep.rhs, max_relative = 1e-14);
        assert!(matches!(
            verify_theorem1(&v, &r, 1.0, 2.0, &abs(), BoundSide::Lower, B),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            verify_theorem1(&v, &r, 2.0, 1.0, &abs(), BoundSide::Upper, B),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn l2_lower_constant_max_form_fails() {
        // f = ±1 on mass 1/8 each, n = 1, p = 1: I_1 = E|f| = 1/4, while the
        // max form gives A_1 · (1/4)^{-1/2} · (1/4) = 2^{-1/2}/2 > 1/4
        let f = SymmetricAtoms::two_valued(1.0, 0.125).unwrap();
        let v = VectorTuple::scalars(&[1.0]).unwrap();
        let max = verify_theorem1_l2(&v, &f, 1.0, &abs(), BoundSide::Lower, L2ConstantVariant::PaperMax, B).unwrap();
        assert_eq!(max.i_p, 0.25);
        assert_relative_eq!(max.rhs, 0.5 * std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        assert!(!max.holds);
        let min = verify_theorem1_l2(&v, &f, 1.0, &abs(), BoundSide::Lower, L2ConstantVariant::Min, B).unwrap();
        assert!(min.holds);
        let up = verify_theorem1_l2(&v, &f, 1.0, &abs(), BoundSide::Upper, L2ConstantVariant::Min, B).unwrap();
        assert!(up.holds);
    }

    #[test]
    fn value_axioms_rademacher() {
        let rep = check_value_norm_axioms(
            &SymmetricAtoms::rademacher(),
            2.0,
            &NormSpec::lp(1.5, 2).unwrap(),
            200,
            3,
            B,
        )
        .unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.definiteness_mode, "falsification search");
    }

    #[test]
    fn argument_axioms_and_precondition() {
        let v = VectorTuple::scalars(&[1.0, 1.0]).unwrap();
        let rep = check_argument_norm_axioms(&v, 1.5, &abs(), 200, 3, B).unwrap();
        assert!(rep.passed, "{rep:?}");
        let f = StepFunction::from(&SymmetricAtoms::rademacher());
        let a = ipf_exact_step(&v, &f, 3.0, &abs(), B).unwrap().value;
        let b = ipf_exact_step(&v, &f.scaled(2.0), 3.0, &abs(), B).unwrap().value;
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-15);
        let cancel = VectorTuple::scalars(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            check_argument_norm_axioms(&cancel, 2.0, &abs(), 10, 0, B),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn monotonicity_examples() {
        let norm = NormSpec::lp(1.0, 2).unwrap();
        let v = VectorTuple::new(vec![vec![1.0, 0.5], vec![-0.2, 1.0], vec![0.7, 0.7]]).unwrap();
        let f = SymmetricAtoms::two_valued(2.0, 0.25).unwrap();
        let g = SymmetricAtoms::two_valued(1.0, 0.25).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let rep = check_level_monotonicity(&v, p, &norm, &f, &g, B).unwrap();
            assert!(rep.holds && rep.i_f > rep.i_g);
            assert!(check_level_monotonicity(&v, p, &norm, &f, &f, B).unwrap().i_f
                == check_level_monotonicity(&v, p, &norm, &f, &f, B).unwrap().i_g);
        }
        let f = SymmetricAtoms::new(vec![(3.0, 0.125), (1.0, 0.125)]).unwrap();
        let g = SymmetricAtoms::new(vec![(2.0, 0.125), (1.0, 0.125)]).unwrap();
        assert!(check_level_monotonicity(&v, 2.0, &norm, &f, &g, B).unwrap().holds);
        let h = SymmetricAtoms::two_valued(1.0, 0.1).unwrap();
        assert!(check_level_monotonicity(&v, 2.0, &norm, &f, &h, B).is_err());
    }

    #[test]
    fn barycenter_chain_example() {
        let f = SymmetricAtoms::new(vec![(3.0, 0.125), (1.0, 0.125)]).unwrap();
        let v = VectorTuple::scalars(&[1.0, 1.0]).unwrap();
        let rep = check_barycenter_reduction(&v, 2.0, &abs(), &f, B).unwrap();
        assert!(rep.holds);
        // exact enumeration by hand: E|f1+f2|^2 = 2 E f^2 = 5, envelope 9, h_{1/4} = 4
        assert_relative_eq!(rep.i_f, 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(rep.i_envelope, 3.0, max_relative = 1e-15);
        assert_relative_eq!(rep.reductions[1].1, 2.0, max_relative = 1e-15);
        assert_relative_eq!(rep.reductions[0].1, 4.5f64.sqrt(), max_relative = 1e-15);
        let single = SymmetricAtoms::two_valued(2.0, 0.3).unwrap();
        let rep = check_barycenter_reduction(&v, 3.0, &abs(), &single, B).unwrap();
        assert_eq!(rep.i_envelope, rep.i_f);
        assert_eq!(rep.reductions[0].1, rep.i_f);
        let z = VectorTuple::zeros(2, 1).unwrap();
        let rep = check_barycenter_reduction(&z, 2.0, &abs(), &f, B).unwrap();
        assert!(rep.holds && rep.i_f == 0.0);
    }

    #[test]
    fn atom_and_row_permutation_invariance() {
        let norm = NormSpec::lp(1.0, 2).unwrap();
        let mut rng = stream_rng(9, 1);
        let v = VectorTuple::random(4, 2, &mut rng);
        let f = StepFunction::new(vec![0.1, 0.2, 0.05], vec![3.0, 1.0, 0.5]).unwrap();
        let f_perm = StepFunction::new(vec![0.05, 0.1, 0.2], vec![0.5, 3.0, 1.0]).unwrap();
        let a = ipf_exact_step(&v, &f, 1.7, &norm, B).unwrap().value;
        let b = ipf_exact_step(&v.permuted(&[2, 0, 3, 1]), &f_perm, 1.7, &norm, B)
            .unwrap()
            .value;
        assert_relative_eq!(a, b, max_relative = 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn scaling_in_both_arguments(
            entries in proptest::collection::vec(-3.0f64..3.0, 6),
            lambda in -5.0f64..5.0,
            k in 0.0f64..5.0,
            p in 1.0f64..4.0,
        ) {
            let v = VectorTuple::from_flat(3, 2, entries).unwrap();
            let norm = NormSpec::lp(2.5, 2).unwrap();
            let f = SymmetricAtoms::new(vec![(2.0, 0.2), (0.5, 0.1)]).unwrap();
            let base = ipf_exact(&v, &f, p, &norm, B).unwrap().value;
            let sv = ipf_exact(&v.scaled(lambda), &f, p, &norm, B).unwrap().value;
            let sf = ipf_exact(&v, &f.scaled(k).unwrap(), p, &norm, B).unwrap().value;
            prop_assert!((sv - lambda.abs() * base).abs() <= 1e-12 * base.max(1.0) * lambda.abs().max(1.0));
            prop_assert!((sf - k * base).abs() <= 1e-12 * base.max(1.0) * k.max(1.0));
        }
    }
}
