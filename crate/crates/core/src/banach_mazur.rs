//! Lower bounds on the Banach-Mazur distance from the Khinchine machinery,
//! the exact values they are compared against, and upper bounds
//! `r(T) = ‖T‖_{K→L} ‖T^{-1}‖_{L→K}` from fixed candidate transforms.

use serde::{Deserialize, Serialize};

use crate::constants::a_const;
use crate::error::{Error, Result};
use crate::norms::{comparison_directions, dual_norm_spec, lp_comparison, lp_norm, Exponent, NormSpec};
use crate::{le_slack, slack};

/// Upper end of the exponent search.
pub const P_MAX: f64 = 64.0;
pub const GRID_POINTS: usize = 64;
/// Largest cube whose `2^n` vertices are enumerated.
pub const MAX_CUBE_DIM: usize = 16;
/// Sampled directions used for non-`l^r` comparison constants.
pub const COMPARISON_TRIALS: usize = 4096;
pub const SANDWICH_SLACK: f64 = 1e-9;

/// A lower bound from a sup over an exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSup {
    pub value: f64,
    pub witness_p: f64,
    pub rigorous: bool,
}

/// Maximizes `objective` over `[lo, P_MAX]`: a log-spaced grid, then a
/// golden-section search on the interval bracketing the best grid point.
pub fn maximize_over_p(lo: f64, objective: impl Fn(f64) -> f64) -> (f64, f64) {
    if !(lo < P_MAX) {
        return (objective(lo), lo);
    }
    let ratio = P_MAX / lo;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|k| {
            if k + 1 == GRID_POINTS {
                P_MAX
            } else {
                lo * ratio.powf(k as f64 / (GRID_POINTS - 1) as f64)
            }
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&p| objective(p)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..200 {
        if (b - a) <= 1e-13 * b {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let (mut value, mut arg) = (values[best], grid[best]);
    for (p, v) in [(c, fc), (d, fd)] {
        if v > value {
            value = v;
            arg = p;
        }
    }
    (value, arg)
}

/// `inf ‖x‖_L / ‖x‖_r` and `inf ‖x‖_r / ‖x‖_L` as functions of `r`:
/// closed forms for `l^s`, sampled directions otherwise.
enum Comparator {
    Lp { s: Exponent, dim: usize },
    Sampled { dirs: Vec<Vec<f64>>, values: Vec<f64> },
}

impl Comparator {
    fn new(norm: &NormSpec) -> Result<Self> {
        match norm {
            NormSpec::Lp { r, dim } => Ok(Comparator::Lp { s: *r, dim: *dim }),
            NormSpec::Polytope(_) => {
                let dirs = comparison_directions(norm.dim(), COMPARISON_TRIALS, 0);
                let values = dirs
                    .iter()
                    .map(|x| norm.eval_unchecked(x))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Comparator::Sampled { dirs, values })
            }
        }
    }

    fn rigorous(&self) -> bool {
        matches!(self, Comparator::Lp { .. })
    }

    /// `inf ‖x‖_L / ‖x‖_r`.
    fn norm_over_lp(&self, r: Exponent) -> f64 {
        match self {
            Comparator::Lp { s, dim } => lp_comparison(*s, r, *dim).lower,
            Comparator::Sampled { dirs, values } => dirs
                .iter()
                .zip(values)
                .map(|(x, v)| v / lp_norm(r, x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `inf ‖x‖_r / ‖x‖_L`.
    fn lp_over_norm(&self, r: Exponent) -> f64 {
        match self {
            Comparator::Lp { s, dim } => lp_comparison(r, *s, *dim).lower,
            Comparator::Sampled { dirs, values } => dirs
                .iter()
                .zip(values)
                .map(|(x, v)| lp_norm(r, x) / v)
                .fold(f64::INFINITY, f64::min),
        }
    }
}

fn check_dim(norm: &NormSpec, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if norm.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: norm.dim(),
        });
    }
    Ok(())
}

/// `sup_{p>=1} C_p A_p n^{1/p-1/2}` with
/// `C_p = inf ‖x‖/‖x‖_p · inf ‖y‖_1/‖y‖`, a lower bound on `d(l^∞, L)`.
pub fn theorem2_general_lower(norm: &NormSpec, n: usize) -> Result<ExponentSup> {
    check_dim(norm, n)?;
    let cmp = Comparator::new(norm)?;
    let l1 = cmp.lp_over_norm(Exponent::Finite(1.0));
    let nf = n as f64;
    let (value, witness_p) = maximize_over_p(1.0, |p| {
        cmp.norm_over_lp(Exponent::Finite(p)) * l1 * a_const(p) * nf.powf(1.0 / p - 0.5)
    });
    Ok(ExponentSup {
        value,
        witness_p,
        rigorous: cmp.rigorous(),
    })
}

/// `sup_{p>=q} A_q C̃_p √n` with `C̃_p = inf ‖x‖/‖x‖_p · inf ‖x‖_p/‖x‖`,
/// a lower bound on `d(l^∞, L)` when `L` is of Hanner cotype `(q, n)`.
/// The cotype hypothesis is the caller's assertion and is not checked.
pub fn theorem2_cotype_lower(norm: &NormSpec, q: f64, n: usize) -> Result<ExponentSup> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::Domain(format!("cotype exponent must be finite and >= 1, got {q}")));
    }
    check_dim(norm, n)?;
    let cmp = Comparator::new(norm)?;
    let aq = a_const(q);
    let sqrt_n = (n as f64).sqrt();
    let (value, witness_p) = maximize_over_p(q, |p| {
        let r = Exponent::Finite(p);
        aq * cmp.norm_over_lp(r) * cmp.lp_over_norm(r) * sqrt_n
    });
    Ok(ExponentSup {
        value,
        witness_p,
        rigorous: cmp.rigorous(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop4Bound {
    pub value: f64,
    /// Which of the four cases produced the value: `case1` .. `case4`.
    pub case: String,
    pub witness_p: f64,
    pub rigorous: bool,
}

/// Lower bound on `d(l^p, L)`. For `p >= 2` it is `n^{-1/p}` times a bound
/// on `d(l^∞, L)`; for `p <= 2` it is `n^{1/p-1}` times a bound on
/// `d(l^∞, L*)`. `cotype` asserts a Hanner cotype exponent for `L`,
/// `dual_cotype` one for `L*`. The best applicable case is returned.
pub fn prop4_lower(
    p: Exponent,
    norm: &NormSpec,
    cotype: Option<f64>,
    dual_cotype: Option<f64>,
    n: usize,
) -> Result<Prop4Bound> {
    check_dim(norm, n)?;
    let nf = n as f64;
    let inv_p = p.recip();
    let mut cases: Vec<(&str, Result<ExponentSup>, f64)> = Vec::new();
    if inv_p <= 0.5 {
        let pre = nf.powf(-inv_p);
        cases.push(("case1", theorem2_general_lower(norm, n), pre));
        if let Some(q) = cotype {
            cases.push(("case3", theorem2_cotype_lower(norm, q, n), pre));
        }
    }
    if inv_p >= 0.5 {
        let pre = nf.powf(inv_p - 1.0);
        match dual_norm_spec(norm) {
            Ok(dual) => {
                cases.push(("case2", theorem2_general_lower(&dual, n), pre));
                if let Some(q) = dual_cotype {
                    cases.push(("case4", theorem2_cotype_lower(&dual, q, n), pre));
                }
            }
            Err(e) => cases.push(("case2", Err(e), pre)),
        }
    }
    let mut best: Option<Prop4Bound> = None;
    let mut first_err = None;
    for (case, res, pre) in cases {
        match res {
            Ok(b) => {
                let value = pre * b.value;
                if best.as_ref().is_none_or(|x| value > x.value) {
                    best = Some(Prop4Bound {
                        value,
                        case: case.to_string(),
                        witness_p: b.witness_p,
                        rigorous: b.rigorous,
                    });
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (best, first_err) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::Domain("no applicable case".into())),
    }
}

/// `max{A_p n^{1/2-1/q}, A_{q*} n^{1/p-1/2}}` for `1 <= p < 2 < q <= ∞`.
pub fn corollary1_lower(p: f64, q: Exponent, n: usize) -> Result<f64> {
    if !(1.0..2.0).contains(&p) || q.recip() >= 0.5 {
        return Err(Error::Domain(format!(
            "need 1 <= p < 2 < q, got p = {p}, q = {q}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let nf = n as f64;
    let q_star = q.conjugate().as_f64();
    let first = a_const(p) * nf.powf(0.5 - q.recip());
    let second = a_const(q_star) * nf.powf(1.0 / p - 0.5);
    Ok(first.max(second))
}

/// Exact `d(l^p, l^q)` when the pair is one of: identical exponents,
/// `n = 1`, `(∞, q >= 2) → n^{1/q}`, `(1, q <= 2) → n^{1-1/q}`, the planar
/// isometry of square and diamond, or any of these after swapping the
/// arguments or passing to the dual pair.
pub fn known_distance(p: Exponent, q: Exponent, n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    if n == 1 || p == q {
        return Some(1.0);
    }
    let nf = n as f64;
    let direct = |a: Exponent, b: Exponent| -> Option<f64> {
        let (ia, ib) = (a.recip(), b.recip());
        if ia == 0.0 && ib <= 0.5 {
            Some(nf.powf(ib))
        } else if ia == 1.0 && ib >= 0.5 {
            Some(nf.powf(1.0 - ib))
        } else if n == 2 && ia + ib == 1.0 && (ia == 0.0 || ib == 0.0) {
            Some(1.0)
        } else {
            None
        }
    };
    let (ps, qs) = (p.conjugate(), q.conjugate());
    direct(p, q)
        .or_else(|| direct(q, p))
        .or_else(|| direct(ps, qs))
        .or_else(|| direct(qs, ps))
}

/// A square matrix stored by rows.
pub type Matrix = Vec<Vec<f64>>;

fn check_square(a: &[Vec<f64>], n: usize) -> Result<()> {
    if a.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.len(),
        });
    }
    for row in a {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
    }
    Ok(())
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum()).collect()
}

fn one_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|j| a.iter().map(|r| r[j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss-Jordan inverse with partial pivoting. Matrices whose 1-norm
/// condition number exceeds `1e12` are rejected as singular.
pub fn invert(a: &[Vec<f64>]) -> Result<Matrix> {
    let n = a.len();
    check_square(a, n)?;
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col].abs() <= 1e-14 * scale {
            return Err(Error::Singular);
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        for j in 0..n {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col && m[i][col] != 0.0 {
                let f = m[i][col];
                for j in 0..n {
                    m[i][j] -= f * m[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    if one_norm(a) * one_norm(&inv) > 1e12 {
        return Err(Error::Singular);
    }
    Ok(inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub value: f64,
    /// `false` when the value is a sampled lower estimate of the true norm.
    pub rigorous: bool,
}

fn is_diagonal(a: &[Vec<f64>]) -> bool {
    a.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, v)| i == j || *v == 0.0))
}

/// `‖A‖_{from→to} = sup ‖Ax‖_to / ‖x‖_from`.
///
/// Exact when the unit ball of `from` has enumerable extreme points (the
/// crosspolytope, cubes up to [`MAX_CUBE_DIM`], polytope gauges), when `to`
/// is `l^∞` (row-wise dual norms), or when `A` is diagonal between `l^r`
/// norms. Otherwise sampled and flagged.
pub fn operator_norm(a: &[Vec<f64>], from: &NormSpec, to: &NormSpec) -> Result<OperatorNorm> {
    let n = from.dim();
    if to.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: to.dim(),
        });
    }
    check_square(a, n)?;
    let exact = |value| Ok(OperatorNorm { value, rigorous: true });
    let max_over = |points: &mut dyn Iterator<Item = Vec<f64>>| -> Result<f64> {
        let mut best = 0.0f64;
        for x in points {
            best = best.max(to.eval_unchecked(&mat_vec(a, &x))?);
        }
        Ok(best)
    };
    match (from, to.lp_exponent()) {
        (NormSpec::Lp { r: Exponent::Finite(r), .. }, _) if *r == 1.0 => {
            let mut cols = (0..n).map(|j| a.iter().map(|row| row[j]).collect::<Vec<f64>>());
            return exact(cols.try_fold(0.0f64, |m, c| to.eval_unchecked(&c).map(|v| m.max(v)))?);
        }
        (NormSpec::Lp { r, .. }, Some(Exponent::Infinity)) => {
            return exact(a.iter().map(|row| lp_norm(r.conjugate(), row)).fold(0.0, f64::max));
        }
        (NormSpec::Polytope(g), Some(Exponent::Infinity)) => {
            let v = a
                .iter()
                .map(|row| {
                    g.vertices()
                        .iter()
                        .map(|w| row.iter().zip(w).map(|(u, x)| u * x).sum::<f64>().abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            return exact(v);
        }
        (NormSpec::Lp { r: Exponent::Infinity, .. }, _) if n <= MAX_CUBE_DIM => {
            // x and -x give the same value, so the last sign is fixed
            let mut verts = (0u32..(1u32 << (n - 1))).map(|s| {
                (0..n)
                    .map(|i| if i + 1 < n && s >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect::<Vec<f64>>()
            });
            return exact(max_over(&mut verts)?);
        }
        (NormSpec::Polytope(g), _) => {
            return exact(max_over(&mut g.vertices().iter().cloned())?);
        }
        _ => {}
    }
    if let (Some(r), Some(s)) = (from.lp_exponent(), to.lp_exponent()) {
        if is_diagonal(a) {
            let diag: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
            let e = s.recip() - r.recip();
            let value = if e <= 0.0 {
                lp_norm(Exponent::Infinity, &diag)
            } else {
                lp_norm(Exponent::Finite(1.0 / e), &diag)
            };
            return exact(value);
        }
    }
    let mut best = 0.0f64;
    for x in comparison_directions(n, COMPARISON_TRIALS, 0) {
        let nx = from.eval_unchecked(&x)?;
        if nx > 0.0 {
            best = best.max(to.eval_unchecked(&mat_vec(a, &x))? / nx);
        }
    }
    Ok(OperatorNorm {
        value: best,
        rigorous: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformBound {
    /// `r(T) = forward · inverse`, an upper bound on `d(K, L)` when rigorous.
    pub value: f64,
    pub forward: f64,
    pub inverse: f64,
    pub rigorous: bool,
}

/// `r(T) = ‖T‖_{K→L} · ‖T^{-1}‖_{L→K}`. The forward factor must be exact
/// (`K` with enumerable extreme points, or one of the other closed forms of
/// [`operator_norm`]); the inverse factor may be sampled, which clears the
/// `rigorous` flag.
pub fn upper_bound_via_transform(k: &NormSpec, l: &NormSpec, t: &[Vec<f64>]) -> Result<TransformBound> {
    let n = k.dim();
    check_square(t, n)?;
    let inv = invert(t)?;
    let forward = operator_norm(t, k, l)?;
    if !forward.rigorous {
        return Err(Error::Unsupported(format!(
            "extreme points of {k} are not enumerable for this transform"
        )));
    }
    let inverse = operator_norm(&inv, l, k)?;
    Ok(TransformBound {
        value: forward.value * inverse.value,
        forward: forward.value,
        inverse: inverse.value,
        rigorous: inverse.rigorous,
    })
}

/// Candidate transforms for the upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// Sylvester Hadamard matrix; only for `n` a power of two. The ratio
    /// `r(T)` is invariant under scaling, so the ±1 form is used.
    Hadamard,
    Diagonal { entries: Vec<f64> },
    Matrix { rows: Matrix },
}

impl Transform {
    pub fn tag(&self) -> String {
        match self {
            Transform::Identity => "identity".into(),
            Transform::Hadamard => "hadamard".into(),
            Transform::Diagonal { entries } => {
                let parts: Vec<String> = entries.iter().map(|v| format!("{v}")).collect();
                format!("diag:{}", parts.join(","))
            }
            Transform::Matrix { .. } => "matrix".into(),
        }
    }

    pub fn matrix(&self, n: usize) -> Result<Matrix> {
        match self {
            Transform::Identity => Ok(diagonal(&vec![1.0; n])),
            Transform::Hadamard => sylvester_hadamard(n),
            Transform::Diagonal { entries } => {
                if entries.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: entries.len(),
                    });
                }
                Ok(diagonal(entries))
            }
            Transform::Matrix { rows } => {
                check_square(rows, n)?;
                Ok(rows.clone())
            }
        }
    }
}

fn diagonal(d: &[f64]) -> Matrix {
    let n = d.len();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect())
        .collect()
}

/// The `n × n` Sylvester Hadamard matrix with entries `±1`.
pub fn sylvester_hadamard(n: usize) -> Result<Matrix> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Domain(format!("Hadamard candidate needs n a power of two, got {n}")));
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect())
}

/// The default candidates: identity, plus Hadamard when `n` is a power of two.
pub fn default_candidates(n: usize) -> Vec<Transform> {
    let mut c = vec![Transform::Identity];
    if n.is_power_of_two() && n > 1 {
        c.push(Transform::Hadamard);
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundEntry {
    pub method: String,
    /// The formula value before clamping.
    pub raw: f64,
    /// `max(raw, 1)`.
    pub value: f64,
    pub witness_p: Option<f64>,
    pub rigorous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundEntry {
    pub transform: String,
    pub value: f64,
    pub rigorous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFailure {
    pub method: String,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Methods {
    All,
    Thm2,
    Prop4,
    Cor1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BMBoundReport {
    pub p: Exponent,
    pub q: Exponent,
    pub n: usize,
    pub lower_bounds: Vec<LowerBoundEntry>,
    pub known_exact: Option<f64>,
    /// The smallest upper bound, preferring rigorous ones.
    pub upper_bound: Option<UpperBoundEntry>,
    pub upper_candidates: Vec<UpperBoundEntry>,
    pub failures: Vec<MethodFailure>,
    pub consistent: bool,
}

impl BMBoundReport {
    pub fn best_rigorous_lower(&self) -> Option<f64> {
        self.lower_bounds
            .iter()
            .filter(|b| b.rigorous)
            .map(|b| b.value)
            .reduce(f64::max)
    }
}

/// The Hanner cotype exponent `r` of `l^r` for `1 <= r <= 2`.
fn asserted_cotype(norm: &NormSpec) -> Option<f64> {
    match norm.lp_exponent() {
        Some(Exponent::Finite(r)) if r <= 2.0 => Some(r),
        _ => None,
    }
}

fn entry(method: &str, raw: f64, witness_p: Option<f64>, rigorous: bool) -> LowerBoundEntry {
    LowerBoundEntry {
        method: method.to_string(),
        raw,
        value: raw.max(1.0),
        witness_p,
        rigorous,
    }
}

/// Every applicable lower bound on `d(l^p, l^q)`, the known exact value if
/// any, and the best upper bound over `candidates`.
pub fn sandwich_report(
    p: Exponent,
    q: Exponent,
    n: usize,
    methods: Methods,
    candidates: &[Transform],
) -> Result<BMBoundReport> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let k = NormSpec::lp_exp(p, n);
    let l = NormSpec::lp_exp(q, n);
    let want = |m: Methods| methods == Methods::All || methods == m;
    let mut lower_bounds = Vec::new();
    let mut failures = Vec::new();
    let mut record = |method: &str, res: Result<LowerBoundEntry>| match res {
        Ok(e) => lower_bounds.push(e),
        Err(e) => failures.push(MethodFailure {
            method: method.to_string(),
            error: e.to_string(),
        }),
    };

    // d is symmetric, so Theorem-2 style bounds apply whenever either side is the cube
    let cube_partner = if p.is_infinite() {
        Some(&l)
    } else if q.is_infinite() {
        Some(&k)
    } else {
        None
    };
    if want(Methods::Thm2) {
        if let Some(other) = cube_partner {
            record(
                "thm2-general",
                theorem2_general_lower(other, n).map(|b| entry("thm2-general", b.value, Some(b.witness_p), b.rigorous)),
            );
            if let Some(c) = asserted_cotype(other) {
                record(
                    "thm2-cotype",
                    theorem2_cotype_lower(other, c, n)
                        .map(|b| entry("thm2-cotype", b.value, Some(b.witness_p), b.rigorous)),
                );
            }
        }
    }
    if want(Methods::Prop4) {
        for (pe, other, tag) in [(p, &l, "prop4"), (q, &k, "prop4-swapped")] {
            let dual_cotype = dual_norm_spec(other).ok().as_ref().and_then(asserted_cotype);
            record(
                tag,
                prop4_lower(pe, other, asserted_cotype(other), dual_cotype, n).map(|b| {
                    entry(&format!("{tag}:{}", b.case), b.value, Some(b.witness_p), b.rigorous)
                }),
            );
        }
    }
    if want(Methods::Cor1) {
        let pair = if p.recip() > 0.5 && q.recip() < 0.5 {
            Some((p, q))
        } else if q.recip() > 0.5 && p.recip() < 0.5 {
            Some((q, p))
        } else {
            None
        };
        if let Some((a, b)) = pair {
            record("cor1", corollary1_lower(a.as_f64(), b, n).map(|v| entry("cor1", v, None, true)));
        }
    }

    let mut upper_candidates = Vec::new();
    for cand in candidates {
        let tag = cand.tag();
        let res = cand.matrix(n).and_then(|t| {
            upper_bound_via_transform(&k, &l, &t)
                .or_else(|_| invert(&t).and_then(|ti| upper_bound_via_transform(&l, &k, &ti)))
        });
        match res {
            Ok(b) => upper_candidates.push(UpperBoundEntry {
                transform: tag,
                value: b.value,
                rigorous: b.rigorous,
            }),
            Err(e) => failures.push(MethodFailure {
                method: format!("upper:{tag}"),
                error: e.to_string(),
            }),
        }
    }
    let upper_bound = upper_candidates
        .iter()
        .min_by(|a, b| (!a.rigorous, a.value).partial_cmp(&(!b.rigorous, b.value)).unwrap_or(std::cmp::Ordering::Equal))
        .cloned();

    let known_exact = known_distance(p, q, n);
    let lower = lower_bounds
        .iter()
        .filter(|b| b.rigorous)
        .map(|b| b.value)
        .fold(1.0, f64::max);
    let rigorous_upper = upper_bound.as_ref().filter(|u| u.rigorous).map(|u| u.value);
    let mut consistent = true;
    if let Some(kv) = known_exact {
        consistent &= le_slack(lower, kv, SANDWICH_SLACK);
        if let Some(u) = rigorous_upper {
            consistent &= le_slack(kv, u, SANDWICH_SLACK);
        }
    }
    if let Some(u) = rigorous_upper {
        consistent &= le_slack(lower, u, SANDWICH_SLACK);
    }
    Ok(BMBoundReport {
        p,
        q,
        n,
        lower_bounds,
        known_exact,
        upper_bound,
        upper_candidates,
        failures,
        consistent,
    })
}

/// `a` equals `b` up to the sandwich slack.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= slack(a, b, SANDWICH_SLACK)
}
