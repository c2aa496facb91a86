//! Norms on ℝ^d: the `l^r` family and polytope gauges, dual exponents, and
//! comparison constants `inf/sup ‖x‖_A / ‖x‖_B`.

use std::fmt;
use std::str::FromStr;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// An exponent in `[1, ∞]`. Infinity is its own case, never a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(r: f64) -> Result<Self> {
        if r == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if r >= 1.0 && r.is_finite() {
            Ok(Exponent::Finite(r))
        } else {
            Err(Error::Domain(format!("exponent must lie in [1, inf], got {r}")))
        }
    }

    /// `1/r`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(r) => 1.0 / r,
            Exponent::Infinity => 0.0,
        }
    }

    /// Hölder conjugate `r*` with `1/r + 1/r* = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(r) => Exponent::Finite(r / (r - 1.0)),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(r) => r,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) => write!(f, "{r}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => {
                let r: f64 = t
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid exponent `{t}`")))?;
                Exponent::new(r)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(r) => s.serialize_f64(*r),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(r) => Exponent::new(r),
            Repr::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Gauge of the convex hull of a symmetric, spanning vertex set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeGauge {
    vertices: Vec<Vec<f64>>,
    dim: usize,
}

/// Gauges are evaluated by LP; keep the dimension small.
pub const MAX_POLYTOPE_DIM: usize = 8;

impl PolytopeGauge {
    /// Symmetrizes the vertex list (adds `-v` for every `v`) and checks that
    /// it spans ℝ^d.
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Domain("polytope needs at least one vertex".into()))?;
        if dim == 0 || dim > MAX_POLYTOPE_DIM {
            return Err(Error::Domain(format!(
                "polytope dimension must be in 1..={MAX_POLYTOPE_DIM}, got {dim}"
            )));
        }
        let mut sym: Vec<Vec<f64>> = Vec::with_capacity(2 * vertices.len());
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain("non-finite vertex coordinate".into()));
            }
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            for w in [v.clone(), neg] {
                if !sym.contains(&w) {
                    sym.push(w);
                }
            }
        }
        if rank(&sym, dim) < dim {
            return Err(Error::Domain(
                "polytope vertices do not span the ambient space".into(),
            ));
        }
        Ok(PolytopeGauge { vertices: sym, dim })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `min Σλ_j` subject to `Σ λ_j v_j = x`, `λ >= 0`.
    fn gauge(&self, x: &[f64]) -> Result<f64> {
        if x.iter().all(|&c| c == 0.0) {
            return Ok(0.0);
        }
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = self
            .vertices
            .iter()
            .map(|_| lp.add_var(1.0, (0.0, f64::INFINITY)))
            .collect();
        for (k, &xk) in x.iter().enumerate() {
            let row: Vec<_> = vars
                .iter()
                .zip(&self.vertices)
                .filter(|(_, v)| v[k] != 0.0)
                .map(|(&var, v)| (var, v[k]))
                .collect();
            lp.add_constraint(row.as_slice(), ComparisonOp::Eq, xk);
        }
        let outcome = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
        let sol = outcome
            .solution()
            .ok_or_else(|| Error::Lp("solver interrupted".into()))?;
        Ok(sol.objective().max(0.0))
    }
}

fn rank(rows: &[Vec<f64>], dim: usize) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let mut r = 0;
    for col in 0..dim {
        let Some(piv) = (r..m.len()).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
        else {
            break;
        };
        if m[piv][col].abs() <= tol {
            continue;
        }
        m.swap(r, piv);
        for i in r + 1..m.len() {
            let f = m[i][col] / m[r][col];
            for j in col..dim {
                m[i][j] -= f * m[r][j];
            }
        }
        r += 1;
    }
    r
}

/// A norm description with an evaluation contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Lp { r: Exponent, dim: usize },
    Polytope(PolytopeGauge),
}

impl NormSpec {
    pub fn lp(r: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("norm dimension must be positive".into()));
        }
        Ok(NormSpec::Lp {
            r: Exponent::new(r)?,
            dim,
        })
    }

    pub fn lp_exp(r: Exponent, dim: usize) -> Self {
        NormSpec::Lp { r, dim }
    }

    /// The cube `{‖x‖_∞ <= 1}` as a norm.
    pub fn cube(dim: usize) -> Self {
        NormSpec::Lp {
            r: Exponent::Infinity,
            dim,
        }
    }

    /// The crosspolytope `{‖x‖_1 <= 1}` as a norm.
    pub fn crosspolytope(dim: usize) -> Self {
        NormSpec::Lp {
            r: Exponent::Finite(1.0),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NormSpec::Lp { dim, .. } => *dim,
            NormSpec::Polytope(g) => g.dim,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        self.eval_unchecked(x)
    }

    /// Evaluation without the dimension check, for hot loops that checked once.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Result<f64> {
        match self {
            NormSpec::Lp { r, .. } => Ok(lp_norm(*r, x)),
            NormSpec::Polytope(g) => g.gauge(x),
        }
    }

    /// The `l^r` exponent, if this is an `l^r` norm.
    pub fn lp_exponent(&self) -> Option<Exponent> {
        match self {
            NormSpec::Lp { r, .. } => Some(*r),
            NormSpec::Polytope(_) => None,
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lp { r, dim } => write!(f, "lp:{r}:{dim}"),
            NormSpec::Polytope(g) => write!(f, "polytope[{} vertices, d={}]", g.vertices.len(), g.dim),
        }
    }
}

/// `‖x‖_r`.
pub fn lp_norm(r: Exponent, x: &[f64]) -> f64 {
    match r {
        Exponent::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        Exponent::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(2.0) => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Exponent::Finite(r) => {
            let m = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            if m == 0.0 {
                return 0.0;
            }
            m * x.iter().map(|v| (v.abs() / m).powf(r)).sum::<f64>().powf(1.0 / r)
        }
    }
}

/// The dual of `l^r` is `l^{r*}`. Polytope gauges are not supported.
pub fn dual_norm_spec(spec: &NormSpec) -> Result<NormSpec> {
    match spec {
        NormSpec::Lp { r, dim } => Ok(NormSpec::Lp {
            r: r.conjugate(),
            dim: *dim,
        }),
        NormSpec::Polytope(_) => Err(Error::Unsupported(
            "dual of a polytope gauge is not provided".into(),
        )),
    }
}

/// `lower = inf ‖x‖_A/‖x‖_B`, `upper = sup ‖x‖_A/‖x‖_B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConstants {
    pub lower: f64,
    pub upper: f64,
    pub rigorous: bool,
}

/// Closed-form comparison of `‖·‖_r` against `‖·‖_s` on ℝ^d.
pub fn lp_comparison(r: Exponent, s: Exponent, d: usize) -> ComparisonConstants {
    let e = r.recip() - s.recip();
    let dist = (d as f64).powf(e.abs());
    if e >= 0.0 {
        // r <= s
        ComparisonConstants {
            lower: 1.0,
            upper: dist,
            rigorous: true,
        }
    } else {
        ComparisonConstants {
            lower: 1.0 / dist,
            upper: 1.0,
            rigorous: true,
        }
    }
}

/// Directions used by sampled comparison estimates: `trials` Gaussian
/// directions followed by the coordinate axes and the all-ones vector.
pub(crate) fn comparison_directions(d: usize, trials: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0x636f_6d70);
    let mut dirs: Vec<Vec<f64>> = (0..trials)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        dirs.push(e);
    }
    dirs.push(vec![1.0; d]);
    dirs
}

/// Sampled `inf/sup ‖x‖_A/‖x‖_B`; `rigorous = false`, deterministic in `seed`.
pub fn estimate_comparison(
    a: &NormSpec,
    b: &NormSpec,
    trials: usize,
    seed: u64,
) -> Result<ComparisonConstants> {
    if trials == 0 {
        return Err(Error::Domain("estimate_comparison needs trials > 0".into()));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a == b {
        return Ok(ComparisonConstants {
            lower: 1.0,
            upper: 1.0,
            rigorous: false,
        });
    }
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for x in comparison_directions(a.dim(), trials, seed) {
        let nb = b.eval_unchecked(&x)?;
        if nb == 0.0 {
            continue;
        }
        let ratio = a.eval_unchecked(&x)? / nb;
        lower = lower.min(ratio);
        upper = upper.max(ratio);
    }
    Ok(ComparisonConstants {
        lower,
        upper,
        rigorous: false,
    })
}

/// Comparison constants of `A` against `B`: closed form when both are `l^r`,
/// sampled otherwise.
pub fn comparison(
    a: &NormSpec,
    b: &NormSpec,
    trials: usize,
    seed: u64,
) -> Result<ComparisonConstants> {
    match (a, b) {
        (NormSpec::Lp { r, dim }, NormSpec::Lp { r: s, dim: db }) => {
            if dim != db {
                return Err(Error::DimensionMismatch {
                    expected: *dim,
                    got: *db,
                });
            }
            Ok(lp_comparison(*r, *s, *dim))
        }
        _ => estimate_comparison(a, b, trials, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cross2() -> NormSpec {
        NormSpec::Polytope(
            PolytopeGauge::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        )
    }

    #[test]
    fn eval_examples() {
        assert_eq!(NormSpec::lp(2.0, 3).unwrap().eval(&[3.0, 4.0, 0.0]).unwrap(), 5.0);
        assert_eq!(
            NormSpec::lp(f64::INFINITY, 2).unwrap().eval(&[1.0, -2.0]).unwrap(),
            2.0
        );
        assert_relative_eq!(cross2().eval(&[1.0, 1.0]).unwrap(), 2.0, max_relative = 1e-9);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let n = NormSpec::lp(2.0, 3).unwrap();
        assert_eq!(
            n.eval(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn polytope_symmetrizes_and_checks_span() {
        let g = PolytopeGauge::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(g.vertices().len(), 4);
        assert!(g.vertices().contains(&vec![-1.0, -0.0]) || g.vertices().contains(&vec![-1.0, 0.0]));
        assert!(PolytopeGauge::new(vec![vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
        assert!(PolytopeGauge::new(vec![vec![1.0, 1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn cube_vertices_give_max_norm() {
        let verts = vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0, -1.0], vec![1.0, -1.0, 1.0], vec![-1.0, 1.0, 1.0]];
        let g = NormSpec::Polytope(PolytopeGauge::new(verts).unwrap());
        for x in [[0.3, -0.2, 0.9], [2.0, 0.0, 0.0], [-1.0, 1.5, 0.25]] {
            assert_relative_eq!(
                g.eval(&x).unwrap(),
                lp_norm(Exponent::Infinity, &x),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn dual_examples() {
        let d = |r: f64| dual_norm_spec(&NormSpec::lp(r, 3).unwrap()).unwrap();
        assert_eq!(d(1.0), NormSpec::lp(f64::INFINITY, 3).unwrap());
        assert_eq!(d(f64::INFINITY), NormSpec::lp(1.0, 3).unwrap());
        assert_eq!(d(2.0), NormSpec::lp(2.0, 3).unwrap());
        match d(4.0) {
            NormSpec::Lp { r: Exponent::Finite(r), .. } => assert_relative_eq!(r, 4.0 / 3.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(dual_norm_spec(&cross2()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lp_comparison_examples() {
        let one = Exponent::Finite(1.0);
        let two = Exponent::Finite(2.0);
        let inf = Exponent::Infinity;
        let c = lp_comparison(one, two, 9);
        assert_eq!((c.lower, c.upper), (1.0, 3.0));
        let c = lp_comparison(inf, one, 5);
        assert_relative_eq!(c.lower, 0.2);
        assert_eq!(c.upper, 1.0);
        let c = lp_comparison(two, two, 7);
        assert_eq!((c.lower, c.upper), (1.0, 1.0));
        assert!(c.rigorous);
    }

    #[test]
    fn lp_comparison_reciprocal_pairing() {
        let exps = [1.0, 1.5, 2.0, 3.0, 7.0, f64::INFINITY];
        for &r in &exps {
            for &s in &exps {
                for d in [1, 2, 5, 16] {
                    let (r, s) = (Exponent::new(r).unwrap(), Exponent::new(s).unwrap());
                    let prod = lp_comparison(r, s, d).lower * lp_comparison(s, r, d).upper;
                    assert!((prod - 1.0).abs() <= 4.0 * f64::EPSILON, "{prod}");
                }
            }
        }
    }

    #[test]
    fn estimate_examples() {
        let a = NormSpec::lp(1.0, 2).unwrap();
        let b = NormSpec::lp(2.0, 2).unwrap();
        let c = estimate_comparison(&a, &b, 10_000, 7).unwrap();
        assert!(c.lower >= 1.0 && c.lower <= 1.0 + 1e-9, "{c:?}");
        assert!(c.upper >= 1.3 && c.upper <= 2f64.sqrt() + 1e-12, "{c:?}");
        assert!(!c.rigorous);
        let c = estimate_comparison(&b, &b, 10, 1).unwrap();
        assert_eq!((c.lower, c.upper), (1.0, 1.0));
        let c = estimate_comparison(&cross2(), &a, 200, 3).unwrap();
        assert_relative_eq!(c.lower, 1.0, max_relative = 1e-8);
        assert_relative_eq!(c.upper, 1.0, max_relative = 1e-8);
        assert!(estimate_comparison(&a, &b, 0, 0).is_err());
    }

    #[test]
    fn estimate_bracketed_by_closed_form() {
        let exps = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
        for &r in &exps {
            for &s in &exps {
                let a = NormSpec::lp(r, 4).unwrap();
                let b = NormSpec::lp(s, 4).unwrap();
                let est = estimate_comparison(&a, &b, 500, 11).unwrap();
                let exact = lp_comparison(a.lp_exponent().unwrap(), b.lp_exponent().unwrap(), 4);
                assert!(est.lower >= exact.lower * (1.0 - 1e-12), "{r} {s}");
                assert!(est.upper <= exact.upper * (1.0 + 1e-12), "{r} {s}");
                assert!(est.lower <= est.upper);
            }
        }
    }

    #[test]
    fn exponent_parse_and_serde() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("1.5".parse::<Exponent>().unwrap(), Exponent::Finite(1.5));
        assert!("0.5".parse::<Exponent>().is_err());
        let json = serde_json::to_string(&[Exponent::Finite(2.0), Exponent::Infinity]).unwrap();
        assert_eq!(json, r#"[2.0,"inf"]"#);
        let back: Vec<Exponent> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![Exponent::Finite(2.0), Exponent::Infinity]);
    }

    fn spec_strategy() -> impl Strategy<Value = NormSpec> {
        prop_oneof![
            (1.0f64..6.0).prop_map(|r| NormSpec::lp(r, 3).unwrap()),
            Just(NormSpec::lp(f64::INFINITY, 3).unwrap()),
            Just(NormSpec::Polytope(
                PolytopeGauge::new(vec![
                    vec![1.0, 0.0, 0.0],
                    vec![0.0, 2.0, 0.0],
                    vec![0.0, 0.0, 1.0],
                    vec![1.0, 1.0, 1.0],
                ])
                .unwrap()
            )),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn norm_axioms(
            spec in spec_strategy(),
            x in proptest::collection::vec(-5.0f64..5.0, 3),
            y in proptest::collection::vec(-5.0f64..5.0, 3),
            lambda in -4.0f64..4.0,
        ) {
            let nx = spec.eval(&x).unwrap();
            let ny = spec.eval(&y).unwrap();
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let scaled: Vec<f64> = x.iter().map(|a| lambda * a).collect();
            let nsum = spec.eval(&sum).unwrap();
            prop_assert!(nsum <= (nx + ny) * (1.0 + 1e-9) + 1e-12);
            let ns = spec.eval(&scaled).unwrap();
            prop_assert!((ns - lambda.abs() * nx).abs() <= 1e-9 * ns.max(lambda.abs() * nx) + 1e-12);
            prop_assert_eq!(nx == 0.0, x.iter().all(|&c| c == 0.0));
        }
    }
}
