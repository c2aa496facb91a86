//! Hanner type / cotype `(q, n)` by exhaustive sign-pattern enumeration,
//! random counterexample search, and the Hlawka inequality.
//!
//! A norm is of Hanner cotype `(q, n)` when
//! `Σ_ε ‖Σ ε_i x_i‖^q >= Σ_ε |Σ ε_i ‖x_i‖|^q` for all `x_1..x_n`, and of
//! Hanner type `(q, n)` when the reverse holds. Sampling can falsify either
//! property but never certify it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::VectorTuple;
use crate::norms::NormSpec;
use crate::rng::stream_rng;
use crate::sum::CompensatedSum;
use crate::{slack, REL_SLACK};

pub const MAX_HANNER_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HannerMode {
    Type,
    Cotype,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HannerVerdict {
    CotypeConsistent,
    TypeConsistent,
    ViolatedCotype,
    ViolatedType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HannerReport {
    /// `Σ_ε ‖Σ ε_i x_i‖^q` over all `2^n` patterns.
    pub lhs: f64,
    /// `Σ_ε |Σ ε_i ‖x_i‖|^q` over all `2^n` patterns.
    pub rhs: f64,
    pub gap: f64,
    pub cotype_consistent: bool,
    pub type_consistent: bool,
}

impl HannerReport {
    pub fn verdict(&self, mode: HannerMode) -> HannerVerdict {
        match (mode, self.cotype_consistent, self.type_consistent) {
            (HannerMode::Cotype, true, _) => HannerVerdict::CotypeConsistent,
            (HannerMode::Cotype, false, _) => HannerVerdict::ViolatedCotype,
            (HannerMode::Type, _, true) => HannerVerdict::TypeConsistent,
            (HannerMode::Type, _, false) => HannerVerdict::ViolatedType,
        }
    }

    /// Violation size relative to the larger side, `0` when consistent.
    pub fn relative_violation(&self, mode: HannerMode) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE);
        let v = match mode {
            HannerMode::Cotype => -self.gap,
            HannerMode::Type => self.gap,
        };
        (v / scale).max(0.0)
    }
}

/// Both sides of the Hanner inequality. The global sign `ε_1 = +1` is fixed
/// and both sums doubled, since each side is even in `ε`.
pub fn hanner_gap(norm: &NormSpec, vectors: &VectorTuple, q: f64) -> Result<HannerReport> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Domain(format!("q must be positive, got {q}")));
    }
    if vectors.d() != norm.dim() {
        return Err(Error::DimensionMismatch {
            expected: norm.dim(),
            got: vectors.d(),
        });
    }
    let n = vectors.n();
    if n > MAX_HANNER_N {
        return Err(Error::Domain(format!("n must be <= {MAX_HANNER_N}, got {n}")));
    }
    let norms: Vec<f64> = vectors
        .rows()
        .map(|r| norm.eval_unchecked(r))
        .collect::<Result<_>>()?;
    let d = vectors.d();
    let mut lhs = CompensatedSum::default();
    let mut rhs = CompensatedSum::default();
    let mut x = vec![0.0; d];
    for signs in 0u32..(1u32 << (n - 1)) {
        x.copy_from_slice(vectors.row(0));
        let mut scalar = norms[0];
        for i in 1..n {
            let eps = if signs >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
            for (c, r) in x.iter_mut().zip(vectors.row(i)) {
                *c += eps * r;
            }
            scalar += eps * norms[i];
        }
        lhs.add(norm.eval_unchecked(&x)?.powf(q));
        rhs.add(scalar.abs().powf(q));
    }
    let lhs = 2.0 * lhs.value();
    let rhs = 2.0 * rhs.value();
    let gap = lhs - rhs;
    let tol = slack(lhs, rhs, REL_SLACK);
    Ok(HannerReport {
        lhs,
        rhs,
        gap,
        cotype_consistent: gap >= -tol,
        type_consistent: gap <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    /// The violating tuple scaled to unit Frobenius norm.
    pub witness: VectorTuple,
    pub relative_violation: f64,
    pub report: HannerReport,
}

/// Random search for a tuple violating Hanner `mode` `(q, n)`. Entries are
/// i.i.d. standard normal; the first violation beyond the slack is returned.
pub fn falsify_hanner(
    norm: &NormSpec,
    q: f64,
    n: usize,
    mode: HannerMode,
    trials: usize,
    seed: u64,
) -> Result<Option<Counterexample>> {
    if trials == 0 {
        return Err(Error::Domain("falsify_hanner needs trials >= 1".into()));
    }
    if n == 0 {
        return Err(Error::Domain("falsify_hanner needs n >= 1".into()));
    }
    let d = norm.dim();
    let mut rng = stream_rng(seed, 0x6861_6e6e);
    for trial in 0..trials {
        let v = VectorTuple::random(n, d, &mut rng);
        let report = hanner_gap(norm, &v, q)?;
        let violated = match mode {
            HannerMode::Cotype => !report.cotype_consistent,
            HannerMode::Type => !report.type_consistent,
        };
        if violated {
            let fro = v.frobenius();
            return Ok(Some(Counterexample {
                trial,
                witness: v.scaled(1.0 / fro),
                relative_violation: report.relative_violation(mode),
                report,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HlawkaReport {
    pub gap: f64,
    pub holds: bool,
}

/// `‖x‖+‖y‖+‖z‖+‖x+y+z‖ - ‖x+y‖ - ‖y+z‖ - ‖z+x‖`.
pub fn hlawka_check(norm: &NormSpec, x: &[f64], y: &[f64], z: &[f64]) -> Result<HlawkaReport> {
    let add = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u + v).collect() };
    for w in [x, y, z] {
        if w.len() != norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: norm.dim(),
                got: w.len(),
            });
        }
    }
    let xyz = add(&add(x, y), z);
    let pos = norm.eval_unchecked(x)? + norm.eval_unchecked(y)? + norm.eval_unchecked(z)? + norm.eval_unchecked(&xyz)?;
    let neg = norm.eval_unchecked(&add(x, y))? + norm.eval_unchecked(&add(y, z))? + norm.eval_unchecked(&add(z, x))?;
    let gap = pos - neg;
    Ok(HlawkaReport {
        gap,
        holds: gap >= -slack(pos, neg, REL_SLACK),
    })
}

/// Random Hlawka search; returns the number of violations in `trials`.
pub fn falsify_hlawka(norm: &NormSpec, trials: usize, seed: u64) -> Result<usize> {
    let d = norm.dim();
    let mut rng = stream_rng(seed, 0x686c_6177);
    let mut bad = 0;
    for _ in 0..trials {
        let t = VectorTuple::random(3, d, &mut rng);
        if !hlawka_check(norm, t.row(0), t.row(1), t.row(2))?.holds {
            bad += 1;
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sign_sums_brute(norm: &NormSpec, v: &VectorTuple, q: f64) -> (f64, f64) {
        let n = v.n();
        let (mut l, mut r) = (0.0, 0.0);
        for s in 0u32..(1 << n) {
            let mut x = vec![0.0; v.d()];
            let mut sc = 0.0;
            for i in 0..n {
                let e = if s >> i & 1 == 1 { -1.0 } else { 1.0 };
                for (c, w) in x.iter_mut().zip(v.row(i)) {
                    *c += e * w;
                }
                sc += e * norm.eval(v.row(i)).unwrap();
            }
            l += norm.eval(&x).unwrap().powf(q);
            r += f64::abs(sc).powf(q);
        }
        (l, r)
    }

    #[test]
    fn l1_unit_vectors() {
        let norm = NormSpec::lp(1.0, 2).unwrap();
        let v = VectorTuple::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let rep = hanner_gap(&norm, &v, 1.0).unwrap();
        assert_eq!((rep.lhs, rep.rhs, rep.gap), (8.0, 4.0, 4.0));
        assert_eq!(rep.verdict(HannerMode::Cotype), HannerVerdict::CotypeConsistent);
        assert_eq!(rep.verdict(HannerMode::Type), HannerVerdict::ViolatedType);
        assert_relative_eq!(rep.relative_violation(HannerMode::Type), 0.5);
    }

    #[test]
    fn halving_matches_full_enumeration() {
        let mut rng = stream_rng(1, 1);
        for (r, q) in [(1.0, 1.0), (1.5, 1.5), (3.0, 2.5), (f64::INFINITY, 1.0)] {
            let norm = NormSpec::lp(r, 3).unwrap();
            for n in 1..=6 {
                let v = VectorTuple::random(n, 3, &mut rng);
                let rep = hanner_gap(&norm, &v, q).unwrap();
                let (l, rr) = sign_sums_brute(&norm, &v, q);
                assert_relative_eq!(rep.lhs, l, max_relative = 1e-13);
                assert_relative_eq!(rep.rhs, rr, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn euclidean_gap_vanishes_and_n1() {
        let mut rng = stream_rng(2, 2);
        let l2 = NormSpec::lp(2.0, 4).unwrap();
        for n in 1..=7 {
            let v = VectorTuple::random(n, 4, &mut rng);
            let rep = hanner_gap(&l2, &v, 2.0).unwrap();
            assert!(rep.gap.abs() <= 1e-9 * rep.lhs, "{rep:?}");
            assert!(rep.cotype_consistent && rep.type_consistent);
        }
        let l3 = NormSpec::lp(3.0, 4).unwrap();
        let v = VectorTuple::random(1, 4, &mut rng);
        assert!(hanner_gap(&l3, &v, 1.7).unwrap().gap.abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let norm = NormSpec::lp(1.0, 2).unwrap();
        let v = VectorTuple::new(vec![vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(hanner_gap(&norm, &v, 1.0), Err(Error::DimensionMismatch { .. })));
        let big = VectorTuple::zeros(21, 2).unwrap();
        assert!(hanner_gap(&norm, &big, 1.0).is_err());
        assert!(falsify_hanner(&norm, 1.0, 2, HannerMode::Type, 0, 0).is_err());
    }

    #[test]
    fn falsifier_examples() {
        let l1 = NormSpec::lp(1.0, 2).unwrap();
        let ce = falsify_hanner(&l1, 1.0, 2, HannerMode::Type, 1000, 0).unwrap().unwrap();
        assert!(ce.relative_violation > 0.0);
        assert_relative_eq!(ce.witness.frobenius(), 1.0, max_relative = 1e-12);
        assert!(falsify_hanner(&NormSpec::lp(1.0, 3).unwrap(), 1.0, 2, HannerMode::Cotype, 2000, 1)
            .unwrap()
            .is_none());
        let l2 = NormSpec::lp(2.0, 3).unwrap();
        for mode in [HannerMode::Type, HannerMode::Cotype] {
            assert!(falsify_hanner(&l2, 2.0, 3, mode, 500, 2).unwrap().is_none());
        }
    }

    #[test]
    fn hlawka_examples() {
        let l2 = NormSpec::lp(2.0, 3).unwrap();
        let x = [1.0, 2.0, -0.5];
        let y = [0.3, -1.0, 2.0];
        let rep = hlawka_check(&l2, &x, &y, &[0.0; 3]).unwrap();
        assert!(rep.gap.abs() < 1e-12);
        assert_eq!(falsify_hlawka(&l2, 2000, 0).unwrap(), 0);
        assert_eq!(falsify_hlawka(&NormSpec::lp(1.0, 3).unwrap(), 2000, 0).unwrap(), 0);
        // l^∞ in the plane is isometric to l^1, but in ℝ^3 Hlawka fails
        let linf = NormSpec::lp(f64::INFINITY, 3).unwrap();
        let rep = hlawka_check(&linf, &[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]).unwrap();
        assert!(!rep.holds);
        assert!(hlawka_check(&l2, &x, &y, &[0.0; 2]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn gap_symmetries(
            entries in proptest::collection::vec(-2.0f64..2.0, 8),
            lambda in 0.1f64..5.0,
            flip in 0usize..4,
            q in 1.0f64..3.0,
        ) {
            let norm = NormSpec::lp(1.5, 2).unwrap();
            let v = VectorTuple::from_flat(4, 2, entries.clone()).unwrap();
            let base = hanner_gap(&norm, &v, q).unwrap();
            let perm = hanner_gap(&norm, &v.permuted(&[3, 1, 0, 2]), q).unwrap();
            let mut flipped = entries.clone();
            flipped[2 * flip] *= -1.0;
            flipped[2 * flip + 1] *= -1.0;
            let fl = hanner_gap(&norm, &VectorTuple::from_flat(4, 2, flipped).unwrap(), q).unwrap();
            let sc = hanner_gap(&norm, &v.scaled(lambda), q).unwrap();
            let tol = 1e-12 * base.lhs.max(base.rhs).max(1e-300);
            prop_assert!((perm.gap - base.gap).abs() <= 10.0 * tol);
            prop_assert!((fl.gap - base.gap).abs() <= 10.0 * tol);
            let want = lambda.powf(q) * base.gap;
            prop_assert!((sc.gap - want).abs() <= 1e-11 * lambda.powf(q) * base.lhs.max(base.rhs).max(1e-300));
        }

        #[test]
        fn hlawka_implies_cotype_1_3(entries in proptest::collection::vec(-2.0f64..2.0, 9)) {
            for r in [1.0, 1.3, 2.0] {
                let norm = NormSpec::lp(r, 3).unwrap();
                let t = VectorTuple::from_flat(3, 3, entries.clone()).unwrap();
                let hl = hlawka_check(&norm, t.row(0), t.row(1), t.row(2)).unwrap();
                let hg = hanner_gap(&norm, &t, 1.0).unwrap();
                if hl.holds {
                    prop_assert!(hg.cotype_consistent, "r={} {:?}", r, hg);
                }
            }
        }
    }
}
