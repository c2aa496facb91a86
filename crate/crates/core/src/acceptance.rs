//! The acceptance suite: ten criteria covering every formula the crate
//! implements, each reduced to a pass/fail line.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::banach_mazur::{
    corollary1_lower, default_candidates, known_distance, sandwich_report, theorem2_cotype_lower, Methods,
    SANDWICH_SLACK,
};
use crate::combinatorics::{verify_lemma1, SubsetRatioInput};
use crate::constants::khinchine_constants;
use crate::distributions::{StepFunction, SymmetricAtoms};
use crate::error::{Error, Result};
use crate::functional::{
    check_argument_norm_axioms, check_barycenter_reduction, check_coupled_monotonicity, check_value_norm_axioms,
    ipf_exact, ipf_monte_carlo, ipf_two_valued_exact, verify_theorem1, BoundSide, VectorTuple,
};
use crate::hanner::{falsify_hanner, falsify_hlawka, hanner_gap, HannerMode};
use crate::norms::{Exponent, NormSpec};
use crate::rng::stream_rng;
use crate::{le_slack, DEFAULT_BUDGET, REL_SLACK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "Khinchine constants"),
    (2, "classical Khinchine reproduction"),
    (3, "two-valued expansion equivalence"),
    (4, "Monte Carlo consistency"),
    (5, "generalized Khinchine bounds"),
    (6, "structure properties"),
    (7, "subset power-mean bounds"),
    (8, "Hanner type and cotype"),
    (9, "Banach-Mazur bounds"),
    (10, "norm axioms of I_p"),
];

type Outcome = Result<(bool, String)>;

/// Runs one criterion; an internal error counts as a failure.
pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionResult> {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| n.to_string())
        .ok_or_else(|| Error::Domain(format!("no acceptance criterion {id}")))?;
    let outcome = match id {
        1 => c1_constants(),
        2 => c2_classical(seed),
        3 => c3_two_valued(seed),
        4 => c4_monte_carlo(seed),
        5 => c5_theorem1(seed),
        6 => c6_structure(seed),
        7 => c7_lemma1(seed),
        8 => c8_hanner(seed),
        9 => c9_banach_mazur(),
        _ => c10_norm_axioms(seed),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Ok(CriterionResult {
        id,
        name,
        passed,
        detail,
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|(id, _)| run_criterion(*id, seed).expect("known criterion id"))
        .collect()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn random_atoms(rng: &mut ChaCha8Rng, max_atoms: usize) -> SymmetricAtoms {
    loop {
        let k = rng.random_range(1..=max_atoms);
        let total: f64 = rng.random_range(0.05..=0.5);
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let ws: f64 = w.iter().sum();
        let pairs: Vec<(f64, f64)> = w
            .iter()
            .map(|wi| (rng.random_range(0.1..3.0), total * wi / ws))
            .collect();
        if let Ok(a) = SymmetricAtoms::new(pairs) {
            return a;
        }
    }
}

fn c1_constants() -> Outcome {
    let k2 = khinchine_constants(2.0)?;
    let k1 = khinchine_constants(1.0)?;
    let k4 = khinchine_constants(4.0)?;
    let exact2 = k2.a_p == 1.0 && k2.b_p == 1.0;
    let a1 = rel_close(k1.a_p, 0.5f64.sqrt(), 1e-12);
    let b4 = rel_close(k4.b_p, 3f64.powf(0.25), 1e-12);
    Ok((
        exact2 && a1 && b4,
        format!("A_2={} B_2={} A_1={:.17} B_4={:.17}", k2.a_p, k2.b_p, k1.a_p, k4.b_p),
    ))
}

fn c2_classical(seed: u64) -> Outcome {
    let norm = NormSpec::lp(2.0, 1)?;
    let rad = SymmetricAtoms::rademacher();
    let mut rng = stream_rng(seed, 2);
    let mut checks = 0;
    let mut fails = 0;
    for trial in 0..1000 {
        let n = 1 + trial % 8;
        let v = VectorTuple::random(n, 1, &mut rng);
        let l2 = v.l2_of_norms(&norm)?;
        for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let k = khinchine_constants(p)?;
            let ip = ipf_exact(&v, &rad, p, &norm, DEFAULT_BUDGET)?.value;
            checks += 1;
            if !(le_slack(k.a_p * l2, ip, REL_SLACK) && le_slack(ip, k.b_p * l2, REL_SLACK)) {
                fails += 1;
            }
        }
    }
    Ok((fails == 0, format!("{checks} checks, {fails} violations")))
}

fn c3_two_valued(seed: u64) -> Outcome {
    let mut rng = stream_rng(seed, 3);
    let norms = [NormSpec::lp(1.0, 2)?, NormSpec::lp(2.0, 2)?, NormSpec::lp(f64::INFINITY, 2)?];
    let mut worst = 0.0f64;
    let mut checks = 0;
    for n in 1..=8 {
        for t in [0.125, 0.25, 0.5] {
            for p in [1.0, 1.5, 2.0, 3.0] {
                for norm in &norms {
                    let v = VectorTuple::random(n, 2, &mut rng);
                    let level: f64 = rng.random_range(0.2..3.0);
                    let law = SymmetricAtoms::two_valued(level, t)?;
                    let a = ipf_exact(&v, &law, p, norm, DEFAULT_BUDGET)?.value;
                    let b = ipf_two_valued_exact(&v.scaled(level), t, p, norm, DEFAULT_BUDGET)?.value;
                    worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
                    checks += 1;
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("{checks} checks, max relative difference {worst:.3e}")))
}

fn c4_monte_carlo(seed: u64) -> Outcome {
    let mut rng = stream_rng(seed, 4);
    let mut inside = 0;
    let mut zs = Vec::new();
    for config in 0..20u64 {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=3);
        let r = [1.0, 2.0, 3.0, f64::INFINITY][rng.random_range(0..4)];
        let p = [1.0, 1.5, 2.0, 3.0, 4.0][rng.random_range(0..5)];
        let norm = NormSpec::lp(r, d)?;
        let v = VectorTuple::random(n, d, &mut rng);
        let f = random_atoms(&mut rng, 3);
        let exact = ipf_exact(&v, &f, p, &norm, DEFAULT_BUDGET)?;
        let mc = ipf_monte_carlo(&v, &f, p, &norm, 100_000, seed.wrapping_add(config))?;
        let se = mc.stderr.unwrap_or(0.0);
        let z = (mc.pth_power - exact.pth_power).abs() / se.max(f64::MIN_POSITIVE);
        if (mc.pth_power - exact.pth_power).abs() <= 4.0 * se {
            inside += 1;
        }
        zs.push(z);
    }
    let zmax = zs.iter().copied().fold(0.0, f64::max);
    Ok((inside >= 19, format!("{inside}/20 within 4 stderr, max |z| = {zmax:.2}")))
}

fn c5_theorem1(seed: u64) -> Outcome {
    let mut rng = stream_rng(seed, 5);
    let mut lower_fails = 0;
    let mut upper_fails = 0;
    let mut min_margin = f64::INFINITY;
    for side in [BoundSide::Lower, BoundSide::Upper] {
        for case in 0..500usize {
            let qs = match side {
                BoundSide::Lower => [1.0, 1.5, 2.0],
                BoundSide::Upper => [2.0, 3.0, 4.0],
            };
            let q = qs[case % 3];
            let p = match side {
                BoundSide::Lower => [q, q + 0.5, q + 1.0, q + 2.0][rng.random_range(0..4)],
                BoundSide::Upper => {
                    let choices: Vec<f64> = [1.0, 1.5, 2.0, 3.0, 4.0].into_iter().filter(|p| *p <= q).collect();
                    choices[rng.random_range(0..choices.len())]
                }
            };
            let n = rng.random_range(1..=5);
            let d = rng.random_range(1..=4);
            let norm = NormSpec::lp(q, d)?;
            let v = VectorTuple::random(n, d, &mut rng);
            let f = random_atoms(&mut rng, 3);
            let rep = verify_theorem1(&v, &f, p, q, &norm, side, DEFAULT_BUDGET)?;
            min_margin = min_margin.min(rep.margin / rep.rhs.max(f64::MIN_POSITIVE));
            if !rep.holds {
                match side {
                    BoundSide::Lower => lower_fails += 1,
                    BoundSide::Upper => upper_fails += 1,
                }
            }
        }
    }
    Ok((
        lower_fails == 0 && upper_fails == 0,
        format!(
            "cotype/lower: {} of 500 violated, type/upper: {} of 500 violated, min relative margin {min_margin:.3e}",
            lower_fails, upper_fails
        ),
    ))
}

fn c6_structure(seed: u64) -> Outcome {
    let mut rng = stream_rng(seed, 6);
    let mut fails = [0usize; 4];
    for case in 0..200usize {
        let n = rng.random_range(1..=5);
        let d = rng.random_range(1..=3);
        let r = [1.0, 1.5, 2.0, 3.0, f64::INFINITY][case % 5];
        let norm = NormSpec::lp(r, d)?;
        let v = VectorTuple::random(n, d, &mut rng);
        let f = random_atoms(&mut rng, 3);
        let p = [1.0, 1.5, 2.0, 3.0, 4.0][rng.random_range(0..5)];

        let sf = StepFunction::from(&f);
        let shrunk: Vec<f64> = sf.values().iter().map(|a| a * rng.random_range(0.0..=1.0)).collect();
        let g = StepFunction::new(sf.masses().to_vec(), shrunk)?;
        if !check_coupled_monotonicity(&v, p, &norm, &sf, &g, DEFAULT_BUDGET)?.holds {
            fails[0] += 1;
        }
        if !check_barycenter_reduction(&v, p, &norm, &f, DEFAULT_BUDGET)?.holds {
            fails[1] += 1;
        }
        let mut prev = 0.0;
        for pp in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let ip = ipf_exact(&v, &f, pp, &norm, DEFAULT_BUDGET)?.value;
            if !le_slack(prev, ip, REL_SLACK) {
                fails[2] += 1;
                break;
            }
            prev = ip;
        }
        let l2 = NormSpec::lp(2.0, d)?;
        let i2 = ipf_exact(&v, &f, 2.0, &l2, DEFAULT_BUDGET)?;
        let want = f.second_moment() * v.l2_of_norms(&l2)?.powi(2);
        if (i2.pth_power - want).abs() > REL_SLACK * want.abs().max(1e-300) {
            fails[3] += 1;
        }
    }
    Ok((
        fails.iter().all(|&f| f == 0),
        format!(
            "200 cases; violations: level-monotonicity {}, reduction chain {}, p-monotonicity {}, L2 closed form {}",
            fails[0], fails[1], fails[2], fails[3]
        ),
    ))
}

fn c7_lemma1(seed: u64) -> Outcome {
    let mut rng = stream_rng(seed, 7);
    let alphas = [0.0, 0.5, 1.0, 2.0, 3.0];
    let mut checks = 0;
    let mut fails = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        if x.iter().sum::<f64>() == 0.0 {
            continue;
        }
        for k in 1..=n {
            for alpha in alphas {
                checks += 1;
                if !verify_lemma1(&SubsetRatioInput::new(x.clone(), k, alpha)?)?.holds {
                    fails += 1;
                }
            }
        }
    }
    let mut witness_fails = 0;
    for n in 1..=8usize {
        for k in 1..=n {
            for alpha in alphas {
                let mut e1 = vec![0.0; n];
                e1[0] = 1.0;
                let r1 = crate::combinatorics::subset_power_ratio(&SubsetRatioInput::new(e1, k, alpha)?)?;
                let want1 = if alpha == 0.0 { 1.0 } else { k as f64 / n as f64 };
                let r2 = crate::combinatorics::subset_power_ratio(&SubsetRatioInput::new(vec![1.0; n], k, alpha)?)?;
                let want2 = (k as f64 / n as f64).powf(alpha);
                if r1 != want1 || r2 != want2 {
                    witness_fails += 1;
                }
            }
        }
    }
    Ok((
        fails == 0 && witness_fails == 0,
        format!("{checks} checks, {fails} violations; sharpness witnesses off: {witness_fails}"),
    ))
}

fn c8_hanner(seed: u64) -> Outcome {
    let mut rng = stream_rng(seed, 8);
    let mut worst_l2 = 0.0f64;
    for t in 0..500usize {
        let n = 1 + t % 6;
        let d = 1 + t % 4;
        let v = VectorTuple::random(n, d, &mut rng);
        let rep = hanner_gap(&NormSpec::lp(2.0, d)?, &v, 2.0)?;
        worst_l2 = worst_l2.max(rep.gap.abs() / rep.lhs.max(f64::MIN_POSITIVE));
    }
    let l2_ok = worst_l2 <= 1e-9;

    let l1 = NormSpec::lp(1.0, 2)?;
    let e = VectorTuple::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let e_rep = hanner_gap(&l1, &e, 1.0)?;
    let found = falsify_hanner(&l1, 1.0, 2, HannerMode::Type, 10_000, seed)?;
    let type_ce = !e_rep.type_consistent && found.is_some();

    let mut spurious = Vec::new();
    let mut sub = 0u64;
    for (mode, ps) in [(HannerMode::Cotype, [1.0, 1.5, 2.0]), (HannerMode::Type, [2.0, 3.0, 4.0])] {
        for p in ps {
            for n in 2..=4 {
                for d in 2..=4 {
                    sub += 1;
                    let norm = NormSpec::lp(p, d)?;
                    if let Some(ce) = falsify_hanner(&norm, p, n, mode, 10_000, seed.wrapping_add(sub))? {
                        spurious.push(format!("{mode:?} p={p} n={n} d={d} rel={:.2e}", ce.relative_violation));
                    }
                }
            }
        }
    }
    let mut hlawka_bad = 0;
    for r in [1.0, 2.0] {
        for d in 2..=4 {
            hlawka_bad += falsify_hlawka(&NormSpec::lp(r, d)?, 10_000, seed.wrapping_add(100 + d as u64))?;
        }
    }
    Ok((
        l2_ok && type_ce && spurious.is_empty() && hlawka_bad == 0,
        format!(
            "L2 max |gap|/lhs {worst_l2:.2e}; l1 type-(1,2) counterexample found: {type_ce}; \
             spurious counterexamples: {}; Hlawka violations: {hlawka_bad}",
            if spurious.is_empty() { "none".to_string() } else { spurious.join("; ") }
        ),
    ))
}

fn c9_banach_mazur() -> Outcome {
    let mut ns: Vec<usize> = (2..=100).collect();
    for k in 0..=40 {
        ns.push((100.0 * 10f64.powf(4.0 * k as f64 / 40.0)).round() as usize);
    }
    let mut worst_cor1 = 0.0f64;
    for &n in &ns {
        let v = corollary1_lower(1.0, Exponent::Infinity, n)?;
        let want = (n as f64 / 2.0).sqrt();
        worst_cor1 = worst_cor1.max((v - want).abs() / want);
    }
    let cor1_ok = worst_cor1 <= 1e-12;

    let planar = sandwich_report(Exponent::Finite(1.0), Exponent::Infinity, 2, Methods::All, &default_candidates(2))?;
    let planar_lower = planar.best_rigorous_lower().unwrap_or(f64::NAN);
    let planar_upper = planar.upper_bound.as_ref().map(|u| u.value).unwrap_or(f64::NAN);
    let planar_ok = planar.consistent
        && (planar_lower - 1.0).abs() <= 1e-12
        && planar_upper == 1.0
        && planar.known_exact == Some(1.0);

    let mut cube_bad = Vec::new();
    for q in [Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Finite(4.0), Exponent::Infinity] {
        for n in 1..=16usize {
            let rep = sandwich_report(Exponent::Infinity, q, n, Methods::All, &default_candidates(n))?;
            let known = known_distance(Exponent::Infinity, q, n).unwrap_or(f64::NAN);
            if !rel_close(known, (n as f64).powf(q.recip()), 1e-12) || !rep.consistent {
                cube_bad.push(format!("q={q} n={n}"));
                continue;
            }
            for b in rep.lower_bounds.iter().filter(|b| b.rigorous) {
                if !le_slack(b.value, known, SANDWICH_SLACK) {
                    cube_bad.push(format!("q={q} n={n} {}={}", b.method, b.value));
                }
            }
        }
    }
    let mut worst_tight = 0.0f64;
    for n in 1..=64usize {
        let b = theorem2_cotype_lower(&NormSpec::lp(2.0, n)?, 2.0, n)?;
        worst_tight = worst_tight.max((b.value - (n as f64).sqrt()).abs() / (n as f64).sqrt());
    }
    let tight_ok = worst_tight <= 1e-9;
    Ok((
        cor1_ok && planar_ok && cube_bad.is_empty() && tight_ok,
        format!(
            "cor1 max rel err {worst_cor1:.2e} over {} n; (1,inf,2) lower {planar_lower} upper {planar_upper}; \
             cube pairs off: {}; cotype l2 tightness max rel err {worst_tight:.2e}",
            ns.len(),
            if cube_bad.is_empty() { "none".to_string() } else { cube_bad.join(", ") }
        ),
    ))
}

fn c10_norm_axioms(seed: u64) -> Outcome {
    let mut fails = Vec::new();
    let configs: [(f64, f64, usize); 3] = [(1.0, 1.0, 2), (2.0, 2.0, 3), (3.0, f64::INFINITY, 2)];
    let laws = [
        SymmetricAtoms::rademacher(),
        SymmetricAtoms::new(vec![(2.0, 0.125), (0.5, 0.25)])?,
        SymmetricAtoms::two_valued(1.0, 0.25)?,
    ];
    for (i, ((p, r, d), f)) in configs.iter().zip(&laws).enumerate() {
        let norm = NormSpec::lp(*r, *d)?;
        let rep = check_value_norm_axioms(f, *p, &norm, 1000, seed.wrapping_add(i as u64), DEFAULT_BUDGET)?;
        if !rep.passed {
            fails.push(format!("value-norm p={p} r={r}: {rep:?}"));
        }
        let mut rng = stream_rng(seed, 10 + i as u64);
        let v = VectorTuple::random(3, *d, &mut rng);
        let rep = check_argument_norm_axioms(&v, *p, &norm, 1000, seed.wrapping_add(i as u64), DEFAULT_BUDGET)?;
        if !rep.passed {
            fails.push(format!("argument-norm p={p} r={r}: {rep:?}"));
        }
    }
    let zero_sum = VectorTuple::new(vec![vec![1.0, -2.0], vec![-1.0, 2.0]])?;
    let pre = check_argument_norm_axioms(&zero_sum, 2.0, &NormSpec::lp(2.0, 2)?, 10, seed, DEFAULT_BUDGET);
    let pre_ok = matches!(pre, Err(Error::Precondition(_)));
    Ok((
        fails.is_empty() && pre_ok,
        format!(
            "3 configurations x 1000 trials in v and in f; failures: {}; zero-sum precondition error: {pre_ok}",
            if fails.is_empty() { "none".to_string() } else { fails.join("; ") }
        ),
    ))
}
