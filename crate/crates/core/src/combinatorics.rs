//! The subset-power inequality
//! `min{k/n, (k/n)^α} <= Σ_{|J|=k} (Σ_J x_j)^α / (C(n,k) (Σ x)^α) <= max{k/n, (k/n)^α}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Largest `n` accepted for exhaustive subset enumeration.
pub const MAX_SUBSET_N: usize = 24;

/// Partial sums are recomputed from scratch this often to bound drift.
const RESYNC_EVERY: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRatioInput {
    pub x: Vec<f64>,
    pub k: usize,
    pub alpha: f64,
}

impl SubsetRatioInput {
    pub fn new(x: Vec<f64>, k: usize, alpha: f64) -> Result<Self> {
        let input = SubsetRatioInput { x, k, alpha };
        input.validate()?;
        Ok(input)
    }

    fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.x.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain("entries of x must be finite and >= 0".into()));
        }
        if self.k == 0 || self.k > n {
            return Err(Error::Domain(format!("k must lie in [1, {n}], got {}", self.k)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if n > MAX_SUBSET_N {
            return Err(Error::BudgetExceeded {
                terms: binomial(n, self.k),
                budget: binomial(MAX_SUBSET_N, MAX_SUBSET_N / 2) as u64,
            });
        }
        Ok(())
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Visits every `k`-subset of `{0, …, n-1}` as a bitmask in revolving-door
/// order: consecutive subsets differ by exchanging one element.
///
/// Uses `R(n,k) = R(n-1,k), reverse(R(n-1,k-1)) ∪ {n-1}`.
pub fn revolving_door(n: usize, k: usize, mut visit: impl FnMut(u32)) {
    fn go(n: usize, k: usize, reversed: bool, extra: u32, visit: &mut impl FnMut(u32)) {
        if k == 0 {
            visit(extra);
        } else if k == n {
            visit(extra | ((1u32 << n) - 1));
        } else if !reversed {
            go(n - 1, k, false, extra, visit);
            go(n - 1, k - 1, true, extra | 1 << (n - 1), visit);
        } else {
            go(n - 1, k - 1, false, extra | 1 << (n - 1), visit);
            go(n - 1, k, true, extra, visit);
        }
    }
    if k <= n && n <= 32 {
        go(n, k, false, 0, &mut visit);
    }
}

fn subset_sum(x: &[f64], mask: u32) -> f64 {
    x.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, v)| v)
        .sum()
}

/// Accumulates subset terms. While only a few distinct values occur they are
/// kept with their multiplicities and weighted by exact frequencies, so
/// degenerate inputs such as `(1, 0, …, 0)` and `(1, …, 1)` reproduce `k/n`
/// and `(k/n)^α` to the last bit.
struct TermAccumulator {
    groups: Vec<(f64, u64)>,
    overflow: Option<CompensatedSum>,
}

const MAX_GROUPS: usize = 8;

impl TermAccumulator {
    fn new() -> Self {
        TermAccumulator {
            groups: Vec::new(),
            overflow: None,
        }
    }

    fn add(&mut self, t: f64) {
        if let Some(acc) = self.overflow.as_mut() {
            acc.add(t);
            return;
        }
        if let Some(g) = self.groups.iter_mut().find(|g| g.0 == t) {
            g.1 += 1;
        } else if self.groups.len() < MAX_GROUPS {
            self.groups.push((t, 1));
        } else {
            let mut acc = CompensatedSum::default();
            for &(v, c) in &self.groups {
                acc.add(v * c as f64);
            }
            acc.add(t);
            self.overflow = Some(acc);
        }
    }

    fn mean(&self, count: u128) -> f64 {
        match &self.overflow {
            Some(acc) => acc.value() / count as f64,
            None => {
                let mut acc = CompensatedSum::default();
                for &(v, c) in &self.groups {
                    acc.add(c as f64 / count as f64 * v);
                }
                acc.value()
            }
        }
    }
}

/// `Σ_{|J|=k} (Σ_J x_j)^α / (C(n,k) (Σ x)^α)`, with `0^0 = 1`.
pub fn subset_power_ratio(input: &SubsetRatioInput) -> Result<f64> {
    input.validate()?;
    let x = &input.x;
    let total: f64 = x.iter().sum();
    if total == 0.0 {
        return Err(Error::Domain("x must have a positive sum".into()));
    }
    let alpha = input.alpha;
    let mut acc = TermAccumulator::new();
    let mut prev: Option<u32> = None;
    let mut sum = 0.0;
    let mut steps = 0u64;
    revolving_door(x.len(), input.k, |mask| {
        match prev {
            Some(p) if !steps.is_multiple_of(RESYNC_EVERY) => {
                sum += subset_sum(x, mask & !p) - subset_sum(x, p & !mask);
            }
            _ => sum = subset_sum(x, mask),
        }
        acc.add((sum.max(0.0) / total).powf(alpha));
        prev = Some(mask);
        steps += 1;
    });
    Ok(acc.mean(binomial(x.len(), input.k)))
}

/// `(min{k/n, (k/n)^α}, max{k/n, (k/n)^α})`.
pub fn lemma1_bounds(n: usize, k: usize, alpha: f64) -> Result<(f64, f64)> {
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k must lie in [1, {n}], got {k}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
    }
    let r = k as f64 / n as f64;
    let ra = r.powf(alpha);
    Ok((r.min(ra), r.max(ra)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub ratio: f64,
    pub lo: f64,
    pub hi: f64,
    pub holds: bool,
}

/// Checks the two-sided bound with `1e-12` relative slack.
pub fn verify_lemma1(input: &SubsetRatioInput) -> Result<Lemma1Report> {
    const SLACK: f64 = 1e-12;
    let ratio = subset_power_ratio(input)?;
    let (lo, hi) = lemma1_bounds(input.x.len(), input.k, input.alpha)?;
    let holds = lo * (1.0 - SLACK) <= ratio && ratio <= hi * (1.0 + SLACK);
    Ok(Lemma1Report { ratio, lo, hi, holds })
}
