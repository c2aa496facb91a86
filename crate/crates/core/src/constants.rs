//! Khinchine constants `A_p`, `B_p` and the gamma function they need.
//!
//! `A_p` and `B_p` are the minimum and maximum of
//! `{1, 2^{1/2-1/p}, 2^{1/2} (Γ((p+1)/2)/√π)^{1/p}}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument for which the exact integer / half-integer product is used.
const EXACT_PRODUCT_LIMIT: f64 = 171.0;

/// The gamma function on `(0, 171]`.
///
/// Integers and half-integers are evaluated by their product formulas; all
/// other arguments use a Lanczos approximation (`g = 7`, nine terms) with
/// relative error below `1e-13` on `[0.5, 50]`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x <= EXACT_PRODUCT_LIMIT && (2.0 * x).fract() == 0.0 {
        return Ok(gamma_half_integer(x));
    }
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * lanczos(1.0 - x)));
    }
    Ok(lanczos(x))
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let half = (z + 0.5) / 2.0;
    // split the power so that t^(z+1/2) does not overflow before exp(-t) shrinks it
    let pw = t.powf(half);
    (2.0 * std::f64::consts::PI).sqrt() * pw * (-t).exp() * pw * acc
}

/// Γ(x) for x a positive integer or half-integer.
fn gamma_half_integer(x: f64) -> f64 {
    gamma_half_integer_over_sqrt_pi(x)
        * if x.fract() == 0.0 {
            1.0
        } else {
            std::f64::consts::PI.sqrt()
        }
}

/// Γ(x) for an integer x, or Γ(x)/√π for a half-integer x.
fn gamma_half_integer_over_sqrt_pi(x: f64) -> f64 {
    let mut acc = 1.0;
    let mut y = if x.fract() == 0.0 { 1.0 } else { 0.5 };
    while y < x {
        acc *= y;
        y += 1.0;
    }
    acc
}

/// Γ(x)/√π, exact in floating point for half-integers.
fn gamma_over_sqrt_pi(x: f64) -> Result<f64> {
    if x > 0.0 && x <= EXACT_PRODUCT_LIMIT && x.fract() == 0.5 {
        return Ok(gamma_half_integer_over_sqrt_pi(x));
    }
    Ok(gamma(x)? / std::f64::consts::PI.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KhinchineConstants {
    pub p: f64,
    pub a_p: f64,
    pub b_p: f64,
    pub set_elements: [f64; 3],
}

/// `A_p` and `B_p` for `p >= 1`.
pub fn khinchine_constants(p: f64) -> Result<KhinchineConstants> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "Khinchine constants need finite p >= 1, got {p}"
        )));
    }
    let second = 2f64.powf(0.5 - 1.0 / p);
    // 2^{1/2} (Γ((p+1)/2)/√π)^{1/p} written as (2^{p/2} Γ((p+1)/2)/√π)^{1/p},
    // which is exact at p = 2 and p = 4
    let third = (2f64.powf(p / 2.0) * gamma_over_sqrt_pi((p + 1.0) / 2.0)?).powf(1.0 / p);
    let set_elements = [1.0, second, third];
    let a_p = set_elements.iter().copied().fold(f64::INFINITY, f64::min);
    let b_p = set_elements.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(KhinchineConstants {
        p,
        a_p,
        b_p,
        set_elements,
    })
}

/// `A_p` alone, `NaN` for an exponent callers should have rejected.
pub(crate) fn a_const(p: f64) -> f64 {
    khinchine_constants(p).map(|k| k.a_p).unwrap_or(f64::NAN)
}

pub(crate) fn b_const(p: f64) -> f64 {
    khinchine_constants(p).map(|k| k.b_p).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn gamma_special_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_relative_eq!(gamma(1.5).unwrap(), SQRT_PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(gamma(2.5).unwrap(), 0.75 * SQRT_PI, max_relative = 1e-15);
        assert_relative_eq!(gamma(0.5).unwrap(), SQRT_PI, max_relative = 1e-15);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
    }

    #[test]
    #[allow(clippy::approx_constant, clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
    fn gamma_against_high_precision_reference() {
        // values from a 30-digit reference evaluation
        let cases = [
            (7.3, 1271.423_633_663_909_3),
            (50.0, 6.082_818_640_342_675_6e62),
            (0.7, 1.298_055_332_647_557_8),
            (3.14159, 2.288_031_862_186_713_6),
            (49.9, 4.118_011_034_253_058e62),
            (0.5000001, 1.772_453_502_882_503_2),
        ];
        for (x, want) in cases {
            assert_relative_eq!(gamma(x).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_recurrence_on_grid() {
        let mut x = 0.5;
        while x < 49.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
            x += 0.173;
        }
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn constants_examples() {
        let k2 = khinchine_constants(2.0).unwrap();
        assert_eq!((k2.a_p, k2.b_p), (1.0, 1.0));
        let k1 = khinchine_constants(1.0).unwrap();
        assert_relative_eq!(k1.a_p, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_eq!(k1.b_p, 1.0);
        assert_relative_eq!(k1.set_elements[2], 0.797_884_560_802_865_4, max_relative = 1e-14);
        let k4 = khinchine_constants(4.0).unwrap();
        assert_eq!(k4.a_p, 1.0);
        assert_relative_eq!(k4.b_p, 3f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(k4.set_elements[1], 2f64.powf(0.25), max_relative = 1e-15);
    }

    #[test]
    fn constants_reject_small_p() {
        assert!(khinchine_constants(0.99).is_err());
        assert!(khinchine_constants(f64::INFINITY).is_err());
    }

    #[test]
    fn constants_shape_on_grid() {
        let grid: Vec<f64> = (0..=28).map(|i| 1.0 + 0.25 * i as f64).collect();
        let mut prev: Option<KhinchineConstants> = None;
        for &p in &grid {
            let k = khinchine_constants(p).unwrap();
            assert!(0.0 < k.a_p && k.a_p <= 1.0 && 1.0 <= k.b_p, "p={p}");
            assert!(k.set_elements.contains(&1.0));
            if p >= 2.0 {
                assert_eq!(k.a_p, 1.0);
            } else {
                assert_eq!(k.b_p, 1.0);
            }
            if let Some(q) = prev {
                assert!(k.a_p >= q.a_p && k.b_p >= q.b_p, "p={p}");
            }
            prev = Some(k);
        }
    }
}
