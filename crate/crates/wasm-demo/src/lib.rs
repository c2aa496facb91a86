//! Browser bindings for three interactive views: the Khinchine constants
//! as functions of `p`, the moment functional against its bounds, and the
//! Banach-Mazur sandwich across dimensions.
//!
//! Each view has a plain Rust function returning JSON, wrapped by a
//! `wasm_bindgen` export.

use khbm_core::banach_mazur::{default_candidates, sandwich_report, Methods};
use khbm_core::functional::ipf_exact;
use khbm_core::parse::{parse_atoms, parse_exponent, parse_list, parse_norm, parse_vectors};
use khbm_core::{khinchine_constants, Exponent};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Exact enumeration cap for interactive use.
pub const DEMO_BUDGET: u64 = 2_000_000;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `A_p`, `B_p` and the three set elements on a log-spaced grid.
pub fn constants_curve_json(lo: f64, hi: f64, points: usize) -> Result<String, String> {
    if !(lo >= 1.0 && hi >= lo && hi.is_finite()) || points == 0 || points > 10_000 {
        return Err("need 1 <= lo <= hi and 1 <= points <= 10000".into());
    }
    let rows = (0..points)
        .map(|i| {
            let t = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            let p = lo * (hi / lo).powf(t);
            khinchine_constants(p).map(|k| json!({"p": p, "a_p": k.a_p, "b_p": k.b_p, "set": k.set_elements}))
        })
        .collect::<Result<Vec<Value>, _>>()
        .map_err(err)?;
    Ok(Value::Array(rows).to_string())
}

/// `I_p(v, f)` for each `p`, next to `c·L` and `C·L` where
/// `L = sqrt(Σ ‖v_i‖²)`. For `l^r` norms the lower bound is shown when
/// `r <= 2` and `p >= r` (cotype `r`), the upper when `r >= 2` and `p <= r`
/// (type `r`).
pub fn explorer_json(vectors_csv: &str, atoms: &str, norm: &str, ps: &str) -> Result<String, String> {
    let v = parse_vectors(vectors_csv).map_err(err)?;
    let f = parse_atoms(atoms).map_err(err)?;
    let norm = parse_norm(norm).map_err(err)?;
    if norm.dim() != v.d() {
        return Err(format!("norm has dimension {} but vectors have {}", norm.dim(), v.d()));
    }
    let ps = parse_list(ps).map_err(err)?;
    let l2 = v.l2_of_norms(&norm).map_err(err)?;
    let r = match norm.lp_exponent() {
        Some(Exponent::Finite(r)) => Some(r),
        Some(Exponent::Infinity) | None => None,
    };
    let mut rows = Vec::new();
    for p in ps {
        let ip = ipf_exact(&v, &f, p, &norm, DEMO_BUDGET).map_err(err)?;
        let lower = match r {
            Some(r) if r <= 2.0 && p >= r => Some(f.theorem1_lower_constant(p, r).map_err(err)?.c * l2),
            _ => None,
        };
        let upper = match r {
            Some(r) if r >= 2.0 && p <= r => Some(f.theorem1_upper_constant(p, r).map_err(err)?* l2),
            _ => None,
        };
        rows.push(json!({"p": p, "i_p": ip.value, "lower": lower, "upper": upper}));
    }
    Ok(json!({"l2_norm": l2, "rows": rows}).to_string())
}

/// Best rigorous lower bound, known value and best upper bound on
/// `d(l^p, l^q)` for `n = 1..=n_max`.
pub fn sandwich_json(p: &str, q: &str, n_max: usize) -> Result<String, String> {
    let p = parse_exponent(p).map_err(err)?;
    let q = parse_exponent(q).map_err(err)?;
    if n_max == 0 || n_max > 16 {
        return Err("n_max must lie in 1..=16".into());
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let rep = sandwich_report(p, q, n, Methods::All, &default_candidates(n)).map_err(err)?;
        rows.push(json!({
            "n": n,
            "lower": rep.best_rigorous_lower(),
            "known": rep.known_exact,
            "upper": rep.upper_bound.as_ref().filter(|u| u.rigorous).map(|u| u.value),
            "consistent": rep.consistent,
        }));
    }
    Ok(Value::Array(rows).to_string())
}

#[wasm_bindgen]
pub fn constants_curve(lo: f64, hi: f64, points: usize) -> Result<String, JsValue> {
    constants_curve_json(lo, hi, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn explorer(vectors_csv: &str, atoms: &str, norm: &str, ps: &str) -> Result<String, JsValue> {
    explorer_json(vectors_csv, atoms, norm, ps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sandwich(p: &str, q: &str, n_max: usize) -> Result<String, JsValue> {
    sandwich_json(p, q, n_max).map_err(|e| JsValue::from_str(&e))
}
