//! Report envelopes and CSV formatting shared by the command-line tool.

use serde::Serialize;

use crate::{ABS_SLACK, REL_SLACK};

pub const TOOL: &str = "khbm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlackInfo {
    pub rel: f64,
    pub abs: f64,
}

impl Default for SlackInfo {
    fn default() -> Self {
        SlackInfo {
            rel: REL_SLACK,
            abs: ABS_SLACK,
        }
    }
}

/// Every report carries the tool version, seed, budget and slack it used.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub seed: u64,
    pub budget: u64,
    pub slack: SlackInfo,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(subcommand: &str, seed: u64, budget: u64, slack: SlackInfo, result: T) -> Self {
        Envelope {
            tool: TOOL,
            version: VERSION,
            subcommand: subcommand.to_string(),
            seed,
            budget,
            slack,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report types serialize")
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// A header plus rows, rendered with `,` separators and `\n` line ends.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// 64-bit FNV-1a over the little-endian bytes of `x`, as 16 hex digits.
pub fn fnv1a_hash(x: &[f64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in x {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_roundtrip() {
        for v in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, -7.25e17, f64::MAX] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn fnv_known_vector() {
        // FNV-1a of the empty input is the offset basis
        assert_eq!(fnv1a_hash(&[]), "cbf29ce484222325");
        assert_ne!(fnv1a_hash(&[1.0]), fnv1a_hash(&[-1.0]));
    }

    #[test]
    fn envelope_is_deterministic() {
        let e = Envelope::new("constants", 3, 10, SlackInfo::default(), vec![1.5, 2.0]);
        let a = e.to_json();
        assert_eq!(a, e.to_json());
        assert!(a.contains("\"seed\": 3") && a.contains("\"version\""));
    }

    #[test]
    fn csv_render() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        assert_eq!(t.render(), "a,b\n1,x\n");
    }
}
