//! Text formats: atom specs, norm specs, exponents and vector CSV files.

use std::fs;
use std::path::Path;

use crate::distributions::SymmetricAtoms;
use crate::error::{Error, Result};
use crate::functional::VectorTuple;
use crate::norms::{Exponent, NormSpec, PolytopeGauge};

fn number(tok: &str, what: &str) -> Result<f64> {
    let t = tok.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: invalid number '{t}'")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("{what}: number must be finite, got '{t}'")));
    }
    Ok(v)
}

/// `atoms:a1,t1;a2,t2;...` (levels `a_j > 0`, one-sided masses `t_j`), or
/// `rademacher`.
pub fn parse_atoms(spec: &str) -> Result<SymmetricAtoms> {
    let s = spec.trim();
    if s == "rademacher" {
        return Ok(SymmetricAtoms::rademacher());
    }
    let body = s
        .strip_prefix("atoms:")
        .ok_or_else(|| Error::Parse(format!("atom spec must start with 'atoms:', got '{s}'")))?;
    let mut pairs = Vec::new();
    for (i, part) in body.split(';').enumerate() {
        if part.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = part.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Parse(format!(
                "atom {}: expected 'level,mass', got '{}'",
                i + 1,
                part.trim()
            )));
        }
        let what = format!("atom {}", i + 1);
        pairs.push((number(fields[0], &what)?, number(fields[1], &what)?));
    }
    SymmetricAtoms::new(pairs)
}

pub fn parse_exponent(s: &str) -> Result<Exponent> {
    s.trim().parse()
}

/// `lp:<r>:<d>` or `polytope:<path-to-vertex-csv>`.
pub fn parse_norm(spec: &str) -> Result<NormSpec> {
    let s = spec.trim();
    if let Some(rest) = s.strip_prefix("lp:") {
        let (r, d) = rest
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("norm spec '{s}': expected lp:<r>:<d>")))?;
        let r = parse_exponent(r)?;
        let d: usize = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("norm spec '{s}': invalid dimension '{d}'")))?;
        if d == 0 {
            return Err(Error::Parse(format!("norm spec '{s}': dimension must be positive")));
        }
        return Ok(NormSpec::lp_exp(r, d));
    }
    if let Some(path) = s.strip_prefix("polytope:") {
        let rows = read_rows(Path::new(path))?;
        return Ok(NormSpec::Polytope(PolytopeGauge::new(rows)?));
    }
    Err(Error::Parse(format!(
        "norm spec '{s}': expected lp:<r>:<d> or polytope:<path>"
    )))
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .enumerate()
        .map(|(i, t)| number(t, &format!("entry {}", i + 1)))
        .collect()
}

/// Rows of a CSV matrix. Blank lines and lines starting with `#` are
/// skipped; every other line must hold the same number of reals. Errors
/// name the 1-based line.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row = t
            .split(',')
            .enumerate()
            .map(|(c, tok)| number(tok, &format!("line {lineno}, column {}", c + 1)))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected {} columns, got {}",
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    Ok(rows)
}

pub fn parse_vectors(text: &str) -> Result<VectorTuple> {
    VectorTuple::new(parse_rows(text)?)
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_rows(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_vectors(path: &Path) -> Result<VectorTuple> {
    VectorTuple::new(read_rows(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_roundtrip() {
        let a = parse_atoms("atoms:2,0.25;1,0.125").unwrap();
        assert_eq!(a.atoms().len(), 2);
        assert_eq!(a.atoms()[0].level, 2.0);
        assert_eq!(parse_atoms("rademacher").unwrap(), SymmetricAtoms::rademacher());
        assert!(matches!(parse_atoms("2,0.25"), Err(Error::Parse(_))));
        assert!(matches!(parse_atoms("atoms:2;1,0.1"), Err(Error::Parse(_))));
        assert!(matches!(parse_atoms("atoms:1,0.4;2,0.4"), Err(Error::InvalidAtoms(_))));
        let e = parse_atoms("atoms:1,x").unwrap_err().to_string();
        assert!(e.contains("atom 1") && e.contains("'x'"), "{e}");
    }

    #[test]
    fn norms() {
        assert_eq!(parse_norm("lp:2:3").unwrap(), NormSpec::lp(2.0, 3).unwrap());
        assert_eq!(parse_norm("lp:inf:4").unwrap(), NormSpec::cube(4));
        assert!(parse_norm("lp:0.5:3").is_err());
        assert!(parse_norm("lp:2:0").is_err());
        assert!(parse_norm("lp:2").is_err());
        assert!(parse_norm("l2").is_err());
        let dir = std::env::temp_dir().join(format!("khbm-parse-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("verts.csv");
        fs::write(&path, "# square\n1,0\n0,1\n").unwrap();
        let n = parse_norm(&format!("polytope:{}", path.display())).unwrap();
        assert_eq!(n.eval(&[1.0, 1.0]).unwrap(), 2.0);
        fs::write(&path, "1,0\n0,1,2\n").unwrap();
        let e = parse_norm(&format!("polytope:{}", path.display())).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn vector_csv_errors_are_line_precise() {
        let v = parse_vectors("1,2\n\n# c\n3,4\n").unwrap();
        assert_eq!((v.n(), v.d()), (2, 2));
        let e = parse_vectors("1,2\n3,4\n5,y\n").unwrap_err().to_string();
        assert!(e.contains("line 3, column 2"), "{e}");
        let e = parse_vectors("1,2\n3\n").unwrap_err().to_string();
        assert!(e.contains("line 2: expected 2 columns, got 1"), "{e}");
        assert!(parse_vectors("\n# only comments\n").is_err());
        assert!(parse_vectors("1,inf\n").is_err());
    }

    #[test]
    fn lists_and_exponents() {
        assert_eq!(parse_list("1, 2.5,-3").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_list("1,,2").is_err());
        assert_eq!(parse_exponent("inf").unwrap(), Exponent::Infinity);
        assert_eq!(parse_exponent("1.5").unwrap(), Exponent::Finite(1.5));
    }
}
