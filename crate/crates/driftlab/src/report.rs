//! Report primitives shared by the experiments and the CLI: assertion
//! outcomes, stable float formatting, CSV assembly, and config hashing.

use serde::Serialize;
use std::io::Write;

/// One named pass/fail check inside an experiment report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl AssertionOutcome {
    pub fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        AssertionOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn all_passed(assertions: &[AssertionOutcome]) -> bool {
    assertions.iter().all(|a| a.passed)
}

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// 64-bit FNV-1a, used to stamp reports with a hash of the raw config text.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

/// Writes a CSV with the given header and pre-formatted rows.
pub fn write_csv<W: Write>(
    out: &mut W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_known_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn float_format_round_trips() {
        for x in [1.0, -0.3, 1.0 / 3.0, 2.4e-9, f64::MIN_POSITIVE, 1e308] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(
            &mut buf,
            &["n", "value"],
            vec![vec!["1".to_string(), "0.5".to_string()]],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,value\n1,0.5\n");
    }
}
