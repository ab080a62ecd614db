//! Deterministic CSV and JSON writers.
//!
//! Every float is rendered with 17 significant digits in scientific notation
//! so repeated runs with the same config and seed produce byte-identical
//! files. CSVs carry a schema-version and units header as comments.

use crate::error::Result;
use std::fs;
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "v1";

/// Round-trippable float rendering used everywhere a number hits disk.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn write_csv(path: &Path, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut buf = String::new();
    buf.push_str(&format!("# schema: abraham-qed/{name} {SCHEMA_VERSION}\n"));
    buf.push_str("# units: c = e = 1, particle mass 1/2\n");
    buf.push_str(&columns.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        buf.push_str(&line.join(","));
        buf.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::Numerical(format!("json serialization: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_output_is_byte_identical_across_writes() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![vec![0.1, 2.0 / 3.0], vec![1e-17, -4.25]];
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        write_csv(&a, "test", &["x", "y"], &rows).unwrap();
        write_csv(&b, "test", &["x", "y"], &rows).unwrap();
        let ba = std::fs::read(&a).unwrap();
        let bb = std::fs::read(&b).unwrap();
        assert_eq!(ba, bb);
        let text = String::from_utf8(ba).unwrap();
        assert!(text.starts_with("# schema: abraham-qed/test v1\n"));
        assert!(text.contains("x,y"));
    }

    #[test]
    fn floats_round_trip_through_the_formatter() {
        for &x in &[0.1, 1.0 / 3.0, 6.02e23, -1e-300, 0.0] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(back, x);
        }
    }
}
