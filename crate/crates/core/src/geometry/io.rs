//! Carpet JSON files.
//!
//! ```text
//! { "outer": [[x,y],...], "marks": [m1,m2,m3,m4],
//!   "disks": [{"id": int, "polygon": [[x,y],...]}], "meta": {string: string} }
//! ```
//!
//! Numbers are written with 17 significant digits so a save/load cycle
//! reproduces every coordinate bit for bit.

use super::{validate_carpet, CarpetConfig, PeripheralDisk, Point};
use crate::error::{Error, Result};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub(crate) fn fmt_num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn write_points(out: &mut String, pts: &[Point]) {
    out.push('[');
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "[{}, {}]", fmt_num(p.x), fmt_num(p.y));
    }
    out.push(']');
}

/// Canonical serialization: disks ascending by id, polygons starting at
/// their lexicographically smallest vertex.
pub fn to_canonical_json(config: &CarpetConfig) -> String {
    let c = config.canonical();
    let mut out = String::from("{\n  \"outer\": ");
    write_points(&mut out, &c.outer);
    out.push_str(",\n  \"marks\": [");
    out.push_str(
        &c.marks
            .iter()
            .map(|m| fmt_num(*m))
            .collect::<Vec<_>>()
            .join(", "),
    );
    out.push_str("],\n  \"disks\": [");
    for (i, d) in c.disks.iter().enumerate() {
        out.push_str(if i > 0 { ",\n    " } else { "\n    " });
        let _ = write!(out, "{{\"id\": {}, \"polygon\": ", d.id);
        write_points(&mut out, &d.polygon);
        out.push('}');
    }
    out.push_str(if c.disks.is_empty() { "],\n" } else { "\n  ],\n" });
    out.push_str("  \"meta\": {");
    for (i, (k, v)) in c.meta.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(
            out,
            "{}: {}",
            serde_json::to_string(k).unwrap_or_default(),
            serde_json::to_string(v).unwrap_or_default()
        );
    }
    out.push_str("}\n}\n");
    out
}

pub fn save_carpet(config: &CarpetConfig, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_canonical_json(config))?;
    Ok(())
}

fn parse_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        field: field.into(),
        message: message.into(),
    }
}

fn num(v: &Value, field: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(field, "expected a finite number"))
}

fn points(v: &Value, field: &str) -> Result<Vec<Point>> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err(field, "expected an array of [x, y] pairs"))?;
    arr.iter()
        .enumerate()
        .map(|(i, p)| {
            let f = format!("{field}[{i}]");
            match p.as_array().map(|a| a.as_slice()) {
                Some([x, y]) => Ok(Point::new(num(x, &f)?, num(y, &f)?)),
                _ => Err(parse_err(f, "expected [x, y]")),
            }
        })
        .collect()
}

/// Parse without geometric validation.
pub fn parse_carpet(text: &str) -> Result<CarpetConfig> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| parse_err("<document>", e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| parse_err("<document>", "expected a JSON object"))?;
    let get = |k: &str| obj.get(k).ok_or_else(|| parse_err(k, "missing field"));

    let outer = points(get("outer")?, "outer")?;
    let marks_v = get("marks")?
        .as_array()
        .ok_or_else(|| parse_err("marks", "expected an array of 4 numbers"))?;
    if marks_v.len() != 4 {
        return Err(parse_err("marks", "expected exactly 4 numbers"));
    }
    let mut marks = [0.0; 4];
    for (i, m) in marks_v.iter().enumerate() {
        marks[i] = num(m, &format!("marks[{i}]"))?;
    }
    let disks_v = get("disks")?
        .as_array()
        .ok_or_else(|| parse_err("disks", "expected an array"))?;
    let mut disks = Vec::with_capacity(disks_v.len());
    for (i, d) in disks_v.iter().enumerate() {
        let f = format!("disks[{i}]");
        let o = d
            .as_object()
            .ok_or_else(|| parse_err(&f, "expected an object"))?;
        let id = o
            .get("id")
            .ok_or_else(|| parse_err(format!("{f}.id"), "missing field"))?
            .as_u64()
            .ok_or_else(|| parse_err(format!("{f}.id"), "expected a nonnegative integer"))?;
        let poly = points(
            o.get("polygon")
                .ok_or_else(|| parse_err(format!("{f}.polygon"), "missing field"))?,
            &format!("{f}.polygon"),
        )?;
        disks.push(PeripheralDisk::new(id, poly));
    }
    let mut meta = BTreeMap::new();
    if let Some(m) = obj.get("meta") {
        let m = m
            .as_object()
            .ok_or_else(|| parse_err("meta", "expected an object of strings"))?;
        for (k, v) in m {
            let s = v
                .as_str()
                .ok_or_else(|| parse_err(format!("meta.{k}"), "expected a string"))?;
            meta.insert(k.clone(), s.to_string());
        }
    } else {
        return Err(parse_err("meta", "missing field"));
    }
    Ok(CarpetConfig {
        outer,
        marks,
        disks,
        meta,
    })
}

/// Parse and validate; geometric invariant violations become
/// [`Error::Validation`].
pub fn load_carpet(path: impl AsRef<Path>) -> Result<CarpetConfig> {
    let text = std::fs::read_to_string(path)?;
    let config = parse_carpet(&text)?;
    let report = validate_carpet(&config);
    if !report.failures.is_empty() {
        return Err(Error::Validation(report.failures));
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_standard_carpet;

    #[test]
    fn round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        let c = generate_standard_carpet(2).unwrap();
        save_carpet(&c, &p).unwrap();
        let first = std::fs::read_to_string(&p).unwrap();
        let loaded = load_carpet(&p).unwrap();
        for (a, b) in loaded.disks.iter().zip(&c.disks) {
            assert_eq!(a.polygon, b.polygon);
        }
        save_carpet(&loaded, &p).unwrap();
        assert_eq!(first, std::fs::read_to_string(&p).unwrap());
    }

    #[test]
    fn missing_marks_names_the_field() {
        let text = r#"{"outer": [[0,0],[1,0],[1,1]], "disks": [], "meta": {}}"#;
        match parse_carpet(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "marks"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overlapping_file_fails_validation() {
        let text = r#"{"outer": [[0,1],[0,0],[1,0],[1,1]], "marks": [0, 0.25, 0.5, 0.75],
            "disks": [{"id": 4, "polygon": [[0.1,0.1],[0.6,0.1],[0.6,0.6],[0.1,0.6]]},
                      {"id": 9, "polygon": [[0.4,0.4],[0.9,0.4],[0.9,0.9],[0.4,0.9]]}],
            "meta": {}}"#;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        std::fs::write(&p, text).unwrap();
        match load_carpet(&p) {
            Err(Error::Validation(f)) => {
                assert!(f.iter().any(|m| m.contains("disks 4 and 9")), "{f:?}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(fmt_num(-0.0), "0.0000000000000000e0");
        let v: f64 = fmt_num(0.1 + 0.2).parse().unwrap();
        assert_eq!(v, 0.1 + 0.2);
    }
}
