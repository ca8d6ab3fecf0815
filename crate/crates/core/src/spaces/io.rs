//! ASCII field snapshots.
//!
//! ```text
//! qfield <components> <cells>
//! v ...            # one line per cell
//! crfield 3 <faces>
//! ux uy uz         # one line per face
//! ```
//!
//! Values are written with `{:e}`, which round-trips `f64` exactly.

use nalgebra::Vector3;

use super::{CrField, FieldValue, QField};
use crate::{Error, Result};

fn write_rows<'a>(out: &mut String, rows: impl Iterator<Item = Vec<f64>> + 'a) {
    use std::fmt::Write;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
}

pub fn write_qfield<T: FieldValue>(v: &QField<T>) -> String {
    let mut out = format!("qfield {} {}\n", T::DIM, v.len());
    write_rows(&mut out, v.values().iter().map(|x| x.components()));
    out
}

pub fn write_crfield(u: &CrField) -> String {
    let mut out = format!("crfield 3 {}\n", u.len());
    write_rows(&mut out, u.dofs().iter().map(|x| x.as_slice().to_vec()));
    out
}

fn read_rows(text: &str, source: &str, tag: &str, dim: usize) -> Result<Vec<Vec<f64>>> {
    let perr = |line: usize, message: String| Error::Parse {
        source_name: source.to_string(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| perr(1, "empty field file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != tag {
        return Err(perr(ln, format!("expected header `{tag} <components> <count>`")));
    }
    let comps: usize = parts[1].parse().map_err(|_| perr(ln, "bad component count".into()))?;
    if comps != dim {
        return Err(perr(ln, format!("expected {dim} components, found {comps}")));
    }
    let count: usize = parts[2].parse().map_err(|_| perr(ln, "bad value count".into()))?;
    let mut rows = Vec::with_capacity(count);
    for (ln, line) in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| perr(ln, format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(perr(ln, format!("expected {dim} values, found {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != count {
        return Err(perr(ln, format!("header announces {count} rows, found {}", rows.len())));
    }
    Ok(rows)
}

pub fn read_qfield<T: FieldValue>(text: &str, source: &str) -> Result<QField<T>> {
    let rows = read_rows(text, source, "qfield", T::DIM)?;
    Ok(QField::from_values(rows.iter().map(|r| T::from_components(r)).collect()))
}

pub fn read_crfield(text: &str, source: &str) -> Result<CrField> {
    let rows = read_rows(text, source, "crfield", 3)?;
    Ok(CrField::from_dofs(rows.iter().map(|r| Vector3::new(r[0], r[1], r[2])).collect()))
}
