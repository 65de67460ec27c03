//! Mulan-style multi-label ARFF reader.
//!
//! Label attributes are named in a companion XML manifest; every other
//! attribute must be numeric (or a nominal whose values are all numbers,
//! such as `{0,1}`) and becomes a feature. Both dense rows and sparse
//! `{index value, ...}` rows are accepted; omitted sparse entries are 0.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum AttrKind {
    Numeric,
    /// Nominal with every value numeric, e.g. `{0,1}`.
    NumericNominal,
    Other(String),
}

#[derive(Debug, Clone)]
struct Attribute {
    name: String,
    kind: AttrKind,
}

pub fn load_mulan(arff_path: impl AsRef<Path>, xml_path: impl AsRef<Path>) -> Result<Dataset> {
    let arff = read(arff_path.as_ref())?;
    let xml = read(xml_path.as_ref())?;
    parse_mulan(&arff, &xml)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses ARFF text plus the XML label manifest.
pub fn parse_mulan(arff: &str, xml: &str) -> Result<Dataset> {
    let label_names = parse_label_manifest(xml)?;
    let (attributes, rows) = parse_arff(arff)?;

    let mut label_cols = Vec::with_capacity(label_names.len());
    for name in &label_names {
        let idx = attributes
            .iter()
            .position(|a| &a.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("label {name:?} from XML is absent from ARFF")))?;
        label_cols.push(idx);
    }
    let mut feature_cols = Vec::new();
    for (idx, attr) in attributes.iter().enumerate() {
        if label_cols.contains(&idx) {
            continue;
        }
        if let AttrKind::Other(ty) = &attr.kind {
            return Err(Error::InvalidInput(format!(
                "non-numeric feature attribute {:?} of type {ty}",
                attr.name
            )));
        }
        feature_cols.push(idx);
    }
    for &idx in &label_cols {
        if let AttrKind::Other(ty) = &attributes[idx].kind {
            return Err(Error::InvalidInput(format!(
                "label attribute {:?} has non-numeric type {ty}",
                attributes[idx].name
            )));
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no data rows".into()));
    }

    let n = rows.len();
    let features = DMatrix::from_fn(feature_cols.len(), n, |i, j| rows[j][feature_cols[i]]);
    let mut labels = DMatrix::zeros(n, label_cols.len());
    for (i, row) in rows.iter().enumerate() {
        for (j, &col) in label_cols.iter().enumerate() {
            let v = row[col];
            if v != 0.0 && v != 1.0 {
                return Err(Error::Parse {
                    row: i + 1,
                    col: col + 1,
                    message: format!("label value {v} is not 0 or 1"),
                });
            }
            labels[(i, j)] = v;
        }
    }
    let feature_names = feature_cols.iter().map(|&c| attributes[c].name.clone()).collect();
    Dataset::new(features, labels, feature_names, label_names)
}

fn parse_label_manifest(xml: &str) -> Result<Vec<String>> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| Error::InvalidInput(format!("label XML: {e}")))?;
    let names: Vec<String> = doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "label")
        .filter_map(|n| n.attribute("name").map(str::to_owned))
        .collect();
    if names.is_empty() {
        return Err(Error::InvalidInput("label XML lists no labels".into()));
    }
    Ok(names)
}

fn parse_arff(text: &str) -> Result<(Vec<Attribute>, Vec<Vec<f64>>)> {
    let mut attributes = Vec::new();
    let mut rows = Vec::new();
    let mut in_data = false;

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("@attribute") {
                attributes.push(parse_attribute(&line["@attribute".len()..])?);
            } else if lower.starts_with("@data") {
                if attributes.is_empty() {
                    return Err(Error::InvalidInput("@data before any @attribute".into()));
                }
                in_data = true;
            } else if lower.starts_with("@relation") {
                // name is not used
            } else {
                return Err(Error::InvalidInput(format!("unexpected header line {line:?}")));
            }
            continue;
        }
        let row = rows.len() + 1;
        let values = if line.starts_with('{') {
            parse_sparse_row(line, &attributes, row)?
        } else {
            parse_dense_row(line, &attributes, row)?
        };
        rows.push(values);
    }
    if !in_data {
        return Err(Error::InvalidInput("missing @data section".into()));
    }
    Ok((attributes, rows))
}

fn parse_attribute(rest: &str) -> Result<Attribute> {
    let rest = rest.trim_start();
    let (name, ty) = match rest.chars().next() {
        Some(q @ ('\'' | '"')) => {
            let end = rest[1..]
                .find(q)
                .ok_or_else(|| Error::InvalidInput(format!("unterminated name in {rest:?}")))?;
            (rest[1..1 + end].to_owned(), rest[end + 2..].trim())
        }
        Some(_) => {
            let end = rest
                .find(char::is_whitespace)
                .ok_or_else(|| Error::InvalidInput(format!("attribute without type: {rest:?}")))?;
            (rest[..end].to_owned(), rest[end..].trim())
        }
        None => return Err(Error::InvalidInput("empty @attribute line".into())),
    };
    let kind = if ty.starts_with('{') {
        let inner = ty.trim_start_matches('{').trim_end_matches('}');
        let all_numeric = split_values(inner)
            .iter()
            .all(|v| unquote(v).parse::<f64>().is_ok());
        if all_numeric {
            AttrKind::NumericNominal
        } else {
            AttrKind::Other(ty.to_owned())
        }
    } else {
        match ty.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => AttrKind::Numeric,
            _ => AttrKind::Other(ty.to_owned()),
        }
    };
    Ok(Attribute { name, kind })
}

fn parse_dense_row(line: &str, attributes: &[Attribute], row: usize) -> Result<Vec<f64>> {
    let cells = split_values(line);
    if cells.len() != attributes.len() {
        return Err(Error::Parse {
            row,
            col: cells.len().min(attributes.len()) + 1,
            message: format!("expected {} values, found {}", attributes.len(), cells.len()),
        });
    }
    cells
        .iter()
        .enumerate()
        .map(|(c, cell)| parse_value(cell, &attributes[c], row, c + 1))
        .collect()
}

fn parse_sparse_row(line: &str, attributes: &[Attribute], row: usize) -> Result<Vec<f64>> {
    let inner = line
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::Parse {
            row,
            col: 0,
            message: "unterminated sparse row".into(),
        })?;
    let mut values = vec![0.0; attributes.len()];
    for entry in split_values(inner) {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (idx, val) = entry
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Parse {
                row,
                col: 0,
                message: format!("sparse entry {entry:?} lacks a value"),
            })?;
        let idx: usize = idx.parse().map_err(|_| Error::Parse {
            row,
            col: 0,
            message: format!("bad sparse index {idx:?}"),
        })?;
        if idx >= attributes.len() {
            return Err(Error::Parse {
                row,
                col: idx + 1,
                message: format!(
                    "sparse index {idx} out of range for {} attributes",
                    attributes.len()
                ),
            });
        }
        values[idx] = parse_value(val.trim(), &attributes[idx], row, idx + 1)?;
    }
    Ok(values)
}

fn parse_value(cell: &str, attr: &Attribute, row: usize, col: usize) -> Result<f64> {
    let cell = unquote(cell.trim());
    if cell == "?" {
        return Err(Error::Parse {
            row,
            col,
            message: format!("missing value for {:?}", attr.name),
        });
    }
    match &attr.kind {
        AttrKind::Other(_) => Ok(f64::NAN),
        _ => cell
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                row,
                col,
                message: format!("non-numeric value {cell:?} for {:?}", attr.name),
            }),
    }
}

/// Splits on commas outside single or double quotes.
fn split_values(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut quote: Option<char> = None;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match (quote, ch) {
            (None, '\'' | '"') => quote = Some(ch),
            (Some(q), c) if c == q => quote = None,
            (None, ',') => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for q in ['\'', '"'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}
