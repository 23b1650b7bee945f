use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CoefficientRow, CoefficientTable, ModelId, TableMetadata};
use crate::exact::{format_rational, parse_rational, Rational};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed table JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("row {row}: field `{field}`: {message}")]
    Field { row: usize, field: String, message: String },
}

#[derive(Serialize, Deserialize)]
struct RowFile {
    j: usize,
    support: [usize; 2],
    values: Vec<String>,
    tail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slope: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct MetadataFile {
    generator: String,
    #[serde(default)]
    timestamp: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    model: ModelId,
    max_order: usize,
    rows: Vec<RowFile>,
    metadata: MetadataFile,
}

pub fn table_to_json(table: &CoefficientTable) -> String {
    let file = TableFile {
        model: table.model,
        max_order: table.max_order,
        rows: table
            .rows
            .iter()
            .map(|r| RowFile {
                j: r.j,
                support: [r.support_lo, r.support_hi],
                values: r.values.iter().map(format_rational).collect(),
                tail: format_rational(&r.tail),
                slope: (!num_traits::Zero::is_zero(&r.slope)).then(|| format_rational(&r.slope)),
            })
            .collect(),
        metadata: MetadataFile {
            generator: table.metadata.generator.clone(),
            timestamp: table.metadata.timestamp.clone(),
        },
    };
    let mut s = serde_json::to_string_pretty(&file).expect("table serialises");
    s.push('\n');
    s
}

pub fn table_from_json(text: &str) -> Result<CoefficientTable, FormatError> {
    let file: TableFile = serde_json::from_str(text).map_err(|e| FormatError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let field_err = |row: usize, field: &str, message: String| FormatError::Field {
        row,
        field: field.to_string(),
        message,
    };
    let parse = |row: usize, field: &str, s: &str| -> Result<Rational, FormatError> {
        parse_rational(s).map_err(|e| field_err(row, field, e.to_string()))
    };
    if file.rows.len() != file.max_order + 1 {
        return Err(field_err(
            file.rows.len(),
            "rows",
            format!("expected {} rows for max_order {}", file.max_order + 1, file.max_order),
        ));
    }
    let mut rows = Vec::with_capacity(file.rows.len());
    for (idx, r) in file.rows.into_iter().enumerate() {
        if r.j != idx {
            return Err(field_err(idx, "j", format!("expected {idx}, found {}", r.j)));
        }
        let [lo, hi] = r.support;
        let expected = (hi + 1).saturating_sub(lo);
        if r.values.len() != expected {
            return Err(field_err(
                idx,
                "values",
                format!("support [{lo}, {hi}] needs {expected} values, found {}", r.values.len()),
            ));
        }
        let values = r
            .values
            .iter()
            .enumerate()
            .map(|(i, s)| parse(idx, &format!("values[{i}]"), s))
            .collect::<Result<Vec<_>, _>>()?;
        let tail = parse(idx, "tail", &r.tail)?;
        let slope = match &r.slope {
            Some(s) => parse(idx, "slope", s)?,
            None => Rational::from_integer(0.into()),
        };
        rows.push(CoefficientRow { j: idx, support_lo: lo, support_hi: hi, values, tail, slope });
    }
    Ok(CoefficientTable {
        model: file.model,
        max_order: file.max_order,
        rows,
        metadata: TableMetadata { generator: file.metadata.generator, timestamp: file.metadata.timestamp },
    })
}

pub fn save_table(table: &CoefficientTable, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, table_to_json(table))
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn load_table(path: impl AsRef<Path>) -> Result<CoefficientTable, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    table_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::generate_instanton;

    #[test]
    fn round_trip_is_identical() {
        let t = generate_instanton(20);
        let back = table_from_json(&table_to_json(&t)).unwrap();
        assert_eq!(back, t);
        let b = crate::lattice::generate_blasius(8);
        assert_eq!(table_from_json(&table_to_json(&b)).unwrap(), b);
    }

    fn one_row(values: &str) -> String {
        format!(
            r#"{{"model":"instanton","max_order":1,"rows":[
{{"j":0,"support":[1,0],"values":[],"tail":"1/1"}},
{{"j":1,"support":[1,1],"values":[{values}],"tail":"0/1"}}],
"metadata":{{"generator":"test"}}}}"#
        )
    }

    #[test]
    fn non_reduced_rationals_are_normalised() {
        let t = table_from_json(&one_row(r#""2/4""#)).unwrap();
        assert_eq!(format_rational(&t.coeff(1, 1)), "1/2");
    }

    #[test]
    fn zero_denominator_is_rejected() {
        let err = table_from_json(&one_row(r#""1/0""#)).unwrap_err();
        match err {
            FormatError::Field { row, field, .. } => {
                assert_eq!(row, 1);
                assert_eq!(field, "values[0]");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = table_from_json("{\n \"model\": \"instanton\",\n oops }").unwrap_err();
        assert!(matches!(err, FormatError::Json { line: 3, .. }), "{err}");
    }
}
