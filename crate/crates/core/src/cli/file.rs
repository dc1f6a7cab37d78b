//! Tuple files: JSON documents with complex entries written as `[re, im]`.
//!
//! ```json
//! { "space_dim": 1, "d": 2,
//!   "operators": { "T1": [[[0.5, 0.0]]], "T2": [[[0.5, 0.0]]] },
//!   "tolerance": { "residual_tol": 1e-8 },
//!   "seed": 7 }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::numkit::{ComplexMatrix, TolerancePolicy, C64};
use crate::tuples::{validate, ContractionTuple};

use super::CliError;

pub type EncodedMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub space_dim: usize,
    pub d: usize,
    pub operators: BTreeMap<String, EncodedMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<TolerancePolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn encode(m: &ComplexMatrix) -> EncodedMatrix {
    m.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

/// Sorts names by their trailing integer (`T2` before `T10`), then by name.
fn natural_key(name: &str) -> (u64, String) {
    let digits: String = name.chars().rev().take_while(|ch| ch.is_ascii_digit()).collect::<Vec<_>>().into_iter().rev().collect();
    (digits.parse().unwrap_or(u64::MAX), name.to_string())
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Parse { location: location.into(), message: message.into() }
}

fn decode(name: &str, rows: &EncodedMatrix, space_dim: usize) -> Result<ComplexMatrix, CliError> {
    let location = format!("operators.{name}");
    let cols = rows.first().map_or(0, |r| r.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(parse_error(format!("{location}[{i}]"), format!("row has {} entries, expected {cols}", row.len())));
        }
    }
    if rows.len() != cols {
        return Err(parse_error(location, format!("non-square {}×{} matrix", rows.len(), cols)));
    }
    if cols != space_dim {
        return Err(parse_error(location, format!("matrix is {cols}×{cols} but space_dim is {space_dim}")));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, [re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(parse_error(format!("{location}[{i}][{j}]"), "non-finite entry"));
            }
        }
    }
    Ok(ComplexMatrix::from_fn(cols, cols, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

impl TupleFile {
    pub fn from_tuple(tuple: &ContractionTuple, seed: Option<u64>) -> Self {
        let operators = tuple.ops().iter().enumerate().map(|(j, m)| (format!("T{}", j + 1), encode(m))).collect();
        TupleFile { space_dim: tuple.dim(), d: tuple.d(), operators, tolerance: None, seed }
    }

    /// Structural checks, then validation of the tuple itself.
    pub fn into_tuple(self) -> Result<ContractionTuple, CliError> {
        if self.operators.len() != self.d {
            return Err(parse_error("d", format!("d is {} but {} operators are given", self.d, self.operators.len())));
        }
        let tol = self.tolerance.unwrap_or_default();
        tol.check().map_err(|e| parse_error("tolerance", e.to_string()))?;
        let mut named: Vec<_> = self.operators.iter().collect();
        named.sort_by_key(|(name, _)| natural_key(name));
        let ops = named.into_iter().map(|(name, rows)| decode(name, rows, self.space_dim)).collect::<Result<Vec<_>, _>>()?;
        Ok(validate(ops, tol)?)
    }
}

/// Parsed input with its content digest.
#[derive(Debug, Clone)]
pub struct LoadedTuple {
    pub tuple: ContractionTuple,
    pub digest: String,
    pub seed: Option<u64>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn parse_tuple_bytes(bytes: &[u8]) -> Result<LoadedTuple, CliError> {
    let file: TupleFile = serde_json::from_slice(bytes)
        .map_err(|e| parse_error(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    let seed = file.seed;
    Ok(LoadedTuple { tuple: file.into_tuple()?, digest: digest(bytes), seed })
}

/// Reads a tuple file; `-` means standard input.
pub fn parse_tuple_file(path: &str) -> Result<LoadedTuple, CliError> {
    let bytes = if path == "-" {
        let mut buf = Vec::new();
        std::io::Read::read_to_end(&mut std::io::stdin(), &mut buf)?;
        buf
    } else {
        std::fs::read(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?
    };
    parse_tuple_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_pair_parses() {
        let doc = br#"{"space_dim":1,"d":2,"operators":{"T1":[[[0,0]]],"T2":[[[0,0]]]}}"#;
        let loaded = parse_tuple_bytes(doc).unwrap();
        assert_eq!(loaded.tuple.d(), 2);
        assert_eq!(loaded.digest.len(), 64);
    }

    #[test]
    fn rectangular_matrix_is_a_parse_error() {
        let doc = br#"{"space_dim":2,"d":2,"operators":{"T1":[[[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]]],"T2":[[[0,0],[0,0]],[[0,0],[0,0]]]}}"#;
        match parse_tuple_bytes(doc) {
            Err(CliError::Parse { location, message }) => {
                assert_eq!(location, "operators.T1");
                assert!(message.contains("non-square"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn noncommuting_pair_is_a_validation_error() {
        let doc = br#"{"space_dim":2,"d":2,"operators":{"T1":[[[0,0],[0.5,0]],[[0,0],[0,0]]],"T2":[[[0,0],[0,0]],[[0.5,0],[0,0]]]}}"#;
        let err = parse_tuple_bytes(doc).unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
        assert!(err.to_string().contains("NotCommuting(1, 2"), "{err}");
    }

    #[test]
    fn operators_follow_numeric_suffix() {
        let mut names = ["T10", "T2", "T1"];
        names.sort_by_key(|n| natural_key(n));
        assert_eq!(names, ["T1", "T2", "T10"]);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse_tuple_bytes(b"{\n\"space_dim\": 1,\n oops}").unwrap_err();
        assert!(matches!(err, CliError::Parse { ref location, .. } if location.starts_with("line 3")), "{err:?}");
    }
}
