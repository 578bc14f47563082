//! Canonical JSON documents, exit codes and the read-only HTTP server.

pub mod decimal;
pub mod serve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::{Classification, Violation};
use crate::net::{Diagram, Malformed};

pub const VERSION: u32 = 1;

#[derive(Serialize)]
struct DocumentRef<'a> {
    version: u32,
    #[serde(flatten)]
    diagram: &'a Diagram,
}

#[derive(Deserialize)]
struct Document {
    version: u32,
    #[serde(flatten)]
    diagram: Diagram,
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("unsupported document version {0} (expected {VERSION})")]
    UnsupportedVersion(u64),
    #[error("dangling id: {0}")]
    DanglingId(Malformed),
    #[error("non-canonical document: {0}")]
    NonCanonical(Malformed),
    #[error("invalid document: {0}")]
    Json(#[from] serde_json::Error),
}

/// Compact JSON with fields in declaration order and ids dense and sorted.
pub fn serialize(d: &Diagram) -> Vec<u8> {
    serde_json::to_vec(&DocumentRef {
        version: VERSION,
        diagram: d,
    })
    .expect("diagrams always serialize")
}

pub fn deserialize(bytes: &[u8]) -> Result<Diagram, ImportError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    match value.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(VERSION) => {}
        Some(v) => return Err(ImportError::UnsupportedVersion(v)),
        None => return Err(ImportError::UnsupportedVersion(0)),
    }
    let doc: Document = serde_json::from_value(value)?;
    debug_assert_eq!(doc.version, VERSION);
    match doc.diagram.validate() {
        Ok(()) => Ok(doc.diagram),
        Err(m @ Malformed::DanglingId { .. }) => Err(ImportError::DanglingId(m)),
        Err(m) => Err(ImportError::NonCanonical(m)),
    }
}

/// Process exit status for a set of violations; the most severe class wins.
pub fn exit_code(violations: &[Violation]) -> i32 {
    let has = |c| violations.iter().any(|v| v.classification == c);
    if has(Classification::Prevention) {
        30
    } else if has(Classification::Implementer) {
        20
    } else if has(Classification::Developer) {
        10
    } else if has(Classification::Inconclusive) {
        40
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Code;
    use crate::exec::{run, RunConfig};
    use crate::lang::parse;

    fn skip() -> Diagram {
        let src = "t:(skip)";
        run(&parse(src).unwrap(), src, &RunConfig::default())
    }

    #[test]
    fn skip_document_shape() {
        let d = skip();
        assert_eq!(d.lifelines.len(), 1);
        assert_eq!(d.transactions.len(), 1);
        assert!(d.violations.is_empty());
        let bytes = serialize(&d);
        assert!(bytes.starts_with(b"{\"version\":1,"));
        assert!(!bytes.contains(&b'\n'));
    }

    #[test]
    fn round_trip_and_fixpoint() {
        let d = skip();
        let bytes = serialize(&d);
        let back = deserialize(&bytes).unwrap();
        assert_eq!(back, d);
        assert_eq!(serialize(&back), bytes);
    }

    #[test]
    fn rejects_other_versions() {
        let text = String::from_utf8(serialize(&skip())).unwrap().replace("\"version\":1", "\"version\":2");
        assert!(matches!(deserialize(text.as_bytes()), Err(ImportError::UnsupportedVersion(2))));
    }

    #[test]
    fn exit_code_priority() {
        let v = |c: Code| Violation::new(c, 1, "");
        assert_eq!(exit_code(&[]), 0);
        assert_eq!(exit_code(&[v(Code::StepLimit)]), 40);
        assert_eq!(exit_code(&[v(Code::StepLimit), v(Code::ZeroDivide)]), 10);
        assert_eq!(exit_code(&[v(Code::ZeroDivide), v(Code::SeqBackArrow)]), 20);
        assert_eq!(exit_code(&[v(Code::SeqBackArrow), v(Code::ParseError)]), 30);
    }
}
