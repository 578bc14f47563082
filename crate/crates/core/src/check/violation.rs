use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Span;
use crate::net::{ArrowId, EventId, TransactionId};

/// Who has to mend an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    /// The toolchain produced an impossible diagram.
    Implementer,
    /// The program under test is wrong.
    Developer,
    /// The front end should have refused to run the program.
    Prevention,
    /// The run ended before a verdict was possible.
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Implementer => "IMPLEMENTER",
            Classification::Developer => "DEVELOPER",
            Classification::Prevention => "PREVENTION",
            Classification::Inconclusive => "INCONCLUSIVE",
        })
    }
}

macro_rules! codes {
    ($($variant:ident => $text:literal, $class:ident;)*) => {
        /// Stable violation vocabulary.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Code {
            $(#[serde(rename = $text)] $variant,)*
        }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Code::$variant => $text,)*
                }
            }

            pub fn classification(self) -> Classification {
                match self {
                    $(Code::$variant => Classification::$class,)*
                }
            }
        }

        impl FromStr for Code {
            type Err = UnknownCode;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(Code::$variant),)*
                    _ => Err(UnknownCode(s.to_string())),
                }
            }
        }
    };
}

codes! {
    SeqBackArrow => "SEQ_BACK_ARROW", Implementer;
    AtomicSplit => "ATOMIC_SPLIT", Implementer;
    ArrowCycle => "ARROW_CYCLE", Implementer;
    RaceEdge => "RACE_EDGE", Developer;
    PortShared => "PORT_SHARED", Developer;
    InterleaveCross => "INTERLEAVE_CROSS", Developer;
    ChainBack => "CHAIN_BACK", Developer;
    DeadlockCycle => "DEADLOCK_CYCLE", Developer;
    Starvation => "STARVATION", Developer;
    ZeroDivide => "ZERO_DIVIDE", Developer;
    AssertFalse => "ASSERT_FALSE", Developer;
    UseAfterDispose => "USE_AFTER_DISPOSE", Developer;
    NotOwner => "NOT_OWNER", Developer;
    UnknownName => "UNKNOWN_NAME", Developer;
    DoubleAllocate => "DOUBLE_ALLOCATE", Developer;
    IntegerOverflow => "INTEGER_OVERFLOW", Developer;
    LeakedObject => "LEAKED_OBJECT", Developer;
    StepLimit => "STEP_LIMIT", Inconclusive;
    ParseError => "PARSE_ERROR", Prevention;
    DuplicateThread => "DUPLICATE_THREAD", Prevention;
    DuplicateGlobal => "DUPLICATE_GLOBAL", Prevention;
    UnknownOwner => "UNKNOWN_OWNER", Prevention;
    NameCollision => "NAME_COLLISION", Prevention;
    // Reserved: the language has no arrays and no types.
    SubscriptOverflow => "SUBSCRIPT_OVERFLOW", Developer;
    TypeMismatch => "TYPE_MISMATCH", Prevention;
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown violation code `{0}`")]
pub struct UnknownCode(pub String);

/// Classification of a code given by its stable string.
pub fn classify(code: &str) -> Result<Classification, UnknownCode> {
    code.parse::<Code>().map(Code::classification)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locus {
    Event(EventId),
    Arrow(ArrowId),
    Transaction(TransactionId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: Code,
    pub classification: Classification,
    /// Row used for ordering reports.
    pub row: u32,
    pub loci: Vec<Locus>,
    pub spans: Vec<Span>,
    pub detail: String,
    /// For cycles: the chain, closing on its first element.
    pub witness: Vec<String>,
}

impl Violation {
    pub fn new(code: Code, row: u32, detail: impl Into<String>) -> Self {
        Violation {
            code,
            classification: code.classification(),
            row,
            loci: Vec::new(),
            spans: Vec::new(),
            detail: detail.into(),
            witness: Vec::new(),
        }
    }

    pub fn with_loci(mut self, loci: impl IntoIterator<Item = Locus>) -> Self {
        self.loci.extend(loci);
        self
    }

    pub fn with_spans(mut self, spans: impl IntoIterator<Item = Span>) -> Self {
        self.spans.extend(spans);
        self
    }

    pub fn with_witness(mut self, witness: Vec<String>) -> Self {
        self.witness = witness;
        self
    }

    pub(crate) fn sort_key(&self) -> (u32, &'static str, &[Locus], &str) {
        (self.row, self.code.as_str(), &self.loci, &self.detail)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] row {}: {}",
            self.code, self.classification, self.row, self.detail
        )?;
        if !self.witness.is_empty() {
            write!(f, " ({})", self.witness.join(" -> "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_of_codes() {
        assert_eq!(classify("SEQ_BACK_ARROW"), Ok(Classification::Implementer));
        assert_eq!(classify("ZERO_DIVIDE"), Ok(Classification::Developer));
        assert_eq!(classify("PARSE_ERROR"), Ok(Classification::Prevention));
        assert_eq!(classify("STEP_LIMIT"), Ok(Classification::Inconclusive));
        assert_eq!(classify("FOO"), Err(UnknownCode("FOO".into())));
    }

    #[test]
    fn codes_round_trip_through_strings() {
        for &c in Code::ALL {
            assert_eq!(c.as_str().parse::<Code>(), Ok(c));
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.as_str()));
        }
    }
}
