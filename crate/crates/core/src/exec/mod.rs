//! Deterministic execution of a program under a seeded scheduler.
//!
//! At every step the machine lists the transactions whose participants are all
//! ready (the firing rule), orders them canonically and picks one with
//! `fnv1a(seed, step) mod k`. Each fired transaction becomes one row of the
//! resulting [`Diagram`].

mod eval;
mod layout;
mod machine;
mod schedule;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::check::Code;
use crate::io::decimal;
use crate::lang::{Program, Span};
use crate::net::Diagram;

pub use eval::evaluate;
pub use machine::{Candidate, Machine, Owner, OwnershipMap, ThreadState};
pub use schedule::{choose, fnv1a_step};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(with = "decimal")]
    pub seed: u64,
    pub max_steps: u64,
    /// Messages the environment offers on channels nobody in the program sends on.
    #[serde(with = "decimal::map_vec")]
    pub channel_inputs: BTreeMap<String, Vec<i64>>,
    /// Display-only base for message serial numbers, per channel.
    #[serde(with = "decimal::map")]
    pub message_offset: BTreeMap<String, u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            max_steps: 10_000,
            channel_inputs: BTreeMap::new(),
            message_offset: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_inputs(mut self, channel: &str, values: &[i64]) -> Self {
        self.channel_inputs.insert(channel.to_string(), values.to_vec());
        self
    }

    pub fn with_offset(mut self, channel: &str, offset: u64) -> Self {
        self.message_offset.insert(channel.to_string(), offset);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuntimeErrorKind {
    ZeroDivide,
    AssertionFalse,
    /// This language's null dereference.
    UseAfterDispose,
    NotOwner,
    DoubleAllocate,
    UnknownName,
    Deadlock,
    Starvation,
    StepLimitExceeded,
    IntegerOverflow,
}

impl RuntimeErrorKind {
    pub fn code(self) -> Code {
        match self {
            RuntimeErrorKind::ZeroDivide => Code::ZeroDivide,
            RuntimeErrorKind::AssertionFalse => Code::AssertFalse,
            RuntimeErrorKind::UseAfterDispose => Code::UseAfterDispose,
            RuntimeErrorKind::NotOwner => Code::NotOwner,
            RuntimeErrorKind::DoubleAllocate => Code::DoubleAllocate,
            RuntimeErrorKind::UnknownName => Code::UnknownName,
            RuntimeErrorKind::Deadlock => Code::DeadlockCycle,
            RuntimeErrorKind::Starvation => Code::Starvation,
            RuntimeErrorKind::StepLimitExceeded => Code::StepLimit,
            RuntimeErrorKind::IntegerOverflow => Code::IntegerOverflow,
        }
    }
}

/// What a rendezvous command (or a not-yet-started thread) is waiting for.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wait {
    Send(String),
    Recv(String),
    Acquire(String),
    Release(String),
    /// Sequential predecessors that have not finished.
    After(Vec<String>),
}

impl Wait {
    /// Whether `other` is the complementary half of this rendezvous.
    pub fn pairs_with(&self, other: &Wait) -> bool {
        match (self, other) {
            (Wait::Send(a), Wait::Recv(b)) | (Wait::Recv(a), Wait::Send(b)) => a == b,
            (Wait::Acquire(a), Wait::Release(b)) | (Wait::Release(a), Wait::Acquire(b)) => a == b,
            _ => false,
        }
    }

    /// Channel or object name; `seq` for sequencing waits.
    pub fn resource(&self) -> &str {
        match self {
            Wait::Send(n) | Wait::Recv(n) | Wait::Acquire(n) | Wait::Release(n) => n,
            Wait::After(_) => "seq",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offer {
    pub wait: Wait,
    pub span: Span,
}

/// An unfinished thread at the moment no transaction was enabled. `offers[0]`
/// is what it is blocked on; the rest are its later rendezvous commands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockedThread {
    pub thread: String,
    pub started: bool,
    pub offers: Vec<Offer>,
}

/// Execute `program` and record the run.
pub fn run(program: &Program, source: &str, config: &RunConfig) -> Diagram {
    let mut machine = Machine::new(program, source, config.clone());
    machine.run_to_end();
    machine.into_diagram()
}
