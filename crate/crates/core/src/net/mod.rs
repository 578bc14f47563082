//! The history-net data model.
//!
//! A [`Diagram`] is drawn on a grid: columns are lifelines (one per object,
//! thread, or environment port), rows are transactions in firing order. Every
//! event sits at the intersection of its lifeline's column and its
//! transaction's row. Arrows join events and never point upward in a diagram
//! produced by the executor.
//!
//! The slice tree mirrors the program's syntax tree: `;` splits a slice
//! horizontally (top and bottom share an edge), the concurrent operators split
//! it vertically.

mod builder;
mod cut;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::Violation;
use crate::exec::{BlockedThread, RunConfig};
use crate::io::decimal;
use crate::lang::{Op, Span};

pub use builder::Builder;
pub use cut::StateCut;

macro_rules! id_type {
    ($($name:ident),*) => {$(
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    )*};
}

id_type!(LifelineId, EventId, TransactionId, ArrowId, SliceId);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifelineClass {
    Variable,
    Thread,
    ChannelIn,
    ChannelOut,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Global,
    Local(SliceId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lifeline {
    pub id: LifelineId,
    pub name: String,
    pub class: LifelineClass,
    pub column: u32,
    pub alloc_row: Option<u32>,
    pub dispose_row: Option<u32>,
    pub scope: Scope,
    /// Object instance; the ownership segments of one object share it.
    pub object: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Alloc,
    Dispose,
    Read,
    Write,
    Send,
    Recv,
    Release,
    Acquire,
    Assert,
    SkipMark,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub id: EventId,
    pub lifeline: LifelineId,
    pub transaction: TransactionId,
    pub kind: EventKind,
    /// Thread performing this event; `None` for the environment.
    pub thread: Option<LifelineId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub channel: String,
    #[serde(with = "decimal")]
    pub serial: u64,
}

impl Message {
    /// Display name with serial subscript, e.g. `c_[84]`.
    pub fn port_name(&self) -> String {
        format!("{}_[{}]", self.channel, self.serial)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: TransactionId,
    pub row: u32,
    pub label: String,
    /// Issuing thread lifeline; `None` for environment boundary transactions.
    pub issuer: Option<LifelineId>,
    pub events: Vec<EventId>,
    /// Source commands behind this transaction, issuer's first.
    pub spans: Vec<Span>,
    pub message: Option<Message>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Vertical,
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub id: ArrowId,
    pub tail: EventId,
    pub head: EventId,
    pub orientation: Orientation,
    #[serde(with = "decimal::option")]
    pub value: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Horizontal,
    Vertical,
    None,
}

/// Half-open `[start, end)` range of rows or columns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Range {
    pub start: u32,
    pub end: u32,
}

impl Range {
    pub fn new(start: u32, end: u32) -> Self {
        Range { start, end }
    }

    pub fn contains(&self, x: u32) -> bool {
        self.start <= x && x < self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub id: SliceId,
    /// `None` for a thread leaf.
    pub op: Option<Op>,
    pub thread: Option<String>,
    pub span: Span,
    pub parent: Option<SliceId>,
    pub children: Vec<SliceId>,
    pub split: Split,
    pub rows: Range,
    pub columns: Range,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub source: String,
    pub config: RunConfig,
    pub lifelines: Vec<Lifeline>,
    pub events: Vec<Event>,
    pub transactions: Vec<Transaction>,
    pub arrows: Vec<Arrow>,
    pub slices: Vec<Slice>,
    pub violations: Vec<Violation>,
    /// Unfinished threads when the run got stuck; empty otherwise.
    pub blocked: Vec<BlockedThread>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Top,
    Bottom,
    Left,
    Right,
    Internal,
}

impl FromStr for Edge {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "top" => Edge::Top,
            "bottom" => Edge::Bottom,
            "left" => Edge::Left,
            "right" => Edge::Right,
            "internal" => Edge::Internal,
            _ => return Err(format!("unknown edge `{s}`")),
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetError {
    #[error("unknown slice id {0}")]
    UnknownSlice(u32),
    #[error("unknown event id {0}")]
    UnknownEvent(u32),
    #[error("edge {edge:?} is not valid for slice {slice}")]
    InvalidEdge { slice: u32, edge: Edge },
}

/// Structural defect found while resolving a diagram's cross-references.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Malformed {
    #[error("{what} {id} referenced by {from} does not exist")]
    DanglingId {
        what: &'static str,
        id: u32,
        from: String,
    },
    #[error("non-canonical order: {0}")]
    NonCanonical(String),
}

/// Grid position of an event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Point {
    pub row: u32,
    pub column: u32,
}

impl Diagram {
    pub fn lifeline(&self, id: LifelineId) -> &Lifeline {
        &self.lifelines[id.index()]
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.events[id.index()]
    }

    pub fn transaction(&self, id: TransactionId) -> &Transaction {
        &self.transactions[id.index()]
    }

    pub fn arrow(&self, id: ArrowId) -> &Arrow {
        &self.arrows[id.index()]
    }

    pub fn slice(&self, id: SliceId) -> Result<&Slice, NetError> {
        self.slices.get(id.index()).ok_or(NetError::UnknownSlice(id.0))
    }

    pub fn root(&self) -> Option<&Slice> {
        self.slices.iter().find(|s| s.parent.is_none())
    }

    pub fn row_of(&self, e: EventId) -> u32 {
        self.transaction(self.event(e).transaction).row
    }

    pub fn point(&self, e: EventId) -> Point {
        let ev = self.event(e);
        Point {
            row: self.transaction(ev.transaction).row,
            column: self.lifeline(ev.lifeline).column,
        }
    }

    /// Rows strictly after the last transaction.
    pub fn final_row(&self) -> u32 {
        self.transactions.last().map_or(1, |t| t.row + 1)
    }

    /// Events on `lifeline` in row order.
    pub fn lifeline_events(&self, lifeline: LifelineId) -> Vec<EventId> {
        let mut evs: Vec<EventId> = self
            .events
            .iter()
            .filter(|e| e.lifeline == lifeline)
            .map(|e| e.id)
            .collect();
        evs.sort_by_key(|&e| (self.row_of(e), e));
        evs
    }

    /// Slices in the subtree rooted at `id`, including `id`.
    pub fn subtree(&self, id: SliceId) -> Vec<SliceId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(s) = stack.pop() {
            out.push(s);
            if let Some(slice) = self.slices.get(s.index()) {
                stack.extend(slice.children.iter().rev());
            }
        }
        out
    }

    pub fn in_region(&self, slice: &Slice, p: Point) -> bool {
        slice.rows.contains(p.row) && slice.columns.contains(p.column)
    }

    /// Lifelines local to the slice or its descendants, plus non-global
    /// lifelines whose every event lies inside the slice.
    pub fn footprint(&self, id: SliceId) -> Result<std::collections::BTreeSet<LifelineId>, NetError> {
        let slice = self.slice(id)?;
        let below: std::collections::BTreeSet<SliceId> = self.subtree(id).into_iter().collect();
        let mut out = std::collections::BTreeSet::new();
        for l in &self.lifelines {
            match l.scope {
                Scope::Local(s) if below.contains(&s) => {
                    out.insert(l.id);
                }
                Scope::Local(_) => {
                    let evs = self.lifeline_events(l.id);
                    if !evs.is_empty() && evs.iter().all(|&e| self.in_region(slice, self.point(e))) {
                        out.insert(l.id);
                    }
                }
                Scope::Global => {}
            }
        }
        Ok(out)
    }

    /// Arrows crossing one edge of the slice's rectangle. For `Internal`, the
    /// arrows whose endpoints lie in different children.
    pub fn crossing_arrows(&self, id: SliceId, edge: Edge) -> Result<Vec<ArrowId>, NetError> {
        let slice = self.slice(id)?;
        if edge == Edge::Internal {
            if slice.children.is_empty() {
                return Err(NetError::InvalidEdge { slice: id.0, edge });
            }
            let children: Vec<&Slice> = slice
                .children
                .iter()
                .map(|&c| self.slice(c))
                .collect::<Result<_, _>>()?;
            let which = |p: Point| children.iter().position(|c| self.in_region(c, p));
            return Ok(self
                .arrows
                .iter()
                .filter(|a| {
                    let (t, h) = (self.point(a.tail), self.point(a.head));
                    match (which(t), which(h)) {
                        (Some(x), Some(y)) => x != y,
                        _ => false,
                    }
                })
                .map(|a| a.id)
                .collect());
        }
        Ok(self
            .arrows
            .iter()
            .filter(|a| {
                let (t, h) = (self.point(a.tail), self.point(a.head));
                let outside = match (self.in_region(slice, t), self.in_region(slice, h)) {
                    (true, false) => h,
                    (false, true) => t,
                    _ => return false,
                };
                exit_edge(slice, outside) == edge
            })
            .map(|a| a.id)
            .collect())
    }

    /// Check that every cross-reference resolves and ids are dense.
    pub fn validate(&self) -> Result<(), Malformed> {
        fn dense<T>(items: &[T], id: impl Fn(&T) -> u32, what: &str) -> Result<(), Malformed> {
            for (i, item) in items.iter().enumerate() {
                if id(item) as usize != i {
                    return Err(Malformed::NonCanonical(format!(
                        "{what} at index {i} has id {}",
                        id(item)
                    )));
                }
            }
            Ok(())
        }
        dense(&self.lifelines, |l| l.id.0, "lifeline")?;
        dense(&self.events, |e| e.id.0, "event")?;
        dense(&self.transactions, |t| t.id.0, "transaction")?;
        dense(&self.arrows, |a| a.id.0, "arrow")?;
        dense(&self.slices, |s| s.id.0, "slice")?;

        let dangling = |what: &'static str, id: u32, from: String| Malformed::DanglingId { what, id, from };
        let n_life = self.lifelines.len() as u32;
        let n_ev = self.events.len() as u32;
        let n_tx = self.transactions.len() as u32;
        let n_ar = self.arrows.len() as u32;
        let n_sl = self.slices.len() as u32;

        for l in &self.lifelines {
            if let Scope::Local(s) = l.scope {
                if s.0 >= n_sl {
                    return Err(dangling("slice", s.0, format!("lifeline {}", l.id)));
                }
            }
        }
        for e in &self.events {
            if e.lifeline.0 >= n_life {
                return Err(dangling("lifeline", e.lifeline.0, format!("event {}", e.id)));
            }
            if e.transaction.0 >= n_tx {
                return Err(dangling("transaction", e.transaction.0, format!("event {}", e.id)));
            }
            if let Some(t) = e.thread {
                if t.0 >= n_life {
                    return Err(dangling("lifeline", t.0, format!("event {}", e.id)));
                }
            }
        }
        let mut prev_row = None;
        for t in &self.transactions {
            if let Some(i) = t.issuer {
                if i.0 >= n_life {
                    return Err(dangling("lifeline", i.0, format!("transaction {}", t.id)));
                }
            }
            if prev_row.is_some_and(|r| t.row <= r) {
                return Err(Malformed::NonCanonical(format!(
                    "transaction {} has row {} not after the previous transaction",
                    t.id, t.row
                )));
            }
            prev_row = Some(t.row);
            let mut lifelines_seen = Vec::new();
            for &e in &t.events {
                if e.0 >= n_ev {
                    return Err(dangling("event", e.0, format!("transaction {}", t.id)));
                }
                let ev = self.event(e);
                if ev.transaction != t.id {
                    return Err(Malformed::NonCanonical(format!(
                        "event {e} listed in transaction {} but belongs to {}",
                        t.id, ev.transaction
                    )));
                }
                if lifelines_seen.contains(&ev.lifeline) {
                    return Err(Malformed::NonCanonical(format!(
                        "transaction {} has two events on lifeline {}",
                        t.id, ev.lifeline
                    )));
                }
                lifelines_seen.push(ev.lifeline);
            }
        }
        for e in &self.events {
            if !self.transaction(e.transaction).events.contains(&e.id) {
                return Err(Malformed::NonCanonical(format!(
                    "event {} missing from transaction {}",
                    e.id, e.transaction
                )));
            }
        }
        for a in &self.arrows {
            for end in [a.tail, a.head] {
                if end.0 >= n_ev {
                    return Err(dangling("event", end.0, format!("arrow {}", a.id)));
                }
            }
        }
        for s in &self.slices {
            for r in s.parent.iter().chain(&s.children) {
                if r.0 >= n_sl {
                    return Err(dangling("slice", r.0, format!("slice {}", s.id)));
                }
            }
        }
        for (i, v) in self.violations.iter().enumerate() {
            for locus in &v.loci {
                let (what, id, bound) = match *locus {
                    crate::check::Locus::Event(e) => ("event", e.0, n_ev),
                    crate::check::Locus::Arrow(a) => ("arrow", a.0, n_ar),
                    crate::check::Locus::Transaction(t) => ("transaction", t.0, n_tx),
                };
                if id >= bound {
                    return Err(dangling(what, id, format!("violation {i}")));
                }
            }
        }
        Ok(())
    }

    /// Lifelines by name, for tests and tooling.
    pub fn lifelines_named(&self, name: &str) -> Vec<LifelineId> {
        self.lifelines
            .iter()
            .filter(|l| l.name == name)
            .map(|l| l.id)
            .collect()
    }

    /// Thread lifeline ids keyed by thread name.
    pub fn threads(&self) -> BTreeMap<&str, LifelineId> {
        self.lifelines
            .iter()
            .filter(|l| l.class == LifelineClass::Thread)
            .map(|l| (l.name.as_str(), l.id))
            .collect()
    }
}

/// Edge through which a path leaves `slice` to reach an outside point.
pub(crate) fn exit_edge(slice: &Slice, outside: Point) -> Edge {
    if outside.row < slice.rows.start {
        Edge::Top
    } else if outside.row >= slice.rows.end {
        Edge::Bottom
    } else if outside.column < slice.columns.start {
        Edge::Left
    } else {
        Edge::Right
    }
}
