//! Causal navigation: step along arrows backward or forward, compute causal
//! cones, and map violations back to the source text.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::{Locus, Violation};
use crate::lang::Span;
use crate::net::{ArrowId, Diagram, EventId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Back,
    Forward,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavStep {
    pub from: EventId,
    /// `None` when `to` happens in the same transaction as `from`.
    pub via: Option<ArrowId>,
    pub to: EventId,
    pub direction: Direction,
    pub label: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown event id {0}")]
    UnknownEvent(u32),
    #[error("violation locus {0:?} does not resolve")]
    UnresolvedLocus(Locus),
}

fn known(d: &Diagram, e: EventId) -> Result<(), QueryError> {
    if e.index() < d.events.len() {
        Ok(())
    } else {
        Err(QueryError::UnknownEvent(e.0))
    }
}

fn steps(d: &Diagram, e: EventId, direction: Direction) -> Vec<NavStep> {
    let mut out: Vec<NavStep> = d
        .arrows
        .iter()
        .filter_map(|a| match direction {
            Direction::Back if a.head == e => Some((a.tail, Some(a))),
            Direction::Forward if a.tail == e => Some((a.head, Some(a))),
            _ => None,
        })
        .chain(
            d.transaction(d.event(e).transaction)
                .events
                .iter()
                .filter(|&&o| o != e)
                .map(|&o| (o, None)),
        )
        .map(|(to, arrow)| {
            let tx = &d.transaction(d.event(to).transaction).label;
            let label = match arrow.and_then(|a| a.value) {
                Some(v) => format!("{tx} [{v}]"),
                None => tx.clone(),
            };
            NavStep {
                from: e,
                via: arrow.map(|a| a.id),
                to,
                direction,
                label,
            }
        })
        .collect();
    out.sort_by_key(|s| (d.point(s.to), s.via, s.to));
    out
}

/// Events `e` directly depends on: arrow tails into `e` and the other
/// participants of its transaction, ordered by (row, column).
pub fn immediate_causes(d: &Diagram, e: EventId) -> Result<Vec<NavStep>, QueryError> {
    known(d, e)?;
    Ok(steps(d, e, Direction::Back))
}

pub fn immediate_effects(d: &Diagram, e: EventId) -> Result<Vec<NavStep>, QueryError> {
    known(d, e)?;
    Ok(steps(d, e, Direction::Forward))
}

fn cone(d: &Diagram, e: EventId, direction: Direction) -> Result<BTreeSet<EventId>, QueryError> {
    known(d, e)?;
    let mut next = vec![Vec::new(); d.events.len()];
    for a in &d.arrows {
        match direction {
            Direction::Back => next[a.head.index()].push(a.tail),
            Direction::Forward => next[a.tail.index()].push(a.head),
        }
    }
    let mut seen = BTreeSet::from([e]);
    let mut work = vec![e];
    while let Some(x) = work.pop() {
        let co = &d.transaction(d.event(x).transaction).events;
        for &y in next[x.index()].iter().chain(co) {
            if seen.insert(y) {
                work.push(y);
            }
        }
    }
    Ok(seen)
}

/// Least set containing `e` and closed under [`immediate_causes`].
pub fn causal_past(d: &Diagram, e: EventId) -> Result<BTreeSet<EventId>, QueryError> {
    cone(d, e, Direction::Back)
}

pub fn causal_future(d: &Diagram, e: EventId) -> Result<BTreeSet<EventId>, QueryError> {
    cone(d, e, Direction::Forward)
}

/// Source spans responsible for a violation, with a label for each, in
/// source order and without repeats.
pub fn locate(d: &Diagram, v: &Violation) -> Result<Vec<(Span, String)>, QueryError> {
    let mut txs = Vec::new();
    for &locus in &v.loci {
        let unresolved = || QueryError::UnresolvedLocus(locus);
        match locus {
            Locus::Transaction(t) => {
                d.transactions.get(t.index()).ok_or_else(unresolved)?;
                txs.push(t);
            }
            Locus::Event(e) => txs.push(d.events.get(e.index()).ok_or_else(unresolved)?.transaction),
            Locus::Arrow(a) => {
                let a = d.arrows.get(a.index()).ok_or_else(unresolved)?;
                for end in [a.tail, a.head] {
                    txs.push(d.events.get(end.index()).ok_or_else(unresolved)?.transaction);
                }
            }
        }
    }
    let mut out: Vec<(Span, String)> = Vec::new();
    for t in txs {
        let tx = d.transaction(t);
        for &span in &tx.spans {
            out.push((span, tx.label.clone()));
        }
    }
    for &span in &v.spans {
        let text = span.slice(&d.source).trim().to_string();
        out.push((span, text));
    }
    out.sort_by_key(|(s, _)| (s.start, s.end));
    out.dedup_by_key(|(s, _)| *s);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{run, RunConfig};
    use crate::lang::parse;

    fn diagram(src: &str) -> Diagram {
        run(&parse(src).unwrap(), src, &RunConfig::default())
    }

    #[test]
    fn first_event_has_only_co_participants() {
        let d = diagram("t:(new x; x := 1; dispose x)");
        let first = EventId(0);
        let causes = immediate_causes(&d, first).unwrap();
        assert!(causes.iter().all(|s| s.via.is_none()));
        let past = causal_past(&d, first).unwrap();
        let co: BTreeSet<EventId> = d.transaction(d.event(first).transaction).events.iter().copied().collect();
        assert_eq!(past, co);
    }

    #[test]
    fn past_and_future_are_dual() {
        let d = diagram("t:(new x; x := 1; x := x + 1; dispose x)");
        for a in 0..d.events.len() as u32 {
            let past = causal_past(&d, EventId(a)).unwrap();
            for b in 0..d.events.len() as u32 {
                let fut = causal_future(&d, EventId(b)).unwrap();
                assert_eq!(past.contains(&EventId(b)), fut.contains(&EventId(a)));
            }
        }
    }

    #[test]
    fn locate_zero_divide() {
        let d = diagram("globals {x = 0 @ t} t:(x := 1/0)");
        let v = d.violations.iter().find(|v| v.code == crate::check::Code::ZeroDivide).unwrap();
        let spans = locate(&d, v).unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].1, "x := 1 / 0");
    }

    #[test]
    fn unknown_event() {
        let d = diagram("t:(skip)");
        assert_eq!(immediate_causes(&d, EventId(99)), Err(QueryError::UnknownEvent(99)));
    }
}
