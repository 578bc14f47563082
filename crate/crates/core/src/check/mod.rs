//! Consistency checks over a finished diagram.
//!
//! Every check is a pure function of the diagram. Runtime faults and stuck
//! states recorded during the run are kept; the geometric checks are
//! recomputed from scratch.

mod deadlock;
mod graph;
mod violation;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::lang::Op;
use crate::net::{
    Diagram, EventId, EventKind, LifelineClass, LifelineId, Malformed, Scope, Slice,
};

pub use deadlock::stuck_violations;
pub use graph::sccs;
pub use violation::{classify, Classification, Code, Locus, UnknownCode, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed diagram: {0}")]
pub struct MalformedDiagram(#[from] pub Malformed);

/// All violations, deduplicated and in report order.
pub fn check_all(d: &Diagram) -> Result<Vec<Violation>, MalformedDiagram> {
    d.validate()?;
    let mut all = d.violations.clone();
    all.extend(check_sequential(d));
    all.extend(check_atomicity(d));
    all.extend(check_race(d));
    all.extend(check_operator(d));
    all.extend(check_deadlock(d));
    all.extend(check_leaks(d));
    Ok(normalize(all))
}

pub(crate) fn normalize(mut vs: Vec<Violation>) -> Vec<Violation> {
    vs.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.spans.cmp(&b.spans)));
    vs.dedup();
    vs
}

/// Children of a binary slice, if it has exactly two.
fn pair<'a>(d: &'a Diagram, s: &Slice) -> Option<(&'a Slice, &'a Slice)> {
    match s.children[..] {
        [l, r] => Some((&d.slices[l.index()], &d.slices[r.index()])),
        _ => None,
    }
}

fn inside(d: &Diagram, s: &Slice, e: EventId) -> bool {
    d.in_region(s, d.point(e))
}

/// An arrow leaving the lower half of a `;` slice for the upper half.
pub fn check_sequential(d: &Diagram) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in d.slices.iter().filter(|s| s.op == Some(Op::Seq)) {
        let Some((upper, lower)) = pair(d, s) else {
            continue;
        };
        for a in &d.arrows {
            if inside(d, lower, a.tail) && inside(d, upper, a.head) {
                out.push(
                    Violation::new(
                        Code::SeqBackArrow,
                        d.row_of(a.tail),
                        format!("arrow {} runs upward across the split of slice {}", a.id, s.id),
                    )
                    .with_loci([Locus::Arrow(a.id)]),
                );
            }
        }
    }
    out
}

/// Data flow across `|||` in either direction, or right-to-left across `>>`.
pub fn check_operator(d: &Diagram) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in &d.slices {
        let Some((left, right)) = pair(d, s) else {
            continue;
        };
        let code = match s.op {
            Some(Op::Interleave) => Code::InterleaveCross,
            Some(Op::Chain) => Code::ChainBack,
            _ => continue,
        };
        for a in &d.arrows {
            let (tl, tr) = (inside(d, left, a.tail), inside(d, right, a.tail));
            let (hl, hr) = (inside(d, left, a.head), inside(d, right, a.head));
            let bad = match code {
                Code::InterleaveCross => (tl && hr) || (tr && hl),
                _ => tr && hl,
            };
            if bad {
                out.push(
                    Violation::new(
                        code,
                        d.row_of(a.tail),
                        format!("arrow {} crosses the {} of slice {}", a.id, s.op.map_or("", |o| o.symbol()), s.id),
                    )
                    .with_loci([Locus::Arrow(a.id)]),
                );
            }
        }
    }
    out
}

/// Transactions split between the operands of a parallel operator, and
/// transactions that land on a lifeline between the two ends of an arrow.
pub fn check_atomicity(d: &Diagram) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in d.slices.iter().filter(|s| matches!(s.op, Some(Op::Par | Op::Interleave | Op::Chain))) {
        let Some((left, right)) = pair(d, s) else {
            continue;
        };
        let side = |e: EventId| {
            if inside(d, left, e) {
                Some(0)
            } else if inside(d, right, e) {
                Some(1)
            } else {
                None
            }
        };
        for t in d.transactions.iter().filter(|t| s.rows.contains(t.row)) {
            let touched: BTreeSet<usize> = t.events.iter().filter_map(|&e| side(e)).collect();
            if touched.len() < 2 {
                continue;
            }
            let thread_events: Vec<EventId> = t
                .events
                .iter()
                .copied()
                .filter(|&e| d.lifeline(d.event(e).lifeline).class == LifelineClass::Thread)
                .collect();
            let rendezvous = match thread_events[..] {
                [a, b] => {
                    let kinds = [d.event(a).kind, d.event(b).kind];
                    let paired = matches!(
                        kinds,
                        [EventKind::Send, EventKind::Recv]
                            | [EventKind::Recv, EventKind::Send]
                            | [EventKind::Release, EventKind::Acquire]
                            | [EventKind::Acquire, EventKind::Release]
                    );
                    let sides: BTreeSet<usize> = [a, b].iter().filter_map(|&e| side(e)).collect();
                    paired && side(a) != side(b) && sides == touched
                }
                _ => false,
            };
            if !rendezvous {
                out.push(
                    Violation::new(
                        Code::AtomicSplit,
                        t.row,
                        format!("transaction {} is split by the {} of slice {}", t.id, s.op.map_or("", |o| o.symbol()), s.id),
                    )
                    .with_loci([Locus::Transaction(t.id)]),
                );
            }
        }
    }

    let mut by_lifeline: BTreeMap<LifelineId, Vec<(u32, EventId)>> = BTreeMap::new();
    for e in &d.events {
        by_lifeline.entry(e.lifeline).or_default().push((d.row_of(e.id), e.id));
    }
    for a in &d.arrows {
        let (tr, hr) = (d.row_of(a.tail), d.row_of(a.head));
        if tr + 1 >= hr {
            continue;
        }
        let mut hits = BTreeSet::new();
        for l in [d.event(a.tail).lifeline, d.event(a.head).lifeline] {
            for &(row, e) in &by_lifeline[&l] {
                if tr < row && row < hr {
                    hits.insert(d.event(e).transaction);
                }
            }
        }
        for t in hits {
            out.push(
                Violation::new(
                    Code::AtomicSplit,
                    d.transaction(t).row,
                    format!("transaction {t} interrupts arrow {}", a.id),
                )
                .with_loci([Locus::Arrow(a.id), Locus::Transaction(t)]),
            );
        }
    }
    out
}

/// Objects touched by two threads without a handover in between, and ports
/// used by more than one thread.
pub fn check_race(d: &Diagram) -> Vec<Violation> {
    let mut out = Vec::new();
    for l in &d.lifelines {
        let events = d.lifeline_events(l.id);
        match l.class {
            LifelineClass::Variable => {
                let mut owner: Option<(LifelineId, EventId)> = None;
                for e in events {
                    let ev = d.event(e);
                    let Some(actor) = ev.thread else {
                        continue;
                    };
                    match (ev.kind, owner) {
                        (EventKind::Acquire, _) | (_, None) => owner = Some((actor, e)),
                        (_, Some((o, first))) if o != actor => {
                            out.push(
                                Violation::new(
                                    Code::RaceEdge,
                                    d.row_of(e),
                                    format!("`{}` is used by two threads without a transfer", l.name),
                                )
                                .with_loci([Locus::Event(first), Locus::Event(e)]),
                            );
                            break;
                        }
                        _ => {}
                    }
                    if ev.kind == EventKind::Release {
                        owner = None;
                    }
                }
            }
            LifelineClass::ChannelIn | LifelineClass::ChannelOut => {
                let actors: BTreeSet<LifelineId> =
                    events.iter().filter_map(|&e| d.event(e).thread).collect();
                if actors.len() > 1 {
                    let mut seen = BTreeSet::new();
                    let loci: Vec<Locus> = events
                        .iter()
                        .filter(|&&e| d.event(e).thread.is_some_and(|t| seen.insert(t)))
                        .map(|&e| Locus::Event(e))
                        .collect();
                    out.push(
                        Violation::new(
                            Code::PortShared,
                            events.first().map_or(0, |&e| d.row_of(e)),
                            format!("port {} is used by {} threads", l.name, actors.len()),
                        )
                        .with_loci(loci),
                    );
                }
            }
            LifelineClass::Thread => {}
        }
    }
    out
}

/// Stuck-state analysis of the recorded blocked threads, plus cycles in the
/// arrow graph (which no run can produce).
pub fn check_deadlock(d: &Diagram) -> Vec<Violation> {
    let mut out = Vec::new();
    if !d.blocked.is_empty() {
        let row = d
            .transactions
            .iter()
            .filter(|t| t.issuer.is_some())
            .map(|t| t.row + 1)
            .max()
            .unwrap_or(1);
        out.extend(stuck_violations(&d.blocked, row));
    }
    let mut adj = vec![Vec::new(); d.events.len()];
    let mut via: BTreeMap<(usize, usize), Vec<Locus>> = BTreeMap::new();
    for a in &d.arrows {
        adj[a.tail.index()].push(a.head.index());
        via.entry((a.tail.index(), a.head.index())).or_default().push(Locus::Arrow(a.id));
    }
    for comp in sccs(&adj) {
        if !graph::is_cyclic(&comp, &adj) {
            continue;
        }
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let loci: Vec<Locus> = via
            .iter()
            .filter(|((t, h), _)| members.contains(t) && members.contains(h))
            .flat_map(|(_, ls)| ls.iter().copied())
            .collect();
        let row = comp.iter().map(|&e| d.row_of(EventId(e as u32))).min().unwrap_or(0);
        out.push(
            Violation::new(Code::ArrowCycle, row, format!("{} events lie on an arrow cycle", comp.len()))
                .with_loci(loci),
        );
    }
    out
}

/// Allocated objects still live when the run ends.
pub fn check_leaks(d: &Diagram) -> Vec<Violation> {
    let mut first_alloc: BTreeMap<u32, EventId> = BTreeMap::new();
    let mut last: BTreeMap<u32, (u32, EventKind, String)> = BTreeMap::new();
    for l in &d.lifelines {
        let (LifelineClass::Variable, Scope::Local(_), Some(obj)) = (l.class, l.scope, l.object) else {
            continue;
        };
        let events = d.lifeline_events(l.id);
        let (Some(&first), Some(&end)) = (events.first(), events.last()) else {
            continue;
        };
        first_alloc.entry(obj).or_insert(first);
        let row = d.row_of(end);
        if last.get(&obj).is_none_or(|&(r, ..)| row >= r) {
            last.insert(obj, (row, d.event(end).kind, l.name.clone()));
        }
    }
    last.into_iter()
        .filter(|(_, (_, kind, _))| !matches!(kind, EventKind::Dispose | EventKind::Release))
        .map(|(obj, (_, _, name))| {
            let alloc = first_alloc[&obj];
            Violation::new(
                Code::LeakedObject,
                d.row_of(alloc),
                format!("`{name}` is never disposed"),
            )
            .with_loci([Locus::Event(alloc)])
        })
        .collect()
}
