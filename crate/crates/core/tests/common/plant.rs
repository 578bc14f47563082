//! Hand-built diagrams with a known number of planted defects.

use geotrace::check::Code;
use geotrace::exec::RunConfig;
use geotrace::lang::{Op, Span};
use geotrace::net::{
    Builder, Diagram, EventKind, LifelineClass, LifelineId, Orientation, Range, Scope, SliceId,
};

pub const PLANTABLE: &[Code] = &[
    Code::SeqBackArrow,
    Code::AtomicSplit,
    Code::RaceEdge,
    Code::InterleaveCross,
    Code::ChainBack,
    Code::ArrowCycle,
];

pub fn plant(code: Code, k: usize) -> Diagram {
    match code {
        Code::SeqBackArrow => seq_back(k),
        Code::AtomicSplit => atomic_split(k),
        Code::RaceEdge => race(k),
        Code::InterleaveCross => crossing(Op::Interleave, k),
        Code::ChainBack => crossing(Op::Chain, k),
        Code::ArrowCycle => cycles(k),
        other => panic!("no fixture for {other}"),
    }
}

fn threads(b: &mut Builder, n: usize) -> Vec<LifelineId> {
    (0..n)
        .map(|i| b.lifeline(format!("t{i}"), LifelineClass::Thread, i as u32, Scope::Global, None))
        .collect()
}

fn whole(source: &str) -> Span {
    Span::new(0, source.len())
}

/// Right-nested tree `t0 op (t1 op (...))`, thread `i` in column `i`.
/// Under `;` thread `i` owns row `i + 1` alone.
fn nested(b: &mut Builder, op: Op, n: usize, rows: Range, span: Span, parent: Option<SliceId>, first: usize) {
    let cols = Range::new(first as u32, n as u32);
    let leaf = format!("t{first}");
    if first + 1 == n {
        b.slice(None, Some(leaf), span, parent, rows, cols);
        return;
    }
    let id = b.slice(Some(op), None, span, parent, rows, cols);
    if op == Op::Seq {
        let split = first as u32 + 2;
        b.slice(None, Some(leaf), span, Some(id), Range::new(rows.start, split), cols);
        nested(b, op, n, Range::new(split, rows.end), span, Some(id), first + 1);
    } else {
        b.slice(None, Some(leaf), span, Some(id), rows, Range::new(first as u32, first as u32 + 1));
        nested(b, op, n, rows, span, Some(id), first + 1);
    }
}

fn chain_source(op: &str, n: usize) -> String {
    (0..n).map(|i| format!("t{i}:(skip)")).collect::<Vec<_>>().join(&format!(" {op} "))
}

/// `t0 ; t1 ; ... ; tk`, each thread one skip, and `k` arrows from each
/// later thread up to its predecessor.
fn seq_back(k: usize) -> Diagram {
    let n = k + 1;
    let source = chain_source(";", n);
    let mut b = Builder::new(&source, RunConfig::default());
    let ts = threads(&mut b, n);
    let events: Vec<_> = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let tx = b.transaction(i as u32 + 1, "skip", Some(t), vec![], None);
            b.event(tx, t, EventKind::SkipMark, Some(t), None)
        })
        .collect();
    for i in 1..n {
        b.arrow(events[i], events[i - 1], Orientation::Horizontal, None);
    }
    nested(&mut b, Op::Seq, n, Range::new(1, n as u32 + 1), whole(&source), None, 0);
    b.finish()
}

/// `t0 | t1` with `k` transactions that touch both threads without being
/// a rendezvous.
fn atomic_split(k: usize) -> Diagram {
    let source = chain_source("|", 2);
    let mut b = Builder::new(&source, RunConfig::default());
    let ts = threads(&mut b, 2);
    for row in 1..=k as u32 {
        let tx = b.transaction(row, "skip / skip", Some(ts[0]), vec![], None);
        for &t in &ts {
            b.event(tx, t, EventKind::SkipMark, Some(t), None);
        }
    }
    nested(&mut b, Op::Par, 2, Range::new(1, k as u32 + 1), whole(&source), None, 0);
    b.finish()
}

/// `t0 ; t1` where both write the same `k` globals with no transfer.
fn race(k: usize) -> Diagram {
    let source = chain_source(";", 2);
    let mut b = Builder::new(&source, RunConfig::default());
    let t0 = b.lifeline("t0", LifelineClass::Thread, 0, Scope::Global, None);
    let ys: Vec<_> = (0..k)
        .map(|i| b.lifeline(format!("y{i}"), LifelineClass::Variable, i as u32 + 1, Scope::Global, Some(i as u32)))
        .collect();
    let t1 = b.lifeline("t1", LifelineClass::Thread, k as u32 + 1, Scope::Global, None);
    for (row, t) in [(1, t0), (2, t1)] {
        let tx = b.transaction(row, "write", Some(t), vec![], None);
        b.event(tx, t, EventKind::Write, Some(t), None);
        for &y in &ys {
            b.event(tx, y, EventKind::Write, Some(t), Some(row as i64));
        }
    }
    let cols = Range::new(0, k as u32 + 2);
    let span = whole(&source);
    let root = b.slice(Some(Op::Seq), None, span, None, Range::new(1, 3), cols);
    b.slice(None, Some("t0".into()), span, Some(root), Range::new(1, 2), cols);
    b.slice(None, Some("t1".into()), span, Some(root), Range::new(2, 3), cols);
    b.finish()
}

/// `t0 op t1` with `k` messages the operator forbids: both ways across
/// `|||`, right to left across `>>`.
fn crossing(op: Op, k: usize) -> Diagram {
    let source = chain_source(op.symbol(), 2);
    let mut b = Builder::new(&source, RunConfig::default());
    let ts = threads(&mut b, 2);
    for row in 1..=k as u32 {
        let (from, to) = if op == Op::Chain || row % 2 == 0 { (ts[1], ts[0]) } else { (ts[0], ts[1]) };
        let tx = b.transaction(row, "a!(1) / x := a?", Some(from), vec![], None);
        let send = b.event(tx, from, EventKind::Send, Some(from), None);
        let recv = b.event(tx, to, EventKind::Recv, Some(to), None);
        b.arrow(send, recv, Orientation::Horizontal, Some(row as i64));
    }
    nested(&mut b, op, 2, Range::new(1, k as u32 + 1), whole(&source), None, 0);
    b.finish()
}

/// `t0 | ... | t(k-1)`, each thread with two events and an extra arrow
/// from the second back to the first.
fn cycles(k: usize) -> Diagram {
    let source = chain_source("|", k);
    let mut b = Builder::new(&source, RunConfig::default());
    let ts = threads(&mut b, k);
    for (i, &t) in ts.iter().enumerate() {
        let mut evs = Vec::new();
        for j in 0..2 {
            let tx = b.transaction(2 * i as u32 + j + 1, "skip", Some(t), vec![], None);
            evs.push(b.event(tx, t, EventKind::SkipMark, Some(t), None));
        }
        b.arrow(evs[1], evs[0], Orientation::Vertical, None);
    }
    nested(&mut b, Op::Par, k, Range::new(1, 2 * k as u32 + 1), whole(&source), None, 0);
    b.finish()
}
