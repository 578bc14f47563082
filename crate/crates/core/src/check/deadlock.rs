use std::collections::{BTreeSet, VecDeque};

use crate::exec::{BlockedThread, Wait};
use crate::lang::Span;

use super::graph::{is_cyclic, sccs};
use super::{Code, Violation};

/// Wait-for graph over stuck threads: `a -> b` when `b` offers the
/// complement of what `a` is blocked on, or `a` has not started and `b` is one
/// of the threads it is sequenced after. Returns for each edge the span in `b`.
fn wait_for(blocked: &[BlockedThread]) -> Vec<Vec<(usize, Span)>> {
    blocked
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let Some(head) = a.offers.first() else {
                return Vec::new();
            };
            blocked
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .filter_map(|(j, b)| {
                    let span = match &head.wait {
                        Wait::After(preds) if preds.contains(&b.thread) => b.offers.first()?.span,
                        Wait::After(_) => return None,
                        w => b.offers.iter().find(|o| o.wait.pairs_with(w))?.span,
                    };
                    Some((j, span))
                })
                .collect()
        })
        .collect()
}

/// Violations for a run in which no transaction could fire: one
/// `DEADLOCK_CYCLE` per cycle of the wait-for graph and one `STARVATION` per
/// started thread outside every cycle.
pub fn stuck_violations(blocked: &[BlockedThread], row: u32) -> Vec<Violation> {
    let edges = wait_for(blocked);
    let adj: Vec<Vec<usize>> = edges
        .iter()
        .map(|es| es.iter().map(|&(j, _)| j).collect())
        .collect();
    let mut in_cycle = BTreeSet::new();
    let mut out = Vec::new();
    for comp in sccs(&adj) {
        if !is_cyclic(&comp, &adj) {
            continue;
        }
        in_cycle.extend(comp.iter().copied());
        let start = *comp
            .iter()
            .min_by_key(|&&i| &blocked[i].thread)
            .expect("components are non-empty");
        let cycle = shortest_cycle(start, &comp, &adj);
        let mut witness = Vec::new();
        let mut spans = Vec::new();
        for pair in cycle.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let head = &blocked[a].offers[0];
            witness.push(blocked[a].thread.clone());
            witness.push(head.wait.resource().to_string());
            spans.push(head.span);
            let &(_, span) = edges[a].iter().find(|&&(j, _)| j == b).expect("edge on the cycle");
            spans.push(span);
        }
        witness.push(blocked[start].thread.clone());
        // listed against the wait-for edges: in `t -> r -> u`, u is blocked on r and waits for t
        witness.reverse();
        spans.reverse();
        let threads: Vec<&str> = cycle[..cycle.len() - 1]
            .iter()
            .map(|&i| blocked[i].thread.as_str())
            .collect();
        out.push(
            Violation::new(
                Code::DeadlockCycle,
                row,
                format!("threads {} wait for each other", threads.join(", ")),
            )
            .with_spans(spans)
            .with_witness(witness),
        );
    }
    for (i, b) in blocked.iter().enumerate() {
        if !b.started || in_cycle.contains(&i) {
            continue;
        }
        let Some(head) = b.offers.first() else {
            continue;
        };
        out.push(
            Violation::new(
                Code::Starvation,
                row,
                format!(
                    "thread {} waits forever on {} {}",
                    b.thread,
                    wait_verb(&head.wait),
                    head.wait.resource()
                ),
            )
            .with_spans([head.span]),
        );
    }
    out
}

fn wait_verb(w: &Wait) -> &'static str {
    match w {
        Wait::Send(_) => "send to",
        Wait::Recv(_) => "receive from",
        Wait::Acquire(_) => "acquire of",
        Wait::Release(_) => "release of",
        Wait::After(_) => "sequencing",
    }
}

/// Node sequence `start, ..., start` of a shortest cycle through `start`
/// inside one strongly connected component.
fn shortest_cycle(start: usize, comp: &[usize], adj: &[Vec<usize>]) -> Vec<usize> {
    let inside: BTreeSet<usize> = comp.iter().copied().collect();
    let mut prev = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !inside.contains(&w) {
                continue;
            }
            if w == start {
                let mut path = vec![start];
                let mut x = v;
                while x != start {
                    path.push(x);
                    x = prev[x];
                }
                path.push(start);
                path.reverse();
                return path;
            }
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    unreachable!("every node of a cyclic component lies on a cycle")
}
