use std::collections::BTreeSet;

use crate::lang::Op;
use crate::net::{Diagram, LifelineClass, LifelineId, Range, SliceId};

/// Columns, left to right: input ports, then each thread followed by the
/// object segments it owned, then output ports. `group[l]` is the thread
/// index that lifeline `l` belongs to.
pub(super) fn assign_columns(
    d: &mut Diagram,
    group: &[Option<usize>],
    threads: &[(LifelineId, SliceId)],
) {
    let ports = |class: LifelineClass| {
        let mut v: Vec<(String, LifelineId)> = d
            .lifelines
            .iter()
            .filter(|l| l.class == class)
            .map(|l| (l.name.clone(), l.id))
            .collect();
        v.sort();
        v.into_iter().map(|(_, id)| id)
    };
    let mut order: Vec<LifelineId> = ports(LifelineClass::ChannelIn).collect();
    for (i, &(thread, _)) in threads.iter().enumerate() {
        order.push(thread);
        order.extend(
            d.lifelines
                .iter()
                .filter(|l| l.class == LifelineClass::Variable && group[l.id.index()] == Some(i))
                .map(|l| l.id),
        );
    }
    order.extend(ports(LifelineClass::ChannelOut));
    for (col, id) in order.into_iter().enumerate() {
        d.lifelines[id.index()].column = col as u32;
    }
}

/// Rows and columns of every slice. Fired transactions occupy rows
/// `1..exit_row`; the entry and exit rows lie outside the root.
pub(super) fn assign_slice_geometry(d: &mut Diagram, exit_row: u32) {
    let Some(root) = d.root().map(|s| s.id) else {
        return;
    };
    let program_cols: Vec<u32> = d
        .lifelines
        .iter()
        .filter(|l| matches!(l.class, LifelineClass::Thread | LifelineClass::Variable))
        .map(|l| l.column)
        .collect();
    let columns = match (program_cols.iter().min(), program_cols.iter().max()) {
        (Some(&lo), Some(&hi)) => Range::new(lo, hi + 1),
        _ => Range::default(),
    };
    place(d, root, Range::new(1, exit_row.max(1)), columns);
}

fn place(d: &mut Diagram, id: SliceId, rows: Range, columns: Range) {
    {
        let s = &mut d.slices[id.index()];
        s.rows = rows;
        s.columns = columns;
    }
    let (op, children) = {
        let s = &d.slices[id.index()];
        (s.op, s.children.clone())
    };
    let [left, right] = children[..] else {
        return;
    };
    match op {
        Some(Op::Seq) => {
            let actors = leaf_threads(d, left);
            let split = d
                .events
                .iter()
                .filter(|e| e.thread.is_some_and(|t| actors.contains(&t)))
                .map(|e| d.transaction(e.transaction).row + 1)
                .max()
                .unwrap_or(rows.start)
                .clamp(rows.start, rows.end);
            place(d, left, Range::new(rows.start, split), columns);
            place(d, right, Range::new(split, rows.end), columns);
        }
        _ => {
            let boundary = first_thread_column(d, right)
                .unwrap_or(columns.end)
                .clamp(columns.start, columns.end);
            place(d, left, rows, Range::new(columns.start, boundary));
            place(d, right, rows, Range::new(boundary, columns.end));
        }
    }
}

fn leaf_threads(d: &Diagram, id: SliceId) -> BTreeSet<LifelineId> {
    let threads = d.threads();
    d.subtree(id)
        .into_iter()
        .filter_map(|s| d.slices[s.index()].thread.as_deref())
        .filter_map(|name| threads.get(name).copied())
        .collect()
}

fn first_thread_column(d: &Diagram, id: SliceId) -> Option<u32> {
    leaf_threads(d, id)
        .into_iter()
        .map(|t| d.lifeline(t).column)
        .min()
}
