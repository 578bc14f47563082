use crate::exec::RunConfig;
use crate::lang::Span;

use super::*;

/// Incremental diagram construction.
///
/// Each event appended to a lifeline is joined to that lifeline's previous
/// event by a vertical arrow. On variable lifelines the arrow is labeled with
/// the value the object held between the two events.
#[derive(Debug)]
pub struct Builder {
    diagram: Diagram,
    last: Vec<Option<(EventId, Option<i64>)>>,
}

impl Builder {
    pub fn new(source: impl Into<String>, config: RunConfig) -> Self {
        Builder {
            diagram: Diagram {
                source: source.into(),
                config,
                lifelines: Vec::new(),
                events: Vec::new(),
                transactions: Vec::new(),
                arrows: Vec::new(),
                slices: Vec::new(),
                violations: Vec::new(),
                blocked: Vec::new(),
            },
            last: Vec::new(),
        }
    }

    pub fn lifeline(
        &mut self,
        name: impl Into<String>,
        class: LifelineClass,
        column: u32,
        scope: Scope,
        object: Option<u32>,
    ) -> LifelineId {
        let id = LifelineId(self.diagram.lifelines.len() as u32);
        self.diagram.lifelines.push(Lifeline {
            id,
            name: name.into(),
            class,
            column,
            alloc_row: None,
            dispose_row: None,
            scope,
            object,
        });
        self.last.push(None);
        id
    }

    pub fn transaction(
        &mut self,
        row: u32,
        label: impl Into<String>,
        issuer: Option<LifelineId>,
        spans: Vec<Span>,
        message: Option<Message>,
    ) -> TransactionId {
        let id = TransactionId(self.diagram.transactions.len() as u32);
        self.diagram.transactions.push(Transaction {
            id,
            row,
            label: label.into(),
            issuer,
            events: Vec::new(),
            spans,
            message,
        });
        id
    }

    /// Append an event; `value_after` is the object's value once the event has
    /// happened (variables only).
    pub fn event(
        &mut self,
        transaction: TransactionId,
        lifeline: LifelineId,
        kind: EventKind,
        thread: Option<LifelineId>,
        value_after: Option<i64>,
    ) -> EventId {
        let id = EventId(self.diagram.events.len() as u32);
        self.diagram.events.push(Event {
            id,
            lifeline,
            transaction,
            kind,
            thread,
        });
        self.diagram.transactions[transaction.index()].events.push(id);
        if let Some((prev, value)) = self.last[lifeline.index()] {
            let value = match self.diagram.lifelines[lifeline.index()].class {
                LifelineClass::Variable => value,
                _ => None,
            };
            self.arrow(prev, id, Orientation::Vertical, value);
        }
        self.last[lifeline.index()] = Some((id, value_after));
        id
    }

    /// Raw arrow, no consistency checks.
    pub fn arrow(
        &mut self,
        tail: EventId,
        head: EventId,
        orientation: Orientation,
        value: Option<i64>,
    ) -> ArrowId {
        let id = ArrowId(self.diagram.arrows.len() as u32);
        self.diagram.arrows.push(Arrow {
            id,
            tail,
            head,
            orientation,
            value,
        });
        id
    }

    pub fn horizontal(&mut self, tail: EventId, head: EventId, value: Option<i64>) -> ArrowId {
        self.arrow(tail, head, Orientation::Horizontal, value)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn slice(
        &mut self,
        op: Option<Op>,
        thread: Option<String>,
        span: Span,
        parent: Option<SliceId>,
        rows: Range,
        columns: Range,
    ) -> SliceId {
        let id = SliceId(self.diagram.slices.len() as u32);
        self.diagram.slices.push(Slice {
            id,
            op,
            thread,
            span,
            parent,
            children: Vec::new(),
            split: match op {
                None => Split::None,
                Some(Op::Seq) => Split::Horizontal,
                Some(_) => Split::Vertical,
            },
            rows,
            columns,
        });
        if let Some(p) = parent {
            self.diagram.slices[p.index()].children.push(id);
        }
        id
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn diagram_mut(&mut self) -> &mut Diagram {
        &mut self.diagram
    }

    /// Fill in allocation/disposal rows and hand over the diagram.
    pub fn finish(mut self) -> Diagram {
        let d = &mut self.diagram;
        for i in 0..d.lifelines.len() {
            let mut evs: Vec<(u32, EventKind)> = d
                .events
                .iter()
                .filter(|e| e.lifeline.index() == i)
                .map(|e| (d.transactions[e.transaction.index()].row, e.kind))
                .collect();
            evs.sort_by_key(|&(row, _)| row);
            let l = &mut d.lifelines[i];
            if l.class != LifelineClass::Variable {
                continue;
            }
            l.alloc_row = evs
                .first()
                .filter(|(_, k)| matches!(k, EventKind::Alloc | EventKind::Acquire))
                .map(|&(r, _)| r);
            l.dispose_row = evs
                .last()
                .filter(|(_, k)| matches!(k, EventKind::Dispose | EventKind::Release))
                .map(|&(r, _)| r);
        }
        self.diagram
    }
}
