use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::check::{self, Code, Locus, Violation};
use crate::lang::{pretty_cmd, pretty_expr, Cmd, CmdKind, Expr, Op, Program, Stmt};
use crate::net::{
    Builder, Diagram, EventKind, LifelineClass, LifelineId, Message, Range, Scope,
    SliceId, TransactionId,
};

use super::layout;
use super::{evaluate, BlockedThread, Offer, RunConfig, RuntimeErrorKind, Wait};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Running,
    Finished,
    Faulted,
}

/// Snapshot of one thread, as exposed to callers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadState {
    pub name: String,
    pub pc: usize,
    pub blocked_on: Option<Wait>,
    pub finished: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Owner {
    Thread(String),
    Disposed,
}

pub type OwnershipMap = BTreeMap<String, Owner>;

/// One enabled transaction. Thread fields index the program's leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Candidate {
    /// A command needing no partner: assignments, allocation, assertions,
    /// sends to the environment, and commands that will fault.
    Local { thread: usize },
    EnvReceive { thread: usize, channel: String },
    Message {
        sender: usize,
        receiver: usize,
        channel: String,
    },
    Transfer {
        releaser: usize,
        acquirer: usize,
        object: String,
    },
}

impl Candidate {
    pub fn threads(&self) -> Vec<usize> {
        match *self {
            Candidate::Local { thread } | Candidate::EnvReceive { thread, .. } => vec![thread],
            Candidate::Message {
                sender, receiver, ..
            } => vec![sender, receiver],
            Candidate::Transfer {
                releaser, acquirer, ..
            } => vec![releaser, acquirer],
        }
    }
}

#[derive(Debug)]
struct Thread {
    name: String,
    cmds: Vec<Cmd>,
    pc: usize,
    status: Status,
    lifeline: LifelineId,
    leaf: SliceId,
    /// Threads that must be done before this one starts (left operands of `;`).
    preds: Vec<usize>,
    /// Ancestors from the root: (slice, operator, this leaf lies in the right operand).
    path: Vec<(SliceId, Op, bool)>,
}

#[derive(Debug)]
struct Object {
    name: String,
    value: i64,
    owner: usize,
    disposed: bool,
    segment: LifelineId,
    transfers: u64,
    global: bool,
    instance: u32,
}

struct Fault {
    kind: RuntimeErrorKind,
    detail: String,
}

/// The simulator state for one run.
pub struct Machine {
    threads: Vec<Thread>,
    objects: Vec<Object>,
    by_name: BTreeMap<String, usize>,
    env_inputs: BTreeMap<String, VecDeque<i64>>,
    internal: BTreeSet<String>,
    sent: BTreeMap<String, u64>,
    ports: BTreeMap<(String, bool), LifelineId>,
    /// Owning thread of each lifeline, for column layout.
    group: Vec<Option<usize>>,
    config: RunConfig,
    builder: Builder,
    steps: u64,
    halted: bool,
}

impl Machine {
    pub fn new(program: &Program, source: &str, config: RunConfig) -> Self {
        let mut builder = Builder::new(source, config.clone());
        let mut threads = Vec::new();
        build_slices(&program.body, None, &mut Vec::new(), &mut builder, &mut threads);
        add_seq_preds(&program.body, &mut threads, &mut 0);

        let mut group = Vec::new();
        for (i, t) in threads.iter_mut().enumerate() {
            t.lifeline = builder.lifeline(&t.name, LifelineClass::Thread, 0, Scope::Global, None);
            group.push(Some(i));
        }

        let sent = program.sent_channels();
        let internal = program
            .received_channels()
            .into_iter()
            .filter(|c| sent.contains(c))
            .map(str::to_string)
            .collect();

        let mut machine = Machine {
            threads,
            objects: Vec::new(),
            by_name: BTreeMap::new(),
            env_inputs: config
                .channel_inputs
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().copied().collect()))
                .collect(),
            internal,
            sent: BTreeMap::new(),
            ports: BTreeMap::new(),
            group,
            config,
            builder,
            steps: 0,
            halted: false,
        };

        if !program.globals.is_empty() {
            let tx = machine
                .builder
                .transaction(0, "entry", None, Vec::new(), None);
            for g in &program.globals {
                let owner = machine
                    .threads
                    .iter()
                    .position(|t| t.name == g.owner)
                    .expect("owner resolved by the parser");
                let obj = machine.new_object(&g.name, g.value, owner, true);
                let seg = machine.objects[obj].segment;
                machine
                    .builder
                    .event(tx, seg, EventKind::Write, None, Some(g.value));
            }
        }
        machine
    }

    fn new_object(&mut self, name: &str, value: i64, owner: usize, global: bool) -> usize {
        let instance = self.objects.len() as u32;
        let scope = if global {
            Scope::Global
        } else {
            Scope::Local(self.threads[owner].leaf)
        };
        let segment =
            self.builder
                .lifeline(name, LifelineClass::Variable, 0, scope, Some(instance));
        self.group.push(Some(owner));
        self.objects.push(Object {
            name: name.to_string(),
            value,
            owner,
            disposed: false,
            segment,
            transfers: 0,
            global,
            instance,
        });
        self.by_name.insert(name.to_string(), self.objects.len() - 1);
        self.objects.len() - 1
    }

    fn done(&self, i: usize) -> bool {
        self.threads[i].status != Status::Running
    }

    fn started(&self, i: usize) -> bool {
        self.threads[i].preds.iter().all(|&p| self.done(p))
    }

    fn ready(&self, i: usize) -> bool {
        !self.done(i) && self.started(i)
    }

    fn current(&self, i: usize) -> &Cmd {
        let t = &self.threads[i];
        &t.cmds[t.pc]
    }

    /// Whether data may flow from thread `src` to thread `dst` across the
    /// operator that separates them.
    fn may_cross(&self, src: usize, dst: usize) -> bool {
        let (a, b) = (&self.threads[src].path, &self.threads[dst].path);
        for (x, y) in a.iter().zip(b) {
            if x.0 != y.0 {
                break;
            }
            if x.2 != y.2 {
                return match x.1 {
                    Op::Par => true,
                    Op::Chain => !x.2,
                    Op::Interleave | Op::Seq => false,
                };
            }
        }
        false
    }

    fn owned_by(&self, name: &str, thread: usize) -> bool {
        self.by_name
            .get(name)
            .map(|&o| &self.objects[o])
            .is_some_and(|o| !o.disposed && o.owner == thread)
    }

    /// Enabled transactions in canonical order.
    pub fn enabled(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for i in (0..self.threads.len()).filter(|&i| self.ready(i)) {
            match &self.current(i).kind {
                CmdKind::New(_)
                | CmdKind::Dispose(_)
                | CmdKind::Assign(..)
                | CmdKind::Assert(_)
                | CmdKind::Skip => out.push(Candidate::Local { thread: i }),
                CmdKind::Output(ch, _) if self.internal.contains(ch) => {
                    for j in (0..self.threads.len()).filter(|&j| j != i && self.ready(j)) {
                        if matches!(&self.current(j).kind, CmdKind::Input(_, c) if c == ch)
                            && self.may_cross(i, j)
                        {
                            out.push(Candidate::Message {
                                sender: i,
                                receiver: j,
                                channel: ch.clone(),
                            });
                        }
                    }
                }
                CmdKind::Output(..) => out.push(Candidate::Local { thread: i }),
                CmdKind::Input(_, ch) if !self.internal.contains(ch) => {
                    if self.env_inputs.get(ch).is_some_and(|q| !q.is_empty()) {
                        out.push(Candidate::EnvReceive {
                            thread: i,
                            channel: ch.clone(),
                        });
                    }
                }
                CmdKind::Input(..) | CmdKind::Acquire(_) => {}
                CmdKind::Release(x) if self.owned_by(x, i) => {
                    for j in (0..self.threads.len()).filter(|&j| j != i && self.ready(j)) {
                        if matches!(&self.current(j).kind, CmdKind::Acquire(y) if y == x)
                            && self.may_cross(i, j)
                        {
                            out.push(Candidate::Transfer {
                                releaser: i,
                                acquirer: j,
                                object: x.clone(),
                            });
                        }
                    }
                }
                // Releasing what one does not own faults.
                CmdKind::Release(_) => out.push(Candidate::Local { thread: i }),
            }
        }
        out.sort_by_cached_key(|c| {
            let ts = c.threads();
            let pc_sum: usize = ts.iter().map(|&t| self.threads[t].pc).sum();
            let mut names: Vec<&str> = ts.iter().map(|&t| self.threads[t].name.as_str()).collect();
            names.sort_unstable();
            (pc_sum, names.into_iter().map(str::to_string).collect::<Vec<_>>())
        });
        out
    }

    pub fn thread_states(&self) -> Vec<ThreadState> {
        let enabled = self.enabled();
        (0..self.threads.len())
            .map(|i| {
                let t = &self.threads[i];
                let blocked_on = if self.ready(i)
                    && !enabled.iter().any(|c| c.threads().contains(&i))
                {
                    rendezvous_wait(&self.current(i).kind)
                } else {
                    None
                };
                ThreadState {
                    name: t.name.clone(),
                    pc: t.pc,
                    blocked_on,
                    finished: t.status == Status::Finished,
                }
            })
            .collect()
    }

    pub fn ownership(&self) -> OwnershipMap {
        self.by_name
            .iter()
            .map(|(name, &o)| {
                let o = &self.objects[o];
                let owner = if o.disposed {
                    Owner::Disposed
                } else {
                    Owner::Thread(self.threads[o.owner].name.clone())
                };
                (name.clone(), owner)
            })
            .collect()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    /// Fire at most one transaction chosen by the seeded scheduler. Returns
    /// the fired candidate, or `None` once the run is over.
    pub fn step(&mut self) -> Option<Candidate> {
        if self.halted {
            return None;
        }
        if (0..self.threads.len()).all(|i| self.done(i)) {
            self.halted = true;
            return None;
        }
        let candidates = self.enabled();
        if candidates.is_empty() {
            self.record_stuck();
            self.halted = true;
            return None;
        }
        if self.steps >= self.config.max_steps {
            let row = self.steps as u32 + 1;
            self.builder.diagram_mut().violations.push(Violation::new(
                Code::StepLimit,
                row,
                format!("step limit {} reached with transactions still enabled", self.config.max_steps),
            ));
            self.halted = true;
            return None;
        }
        let pick = super::choose(self.config.seed, self.steps, candidates.len());
        let chosen = candidates[pick].clone();
        self.fire(&chosen);
        Some(chosen)
    }

    pub fn run_to_end(&mut self) {
        while self.step().is_some() {}
    }

    fn row(&self) -> u32 {
        self.steps as u32 + 1
    }

    fn advance(&mut self, i: usize) {
        let t = &mut self.threads[i];
        t.pc += 1;
        if t.pc == t.cmds.len() {
            t.status = Status::Finished;
        }
    }

    /// Resolve `name` for an access by thread `i`.
    fn resolve(&self, name: &str, i: usize) -> Result<usize, Fault> {
        let &o = self.by_name.get(name).ok_or_else(|| Fault {
            kind: RuntimeErrorKind::UnknownName,
            detail: format!("`{name}` does not name an allocated object"),
        })?;
        let obj = &self.objects[o];
        if obj.disposed {
            return Err(Fault {
                kind: RuntimeErrorKind::UseAfterDispose,
                detail: format!("`{name}` was already disposed"),
            });
        }
        if obj.owner != i {
            return Err(Fault {
                kind: RuntimeErrorKind::NotOwner,
                detail: format!(
                    "thread {} accesses `{name}` owned by {}",
                    self.threads[i].name, self.threads[obj.owner].name
                ),
            });
        }
        Ok(o)
    }

    /// Resolve every variable of `expr` and evaluate it.
    fn eval_for(&self, expr: &Expr, i: usize) -> Result<(i64, Vec<usize>), Fault> {
        let mut env = BTreeMap::new();
        let mut reads = Vec::new();
        for v in expr.vars() {
            let o = self.resolve(v, i)?;
            env.insert(v.to_string(), self.objects[o].value);
            reads.push(o);
        }
        let value = evaluate(expr, &env).map_err(|kind| Fault {
            kind,
            detail: match kind {
                RuntimeErrorKind::ZeroDivide => format!("division by zero in `{}`", pretty_expr(expr)),
                RuntimeErrorKind::IntegerOverflow => format!("64-bit overflow in `{}`", pretty_expr(expr)),
                _ => format!("cannot evaluate `{}`", pretty_expr(expr)),
            },
        })?;
        Ok((value, reads))
    }

    fn fault(&mut self, i: usize, fault: Fault) {
        let cmd = self.current(i).clone();
        let row = self.row();
        let lifeline = self.threads[i].lifeline;
        let tx = self
            .builder
            .transaction(row, pretty_cmd(&cmd), Some(lifeline), vec![cmd.span], None);
        self.builder
            .event(tx, lifeline, thread_event_kind(&cmd.kind), Some(lifeline), None);
        let v = Violation::new(fault.kind.code(), row, fault.detail)
            .with_loci([Locus::Transaction(tx)])
            .with_spans([cmd.span]);
        self.builder.diagram_mut().violations.push(v);
        self.threads[i].status = Status::Faulted;
    }

    fn read_events(&mut self, tx: TransactionId, reads: &[usize], skip: Option<usize>, thread: LifelineId) {
        for &o in reads {
            if Some(o) == skip {
                continue;
            }
            let (seg, value) = (self.objects[o].segment, self.objects[o].value);
            self.builder
                .event(tx, seg, EventKind::Read, Some(thread), Some(value));
        }
    }

    fn next_serial(&mut self, channel: &str) -> u64 {
        let offset = self.config.message_offset.get(channel).copied().unwrap_or(0);
        let count = self.sent.entry(channel.to_string()).or_insert(0);
        *count += 1;
        offset + *count
    }

    fn port(&mut self, channel: &str, input: bool) -> LifelineId {
        if let Some(&l) = self.ports.get(&(channel.to_string(), input)) {
            return l;
        }
        let (name, class) = if input {
            (format!("{channel}?"), LifelineClass::ChannelIn)
        } else {
            (format!("{channel}!"), LifelineClass::ChannelOut)
        };
        let l = self.builder.lifeline(name, class, 0, Scope::Global, None);
        self.group.push(None);
        self.ports.insert((channel.to_string(), input), l);
        l
    }

    fn fire(&mut self, candidate: &Candidate) {
        match candidate {
            Candidate::Local { thread } => self.fire_local(*thread),
            Candidate::EnvReceive { thread, channel } => self.fire_env_receive(*thread, channel),
            Candidate::Message {
                sender,
                receiver,
                channel,
            } => self.fire_message(*sender, *receiver, channel),
            Candidate::Transfer {
                releaser, acquirer, ..
            } => self.fire_transfer(*releaser, *acquirer),
        }
        self.steps += 1;
    }

    fn fire_local(&mut self, i: usize) {
        let cmd = self.current(i).clone();
        let row = self.row();
        let me = self.threads[i].lifeline;
        let label = pretty_cmd(&cmd);
        let result: Result<(), Fault> = (|| {
            match &cmd.kind {
                CmdKind::New(x) => {
                    if let Some(&o) = self.by_name.get(x) {
                        if !self.objects[o].disposed {
                            return Err(Fault {
                                kind: RuntimeErrorKind::DoubleAllocate,
                                detail: format!("`{x}` is already allocated"),
                            });
                        }
                    }
                    let tx = self.builder.transaction(row, label, Some(me), vec![cmd.span], None);
                    self.builder.event(tx, me, EventKind::Alloc, Some(me), None);
                    let o = self.new_object(x, 0, i, false);
                    let seg = self.objects[o].segment;
                    self.builder.event(tx, seg, EventKind::Alloc, Some(me), Some(0));
                }
                CmdKind::Dispose(x) => {
                    let o = self.resolve(x, i)?;
                    let tx = self.builder.transaction(row, label, Some(me), vec![cmd.span], None);
                    self.builder.event(tx, me, EventKind::Dispose, Some(me), None);
                    let seg = self.objects[o].segment;
                    self.builder.event(tx, seg, EventKind::Dispose, Some(me), None);
                    self.objects[o].disposed = true;
                }
                CmdKind::Assign(x, e) => {
                    let (value, reads) = self.eval_for(e, i)?;
                    let target = self.resolve(x, i)?;
                    let tx = self.builder.transaction(row, label, Some(me), vec![cmd.span], None);
                    self.builder.event(tx, me, EventKind::Write, Some(me), None);
                    self.read_events(tx, &reads, Some(target), me);
                    self.objects[target].value = value;
                    let seg = self.objects[target].segment;
                    self.builder.event(tx, seg, EventKind::Write, Some(me), Some(value));
                }
                CmdKind::Assert(e) => {
                    let (value, reads) = self.eval_for(e, i)?;
                    if value == 0 {
                        return Err(Fault {
                            kind: RuntimeErrorKind::AssertionFalse,
                            detail: format!("assertion `{}` is false", pretty_expr(e)),
                        });
                    }
                    let tx = self.builder.transaction(row, label, Some(me), vec![cmd.span], None);
                    self.builder.event(tx, me, EventKind::Assert, Some(me), None);
                    self.read_events(tx, &reads, None, me);
                }
                CmdKind::Skip => {
                    let tx = self.builder.transaction(row, label, Some(me), vec![cmd.span], None);
                    self.builder.event(tx, me, EventKind::SkipMark, Some(me), None);
                }
                CmdKind::Output(ch, e) => {
                    let (value, reads) = self.eval_for(e, i)?;
                    let serial = self.next_serial(ch);
                    let message = Message {
                        channel: ch.clone(),
                        serial,
                    };
                    let label = format!("{}!({})", message.port_name(), pretty_expr(e));
                    let port = self.port(ch, false);
                    let tx = self
                        .builder
                        .transaction(row, label, Some(me), vec![cmd.span], Some(message));
                    let send = self.builder.event(tx, me, EventKind::Send, Some(me), None);
                    self.read_events(tx, &reads, None, me);
                    let out = self.builder.event(tx, port, EventKind::Send, Some(me), None);
                    self.builder.horizontal(send, out, Some(value));
                }
                CmdKind::Release(x) => {
                    // Only reached when the releaser does not own `x`.
                    self.resolve(x, i)?;
                    unreachable!("owned release is a transfer candidate");
                }
                CmdKind::Input(..) | CmdKind::Acquire(_) => {
                    unreachable!("rendezvous commands are never local candidates")
                }
            }
            Ok(())
        })();
        match result {
            Ok(()) => self.advance(i),
            Err(f) => self.fault(i, f),
        }
    }

    fn fire_env_receive(&mut self, i: usize, channel: &str) {
        let cmd = self.current(i).clone();
        let CmdKind::Input(x, _) = &cmd.kind else {
            unreachable!()
        };
        let target = match self.resolve(x, i) {
            Ok(o) => o,
            Err(f) => return self.fault(i, f),
        };
        let value = self
            .env_inputs
            .get_mut(channel)
            .and_then(VecDeque::pop_front)
            .expect("enabled only with pending input");
        let serial = self.next_serial(channel);
        let message = Message {
            channel: channel.to_string(),
            serial,
        };
        let row = self.row();
        let me = self.threads[i].lifeline;
        let port = self.port(channel, true);
        let label = format!("{x} := {}?", message.port_name());
        let tx = self
            .builder
            .transaction(row, label, Some(me), vec![cmd.span], Some(message));
        let recv = self.builder.event(tx, me, EventKind::Recv, Some(me), None);
        let inp = self.builder.event(tx, port, EventKind::Recv, Some(me), None);
        self.objects[target].value = value;
        let seg = self.objects[target].segment;
        self.builder.event(tx, seg, EventKind::Write, Some(me), Some(value));
        self.builder.horizontal(inp, recv, Some(value));
        self.advance(i);
    }

    fn fire_message(&mut self, s: usize, r: usize, channel: &str) {
        let send_cmd = self.current(s).clone();
        let recv_cmd = self.current(r).clone();
        let (CmdKind::Output(_, e), CmdKind::Input(x, _)) = (&send_cmd.kind, &recv_cmd.kind) else {
            unreachable!()
        };
        let (value, reads) = match self.eval_for(e, s) {
            Ok(v) => v,
            Err(f) => return self.fault(s, f),
        };
        let target = match self.resolve(x, r) {
            Ok(o) => o,
            Err(f) => return self.fault(r, f),
        };
        let serial = self.next_serial(channel);
        let message = Message {
            channel: channel.to_string(),
            serial,
        };
        let name = message.port_name();
        let label = format!("{name}!({}) / {x} := {name}?", pretty_expr(e));
        let row = self.row();
        let (sl, rl) = (self.threads[s].lifeline, self.threads[r].lifeline);
        let tx = self.builder.transaction(
            row,
            label,
            Some(sl),
            vec![send_cmd.span, recv_cmd.span],
            Some(message),
        );
        let send = self.builder.event(tx, sl, EventKind::Send, Some(sl), None);
        self.read_events(tx, &reads, None, sl);
        let recv = self.builder.event(tx, rl, EventKind::Recv, Some(rl), None);
        self.objects[target].value = value;
        let seg = self.objects[target].segment;
        self.builder.event(tx, seg, EventKind::Write, Some(rl), Some(value));
        self.builder.horizontal(send, recv, Some(value));
        self.advance(s);
        self.advance(r);
    }

    fn fire_transfer(&mut self, s: usize, r: usize) {
        let rel_cmd = self.current(s).clone();
        let acq_cmd = self.current(r).clone();
        let CmdKind::Release(x) = &rel_cmd.kind else {
            unreachable!()
        };
        let o = self.by_name[x];
        self.objects[o].transfers += 1;
        let n = self.objects[o].transfers;
        let (value, old_seg, global, instance) = {
            let obj = &self.objects[o];
            (obj.value, obj.segment, obj.global, obj.instance)
        };
        let scope = if global {
            Scope::Global
        } else {
            Scope::Local(self.threads[r].leaf)
        };
        let new_seg = self
            .builder
            .lifeline(x, LifelineClass::Variable, 0, scope, Some(instance));
        self.group.push(Some(r));

        let row = self.row();
        let (sl, rl) = (self.threads[s].lifeline, self.threads[r].lifeline);
        let label = format!("rel.{n}({x}) / acq.{n}({x})");
        let tx = self
            .builder
            .transaction(row, label, Some(sl), vec![rel_cmd.span, acq_cmd.span], None);
        self.builder.event(tx, sl, EventKind::Release, Some(sl), None);
        let released = self
            .builder
            .event(tx, old_seg, EventKind::Release, Some(sl), Some(value));
        self.builder.event(tx, rl, EventKind::Acquire, Some(rl), None);
        let acquired = self
            .builder
            .event(tx, new_seg, EventKind::Acquire, Some(rl), Some(value));
        self.builder.horizontal(released, acquired, Some(value));

        let obj = &mut self.objects[o];
        obj.owner = r;
        obj.segment = new_seg;
        self.advance(s);
        self.advance(r);
    }

    fn blocked_threads(&self) -> Vec<BlockedThread> {
        let mut out = Vec::new();
        for i in (0..self.threads.len()).filter(|&i| !self.done(i)) {
            let t = &self.threads[i];
            let started = self.started(i);
            let mut offers = Vec::new();
            if !started {
                let waiting = t
                    .preds
                    .iter()
                    .filter(|&&p| !self.done(p))
                    .map(|&p| self.threads[p].name.clone())
                    .collect();
                offers.push(Offer {
                    wait: Wait::After(waiting),
                    span: t.cmds[t.pc].span,
                });
            }
            for c in &t.cmds[t.pc..] {
                let wait = match &c.kind {
                    CmdKind::Output(ch, _) if !self.internal.contains(ch) => None,
                    k => rendezvous_wait(k),
                };
                if let Some(wait) = wait {
                    offers.push(Offer { wait, span: c.span });
                }
            }
            out.push(BlockedThread {
                thread: t.name.clone(),
                started,
                offers,
            });
        }
        out
    }

    fn record_stuck(&mut self) {
        let blocked = self.blocked_threads();
        let row = self.row();
        let vs = check::stuck_violations(&blocked, row);
        let d = self.builder.diagram_mut();
        d.violations.extend(vs);
        d.blocked = blocked;
    }

    /// Close the diagram: exit row, column layout, slice geometry.
    pub fn into_diagram(mut self) -> Diagram {
        let exit_row = self.row();
        let live: Vec<(LifelineId, i64)> = self
            .objects
            .iter()
            .filter(|o| o.global && !o.disposed)
            .map(|o| (o.segment, o.value))
            .collect();
        if !live.is_empty() {
            let tx = self
                .builder
                .transaction(exit_row, "exit", None, Vec::new(), None);
            for (seg, value) in live {
                self.builder.event(tx, seg, EventKind::Read, None, Some(value));
            }
        }
        let thread_cols: Vec<(LifelineId, SliceId)> =
            self.threads.iter().map(|t| (t.lifeline, t.leaf)).collect();
        let mut diagram = self.builder.finish();
        layout::assign_columns(&mut diagram, &self.group, &thread_cols);
        layout::assign_slice_geometry(&mut diagram, exit_row);
        diagram.violations.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        diagram
    }

    /// Diagram built so far (no layout).
    pub fn partial(&self) -> &Diagram {
        self.builder.diagram()
    }

    /// Thread name of leaf `i`.
    pub fn thread_name(&self, i: usize) -> &str {
        &self.threads[i].name
    }

    pub fn event_of_thread(&self, i: usize) -> LifelineId {
        self.threads[i].lifeline
    }

    #[doc(hidden)]
    pub fn object_name(&self, o: usize) -> &str {
        &self.objects[o].name
    }
}

fn rendezvous_wait(kind: &CmdKind) -> Option<Wait> {
    match kind {
        CmdKind::Output(ch, _) => Some(Wait::Send(ch.clone())),
        CmdKind::Input(_, ch) => Some(Wait::Recv(ch.clone())),
        CmdKind::Release(x) => Some(Wait::Release(x.clone())),
        CmdKind::Acquire(x) => Some(Wait::Acquire(x.clone())),
        _ => None,
    }
}

fn thread_event_kind(kind: &CmdKind) -> EventKind {
    match kind {
        CmdKind::New(_) => EventKind::Alloc,
        CmdKind::Dispose(_) => EventKind::Dispose,
        CmdKind::Assign(..) => EventKind::Write,
        CmdKind::Input(..) => EventKind::Recv,
        CmdKind::Output(..) => EventKind::Send,
        CmdKind::Release(_) => EventKind::Release,
        CmdKind::Acquire(_) => EventKind::Acquire,
        CmdKind::Assert(_) => EventKind::Assert,
        CmdKind::Skip => EventKind::SkipMark,
    }
}

/// Create slices in preorder and one `Thread` per leaf.
fn build_slices(
    stmt: &Stmt,
    parent: Option<SliceId>,
    path: &mut Vec<(SliceId, Op, bool)>,
    builder: &mut Builder,
    threads: &mut Vec<Thread>,
) {
    match stmt {
        Stmt::Leaf { thread, cmds, span } => {
            let id = builder.slice(None, Some(thread.clone()), *span, parent, Range::default(), Range::default());
            threads.push(Thread {
                name: thread.clone(),
                cmds: cmds.clone(),
                pc: 0,
                status: if cmds.is_empty() {
                    Status::Finished
                } else {
                    Status::Running
                },
                lifeline: LifelineId(0),
                leaf: id,
                preds: Vec::new(),
                path: path.clone(),
            });
        }
        Stmt::Node {
            op,
            left,
            right,
            span,
        } => {
            let id = builder.slice(Some(*op), None, *span, parent, Range::default(), Range::default());
            path.push((id, *op, false));
            build_slices(left, Some(id), path, builder, threads);
            path.last_mut().expect("pushed above").2 = true;
            build_slices(right, Some(id), path, builder, threads);
            path.pop();
        }
    }
}

/// Leaves of `stmt` as a contiguous index range starting at `*next`; records
/// `;` predecessors along the way.
fn add_seq_preds(stmt: &Stmt, threads: &mut [Thread], next: &mut usize) -> std::ops::Range<usize> {
    match stmt {
        Stmt::Leaf { .. } => {
            *next += 1;
            *next - 1..*next
        }
        Stmt::Node {
            op, left, right, ..
        } => {
            let l = add_seq_preds(left, threads, next);
            let r = add_seq_preds(right, threads, next);
            if *op == Op::Seq {
                for t in r.clone() {
                    threads[t].preds.extend(l.clone());
                }
            }
            l.start..r.end
        }
    }
}
