//! Syntax of the toy concurrent language.
//!
//! A program is a binary tree of thread leaves `name:(cmd; cmd; ...)` joined by
//! `;` (sequential), `|` (concurrent), `|||` (interleaving, no crossings) and
//! `>>` (chaining, no backward crossings), optionally preceded by a
//! `globals { name = int @ thread }` preamble.

mod lexer;
mod parser;
mod pretty;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::{parse, FailureKind, ParseFailure};
pub use pretty::{pretty, pretty_cmd, pretty_expr};

/// Byte range `[start, end)` into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// 1-based line and column of `start` in `source`.
    pub fn line_col(&self, source: &str) -> (usize, usize) {
        let upto = &source[..self.start.min(source.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }

    pub fn slice<'a>(&self, source: &'a str) -> &'a str {
        source.get(self.start..self.end).unwrap_or("")
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64, Span),
    Var(String, Span),
    Arith(ArithOp, Box<Expr>, Box<Expr>, Span),
    /// Only produced at the top of an `assert`.
    Cmp(CmpOp, Box<Expr>, Box<Expr>, Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Int(_, s) | Expr::Var(_, s) | Expr::Arith(.., s) | Expr::Cmp(.., s) => *s,
        }
    }

    /// Variable names in left-to-right order of first occurrence.
    pub fn vars(&self) -> Vec<&str> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
            match e {
                Expr::Int(..) => {}
                Expr::Var(name, _) => {
                    if !out.contains(&name.as_str()) {
                        out.push(name);
                    }
                }
                Expr::Arith(_, l, r, _) | Expr::Cmp(_, l, r, _) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    fn strip(&mut self) {
        match self {
            Expr::Int(_, s) | Expr::Var(_, s) => *s = Span::default(),
            Expr::Arith(_, l, r, s) | Expr::Cmp(_, l, r, s) => {
                *s = Span::default();
                l.strip();
                r.strip();
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CmdKind {
    New(String),
    Dispose(String),
    Assign(String, Expr),
    /// `var := chan?`
    Input(String, String),
    /// `chan!(expr)`
    Output(String, Expr),
    Release(String),
    Acquire(String),
    Assert(Expr),
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cmd {
    pub kind: CmdKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Seq,
    Par,
    Interleave,
    Chain,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Seq => ";",
            Op::Par => "|",
            Op::Interleave => "|||",
            Op::Chain => ">>",
        }
    }

    /// Higher binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            Op::Seq => 4,
            Op::Chain => 3,
            Op::Interleave => 2,
            Op::Par => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Leaf {
        thread: String,
        cmds: Vec<Cmd>,
        span: Span,
    },
    Node {
        op: Op,
        left: Box<Stmt>,
        right: Box<Stmt>,
        span: Span,
    },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Leaf { span, .. } | Stmt::Node { span, .. } => *span,
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<(&str, &[Cmd])> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(s) = stack.pop() {
            match s {
                Stmt::Leaf { thread, cmds, .. } => out.push((thread.as_str(), cmds.as_slice())),
                Stmt::Node { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    fn strip(&mut self) {
        match self {
            Stmt::Leaf { cmds, span, .. } => {
                *span = Span::default();
                for c in cmds {
                    c.span = Span::default();
                    match &mut c.kind {
                        CmdKind::Assign(_, e) | CmdKind::Output(_, e) | CmdKind::Assert(e) => {
                            e.strip()
                        }
                        _ => {}
                    }
                }
            }
            Stmt::Node {
                left, right, span, ..
            } => {
                *span = Span::default();
                left.strip();
                right.strip();
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Global {
    pub name: String,
    pub value: i64,
    pub owner: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub globals: Vec<Global>,
    pub body: Stmt,
}

impl Program {
    /// Copy with every span zeroed, for shape comparisons.
    pub fn without_spans(&self) -> Program {
        let mut p = self.clone();
        for g in &mut p.globals {
            g.span = Span::default();
        }
        p.body.strip();
        p
    }

    /// Channels used with `!` in some leaf.
    pub fn sent_channels(&self) -> BTreeSet<&str> {
        self.body
            .leaves()
            .into_iter()
            .flat_map(|(_, cmds)| cmds.iter())
            .filter_map(|c| match &c.kind {
                CmdKind::Output(ch, _) => Some(ch.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Channels used with `?` in some leaf.
    pub fn received_channels(&self) -> BTreeSet<&str> {
        self.body
            .leaves()
            .into_iter()
            .flat_map(|(_, cmds)| cmds.iter())
            .filter_map(|c| match &c.kind {
                CmdKind::Input(_, ch) => Some(ch.as_str()),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}
