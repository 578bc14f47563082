use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::lexer::{lex, Kw, Tok};
use super::{ArithOp, Cmd, CmdKind, CmpOp, Expr, Global, Op, Program, Span, Stmt};

/// Front-end rejection. Every kind is a "should have prevented execution" error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    Syntax,
    DuplicateThreadName,
    DuplicateGlobal,
    UnknownOwner,
    NameCollision,
}

impl FailureKind {
    pub fn code(self) -> &'static str {
        match self {
            FailureKind::Syntax => "PARSE_ERROR",
            FailureKind::DuplicateThreadName => "DUPLICATE_THREAD",
            FailureKind::DuplicateGlobal => "DUPLICATE_GLOBAL",
            FailureKind::UnknownOwner => "UNKNOWN_OWNER",
            FailureKind::NameCollision => "NAME_COLLISION",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseFailure {
    pub kind: FailureKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind.code(), self.span, self.message)
    }
}

impl std::error::Error for ParseFailure {}

/// Parse source text into a [`Program`], or report every front-end failure.
///
/// Syntax errors stop at the first one; name-resolution problems are all
/// collected.
pub fn parse(source: &str) -> Result<Program, Vec<ParseFailure>> {
    let tokens = lex(source).map_err(|e| {
        vec![ParseFailure {
            kind: FailureKind::Syntax,
            span: e.span,
            message: e.message,
        }]
    })?;
    let mut p = Parser { tokens, pos: 0 };
    let program = p.program().map_err(|e| vec![e])?;
    let failures = resolve(&program);
    if failures.is_empty() {
        Ok(program)
    } else {
        Err(failures)
    }
}

type PResult<T> = Result<T, ParseFailure>;

struct Parser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.pos - 1].1.end
        }
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    /// Failure covering `from` through the offending token.
    fn fail(&self, from: usize, expected: &str) -> ParseFailure {
        let here = self.span();
        ParseFailure {
            kind: FailureKind::Syntax,
            span: Span::new(from.min(here.start), here.end.max(from)),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: &Tok, from: usize, what: &str) -> PResult<Span> {
        if self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.fail(from, what))
        }
    }

    fn name(&mut self, from: usize, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Name(n) => {
                let s = self.bump().1;
                Ok((n, s))
            }
            _ => Err(self.fail(from, what)),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut globals = Vec::new();
        if self.peek() == &Tok::Kw(Kw::Globals) {
            let start = self.bump().1.start;
            self.expect(&Tok::LBrace, start, "`{` after `globals`")?;
            while self.peek() != &Tok::RBrace {
                let g_start = self.span().start;
                let (name, _) = self.name(g_start, "global name or `}`")?;
                self.expect(&Tok::Eq, g_start, "`=`")?;
                let value = self.signed_int(g_start)?;
                self.expect(&Tok::At, g_start, "`@`")?;
                let (owner, _) = self.name(g_start, "owner thread name")?;
                globals.push(Global {
                    name,
                    value,
                    owner,
                    span: Span::new(g_start, self.prev_end()),
                });
            }
            self.bump();
        }
        let body = self.stmt()?;
        if self.peek() != &Tok::Eof {
            return Err(self.fail(self.span().start, "end of input"));
        }
        Ok(Program { globals, body })
    }

    fn signed_int(&mut self, from: usize) -> PResult<i64> {
        let negative = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(v) => {
                let span = self.bump().1;
                let v = if negative {
                    0i128 - v as i128
                } else {
                    v as i128
                };
                i64::try_from(v).map_err(|_| ParseFailure {
                    kind: FailureKind::Syntax,
                    span,
                    message: "integer literal out of 64-bit range".to_string(),
                })
            }
            _ => Err(self.fail(from, "integer")),
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        self.binary(Op::Par)
    }

    /// Right-associative chain of `op` over operands of the next-tighter level.
    fn binary(&mut self, op: Op) -> PResult<Stmt> {
        let (tok, tighter) = match op {
            Op::Par => (Tok::Bar, Some(Op::Interleave)),
            Op::Interleave => (Tok::TripleBar, Some(Op::Chain)),
            Op::Chain => (Tok::Chain, Some(Op::Seq)),
            Op::Seq => (Tok::Semi, None),
        };
        let mut operands = vec![match tighter {
            Some(t) => self.binary(t)?,
            None => self.seq_operand()?,
        }];
        while self.eat(&tok) {
            operands.push(match tighter {
                Some(t) => self.binary(t)?,
                None => self.seq_operand()?,
            });
        }
        let mut acc = operands.pop().expect("at least one operand");
        while let Some(left) = operands.pop() {
            let span = left.span().to(acc.span());
            acc = Stmt::Node {
                op,
                left: Box::new(left),
                right: Box::new(acc),
                span,
            };
        }
        Ok(acc)
    }

    fn seq_operand(&mut self) -> PResult<Stmt> {
        let start = self.span().start;
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let inner = self.stmt()?;
                self.expect(&Tok::RParen, start, "`)` closing group")?;
                Ok(inner)
            }
            Tok::Name(_) => self.leaf(),
            _ => Err(self.fail(start, "thread leaf `name:(...)` or `(`")),
        }
    }

    fn leaf(&mut self) -> PResult<Stmt> {
        let start = self.span().start;
        let (thread, _) = self.name(start, "thread name")?;
        self.expect(&Tok::Colon, start, "`:` after thread name")?;
        self.expect(&Tok::LParen, start, "`(` opening command list")?;
        let mut cmds = vec![self.cmd()?];
        while self.eat(&Tok::Semi) {
            cmds.push(self.cmd()?);
        }
        let close = self.expect(&Tok::RParen, start, "`;` or `)`")?;
        Ok(Stmt::Leaf {
            thread,
            cmds,
            span: Span::new(start, close.end),
        })
    }

    fn cmd(&mut self) -> PResult<Cmd> {
        let start = self.span().start;
        let kind = match self.peek().clone() {
            Tok::Kw(kw @ (Kw::New | Kw::Dispose | Kw::Release | Kw::Acquire)) => {
                self.bump();
                let (name, _) = self.name(start, "object name")?;
                match kw {
                    Kw::New => CmdKind::New(name),
                    Kw::Dispose => CmdKind::Dispose(name),
                    Kw::Release => CmdKind::Release(name),
                    _ => CmdKind::Acquire(name),
                }
            }
            Tok::Kw(Kw::Skip) => {
                self.bump();
                CmdKind::Skip
            }
            Tok::Kw(Kw::Assert) => {
                self.bump();
                CmdKind::Assert(self.condition(start)?)
            }
            Tok::Name(name) => {
                self.bump();
                match self.peek() {
                    Tok::Walrus => {
                        self.bump();
                        if matches!(self.peek(), Tok::Name(_))
                            && self.peek_at(1) == &Tok::Question
                        {
                            let (chan, _) = self.name(start, "channel name")?;
                            self.bump();
                            CmdKind::Input(name, chan)
                        } else {
                            CmdKind::Assign(name, self.arith(start)?)
                        }
                    }
                    Tok::Bang => {
                        self.bump();
                        self.expect(&Tok::LParen, start, "`(` after `!`")?;
                        let e = self.arith(start)?;
                        self.expect(&Tok::RParen, start, "`)` closing output")?;
                        CmdKind::Output(name, e)
                    }
                    _ => return Err(self.fail(start, "`:=` or `!`")),
                }
            }
            _ => return Err(self.fail(start, "command")),
        };
        Ok(Cmd {
            kind,
            span: Span::new(start, self.prev_end()),
        })
    }

    fn condition(&mut self, from: usize) -> PResult<Expr> {
        let lhs = self.arith(from)?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.arith(from)?;
        let span = lhs.span().to(rhs.span());
        Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs), span))
    }

    fn arith(&mut self, from: usize) -> PResult<Expr> {
        let mut lhs = self.term(from)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term(from)?;
            let span = lhs.span().to(rhs.span());
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs), span);
        }
    }

    fn term(&mut self, from: usize) -> PResult<Expr> {
        let mut lhs = self.factor(from)?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor(from)?;
            let span = lhs.span().to(rhs.span());
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs), span);
        }
    }

    fn factor(&mut self, from: usize) -> PResult<Expr> {
        let start = self.span().start;
        match self.peek().clone() {
            Tok::Int(_) | Tok::Minus => {
                let v = self.signed_int(from)?;
                Ok(Expr::Int(v, Span::new(start, self.prev_end())))
            }
            Tok::Name(n) => {
                let s = self.bump().1;
                Ok(Expr::Var(n, s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.arith(from)?;
                self.expect(&Tok::RParen, from, "`)` closing expression")?;
                Ok(e)
            }
            _ => Err(self.fail(from, "expression")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum NameRole {
    Thread,
    Variable,
    Channel,
}

impl NameRole {
    fn noun(self) -> &'static str {
        match self {
            NameRole::Thread => "thread",
            NameRole::Variable => "variable",
            NameRole::Channel => "channel",
        }
    }
}

/// Name-level checks that need the whole tree.
fn resolve(program: &Program) -> Vec<ParseFailure> {
    let mut failures = Vec::new();
    let mut threads: BTreeMap<&str, Span> = BTreeMap::new();
    let mut stack = vec![&program.body];
    let mut leaves = Vec::new();
    while let Some(s) = stack.pop() {
        match s {
            Stmt::Leaf {
                thread, cmds, span, ..
            } => leaves.push((thread.as_str(), cmds.as_slice(), *span)),
            Stmt::Node { left, right, .. } => {
                stack.push(right);
                stack.push(left);
            }
        }
    }
    for &(thread, _, span) in &leaves {
        if threads.insert(thread, span).is_some() {
            failures.push(ParseFailure {
                kind: FailureKind::DuplicateThreadName,
                span,
                message: format!("thread `{thread}` is declared more than once"),
            });
        }
    }

    let mut seen_globals = BTreeSet::new();
    for g in &program.globals {
        if !seen_globals.insert(g.name.as_str()) {
            failures.push(ParseFailure {
                kind: FailureKind::DuplicateGlobal,
                span: g.span,
                message: format!("global `{}` is declared more than once", g.name),
            });
        }
        if !threads.contains_key(g.owner.as_str()) {
            failures.push(ParseFailure {
                kind: FailureKind::UnknownOwner,
                span: g.span,
                message: format!("owner `{}` of global `{}` is not a thread", g.owner, g.name),
            });
        }
    }

    // First role each name was used in; later conflicting uses are reported once per name.
    let mut roles: BTreeMap<&str, NameRole> = BTreeMap::new();
    let mut reported = BTreeSet::new();
    let mut uses: Vec<(&str, NameRole, Span)> = Vec::new();
    for &(thread, _, span) in &leaves {
        uses.push((thread, NameRole::Thread, span));
    }
    for g in &program.globals {
        uses.push((&g.name, NameRole::Variable, g.span));
    }
    for &(_, cmds, _) in &leaves {
        for c in cmds {
            let s = c.span;
            match &c.kind {
                CmdKind::New(n)
                | CmdKind::Dispose(n)
                | CmdKind::Release(n)
                | CmdKind::Acquire(n) => uses.push((n, NameRole::Variable, s)),
                CmdKind::Assign(n, e) => {
                    uses.push((n, NameRole::Variable, s));
                    uses.extend(e.vars().into_iter().map(|v| (v, NameRole::Variable, s)));
                }
                CmdKind::Input(n, ch) => {
                    uses.push((n, NameRole::Variable, s));
                    uses.push((ch, NameRole::Channel, s));
                }
                CmdKind::Output(ch, e) => {
                    uses.push((ch, NameRole::Channel, s));
                    uses.extend(e.vars().into_iter().map(|v| (v, NameRole::Variable, s)));
                }
                CmdKind::Assert(e) => {
                    uses.extend(e.vars().into_iter().map(|v| (v, NameRole::Variable, s)))
                }
                CmdKind::Skip => {}
            }
        }
    }
    for (name, role, span) in uses {
        match roles.get(name) {
            None => {
                roles.insert(name, role);
            }
            Some(&first) if first != role && reported.insert(name) => {
                failures.push(ParseFailure {
                    kind: FailureKind::NameCollision,
                    span,
                    message: format!(
                        "`{name}` is used as a {} and as a {}",
                        first.noun(),
                        role.noun()
                    ),
                });
            }
            Some(_) => {}
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "globals { y = 3 @ u } t:(new x; x := c?; release x) | u:(y := y + 1; acquire x; d!(x + y); dispose x)";

    fn leaf_cmds(s: &Stmt) -> Vec<CmdKind> {
        match s {
            Stmt::Leaf { cmds, .. } => cmds.iter().map(|c| c.kind.clone()).collect(),
            _ => panic!("not a leaf"),
        }
    }

    fn var(n: &str) -> Expr {
        Expr::Var(n.into(), Span::default())
    }

    #[test]
    fn parses_worked_example() {
        let p = parse(EXAMPLE).unwrap();
        assert_eq!(
            p.globals
                .iter()
                .map(|g| (g.name.as_str(), g.value, g.owner.as_str()))
                .collect::<Vec<_>>(),
            vec![("y", 3, "u")]
        );
        let Stmt::Node {
            op, left, right, ..
        } = &p.without_spans().body
        else {
            panic!("expected a node");
        };
        assert_eq!(*op, Op::Par);
        assert_eq!(
            leaf_cmds(left),
            vec![
                CmdKind::New("x".into()),
                CmdKind::Input("x".into(), "c".into()),
                CmdKind::Release("x".into()),
            ]
        );
        let add = |l, r| Expr::Arith(ArithOp::Add, Box::new(l), Box::new(r), Span::default());
        assert_eq!(
            leaf_cmds(right),
            vec![
                CmdKind::Assign("y".into(), add(var("y"), Expr::Int(1, Span::default()))),
                CmdKind::Acquire("x".into()),
                CmdKind::Output("d".into(), add(var("x"), var("y"))),
                CmdKind::Dispose("x".into()),
            ]
        );
    }

    #[test]
    fn smallest_program() {
        let p = parse("t:(skip)").unwrap();
        assert!(p.globals.is_empty());
        assert_eq!(leaf_cmds(&p.body), vec![CmdKind::Skip]);
        assert_eq!(p.body.span(), Span::new(0, 8));
    }

    #[test]
    fn incomplete_assignment_is_spanned() {
        let errs = parse("t:(x := )").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, FailureKind::Syntax);
        // covers `x := ` up to and including the offending `)`
        assert_eq!(errs[0].span, Span::new(3, 9));
    }

    #[test]
    fn precedence_and_right_associativity() {
        let p = parse("a:(skip) | b:(skip) ||| c:(skip) >> d:(skip) ; e:(skip) ; f:(skip)")
            .unwrap()
            .without_spans();
        let Stmt::Node { op, right, .. } = &p.body else {
            panic!()
        };
        assert_eq!(*op, Op::Par);
        let Stmt::Node { op, right, .. } = &**right else {
            panic!()
        };
        assert_eq!(*op, Op::Interleave);
        let Stmt::Node { op, right, .. } = &**right else {
            panic!()
        };
        assert_eq!(*op, Op::Chain);
        let Stmt::Node { op, right, .. } = &**right else {
            panic!()
        };
        assert_eq!(*op, Op::Seq);
        let Stmt::Node { op, left, .. } = &**right else {
            panic!()
        };
        assert_eq!(*op, Op::Seq);
        assert!(matches!(&**left, Stmt::Leaf { thread, .. } if thread == "e"));
    }

    #[test]
    fn parentheses_override_precedence() {
        let p = parse("(a:(skip) | b:(skip)) ; c:(skip)").unwrap();
        assert!(matches!(p.body, Stmt::Node { op: Op::Seq, .. }));
    }

    #[test]
    fn comparison_only_in_assert() {
        assert!(parse("t:(assert 0 = 1)").is_ok());
        assert!(parse("t:(x := 0 = 1)").is_err());
    }

    #[test]
    fn negative_literals() {
        let p = parse("globals { y = -9223372036854775808 @ t } t:(y := y - -1)").unwrap();
        assert_eq!(p.globals[0].value, i64::MIN);
        assert!(parse("globals { y = 9223372036854775808 @ t } t:(skip)").is_err());
    }

    #[test]
    fn duplicate_thread_and_global() {
        let errs = parse("globals { y = 1 @ t y = 2 @ t } t:(skip) | t:(skip)").unwrap_err();
        let kinds: Vec<_> = errs.iter().map(|e| e.kind).collect();
        assert!(kinds.contains(&FailureKind::DuplicateThreadName));
        assert!(kinds.contains(&FailureKind::DuplicateGlobal));
    }

    #[test]
    fn unknown_owner() {
        let errs = parse("globals { y = 1 @ v } t:(skip)").unwrap_err();
        assert_eq!(errs[0].kind, FailureKind::UnknownOwner);
    }

    #[test]
    fn channel_variable_collision() {
        let errs = parse("t:(c := c?)").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, FailureKind::NameCollision);
        let errs = parse("t:(t!(1))").unwrap_err();
        assert_eq!(errs[0].kind, FailureKind::NameCollision);
    }

    #[test]
    fn keywords_are_reserved() {
        assert!(parse("new:(skip)").is_err());
        assert!(parse("t:(new skip)").is_err());
    }

    #[test]
    fn trailing_garbage_rejected() {
        let errs = parse("t:(skip) u").unwrap_err();
        assert_eq!(errs[0].span, Span::new(9, 10));
    }

    #[test]
    fn comments_ignored() {
        let p = parse("// header\nt:(skip) // done\n").unwrap();
        assert_eq!(leaf_cmds(&p.body), vec![CmdKind::Skip]);
    }
}
