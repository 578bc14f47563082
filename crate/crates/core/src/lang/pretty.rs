use std::fmt::Write;

use super::{Cmd, CmdKind, Expr, Program, Stmt};

/// Render a program in the fixed concrete syntax, with the fewest parentheses
/// that re-parse to the same tree.
pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    if !program.globals.is_empty() {
        out.push_str("globals {");
        for g in &program.globals {
            let _ = write!(out, " {} = {} @ {}", g.name, g.value, g.owner);
        }
        out.push_str(" } ");
    }
    stmt(&program.body, &mut out);
    out
}

fn stmt(s: &Stmt, out: &mut String) {
    match s {
        Stmt::Leaf { thread, cmds, .. } => {
            let _ = write!(out, "{thread}:(");
            for (i, c) in cmds.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                out.push_str(&pretty_cmd(c));
            }
            out.push(')');
        }
        Stmt::Node {
            op, left, right, ..
        } => {
            let prec = op.precedence();
            operand(left, |p| p <= prec, out);
            let _ = write!(out, " {} ", op.symbol());
            operand(right, |p| p < prec, out);
        }
    }
}

fn operand(s: &Stmt, needs_parens: impl Fn(u8) -> bool, out: &mut String) {
    let wrap = matches!(s, Stmt::Node { op, .. } if needs_parens(op.precedence()));
    if wrap {
        out.push('(');
    }
    stmt(s, out);
    if wrap {
        out.push(')');
    }
}

pub fn pretty_cmd(c: &Cmd) -> String {
    match &c.kind {
        CmdKind::New(x) => format!("new {x}"),
        CmdKind::Dispose(x) => format!("dispose {x}"),
        CmdKind::Release(x) => format!("release {x}"),
        CmdKind::Acquire(x) => format!("acquire {x}"),
        CmdKind::Skip => "skip".to_string(),
        CmdKind::Assert(e) => format!("assert {}", pretty_expr(e)),
        CmdKind::Input(x, ch) => format!("{x} := {ch}?"),
        CmdKind::Assign(x, e) => format!("{x} := {}", pretty_expr(e)),
        CmdKind::Output(ch, e) => format!("{ch}!({})", pretty_expr(e)),
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(e, &mut out);
    out
}

fn expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(v, _) => {
            let _ = write!(out, "{v}");
        }
        Expr::Var(n, _) => out.push_str(n),
        Expr::Cmp(op, l, r, _) => {
            expr(l, out);
            let _ = write!(out, " {} ", op.symbol());
            expr(r, out);
        }
        Expr::Arith(op, l, r, _) => {
            let prec = op.precedence();
            arith_operand(l, |p| p < prec, out);
            let _ = write!(out, " {} ", op.symbol());
            arith_operand(r, |p| p <= prec, out);
        }
    }
}

fn arith_operand(e: &Expr, needs_parens: impl Fn(u8) -> bool, out: &mut String) {
    let wrap = matches!(e, Expr::Arith(op, ..) if needs_parens(op.precedence()));
    if wrap {
        out.push('(');
    }
    expr(e, out);
    if wrap {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn skip_leaf() {
        assert_eq!(pretty(&parse("t:(skip)").unwrap()), "t:(skip)");
    }

    #[test]
    fn seq_at_top_level() {
        let text = pretty(&parse("a:(skip);b:(skip)").unwrap());
        assert_eq!(text, "a:(skip) ; b:(skip)");
    }

    #[test]
    fn minimal_parentheses() {
        for src in [
            "(a:(skip) | b:(skip)) ; c:(skip)",
            "(a:(skip) ; b:(skip)) ; c:(skip)",
            "a:(skip) >> (b:(skip) ||| c:(skip))",
            "t:(x := 1 - 2 - (3 - 4) * (5 / (6 * 7)))",
        ] {
            let p = parse(src).unwrap();
            assert_eq!(pretty(&p), src);
            assert_eq!(parse(&pretty(&p)).unwrap().without_spans(), p.without_spans());
        }
    }
}
