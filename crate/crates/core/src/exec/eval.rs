use std::collections::BTreeMap;

use crate::lang::{ArithOp, CmpOp, Expr};

use super::RuntimeErrorKind;

/// Evaluate over 64-bit integers. Division truncates toward zero; comparisons
/// yield 1 or 0; overflow is reported rather than wrapped.
pub fn evaluate(expr: &Expr, env: &BTreeMap<String, i64>) -> Result<i64, RuntimeErrorKind> {
    match expr {
        Expr::Int(v, _) => Ok(*v),
        Expr::Var(name, _) => env.get(name).copied().ok_or(RuntimeErrorKind::UnknownName),
        Expr::Arith(op, l, r, _) => {
            let (a, b) = (evaluate(l, env)?, evaluate(r, env)?);
            match op {
                ArithOp::Add => a.checked_add(b),
                ArithOp::Sub => a.checked_sub(b),
                ArithOp::Mul => a.checked_mul(b),
                ArithOp::Div => {
                    if b == 0 {
                        return Err(RuntimeErrorKind::ZeroDivide);
                    }
                    a.checked_div(b)
                }
            }
            .ok_or(RuntimeErrorKind::IntegerOverflow)
        }
        Expr::Cmp(op, l, r, _) => {
            let (a, b) = (evaluate(l, env)?, evaluate(r, env)?);
            let holds = match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
            };
            Ok(holds as i64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, CmdKind, Stmt};

    fn expr_of(src: &str) -> Expr {
        let p = parse(&format!("t:(assert {src})")).unwrap();
        let Stmt::Leaf { cmds, .. } = p.body else {
            unreachable!()
        };
        match &cmds[0].kind {
            CmdKind::Assert(e) => e.clone(),
            _ => unreachable!(),
        }
    }

    fn env(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn sum_of_transferred_and_incremented() {
        assert_eq!(evaluate(&expr_of("x + y"), &env(&[("x", 8), ("y", 4)])), Ok(12));
    }

    #[test]
    fn increment() {
        assert_eq!(evaluate(&expr_of("y + 1"), &env(&[("y", 3)])), Ok(4));
    }

    #[test]
    fn zero_divide() {
        assert_eq!(
            evaluate(&expr_of("1 / 0"), &env(&[])),
            Err(RuntimeErrorKind::ZeroDivide)
        );
    }

    #[test]
    fn truncating_division_and_comparisons() {
        assert_eq!(evaluate(&expr_of("-7 / 2"), &env(&[])), Ok(-3));
        assert_eq!(evaluate(&expr_of("0 = 1"), &env(&[])), Ok(0));
        assert_eq!(evaluate(&expr_of("2 <= 2"), &env(&[])), Ok(1));
        assert_eq!(evaluate(&expr_of("1 != 2"), &env(&[])), Ok(1));
    }

    #[test]
    fn unknown_and_overflow() {
        assert_eq!(
            evaluate(&expr_of("z"), &env(&[])),
            Err(RuntimeErrorKind::UnknownName)
        );
        assert_eq!(
            evaluate(&expr_of("9223372036854775807 + 1"), &env(&[])),
            Err(RuntimeErrorKind::IntegerOverflow)
        );
        assert_eq!(
            evaluate(&expr_of("-9223372036854775808 / -1"), &env(&[])),
            Err(RuntimeErrorKind::IntegerOverflow)
        );
    }
}
