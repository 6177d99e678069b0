use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::ast::{BinOp, Binder, Block, Expr, Func, Stmt, UnOp};
use super::value::Type;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error: {0}")]
pub struct TypeError(pub String);

pub type TypeEnv = HashMap<String, Type>;

fn mismatch(what: &str, expected: &str, found: &Type) -> TypeError {
    TypeError(format!("{what}: expected {expected}, found {found}"))
}

fn expect(found: Type, want: &Type, what: &str) -> Result<Type, TypeError> {
    found.unify(want).ok_or_else(|| mismatch(what, &want.to_string(), &found))
}

fn seq_elem(t: Type, what: &str) -> Result<Type, TypeError> {
    match t {
        Type::Seq(e) => Ok(*e),
        Type::Unknown => Ok(Type::Unknown),
        other => Err(mismatch(what, "a sequence", &other)),
    }
}

/// Infers the type of `e` under `env`.
pub fn type_of(e: &Expr, env: &TypeEnv) -> Result<Type, TypeError> {
    match e {
        Expr::Lit(v) => Ok(v.type_of()),
        Expr::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| TypeError(format!("unbound variable `{x}`"))),
        Expr::Tuple(es) => Ok(Type::Tuple(es.iter().map(|e| type_of(e, env)).collect::<Result<_, _>>()?)),
        Expr::Seq(es) => {
            let mut elem = Type::Unknown;
            for x in es {
                let t = type_of(x, env)?;
                elem = elem
                    .unify(&t)
                    .ok_or_else(|| mismatch("sequence element", &elem.to_string(), &t))?;
            }
            Ok(Type::Seq(Box::new(elem)))
        }
        Expr::Proj(inner, i) => match type_of(inner, env)? {
            Type::Tuple(ts) => ts
                .get(*i)
                .cloned()
                .ok_or_else(|| TypeError(format!("projection .{i} out of range for {}-tuple", ts.len()))),
            other => Err(mismatch(&format!("projection .{i}"), "a tuple", &other)),
        },
        Expr::Unary(UnOp::Neg, x) => expect(type_of(x, env)?, &Type::Int, "negation"),
        Expr::Unary(UnOp::Not, x) => expect(type_of(x, env)?, &Type::Bool, "`not`"),
        Expr::Binary(op, a, b) => {
            let (ta, tb) = (type_of(a, env)?, type_of(b, env)?);
            let what = format!("operator `{}`", op.symbol());
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    expect(ta, &Type::Int, &what)?;
                    expect(tb, &Type::Int, &what)
                }
                BinOp::And | BinOp::Or => {
                    expect(ta, &Type::Bool, &what)?;
                    expect(tb, &Type::Bool, &what)
                }
                BinOp::Concat => match ta.unify(&tb) {
                    Some(t @ (Type::Text | Type::Seq(_))) => Ok(t),
                    _ => Err(TypeError(format!("{what}: cannot concatenate {ta} and {tb}"))),
                },
                BinOp::Eq | BinOp::Ne => {
                    ta.unify(&tb)
                        .ok_or_else(|| TypeError(format!("{what}: cannot compare {ta} with {tb}")))?;
                    Ok(Type::Bool)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match ta.unify(&tb) {
                    Some(Type::Int | Type::Text) => Ok(Type::Bool),
                    _ => Err(TypeError(format!("{what}: cannot order {ta} and {tb}"))),
                },
            }
        }
        Expr::If(c, a, b) => {
            expect(type_of(c, env)?, &Type::Bool, "`if` condition")?;
            let (ta, tb) = (type_of(a, env)?, type_of(b, env)?);
            ta.unify(&tb)
                .ok_or_else(|| TypeError(format!("`if` branches disagree: {ta} vs {tb}")))
        }
        Expr::Call(f, args) => {
            let ts: Vec<Type> = args.iter().map(|a| type_of(a, env)).collect::<Result<_, _>>()?;
            let what = format!("`{}`", f.name());
            match f {
                Func::Instance => Ok(Type::Int),
                Func::Abs => expect(ts[0].clone(), &Type::Int, &what),
                Func::Min | Func::Max => {
                    expect(ts[0].clone(), &Type::Int, &what)?;
                    expect(ts[1].clone(), &Type::Int, &what)
                }
                Func::Len => match &ts[0] {
                    Type::Text | Type::Seq(_) => Ok(Type::Int),
                    other => Err(mismatch(&what, "TEXT or a sequence", other)),
                },
                Func::Substr => {
                    expect(ts[0].clone(), &Type::Text, &what)?;
                    expect(ts[1].clone(), &Type::Int, &what)?;
                    expect(ts[2].clone(), &Type::Int, &what)?;
                    Ok(Type::Text)
                }
                Func::Str => Ok(Type::Text),
                Func::Int => {
                    expect(ts[0].clone(), &Type::Text, &what)?;
                    Ok(Type::Int)
                }
                Func::Nth => {
                    expect(ts[1].clone(), &Type::Int, &what)?;
                    seq_elem(ts[0].clone(), &what)
                }
                Func::Choose => seq_elem(ts[0].clone(), &what),
                Func::Append | Func::Remove => {
                    let elem = seq_elem(ts[0].clone(), &what)?;
                    let elem = elem
                        .unify(&ts[1])
                        .ok_or_else(|| mismatch(&what, &elem.to_string(), &ts[1]))?;
                    Ok(Type::Seq(Box::new(elem)))
                }
            }
        }
        Expr::Bind { binder, var, seq, body } => {
            let elem = seq_elem(type_of(seq, env)?, binder.keyword())?;
            let mut inner = env.clone();
            inner.insert(var.clone(), elem.clone());
            let tb = type_of(body, &inner)?;
            match binder {
                Binder::Exists | Binder::Forall => expect(tb, &Type::Bool, binder.keyword()),
                Binder::Filter => {
                    expect(tb, &Type::Bool, "filter")?;
                    Ok(Type::Seq(Box::new(elem)))
                }
                Binder::Map => Ok(Type::Seq(Box::new(tb))),
            }
        }
    }
}

/// Checks that `e` is a BOOL expression.
pub fn check_guard(e: &Expr, env: &TypeEnv) -> Result<(), TypeError> {
    match type_of(e, env)? {
        Type::Bool => Ok(()),
        other => Err(mismatch("guard", "BOOL", &other)),
    }
}

/// Type-checks an action block. `env` gains the block's locals; only names in
/// `assignable` may be targets of `:=`, and the assigned value must match
/// their declared type.
pub fn check_block(
    block: &Block,
    env: &mut TypeEnv,
    assignable: &HashSet<String>,
) -> Result<(), TypeError> {
    for stmt in block {
        match stmt {
            Stmt::Let(x, e) => {
                if assignable.contains(x) {
                    return Err(TypeError(format!("`let {x}` shadows an assignable variable")));
                }
                let t = type_of(e, env)?;
                env.insert(x.clone(), t);
            }
            Stmt::Assign(x, e) => {
                if !assignable.contains(x) {
                    return Err(TypeError(format!("`{x}` is not assignable here")));
                }
                let declared = env
                    .get(x)
                    .cloned()
                    .ok_or_else(|| TypeError(format!("unbound variable `{x}`")))?;
                let t = type_of(e, env)?;
                if declared.unify(&t).is_none() {
                    return Err(mismatch(&format!("assignment to `{x}`"), &declared.to_string(), &t));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::{parse_block_str, parse_expr_str};

    fn env(pairs: &[(&str, Type)]) -> TypeEnv {
        pairs.iter().map(|(k, t)| (k.to_string(), t.clone())).collect()
    }

    #[test]
    fn guard_must_be_bool() {
        let e = env(&[("rear", Type::Int), ("Max", Type::Int)]);
        assert!(check_guard(&parse_expr_str("rear < Max").unwrap(), &e).is_ok());
        assert!(check_guard(&parse_expr_str("rear + 1").unwrap(), &e).is_err());
    }

    #[test]
    fn empty_seq_unifies() {
        let e = env(&[("data", Type::Seq(Box::new(Type::Text)))]);
        let t = type_of(&parse_expr_str("if len(data) > 0 then data else []").unwrap(), &e).unwrap();
        assert_eq!(t, Type::Seq(Box::new(Type::Text)));
    }

    #[test]
    fn binders() {
        let row = Type::Tuple(vec![Type::Int, Type::Int, Type::Text, Type::Text]);
        let e = env(&[("fd", Type::Seq(Box::new(row)))]);
        let t = type_of(
            &parse_expr_str("map f in filter g in fd: g.3 = \"Enemy\": (f.0, f.1, f.2)").unwrap(),
            &e,
        )
        .unwrap();
        assert_eq!(t, Type::Seq(Box::new(Type::Tuple(vec![Type::Int, Type::Int, Type::Text]))));
    }

    #[test]
    fn assignment_rules() {
        let mut e = env(&[("rear", Type::Int), ("obj", Type::Text)]);
        let assignable: HashSet<String> = ["rear".to_string()].into();
        let ok = parse_block_str("let n = rear + 1; rear := n;").unwrap();
        assert!(check_block(&ok, &mut e.clone(), &assignable).is_ok());
        let bad_target = parse_block_str("obj := \"x\";").unwrap();
        assert!(check_block(&bad_target, &mut e.clone(), &assignable).is_err());
        let bad_type = parse_block_str("rear := \"x\";").unwrap();
        assert!(check_block(&bad_type, &mut e, &assignable).is_err());
    }

    #[test]
    fn projection_bounds() {
        let e = env(&[("t", Type::Tuple(vec![Type::Int]))]);
        assert!(type_of(&parse_expr_str("t.1").unwrap(), &e).is_err());
    }
}
