use crate::lexer::{Cursor, LexError, Tok};

use super::ast::{BinOp, Binder, Block, Expr, Func, Stmt, UnOp};
use super::value::{Type, Value};

const RESERVED: &[&str] = &[
    "and", "or", "not", "if", "then", "else", "div", "mod", "true", "false", "exists", "forall",
    "filter", "map", "in", "let",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Parses a complete expression from source text.
pub fn parse_expr_str(src: &str) -> Result<Expr, LexError> {
    let mut c = Cursor::new(src)?;
    let e = parse_expr(&mut c)?;
    if !c.at_eof() {
        return Err(c.error(format!("unexpected {} after expression", c.peek())));
    }
    Ok(e)
}

/// Parses a `stmt; stmt; ...` block (without braces) from source text.
pub fn parse_block_str(src: &str) -> Result<Block, LexError> {
    let mut c = Cursor::new(src)?;
    let mut out = Vec::new();
    while !c.at_eof() {
        out.push(parse_stmt(&mut c)?);
    }
    Ok(out)
}

pub fn parse_type_str(src: &str) -> Result<Type, LexError> {
    let mut c = Cursor::new(src)?;
    let t = parse_type(&mut c)?;
    if !c.at_eof() {
        return Err(c.error(format!("unexpected {} after type", c.peek())));
    }
    Ok(t)
}

pub fn parse_type(c: &mut Cursor) -> Result<Type, LexError> {
    if c.accept_sym("(") {
        let mut ts = vec![parse_type(c)?];
        while c.accept_sym(",") {
            ts.push(parse_type(c)?);
        }
        c.expect_sym(")")?;
        return Ok(if ts.len() == 1 { ts.pop().unwrap() } else { Type::Tuple(ts) });
    }
    let name = c.expect_ident()?;
    match name.as_str() {
        "INT" => Ok(Type::Int),
        "BOOL" => Ok(Type::Bool),
        "TEXT" => Ok(Type::Text),
        "UNIT" => Ok(Type::Unit),
        "seq" => {
            c.expect_sym("(")?;
            let t = parse_type(c)?;
            c.expect_sym(")")?;
            Ok(Type::Seq(Box::new(t)))
        }
        "tuple" => {
            c.expect_sym("(")?;
            let mut ts = vec![parse_type(c)?];
            while c.accept_sym(",") {
                ts.push(parse_type(c)?);
            }
            c.expect_sym(")")?;
            Ok(Type::Tuple(ts))
        }
        other => Err(c.error(format!("unknown type `{other}`"))),
    }
}

pub fn parse_stmt(c: &mut Cursor) -> Result<Stmt, LexError> {
    if c.accept_kw("let") {
        let name = parse_var_name(c)?;
        c.expect_sym("=")?;
        let e = parse_expr(c)?;
        c.expect_sym(";")?;
        return Ok(Stmt::Let(name, e));
    }
    let name = parse_var_name(c)?;
    c.expect_sym(":=")?;
    let e = parse_expr(c)?;
    c.expect_sym(";")?;
    Ok(Stmt::Assign(name, e))
}

fn parse_var_name(c: &mut Cursor) -> Result<String, LexError> {
    let name = c.expect_ident()?;
    if is_reserved(&name) {
        return Err(c.error(format!("`{name}` is a reserved word")));
    }
    Ok(name)
}

pub fn parse_expr(c: &mut Cursor) -> Result<Expr, LexError> {
    let binder = match c.peek() {
        Tok::Ident(k) if k == "exists" => Some(Binder::Exists),
        Tok::Ident(k) if k == "forall" => Some(Binder::Forall),
        Tok::Ident(k) if k == "filter" => Some(Binder::Filter),
        Tok::Ident(k) if k == "map" => Some(Binder::Map),
        _ => None,
    };
    if let Some(binder) = binder {
        c.next();
        let var = parse_var_name(c)?;
        c.expect_kw("in")?;
        let seq = parse_expr(c)?;
        c.expect_sym(":")?;
        let body = parse_expr(c)?;
        return Ok(Expr::Bind { binder, var, seq: Box::new(seq), body: Box::new(body) });
    }
    if c.accept_kw("if") {
        let cond = parse_expr(c)?;
        c.expect_kw("then")?;
        let a = parse_expr(c)?;
        c.expect_kw("else")?;
        let b = parse_expr(c)?;
        return Ok(Expr::If(Box::new(cond), Box::new(a), Box::new(b)));
    }
    parse_or(c)
}

fn parse_or(c: &mut Cursor) -> Result<Expr, LexError> {
    let mut e = parse_and(c)?;
    while c.accept_kw("or") {
        let rhs = parse_and(c)?;
        e = Expr::Binary(BinOp::Or, Box::new(e), Box::new(rhs));
    }
    Ok(e)
}

fn parse_and(c: &mut Cursor) -> Result<Expr, LexError> {
    let mut e = parse_not(c)?;
    while c.accept_kw("and") {
        let rhs = parse_not(c)?;
        e = Expr::Binary(BinOp::And, Box::new(e), Box::new(rhs));
    }
    Ok(e)
}

fn parse_not(c: &mut Cursor) -> Result<Expr, LexError> {
    if c.accept_kw("not") {
        let e = parse_not(c)?;
        return Ok(Expr::Unary(UnOp::Not, Box::new(e)));
    }
    parse_cmp(c)
}

fn parse_cmp(c: &mut Cursor) -> Result<Expr, LexError> {
    let lhs = parse_add(c)?;
    let op = match c.peek() {
        Tok::Sym("=") => BinOp::Eq,
        Tok::Sym("<>") => BinOp::Ne,
        Tok::Sym("<") => BinOp::Lt,
        Tok::Sym("<=") => BinOp::Le,
        Tok::Sym(">") => BinOp::Gt,
        Tok::Sym(">=") => BinOp::Ge,
        _ => return Ok(lhs),
    };
    c.next();
    let rhs = parse_add(c)?;
    Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
}

fn parse_add(c: &mut Cursor) -> Result<Expr, LexError> {
    let mut e = parse_mul(c)?;
    loop {
        let op = match c.peek() {
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("++") => BinOp::Concat,
            _ => return Ok(e),
        };
        c.next();
        let rhs = parse_mul(c)?;
        e = Expr::Binary(op, Box::new(e), Box::new(rhs));
    }
}

fn parse_mul(c: &mut Cursor) -> Result<Expr, LexError> {
    let mut e = parse_unary(c)?;
    loop {
        let op = match c.peek() {
            Tok::Sym("*") => BinOp::Mul,
            Tok::Ident(k) if k == "div" => BinOp::Div,
            Tok::Ident(k) if k == "mod" => BinOp::Mod,
            _ => return Ok(e),
        };
        c.next();
        let rhs = parse_unary(c)?;
        e = Expr::Binary(op, Box::new(e), Box::new(rhs));
    }
}

fn parse_unary(c: &mut Cursor) -> Result<Expr, LexError> {
    if c.accept_sym("-") {
        // Fold negative literals so that `-3` is a value, not an operation.
        let e = parse_unary(c)?;
        return Ok(match e {
            Expr::Lit(Value::Int(i)) => Expr::Lit(Value::Int(-i)),
            other => Expr::Unary(UnOp::Neg, Box::new(other)),
        });
    }
    parse_postfix(c)
}

fn parse_postfix(c: &mut Cursor) -> Result<Expr, LexError> {
    let mut e = parse_primary(c)?;
    while c.is_sym(".") {
        c.next();
        match c.next() {
            Tok::Int(i) if i >= 0 => e = Expr::Proj(Box::new(e), i as usize),
            other => return Err(c.error(format!("expected tuple index, found {other}"))),
        }
    }
    Ok(e)
}

fn parse_list(c: &mut Cursor, close: &str) -> Result<Vec<Expr>, LexError> {
    let mut out = Vec::new();
    if c.accept_sym(close) {
        return Ok(out);
    }
    loop {
        out.push(parse_expr(c)?);
        if c.accept_sym(close) {
            return Ok(out);
        }
        c.expect_sym(",")?;
    }
}

fn parse_primary(c: &mut Cursor) -> Result<Expr, LexError> {
    match c.next() {
        Tok::Int(i) => Ok(Expr::Lit(Value::Int(i))),
        Tok::Str(s) => Ok(Expr::Lit(Value::Text(s))),
        Tok::Sym("(") => {
            if c.accept_sym(")") {
                return Ok(Expr::Lit(Value::Unit));
            }
            let first = parse_expr(c)?;
            if c.accept_sym(")") {
                return Ok(first);
            }
            c.expect_sym(",")?;
            let mut items = vec![first];
            items.extend(parse_list(c, ")")?);
            Ok(Expr::Tuple(items))
        }
        Tok::Sym("[") => Ok(Expr::Seq(parse_list(c, "]")?)),
        Tok::Ident(name) => match name.as_str() {
            "true" => Ok(Expr::Lit(Value::Bool(true))),
            "false" => Ok(Expr::Lit(Value::Bool(false))),
            _ if c.is_sym("(") => {
                let func = Func::from_name(&name)
                    .ok_or_else(|| c.error(format!("unknown function `{name}`")))?;
                c.next();
                let args = parse_list(c, ")")?;
                if args.len() != func.arity() {
                    return Err(c.error(format!(
                        "`{name}` takes {} argument(s), got {}",
                        func.arity(),
                        args.len()
                    )));
                }
                Ok(Expr::Call(func, args))
            }
            _ if is_reserved(&name) => Err(c.error(format!("unexpected keyword `{name}`"))),
            _ => Ok(Expr::Var(name)),
        },
        other => Err(c.error(format!("unexpected {other} in expression"))),
    }
}
