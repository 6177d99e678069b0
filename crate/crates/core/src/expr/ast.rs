use std::fmt;

use super::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Concat,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
            BinOp::Concat => "++",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

/// Built-in functions callable as `name(args)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Len,
    Substr,
    Str,
    Int,
    Nth,
    Append,
    Remove,
    Choose,
    Instance,
    Min,
    Max,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "len" => Func::Len,
            "substr" => Func::Substr,
            "str" => Func::Str,
            "int" => Func::Int,
            "nth" => Func::Nth,
            "append" => Func::Append,
            "remove" => Func::Remove,
            "choose" => Func::Choose,
            "instance" => Func::Instance,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Len => "len",
            Func::Substr => "substr",
            Func::Str => "str",
            Func::Int => "int",
            Func::Nth => "nth",
            Func::Append => "append",
            Func::Remove => "remove",
            Func::Choose => "choose",
            Func::Instance => "instance",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Instance => 0,
            Func::Abs | Func::Len | Func::Str | Func::Int | Func::Choose => 1,
            Func::Nth | Func::Append | Func::Remove | Func::Min | Func::Max => 2,
            Func::Substr => 3,
        }
    }
}

/// Comprehension-style binders over a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binder {
    Exists,
    Forall,
    Filter,
    Map,
}

impl Binder {
    pub fn keyword(self) -> &'static str {
        match self {
            Binder::Exists => "exists",
            Binder::Forall => "forall",
            Binder::Filter => "filter",
            Binder::Map => "map",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    Var(String),
    Tuple(Vec<Expr>),
    Seq(Vec<Expr>),
    Proj(Box<Expr>, usize),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    Bind { binder: Binder, var: String, seq: Box<Expr>, body: Box<Expr> },
}

impl Expr {
    /// True if evaluation may branch through `choose`.
    pub fn has_choice(&self) -> bool {
        match self {
            Expr::Lit(_) | Expr::Var(_) => false,
            Expr::Call(Func::Choose, _) => true,
            Expr::Tuple(es) | Expr::Seq(es) | Expr::Call(_, es) => es.iter().any(Expr::has_choice),
            Expr::Proj(e, _) | Expr::Unary(_, e) => e.has_choice(),
            Expr::Binary(_, a, b) => a.has_choice() || b.has_choice(),
            Expr::If(c, a, b) => c.has_choice() || a.has_choice() || b.has_choice(),
            Expr::Bind { seq, body, .. } => seq.has_choice() || body.has_choice(),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        fn go(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match e {
                Expr::Lit(_) => {}
                Expr::Var(v) => {
                    if !bound.contains(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Expr::Tuple(es) | Expr::Seq(es) | Expr::Call(_, es) => {
                    es.iter().for_each(|e| go(e, bound, out))
                }
                Expr::Proj(e, _) | Expr::Unary(_, e) => go(e, bound, out),
                Expr::Binary(_, a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Expr::If(c, a, b) => {
                    go(c, bound, out);
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Expr::Bind { var, seq, body, .. } => {
                    go(seq, bound, out);
                    bound.push(var.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, es: &[Expr]) -> fmt::Result {
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            Ok(())
        }
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Tuple(es) => {
                write!(f, "(")?;
                list(f, es)?;
                if es.len() == 1 {
                    write!(f, ",")?;
                }
                write!(f, ")")
            }
            Expr::Seq(es) => {
                write!(f, "[")?;
                list(f, es)?;
                write!(f, "]")
            }
            Expr::Proj(e, i) => write!(f, "{e}.{i}"),
            Expr::Unary(UnOp::Neg, e) => write!(f, "(-{e})"),
            Expr::Unary(UnOp::Not, e) => write!(f, "(not {e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::If(c, a, b) => write!(f, "(if {c} then {a} else {b})"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                list(f, args)?;
                write!(f, ")")
            }
            Expr::Bind { binder, var, seq, body } => {
                write!(f, "({} {var} in {seq}: {body})", binder.keyword())
            }
        }
    }
}

/// One statement of an action block.
#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    /// `let x = e;` introduces a local.
    Let(String, Expr),
    /// `x := e;` updates a state variable or an outgoing parameter.
    Assign(String, Expr),
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Let(x, e) => write!(f, "let {x} = {e};"),
            Stmt::Assign(x, e) => write!(f, "{x} := {e};"),
        }
    }
}

pub type Block = Vec<Stmt>;
