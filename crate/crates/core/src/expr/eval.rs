use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::ast::{BinOp, Binder, Block, Expr, Func, Stmt, UnOp};
use super::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivByZero,
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: i64, len: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("integer overflow in `{0}`")]
    Overflow(&'static str),
    #[error("choose from an empty sequence")]
    EmptyChoice,
    #[error("cannot convert {0:?} to INT")]
    BadConversion(String),
    #[error("ill-typed operand for `{0}`")]
    IllTyped(String),
}

/// Source of decisions for `choose`.
pub trait Chooser {
    /// Picks an index in `0..n`; `n` is at least 1.
    fn pick(&mut self, n: usize) -> usize;
}

/// Always takes the first candidate.
#[derive(Debug, Default, Clone, Copy)]
pub struct FirstChoice;

impl Chooser for FirstChoice {
    fn pick(&mut self, _n: usize) -> usize {
        0
    }
}

impl Chooser for ChaCha8Rng {
    fn pick(&mut self, n: usize) -> usize {
        self.random_range(0..n)
    }
}

/// Replays a prefix of decisions, defaults to 0 afterwards, and records how
/// many candidates every decision point had. Drives exhaustive enumeration.
#[derive(Debug, Default, Clone)]
pub struct ScriptedChoices {
    prefix: Vec<usize>,
    taken: Vec<(usize, usize)>,
}

impl ScriptedChoices {
    pub fn new(prefix: Vec<usize>) -> Self {
        ScriptedChoices { prefix, taken: Vec::new() }
    }

    /// The lexicographically next decision vector, if any.
    pub fn successor(&self) -> Option<Vec<usize>> {
        let j = self.taken.iter().rposition(|&(c, n)| c + 1 < n)?;
        let mut next: Vec<usize> = self.taken[..j].iter().map(|&(c, _)| c).collect();
        next.push(self.taken[j].0 + 1);
        Some(next)
    }
}

impl Chooser for ScriptedChoices {
    fn pick(&mut self, n: usize) -> usize {
        let i = self.taken.len();
        let c = self.prefix.get(i).copied().unwrap_or(0).min(n - 1);
        self.taken.push((c, n));
        c
    }
}

/// Variable bindings plus the id of the executing component instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env {
    pub vars: HashMap<String, Value>,
    pub instance: i64,
}

impl Env {
    pub fn new(instance: i64) -> Self {
        Env { vars: HashMap::new(), instance }
    }

    pub fn with(mut self, name: &str, v: Value) -> Self {
        self.vars.insert(name.to_string(), v);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }

    pub fn set(&mut self, name: &str, v: Value) {
        self.vars.insert(name.to_string(), v);
    }
}

fn int(v: &Value, op: &str) -> Result<i64, EvalError> {
    v.as_int().ok_or_else(|| EvalError::IllTyped(op.to_string()))
}

fn boolean(v: &Value, op: &str) -> Result<bool, EvalError> {
    v.as_bool().ok_or_else(|| EvalError::IllTyped(op.to_string()))
}

fn seq(v: Value, op: &str) -> Result<Vec<Value>, EvalError> {
    match v {
        Value::Seq(vs) => Ok(vs),
        _ => Err(EvalError::IllTyped(op.to_string())),
    }
}

fn index(i: i64, len: usize) -> Result<usize, EvalError> {
    usize::try_from(i)
        .ok()
        .filter(|&u| u < len)
        .ok_or(EvalError::IndexOutOfRange { index: i, len })
}

/// Evaluates `e`. `choose` defers to `ch`; everything else is deterministic.
pub fn eval(e: &Expr, env: &Env, ch: &mut dyn Chooser) -> Result<Value, EvalError> {
    match e {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(x) => env.get(x).cloned().ok_or_else(|| EvalError::UnboundVariable(x.clone())),
        Expr::Tuple(es) => Ok(Value::Tuple(es.iter().map(|e| eval(e, env, ch)).collect::<Result<_, _>>()?)),
        Expr::Seq(es) => Ok(Value::Seq(es.iter().map(|e| eval(e, env, ch)).collect::<Result<_, _>>()?)),
        Expr::Proj(inner, i) => match eval(inner, env, ch)? {
            Value::Tuple(mut vs) if *i < vs.len() => Ok(vs.swap_remove(*i)),
            _ => Err(EvalError::IllTyped(format!(".{i}"))),
        },
        Expr::Unary(UnOp::Neg, x) => {
            let v = int(&eval(x, env, ch)?, "-")?;
            v.checked_neg().map(Value::Int).ok_or(EvalError::Overflow("-"))
        }
        Expr::Unary(UnOp::Not, x) => Ok(Value::Bool(!boolean(&eval(x, env, ch)?, "not")?)),
        Expr::Binary(BinOp::And, a, b) => {
            if !boolean(&eval(a, env, ch)?, "and")? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(boolean(&eval(b, env, ch)?, "and")?))
        }
        Expr::Binary(BinOp::Or, a, b) => {
            if boolean(&eval(a, env, ch)?, "or")? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(boolean(&eval(b, env, ch)?, "or")?))
        }
        Expr::Binary(op, a, b) => {
            let (va, vb) = (eval(a, env, ch)?, eval(b, env, ch)?);
            binary(*op, va, vb)
        }
        Expr::If(c, a, b) => {
            if boolean(&eval(c, env, ch)?, "if")? {
                eval(a, env, ch)
            } else {
                eval(b, env, ch)
            }
        }
        Expr::Call(f, args) => {
            let vs: Vec<Value> = args.iter().map(|a| eval(a, env, ch)).collect::<Result<_, _>>()?;
            call(*f, vs, env, ch)
        }
        Expr::Bind { binder, var, seq: s, body } => {
            let items = seq(eval(s, env, ch)?, binder.keyword())?;
            let mut inner = env.clone();
            let mut out = Vec::new();
            for item in items {
                inner.set(var, item.clone());
                let r = eval(body, &inner, ch)?;
                match binder {
                    Binder::Exists => {
                        if boolean(&r, "exists")? {
                            return Ok(Value::Bool(true));
                        }
                    }
                    Binder::Forall => {
                        if !boolean(&r, "forall")? {
                            return Ok(Value::Bool(false));
                        }
                    }
                    Binder::Filter => {
                        if boolean(&r, "filter")? {
                            out.push(item);
                        }
                    }
                    Binder::Map => out.push(r),
                }
            }
            Ok(match binder {
                Binder::Exists => Value::Bool(false),
                Binder::Forall => Value::Bool(true),
                Binder::Filter | Binder::Map => Value::Seq(out),
            })
        }
    }
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    let sym = op.symbol();
    let arith = |f: fn(i64, i64) -> Option<i64>| -> Result<Value, EvalError> {
        f(int(&a, sym)?, int(&b, sym)?).map(Value::Int).ok_or(EvalError::Overflow(sym))
    };
    match op {
        BinOp::Add => arith(i64::checked_add),
        BinOp::Sub => arith(i64::checked_sub),
        BinOp::Mul => arith(i64::checked_mul),
        BinOp::Div | BinOp::Mod => {
            let (x, y) = (int(&a, sym)?, int(&b, sym)?);
            if y == 0 {
                return Err(EvalError::DivByZero);
            }
            let r = if op == BinOp::Div { x.checked_div_euclid(y) } else { x.checked_rem_euclid(y) };
            r.map(Value::Int).ok_or(EvalError::Overflow(sym))
        }
        BinOp::Concat => match (a, b) {
            (Value::Text(x), Value::Text(y)) => Ok(Value::Text(x + &y)),
            (Value::Seq(mut x), Value::Seq(y)) => {
                x.extend(y);
                Ok(Value::Seq(x))
            }
            _ => Err(EvalError::IllTyped(sym.into())),
        },
        BinOp::Eq => Ok(Value::Bool(a == b)),
        BinOp::Ne => Ok(Value::Bool(a != b)),
        BinOp::Lt => Ok(Value::Bool(a < b)),
        BinOp::Le => Ok(Value::Bool(a <= b)),
        BinOp::Gt => Ok(Value::Bool(a > b)),
        BinOp::Ge => Ok(Value::Bool(a >= b)),
        BinOp::And | BinOp::Or => unreachable!("short-circuit operators handled by eval"),
    }
}

fn call(f: Func, mut args: Vec<Value>, env: &Env, ch: &mut dyn Chooser) -> Result<Value, EvalError> {
    let name = f.name();
    match f {
        Func::Instance => Ok(Value::Int(env.instance)),
        Func::Abs => {
            int(&args[0], name)?.checked_abs().map(Value::Int).ok_or(EvalError::Overflow("abs"))
        }
        Func::Min => Ok(Value::Int(int(&args[0], name)?.min(int(&args[1], name)?))),
        Func::Max => Ok(Value::Int(int(&args[0], name)?.max(int(&args[1], name)?))),
        Func::Len => match &args[0] {
            Value::Text(s) => Ok(Value::Int(s.chars().count() as i64)),
            Value::Seq(vs) => Ok(Value::Int(vs.len() as i64)),
            _ => Err(EvalError::IllTyped(name.into())),
        },
        Func::Substr => {
            let s = args[0].as_text().ok_or_else(|| EvalError::IllTyped(name.into()))?;
            let chars: Vec<char> = s.chars().collect();
            let (start, n) = (int(&args[1], name)?, int(&args[2], name)?);
            let end = start.checked_add(n).ok_or(EvalError::Overflow("substr"))?;
            if start < 0 || n < 0 || end as usize > chars.len() {
                return Err(EvalError::IndexOutOfRange { index: end, len: chars.len() });
            }
            Ok(Value::Text(chars[start as usize..end as usize].iter().collect()))
        }
        Func::Str => Ok(Value::Text(match &args[0] {
            Value::Text(s) => s.clone(),
            other => other.to_string(),
        })),
        Func::Int => {
            let s = args[0].as_text().ok_or_else(|| EvalError::IllTyped(name.into()))?;
            s.trim().parse::<i64>().map(Value::Int).map_err(|_| EvalError::BadConversion(s.to_string()))
        }
        Func::Nth => {
            let i = int(&args[1], name)?;
            let mut items = seq(args.swap_remove(0), name)?;
            let at = index(i, items.len())?;
            Ok(items.swap_remove(at))
        }
        Func::Append => {
            let x = args.pop().expect("arity checked");
            let mut items = seq(args.pop().expect("arity checked"), name)?;
            items.push(x);
            Ok(Value::Seq(items))
        }
        Func::Remove => {
            let x = args.pop().expect("arity checked");
            let mut items = seq(args.pop().expect("arity checked"), name)?;
            if let Some(pos) = items.iter().position(|v| *v == x) {
                items.remove(pos);
            }
            Ok(Value::Seq(items))
        }
        Func::Choose => {
            let mut items = seq(args.swap_remove(0), name)?;
            if items.is_empty() {
                return Err(EvalError::EmptyChoice);
            }
            let at = ch.pick(items.len());
            Ok(items.swap_remove(at))
        }
    }
}

/// Runs an action block, updating `env` in place.
pub fn exec_block(block: &Block, env: &mut Env, ch: &mut dyn Chooser) -> Result<(), EvalError> {
    for stmt in block {
        match stmt {
            Stmt::Let(x, e) | Stmt::Assign(x, e) => {
                let v = eval(e, env, ch)?;
                env.set(x, v);
            }
        }
    }
    Ok(())
}

/// Every outcome of running `block` from `env`, one per combination of
/// `choose` decisions, in lexicographic decision order. Outcomes whose
/// evaluation fails are returned as errors in place.
pub fn enumerate_block(block: &Block, env: &Env) -> Vec<Result<Env, EvalError>> {
    let mut out = Vec::new();
    let mut prefix = Some(Vec::new());
    while let Some(p) = prefix {
        let mut script = ScriptedChoices::new(p);
        let mut local = env.clone();
        out.push(exec_block(block, &mut local, &mut script).map(|_| local));
        prefix = script.successor();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::{parse_block_str, parse_expr_str};

    fn ev(src: &str, env: &Env) -> Result<Value, EvalError> {
        eval(&parse_expr_str(src).unwrap(), env, &mut FirstChoice)
    }

    #[test]
    fn arithmetic() {
        let env = Env::default();
        assert_eq!(ev("1 + 1", &env), Ok(Value::Int(2)));
        assert_eq!(ev("7 div 2 * 2 + 7 mod 2", &env), Ok(Value::Int(7)));
        assert_eq!(ev("1 div 0", &env), Err(EvalError::DivByZero));
        assert_eq!(ev("9223372036854775807 + 1", &env), Err(EvalError::Overflow("+")));
    }

    #[test]
    fn queue_guard() {
        let env = Env::default().with("rear", Value::Int(2)).with("M", Value::Int(5));
        assert_eq!(ev("rear < M", &env), Ok(Value::Bool(true)));
    }

    #[test]
    fn grid_split_destroyed_check() {
        let env = Env::default().with("grid", Value::Int(123456)).with("impact", Value::Int(125457));
        let by_text = "abs(int(substr(str(grid), 0, 3)) - int(substr(str(impact), 0, 3))) < 4 \
                       and abs(int(substr(str(grid), 3, 3)) - int(substr(str(impact), 3, 3))) < 4";
        let by_digits = "abs(grid div 1000 - impact div 1000) < 4 and abs(grid mod 1000 - impact mod 1000) < 4";
        assert_eq!(ev(by_text, &env), Ok(Value::Bool(true)));
        assert_eq!(ev(by_digits, &env), Ok(Value::Bool(true)));
        let far = env.with("impact", Value::Int(130457));
        assert_eq!(ev(by_digits, &far), Ok(Value::Bool(false)));
    }

    #[test]
    fn sequences() {
        let env = Env::default().with(
            "s",
            Value::Seq(vec![Value::Int(1), Value::Int(2), Value::Int(1)]),
        );
        assert_eq!(ev("remove(s, 1)", &env).unwrap().to_string(), "[2, 1]");
        assert_eq!(ev("nth(s, 3)", &env), Err(EvalError::IndexOutOfRange { index: 3, len: 3 }));
        assert_eq!(ev("len(append(s, 4) ++ [5])", &env), Ok(Value::Int(5)));
        assert_eq!(ev("exists x in s: x = 2", &env), Ok(Value::Bool(true)));
        assert_eq!(ev("forall x in s: x < 2", &env), Ok(Value::Bool(false)));
        assert_eq!(ev("undefined_name", &env), Err(EvalError::UnboundVariable("undefined_name".into())));
    }

    #[test]
    fn lazy_branches_avoid_errors() {
        let env = Env::default().with("s", Value::Seq(vec![]));
        assert_eq!(ev("if len(s) > 0 then choose(s) else 0", &env), Ok(Value::Int(0)));
        assert_eq!(ev("len(s) > 0 and nth(s, 0) = 1", &env), Ok(Value::Bool(false)));
    }

    #[test]
    fn enumeration_covers_all_choices() {
        let block = parse_block_str("let a = choose([1, 2]); let b = choose([10, 20, 30]); x := a + b;").unwrap();
        let outs: Vec<i64> = enumerate_block(&block, &Env::default().with("x", Value::Int(0)))
            .into_iter()
            .map(|r| r.unwrap().get("x").unwrap().as_int().unwrap())
            .collect();
        assert_eq!(outs, vec![11, 21, 31, 12, 22, 32]);
    }

    #[test]
    fn enumeration_without_choice_is_single() {
        let block = parse_block_str("x := x + 1;").unwrap();
        let outs = enumerate_block(&block, &Env::default().with("x", Value::Int(0)));
        assert_eq!(outs.len(), 1);
    }

    #[test]
    fn instance_accessor() {
        assert_eq!(ev("instance() + 1", &Env::new(2)), Ok(Value::Int(3)));
    }
}
