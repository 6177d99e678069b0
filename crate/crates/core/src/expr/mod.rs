//! A small, pure, statically typed expression language for guards and
//! actions of extended components.
//!
//! Values are INT, BOOL, TEXT, UNIT, tuples and sequences. `choose(s)` is the
//! only source of nondeterminism; evaluation defers each pick to a
//! [`Chooser`], which lets the same action run as a seeded simulation step or
//! be enumerated branch by branch during state-space exploration.

mod ast;
mod check;
mod eval;
mod parse;
mod value;

pub use ast::{BinOp, Binder, Block, Expr, Func, Stmt, UnOp};
pub use check::{check_block, check_guard, type_of, TypeEnv, TypeError};
pub use eval::{enumerate_block, eval, exec_block, Chooser, Env, EvalError, FirstChoice, ScriptedChoices};
pub use parse::{
    is_reserved, parse_block_str, parse_expr, parse_expr_str, parse_stmt, parse_type, parse_type_str,
};
pub use value::{Type, Value};

/// Parses and evaluates a closed expression, e.g. a literal in a predicate.
pub fn eval_closed(src: &str) -> Result<Value, String> {
    let e = parse_expr_str(src).map_err(|e| e.to_string())?;
    eval(&e, &Env::default(), &mut FirstChoice).map_err(|e| e.to_string())
}
