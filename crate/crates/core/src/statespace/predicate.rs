//! Marking predicates for state-space queries.
//!
//! ```text
//! pred   := conj ("or" conj)*
//! conj   := unary ("and" unary)*
//! unary  := "not" unary | "(" pred ")" | "true" | "false" | atom
//! atom   := "empty" "(" place ")" | "nonempty" "(" place ")"
//!         | "has" "(" place "," literal ")"
//!         | "count" "(" place ")" cmp INT
//!         | "any" "(" place "," field ")" | "all" "(" place "," field ")"
//! place  := IDENT ("." IDENT)*
//! field  := fconj ("or" fconj)*
//! fconj  := funary ("and" funary)*
//! funary := "not" funary | "(" field ")" | "_" ("." INT)* test
//! test   := "IsEqual" literal | "IsNotEqual" literal
//!         | "IsBetween" literal "," literal
//!         | "IsUpperBound" literal | "IsLowerBound" literal
//! ```
//!
//! `any`/`all` quantify over the distinct token values of a place; `_`
//! is the token and `_.i` projects tuple field `i`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::colored::SystemMarking;
use crate::expr::Value;
use crate::lexer::{Cursor, LexError, Tok};
use crate::petri::{Marking, Tokens};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("predicate syntax: {0}")]
    Syntax(#[from] LexError),
    #[error("predicate names unknown place `{0}`")]
    UnknownPlace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    fn holds(self, a: u64, b: u64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FieldTest {
    IsEqual(Value),
    IsNotEqual(Value),
    IsBetween(Value, Value),
    /// The field is at most the bound.
    IsUpperBound(Value),
    /// The field is at least the bound.
    IsLowerBound(Value),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FieldPred {
    Test(Vec<usize>, FieldTest),
    Not(Box<FieldPred>),
    And(Box<FieldPred>, Box<FieldPred>),
    Or(Box<FieldPred>, Box<FieldPred>),
}

impl FieldPred {
    /// False when the path does not exist in `v`.
    pub fn holds(&self, v: &Value) -> bool {
        match self {
            FieldPred::Test(path, t) => match v.project(path) {
                None => false,
                Some(x) => match t {
                    FieldTest::IsEqual(a) => x == a,
                    FieldTest::IsNotEqual(a) => x != a,
                    FieldTest::IsBetween(lo, hi) => lo <= x && x <= hi,
                    FieldTest::IsUpperBound(b) => x <= b,
                    FieldTest::IsLowerBound(b) => x >= b,
                },
            },
            FieldPred::Not(p) => !p.holds(v),
            FieldPred::And(a, b) => a.holds(v) && b.holds(v),
            FieldPred::Or(a, b) => a.holds(v) || b.holds(v),
        }
    }
}

/// A predicate over a marking, with places named (`P`) or resolved to
/// indices (`usize`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Predicate<P = String> {
    True,
    False,
    Empty(P),
    NonEmpty(P),
    Has(P, Value),
    Count(P, Cmp, u64),
    Any(P, FieldPred),
    All(P, FieldPred),
    Not(Box<Predicate<P>>),
    And(Box<Predicate<P>>, Box<Predicate<P>>),
    Or(Box<Predicate<P>>, Box<Predicate<P>>),
}

/// Read access to the tokens of a marking.
pub trait MarkingView {
    fn count(&self, place: usize) -> u64;
    /// Calls `f` on each distinct token value with its multiplicity until
    /// `f` returns true; reports whether it did.
    fn any_token(&self, place: usize, f: &mut dyn FnMut(&Value, u64) -> bool) -> bool;
}

impl MarkingView for SystemMarking {
    fn count(&self, place: usize) -> u64 {
        SystemMarking::count(self, place)
    }

    fn any_token(&self, place: usize, f: &mut dyn FnMut(&Value, u64) -> bool) -> bool {
        self.tokens(place).iter().any(|(v, &k)| f(v, u64::from(k)))
    }
}

/// Black tokens read as UNIT values; ω counts as `u64::MAX`.
impl MarkingView for Marking {
    fn count(&self, place: usize) -> u64 {
        match self.0.get(place) {
            Some(Tokens::Finite(n)) => *n,
            Some(Tokens::Omega) => u64::MAX,
            None => 0,
        }
    }

    fn any_token(&self, place: usize, f: &mut dyn FnMut(&Value, u64) -> bool) -> bool {
        let n = MarkingView::count(self, place);
        n > 0 && f(&Value::Unit, n)
    }
}

impl Predicate<String> {
    pub fn parse(src: &str) -> Result<Self, PredicateError> {
        let mut c = Cursor::new(src)?;
        let p = parse_or(&mut c)?;
        if !c.at_eof() {
            return Err(c.error(format!("unexpected {} after predicate", c.peek())).into());
        }
        Ok(p)
    }

    /// Resolves place names to indices.
    pub fn bind(&self, resolve: &impl Fn(&str) -> Option<usize>) -> Result<Predicate<usize>, PredicateError> {
        let place = |n: &String| resolve(n).ok_or_else(|| PredicateError::UnknownPlace(n.clone()));
        let rec = |p: &Predicate<String>| p.bind(resolve).map(Box::new);
        Ok(match self {
            Predicate::True => Predicate::True,
            Predicate::False => Predicate::False,
            Predicate::Empty(p) => Predicate::Empty(place(p)?),
            Predicate::NonEmpty(p) => Predicate::NonEmpty(place(p)?),
            Predicate::Has(p, v) => Predicate::Has(place(p)?, v.clone()),
            Predicate::Count(p, c, n) => Predicate::Count(place(p)?, *c, *n),
            Predicate::Any(p, f) => Predicate::Any(place(p)?, f.clone()),
            Predicate::All(p, f) => Predicate::All(place(p)?, f.clone()),
            Predicate::Not(a) => Predicate::Not(rec(a)?),
            Predicate::And(a, b) => Predicate::And(rec(a)?, rec(b)?),
            Predicate::Or(a, b) => Predicate::Or(rec(a)?, rec(b)?),
        })
    }

    /// Place names the predicate mentions.
    pub fn places(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_places(&mut out);
        out
    }

    fn collect_places<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Predicate::True | Predicate::False => {}
            Predicate::Empty(p)
            | Predicate::NonEmpty(p)
            | Predicate::Has(p, _)
            | Predicate::Count(p, _, _)
            | Predicate::Any(p, _)
            | Predicate::All(p, _) => out.push(p),
            Predicate::Not(a) => a.collect_places(out),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.collect_places(out);
                b.collect_places(out);
            }
        }
    }
}

impl Predicate<usize> {
    pub fn eval(&self, m: &impl MarkingView) -> bool {
        match self {
            Predicate::True => true,
            Predicate::False => false,
            Predicate::Empty(p) => m.count(*p) == 0,
            Predicate::NonEmpty(p) => m.count(*p) > 0,
            Predicate::Has(p, v) => m.any_token(*p, &mut |t, _| t == v),
            Predicate::Count(p, c, n) => c.holds(m.count(*p), *n),
            Predicate::Any(p, f) => m.any_token(*p, &mut |t, _| f.holds(t)),
            Predicate::All(p, f) => !m.any_token(*p, &mut |t, _| !f.holds(t)),
            Predicate::Not(a) => !a.eval(m),
            Predicate::And(a, b) => a.eval(m) && b.eval(m),
            Predicate::Or(a, b) => a.eval(m) || b.eval(m),
        }
    }
}

fn parse_or(c: &mut Cursor) -> Result<Predicate, LexError> {
    let mut l = parse_and(c)?;
    while c.accept_kw("or") {
        l = Predicate::Or(Box::new(l), Box::new(parse_and(c)?));
    }
    Ok(l)
}

fn parse_and(c: &mut Cursor) -> Result<Predicate, LexError> {
    let mut l = parse_unary(c)?;
    while c.accept_kw("and") {
        l = Predicate::And(Box::new(l), Box::new(parse_unary(c)?));
    }
    Ok(l)
}

fn parse_place(c: &mut Cursor) -> Result<String, LexError> {
    let mut name = c.expect_ident()?;
    while c.accept_sym(".") {
        name.push('.');
        name.push_str(&c.expect_ident()?);
    }
    Ok(name)
}

fn parse_unary(c: &mut Cursor) -> Result<Predicate, LexError> {
    if c.accept_kw("not") {
        return Ok(Predicate::Not(Box::new(parse_unary(c)?)));
    }
    if c.accept_sym("(") {
        let p = parse_or(c)?;
        c.expect_sym(")")?;
        return Ok(p);
    }
    let kw = c.expect_ident()?;
    let p = match kw.as_str() {
        "true" => return Ok(Predicate::True),
        "false" => return Ok(Predicate::False),
        "empty" | "nonempty" | "count" => {
            c.expect_sym("(")?;
            let place = parse_place(c)?;
            c.expect_sym(")")?;
            match kw.as_str() {
                "empty" => Predicate::Empty(place),
                "nonempty" => Predicate::NonEmpty(place),
                _ => {
                    let cmp = parse_cmp(c)?;
                    match c.next() {
                        Tok::Int(n) if n >= 0 => Predicate::Count(place, cmp, n as u64),
                        other => return Err(c.error(format!("expected a token count, found {other}"))),
                    }
                }
            }
        }
        "has" | "any" | "all" => {
            c.expect_sym("(")?;
            let place = parse_place(c)?;
            c.expect_sym(",")?;
            let p = match kw.as_str() {
                "has" => Predicate::Has(place, parse_literal(c)?),
                "any" => Predicate::Any(place, parse_field_or(c)?),
                _ => Predicate::All(place, parse_field_or(c)?),
            };
            c.expect_sym(")")?;
            p
        }
        other => return Err(c.error(format!("unknown predicate `{other}`"))),
    };
    Ok(p)
}

fn parse_cmp(c: &mut Cursor) -> Result<Cmp, LexError> {
    let cmp = match c.peek() {
        Tok::Sym("=") | Tok::Sym("==") => Cmp::Eq,
        Tok::Sym("!=") | Tok::Sym("<>") => Cmp::Ne,
        Tok::Sym("<") => Cmp::Lt,
        Tok::Sym("<=") => Cmp::Le,
        Tok::Sym(">") => Cmp::Gt,
        Tok::Sym(">=") => Cmp::Ge,
        other => return Err(c.error(format!("expected a comparison, found {other}"))),
    };
    c.next();
    Ok(cmp)
}

fn parse_field_or(c: &mut Cursor) -> Result<FieldPred, LexError> {
    let mut l = parse_field_and(c)?;
    while c.accept_kw("or") {
        l = FieldPred::Or(Box::new(l), Box::new(parse_field_and(c)?));
    }
    Ok(l)
}

fn parse_field_and(c: &mut Cursor) -> Result<FieldPred, LexError> {
    let mut l = parse_field_unary(c)?;
    while c.accept_kw("and") {
        l = FieldPred::And(Box::new(l), Box::new(parse_field_unary(c)?));
    }
    Ok(l)
}

fn parse_field_unary(c: &mut Cursor) -> Result<FieldPred, LexError> {
    if c.accept_kw("not") {
        return Ok(FieldPred::Not(Box::new(parse_field_unary(c)?)));
    }
    if c.accept_sym("(") {
        let p = parse_field_or(c)?;
        c.expect_sym(")")?;
        return Ok(p);
    }
    c.expect_kw("_")?;
    let mut path = Vec::new();
    while c.accept_sym(".") {
        match c.next() {
            Tok::Int(i) if i >= 0 => path.push(i as usize),
            other => return Err(c.error(format!("expected a field index, found {other}"))),
        }
    }
    let test = match c.expect_ident()?.as_str() {
        "IsEqual" => FieldTest::IsEqual(parse_literal(c)?),
        "IsNotEqual" => FieldTest::IsNotEqual(parse_literal(c)?),
        "IsBetween" => {
            let lo = parse_literal(c)?;
            c.expect_sym(",")?;
            FieldTest::IsBetween(lo, parse_literal(c)?)
        }
        "IsUpperBound" => FieldTest::IsUpperBound(parse_literal(c)?),
        "IsLowerBound" => FieldTest::IsLowerBound(parse_literal(c)?),
        other => return Err(c.error(format!("unknown field test `{other}`"))),
    };
    Ok(FieldPred::Test(path, test))
}

/// Closed values: integers, booleans, strings, `()`, tuples and sequences.
pub fn parse_literal(c: &mut Cursor) -> Result<Value, LexError> {
    match c.next() {
        Tok::Int(i) => Ok(Value::Int(i)),
        Tok::Sym("-") => match c.next() {
            Tok::Int(i) => Ok(Value::Int(-i)),
            other => Err(c.error(format!("expected an integer after `-`, found {other}"))),
        },
        Tok::Str(s) => Ok(Value::Text(s)),
        Tok::Ident(w) if w == "true" => Ok(Value::Bool(true)),
        Tok::Ident(w) if w == "false" => Ok(Value::Bool(false)),
        Tok::Sym("(") => {
            if c.accept_sym(")") {
                return Ok(Value::Unit);
            }
            let mut items = vec![parse_literal(c)?];
            while c.accept_sym(",") {
                items.push(parse_literal(c)?);
            }
            c.expect_sym(")")?;
            Ok(if items.len() == 1 { items.pop().expect("one") } else { Value::Tuple(items) })
        }
        Tok::Sym("[") => {
            let mut items = Vec::new();
            if !c.accept_sym("]") {
                items.push(parse_literal(c)?);
                while c.accept_sym(",") {
                    items.push(parse_literal(c)?);
                }
                c.expect_sym("]")?;
            }
            Ok(Value::Seq(items))
        }
        other => Err(c.error(format!("expected a literal, found {other}"))),
    }
}

impl fmt::Display for FieldPred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldPred::Test(path, t) => {
                write!(f, "_")?;
                for i in path {
                    write!(f, ".{i}")?;
                }
                match t {
                    FieldTest::IsEqual(v) => write!(f, " IsEqual {v}"),
                    FieldTest::IsNotEqual(v) => write!(f, " IsNotEqual {v}"),
                    FieldTest::IsBetween(a, b) => write!(f, " IsBetween {a}, {b}"),
                    FieldTest::IsUpperBound(v) => write!(f, " IsUpperBound {v}"),
                    FieldTest::IsLowerBound(v) => write!(f, " IsLowerBound {v}"),
                }
            }
            FieldPred::Not(a) => write!(f, "not ({a})"),
            FieldPred::And(a, b) => write!(f, "({a}) and ({b})"),
            FieldPred::Or(a, b) => write!(f, "({a}) or ({b})"),
        }
    }
}

impl<P: fmt::Display> fmt::Display for Predicate<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::True => write!(f, "true"),
            Predicate::False => write!(f, "false"),
            Predicate::Empty(p) => write!(f, "empty({p})"),
            Predicate::NonEmpty(p) => write!(f, "nonempty({p})"),
            Predicate::Has(p, v) => write!(f, "has({p}, {v})"),
            Predicate::Count(p, c, n) => write!(f, "count({p}) {} {n}", c.symbol()),
            Predicate::Any(p, x) => write!(f, "any({p}, {x})"),
            Predicate::All(p, x) => write!(f, "all({p}, {x})"),
            Predicate::Not(a) => write!(f, "not ({a})"),
            Predicate::And(a, b) => write!(f, "({a}) and ({b})"),
            Predicate::Or(a, b) => write!(f, "({a}) or ({b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Predicate {
        Predicate::parse(s).unwrap()
    }

    #[test]
    fn parses_queries() {
        assert_eq!(
            p(r#"has(TS, (0, 0, ""))"#),
            Predicate::Has("TS".into(), Value::Tuple(vec![Value::Int(0), Value::Int(0), Value::Text(String::new())]))
        );
        assert_eq!(
            p("any(UF, _.0.0 IsEqual 3)"),
            Predicate::Any("UF".into(), FieldPred::Test(vec![0, 0], FieldTest::IsEqual(Value::Int(3))))
        );
        assert_eq!(p("count(Field.FD) >= 2"), Predicate::Count("Field.FD".into(), Cmp::Ge, 2));
        assert!(matches!(p("empty(A) or nonempty(B) and not empty(C)"), Predicate::Or(_, _)));
        assert_eq!(p("has(X, -3)"), Predicate::Has("X".into(), Value::Int(-3)));
        assert_eq!(p("has(X, [1, 2])"), Predicate::Has("X".into(), Value::Seq(vec![Value::Int(1), Value::Int(2)])));
    }

    #[test]
    fn display_round_trips() {
        for src in [
            r#"(has(TS, (0, 0, ""))) and (not (empty(UF)))"#,
            "any(UF, (_.1 IsBetween 1, 5) or (not (_.0 IsUpperBound -2)))",
            "count(P1) != 0",
        ] {
            let a = p(src);
            assert_eq!(p(&a.to_string()), a, "{src}");
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(Predicate::parse("has(TS)").is_err());
        assert!(Predicate::parse("any(UF, _.x IsEqual 1)").is_err());
        assert!(Predicate::parse("count(P) 3").is_err());
        assert!(Predicate::parse("empty(P) trailing").is_err());
    }

    #[test]
    fn evaluates_on_black_tokens() {
        let m = Marking::from_counts(&[0, 2]);
        let bound = p("empty(A) and count(B) = 2 and has(B, ())").bind(&|n| ["A", "B"].iter().position(|x| *x == n)).unwrap();
        assert!(bound.eval(&m));
        assert!(matches!(p("empty(Z)").bind(&|_| None), Err(PredicateError::UnknownPlace(_))));
    }

    #[test]
    fn field_tests() {
        let v = Value::Tuple(vec![Value::Tuple(vec![Value::Int(3), Value::Int(9)]), Value::Bool(true)]);
        let f = |s: &str| match p(&format!("any(X, {s})")) {
            Predicate::Any(_, f) => f.holds(&v),
            _ => unreachable!(),
        };
        assert!(f("_.0.0 IsEqual 3"));
        assert!(f("_.0.1 IsBetween 9, 10"));
        assert!(f("_.0.1 IsUpperBound 9 and _.0.1 IsLowerBound 9"));
        assert!(!f("_.0.1 IsLowerBound 10"));
        assert!(f("_.1 IsNotEqual false"));
        assert!(!f("_.2 IsEqual 1"));
    }
}
