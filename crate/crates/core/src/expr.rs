//! Constant folding for the small expression subset used by guards and
//! preambles: literals, arithmetic, comparisons, boolean connectives,
//! indexing and a fixed set of pure library calls (`floor`, `sorted`, `abs`,
//! `min`, `max`, `len`, `isinstance`, ...).
//!
//! Anything outside the subset is an [`EvalError`], which callers treat as
//! "unprovable" rather than as a failure.

use std::collections::HashMap;

use thiserror::Error;

use crate::code_model::Language;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    List(Vec<Value>),
    Null,
    /// A module bound by `import math as m`.
    Module(String),
    /// A type name used by `isinstance` / `instanceof`.
    Type(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("arithmetic overflow or division by zero")]
    Arithmetic,
    #[error("index out of range")]
    Index,
    #[error("assertion would fail")]
    AssertionFails,
}

type EvalResult<T> = Result<T, EvalError>;

/// Whether names and calls may be resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Literals and operators only; mirrors tool-level constant checks.
    LiteralOnly,
    /// Names from the environment and the pure builtin library.
    Folding,
}

#[derive(Debug, Clone, Default)]
pub struct Env {
    vars: HashMap<String, Value>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }

    pub fn set(&mut self, name: impl Into<String>, value: Value) {
        self.vars.insert(name.into(), value);
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Float(f64),
    Str(String),
    Ident(String),
    Op(&'static str),
}

const OPS: [&str; 27] = [
    "**", "//", "==", "!=", "<=", ">=", "&&", "||", "->", "+", "-", "*", "/", "%", "<", ">", "!", "(", ")", "[", "]",
    "{", "}", ",", ".", ":", "=",
];

fn tokenize(src: &str) -> EvalResult<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut is_float = false;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '_') {
                if chars[i] == '.' {
                    is_float = true;
                }
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                is_float = true;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().filter(|c| **c != '_').collect();
            // java suffixes
            if i < chars.len() && matches!(chars[i], 'L' | 'l') {
                i += 1;
            } else if i < chars.len() && matches!(chars[i], 'f' | 'F' | 'd' | 'D') {
                is_float = true;
                i += 1;
            }
            if is_float {
                out.push(Tok::Float(text.parse().map_err(|_| EvalError::Syntax(text.clone()))?));
            } else {
                out.push(Tok::Int(text.parse().map_err(|_| EvalError::Syntax(text.clone()))?));
            }
            continue;
        }
        if c == '\'' || c == '"' {
            let quote = c;
            let mut s = String::new();
            i += 1;
            loop {
                let Some(&ch) = chars.get(i) else {
                    return Err(EvalError::Syntax("unterminated string".into()));
                };
                i += 1;
                if ch == quote {
                    break;
                }
                if ch == '\\' {
                    let esc = *chars.get(i).ok_or_else(|| EvalError::Syntax("bad escape".into()))?;
                    i += 1;
                    s.push(match esc {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                } else {
                    s.push(ch);
                }
            }
            out.push(Tok::Str(s));
            continue;
        }
        if c == '_' || c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i] == '_' || chars[i].is_ascii_alphanumeric()) {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let op = OPS
            .iter()
            .find(|op| rest.starts_with(**op))
            .ok_or_else(|| EvalError::Syntax(format!("unexpected `{c}`")))?;
        out.push(Tok::Op(op));
        i += op.chars().count();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Lit(Value),
    Name(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(&'static str, Box<Expr>, Box<Expr>),
    Compare(Box<Expr>, Vec<(&'static str, Expr)>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Call(Box<Expr>, Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Attr(Box<Expr>, String),
    List(Vec<Expr>),
    InstanceOf(Box<Expr>, String),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    lang: Language,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(Tok::Op(o)) if *o == op)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == w)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> EvalResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(EvalError::Syntax(format!("expected `{op}`")))
        }
    }

    fn or_expr(&mut self) -> EvalResult<Expr> {
        let mut lhs = self.and_expr()?;
        loop {
            let is_or = match self.lang {
                Language::Python => self.is_word("or"),
                Language::Java => self.is_op("||"),
            };
            if !is_or {
                return Ok(lhs);
            }
            self.pos += 1;
            let rhs = self.and_expr()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
    }

    fn and_expr(&mut self) -> EvalResult<Expr> {
        let mut lhs = self.not_expr()?;
        loop {
            let is_and = match self.lang {
                Language::Python => self.is_word("and"),
                Language::Java => self.is_op("&&"),
            };
            if !is_and {
                return Ok(lhs);
            }
            self.pos += 1;
            let rhs = self.not_expr()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
    }

    fn not_expr(&mut self) -> EvalResult<Expr> {
        if self.lang == Language::Python && self.is_word("not") {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> EvalResult<Expr> {
        let first = self.arith()?;
        let mut rest = Vec::new();
        loop {
            if self.lang == Language::Java && self.is_word("instanceof") {
                self.pos += 1;
                let ty = self.dotted_name()?;
                return Ok(Expr::InstanceOf(Box::new(first), ty));
            }
            let op = match self.peek() {
                Some(Tok::Op(o)) if matches!(*o, "<" | ">" | "<=" | ">=" | "==" | "!=") => *o,
                _ => break,
            };
            self.pos += 1;
            rest.push((op, self.arith()?));
            if self.lang == Language::Java {
                break;
            }
        }
        if rest.is_empty() {
            Ok(first)
        } else {
            Ok(Expr::Compare(Box::new(first), rest))
        }
    }

    fn dotted_name(&mut self) -> EvalResult<String> {
        let mut name = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(EvalError::Syntax("expected a type name".into())),
        };
        self.pos += 1;
        while self.is_op(".") {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Ident(s)) => {
                    name.push('.');
                    name.push_str(s);
                    self.pos += 1;
                }
                _ => return Err(EvalError::Syntax("bad dotted name".into())),
            }
        }
        Ok(name)
    }

    fn arith(&mut self) -> EvalResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_op("+") {
                "+"
            } else if self.is_op("-") {
                "-"
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> EvalResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(o)) if matches!(*o, "*" | "/" | "%") => *o,
                Some(Tok::Op("//")) if self.lang == Language::Python => "//",
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> EvalResult<Expr> {
        if self.eat_op("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op("+") {
            return self.unary();
        }
        if self.lang == Language::Java && self.eat_op("!") {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> EvalResult<Expr> {
        let base = self.postfix()?;
        if self.lang == Language::Python && self.eat_op("**") {
            let exp = self.unary()?;
            return Ok(Expr::Bin("**", Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> EvalResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.eat_op("(") {
                let args = self.list_until(")")?;
                e = Expr::Call(Box::new(e), args);
            } else if self.eat_op("[") {
                let idx = self.or_expr()?;
                self.expect_op("]")?;
                e = Expr::Index(Box::new(e), Box::new(idx));
            } else if self.eat_op(".") {
                match self.peek() {
                    Some(Tok::Ident(s)) => {
                        let s = s.clone();
                        self.pos += 1;
                        e = Expr::Attr(Box::new(e), s);
                    }
                    _ => return Err(EvalError::Syntax("expected attribute".into())),
                }
            } else {
                return Ok(e);
            }
        }
    }

    fn list_until(&mut self, close: &str) -> EvalResult<Vec<Expr>> {
        let mut items = Vec::new();
        if self.eat_op(close) {
            return Ok(items);
        }
        loop {
            items.push(self.or_expr()?);
            if self.eat_op(close) {
                return Ok(items);
            }
            self.expect_op(",")?;
            if self.eat_op(close) {
                return Ok(items);
            }
        }
    }

    fn atom(&mut self) -> EvalResult<Expr> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| EvalError::Syntax("unexpected end".into()))?;
        self.pos += 1;
        match tok {
            Tok::Int(v) => Ok(Expr::Lit(Value::Int(v))),
            Tok::Float(v) => Ok(Expr::Lit(Value::Float(v))),
            Tok::Str(s) => Ok(Expr::Lit(Value::Str(s))),
            Tok::Op("(") => {
                let e = self.or_expr()?;
                self.expect_op(")")?;
                Ok(e)
            }
            Tok::Op("[") if self.lang == Language::Python => Ok(Expr::List(self.list_until("]")?)),
            Tok::Op("{") if self.lang == Language::Java => Ok(Expr::List(self.list_until("}")?)),
            Tok::Ident(w) => match (self.lang, w.as_str()) {
                (Language::Python, "True") | (Language::Java, "true") => Ok(Expr::Lit(Value::Bool(true))),
                (Language::Python, "False") | (Language::Java, "false") => Ok(Expr::Lit(Value::Bool(false))),
                (Language::Python, "None") | (Language::Java, "null") => Ok(Expr::Lit(Value::Null)),
                (Language::Java, "new") => {
                    // new int[]{...}
                    self.dotted_name()?;
                    self.expect_op("[")?;
                    self.expect_op("]")?;
                    self.expect_op("{")?;
                    Ok(Expr::List(self.list_until("}")?))
                }
                _ => Ok(Expr::Name(w)),
            },
            Tok::Op(o) => Err(EvalError::Syntax(format!("unexpected `{o}`"))),
        }
    }
}

fn parse(src: &str, lang: Language) -> EvalResult<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, lang };
    let e = p.or_expr()?;
    if p.pos != p.toks.len() {
        return Err(EvalError::Syntax(format!("trailing input in `{src}`")));
    }
    Ok(e)
}

const PY_TYPES: [&str; 5] = ["int", "str", "float", "list", "bool"];

struct Eval<'a> {
    lang: Language,
    env: &'a Env,
    mode: Mode,
}

impl Eval<'_> {
    fn eval(&self, e: &Expr) -> EvalResult<Value> {
        match e {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Name(n) => {
                if self.mode == Mode::LiteralOnly {
                    return Err(EvalError::Unbound(n.clone()));
                }
                if let Some(v) = self.env.get(n) {
                    return Ok(v.clone());
                }
                if self.lang == Language::Python && PY_TYPES.contains(&n.as_str()) {
                    return Ok(Value::Type(n.clone()));
                }
                Err(EvalError::Unbound(n.clone()))
            }
            Expr::Neg(inner) => match self.eval(inner)? {
                Value::Int(v) => v.checked_neg().map(Value::Int).ok_or(EvalError::Arithmetic),
                Value::Float(v) => Ok(Value::Float(-v)),
                other => Err(EvalError::Type(format!("cannot negate {other:?}"))),
            },
            Expr::Not(inner) => Ok(Value::Bool(!truthy(&self.eval(inner)?, self.lang)?)),
            Expr::And(a, b) => {
                let av = self.eval(a)?;
                if !truthy(&av, self.lang)? {
                    return Ok(av);
                }
                self.eval(b)
            }
            Expr::Or(a, b) => {
                let av = self.eval(a)?;
                if truthy(&av, self.lang)? {
                    return Ok(av);
                }
                self.eval(b)
            }
            Expr::Bin(op, a, b) => binary(op, self.eval(a)?, self.eval(b)?, self.lang),
            Expr::Compare(first, rest) => {
                let mut lhs = self.eval(first)?;
                for (op, rhs_e) in rest {
                    let rhs = self.eval(rhs_e)?;
                    if !compare(op, &lhs, &rhs)? {
                        return Ok(Value::Bool(false));
                    }
                    lhs = rhs;
                }
                Ok(Value::Bool(true))
            }
            Expr::List(items) => Ok(Value::List(
                items.iter().map(|i| self.eval(i)).collect::<EvalResult<_>>()?,
            )),
            Expr::Index(base, idx) => {
                let b = self.eval(base)?;
                let Value::Int(i) = self.eval(idx)? else {
                    return Err(EvalError::Type("non-integer index".into()));
                };
                index(&b, i, self.lang)
            }
            Expr::Attr(base, name) => {
                if self.lang == Language::Java && name == "length" {
                    if let Value::List(items) = self.eval(base)? {
                        return Ok(Value::Int(items.len() as i64));
                    }
                }
                Err(EvalError::Unsupported(format!("attribute `{name}`")))
            }
            Expr::InstanceOf(inner, ty) => {
                let v = self.eval(inner)?;
                let short = ty.rsplit('.').next().unwrap_or(ty);
                Ok(Value::Bool(java_instance_of(&v, short)?))
            }
            Expr::Call(callee, args) => {
                if self.mode == Mode::LiteralOnly {
                    return Err(EvalError::Unsupported("call in literal-only mode".into()));
                }
                self.call(callee, args)
            }
        }
    }

    /// Resolves a dotted callee to a canonical builtin path.
    fn callee_path(&self, e: &Expr) -> Option<String> {
        match e {
            Expr::Name(n) => match self.env.get(n) {
                Some(Value::Module(m)) => Some(m.clone()),
                Some(_) => None,
                None => Some(n.clone()),
            },
            Expr::Attr(base, name) => self.callee_path(base).map(|b| format!("{b}.{name}")),
            _ => None,
        }
    }

    fn call(&self, callee: &Expr, args: &[Expr]) -> EvalResult<Value> {
        // method call on a value: `s.length()`
        if let Expr::Attr(base, name) = callee {
            if self.lang == Language::Java && name == "length" && args.is_empty() {
                if let Ok(Value::Str(s)) = self.eval(base) {
                    return Ok(Value::Int(s.chars().count() as i64));
                }
            }
        }
        let path = self
            .callee_path(callee)
            .ok_or_else(|| EvalError::Unsupported("indirect call".into()))?;
        let vals: Vec<Value> = args.iter().map(|a| self.eval(a)).collect::<EvalResult<_>>()?;
        let builtin = match (self.lang, path.as_str()) {
            (
                Language::Python,
                "len" | "abs" | "min" | "max" | "sorted" | "int" | "float" | "str" | "isinstance" | "floor" | "ceil",
            ) => path.clone(),
            (Language::Python, "math.floor") => "floor".into(),
            (Language::Python, "math.ceil") => "ceil".into(),
            (Language::Python, "math.fabs") => "abs".into(),
            (Language::Java, "Math.floor" | "java.lang.Math.floor") => "floor_f".into(),
            (Language::Java, "Math.ceil" | "java.lang.Math.ceil") => "ceil_f".into(),
            (Language::Java, "Math.abs" | "java.lang.Math.abs") => "abs".into(),
            (Language::Java, "Math.min" | "java.lang.Math.min") => "min".into(),
            (Language::Java, "Math.max" | "java.lang.Math.max") => "max".into(),
            _ => return Err(EvalError::Unsupported(format!("call `{path}`"))),
        };
        builtin_call(&builtin, vals)
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => Some(*i as f64),
        Value::Float(f) => Some(*f),
        Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
        _ => None,
    }
}

fn builtin_call(name: &str, args: Vec<Value>) -> EvalResult<Value> {
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(EvalError::Type(format!("{name} takes {n} argument(s)")))
        }
    };
    match name {
        "len" => {
            arity(1)?;
            match &args[0] {
                Value::Str(s) => Ok(Value::Int(s.chars().count() as i64)),
                Value::List(l) => Ok(Value::Int(l.len() as i64)),
                other => Err(EvalError::Type(format!("len of {other:?}"))),
            }
        }
        "abs" => {
            arity(1)?;
            match &args[0] {
                Value::Int(i) => i.checked_abs().map(Value::Int).ok_or(EvalError::Arithmetic),
                Value::Float(f) => Ok(Value::Float(f.abs())),
                other => Err(EvalError::Type(format!("abs of {other:?}"))),
            }
        }
        "min" | "max" => {
            let items = if args.len() == 1 {
                match &args[0] {
                    Value::List(l) => l.clone(),
                    other => return Err(EvalError::Type(format!("{name} of {other:?}"))),
                }
            } else {
                args
            };
            let mut best: Option<Value> = None;
            for v in items {
                best = Some(match best {
                    None => v,
                    Some(b) => {
                        let take = if name == "min" {
                            compare("<", &v, &b)?
                        } else {
                            compare(">", &v, &b)?
                        };
                        if take {
                            v
                        } else {
                            b
                        }
                    }
                });
            }
            best.ok_or_else(|| EvalError::Type("empty sequence".into()))
        }
        "sorted" => {
            arity(1)?;
            let Value::List(mut items) = args.into_iter().next().unwrap_or(Value::Null) else {
                return Err(EvalError::Type("sorted of non-list".into()));
            };
            sort_values(&mut items)?;
            Ok(Value::List(items))
        }
        "floor" | "ceil" => {
            arity(1)?;
            match &args[0] {
                Value::Int(i) => Ok(Value::Int(*i)),
                Value::Float(f) => {
                    let r = if name == "floor" { f.floor() } else { f.ceil() };
                    if r.abs() < 9.0e15 {
                        Ok(Value::Int(r as i64))
                    } else {
                        Err(EvalError::Arithmetic)
                    }
                }
                other => Err(EvalError::Type(format!("{name} of {other:?}"))),
            }
        }
        // java Math.floor/ceil return double
        "floor_f" | "ceil_f" => {
            arity(1)?;
            let f = as_f64(&args[0]).ok_or_else(|| EvalError::Type("non-numeric".into()))?;
            Ok(Value::Float(if name == "floor_f" { f.floor() } else { f.ceil() }))
        }
        "int" => {
            arity(1)?;
            match &args[0] {
                Value::Int(i) => Ok(Value::Int(*i)),
                Value::Float(f) if f.is_finite() && f.abs() < 9.0e15 => Ok(Value::Int(f.trunc() as i64)),
                Value::Bool(b) => Ok(Value::Int(*b as i64)),
                other => Err(EvalError::Type(format!("int of {other:?}"))),
            }
        }
        "float" => {
            arity(1)?;
            as_f64(&args[0])
                .map(Value::Float)
                .ok_or_else(|| EvalError::Type("float of non-numeric".into()))
        }
        "str" => {
            arity(1)?;
            match &args[0] {
                Value::Int(i) => Ok(Value::Str(i.to_string())),
                Value::Str(s) => Ok(Value::Str(s.clone())),
                other => Err(EvalError::Unsupported(format!("str of {other:?}"))),
            }
        }
        "isinstance" => {
            arity(2)?;
            let Value::Type(t) = &args[1] else {
                return Err(EvalError::Type("isinstance needs a type".into()));
            };
            let v = &args[0];
            Ok(Value::Bool(match t.as_str() {
                "int" => matches!(v, Value::Int(_) | Value::Bool(_)),
                "float" => matches!(v, Value::Float(_)),
                "str" => matches!(v, Value::Str(_)),
                "list" => matches!(v, Value::List(_)),
                "bool" => matches!(v, Value::Bool(_)),
                _ => return Err(EvalError::Unsupported(format!("type {t}"))),
            }))
        }
        _ => Err(EvalError::Unsupported(name.to_string())),
    }
}

fn java_instance_of(v: &Value, ty: &str) -> EvalResult<bool> {
    Ok(match ty {
        "Object" => !matches!(v, Value::Null),
        "Integer" | "Long" => matches!(v, Value::Int(_)),
        "Double" | "Float" => matches!(v, Value::Float(_)),
        "String" | "CharSequence" => matches!(v, Value::Str(_)),
        "Boolean" => matches!(v, Value::Bool(_)),
        _ => return Err(EvalError::Unsupported(format!("instanceof {ty}"))),
    })
}

fn sort_values(items: &mut [Value]) -> EvalResult<()> {
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && compare("<", &items[j], &items[j - 1])? {
            items.swap(j, j - 1);
            j -= 1;
        }
    }
    Ok(())
}

fn index(base: &Value, i: i64, lang: Language) -> EvalResult<Value> {
    let len = match base {
        Value::List(l) => l.len(),
        Value::Str(s) => s.chars().count(),
        other => return Err(EvalError::Type(format!("cannot index {other:?}"))),
    } as i64;
    let pos = if i < 0 && lang == Language::Python { len + i } else { i };
    if pos < 0 || pos >= len {
        return Err(EvalError::Index);
    }
    Ok(match base {
        Value::List(l) => l[pos as usize].clone(),
        Value::Str(s) => Value::Str(s.chars().nth(pos as usize).map(String::from).unwrap_or_default()),
        _ => unreachable!("checked above"),
    })
}

fn binary(op: &str, a: Value, b: Value, lang: Language) -> EvalResult<Value> {
    use Value::*;
    match (op, &a, &b) {
        ("+", Str(x), Str(y)) => return Ok(Str(format!("{x}{y}"))),
        ("+", List(x), List(y)) => return Ok(List(x.iter().chain(y).cloned().collect())),
        ("+", Str(x), Int(y)) if lang == Language::Java => return Ok(Str(format!("{x}{y}"))),
        _ => {}
    }
    match (&a, &b) {
        (Int(x), Int(y)) => {
            let (x, y) = (*x, *y);
            let r = match op {
                "+" => x.checked_add(y),
                "-" => x.checked_sub(y),
                "*" => x.checked_mul(y),
                "/" if lang == Language::Python => {
                    if y == 0 {
                        return Err(EvalError::Arithmetic);
                    }
                    return Ok(Float(x as f64 / y as f64));
                }
                "/" => x.checked_div(y),
                "//" => {
                    if y == 0 {
                        return Err(EvalError::Arithmetic);
                    }
                    x.checked_div_euclid(y).map(|_| {
                        let q = x / y;
                        if (x % y != 0) && ((x < 0) != (y < 0)) {
                            q - 1
                        } else {
                            q
                        }
                    })
                }
                "%" if lang == Language::Python => {
                    if y == 0 {
                        return Err(EvalError::Arithmetic);
                    }
                    x.checked_rem(y)
                        .map(|r| if r != 0 && ((r < 0) != (y < 0)) { r + y } else { r })
                }
                "%" => x.checked_rem(y),
                "**" => {
                    if y < 0 {
                        return Ok(Float((x as f64).powf(y as f64)));
                    }
                    u32::try_from(y).ok().and_then(|e| x.checked_pow(e))
                }
                _ => None,
            };
            r.map(Int).ok_or(EvalError::Arithmetic)
        }
        _ => {
            let (Some(x), Some(y)) = (as_f64(&a), as_f64(&b)) else {
                return Err(EvalError::Type(format!("{a:?} {op} {b:?}")));
            };
            let r = match op {
                "+" => x + y,
                "-" => x - y,
                "*" => x * y,
                "/" => {
                    if y == 0.0 {
                        return Err(EvalError::Arithmetic);
                    }
                    x / y
                }
                "//" => {
                    if y == 0.0 {
                        return Err(EvalError::Arithmetic);
                    }
                    (x / y).floor()
                }
                "%" => {
                    if y == 0.0 {
                        return Err(EvalError::Arithmetic);
                    }
                    if lang == Language::Python {
                        x - y * (x / y).floor()
                    } else {
                        x % y
                    }
                }
                "**" => x.powf(y),
                _ => return Err(EvalError::Unsupported(op.to_string())),
            };
            if r.is_finite() {
                Ok(Float(r))
            } else {
                Err(EvalError::Arithmetic)
            }
        }
    }
}

fn compare(op: &str, a: &Value, b: &Value) -> EvalResult<bool> {
    use std::cmp::Ordering;
    let ord: Option<Ordering> = match (a, b) {
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        (Value::List(x), Value::List(y)) => {
            if matches!(op, "==" | "!=") {
                let eq = x.len() == y.len()
                    && x.iter()
                        .zip(y)
                        .map(|(p, q)| compare("==", p, q))
                        .collect::<EvalResult<Vec<_>>>()?
                        .into_iter()
                        .all(|e| e);
                return Ok(if op == "==" { eq } else { !eq });
            }
            return Err(EvalError::Unsupported("list ordering".into()));
        }
        _ => match (as_f64(a), as_f64(b)) {
            (Some(x), Some(y)) => x.partial_cmp(&y),
            _ => None,
        },
    };
    match (op, ord) {
        ("==", Some(o)) => Ok(o == Ordering::Equal),
        ("!=", Some(o)) => Ok(o != Ordering::Equal),
        ("==", None) => Ok(false),
        ("!=", None) => Ok(true),
        ("<", Some(o)) => Ok(o == Ordering::Less),
        (">", Some(o)) => Ok(o == Ordering::Greater),
        ("<=", Some(o)) => Ok(o != Ordering::Greater),
        (">=", Some(o)) => Ok(o != Ordering::Less),
        _ => Err(EvalError::Type(format!("cannot compare {a:?} {op} {b:?}"))),
    }
}

/// Truth value of a guard result.
pub fn truthy(v: &Value, lang: Language) -> EvalResult<bool> {
    match (lang, v) {
        (_, Value::Bool(b)) => Ok(*b),
        (Language::Python, Value::Int(i)) => Ok(*i != 0),
        (Language::Python, Value::Float(f)) => Ok(*f != 0.0),
        (Language::Python, Value::Str(s)) => Ok(!s.is_empty()),
        (Language::Python, Value::List(l)) => Ok(!l.is_empty()),
        (Language::Python, Value::Null) => Ok(false),
        _ => Err(EvalError::Type(format!("{v:?} is not a boolean"))),
    }
}

/// Evaluates an expression in `env`.
pub fn eval_expr(src: &str, lang: Language, env: &Env, mode: Mode) -> EvalResult<Value> {
    let e = parse(src, lang)?;
    Eval { lang, env, mode }.eval(&e)
}

/// Evaluates a guard expression to a boolean.
pub fn eval_guard(src: &str, lang: Language, env: &Env, mode: Mode) -> EvalResult<bool> {
    truthy(&eval_expr(src, lang, env, mode)?, lang)
}

fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i64;
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    for c in s.chars() {
        if let Some(q) = quote {
            cur.push(c);
            if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '\'' | '"' => quote = Some(c),
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            parts.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    parts.push(cur);
    parts
}

/// Position of the first top-level `=` that is an assignment (not `==`,
/// `<=`, `>=`, `!=`).
fn assignment_eq(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut depth = 0i64;
    let mut quote: Option<u8> = None;
    for (i, &c) in bytes.iter().enumerate() {
        if let Some(q) = quote {
            if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            b'\'' | b'"' => quote = Some(c),
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            b'=' if depth == 0 => {
                let prev = if i > 0 { bytes[i - 1] } else { b' ' };
                let next = bytes.get(i + 1).copied().unwrap_or(b' ');
                if next != b'=' && !matches!(prev, b'=' | b'<' | b'>' | b'!' | b'+' | b'-' | b'*' | b'/' | b'%') {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_ascii_alphabetic())
        && chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

/// Executes one straight-line statement (assignment, declaration, import
/// alias, assert, in-place array sort), updating `env`.
pub fn exec_statement(line: &str, lang: Language, env: &mut Env) -> EvalResult<()> {
    let stmt = line.trim();
    let stmt = match lang {
        Language::Java => stmt.strip_suffix(';').unwrap_or(stmt).trim(),
        Language::Python => stmt,
    };
    if stmt.is_empty() || (lang == Language::Python && stmt == "pass") {
        return Ok(());
    }
    if lang == Language::Python {
        if let Some(rest) = stmt.strip_prefix("import ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            return match parts.as_slice() {
                [module] => {
                    env.set(
                        module.split('.').next().unwrap_or(module),
                        Value::Module((*module).into()),
                    );
                    Ok(())
                }
                [module, "as", alias] if is_identifier(alias) => {
                    env.set(*alias, Value::Module((*module).into()));
                    Ok(())
                }
                _ => Err(EvalError::Unsupported(format!("import `{rest}`"))),
            };
        }
    }
    if let Some(rest) = stmt.strip_prefix("assert ") {
        let cond = split_top_level(
            rest,
            match lang {
                Language::Python => ',',
                Language::Java => ':',
            },
        );
        return if eval_guard(&cond[0], lang, env, Mode::Folding)? {
            Ok(())
        } else {
            Err(EvalError::AssertionFails)
        };
    }
    if lang == Language::Java {
        for prefix in ["java.util.Arrays.sort(", "Arrays.sort("] {
            if let Some(rest) = stmt.strip_prefix(prefix) {
                let name = rest.strip_suffix(')').unwrap_or(rest).trim();
                let Some(Value::List(items)) = env.get(name).cloned() else {
                    return Err(EvalError::Unbound(name.into()));
                };
                let mut items = items;
                sort_values(&mut items)?;
                env.set(name, Value::List(items));
                return Ok(());
            }
        }
    }
    let eq = assignment_eq(stmt).ok_or_else(|| EvalError::Unsupported(format!("statement `{stmt}`")))?;
    let (lhs, rhs) = (stmt[..eq].trim(), stmt[eq + 1..].trim());
    let lhs_parts: Vec<&str> = lhs.split_whitespace().collect();
    let (ty, name) = match (lang, lhs_parts.as_slice()) {
        (_, [name]) => (None, *name),
        (Language::Java, [.., ty, name]) => (Some(*ty), *name),
        _ => return Err(EvalError::Unsupported(format!("target `{lhs}`"))),
    };
    if !is_identifier(name) {
        return Err(EvalError::Unsupported(format!("target `{name}`")));
    }
    let mut value = eval_expr(rhs, lang, env, Mode::Folding)?;
    if let Some(ty) = ty {
        value = match (ty, value) {
            ("double" | "float" | "Double", Value::Int(i)) => Value::Float(i as f64),
            ("int" | "long" | "short" | "byte", Value::Float(_)) => {
                return Err(EvalError::Type("lossy declaration".into()))
            }
            (_, v) => v,
        };
    }
    env.set(name, value);
    Ok(())
}
