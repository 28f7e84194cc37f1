//! Query expressions over the step functions of an instance.
//!
//! ```text
//! measure(f, a, b, {v, ...})                 measure of {t in [a,b) : f(t) not in V}
//! neighborhood(g, a, b, {v, ...}, eps, base) g in N(a, b, V, eps) around base
//! lift(A, op, f1, ..., fn)                   op of algebra A applied pointwise
//! map(p, f)                                  named map p applied pointwise
//! value(f, t)                                f(t)
//! const(x)                                   the constant function x
//! ```
//!
//! Bare names resolve to step functions of the instance first, then to
//! rationals, then stay as plain names.

use std::collections::BTreeSet;
use std::fmt;

use anyhow::{anyhow, bail, Result};

use hmfree::hm::{hm_embed, lift_op};
use hmfree::step::{in_neighborhood, parse_rational, Rational, StepFn};

use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Fn(StepFn<String>),
    Rat(Rational),
    Bool(bool),
    Name(String),
    Set(BTreeSet<String>),
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Fn(g) => write!(f, "{g}"),
            Val::Rat(r) => write!(f, "{r}"),
            Val::Bool(b) => write!(f, "{b}"),
            Val::Name(s) => f.write_str(s),
            Val::Set(s) => write!(f, "{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", ")),
        }
    }
}

/// The value of an expression plus, for neighbourhood tests, the measure
/// that decided it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Val,
    pub measure: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
enum Ast {
    Atom(String),
    Set(Vec<String>),
    Call(String, Vec<Ast>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_whitespace() || "(){},".contains(c) {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            word.push(c);
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

struct Parser {
    tokens: Vec<String>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(String::as_str)
    }

    fn next(&mut self) -> Result<String> {
        let t = self.tokens.get(self.pos).cloned().ok_or_else(|| anyhow!("unexpected end of expression"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        let t = self.next()?;
        if t != tok {
            bail!("expected `{tok}`, found `{t}`");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Ast> {
        let head = self.next()?;
        match head.as_str() {
            "{" => {
                let mut names = Vec::new();
                while self.peek() != Some("}") {
                    let n = self.next()?;
                    if "(){},".contains(n.as_str()) {
                        bail!("unexpected `{n}` in set");
                    }
                    names.push(n);
                    if self.peek() == Some(",") {
                        self.pos += 1;
                    }
                }
                self.pos += 1;
                Ok(Ast::Set(names))
            }
            "(" | ")" | "}" | "," => bail!("unexpected `{head}`"),
            _ if self.peek() == Some("(") => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek() != Some(")") {
                    loop {
                        args.push(self.expr()?);
                        if self.peek() == Some(",") {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(")")?;
                Ok(Ast::Call(head, args))
            }
            _ => Ok(Ast::Atom(head)),
        }
    }
}

fn parse(text: &str) -> Result<Ast> {
    let mut p = Parser {
        tokens: tokenize(text),
        pos: 0,
    };
    let ast = p.expr()?;
    if let Some(t) = p.peek() {
        bail!("trailing `{t}`");
    }
    Ok(ast)
}

pub fn evaluate(inst: &Instance, text: &str) -> Result<Evaluation> {
    let mut measure = None;
    let value = eval(inst, &parse(text)?, &mut measure)?;
    Ok(Evaluation { value, measure })
}

fn eval(inst: &Instance, ast: &Ast, measure: &mut Option<Rational>) -> Result<Val> {
    let (name, args) = match ast {
        Ast::Atom(a) => {
            if let Some(f) = inst.step_functions.get(a) {
                return Ok(Val::Fn(f.clone()));
            }
            return Ok(parse_rational(a).map_or_else(|_| Val::Name(a.clone()), Val::Rat));
        }
        Ast::Set(names) => return Ok(Val::Set(names.iter().cloned().collect())),
        Ast::Call(name, args) => (name.as_str(), args),
    };
    let vals = args
        .iter()
        .map(|a| eval(inst, a, measure))
        .collect::<Result<Vec<_>>>()?;
    let arity = |n: usize| -> Result<()> {
        if vals.len() != n {
            bail!("`{name}` takes {n} arguments, got {}", vals.len());
        }
        Ok(())
    };
    Ok(match name {
        "const" => {
            arity(1)?;
            Val::Fn(hm_embed(plain(&vals[0])?))
        }
        "measure" => {
            arity(4)?;
            let set = set(&vals[3])?;
            Val::Rat(func(&vals[0])?.measure_outside(rational(&vals[1])?, rational(&vals[2])?, |v| set.contains(v))?)
        }
        "neighborhood" => {
            arity(6)?;
            let (g, a, b, set) = (func(&vals[0])?, rational(&vals[1])?, rational(&vals[2])?, set(&vals[3])?);
            let inside = in_neighborhood(g, a, b, |v| set.contains(v), rational(&vals[4])?, func(&vals[5])?)?;
            *measure = Some(g.measure_outside(a, b, |v| set.contains(v))?);
            Val::Bool(inside)
        }
        "lift" => {
            if vals.len() < 2 {
                bail!("`lift` needs an algebra and an operation");
            }
            let a = inst.algebra(&plain(&vals[0])?)?;
            let fs = vals[2..].iter().map(func).collect::<Result<Vec<_>>>()?;
            Val::Fn(lift_op(a, &plain(&vals[1])?, &fs)?)
        }
        "map" => {
            arity(2)?;
            let p = &inst.map(&plain(&vals[0])?)?.map;
            let f = func(&vals[1])?;
            Val::Fn(f.try_map(|v| p.get(v).map(str::to_string).ok_or_else(|| anyhow!("map undefined on `{v}`")))?)
        }
        "value" => {
            arity(2)?;
            Val::Name(func(&vals[0])?.value_at(rational(&vals[1])?)?.clone())
        }
        _ => bail!("unknown function `{name}`"),
    })
}

fn func(v: &Val) -> Result<&StepFn<String>> {
    match v {
        Val::Fn(f) => Ok(f),
        other => bail!("expected a step function, found `{other}`"),
    }
}

fn rational(v: &Val) -> Result<&Rational> {
    match v {
        Val::Rat(r) => Ok(r),
        other => bail!("expected a rational, found `{other}`"),
    }
}

fn set(v: &Val) -> Result<&BTreeSet<String>> {
    match v {
        Val::Set(s) => Ok(s),
        other => bail!("expected a set, found `{other}`"),
    }
}

/// Names and numbers used as plain labels, e.g. carrier elements `0` and `1`.
fn plain(v: &Val) -> Result<String> {
    match v {
        Val::Name(s) => Ok(s.clone()),
        Val::Rat(r) => Ok(r.to_string()),
        other => bail!("expected a name, found `{other}`"),
    }
}
