//! The absolutely free algebra over a generator set.
//!
//! `Term<G>` is generic in its leaves so the same type carries terms over
//! named generators, rule patterns, and terms whose generators are step
//! functions.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signature::{Algebra, CarrierMap, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(
    from = "TermJson<G>",
    into = "TermJson<G>",
    bound(serialize = "G: Clone + Serialize", deserialize = "G: Deserialize<'de>")
)]
pub enum Term<G> {
    Gen(G),
    Op { label: String, args: Vec<Term<G>> },
}

#[derive(Serialize, Deserialize)]
#[serde(
    untagged,
    bound(serialize = "G: Clone + Serialize", deserialize = "G: Deserialize<'de>")
)]
enum TermJson<G> {
    Gen { gen: G },
    Op { op: String, args: Vec<Term<G>> },
}

impl<G> From<TermJson<G>> for Term<G> {
    fn from(j: TermJson<G>) -> Self {
        match j {
            TermJson::Gen { gen } => Term::Gen(gen),
            TermJson::Op { op, args } => Term::Op { label: op, args },
        }
    }
}

impl<G> From<Term<G>> for TermJson<G> {
    fn from(t: Term<G>) -> Self {
        match t {
            Term::Gen(gen) => TermJson::Gen { gen },
            Term::Op { label, args } => TermJson::Op { op: label, args },
        }
    }
}

impl<G> Term<G> {
    pub fn op(label: impl Into<String>, args: Vec<Term<G>>) -> Self {
        Term::Op {
            label: label.into(),
            args,
        }
    }

    /// Node depth: leaves and nullary nodes have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Gen(_) => 0,
            Term::Op { args, .. } => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Gen(_) => 1,
            Term::Op { args, .. } => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Structural recursion: the unique map that sends leaves through `leaf`
    /// and nodes through `node` applied to the already-folded children.
    pub fn fold<R, E>(
        &self,
        leaf: &mut impl FnMut(&G) -> std::result::Result<R, E>,
        node: &mut impl FnMut(&str, Vec<R>) -> std::result::Result<R, E>,
    ) -> std::result::Result<R, E> {
        match self {
            Term::Gen(g) => leaf(g),
            Term::Op { label, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(a.fold(leaf, node)?);
                }
                node(label, vals)
            }
        }
    }

    pub fn map_leaves<H>(&self, f: &mut impl FnMut(&G) -> H) -> Term<H> {
        match self {
            Term::Gen(g) => Term::Gen(f(g)),
            Term::Op { label, args } => Term::Op {
                label: label.clone(),
                args: args.iter().map(|a| a.map_leaves(f)).collect(),
            },
        }
    }

    pub fn try_map_leaves<H, E>(
        &self,
        f: &mut impl FnMut(&G) -> std::result::Result<H, E>,
    ) -> std::result::Result<Term<H>, E> {
        Ok(match self {
            Term::Gen(g) => Term::Gen(f(g)?),
            Term::Op { label, args } => Term::Op {
                label: label.clone(),
                args: args
                    .iter()
                    .map(|a| a.try_map_leaves(f))
                    .collect::<std::result::Result<_, _>>()?,
            },
        })
    }

    pub fn leaves(&self) -> Vec<&G> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a G>) {
        match self {
            Term::Gen(g) => out.push(g),
            Term::Op { args, .. } => args.iter().for_each(|a| a.collect_leaves(out)),
        }
    }

    /// Checks labels and arities against `sig`.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        if let Term::Op { label, args } = self {
            let n = sig
                .arity_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            if n != args.len() {
                return Err(Error::ArityMismatch {
                    label: label.clone(),
                    expected: n,
                    got: args.len(),
                });
            }
            args.iter().try_for_each(|a| a.check(sig))?;
        }
        Ok(())
    }
}

impl<G: fmt::Display> fmt::Display for Term<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Gen(g) => write!(f, "{g}"),
            Term::Op { label, args } => {
                write!(f, "{label}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A node, validated against the signature.
pub fn term_build<G>(sig: &Signature, label: &str, args: Vec<Term<G>>) -> Result<Term<G>> {
    let n = sig
        .arity_of(label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    if n != args.len() {
        return Err(Error::ArityMismatch {
            label: label.to_string(),
            expected: n,
            got: args.len(),
        });
    }
    Ok(Term::op(label, args))
}

/// The finite set of generators `X`, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct GeneratorSet {
    elements: Vec<String>,
}

impl GeneratorSet {
    pub fn new<S: Into<String>>(elements: impl IntoIterator<Item = S>) -> Result<Self> {
        let elements: Vec<String> = elements.into_iter().map(Into::into).collect();
        if elements.is_empty() {
            return Err(Error::EmptySubspace);
        }
        let mut seen = HashSet::new();
        if let Some(dup) = elements.iter().find(|e| !seen.insert(*e)) {
            return Err(Error::DuplicateElement(dup.clone()));
        }
        Ok(GeneratorSet { elements })
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn contains(&self, x: &str) -> bool {
        self.elements.iter().any(|e| e == x)
    }

    /// `i_X(x)`.
    pub fn generator(&self, x: &str) -> Result<Term<String>> {
        if self.contains(x) {
            Ok(Term::Gen(x.to_string()))
        } else {
            Err(Error::UnknownGenerator(x.to_string()))
        }
    }

    /// Checks that `t` is a well-formed term over this set.
    pub fn check_term(&self, sig: &Signature, t: &Term<String>) -> Result<()> {
        t.check(sig)?;
        match t.leaves().into_iter().find(|g| !self.contains(g)) {
            Some(g) => Err(Error::UnknownGenerator(g.clone())),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<String>> for GeneratorSet {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        GeneratorSet::new(v)
    }
}

impl From<GeneratorSet> for Vec<String> {
    fn from(g: GeneratorSet) -> Self {
        g.elements
    }
}

/// The homomorphism `F(X) → K` extending a generator assignment.
#[derive(Debug, Clone)]
pub struct FreeExtension<'a> {
    algebra: &'a Algebra,
    assignment: HashMap<String, usize>,
}

/// Extends `f: X → carrier(K)` to the unique homomorphism out of `F(X)`.
pub fn free_extension<'a>(f: &CarrierMap, k: &'a Algebra) -> Result<FreeExtension<'a>> {
    if f.codomain() != k.carrier() {
        return Err(Error::UnknownElement(
            "generator assignment does not land in the target carrier".into(),
        ));
    }
    let assignment = f
        .domain()
        .iter()
        .enumerate()
        .map(|(i, x)| (x.clone(), f.image_index(i)))
        .collect();
    Ok(FreeExtension {
        algebra: k,
        assignment,
    })
}

impl FreeExtension<'_> {
    pub fn eval(&self, t: &Term<String>) -> Result<usize> {
        t.fold(
            &mut |x: &String| {
                self.assignment
                    .get(x)
                    .copied()
                    .ok_or_else(|| Error::UnknownGenerator(x.clone()))
            },
            &mut |label, vals| self.algebra.apply(label, &vals),
        )
    }

    pub fn eval_named(&self, t: &Term<String>) -> Result<&str> {
        Ok(self.algebra.element(self.eval(t)?))
    }

    pub fn algebra(&self) -> &Algebra {
        self.algebra
    }
}

/// `F(f)`: relabels every generator leaf through `f`.
pub fn induced_map(f: &CarrierMap, t: &Term<String>) -> Result<Term<String>> {
    t.try_map_leaves(&mut |x: &String| {
        f.get(x)
            .map(str::to_string)
            .ok_or_else(|| Error::UnknownGenerator(x.clone()))
    })
}

/// Every term of node depth at most `depth`, each exactly once.
///
/// Order: depth-0 terms first (leaves in the given order, then nullary
/// nodes in signature order); then, for each depth, nodes by signature
/// order with argument tuples enumerated lexicographically over the
/// previously produced list.
pub fn enumerate_terms<G: Clone>(sig: &Signature, leaves: &[G], depth: usize) -> Vec<Term<G>> {
    let mut all: Vec<Term<G>> = leaves.iter().cloned().map(Term::Gen).collect();
    all.extend(sig.labels(0).iter().map(|l| Term::op(l.clone(), Vec::new())));
    let mut prev_start = 0;
    for _ in 0..depth {
        let prev_end = all.len();
        let mut fresh = Vec::new();
        for (n, label) in sig.ops().filter(|(n, _)| *n > 0) {
            for tuple in crate::signature::tuples(prev_end, n) {
                // at least one argument must come from the last layer
                if tuple.iter().all(|&i| i < prev_start) {
                    continue;
                }
                let args = tuple.iter().map(|&i| all[i].clone()).collect();
                fresh.push(Term::op(label, args));
            }
        }
        prev_start = prev_end;
        all.extend(fresh);
    }
    all
}

/// Parses the prefix text form `m(x, m(y, y))`. Identifiers followed by
/// `(` are operation nodes; bare identifiers go through `leaf`.
pub fn parse_term<G>(
    sig: &Signature,
    text: &str,
    leaf: &mut impl FnMut(&str) -> Result<G>,
) -> Result<Term<G>> {
    let mut p = Parser::new(text);
    let t = p.term(sig, leaf)?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(t)
}

/// Parses a term over a generator set.
pub fn parse_generator_term(sig: &Signature, gens: &GeneratorSet, text: &str) -> Result<Term<String>> {
    parse_term(sig, text, &mut |x| gens.generator(x).map(|_| x.to_string()))
}

pub(crate) struct Parser<'s> {
    pub(crate) src: &'s str,
    pub(crate) pos: usize,
}

impl<'s> Parser<'s> {
    pub(crate) fn new(src: &'s str) -> Self {
        Parser { src, pos: 0 }
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<&'s str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '\'' | '.' | '-' | '+' | '*') {
                // `->` terminates an identifier
                if c == '-' && self.src[self.pos..].starts_with("->") {
                    break;
                }
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.error("expected an identifier"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn term<G>(&mut self, sig: &Signature, leaf: &mut impl FnMut(&str) -> Result<G>) -> Result<Term<G>> {
        let start = self.pos;
        let name = self.ident()?;
        if self.eat('(') {
            let mut args = Vec::new();
            if !self.eat(')') {
                loop {
                    args.push(self.term(sig, leaf)?);
                    if self.eat(')') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
            term_build(sig, name, args).map_err(|e| Error::Parse {
                pos: start,
                msg: e.to_string(),
            })
        } else {
            Ok(Term::Gen(leaf(name)?))
        }
    }
}

/// Number of distinct items.
pub fn distinct<T: Eq + Hash + Clone>(items: impl IntoIterator<Item = T>) -> usize {
    items.into_iter().collect::<HashSet<_>>().len()
}
