//! Equationally presented classes: oriented rules, fuel-bounded
//! leftmost-innermost normalization and identity checks in finite algebras.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::signature::{tuples, Algebra, Signature};
use crate::term::{parse_term, GeneratorSet, Parser, Term};

pub const DEFAULT_FUEL: u64 = 10_000;

/// A pattern leaf. Variables and generator constants never share a namespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatLeaf {
    Var(String),
    Gen(String),
}

impl fmt::Display for PatLeaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatLeaf::Var(v) | PatLeaf::Gen(v) => f.write_str(v),
        }
    }
}

pub type Pattern = Term<PatLeaf>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    vars: Vec<String>,
    lhs: Pattern,
    rhs: Pattern,
}

fn pattern_vars(p: &Pattern) -> BTreeSet<&str> {
    p.leaves()
        .into_iter()
        .filter_map(|l| match l {
            PatLeaf::Var(v) => Some(v.as_str()),
            PatLeaf::Gen(_) => None,
        })
        .collect()
}

impl RewriteRule {
    pub fn new(vars: Vec<String>, lhs: Pattern, rhs: Pattern) -> Result<Self> {
        if let Term::Gen(PatLeaf::Var(v)) = &lhs {
            return Err(Error::BadRule(format!("left-hand side is the bare variable `{v}`")));
        }
        let declared: BTreeSet<&str> = vars.iter().map(String::as_str).collect();
        if declared.len() != vars.len() {
            return Err(Error::BadRule("duplicate variable declaration".into()));
        }
        let lv = pattern_vars(&lhs);
        for side in [&lhs, &rhs] {
            if let Some(v) = pattern_vars(side).into_iter().find(|v| !declared.contains(v)) {
                return Err(Error::BadRule(format!("undeclared variable `{v}`")));
            }
        }
        if let Some(v) = pattern_vars(&rhs).into_iter().find(|v| !lv.contains(v)) {
            return Err(Error::BadRule(format!(
                "variable `{v}` occurs on the right but not on the left"
            )));
        }
        Ok(RewriteRule { vars, lhs, rhs })
    }

    /// Parses `vars: a,b,c; m(m(a,b),c) -> m(a,m(b,c))`. Without a `vars:`
    /// prefix every leaf is a generator constant.
    pub fn parse(sig: &Signature, text: &str) -> Result<Self> {
        let (vars, body, offset) = match text.trim_start().strip_prefix("vars:") {
            Some(rest) => {
                let semi = rest
                    .find(';')
                    .ok_or_else(|| Error::BadRule("`vars:` list must end with `;`".into()))?;
                let vars: Vec<String> = rest[..semi]
                    .split(',')
                    .map(|v| v.trim().to_string())
                    .filter(|v| !v.is_empty())
                    .collect();
                (vars, &rest[semi + 1..], text.len() - rest.len() + semi + 1)
            }
            None => (Vec::new(), text, 0),
        };
        let arrow = body
            .find("->")
            .ok_or_else(|| Error::BadRule("missing `->`".into()))?;
        let leaf = &mut |name: &str| -> Result<PatLeaf> {
            Ok(if vars.iter().any(|v| v == name) {
                PatLeaf::Var(name.to_string())
            } else {
                PatLeaf::Gen(name.to_string())
            })
        };
        let shift = |e: Error, by: usize| match e {
            Error::Parse { pos, msg } => Error::Parse { pos: pos + by, msg },
            e => e,
        };
        let lhs = parse_term(sig, &body[..arrow], leaf).map_err(|e| shift(e, offset))?;
        let rhs = parse_term(sig, &body[arrow + 2..], leaf).map_err(|e| shift(e, offset + arrow + 2))?;
        RewriteRule::new(vars, lhs, rhs)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn lhs(&self) -> &Pattern {
        &self.lhs
    }

    pub fn rhs(&self) -> &Pattern {
        &self.rhs
    }

    /// Generator constants mentioned by either side.
    pub fn constants(&self) -> BTreeSet<&str> {
        self.lhs
            .leaves()
            .into_iter()
            .chain(self.rhs.leaves())
            .filter_map(|l| match l {
                PatLeaf::Gen(g) => Some(g.as_str()),
                PatLeaf::Var(_) => None,
            })
            .collect()
    }

    /// The same equation read right to left, if that orientation is a valid rule.
    pub fn reversed(&self) -> Result<Self> {
        RewriteRule::new(self.vars.clone(), self.rhs.clone(), self.lhs.clone())
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.vars.is_empty() {
            write!(f, "vars: {}; ", self.vars.join(", "))?;
        }
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// Matches `pattern` against `t`, extending `subst`.
fn matches<'t>(
    pattern: &Pattern,
    t: &'t Term<String>,
    subst: &mut HashMap<String, &'t Term<String>>,
) -> bool {
    match (pattern, t) {
        (Term::Gen(PatLeaf::Var(v)), _) => match subst.get(v) {
            Some(bound) => *bound == t,
            None => {
                subst.insert(v.clone(), t);
                true
            }
        },
        (Term::Gen(PatLeaf::Gen(g)), Term::Gen(x)) => g == x,
        (Term::Gen(PatLeaf::Gen(_)), Term::Op { .. }) => false,
        (Term::Op { .. }, Term::Gen(_)) => false,
        (
            Term::Op { label: pl, args: pa },
            Term::Op { label: tl, args: ta },
        ) => pl == tl && pa.len() == ta.len() && pa.iter().zip(ta).all(|(p, a)| matches(p, a, subst)),
    }
}

fn instantiate(pattern: &Pattern, subst: &HashMap<String, &Term<String>>) -> Term<String> {
    match pattern {
        Term::Gen(PatLeaf::Var(v)) => subst[v].clone(),
        Term::Gen(PatLeaf::Gen(g)) => Term::Gen(g.clone()),
        Term::Op { label, args } => Term::Op {
            label: label.clone(),
            args: args.iter().map(|a| instantiate(a, subst)).collect(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteSystem {
    signature: Signature,
    rules: Vec<RewriteRule>,
    fuel: u64,
}

impl RewriteSystem {
    pub fn new(signature: Signature, rules: Vec<RewriteRule>) -> Result<Self> {
        for r in &rules {
            r.lhs.check(&signature)?;
            r.rhs.check(&signature)?;
        }
        Ok(RewriteSystem {
            signature,
            rules,
            fuel: DEFAULT_FUEL,
        })
    }

    pub fn parse<S: AsRef<str>>(signature: Signature, rules: &[S]) -> Result<Self> {
        let rules = rules
            .iter()
            .map(|r| RewriteRule::parse(&signature, r.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        RewriteSystem::new(signature, rules)
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn fuel(&self) -> u64 {
        self.fuel
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Leftmost-innermost normal form, trying rules in declaration order.
    /// Each rule application costs one unit of fuel.
    pub fn normalize(&self, t: &Term<String>) -> Result<Term<String>> {
        let mut fuel = self.fuel;
        self.nf(t.clone(), &mut fuel)
    }

    fn nf(&self, mut t: Term<String>, fuel: &mut u64) -> Result<Term<String>> {
        loop {
            if let Term::Op { label, args } = t {
                let args = args
                    .into_iter()
                    .map(|a| self.nf(a, fuel))
                    .collect::<Result<Vec<_>>>()?;
                t = Term::Op { label, args };
            }
            let mut fired = None;
            for rule in &self.rules {
                let mut subst = HashMap::new();
                if matches(&rule.lhs, &t, &mut subst) {
                    fired = Some(instantiate(&rule.rhs, &subst));
                    break;
                }
            }
            match fired {
                None => return Ok(t),
                Some(next) => {
                    if *fuel == 0 {
                        return Err(Error::FuelExhausted { fuel: self.fuel });
                    }
                    *fuel -= 1;
                    t = next;
                }
            }
        }
    }

    pub fn quotient_equal(&self, a: &Term<String>, b: &Term<String>) -> Result<bool> {
        Ok(self.normalize(a)? == self.normalize(b)?)
    }
}

/// Normalizes through `system` when present; the absolutely free case is the identity.
pub fn normal_form(system: Option<&RewriteSystem>, t: &Term<String>) -> Result<Term<String>> {
    match system {
        Some(r) => r.normalize(t),
        None => Ok(t.clone()),
    }
}

/// The free algebra of a presented class over `base`; elements are normal forms.
#[derive(Debug, Clone)]
pub struct QuotientAlgebra {
    base: GeneratorSet,
    system: RewriteSystem,
}

impl QuotientAlgebra {
    pub fn new(base: GeneratorSet, system: RewriteSystem) -> Self {
        QuotientAlgebra { base, system }
    }

    pub fn base(&self) -> &GeneratorSet {
        &self.base
    }

    pub fn system(&self) -> &RewriteSystem {
        &self.system
    }

    /// The canonical representative of the class of `t`.
    pub fn element(&self, t: &Term<String>) -> Result<Term<String>> {
        self.base.check_term(&self.system.signature, t)?;
        self.system.normalize(t)
    }

    pub fn equal(&self, a: &Term<String>, b: &Term<String>) -> Result<bool> {
        Ok(self.element(a)? == self.element(b)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityViolation {
    pub assignment: BTreeMap<String, String>,
    pub lhs: String,
    pub rhs: String,
}

fn eval_pattern(a: &Algebra, p: &Pattern, env: &HashMap<&str, usize>) -> Result<usize> {
    p.fold(
        &mut |leaf: &PatLeaf| match leaf {
            PatLeaf::Var(v) => Ok(env[v.as_str()]),
            PatLeaf::Gen(g) => Err(Error::UninterpretedGenerator(g.clone())),
        },
        &mut |label, vals| a.apply(label, &vals),
    )
}

/// First assignment of carrier elements to the rule's variables under which
/// the two sides differ in `a`.
pub fn find_identity_violation(a: &Algebra, rule: &RewriteRule) -> Result<Option<IdentityViolation>> {
    if let Some(g) = rule.constants().into_iter().next() {
        return Err(Error::UninterpretedGenerator(g.to_string()));
    }
    for values in tuples(a.size(), rule.vars.len()) {
        let env: HashMap<&str, usize> = rule
            .vars
            .iter()
            .map(String::as_str)
            .zip(values.iter().copied())
            .collect();
        let l = eval_pattern(a, &rule.lhs, &env)?;
        let r = eval_pattern(a, &rule.rhs, &env)?;
        if l != r {
            return Ok(Some(IdentityViolation {
                assignment: env
                    .iter()
                    .map(|(v, &x)| (v.to_string(), a.element(x).to_string()))
                    .collect(),
                lhs: a.element(l).to_string(),
                rhs: a.element(r).to_string(),
            }));
        }
    }
    Ok(None)
}

/// Exhaustive check that `a` satisfies the rule read as an identity.
pub fn satisfies_identity(a: &Algebra, rule: &RewriteRule) -> Result<bool> {
    Ok(find_identity_violation(a, rule)?.is_none())
}

/// Splits `a, b ,c` style lists; shared with instance parsing.
pub fn parse_name_list(text: &str) -> Result<Vec<String>> {
    let mut p = Parser::new(text);
    let mut out = Vec::new();
    p.skip_ws();
    if p.pos == text.len() {
        return Ok(out);
    }
    loop {
        out.push(p.ident()?.to_string());
        if !p.eat(',') {
            break;
        }
    }
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("trailing input"));
    }
    Ok(out)
}
