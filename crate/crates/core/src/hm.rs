//! `HM` on algebras: pointwise operations on step functions, the constant
//! embedding, and the canonical homomorphism `h: F(HM(X)) → HM(F(X))`.
//!
//! The carrier of `HM(X)` is infinite and never materialized. Universal
//! statements about it are checked on finite samples (`SampledHm`).

use std::collections::HashMap;
use std::fmt::Display;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::{CheckReport, Failure};
use crate::rewrite::{find_identity_violation, normal_form, PatLeaf, RewriteRule, RewriteSystem};
use crate::signature::{tuples, Algebra, CarrierMap, Signature};
use crate::step::{rat, zip_many, Rational, StepFn};
use crate::term::{enumerate_terms, GeneratorSet, Term};

/// `hm_X(x)`: the constant function at `x`.
pub fn hm_embed<V: PartialEq>(x: V) -> StepFn<V> {
    StepFn::constant(x)
}

/// `e_n^HM(c, f_1, ..., f_n)(t) = e_n(c, f_1(t), ..., f_n(t))`.
pub fn lift_op(a: &Algebra, label: &str, fs: &[&StepFn<String>]) -> Result<StepFn<String>> {
    let n = a
        .signature()
        .arity_of(label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    if n != fs.len() {
        return Err(Error::ArityMismatch {
            label: label.to_string(),
            expected: n,
            got: fs.len(),
        });
    }
    zip_many(fs).try_map(|tuple| {
        let names: Vec<&str> = tuple.iter().map(String::as_str).collect();
        a.apply_named(label, &names).map(str::to_string)
    })
}

/// The lifted operation on term-valued step functions: builds the node
/// pointwise, then normalizes each piece through `system` when given.
pub fn lift_term_op(
    label: &str,
    fs: &[&StepFn<Term<String>>],
    system: Option<&RewriteSystem>,
) -> Result<StepFn<Term<String>>> {
    zip_many(fs).try_map(|args| normal_form(system, &Term::op(label, args.clone())))
}

/// `HM(A)` as an algebra given by its operations.
#[derive(Debug, Clone, Copy)]
pub struct HmAlgebra<'a> {
    base: &'a Algebra,
}

impl<'a> HmAlgebra<'a> {
    pub fn new(base: &'a Algebra) -> Self {
        HmAlgebra { base }
    }

    pub fn base(&self) -> &'a Algebra {
        self.base
    }

    pub fn apply(&self, label: &str, fs: &[&StepFn<String>]) -> Result<StepFn<String>> {
        lift_op(self.base, label, fs)
    }

    /// Checks that every value of `f` lies in the base carrier.
    pub fn contains(&self, f: &StepFn<String>) -> bool {
        f.values().iter().all(|v| self.base.index_of(v).is_some())
    }

    /// Evaluates a rule side with variables bound to step functions.
    pub fn eval_pattern(
        &self,
        p: &Term<PatLeaf>,
        env: &HashMap<&str, &StepFn<String>>,
    ) -> Result<StepFn<String>> {
        p.fold(
            &mut |leaf: &PatLeaf| match leaf {
                PatLeaf::Var(v) => env
                    .get(v.as_str())
                    .map(|f| (*f).clone())
                    .ok_or_else(|| Error::BadRule(format!("unbound variable `{v}`"))),
                PatLeaf::Gen(g) => Err(Error::UninterpretedGenerator(g.clone())),
            },
            &mut |label, vals| {
                let refs: Vec<&StepFn<String>> = vals.iter().collect();
                self.apply(label, &refs)
            },
        )
    }
}

/// Compares `lhs(x)` and `rhs(x)` for every `x` in `sample`.
pub fn check_square<X, V>(
    sample: &[X],
    lhs: impl Fn(&X) -> StepFn<V>,
    rhs: impl Fn(&X) -> StepFn<V>,
) -> CheckReport
where
    X: Display,
    V: PartialEq + Display,
{
    CheckReport::from_outcomes(sample.iter().map(|x| {
        let (l, r) = (lhs(x), rhs(x));
        (l != r).then(|| Failure {
            witness: x.to_string(),
            lhs: l.to_string(),
            rhs: r.to_string(),
        })
    }))
}

/// `HM(f) ∘ hm_X = hm_Y ∘ f` on each sample point.
pub fn check_naturality_square(f: &CarrierMap, sample: &[String]) -> Result<CheckReport> {
    if let Some(x) = sample.iter().find(|x| f.get(x).is_none()) {
        return Err(Error::PartialMap(x.clone()));
    }
    let image = |x: &String| f.get(x).expect("checked above").to_string();
    Ok(check_square(
        sample,
        |x| hm_embed(x.clone()).map(image),
        |x| hm_embed(image(x)),
    ))
}

/// `hm_A` is a homomorphism: lifting an operation to constant functions
/// agrees with embedding its value, over every operation and tuple.
pub fn check_embedding_homomorphism(a: &Algebra) -> Result<CheckReport> {
    let consts: Vec<StepFn<String>> = a.carrier().iter().cloned().map(hm_embed).collect();
    let mut report = CheckReport::default();
    for (n, label) in a.signature().ops() {
        for args in tuples(a.size(), n) {
            let fs: Vec<&StepFn<String>> = args.iter().map(|&i| &consts[i]).collect();
            let lifted = lift_op(a, label, &fs)?;
            let direct = hm_embed(a.element(a.apply(label, &args)?).to_string());
            let names: Vec<&str> = args.iter().map(|&i| a.element(i)).collect();
            report.record((lifted != direct).then(|| Failure {
                witness: format!("{label}({})", names.join(", ")),
                lhs: lifted.to_string(),
                rhs: direct.to_string(),
            }));
        }
    }
    Ok(report)
}

/// The canonical homomorphism `h: F(HM(X)) → HM(F(X))`, determined by
/// `h ∘ i_{HM(X)} = HM(i_X)` and homomorphy.
#[derive(Debug, Clone)]
pub struct CanonicalH<'a> {
    signature: &'a Signature,
    generators: &'a GeneratorSet,
    system: Option<&'a RewriteSystem>,
}

pub fn build_h<'a>(
    signature: &'a Signature,
    generators: &'a GeneratorSet,
    system: Option<&'a RewriteSystem>,
) -> CanonicalH<'a> {
    CanonicalH {
        signature,
        generators,
        system,
    }
}

impl CanonicalH<'_> {
    /// `HM(i_X)(f)`, normalized piecewise.
    pub fn on_generator(&self, f: &StepFn<String>) -> Result<StepFn<Term<String>>> {
        f.try_map(|x| {
            let leaf = self.generators.generator(x)?;
            normal_form(self.system, &leaf)
        })
    }

    pub fn apply(&self, t: &Term<StepFn<String>>) -> Result<StepFn<Term<String>>> {
        t.check(self.signature)?;
        t.fold(
            &mut |f: &StepFn<String>| self.on_generator(f),
            &mut |label, vals| {
                let refs: Vec<&StepFn<Term<String>>> = vals.iter().collect();
                lift_term_op(label, &refs, self.system)
            },
        )
    }
}

/// `h ∘ F(hm_X) = hm_{F(X)}` on every term of depth at most `depth`.
pub fn check_h_identity(
    signature: &Signature,
    generators: &GeneratorSet,
    depth: usize,
    system: Option<&RewriteSystem>,
) -> Result<CheckReport> {
    let h = build_h(signature, generators, system);
    let terms = enumerate_terms(signature, generators.elements(), depth);
    let outcomes = terms
        .par_iter()
        .map(|t| {
            let lifted = t.map_leaves(&mut |x: &String| hm_embed(x.clone()));
            let lhs = h.apply(&lifted)?;
            let rhs = hm_embed(normal_form(system, t)?);
            Ok((lhs != rhs).then(|| Failure {
                witness: t.to_string(),
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::from_outcomes(outcomes))
}

/// A finite set of step functions over a base carrier, standing in for the
/// infinite carrier of `HM(A)` in universally quantified checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledHm {
    members: Vec<StepFn<String>>,
}

pub const SAMPLE_MAX_DENOMINATOR: i64 = 8;
pub const SAMPLE_MAX_PIECES: usize = 4;

impl SampledHm {
    pub fn new(base: &Algebra, members: Vec<StepFn<String>>) -> Result<Self> {
        let hm = HmAlgebra::new(base);
        if let Some(bad) = members.iter().find(|f| !hm.contains(f)) {
            return Err(Error::BadStepFn(format!("`{bad}` leaves the base carrier")));
        }
        Ok(SampledHm { members })
    }

    /// The constant functions, one per carrier element.
    pub fn constants(base: &Algebra) -> Self {
        SampledHm {
            members: base.carrier().iter().cloned().map(hm_embed).collect(),
        }
    }

    /// A deterministic sample of `count` distinct step functions with
    /// breakpoint denominators at most 8 and at most 4 pieces. Candidate `i`
    /// uses denominator `2 + i mod 7`, a piece count cycling through 1..=4,
    /// and values cycling through the carrier so every element is used;
    /// repeated candidates are skipped. Tiny carriers may yield fewer.
    pub fn grid(base: &Algebra, count: usize) -> Self {
        let size = base.size();
        let mut members: Vec<StepFn<String>> = Vec::with_capacity(count);
        let candidates = (0..count * 8)
            .map(|i| {
                let den = 2 + (i as i64) % (SAMPLE_MAX_DENOMINATOR - 1);
                let pieces = (1 + i % SAMPLE_MAX_PIECES).min(den as usize);
                let mut cuts: Vec<i64> = (1..pieces as i64)
                    .map(|j| (j * den + (i as i64 % 3)) / pieces as i64)
                    .filter(|&c| c > 0 && c < den)
                    .collect();
                cuts.dedup();
                let mut breaks = vec![rat(0, 1)];
                breaks.extend(cuts.iter().map(|&c| rat(c, den)));
                breaks.push(rat(1, 1));
                let values = (0..breaks.len() - 1)
                    .map(|j| base.element((i + j * (1 + i % size.max(1))) % size).to_string())
                    .collect();
                StepFn::new(breaks, values).expect("grid breakpoints increase")
            });
        for f in candidates {
            if members.len() == count {
                break;
            }
            if !members.contains(&f) {
                members.push(f);
            }
        }
        SampledHm { members }
    }

    /// Adds every lifted-operation application to current members, `rounds` times.
    pub fn close(mut self, base: &Algebra, rounds: usize, cap: usize) -> Result<Self> {
        for _ in 0..rounds {
            let mut fresh = Vec::new();
            for (n, label) in base.signature().ops() {
                for args in tuples(self.members.len(), n) {
                    let fs: Vec<&StepFn<String>> = args.iter().map(|&i| &self.members[i]).collect();
                    let g = lift_op(base, label, &fs)?;
                    if !self.members.contains(&g) && !fresh.contains(&g) {
                        fresh.push(g);
                    }
                    if self.members.len() + fresh.len() >= cap {
                        break;
                    }
                }
            }
            self.members.extend(fresh);
            self.members.truncate(cap);
        }
        Ok(self)
    }

    pub fn members(&self) -> &[StepFn<String>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Every assignment of sample members to the rule's variables makes both
/// sides equal in `HM(A)`. A violation in `A` itself is reported first.
pub fn check_hm_preserves_identities(
    a: &Algebra,
    rule: &RewriteRule,
    sample: &SampledHm,
) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    if let Some(v) = find_identity_violation(a, rule)? {
        let assignment: Vec<String> = v.assignment.iter().map(|(k, x)| format!("{k}={x}")).collect();
        report.failures.push(Failure {
            witness: format!("base algebra: {}", assignment.join(", ")),
            lhs: v.lhs,
            rhs: v.rhs,
        });
    }
    let hm = HmAlgebra::new(a);
    for choice in tuples(sample.len(), rule.vars().len()) {
        let env: HashMap<&str, &StepFn<String>> = rule
            .vars()
            .iter()
            .map(String::as_str)
            .zip(choice.iter().map(|&i| &sample.members[i]))
            .collect();
        let l = hm.eval_pattern(rule.lhs(), &env)?;
        let r = hm.eval_pattern(rule.rhs(), &env)?;
        report.record((l != r).then(|| {
            let witness: Vec<String> = rule
                .vars()
                .iter()
                .map(|v| format!("{v}={}", env[v.as_str()]))
                .collect();
            Failure {
                witness: witness.join(", "),
                lhs: l.to_string(),
                rhs: r.to_string(),
            }
        }));
    }
    Ok(report)
}

/// Sample points strictly inside each piece of a common refinement; used by
/// pointwise oracles in tests.
pub fn interior_points<V>(fs: &[&StepFn<V>]) -> Vec<Rational> {
    let mut breaks: Vec<Rational> = fs.iter().flat_map(|f| f.breakpoints().iter().cloned()).collect();
    breaks.sort();
    breaks.dedup();
    breaks
        .windows(2)
        .map(|w| (&w[0] + &w[1]) / Rational::from_integer(BigInt::from(2)))
        .collect()
}
