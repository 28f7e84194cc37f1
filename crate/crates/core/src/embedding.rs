//! HM-valued retracts and the factorization `hm_{F(X)} = h ∘ F(r) ∘ F(e)`
//! that makes `F(e)` injective.
//!
//! Retractions over finite data have no continuity to speak of, so only the
//! extension property `r ∘ e = hm_X` and value containment are enforced.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hm::{build_h, hm_embed};
use crate::report::{CheckReport, Failure};
use crate::rewrite::{normal_form, RewriteSystem};
use crate::signature::{CarrierMap, Signature};
use crate::step::{Rational, StepFn};
use crate::term::{enumerate_terms, induced_map, GeneratorSet, Term};

/// A map `r: Y → HM(X)` for `X ⊆ Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retraction {
    subspace: GeneratorSet,
    ambient: GeneratorSet,
    table: BTreeMap<String, StepFn<String>>,
}

impl Retraction {
    /// Requires `X ⊆ Y` and an image for every point of `Y`. The extension
    /// property is not required here; see [`verify_retract`].
    pub fn new(
        subspace: GeneratorSet,
        ambient: GeneratorSet,
        table: BTreeMap<String, StepFn<String>>,
    ) -> Result<Self> {
        if let Some(x) = subspace.elements().iter().find(|x| !ambient.contains(x)) {
            return Err(Error::UnknownElement(format!("{x} is not in the ambient set")));
        }
        if let Some(y) = ambient.elements().iter().find(|y| !table.contains_key(*y)) {
            return Err(Error::PartialMap(y.clone()));
        }
        if let Some(k) = table.keys().find(|k| !ambient.contains(k)) {
            return Err(Error::UnknownElement(k.clone()));
        }
        Ok(Retraction {
            subspace,
            ambient,
            table,
        })
    }

    pub fn subspace(&self) -> &GeneratorSet {
        &self.subspace
    }

    pub fn ambient(&self) -> &GeneratorSet {
        &self.ambient
    }

    pub fn image(&self, y: &str) -> Option<&StepFn<String>> {
        self.table.get(y)
    }

    pub fn table(&self) -> &BTreeMap<String, StepFn<String>> {
        &self.table
    }

    /// The first point breaking the extension property or value containment.
    pub fn violation(&self) -> Option<Failure> {
        for x in self.subspace.elements() {
            let got = &self.table[x];
            let want = hm_embed(x.clone());
            if *got != want {
                return Some(Failure {
                    witness: x.clone(),
                    lhs: got.to_string(),
                    rhs: want.to_string(),
                });
            }
        }
        for y in self.ambient.elements() {
            let f = &self.table[y];
            if let Some(v) = f.values().iter().find(|v| !self.subspace.contains(v)) {
                return Some(Failure {
                    witness: y.clone(),
                    lhs: f.to_string(),
                    rhs: format!("a step function with values in X, but `{v}` is not in X"),
                });
            }
        }
        None
    }
}

pub fn verify_retract(r: &Retraction) -> bool {
    r.violation().is_none()
}

fn equal_split(points: &[String]) -> StepFn<String> {
    let k = points.len() as i64;
    let breaks = (0..=k).map(|i| Rational::new(i.into(), k.into())).collect();
    StepFn::new(breaks, points.to_vec()).expect("equal split is well formed")
}

/// Points of `X` go to constants; every other point of `Y` goes to the
/// step function splitting `[0,1)` into `|X|` equal pieces, in the order of `X`.
pub fn build_retraction_uniform(subspace: &GeneratorSet, ambient: &GeneratorSet) -> Result<Retraction> {
    let split = equal_split(subspace.elements());
    let table = ambient
        .elements()
        .iter()
        .map(|y| {
            let img = if subspace.contains(y) {
                hm_embed(y.clone())
            } else {
                split.clone()
            };
            (y.clone(), img)
        })
        .collect();
    Retraction::new(subspace.clone(), ambient.clone(), table)
}

/// A finite metric space with exact rational distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metric {
    points: GeneratorSet,
    dist: Vec<Vec<Rational>>,
}

impl Metric {
    /// Checks shape, zero diagonal, positivity off the diagonal, symmetry
    /// and the triangle inequality.
    pub fn new(points: GeneratorSet, dist: Vec<Vec<Rational>>) -> Result<Self> {
        let n = points.elements().len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::BadMetric(format!("distance table must be {n}x{n}")));
        }
        let name = |i: usize| &points.elements()[i];
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::BadMetric(format!("d({0},{0}) is not 0", name(i))));
            }
            for j in 0..n {
                if i != j && dist[i][j] <= Rational::zero() {
                    return Err(Error::BadMetric(format!(
                        "d({},{}) must be positive",
                        name(i),
                        name(j)
                    )));
                }
                if dist[i][j] != dist[j][i] {
                    return Err(Error::BadMetric(format!(
                        "d({},{}) != d({},{})",
                        name(i),
                        name(j),
                        name(j),
                        name(i)
                    )));
                }
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return Err(Error::BadMetric(format!(
                            "triangle inequality fails for {}, {}, {}",
                            name(i),
                            name(j),
                            name(k)
                        )));
                    }
                }
            }
        }
        Ok(Metric { points, dist })
    }

    pub fn points(&self) -> &GeneratorSet {
        &self.points
    }

    pub fn distance(&self, a: &str, b: &str) -> Option<&Rational> {
        let pos = |p: &str| self.points.elements().iter().position(|e| e == p);
        Some(&self.dist[pos(a)?][pos(b)?])
    }
}

/// Points of `X` go to constants. A point `y ∉ X` goes to a step function
/// over the points of `X` nearest to `y`, with piece lengths proportional
/// to inverse distance; since the nearest tier is equidistant this is an
/// equal split, in the order of `X`.
pub fn build_retraction_metric(metric: &Metric, subspace: &GeneratorSet) -> Result<Retraction> {
    let ambient = metric.points.clone();
    let mut table = BTreeMap::new();
    for y in ambient.elements() {
        if subspace.contains(y) {
            table.insert(y.clone(), hm_embed(y.clone()));
            continue;
        }
        let row: Vec<(&String, &Rational)> = subspace
            .elements()
            .iter()
            .map(|x| {
                metric
                    .distance(y, x)
                    .map(|d| (x, d))
                    .ok_or_else(|| Error::UnknownElement(x.clone()))
            })
            .collect::<Result<_>>()?;
        let nearest = row.iter().map(|(_, d)| *d).min().ok_or(Error::EmptySubspace)?;
        let tier: Vec<(&String, &Rational)> = row.into_iter().filter(|(_, d)| *d == nearest).collect();
        let weights: Vec<Rational> = tier.iter().map(|(_, d)| d.recip()).collect();
        let total: Rational = weights.iter().sum();
        let mut breaks = vec![Rational::zero()];
        let mut acc = Rational::zero();
        for w in &weights[..weights.len() - 1] {
            acc += w / &total;
            breaks.push(acc.clone());
        }
        breaks.push(Rational::one());
        let values = tier.iter().map(|(x, _)| (*x).clone()).collect();
        table.insert(y.clone(), StepFn::new(breaks, values)?);
    }
    Retraction::new(subspace.clone(), ambient, table)
}

/// Outcome of testing "if `g ∘ f` is injective then `f` is injective" on one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lemma1Outcome {
    pub f_injective: bool,
    pub composite_injective: bool,
    /// `composite_injective ⇒ f_injective`.
    pub implication_holds: bool,
}

impl Lemma1Outcome {
    /// The premise fails, so the pair says nothing about `f`.
    pub fn vacuous(&self) -> bool {
        !self.composite_injective
    }
}

pub fn is_injective<A, B: Eq + std::hash::Hash>(f: &BTreeMap<A, B>) -> bool {
    let mut seen = HashSet::with_capacity(f.len());
    f.values().all(|v| seen.insert(v))
}

pub fn lemma1_injectivity<A, B, C>(f: &BTreeMap<A, B>, g: &BTreeMap<B, C>) -> Result<Lemma1Outcome>
where
    A: Ord,
    B: Ord + Eq + std::hash::Hash + std::fmt::Debug,
    C: Eq + std::hash::Hash,
{
    let mut composite = HashSet::with_capacity(f.len());
    let mut composite_injective = true;
    for b in f.values() {
        let c = g.get(b).ok_or_else(|| Error::NotComposable(format!("{b:?}")))?;
        composite_injective &= composite.insert(c);
    }
    let f_injective = is_injective(f);
    Ok(Lemma1Outcome {
        f_injective,
        composite_injective,
        implication_holds: !composite_injective || f_injective,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Identities {
    /// `F(hm_X) = F(r) ∘ F(e)` termwise.
    pub square_v: Verdict,
    /// `hm_{F(X)} = h ∘ F(r) ∘ F(e)` termwise.
    pub main: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Injectivity {
    /// Distinct normal forms among the enumerated terms over `X`.
    pub domain_classes: usize,
    /// Distinct normal forms of their images in `F(Y)`.
    pub image_classes: usize,
    /// Distinct normal forms among the enumerated terms over `Y`.
    pub codomain_classes: usize,
    pub injective: bool,
    pub lemma1: Lemma1Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub terms_checked: usize,
    pub retract: Verdict,
    pub retract_failure: Option<Failure>,
    pub identities: Identities,
    pub injectivity: Injectivity,
    pub square_v: CheckReport,
    pub main: CheckReport,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.retract == Verdict::Pass
            && self.identities.square_v == Verdict::Pass
            && self.identities.main == Verdict::Pass
            && self.injectivity.injective
            && self.injectivity.lemma1.implication_holds
    }

    pub fn summary(&self) -> String {
        let v = |b: Verdict| match b {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
        };
        let mut s = format!(
            "terms checked: {}\nretract: {}\nF(hm_X) = F(r)F(e): {} ({} failures)\nhm_F(X) = h F(r) F(e): {} ({} failures)\n\
             classes: {} over X, {} images in F(Y), {} over Y\nF(e) injective: {} (cancellation premise {})",
            self.terms_checked,
            v(self.retract),
            v(self.identities.square_v),
            self.square_v.failures.len(),
            v(self.identities.main),
            self.main.failures.len(),
            self.injectivity.domain_classes,
            self.injectivity.image_classes,
            self.injectivity.codomain_classes,
            self.injectivity.injective,
            if self.injectivity.lemma1.vacuous() { "vacuous" } else { "active" },
        );
        if let Some(f) = &self.retract_failure {
            s.push_str(&format!("\nretract witness {}: {} != {}", f.witness, f.lhs, f.rhs));
        }
        s
    }
}

struct TermOutcome {
    normal: Term<String>,
    image_normal: Term<String>,
    h_value: Option<StepFn<Term<String>>>,
    square_v: Option<Failure>,
    main: Option<Failure>,
}

/// Runs the factorization termwise over `enumerate_terms(X, depth)`:
/// relabel into `Y`, substitute `r`, apply `h`, and compare with the
/// constant embedding of the normal form; separately compare `F(hm_X)`
/// with `F(r) ∘ F(e)`; finally count normal-form classes before and after
/// relabeling and apply injective cancellation to `F(e)` followed by `h ∘ F(r)`.
///
/// An invalid retraction is reported, not rejected, so the identity
/// checks still run against it.
pub fn theorem2_pipeline(
    signature: &Signature,
    r: &Retraction,
    system: Option<&RewriteSystem>,
    depth: usize,
) -> Result<PipelineReport> {
    let x = r.subspace();
    let y = r.ambient();
    let retract_failure = r.violation();
    let inclusion = CarrierMap::new(
        x.elements(),
        y.elements(),
        &x.elements().iter().map(|e| (e.clone(), e.clone())).collect(),
    )?;
    let h = build_h(signature, x, system);
    let terms = enumerate_terms(signature, x.elements(), depth);

    let outcomes = terms
        .par_iter()
        .map(|t| -> Result<TermOutcome> {
            let normal = normal_form(system, t)?;
            let relabeled = induced_map(&inclusion, t)?;
            let image_normal = normal_form(system, &relabeled)?;
            let substituted = relabeled.map_leaves(&mut |g: &String| r.table[g].clone());
            let embedded = t.map_leaves(&mut |g: &String| hm_embed(g.clone()));
            let square_v = (embedded != substituted).then(|| Failure {
                witness: t.to_string(),
                lhs: embedded.to_string(),
                rhs: substituted.to_string(),
            });
            let expected = hm_embed(normal.clone());
            let (h_value, main) = match h.apply(&substituted) {
                Ok(v) => {
                    let fail = (v != expected).then(|| Failure {
                        witness: t.to_string(),
                        lhs: v.to_string(),
                        rhs: expected.to_string(),
                    });
                    (Some(v), fail)
                }
                Err(e @ Error::FuelExhausted { .. }) => return Err(e),
                Err(e) => (
                    None,
                    Some(Failure {
                        witness: t.to_string(),
                        lhs: format!("error: {e}"),
                        rhs: expected.to_string(),
                    }),
                ),
            };
            Ok(TermOutcome {
                normal,
                image_normal,
                h_value,
                square_v,
                main,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut square_v = CheckReport::default();
    let mut main = CheckReport::default();
    // F(e) on classes, and h ∘ F(r) on image classes
    let mut on_classes: BTreeMap<Term<String>, Term<String>> = BTreeMap::new();
    let mut after: BTreeMap<Term<String>, String> = BTreeMap::new();
    let mut well_defined = true;
    for o in outcomes {
        square_v.record(o.square_v);
        main.record(o.main);
        if let Some(prev) = on_classes.insert(o.normal.clone(), o.image_normal.clone()) {
            well_defined &= prev == o.image_normal;
        }
        let hv = o
            .h_value
            .map(|v| v.to_string())
            .unwrap_or_else(|| format!("undefined at {}", o.normal));
        if let Some(prev) = after.insert(o.image_normal, hv.clone()) {
            well_defined &= prev == hv;
        }
    }
    let lemma1 = lemma1_injectivity(&on_classes, &after)?;
    let image_classes: BTreeSet<&Term<String>> = on_classes.values().collect();
    let codomain_classes = enumerate_terms(signature, y.elements(), depth)
        .par_iter()
        .map(|t| normal_form(system, t))
        .collect::<Result<HashSet<_>>>()?
        .len();

    Ok(PipelineReport {
        terms_checked: terms.len(),
        retract: retract_failure.is_none().into(),
        retract_failure,
        identities: Identities {
            square_v: square_v.passed().into(),
            main: main.passed().into(),
        },
        injectivity: Injectivity {
            domain_classes: on_classes.len(),
            image_classes: image_classes.len(),
            codomain_classes,
            injective: well_defined && lemma1.f_injective,
            lemma1,
        },
        square_v,
        main,
    })
}

/// A pair of index tables `(f, g)`.
pub type MapPair = (Vec<usize>, Vec<usize>);

/// Exhaustive check of injective cancellation over all `f: A → B`, `g: B → C` with the given sizes.
/// Returns the number of pairs checked and the first counterexample found.
pub fn lemma1_exhaustive(a: usize, b: usize, c: usize) -> (usize, Option<MapPair>) {
    let mut checked = 0;
    for f in crate::signature::tuples(b, a) {
        for g in crate::signature::tuples(c, b) {
            checked += 1;
            let fm: BTreeMap<usize, usize> = f.iter().copied().enumerate().collect();
            let gm: BTreeMap<usize, usize> = g.iter().copied().enumerate().collect();
            let out = lemma1_injectivity(&fm, &gm).expect("total maps compose");
            if !out.implication_holds {
                return (checked, Some((f, g)));
            }
        }
    }
    (checked, None)
}
