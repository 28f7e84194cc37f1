//! The verification commands. Each returns its checks in a fixed order so
//! reports are reproducible.

use anyhow::{anyhow, bail, Result};
use serde_json::{json, Value};

use hmfree::embedding::theorem2_pipeline;
use hmfree::hm::{check_embedding_homomorphism, check_h_identity, check_hm_preserves_identities, check_naturality_square, SampledHm};
use hmfree::report::{CheckReport, Failure};
use hmfree::rewrite::{normal_form, RewriteSystem};
use hmfree::signature::{tuples, Algebra, CarrierMap};
use hmfree::term::{enumerate_terms, free_extension, parse_generator_term, Term};
use hmfree::topology::ContinuousMap;

use crate::expr::{evaluate, Val};
use crate::instance::Instance;
use crate::report::{single, Check};

/// Step functions sampled per algebra when checking identities in `HM(A)`.
pub const IDENTITY_SAMPLE: usize = 8;

/// Every `(op, tuple)` of `a`, with failures where `h` does not commute.
fn hom_report(h: &CarrierMap, a: &Algebra, b: &Algebra) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    for (n, label) in a.signature().ops() {
        for args in tuples(a.size(), n) {
            let lhs = h.image_index(a.apply(label, &args)?);
            let mapped: Vec<usize> = args.iter().map(|&i| h.image_index(i)).collect();
            let rhs = b.apply(label, &mapped)?;
            report.checked += 1;
            if lhs != rhs {
                let names: Vec<&str> = args.iter().map(|&i| a.element(i)).collect();
                report.failures.push(Failure {
                    witness: format!("{label}({})", names.join(", ")),
                    lhs: b.element(lhs).to_string(),
                    rhs: b.element(rhs).to_string(),
                });
            }
        }
    }
    Ok(report)
}

pub fn check_hom(inst: &Instance, names: &[String]) -> Result<Vec<Check>> {
    let names: Vec<String> = if names.is_empty() {
        inst.maps
            .iter()
            .filter(|(_, m)| inst.algebras.contains_key(&m.domain) && inst.algebras.contains_key(&m.codomain))
            .map(|(k, _)| k.clone())
            .collect()
    } else {
        names.to_vec()
    };
    if names.is_empty() {
        bail!("no maps between algebras to check");
    }
    names
        .iter()
        .map(|name| {
            let m = inst.map(name)?;
            let (a, b) = (inst.algebra(&m.domain)?, inst.algebra(&m.codomain)?);
            if a.signature() != b.signature() {
                bail!("map `{name}` joins algebras of different signatures");
            }
            Ok(Check::new(format!("homomorphism {name}: {} -> {}", m.domain, m.codomain), hom_report(&m.map, a, b)?))
        })
        .collect()
}

/// Evaluates terms through the unique extension of a generator map, and
/// checks the extension on every term up to `depth`: it agrees with the map
/// on generators and commutes with each operation.
pub fn free_extend(
    inst: &Instance,
    map_name: &str,
    terms: &[String],
    system: Option<&str>,
    depth: usize,
) -> Result<Vec<Check>> {
    let sig = inst.require_signature()?;
    let m = inst.map(map_name)?;
    let gens = inst.generator_set(&m.domain)?;
    let k = inst.algebra(&m.codomain)?;
    let system = system.map(|s| inst.system(s)).transpose()?;
    let ext = free_extension(&m.map, k)?;

    let mut checks = Vec::new();
    let generators = CheckReport {
        checked: gens.elements().len(),
        failures: gens
            .elements()
            .iter()
            .filter_map(|x| {
                let got = ext.eval_named(&Term::Gen(x.clone())).ok()?;
                let want = m.map.get(x)?;
                (got != want).then(|| Failure {
                    witness: x.clone(),
                    lhs: got.to_string(),
                    rhs: want.to_string(),
                })
            })
            .collect(),
    };
    checks.push(Check::new(format!("agrees with {map_name} on generators"), generators));

    let mut equation = CheckReport::default();
    for t in enumerate_terms(sig, gens.elements(), depth) {
        if let Term::Op { label, args } = &t {
            let values = args.iter().map(|a| ext.eval(a)).collect::<hmfree::Result<Vec<_>>>()?;
            let (lhs, rhs) = (ext.eval(&t)?, k.apply(label, &values)?);
            equation.checked += 1;
            if lhs != rhs {
                equation.failures.push(Failure {
                    witness: t.to_string(),
                    lhs: k.element(lhs).to_string(),
                    rhs: k.element(rhs).to_string(),
                });
            }
        }
    }
    checks.push(Check::new(format!("homomorphism equation to depth {depth}"), equation));

    for text in terms {
        let t = parse_generator_term(sig, gens, text)?;
        let value = ext.eval_named(&t)?.to_string();
        let mut details = json!({ "term": t.to_string(), "value": value });
        let mut report = single(None);
        if let Some(r) = system {
            let nf = normal_form(Some(r), &t)?;
            let nf_value = ext.eval_named(&nf)?;
            details["normal_form"] = json!(nf.to_string());
            if nf_value != value {
                report = single(Some(Failure {
                    witness: format!("{t} ~ {nf}"),
                    lhs: value.clone(),
                    rhs: nf_value.to_string(),
                }));
            }
        }
        checks.push(Check::new(format!("evaluate {text}"), report).details(details));
    }
    Ok(checks)
}

/// The systems a command runs against: the named one, or the absolutely
/// free case followed by every system in the file.
fn systems<'a>(inst: &'a Instance, only: Option<&str>) -> Result<Vec<(String, Option<&'a RewriteSystem>)>> {
    Ok(match only {
        Some("free") => vec![("free".to_string(), None)],
        Some(name) => vec![(name.to_string(), Some(inst.system(name)?))],
        None => std::iter::once(("free".to_string(), None))
            .chain(inst.systems.iter().map(|(k, r)| (k.clone(), Some(r))))
            .collect(),
    })
}

fn with_fuel(systems: Vec<(String, Option<&RewriteSystem>)>, fuel: Option<u64>) -> Vec<(String, Option<RewriteSystem>)> {
    systems
        .into_iter()
        .map(|(k, r)| {
            let r = r.cloned().map(|r| match fuel {
                Some(f) => r.with_fuel(f),
                None => r,
            });
            (k, r)
        })
        .collect()
}

pub fn verify_diagrams(inst: &Instance, depth: usize, system: Option<&str>, fuel: Option<u64>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, m) in &inst.maps {
        let sample = m.map.domain().to_vec();
        checks.push(Check::new(format!("naturality of hm along {name}"), check_naturality_square(&m.map, &sample)?));
    }
    for (name, a) in &inst.algebras {
        checks.push(Check::new(format!("hm_{name} is a homomorphism"), check_embedding_homomorphism(a)?));
    }
    for (algebra, rules) in &inst.models {
        let a = inst.algebra(algebra)?;
        let sample = SampledHm::grid(a, IDENTITY_SAMPLE);
        for rule in rules {
            checks.push(Check::new(
                format!("HM({algebra}) satisfies {rule}"),
                check_hm_preserves_identities(a, rule, &sample)?,
            ));
        }
    }
    if !inst.generator_sets.is_empty() {
        let sig = inst.require_signature()?;
        for (sys_name, r) in with_fuel(systems(inst, system)?, fuel) {
            for (gen_name, gens) in &inst.generator_sets {
                checks.push(Check::new(
                    format!("h F(hm) = hm on F({gen_name}) / {sys_name}, depth {depth}"),
                    check_h_identity(sig, gens, depth, r.as_ref())?,
                ));
            }
        }
    }
    if checks.is_empty() {
        bail!("instance has nothing to verify");
    }
    Ok(checks)
}

fn space_map_check(name: &str, f: &ContinuousMap) -> Check {
    let source = f.source();
    let target = f.target();
    let image = f.image();
    let pulled: Vec<u64> = target.opens().iter().map(|&w| f.preimage(w)).collect();
    let mut report = CheckReport {
        checked: 3,
        failures: Vec::new(),
    };
    let set = |m: u64, space: &hmfree::topology::FiniteSpace| format!("{{{}}}", space.names(m).join(", "));
    if !f.is_injective() {
        report.failures.push(Failure {
            witness: "point count".into(),
            lhs: source.len().to_string(),
            rhs: format!("{} in the image", image.count_ones()),
        });
    }
    if let Some(&u) = source.opens().iter().find(|u| !pulled.contains(u)) {
        report.failures.push(Failure {
            witness: "open set not pulled back from the target".into(),
            lhs: set(u, source),
            rhs: "no open preimage".into(),
        });
    }
    if !target.is_closed_mask(image) {
        report.failures.push(Failure {
            witness: "image is not closed".into(),
            lhs: set(image, target),
            rhs: set(target.closure(image), target),
        });
    }
    Check::new(format!("closed embedding {name}"), report).details(json!({
        "injective": f.is_injective(),
        "embedding": f.is_embedding(),
        "closed_image": target.is_closed_mask(image),
    }))
}

pub fn verify_embedding(
    inst: &Instance,
    depth: usize,
    retraction: Option<&str>,
    system: Option<&str>,
    fuel: Option<u64>,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let selected: Vec<(&String, _)> = match retraction {
        Some(name) => {
            let (k, r) = inst
                .retractions
                .get_key_value(name)
                .ok_or_else(|| anyhow!("unknown retraction `{name}`"))?;
            vec![(k, r)]
        }
        None => inst.retractions.iter().collect(),
    };
    let systems = with_fuel(systems(inst, system)?, fuel);
    for (name, r) in selected {
        checks.push(Check::new(format!("retraction {name} extends hm"), single(r.violation())));
        let sig = inst.require_signature()?;
        for (sys_name, sys) in &systems {
            let rep = theorem2_pipeline(sig, r, sys.as_ref(), depth)?;
            let mut witnesses = rep.square_v.clone();
            witnesses.failures.extend(rep.main.failures.iter().cloned());
            witnesses.failures.extend(rep.retract_failure.iter().cloned());
            witnesses.checked = rep.terms_checked;
            let details = json!({
                "terms_checked": rep.terms_checked,
                "retract": rep.retract,
                "identities": rep.identities,
                "injectivity": rep.injectivity,
                "summary": rep.summary(),
            });
            checks.push(
                Check::with_verdict(format!("embedding via {name} / {sys_name}, depth {depth}"), witnesses, Some(rep.passed()))
                    .details(details),
            );
        }
    }
    for (name, f) in &inst.space_maps {
        checks.push(space_map_check(name, f));
    }
    if checks.is_empty() {
        bail!("instance has no retractions or space maps");
    }
    Ok(checks)
}

/// Evaluates each expression; file queries with an `expect` fail on mismatch.
pub fn hm_eval(inst: &Instance, exprs: &[String]) -> Result<Vec<Check>> {
    let queries: Vec<(String, Option<String>)> = if exprs.is_empty() {
        inst.queries.iter().map(|q| (q.expr.clone(), q.expect.clone())).collect()
    } else {
        exprs.iter().map(|e| (e.clone(), None)).collect()
    };
    if queries.is_empty() {
        bail!("no expressions given and the instance has no queries");
    }
    queries
        .into_iter()
        .map(|(expr, expect)| {
            let e = evaluate(inst, &expr).map_err(|err| anyhow!("`{expr}`: {err:#}"))?;
            let value = e.value.to_string();
            let mut details = json!({ "value": value });
            if let Some(m) = &e.measure {
                details["measure_outside"] = json!(m.to_string());
            }
            if let Val::Fn(f) = &e.value {
                details["pieces"] = json!(f.piece_count());
            }
            let failure = match &expect {
                Some(want) if *want != value => Some(Failure {
                    witness: match &e.measure {
                        Some(m) => format!("{expr} with measure outside V = {m}"),
                        None => expr.clone(),
                    },
                    lhs: value.clone(),
                    rhs: want.clone(),
                }),
                _ => None,
            };
            if let Some(want) = expect {
                details["expect"] = Value::String(want);
            }
            Ok(Check::new(expr, single(failure)).details(details))
        })
        .collect()
}

/// Command parameters as they enter the report and its digest.
pub fn parameters(pairs: &[(&str, Value)]) -> Value {
    Value::Object(
        pairs
            .iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
    )
}
