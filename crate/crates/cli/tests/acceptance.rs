//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

use hmfree::embedding::{build_retraction_uniform, lemma1_exhaustive, theorem2_pipeline};
use hmfree::hm::{check_embedding_homomorphism, check_h_identity, hm_embed};
use hmfree::rewrite::RewriteSystem;
use hmfree::signature::{tuples, Algebra, CarrierMap, Signature};
use hmfree::step::{in_neighborhood, rat, Rational, StepFn};
use hmfree::term::{enumerate_terms, free_extension, GeneratorSet, Term};
use hmfree::topology::{enumerate_topologies, validate_space, ContinuousMap, FiniteSpace, Mask};
use hmfree_cli::instance::Instance;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn sig(arities: &[(usize, &str)]) -> Signature {
    let mut raw: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for &(n, l) in arities {
        raw.entry(n).or_default().push(l.to_string());
    }
    Signature::new(raw).unwrap()
}

fn gens(xs: &[&str]) -> GeneratorSet {
    GeneratorSet::new(xs.iter().copied()).unwrap()
}

const MONOID: [&str; 3] = [
    "vars: a,b,c; m(m(a,b),c) -> m(a,m(b,c))",
    "vars: a; m(u(),a) -> a",
    "vars: a; m(a,u()) -> a",
];

const COMM: [&str; 2] = ["m(y,x) -> m(x,y)", "vars: a; m(y,m(x,a)) -> m(x,m(y,a))"];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sig = sig(&[(2, "m"), (1, "s"), (0, "u")]);
    let xs = gens(&["x", "y"]);
    let mut rng = StdRng::seed_from_u64(1);
    let small = enumerate_terms(&sig, xs.elements(), 2);
    let mut equations = 0usize;
    for pair in 0..50 {
        let size = rng.gen_range(1..=5);
        let carrier: Vec<String> = (0..size).map(|i| format!("k{i}")).collect();
        let k = Algebra::from_fn(sig.clone(), carrier.clone(), |_, _| rng.gen_range(0..size)).unwrap();
        let f = CarrierMap::from_indices(xs.elements(), &carrier, (0..2).map(|_| rng.gen_range(0..size)).collect())
            .unwrap();
        let ext = free_extension(&f, &k).map_err(|e| e.to_string())?;
        for x in xs.elements() {
            let got = ext.eval_named(&Term::Gen(x.clone())).unwrap();
            ensure(Some(got) == f.get(x), || format!("pair {pair}: extension differs from f at {x}"))?;
        }
        // an independent evaluator obeying the recursion, tabulated on terms of depth <= 2
        let mut oracle: HashMap<&Term<String>, usize> = HashMap::new();
        for t in &small {
            let v = match t {
                Term::Gen(x) => f.image_index(f.domain().iter().position(|d| d == x).unwrap()),
                Term::Op { label, args } => {
                    let vs: Vec<usize> = args.iter().map(|a| oracle[a]).collect();
                    k.apply(label, &vs).unwrap()
                }
            };
            oracle.insert(t, v);
        }
        let values: Vec<usize> = small.iter().map(|t| oracle[t]).collect();
        // every term of depth <= 3 beyond the generators is an operation applied
        // to terms of depth <= 2: the homomorphism equation at each of them, with
        // the oracle on the right, checks existence and uniqueness together
        for (n, label) in sig.ops() {
            for args in tuples(small.len(), n) {
                let t = Term::op(label, args.iter().map(|&i| small[i].clone()).collect());
                let vs: Vec<usize> = args.iter().map(|&i| values[i]).collect();
                equations += 1;
                ensure(ext.eval(&t).unwrap() == k.apply(label, &vs).unwrap(), || {
                    format!("pair {pair}: equation or uniqueness fails at {t}")
                })?;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1}s, budget 10s"))?;
    Ok(format!("50 pairs, {equations} equations up to depth 3, {secs:.1}s"))
}

fn shipped_instances() -> Vec<(String, Instance)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, Instance::load(&p).unwrap().0)
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let mut algebras = 0;
    let mut checked = 0;
    for (file, inst) in shipped_instances() {
        for (name, a) in &inst.algebras {
            let r = check_embedding_homomorphism(a).map_err(|e| e.to_string())?;
            let expected: usize = a.signature().ops().map(|(n, _)| a.size().pow(n as u32)).sum();
            ensure(r.checked == expected, || format!("{file}/{name}: {} of {expected} tuples", r.checked))?;
            ensure(r.passed(), || format!("{file}/{name}: {:?}", r.first_failure()))?;
            algebras += 1;
            checked += r.checked;
        }
    }
    ensure(algebras >= 5, || format!("only {algebras} shipped algebras"))?;
    Ok(format!("{algebras} algebras, {checked} operation tuples, 0 failures"))
}

fn random_stepfn(rng: &mut StdRng, alphabet: &[&str]) -> StepFn<String> {
    let den = rng.gen_range(2..=24i64);
    let cuts: BTreeSet<i64> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(1..den)).collect();
    let mut breaks = vec![rat(0, 1)];
    breaks.extend(cuts.iter().map(|&c| rat(c, den)));
    breaks.push(rat(1, 1));
    let values = (1..breaks.len())
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())].to_string())
        .collect();
    StepFn::new(breaks, values).unwrap()
}

fn criterion_3() -> Outcome {
    let alphabet = ["p", "q", "r", "s"];
    let mut rng = StdRng::seed_from_u64(3);
    let mut boundaries = 0;
    for i in 0..200 {
        let f = random_stepfn(&mut rng, &alphabet);
        let mut pts: Vec<i64> = Vec::new();
        while pts.len() < 3 {
            let p = rng.gen_range(0..=120);
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        pts.sort();
        let (a, b, c) = (rat(pts[0], 120), rat(pts[1], 120), rat(pts[2], 120));
        let v: BTreeSet<&str> = alphabet.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let in_v = |x: &String| v.contains(x.as_str());
        let whole = f.measure_outside(&a, &c, in_v).unwrap();
        let split = f.measure_outside(&a, &b, in_v).unwrap() + f.measure_outside(&b, &c, in_v).unwrap();
        ensure(whole == split, || format!("#{i}: additivity {whole} != {split} for {f}"))?;
        let inside = f.measure_outside(&a, &c, |x| !in_v(x)).unwrap();
        ensure(&whole + &inside == &c - &a, || format!("#{i}: complement fails for {f}"))?;

        let Some(center) = v.iter().next() else { continue };
        let base = hm_embed(center.to_string());
        let m = f.measure_outside(&a, &c, in_v).unwrap();
        let tiny = rat(1, 1_000_000_007);
        if m > Rational::from_integer(0.into()) {
            boundaries += 1;
            ensure(!in_neighborhood(&f, &a, &c, in_v, &m, &base).unwrap(), || {
                format!("#{i}: eps equal to the measure {m} must be excluded")
            })?;
        }
        ensure(in_neighborhood(&f, &a, &c, in_v, &(&m + &tiny), &base).unwrap(), || {
            format!("#{i}: eps just above {m} must be included")
        })?;
    }
    let g = StepFn::new(vec![rat(0, 1), rat(1, 2), rat(1, 1)], vec!["p".to_string(), "q".to_string()]).unwrap();
    let p = |x: &String| x == "p";
    let base = hm_embed("p".to_string());
    ensure(in_neighborhood(&g, &rat(0, 1), &rat(1, 1), p, &rat(3, 5), &base).unwrap(), || "3/5 example".into())?;
    ensure(!in_neighborhood(&g, &rat(0, 1), &rat(1, 1), p, &rat(1, 2), &base).unwrap(), || "1/2 boundary".into())?;
    Ok(format!("200 step functions exact, {boundaries} boundary cases strict"))
}

/// Words over `letters` reachable by at most `depth` rounds of concatenation.
fn words(letters: &[&str], depth: usize, commutative: bool) -> usize {
    let norm = |w: String| -> String {
        if commutative {
            let mut c: Vec<char> = w.chars().collect();
            c.sort_unstable();
            c.into_iter().collect()
        } else {
            w
        }
    };
    let mut level: BTreeSet<String> = letters.iter().map(|s| s.to_string()).collect();
    level.insert(String::new());
    for _ in 0..depth {
        let prev = level.clone();
        for u in &prev {
            for w in &prev {
                level.insert(norm(format!("{u}{w}")));
            }
        }
    }
    level.len()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let sig = sig(&[(2, "m"), (0, "u")]);
    let comm_rules: Vec<&str> = MONOID.iter().chain(COMM.iter()).copied().collect();
    let systems: Vec<(&str, Option<RewriteSystem>, bool)> = vec![
        ("free", None, false),
        ("monoid", Some(RewriteSystem::parse(sig.clone(), &MONOID).unwrap()), false),
        ("comm-monoid", Some(RewriteSystem::parse(sig.clone(), &comm_rules).unwrap()), true),
    ];
    let cases: [(&[&str], &[&str]); 2] = [(&["x"], &["x", "y"]), (&["x", "y"], &["x", "y"])];
    let mut counts = Vec::new();
    for (name, system, commutative) in &systems {
        for (x, y) in cases {
            let (xs, ys) = (gens(x), gens(y));
            for g in [&xs, &ys] {
                let r = check_h_identity(&sig, g, 3, system.as_ref()).map_err(|e| e.to_string())?;
                ensure(r.passed(), || format!("{name}: h identity fails at {:?}", r.first_failure()))?;
            }
            let r = build_retraction_uniform(&xs, &ys).unwrap();
            let rep = theorem2_pipeline(&sig, &r, system.as_ref(), 3).map_err(|e| e.to_string())?;
            ensure(rep.passed(), || format!("{name} X={x:?} Y={y:?}:\n{}", rep.summary()))?;
            let inj = &rep.injectivity;
            let (want_x, want_y) = match system {
                Some(_) => (words(x, 3, *commutative), words(y, 3, *commutative)),
                None => (rep.terms_checked, enumerate_terms(&sig, ys.elements(), 3).len()),
            };
            ensure(
                (inj.domain_classes, inj.image_classes, inj.codomain_classes) == (want_x, want_x, want_y),
                || {
                    format!(
                        "{name} X={x:?}: classes {}/{}/{} expected {want_x}/{want_x}/{want_y}",
                        inj.domain_classes, inj.image_classes, inj.codomain_classes
                    )
                },
            )?;
            if x.len() == 1 {
                counts.push(format!("{name} {want_x}->{want_y}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s, budget 60s"))?;
    Ok(format!("6 fixtures at depth 3, classes {}, {secs:.1}s", counts.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut total = 0;
    for a in 1..=4 {
        for b in 1..=4 {
            for c in 1..=4 {
                let (checked, counterexample) = lemma1_exhaustive(a, b, c);
                ensure(counterexample.is_none(), || format!("{a},{b},{c}: {counterexample:?}"))?;
                ensure(checked == b.pow(a as u32) * c.pow(b as u32), || format!("{a},{b},{c}: {checked} pairs"))?;
                total += checked;
            }
        }
    }
    Ok(format!("{total} function pairs, 0 exceptions"))
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn criterion_6() -> Outcome {
    let s = validate_space(names(&["a", "b"]), vec![vec![], names(&["a"]), names(&["a", "b"])])
        .map_err(|e| e.to_string())?;
    ensure(s.is_closed(&names(&["b"])).unwrap(), || "{b} should be closed".into())?;
    ensure(!s.is_closed(&names(&["a"])).unwrap(), || "{a} should not be closed".into())?;
    let point = |p: &str| FiniteSpace::discrete(names(&[p]));
    let pairs = |p: &str| BTreeMap::from([(p.to_string(), p.to_string())]);
    let incl_b = ContinuousMap::from_names(point("b"), s.clone(), &pairs("b")).unwrap();
    let incl_a = ContinuousMap::from_names(point("a"), s.clone(), &pairs("a")).unwrap();
    ensure(incl_b.is_closed_embedding(), || "{b} -> S should be a closed embedding".into())?;
    ensure(incl_a.is_embedding() && !incl_a.is_closed_embedding(), || "{a} -> S is an embedding, not closed".into())?;

    // independent brute force over all families of subsets of 3 points
    let pts = names(&["a", "b", "c"]);
    let mut brute: BTreeSet<BTreeSet<Mask>> = BTreeSet::new();
    for family in 0u32..256 {
        let opens: BTreeSet<Mask> = (0..8u64).filter(|s| family >> s & 1 == 1).collect();
        let closed = opens.contains(&0)
            && opens.contains(&7)
            && opens.iter().all(|&u| opens.iter().all(|&w| opens.contains(&(u | w)) && opens.contains(&(u & w))));
        if closed {
            brute.insert(opens);
        }
    }
    let spaces = enumerate_topologies(&pts);
    let found: BTreeSet<BTreeSet<Mask>> = spaces.iter().map(|t| t.opens().clone()).collect();
    ensure(brute.len() == 29 && found == brute, || format!("{} brute vs {} enumerated", brute.len(), found.len()))?;
    for t in &spaces {
        for m in 0..8 {
            let c = t.closure(m);
            ensure(c & m == m && t.closure(c) == c && t.is_closed_mask(c), || {
                format!("closure of {m:03b} in {:?}", t.opens())
            })?;
        }
    }
    Ok("Sierpinski examples hold, 29 topologies on 3 points, axioms and closures verified".into())
}

struct Run {
    label: String,
    status: i32,
    stdout: String,
}

/// The full CLI suite: every command on every fixture it applies to.
const SUITE: &[(&str, &str, &[&str], i32)] = &[
    ("check-hom", "z5.json", &[], 0),
    ("check-hom", "monoid.json", &[], 0),
    ("check-hom", "non-homomorphism.json", &[], 1),
    ("free-extend", "monoid.json", &["--map", "g", "--term", "m(x,m(y,u()))", "--system", "monoid", "--depth", "2"], 0),
    ("verify-diagrams", "monoid.json", &["--depth", "2"], 0),
    ("verify-diagrams", "monoid.json", &["--depth", "0"], 0),
    ("verify-diagrams", "comm-monoid.json", &["--depth", "2"], 0),
    ("verify-diagrams", "z5.json", &[], 0),
    ("verify-diagrams", "non-associative-model.json", &[], 1),
    ("verify-embedding", "free.json", &[], 0),
    ("verify-embedding", "monoid.json", &[], 0),
    ("verify-embedding", "comm-monoid.json", &[], 0),
    ("verify-embedding", "x-equals-y.json", &["--depth", "2"], 0),
    ("verify-embedding", "metric.json", &["--depth", "2"], 0),
    ("verify-embedding", "sierpinski.json", &[], 0),
    ("verify-embedding", "broken-retraction.json", &[], 1),
    ("verify-embedding", "not-closed.json", &[], 1),
    ("hm-eval", "measure.json", &[], 0),
    ("hm-eval", "eps-boundary.json", &[], 1),
];

fn run_suite() -> Vec<Run> {
    SUITE
        .iter()
        .map(|(cmd, file, args, _)| {
            let out = Command::new(env!("CARGO_BIN_EXE_hmfree"))
                .arg(cmd)
                .arg("--file")
                .arg(fixtures().join(file))
                .args(*args)
                .env_remove("HMFREE_DEPTH")
                .env_remove("HMFREE_FUEL")
                .output()
                .expect("binary runs");
            Run {
                label: format!("{cmd} {file} {}", args.join(" ")),
                status: out.status.code().unwrap_or(-1),
                stdout: String::from_utf8(out.stdout).unwrap(),
            }
        })
        .collect()
}

fn criterion_7(runs: &[Run]) -> Outcome {
    let mut controls = Vec::new();
    for ((_, file, _, expected), run) in SUITE.iter().zip(runs) {
        ensure(run.status == *expected, || format!("{}: exit {} expected {expected}", run.label, run.status))?;
        if *expected == 0 {
            continue;
        }
        let report: Value = serde_json::from_str(&run.stdout).map_err(|e| format!("{}: {e}", run.label))?;
        let witnessed = report["checks"].as_array().unwrap().iter().any(|c| {
            c["status"] == "fail" && c["failures"].as_array().is_some_and(|f| !f.is_empty() && f[0]["witness"].is_string())
        });
        ensure(witnessed && report["exit_status"] == 1, || format!("{}: no failure witness", run.label))?;
        controls.push(file.trim_end_matches(".json").to_string());
    }
    Ok(format!("{} negative controls fail with witnesses: {}", controls.len(), controls.join(", ")))
}

fn criterion_8(first: &[Run]) -> Outcome {
    let second = run_suite();
    for (a, b) in first.iter().zip(&second) {
        ensure(a.stdout == b.stdout && a.status == b.status, || format!("{} differs between runs", a.label))?;
        ensure(!a.stdout.is_empty(), || format!("{} produced no report", a.label))?;
    }
    Ok(format!("{} commands byte-identical across two runs", first.len()))
}

fn main() {
    let runs = run_suite();
    let criteria: Vec<Criterion> = vec![
        ("universal property", Box::new(criterion_1)),
        ("constant embedding is a homomorphism", Box::new(criterion_2)),
        ("step-function measure and neighbourhoods", Box::new(criterion_3)),
        ("factorization through HM(F(X))", Box::new(criterion_4)),
        ("injectivity of composites", Box::new(criterion_5)),
        ("finite topologies", Box::new(criterion_6)),
        ("negative controls", Box::new(|| criterion_7(&runs))),
        ("determinism", Box::new(|| criterion_8(&runs))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
