#![allow(dead_code)]

use std::collections::BTreeMap;

use hmfree::rewrite::RewriteSystem;
use hmfree::signature::{Algebra, Signature};
use hmfree::term::GeneratorSet;

pub const MONOID_RULES: [&str; 3] = [
    "vars: a,b,c; m(m(a,b),c) -> m(a,m(b,c))",
    "vars: a; m(u(),a) -> a",
    "vars: a; m(a,u()) -> a",
];

/// Commutative monoid on the generators x < y: associate to the right,
/// drop units, and bubble x in front of y.
pub const COMM_MONOID_RULES: [&str; 5] = [
    "vars: a,b,c; m(m(a,b),c) -> m(a,m(b,c))",
    "vars: a; m(u(),a) -> a",
    "vars: a; m(a,u()) -> a",
    "m(y,x) -> m(x,y)",
    "vars: a; m(y,m(x,a)) -> m(x,m(y,a))",
];

pub fn monoid_sig() -> Signature {
    Signature::new(BTreeMap::from([
        (2, vec!["m".to_string()]),
        (0, vec!["u".to_string()]),
    ]))
    .unwrap()
}

/// Binary, unary and nullary operations.
pub fn rich_sig() -> Signature {
    Signature::new(BTreeMap::from([
        (2, vec!["m".to_string()]),
        (1, vec!["s".to_string()]),
        (0, vec!["u".to_string()]),
    ]))
    .unwrap()
}

pub fn monoid() -> RewriteSystem {
    RewriteSystem::parse(monoid_sig(), &MONOID_RULES).unwrap()
}

pub fn comm_monoid() -> RewriteSystem {
    RewriteSystem::parse(monoid_sig(), &COMM_MONOID_RULES).unwrap()
}

pub fn gens(xs: &[&str]) -> GeneratorSet {
    GeneratorSet::new(xs.iter().copied()).unwrap()
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

pub fn z(n: usize) -> Algebra {
    Algebra::from_fn(monoid_sig(), names(n), |l, a| if l == "m" { (a[0] + a[1]) % n } else { 0 }).unwrap()
}

/// Algebra over `sig` whose tables are read off `seed` cyclically.
pub fn table_algebra(sig: &Signature, size: usize, seed: &[usize]) -> Algebra {
    let mut k = 0;
    Algebra::from_fn(sig.clone(), names(size), |_, _| {
        let v = seed[k % seed.len()] % size;
        k += 1;
        v
    })
    .unwrap()
}

/// Words reachable by concatenation within `depth` rounds, starting from the
/// empty word and single letters. Independent of terms and rewriting.
pub fn word_classes(letters: &[char], depth: usize, commutative: bool) -> usize {
    use std::collections::BTreeSet;
    let canon = |w: String| {
        if commutative {
            let mut cs: Vec<char> = w.chars().collect();
            cs.sort();
            cs.into_iter().collect()
        } else {
            w
        }
    };
    let mut words: BTreeSet<String> = std::iter::once(String::new())
        .chain(letters.iter().map(|c| c.to_string()))
        .collect();
    for _ in 0..depth {
        let prev: Vec<String> = words.iter().cloned().collect();
        for a in &prev {
            for b in &prev {
                words.insert(canon(format!("{a}{b}")));
            }
        }
    }
    words.len()
}
