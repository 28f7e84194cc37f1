//! Signatures, finite algebras and the structural predicates on them.
//!
//! An algebra here is always finite and stored extensionally: for every
//! operation label there is a table indexed by argument tuples of carrier
//! indices. Elements are opaque strings; internally they are addressed by
//! their position in the carrier.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Per-arity parameter sets. Labels are unique across the whole signature,
/// so a label alone identifies its arity.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<usize, Vec<String>>", into = "BTreeMap<usize, Vec<String>>")]
pub struct Signature {
    params: BTreeMap<usize, Vec<String>>,
    arity: HashMap<String, usize>,
}

impl Signature {
    pub fn new(raw: BTreeMap<usize, Vec<String>>) -> Result<Self> {
        validate_signature(raw)
    }

    pub fn arity_of(&self, label: &str) -> Option<usize> {
        self.arity.get(label).copied()
    }

    /// The parameter set for one arity, empty if the arity is not populated.
    pub fn labels(&self, arity: usize) -> &[String] {
        self.params.get(&arity).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All `(arity, label)` pairs, by ascending arity then declaration order.
    pub fn ops(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.params
            .iter()
            .flat_map(|(&n, ls)| ls.iter().map(move |l| (n, l.as_str())))
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.params.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }
}

impl TryFrom<BTreeMap<usize, Vec<String>>> for Signature {
    type Error = Error;

    fn try_from(raw: BTreeMap<usize, Vec<String>>) -> Result<Self> {
        validate_signature(raw)
    }
}

impl From<Signature> for BTreeMap<usize, Vec<String>> {
    fn from(sig: Signature) -> Self {
        sig.params
    }
}

/// Checks a raw `{arity: [labels]}` description.
pub fn validate_signature(raw: BTreeMap<usize, Vec<String>>) -> Result<Signature> {
    let mut arity = HashMap::new();
    for (&n, labels) in &raw {
        if labels.is_empty() {
            return Err(Error::EmptyArity { arity: n });
        }
        for l in labels {
            if arity.insert(l.clone(), n).is_some() {
                return Err(Error::DuplicateLabel { label: l.clone() });
            }
        }
    }
    Ok(Signature { params: raw, arity })
}

/// Every `n`-tuple over `0..size` in lexicographic order.
pub fn tuples(size: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if n == 0 { 1 } else { size.checked_pow(n as u32).unwrap_or(usize::MAX) };
    (0..total).map(move |mut k| {
        let mut t = vec![0; n];
        for slot in t.iter_mut().rev() {
            *slot = k % size;
            k /= size;
        }
        t
    })
}

fn tuple_index(size: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a)
}

/// A finite algebra with extensional operation tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Algebra {
    signature: Signature,
    carrier: Vec<String>,
    index: HashMap<String, usize>,
    tables: BTreeMap<String, Vec<usize>>,
}

impl Algebra {
    /// Builds an algebra by tabulating `op(label, args)` over every tuple.
    pub fn from_fn<F>(signature: Signature, carrier: Vec<String>, mut op: F) -> Result<Self>
    where
        F: FnMut(&str, &[usize]) -> usize,
    {
        let index = carrier_index(&carrier)?;
        let size = carrier.len();
        let mut tables = BTreeMap::new();
        for (n, label) in signature.ops() {
            let mut table = Vec::new();
            for args in tuples(size, n) {
                let out = op(label, &args);
                if out >= size {
                    return Err(Error::IncompleteTable {
                        label: label.to_string(),
                        detail: format!("output index {out} is outside the carrier"),
                    });
                }
                table.push(out);
            }
            tables.insert(label.to_string(), table);
        }
        Ok(Algebra {
            signature,
            carrier,
            index,
            tables,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn carrier(&self) -> &[String] {
        &self.carrier
    }

    pub fn size(&self) -> usize {
        self.carrier.len()
    }

    pub fn element(&self, i: usize) -> &str {
        &self.carrier[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn apply(&self, label: &str, args: &[usize]) -> Result<usize> {
        let n = self
            .signature
            .arity_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if n != args.len() {
            return Err(Error::ArityMismatch {
                label: label.to_string(),
                expected: n,
                got: args.len(),
            });
        }
        if let Some(&bad) = args.iter().find(|&&a| a >= self.size()) {
            return Err(Error::UnknownElement(bad.to_string()));
        }
        Ok(self.tables[label][tuple_index(self.size(), args)])
    }

    /// `apply` on element names.
    pub fn apply_named(&self, label: &str, args: &[&str]) -> Result<&str> {
        let idx = args
            .iter()
            .map(|a| self.index_of(a).ok_or_else(|| Error::UnknownElement(a.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.element(self.apply(label, &idx)?))
    }

    /// Parses `{carrier: [...], ops: {label: nested table}}`. A nullary
    /// table is the element itself; an `n`-ary table nests `n` objects
    /// keyed by element names.
    pub fn from_json(signature: Signature, value: &Value) -> Result<Self> {
        let spec: AlgebraJson =
            serde_json::from_value(value.clone()).map_err(|e| Error::Json(e.to_string()))?;
        let index = carrier_index(&spec.carrier)?;
        for label in spec.ops.keys() {
            if signature.arity_of(label).is_none() {
                return Err(Error::UnknownLabel(label.clone()));
            }
        }
        let size = spec.carrier.len();
        let mut tables = BTreeMap::new();
        for (n, label) in signature.ops() {
            let table_json = spec.ops.get(label).ok_or_else(|| Error::IncompleteTable {
                label: label.to_string(),
                detail: "no table given".into(),
            })?;
            let mut table = Vec::with_capacity(size.pow(n as u32));
            for args in tuples(size, n) {
                let mut cur = table_json;
                for &a in &args {
                    cur = cur.get(&spec.carrier[a]).ok_or_else(|| Error::IncompleteTable {
                        label: label.to_string(),
                        detail: format!("missing entry for {}", name_tuple(&spec.carrier, &args)),
                    })?;
                }
                let out = cur.as_str().ok_or_else(|| Error::IncompleteTable {
                    label: label.to_string(),
                    detail: format!("entry for {} is not an element", name_tuple(&spec.carrier, &args)),
                })?;
                let out = *index
                    .get(out)
                    .ok_or_else(|| Error::UnknownElement(out.to_string()))?;
                table.push(out);
            }
            tables.insert(label.to_string(), table);
        }
        Ok(Algebra {
            signature,
            carrier: spec.carrier,
            index,
            tables,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut ops = Map::new();
        for (n, label) in self.signature.ops() {
            let table = &self.tables[label];
            ops.insert(label.to_string(), self.nest(table, n, 0));
        }
        serde_json::json!({ "carrier": self.carrier, "ops": ops })
    }

    fn nest(&self, table: &[usize], remaining: usize, prefix: usize) -> Value {
        if remaining == 0 {
            return Value::String(self.carrier[table[prefix]].clone());
        }
        let mut obj = Map::new();
        for (i, name) in self.carrier.iter().enumerate() {
            obj.insert(
                name.clone(),
                self.nest(table, remaining - 1, prefix * self.size() + i),
            );
        }
        Value::Object(obj)
    }
}

#[derive(Deserialize)]
struct AlgebraJson {
    carrier: Vec<String>,
    #[serde(default)]
    ops: BTreeMap<String, Value>,
}

fn carrier_index(carrier: &[String]) -> Result<HashMap<String, usize>> {
    if carrier.is_empty() {
        return Err(Error::EmptyCarrier);
    }
    let mut index = HashMap::with_capacity(carrier.len());
    for (i, c) in carrier.iter().enumerate() {
        if index.insert(c.clone(), i).is_some() {
            return Err(Error::DuplicateElement(c.clone()));
        }
    }
    Ok(index)
}

fn name_tuple(carrier: &[String], args: &[usize]) -> String {
    let names: Vec<&str> = args.iter().map(|&a| carrier[a].as_str()).collect();
    format!("({})", names.join(","))
}

/// A total function between finite carriers, stored by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarrierMap {
    domain: Vec<String>,
    codomain: Vec<String>,
    table: Vec<usize>,
}

impl CarrierMap {
    /// Builds a map from `{from: to}` pairs; every domain element needs an image.
    pub fn new(
        domain: &[String],
        codomain: &[String],
        pairs: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let dom = carrier_index(domain)?;
        let cod = carrier_index(codomain)?;
        if let Some(k) = pairs.keys().find(|k| !dom.contains_key(*k)) {
            return Err(Error::UnknownElement(k.clone()));
        }
        let table = domain
            .iter()
            .map(|d| {
                let to = pairs.get(d).ok_or_else(|| Error::PartialMap(d.clone()))?;
                cod.get(to)
                    .copied()
                    .ok_or_else(|| Error::UnknownElement(to.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CarrierMap {
            domain: domain.to_vec(),
            codomain: codomain.to_vec(),
            table,
        })
    }

    pub fn from_indices(domain: &[String], codomain: &[String], table: Vec<usize>) -> Result<Self> {
        carrier_index(domain)?;
        carrier_index(codomain)?;
        if table.len() != domain.len() {
            return Err(Error::PartialMap(format!(
                "table has {} entries for {} elements",
                table.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= codomain.len()) {
            return Err(Error::UnknownElement(bad.to_string()));
        }
        Ok(CarrierMap {
            domain: domain.to_vec(),
            codomain: codomain.to_vec(),
            table,
        })
    }

    pub fn identity(carrier: &[String]) -> Result<Self> {
        Self::from_indices(carrier, carrier, (0..carrier.len()).collect())
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn codomain(&self) -> &[String] {
        &self.codomain
    }

    pub fn image_index(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        let i = self.domain.iter().position(|d| d == name)?;
        Some(&self.codomain[self.table[i]])
    }

    pub fn pairs(&self) -> BTreeMap<String, String> {
        self.domain
            .iter()
            .zip(&self.table)
            .map(|(d, &t)| (d.clone(), self.codomain[t].clone()))
            .collect()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &CarrierMap) -> Result<CarrierMap> {
        if self.codomain != other.domain {
            return Err(Error::SignatureMismatch);
        }
        let table = self.table.iter().map(|&t| other.table[t]).collect();
        Ok(CarrierMap {
            domain: self.domain.clone(),
            codomain: other.codomain.clone(),
            table,
        })
    }
}

/// A failed instance of the homomorphism equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomViolation {
    pub label: String,
    pub args: Vec<String>,
    /// `e^B(c, h(x_1), ..., h(x_n))`
    pub lhs: String,
    /// `h(e^A(c, x_1, ..., x_n))`
    pub rhs: String,
}

fn check_map_fits(h: &CarrierMap, a: &Algebra, b: &Algebra) -> Result<()> {
    if a.signature != b.signature {
        return Err(Error::SignatureMismatch);
    }
    if h.domain != a.carrier {
        return Err(Error::UnknownElement(format!(
            "map domain does not match the source carrier {:?}",
            a.carrier
        )));
    }
    if h.codomain != b.carrier {
        return Err(Error::UnknownElement(format!(
            "map codomain does not match the target carrier {:?}",
            b.carrier
        )));
    }
    Ok(())
}

/// First tuple at which `h` fails to commute with an operation, scanning
/// operations in signature order and tuples lexicographically.
pub fn find_hom_violation(h: &CarrierMap, a: &Algebra, b: &Algebra) -> Result<Option<HomViolation>> {
    check_map_fits(h, a, b)?;
    for (n, label) in a.signature.ops() {
        for args in tuples(a.size(), n) {
            let mapped: Vec<usize> = args.iter().map(|&x| h.table[x]).collect();
            let lhs = b.apply(label, &mapped)?;
            let rhs = h.table[a.apply(label, &args)?];
            if lhs != rhs {
                return Ok(Some(HomViolation {
                    label: label.to_string(),
                    args: args.iter().map(|&x| a.carrier[x].clone()).collect(),
                    lhs: b.carrier[lhs].clone(),
                    rhs: b.carrier[rhs].clone(),
                }));
            }
        }
    }
    Ok(None)
}

pub fn is_homomorphism(h: &CarrierMap, a: &Algebra, b: &Algebra) -> Result<bool> {
    Ok(find_hom_violation(h, a, b)?.is_none())
}

fn subset_indices(a: &Algebra, subset: &[String]) -> Result<BTreeSet<usize>> {
    subset
        .iter()
        .map(|s| a.index_of(s).ok_or_else(|| Error::UnknownElement(s.clone())))
        .collect()
}

pub fn is_subalgebra(a: &Algebra, subset: &[String]) -> Result<bool> {
    let s = subset_indices(a, subset)?;
    let members: Vec<usize> = s.iter().copied().collect();
    for (n, label) in a.signature.ops() {
        for t in tuples(members.len(), n) {
            let args: Vec<usize> = t.iter().map(|&i| members[i]).collect();
            if !s.contains(&a.apply(label, &args)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The subalgebra on `subset`, with elements kept in carrier order.
pub fn subalgebra(a: &Algebra, subset: &[String]) -> Result<Option<Algebra>> {
    if !is_subalgebra(a, subset)? {
        return Ok(None);
    }
    let members: Vec<usize> = subset_indices(a, subset)?.into_iter().collect();
    let carrier: Vec<String> = members.iter().map(|&m| a.carrier[m].clone()).collect();
    let back: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    Algebra::from_fn(a.signature.clone(), carrier, |label, args| {
        let lifted: Vec<usize> = args.iter().map(|&i| members[i]).collect();
        back[&a.apply(label, &lifted).expect("validated label")]
    })
    .map(Some)
}

fn product_name(factors: &[&Algebra], digits: &[usize]) -> String {
    let parts: Vec<&str> = factors
        .iter()
        .zip(digits)
        .map(|(f, &d)| f.element(d))
        .collect();
    format!("({})", parts.join(","))
}

fn product_digits(factors: &[&Algebra], mut k: usize) -> Vec<usize> {
    let mut digits = vec![0; factors.len()];
    for (slot, f) in digits.iter_mut().zip(factors).rev() {
        *slot = k % f.size();
        k /= f.size();
    }
    digits
}

fn product_carrier(factors: &[&Algebra]) -> Vec<String> {
    let total: usize = factors.iter().map(|f| f.size()).product();
    (0..total)
        .map(|k| product_name(factors, &product_digits(factors, k)))
        .collect()
}

/// Cartesian product with componentwise operations. Elements are named
/// `(a,b,...)` and ordered lexicographically by factor index.
pub fn product_algebra(factors: &[&Algebra]) -> Result<Algebra> {
    let first = factors.first().ok_or(Error::EmptyProduct)?;
    if factors.iter().any(|f| f.signature != first.signature) {
        return Err(Error::SignatureMismatch);
    }
    let carrier = product_carrier(factors);
    let index_of = |digits: &[usize]| {
        digits
            .iter()
            .zip(factors)
            .fold(0, |acc, (&d, f)| acc * f.size() + d)
    };
    Algebra::from_fn(first.signature.clone(), carrier, |label, args| {
        let split: Vec<Vec<usize>> = args.iter().map(|&a| product_digits(factors, a)).collect();
        let out: Vec<usize> = factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let comp: Vec<usize> = split.iter().map(|d| d[i]).collect();
                f.apply(label, &comp).expect("validated label")
            })
            .collect();
        index_of(&out)
    })
}

/// The `i`-th projection out of `product_algebra(factors)`.
pub fn product_projection(factors: &[&Algebra], i: usize) -> Result<CarrierMap> {
    let target = factors.get(i).ok_or(Error::EmptyProduct)?;
    let carrier = product_carrier(factors);
    let table = (0..carrier.len())
        .map(|k| product_digits(factors, k)[i])
        .collect();
    CarrierMap::from_indices(&carrier, target.carrier(), table)
}

/// `x ↦ (x, x)` into the square of `a`.
pub fn diagonal(a: &Algebra) -> Result<CarrierMap> {
    let carrier = product_carrier(&[a, a]);
    let table = (0..a.size()).map(|x| x * a.size() + x).collect();
    CarrierMap::from_indices(a.carrier(), &carrier, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(entries: &[(usize, &[&str])]) -> Result<Signature> {
        validate_signature(
            entries
                .iter()
                .map(|(n, ls)| (*n, ls.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
    }

    fn monoid_sig() -> Signature {
        sig(&[(2, &["m"]), (0, &["u"])]).unwrap()
    }

    fn z(n: usize) -> Algebra {
        let carrier = (0..n).map(|i| i.to_string()).collect();
        Algebra::from_fn(monoid_sig(), carrier, |label, args| match label {
            "m" => (args[0] + args[1]) % n,
            _ => 0,
        })
        .unwrap()
    }

    fn map(a: &Algebra, b: &Algebra, f: impl Fn(usize) -> usize) -> CarrierMap {
        CarrierMap::from_indices(a.carrier(), b.carrier(), (0..a.size()).map(f).collect()).unwrap()
    }

    #[test]
    fn signature_validation() {
        let s = monoid_sig();
        assert_eq!(s.arity_of("m"), Some(2));
        assert_eq!(s.arity_of("u"), Some(0));
        assert_eq!(
            sig(&[(2, &["m", "m"])]),
            Err(Error::DuplicateLabel { label: "m".into() })
        );
        assert_eq!(sig(&[(1, &[])]), Err(Error::EmptyArity { arity: 1 }));
        assert!(sig(&[]).unwrap().is_empty());
    }

    #[test]
    fn signature_json_keys_are_arities() {
        let s: Signature = serde_json::from_str(r#"{"2":["m"],"0":["u"]}"#).unwrap();
        assert_eq!(s, monoid_sig());
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Signature>(&back).unwrap(), s);
        assert!(serde_json::from_str::<Signature>(r#"{"2":["m","m"]}"#).is_err());
    }

    #[test]
    fn homomorphisms_on_z5() {
        let a = z(5);
        assert!(is_homomorphism(&CarrierMap::identity(a.carrier()).unwrap(), &a, &a).unwrap());
        assert!(is_homomorphism(&map(&a, &a, |_| 0), &a, &a).unwrap());
        let shift = map(&a, &a, |x| (x + 1) % 5);
        // nullary operations come first: h(u) = 1 but u = 0
        let v = find_hom_violation(&shift, &a, &a).unwrap().unwrap();
        assert_eq!(v.label, "u");
        assert_eq!((v.lhs.as_str(), v.rhs.as_str()), ("0", "1"));
        // h(0) + h(0) = 2 while h(0 + 0) = 1
        let m = |x, y| a.apply("m", &[x, y]).unwrap();
        assert_eq!(m(shift.image_index(0), shift.image_index(0)), 2);
        assert_eq!(shift.image_index(m(0, 0)), 1);
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let a = z(2);
        let other = Algebra::from_fn(sig(&[(1, &["s"])]).unwrap(), a.carrier().to_vec(), |_, x| x[0]).unwrap();
        let id = CarrierMap::identity(a.carrier()).unwrap();
        assert_eq!(is_homomorphism(&id, &a, &other), Err(Error::SignatureMismatch));
    }

    #[test]
    fn subalgebras_of_z5() {
        let a = z(5);
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!(is_subalgebra(&a, &s(&["0"])).unwrap());
        assert!(!is_subalgebra(&a, &s(&["0", "1"])).unwrap());
        assert!(is_subalgebra(&a, a.carrier()).unwrap());
        assert!(matches!(is_subalgebra(&a, &s(&["7"])), Err(Error::UnknownElement(_))));
        // {0} without the unit is not closed either
        assert!(!is_subalgebra(&a, &s(&["3"])).unwrap());
        let sub = subalgebra(&a, &s(&["0"])).unwrap().unwrap();
        assert_eq!(sub.size(), 1);
    }

    #[test]
    fn products() {
        let z2 = z(2);
        let z3 = z(3);
        let sq = product_algebra(&[&z2, &z2]).unwrap();
        assert_eq!(sq.size(), 4);
        assert_eq!(sq.apply_named("m", &["(1,0)", "(1,1)"]).unwrap(), "(0,1)");
        let p = product_algebra(&[&z2, &z3]).unwrap();
        assert_eq!(p.size(), 6);
        assert_eq!(p.apply_named("m", &["(1,2)", "(1,2)"]).unwrap(), "(0,1)");
        let single = product_algebra(&[&z3]).unwrap();
        assert_eq!(single.carrier(), &["(0)", "(1)", "(2)"]);
        assert_eq!(single.apply_named("m", &["(2)", "(2)"]).unwrap(), "(1)");
        assert_eq!(product_algebra(&[]), Err(Error::EmptyProduct));
        for i in 0..2 {
            let pi = product_projection(&[&z2, &z3], i).unwrap();
            let target = if i == 0 { &z2 } else { &z3 };
            assert!(is_homomorphism(&pi, &p, target).unwrap());
        }
        assert!(is_homomorphism(&diagonal(&z3).unwrap(), &z3, &product_algebra(&[&z3, &z3]).unwrap()).unwrap());
    }

    #[test]
    fn algebra_json_round_trip() {
        let a = product_algebra(&[&z(2), &z(3)]).unwrap();
        let json = a.to_json();
        let back = Algebra::from_json(monoid_sig(), &json).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn incomplete_tables_are_rejected() {
        let json = serde_json::json!({"carrier": ["a", "b"], "ops": {"m": {"a": {"a": "a"}}, "u": "a"}});
        assert!(matches!(
            Algebra::from_json(monoid_sig(), &json),
            Err(Error::IncompleteTable { .. })
        ));
        let json = serde_json::json!({"carrier": ["a"], "ops": {"m": {"a": {"a": "z"}}, "u": "a"}});
        assert!(matches!(Algebra::from_json(monoid_sig(), &json), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn tuple_enumeration() {
        assert_eq!(tuples(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        let all: Vec<_> = tuples(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
