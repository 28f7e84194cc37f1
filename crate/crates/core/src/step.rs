//! Step functions on `[0,1)` with exact rational breakpoints.
//!
//! A `StepFn` is kept in canonical form: breakpoints strictly increase from
//! exactly 0 to exactly 1, piece `i` covers `[b_i, b_{i+1})`, and adjacent
//! pieces carry different values. Equality of step functions is equality of
//! canonical forms.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `p/q` or an integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("`{s}` is not a rational"),
    };
    let r = match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Rational::new(n, d)
        }
        None => Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?),
    };
    Ok(r)
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepFn<V> {
    breaks: Vec<Rational>,
    values: Vec<V>,
}

fn merge_runs<V: PartialEq>(breaks: Vec<Rational>, values: Vec<V>) -> StepFn<V> {
    let mut out_b = Vec::with_capacity(breaks.len());
    let mut out_v: Vec<V> = Vec::with_capacity(values.len());
    let mut bs = breaks.into_iter();
    out_b.push(bs.next().expect("at least the left endpoint"));
    for (v, b) in values.into_iter().zip(bs) {
        if out_v.last() == Some(&v) {
            *out_b.last_mut().expect("nonempty") = b;
        } else {
            out_v.push(v);
            out_b.push(b);
        }
    }
    StepFn {
        breaks: out_b,
        values: out_v,
    }
}

impl<V: PartialEq> StepFn<V> {
    /// Validates and normalizes. Adjacent equal values are merged.
    pub fn new(breaks: Vec<Rational>, values: Vec<V>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::BadStepFn(format!(
                "{} breakpoints for {} values",
                breaks.len(),
                values.len()
            )));
        }
        if !breaks[0].is_zero() || !breaks[breaks.len() - 1].is_one() {
            return Err(Error::BadStepFn(format!(
                "breakpoints must run from 0 to 1, got {} .. {}",
                breaks[0],
                breaks[breaks.len() - 1]
            )));
        }
        if let Some(w) = breaks.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::BadStepFn(format!(
                "breakpoints not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        Ok(merge_runs(breaks, values))
    }

    pub fn constant(v: V) -> Self {
        StepFn {
            breaks: vec![Rational::zero(), Rational::one()],
            values: vec![v],
        }
    }

    /// Pointwise composition `p ∘ f`, renormalized.
    pub fn map<W: PartialEq>(&self, mut p: impl FnMut(&V) -> W) -> StepFn<W> {
        merge_runs(self.breaks.clone(), self.values.iter().map(&mut p).collect())
    }

    pub fn try_map<W: PartialEq, E>(
        &self,
        mut p: impl FnMut(&V) -> std::result::Result<W, E>,
    ) -> std::result::Result<StepFn<W>, E> {
        let values = self.values.iter().map(&mut p).collect::<std::result::Result<_, _>>()?;
        Ok(merge_runs(self.breaks.clone(), values))
    }
}

impl<V> StepFn<V> {
    pub fn breakpoints(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// `(start, end, value)` for each piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&Rational, &Rational, &V)> {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (&w[0], &w[1], v))
    }

    pub fn is_constant(&self) -> bool {
        self.values.len() == 1
    }

    /// The value on the piece containing `t`; a breakpoint belongs to the
    /// piece on its right.
    pub fn value_at(&self, t: &Rational) -> Result<&V> {
        if t.is_negative() || *t >= Rational::one() {
            return Err(Error::OutOfRange(t.to_string()));
        }
        let i = self.breaks.partition_point(|b| b <= t) - 1;
        Ok(&self.values[i])
    }

    /// Exact length of `{t ∈ [a,b) : f(t) ∉ V}` where `in_v` decides membership in `V`.
    pub fn measure_outside(
        &self,
        a: &Rational,
        b: &Rational,
        mut in_v: impl FnMut(&V) -> bool,
    ) -> Result<Rational> {
        check_interval(a, b)?;
        let mut total = Rational::zero();
        for (lo, hi, v) in self.pieces() {
            if in_v(v) {
                continue;
            }
            let lo = lo.max(a);
            let hi = hi.min(b);
            if lo < hi {
                total += hi - lo;
            }
        }
        Ok(total)
    }
}

fn check_interval(a: &Rational, b: &Rational) -> Result<()> {
    if a.is_negative() || a >= b || *b > Rational::one() {
        return Err(Error::BadInterval {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    Ok(())
}

/// `t ↦ (f_1(t), ..., f_n(t))` on the common refinement of all inputs.
pub fn zip_many<V: Clone + PartialEq>(fs: &[&StepFn<V>]) -> StepFn<Vec<V>> {
    let mut breaks: Vec<Rational> = fs.iter().flat_map(|f| f.breaks.iter().cloned()).collect();
    breaks.sort();
    breaks.dedup();
    if breaks.is_empty() {
        return StepFn::constant(Vec::new());
    }
    let mut cursors = vec![0usize; fs.len()];
    let mut values = Vec::with_capacity(breaks.len() - 1);
    for start in &breaks[..breaks.len() - 1] {
        let tuple = fs
            .iter()
            .zip(cursors.iter_mut())
            .map(|(f, c)| {
                while f.breaks[*c + 1] <= *start {
                    *c += 1;
                }
                f.values[*c].clone()
            })
            .collect();
        values.push(tuple);
    }
    merge_runs(breaks, values)
}

/// Membership of `g` in the subbasic set `N(a, b, V, ε)` centred at `base`.
///
/// `base` must be constant on `[a,b)` with its value in `V`; otherwise the
/// neighbourhood is not defined and an error is returned.
pub fn in_neighborhood<V>(
    g: &StepFn<V>,
    a: &Rational,
    b: &Rational,
    mut in_v: impl FnMut(&V) -> bool,
    eps: &Rational,
    base: &StepFn<V>,
) -> Result<bool>
where
    V: PartialEq + fmt::Debug,
{
    check_interval(a, b)?;
    if !eps.is_positive() {
        return Err(Error::NonPositiveEpsilon(eps.to_string()));
    }
    let base_err = |detail: String| Error::BadNeighborhoodBase {
        a: a.to_string(),
        b: b.to_string(),
        detail,
    };
    let here = base.value_at(a)?;
    if let Some((lo, _, v)) = base.pieces().find(|(lo, hi, v)| *lo < b && *hi > a && *v != here) {
        return Err(base_err(format!("takes value {v:?} at {lo}")));
    }
    if !in_v(here) {
        return Err(base_err(format!("value {here:?} is not in V")));
    }
    Ok(g.measure_outside(a, b, in_v)? < *eps)
}

impl<V: fmt::Display> fmt::Display for StepFn<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (lo, hi, v)) in self.pieces().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "[{lo},{hi})->{v}")?;
        }
        Ok(())
    }
}

/// Parses `[0,1/2)->x; [1/2,1)->y`; `value` converts each piece's value text.
pub fn parse_stepfn<V: PartialEq>(
    text: &str,
    mut value: impl FnMut(&str) -> Result<V>,
) -> Result<StepFn<V>> {
    let mut breaks = Vec::new();
    let mut values = Vec::new();
    for (k, piece) in text.split(';').enumerate() {
        let piece = piece.trim();
        let err = |msg: &str| Error::Parse {
            pos: k,
            msg: format!("piece {k} `{piece}`: {msg}"),
        };
        let rest = piece.strip_prefix('[').ok_or_else(|| err("expected `[`"))?;
        let (interval, v) = rest.split_once(")->").ok_or_else(|| err("expected `)->`"))?;
        let (lo, hi) = interval.split_once(',').ok_or_else(|| err("expected `lo,hi`"))?;
        let lo = parse_rational(lo)?;
        let hi = parse_rational(hi)?;
        match breaks.last() {
            None => breaks.push(lo),
            Some(prev) if *prev == lo => {}
            Some(_) => return Err(err("pieces are not contiguous")),
        }
        breaks.push(hi);
        values.push(value(v.trim())?);
    }
    StepFn::new(breaks, values)
}

#[derive(Serialize, Deserialize)]
struct PieceJson<V> {
    from: String,
    to: String,
    value: V,
}

impl<V: Serialize> Serialize for StepFn<V> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.values.len()))?;
        for (lo, hi, v) in self.pieces() {
            seq.serialize_element(&PieceJson {
                from: lo.to_string(),
                to: hi.to_string(),
                value: v,
            })?;
        }
        seq.end()
    }
}

impl<'de, V: Deserialize<'de> + PartialEq> Deserialize<'de> for StepFn<V> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let pieces: Vec<PieceJson<V>> = Vec::deserialize(d)?;
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        for p in pieces {
            let lo = parse_rational(&p.from).map_err(D::Error::custom)?;
            let hi = parse_rational(&p.to).map_err(D::Error::custom)?;
            match breaks.last() {
                None => breaks.push(lo),
                Some(prev) if *prev == lo => {}
                Some(_) => return Err(D::Error::custom("pieces are not contiguous")),
            }
            breaks.push(hi);
            values.push(p.value);
        }
        StepFn::new(breaks, values).map_err(D::Error::custom)
    }
}
