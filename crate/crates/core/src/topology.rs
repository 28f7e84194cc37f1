//! Finite topological spaces, continuous maps and closed embeddings.
//!
//! Subsets are bitmasks over the point list, so spaces hold at most 64 points.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mask = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceJson", into = "SpaceJson")]
pub struct FiniteSpace {
    points: Vec<String>,
    opens: BTreeSet<Mask>,
}

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    points: Vec<String>,
    opens: Vec<Vec<String>>,
}

impl TryFrom<SpaceJson> for FiniteSpace {
    type Error = Error;

    fn try_from(j: SpaceJson) -> Result<Self> {
        validate_space(j.points, j.opens)
    }
}

impl From<FiniteSpace> for SpaceJson {
    fn from(s: FiniteSpace) -> Self {
        let opens = s.opens.iter().map(|&m| s.names(m)).collect();
        SpaceJson {
            points: s.points,
            opens,
        }
    }
}

fn full_mask(n: usize) -> Mask {
    if n == 64 {
        Mask::MAX
    } else {
        (1 << n) - 1
    }
}

/// Validates a space given by named points and named open sets.
pub fn validate_space(points: Vec<String>, opens: Vec<Vec<String>>) -> Result<FiniteSpace> {
    if points.len() > 64 {
        return Err(Error::BadTopology("more than 64 points".into()));
    }
    let mut seen = BTreeSet::new();
    if let Some(p) = points.iter().find(|p| !seen.insert(p.as_str())) {
        return Err(Error::DuplicateElement(p.clone()));
    }
    let masks = opens
        .iter()
        .map(|o| {
            o.iter().try_fold(0, |m, p| {
                let i = points
                    .iter()
                    .position(|q| q == p)
                    .ok_or_else(|| Error::UnknownElement(p.clone()))?;
                Ok(m | 1 << i)
            })
        })
        .collect::<Result<Vec<Mask>>>()?;
    FiniteSpace::from_masks(points, masks)
}

impl FiniteSpace {
    pub fn from_masks(points: Vec<String>, opens: impl IntoIterator<Item = Mask>) -> Result<Self> {
        let full = full_mask(points.len());
        let opens: BTreeSet<Mask> = opens.into_iter().collect();
        let space = FiniteSpace { points, opens };
        if let Some(&o) = space.opens.iter().find(|&&o| o & !full != 0) {
            return Err(Error::BadTopology(format!("open set {o:#b} has unknown points")));
        }
        if !space.opens.contains(&0) {
            return Err(Error::BadTopology("the empty set is not open".into()));
        }
        if !space.opens.contains(&full) {
            return Err(Error::BadTopology("the full set is not open".into()));
        }
        for &a in &space.opens {
            for &b in &space.opens {
                if !space.opens.contains(&(a | b)) {
                    return Err(Error::BadTopology(format!(
                        "union of {} and {} is not open",
                        space.show(a),
                        space.show(b)
                    )));
                }
                if !space.opens.contains(&(a & b)) {
                    return Err(Error::BadTopology(format!(
                        "intersection of {} and {} is not open",
                        space.show(a),
                        space.show(b)
                    )));
                }
            }
        }
        Ok(space)
    }

    pub fn discrete(points: Vec<String>) -> Self {
        let full = full_mask(points.len());
        let opens = (0..=full).collect();
        FiniteSpace { points, opens }
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn full(&self) -> Mask {
        full_mask(self.points.len())
    }

    pub fn opens(&self) -> &BTreeSet<Mask> {
        &self.opens
    }

    pub fn is_open(&self, s: Mask) -> bool {
        self.opens.contains(&s)
    }

    pub fn is_closed_mask(&self, s: Mask) -> bool {
        self.is_open(self.full() & !s)
    }

    pub fn mask_of(&self, subset: &[String]) -> Result<Mask> {
        subset.iter().try_fold(0, |m, p| {
            let i = self
                .points
                .iter()
                .position(|q| q == p)
                .ok_or_else(|| Error::UnknownElement(p.clone()))?;
            Ok(m | 1 << i)
        })
    }

    pub fn names(&self, m: Mask) -> Vec<String> {
        (0..self.points.len())
            .filter(|i| m >> i & 1 == 1)
            .map(|i| self.points[i].clone())
            .collect()
    }

    fn show(&self, m: Mask) -> String {
        format!("{{{}}}", self.names(m).join(","))
    }

    /// True iff the complement of `subset` is open.
    pub fn is_closed(&self, subset: &[String]) -> Result<bool> {
        Ok(self.is_closed_mask(self.mask_of(subset)?))
    }

    /// The smallest closed superset.
    pub fn closure(&self, s: Mask) -> Mask {
        let full = self.full();
        self.opens
            .iter()
            .map(|&o| full & !o)
            .filter(|&c| c & s == s)
            .fold(full, |acc, c| acc & c)
    }
}

/// A point map between finite spaces whose preimages of opens are open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuousMap {
    source: FiniteSpace,
    target: FiniteSpace,
    table: Vec<usize>,
}

impl ContinuousMap {
    pub fn new(source: FiniteSpace, target: FiniteSpace, table: Vec<usize>) -> Result<Self> {
        if table.len() != source.len() {
            return Err(Error::PartialMap(format!(
                "{} images for {} points",
                table.len(),
                source.len()
            )));
        }
        if let Some(&t) = table.iter().find(|&&t| t >= target.len()) {
            return Err(Error::UnknownElement(t.to_string()));
        }
        let map = ContinuousMap {
            source,
            target,
            table,
        };
        if let Some(&w) = map.target.opens.iter().find(|&&w| !map.source.is_open(map.preimage(w))) {
            return Err(Error::NotContinuous(map.target.show(w)));
        }
        Ok(map)
    }

    /// Builds from named pairs.
    pub fn from_names(
        source: FiniteSpace,
        target: FiniteSpace,
        pairs: &std::collections::BTreeMap<String, String>,
    ) -> Result<Self> {
        let table = source
            .points
            .iter()
            .map(|p| {
                let to = pairs.get(p).ok_or_else(|| Error::PartialMap(p.clone()))?;
                target
                    .points
                    .iter()
                    .position(|q| q == to)
                    .ok_or_else(|| Error::UnknownElement(to.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        ContinuousMap::new(source, target, table)
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn preimage(&self, w: Mask) -> Mask {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &t)| w >> t & 1 == 1)
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn image(&self) -> Mask {
        self.table.iter().fold(0, |m, &t| m | 1 << t)
    }

    pub fn is_injective(&self) -> bool {
        self.image().count_ones() as usize == self.table.len()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &ContinuousMap) -> Result<ContinuousMap> {
        if self.target != other.source {
            return Err(Error::NotComposable("target and source differ".into()));
        }
        let table = self.table.iter().map(|&t| other.table[t]).collect();
        ContinuousMap::new(self.source.clone(), other.target.clone(), table)
    }

    /// Injective, and every open of the source is the preimage of an open of the target.
    pub fn is_embedding(&self) -> bool {
        if !self.is_injective() {
            return false;
        }
        let pulled: BTreeSet<Mask> = self.target.opens.iter().map(|&w| self.preimage(w)).collect();
        pulled == self.source.opens
    }

    pub fn is_closed_embedding(&self) -> bool {
        self.is_embedding() && self.target.is_closed_mask(self.image())
    }
}

/// Every topology on `n` labelled points, by brute force over all families
/// of subsets. Practical for `n ≤ 4`.
pub fn enumerate_topologies(points: &[String]) -> Vec<FiniteSpace> {
    let n = points.len();
    assert!(n <= 4, "brute-force enumeration is limited to 4 points");
    let subsets = 1usize << n;
    let full = full_mask(n);
    let mut out = Vec::new();
    for family in 0u64..(1u64 << subsets) {
        // must contain the empty set (bit 0) and the full set
        if family & 1 == 0 || family >> full & 1 == 0 {
            continue;
        }
        let opens = (0..subsets as u64).filter(|s| family >> s & 1 == 1);
        if let Ok(space) = FiniteSpace::from_masks(points.to_vec(), opens) {
            out.push(space);
        }
    }
    out
}
