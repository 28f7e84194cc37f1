//! Instance files: one JSON document naming signatures, algebras, generator
//! sets, rewrite systems, maps, spaces, retractions and step functions.
//! Sections reference each other by name.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use hmfree::embedding::{build_retraction_metric, build_retraction_uniform, Metric, Retraction};
use hmfree::rewrite::{RewriteRule, RewriteSystem};
use hmfree::signature::{Algebra, CarrierMap, Signature};
use hmfree::step::{parse_rational, parse_stepfn, StepFn};
use hmfree::term::GeneratorSet;
use hmfree::topology::{ContinuousMap, FiniteSpace};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInstance {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Signature>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub algebras: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub generator_sets: BTreeMap<String, GeneratorSet>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rewrite_systems: BTreeMap<String, RawSystem>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, RawMap>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<RawModel>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spaces: BTreeMap<String, FiniteSpace>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub space_maps: BTreeMap<String, RawSpaceMap>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub retractions: BTreeMap<String, RawRetraction>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub step_functions: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<RawQuery>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub rules: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel: Option<u64>,
}

/// `domain` and `codomain` name an algebra or a generator set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMap {
    pub domain: String,
    pub codomain: String,
    pub table: BTreeMap<String, String>,
}

/// A claim that `algebra` satisfies each identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub algebra: String,
    pub identities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpaceMap {
    pub source: String,
    pub target: String,
    pub table: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRetraction {
    pub subspace: String,
    pub ambient: String,
    #[serde(flatten)]
    pub kind: RetractionKind,
}

/// `metric` rows follow the order of the ambient set; entries are exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RetractionKind {
    Uniform,
    Metric { distances: Vec<Vec<String>> },
    Table { table: BTreeMap<String, String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawQuery {
    pub expr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

#[derive(Debug, Clone)]
pub struct NamedMap {
    pub domain: String,
    pub codomain: String,
    pub map: CarrierMap,
}

/// A parsed instance with every cross reference resolved.
#[derive(Debug, Clone)]
pub struct Instance {
    raw: RawInstance,
    pub signature: Option<Signature>,
    pub algebras: BTreeMap<String, Algebra>,
    pub generator_sets: BTreeMap<String, GeneratorSet>,
    pub systems: BTreeMap<String, RewriteSystem>,
    pub maps: BTreeMap<String, NamedMap>,
    pub models: Vec<(String, Vec<RewriteRule>)>,
    pub spaces: BTreeMap<String, FiniteSpace>,
    pub space_maps: BTreeMap<String, ContinuousMap>,
    pub retractions: BTreeMap<String, Retraction>,
    pub step_functions: BTreeMap<String, StepFn<String>>,
    pub queries: Vec<RawQuery>,
}

impl Instance {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let text = std::str::from_utf8(&bytes).context("instance file is not UTF-8")?;
        let instance = Instance::parse(text).with_context(|| format!("in {}", path.display()))?;
        Ok((instance, bytes))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).context("malformed JSON")?;
        match value.get("schema_version") {
            None => bail!("missing schema_version"),
            Some(v) if v.as_u64() != Some(SCHEMA_VERSION as u64) => {
                bail!("unsupported schema_version {v}, expected {SCHEMA_VERSION}")
            }
            _ => {}
        }
        let raw: RawInstance = serde_json::from_value(value).context("schema error")?;
        Instance::resolve(raw)
    }

    /// The canonical JSON form; parsing it again yields the same instance.
    pub fn to_json(&self) -> Value {
        let mut raw = self.raw.clone();
        raw.algebras = self.algebras.iter().map(|(k, a)| (k.clone(), a.to_json())).collect();
        raw.step_functions = self
            .step_functions
            .iter()
            .map(|(k, f)| (k.clone(), f.to_string()))
            .collect();
        serde_json::to_value(raw).expect("instance serializes")
    }

    pub fn require_signature(&self) -> Result<&Signature> {
        self.signature.as_ref().ok_or_else(|| anyhow!("instance has no signature"))
    }

    pub fn algebra(&self, name: &str) -> Result<&Algebra> {
        self.algebras.get(name).ok_or_else(|| anyhow!("unknown algebra `{name}`"))
    }

    pub fn generator_set(&self, name: &str) -> Result<&GeneratorSet> {
        self.generator_sets
            .get(name)
            .ok_or_else(|| anyhow!("unknown generator set `{name}`"))
    }

    pub fn system(&self, name: &str) -> Result<&RewriteSystem> {
        self.systems
            .get(name)
            .ok_or_else(|| anyhow!("unknown rewrite system `{name}`"))
    }

    pub fn map(&self, name: &str) -> Result<&NamedMap> {
        self.maps.get(name).ok_or_else(|| anyhow!("unknown map `{name}`"))
    }

    pub fn step_function(&self, name: &str) -> Result<&StepFn<String>> {
        self.step_functions
            .get(name)
            .ok_or_else(|| anyhow!("unknown step function `{name}`"))
    }

    fn carrier(&self, name: &str) -> Result<&[String]> {
        match (self.algebras.get(name), self.generator_sets.get(name)) {
            (Some(_), Some(_)) => bail!("`{name}` names both an algebra and a generator set"),
            (Some(a), None) => Ok(a.carrier()),
            (None, Some(g)) => Ok(g.elements()),
            (None, None) => bail!("unknown algebra or generator set `{name}`"),
        }
    }

    fn resolve(raw: RawInstance) -> Result<Self> {
        let mut inst = Instance {
            signature: raw.signature.clone(),
            algebras: BTreeMap::new(),
            generator_sets: raw.generator_sets.clone(),
            systems: BTreeMap::new(),
            maps: BTreeMap::new(),
            models: Vec::new(),
            spaces: raw.spaces.clone(),
            space_maps: BTreeMap::new(),
            retractions: BTreeMap::new(),
            step_functions: BTreeMap::new(),
            queries: raw.queries.clone(),
            raw,
        };
        let raw = inst.raw.clone();

        for (name, table) in &raw.algebras {
            let sig = inst.require_signature()?.clone();
            let a = Algebra::from_json(sig, table).with_context(|| format!("algebra `{name}`"))?;
            inst.algebras.insert(name.clone(), a);
        }
        for (name, sys) in &raw.rewrite_systems {
            let sig = inst.require_signature()?.clone();
            let mut r = RewriteSystem::parse(sig, &sys.rules).with_context(|| format!("rewrite system `{name}`"))?;
            if let Some(f) = sys.fuel {
                r = r.with_fuel(f);
            }
            inst.systems.insert(name.clone(), r);
        }
        for (name, m) in &raw.maps {
            let map = CarrierMap::new(inst.carrier(&m.domain)?, inst.carrier(&m.codomain)?, &m.table)
                .with_context(|| format!("map `{name}`"))?;
            inst.maps.insert(
                name.clone(),
                NamedMap {
                    domain: m.domain.clone(),
                    codomain: m.codomain.clone(),
                    map,
                },
            );
        }
        for (i, model) in raw.models.iter().enumerate() {
            inst.algebra(&model.algebra)?;
            let sig = inst.require_signature()?;
            let rules = model
                .identities
                .iter()
                .map(|r| RewriteRule::parse(sig, r))
                .collect::<hmfree::Result<Vec<_>>>()
                .with_context(|| format!("model {i}"))?;
            inst.models.push((model.algebra.clone(), rules));
        }
        for (name, m) in &raw.space_maps {
            let space = |s: &str| {
                inst.spaces
                    .get(s)
                    .cloned()
                    .ok_or_else(|| anyhow!("unknown space `{s}`"))
            };
            let f = ContinuousMap::from_names(space(&m.source)?, space(&m.target)?, &m.table)
                .with_context(|| format!("space map `{name}`"))?;
            inst.space_maps.insert(name.clone(), f);
        }
        for (name, text) in &raw.step_functions {
            let f = parse_stepfn(text, |s| Ok(s.to_string())).with_context(|| format!("step function `{name}`"))?;
            inst.step_functions.insert(name.clone(), f);
        }
        for (name, r) in &raw.retractions {
            let retraction = inst.build_retraction(r).with_context(|| format!("retraction `{name}`"))?;
            inst.retractions.insert(name.clone(), retraction);
        }
        Ok(inst)
    }

    fn build_retraction(&self, r: &RawRetraction) -> Result<Retraction> {
        let x = self.generator_set(&r.subspace)?;
        let y = self.generator_set(&r.ambient)?;
        Ok(match &r.kind {
            RetractionKind::Uniform => build_retraction_uniform(x, y)?,
            RetractionKind::Metric { distances } => {
                let dist = distances
                    .iter()
                    .map(|row| row.iter().map(|d| parse_rational(d)).collect())
                    .collect::<hmfree::Result<Vec<Vec<_>>>>()?;
                build_retraction_metric(&Metric::new(y.clone(), dist)?, x)?
            }
            RetractionKind::Table { table } => {
                let table = table
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), parse_stepfn(v, |s| Ok(s.to_string()))?)))
                    .collect::<hmfree::Result<BTreeMap<_, _>>>()?;
                Retraction::new(x.clone(), y.clone(), table)?
            }
        })
    }
}
