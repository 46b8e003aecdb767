use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::generators::{
    gen_lb, gen_many_to_one, gen_random, perturb_predictions, Generated, LowerBound, ManyToOneParams, RandomParams,
    Targets,
};
use crate::matching::Matching;
use crate::offline::{OfflineConfig, OrienteeringChoice};
use crate::online::DetourMode;
use crate::oracle::DEFAULT_STATE_BUDGET;

use super::LambdaPolicy;

/// A generator with its parameters, written as one JSON object whose `kind`
/// field picks the generator: `random`, `many-to-one`, `chain`, `chain0`,
/// `uniform`, `line-service` or `line0`.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Random(RandomParams),
    ManyToOne(ManyToOneParams),
    LowerBound(LowerBound),
}

pub const GEN_KINDS: [&str; 7] = ["random", "many-to-one", "chain", "chain0", "uniform", "line-service", "line0"];

impl GenSpec {
    pub fn from_value(v: Value) -> Result<Self> {
        let bad = |m: String| Error::InvalidParams(m);
        let Value::Object(mut map) = v else {
            return Err(bad("generator spec must be an object".into()));
        };
        let kind = match map.get("kind") {
            Some(Value::String(k)) => k.clone(),
            _ => return Err(bad("generator spec needs a string 'kind'".into())),
        };
        match kind.as_str() {
            "random" => {
                map.remove("kind");
                serde_json::from_value(Value::Object(map)).map(GenSpec::Random).map_err(|e| bad(format!("random: {e}")))
            }
            "many-to-one" => {
                map.remove("kind");
                serde_json::from_value(Value::Object(map))
                    .map(GenSpec::ManyToOne)
                    .map_err(|e| bad(format!("many-to-one: {e}")))
            }
            k if GEN_KINDS.contains(&k) => serde_json::from_value(Value::Object(map))
                .map(GenSpec::LowerBound)
                .map_err(|e| bad(format!("{k}: {e}"))),
            other => Err(bad(format!("unknown generator kind '{other}' (expected one of {})", GEN_KINDS.join(", ")))),
        }
    }

    pub fn to_value(&self) -> Value {
        let with_kind = |kind: &str, v: Value| {
            let mut m = match v {
                Value::Object(m) => m,
                _ => unreachable!("params serialize to objects"),
            };
            m.insert("kind".into(), Value::String(kind.into()));
            Value::Object(m)
        };
        match self {
            GenSpec::Random(p) => with_kind("random", serde_json::to_value(p).expect("serializable")),
            GenSpec::ManyToOne(p) => with_kind("many-to-one", serde_json::to_value(p).expect("serializable")),
            GenSpec::LowerBound(k) => serde_json::to_value(k).expect("serializable"),
        }
    }

    /// Builds the instance and, when the generator has none, predictions by
    /// perturbing it with `perturb` (exact copies when `perturb` is absent).
    pub fn generate(&self, seed: u64, perturb: Option<&Targets>) -> Result<Generated> {
        let mut g = match self {
            GenSpec::Random(p) => Generated { instance: gen_random(p, seed)?, predictions: None, matching: None },
            GenSpec::ManyToOne(p) => gen_many_to_one(p, seed)?,
            GenSpec::LowerBound(k) => gen_lb(k, seed)?,
        };
        if g.predictions.is_none() {
            match perturb {
                Some(t) => {
                    let (pred, m) = perturb_predictions(&g.instance, t, seed)?;
                    g.predictions = Some(pred);
                    g.matching = Some(m);
                }
                None => {
                    g.predictions = Some(g.instance.with_root(None));
                    g.matching = Some(Matching::identity(g.instance.len()));
                }
            }
        }
        Ok(g)
    }
}

impl Serialize for GenSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GenSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        GenSpec::from_value(Value::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

fn default_trials() -> usize {
    1
}

fn default_policy() -> LambdaPolicy {
    LambdaPolicy::Profile
}

fn default_mode() -> DetourMode {
    DetourMode::OneToOne
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub label: String,
    pub generator: GenSpec,
    #[serde(default)]
    pub perturb: Option<Targets>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Trial `i` uses seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_policy")]
    pub lambda: LambdaPolicy,
    #[serde(default = "default_mode")]
    pub mode: DetourMode,
}

fn default_budget() -> u128 {
    DEFAULT_STATE_BUDGET
}

/// A bench configuration: one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default)]
    pub name: String,
    pub entries: Vec<SuiteEntry>,
    #[serde(default)]
    pub offline: OfflineConfig,
    #[serde(default)]
    pub detours: OrienteeringChoice,
    #[serde(default = "default_budget")]
    pub state_budget: u128,
}

impl Suite {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadSuiteFile(e.to_string()))
    }
}
