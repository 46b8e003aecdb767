//! Experiment driver: offline walk on the predictions, the three shifted
//! online runs, and the oracle optimum, folded into one report.

mod bench;
mod suite;

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matching::{profile, ErrorProfile, Matching};
use crate::model::{coverage, joint_l_min, Instance, InstanceSpec, Reward, Time, Walk};
use crate::offline::{offline_solve, OfflineConfig, OrienteeringChoice};
use crate::online::{draw_guess, run, DetourEntry, DetourMode, OnlineStream, EPSILONS};
use crate::oracle::{opt_twtsp_with_budget, DEFAULT_STATE_BUDGET};
use crate::par;

pub use bench::{bench, write_csv, AggregateRow, BenchSummary, TrialRow};
pub use suite::{GenSpec, Suite, SuiteEntry};

/// Where the location-error bound handed to the online algorithm comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaPolicy {
    Fixed(Time),
    /// The location error of the supplied matching.
    Profile,
    /// A seeded draw from the power-of-two guesses.
    Guess,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub mode: DetourMode,
    pub offline: OfflineConfig,
    /// Cycle solver for many-to-one detours.
    pub detours: OrienteeringChoice,
    pub state_budget: u128,
    pub epsilons: Vec<i8>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mode: DetourMode::OneToOne,
            offline: OfflineConfig::default(),
            detours: OrienteeringChoice::Exact,
            state_budget: DEFAULT_STATE_BUDGET,
            epsilons: EPSILONS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptStatus {
    BudgetExceeded,
}

/// Oracle optimum, or a flag when it was not computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptValue {
    Value(Reward),
    Status(OptStatus),
}

impl OptValue {
    pub fn value(&self) -> Option<Reward> {
        match self {
            OptValue::Value(v) => Some(*v),
            OptValue::Status(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub epsilon: i8,
    pub reward: Reward,
    pub walk: Walk,
    pub detours: Vec<DetourEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub instance_digest: String,
    pub seed: u64,
    pub lambda_policy: LambdaPolicy,
    pub lambda_bound: Time,
    pub s_prime: Time,
    pub l_min: Time,
    pub opt_value: OptValue,
    pub offline_value: Reward,
    pub offline_walk: Walk,
    /// Keyed by `"-1"`, `"0"`, `"1"`.
    pub per_epsilon_rewards: BTreeMap<String, Reward>,
    #[serde(with = "crate::rational")]
    pub expected_reward: Ratio<Reward>,
    /// `opt / expected_reward`; absent when either side is unavailable or zero.
    #[serde(with = "crate::rational::option")]
    pub ratio: Option<Ratio<Reward>>,
    pub ratio_undefined: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_profile: Option<ErrorProfile>,
    pub branches: Vec<Branch>,
    pub config: SimConfig,
}

/// SHA-256 over the canonical JSON of the true and predicted instances.
pub fn instance_digest(instance: &Instance, pred: &Instance) -> String {
    let a = serde_json::to_vec(&InstanceSpec::from(instance.clone())).expect("instances serialize");
    let b = serde_json::to_vec(&InstanceSpec::from(pred.clone())).expect("instances serialize");
    let mut h = Sha256::new();
    h.update(&a);
    h.update(b"\n");
    h.update(&b);
    hex::encode(h.finalize())
}

/// Service time used for the predictions under a location-error bound.
pub fn s_prime_for(mode: DetourMode, lambda: Time) -> Time {
    match mode {
        DetourMode::OneToOne => 2 * lambda + 1,
        DetourMode::ManyToOne => lambda.max(1),
    }
}

pub fn simulate(
    instance: &Instance,
    pred: &Instance,
    matching: Option<&Matching>,
    policy: LambdaPolicy,
    seed: u64,
    cfg: &SimConfig,
) -> Result<SimulationReport> {
    if instance.graph() != pred.graph() {
        return Err(Error::InvalidInstance("true and predicted instances use different graphs".into()));
    }
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|e| !EPSILONS.contains(e)) {
        return Err(Error::InvalidParams(format!("epsilons must be a non-empty subset of -1, 0, 1: {:?}", cfg.epsilons)));
    }
    let error_profile = matching.map(|m| profile(instance, pred, m)).transpose()?;
    let l_min = joint_l_min(instance, pred).unwrap_or(0);
    let lambda_bound = match policy {
        LambdaPolicy::Fixed(l) if l < 0 => return Err(Error::InvalidParams(format!("negative lambda {l}"))),
        LambdaPolicy::Fixed(l) => l,
        LambdaPolicy::Profile => match &error_profile {
            Some(p) => p.lambda,
            None => return Err(Error::InvalidParams("lambda policy 'profile' needs a matching".into())),
        },
        LambdaPolicy::Guess => draw_guess(l_min, seed),
    };
    let s_prime = s_prime_for(cfg.mode, lambda_bound);
    let pred_s = pred.with_service(s_prime);
    let offline_walk = offline_solve(&pred_s, &cfg.offline)?;
    let offline_value = coverage(&offline_walk, &pred_s)?.reward;

    let runs = par::map(&cfg.epsilons, |&e| {
        let stream = OnlineStream::new(instance.requests().to_vec());
        run(instance.graph(), &pred_s, &offline_walk, stream, e, l_min, cfg.mode, cfg.detours)
    });
    let mut branches = Vec::new();
    for res in runs {
        let res = res?;
        branches.push(Branch { epsilon: res.epsilon, reward: res.covered.reward, walk: res.walk, detours: res.detour_log });
    }
    let per_epsilon_rewards = branches.iter().map(|b| (b.epsilon.to_string(), b.reward)).collect();
    let total: Reward = branches.iter().map(|b| b.reward).sum();
    let expected_reward = Ratio::new(total, branches.len() as Reward);

    let opt_value = match opt_twtsp_with_budget(&instance.with_service(1), cfg.state_budget) {
        Ok(r) => OptValue::Value(r.value),
        Err(Error::StateBudgetExceeded { .. }) => OptValue::Status(OptStatus::BudgetExceeded),
        Err(e) => return Err(e),
    };
    let ratio = match opt_value.value() {
        Some(opt) if total > 0 => Some(Ratio::from_integer(opt) / expected_reward),
        _ => None,
    };
    Ok(SimulationReport {
        instance_digest: instance_digest(instance, pred),
        seed,
        lambda_policy: policy,
        lambda_bound,
        s_prime,
        l_min,
        opt_value,
        offline_value,
        offline_walk,
        per_epsilon_rewards,
        expected_reward,
        ratio_undefined: ratio.is_none(),
        ratio,
        error_profile,
        branches,
        config: cfg.clone(),
    })
}
