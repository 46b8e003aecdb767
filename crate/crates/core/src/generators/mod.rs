//! Seeded instance factories.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with `seed_from_u64`, so
//! `(kind, params, seed)` fixes the output bytes.

mod lower_bounds;
mod many_to_one;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph, Vertex};
use crate::matching::Matching;
use crate::model::{Instance, Request, Reward, Time};

pub use lower_bounds::{gen_lb, LowerBound};
pub use many_to_one::{gen_many_to_one, ManyToOneParams};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A true instance, optionally with predictions and the matching between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub instance: Instance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<Instance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<Matching>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowUnit {
    /// Window bounds are plain time steps.
    Steps,
    /// Window bounds are multiples of the graph diameter.
    Diameter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomParams {
    pub n: usize,
    /// Probability of each non-tree edge.
    pub edge_density: f64,
    pub max_len: i64,
    pub num_requests: usize,
    pub window_min: Time,
    pub window_max: Time,
    pub window_unit: WindowUnit,
    /// Releases are drawn from `[0, release_max]` (offset by the root distance
    /// when rooted).
    pub release_max: Time,
    pub reward_min: Reward,
    pub reward_max: Reward,
    pub service: Time,
    pub root: Option<Vertex>,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            n: 5,
            edge_density: 0.3,
            max_len: 3,
            num_requests: 4,
            window_min: 4,
            window_max: 8,
            window_unit: WindowUnit::Steps,
            release_max: 12,
            reward_min: 1,
            reward_max: 4,
            service: 1,
            root: None,
        }
    }
}

/// Connected random graph: a random spanning tree plus each remaining pair
/// with probability `density`, lengths uniform in `[1, max_len]`.
pub(crate) fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, max_len: i64) -> Result<MetricGraph> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if max_len < 1 {
        return Err(Error::InvalidParams("max_len must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParams(format!("edge_density {density} outside [0, 1]")));
    }
    let mut pairs = BTreeSet::new();
    let mut edges: Vec<Edge> = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        pairs.insert((u, v));
        edges.push((u, v, rng.gen_range(1..=max_len)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !pairs.contains(&(u, v)) && rng.gen_bool(density) {
                edges.push((u, v, rng.gen_range(1..=max_len)));
            }
        }
    }
    MetricGraph::build(n, &edges)
}

pub fn gen_random(params: &RandomParams, seed: u64) -> Result<Instance> {
    let p = params;
    let bad = |m: String| Err(Error::InvalidParams(m));
    if p.window_min < 1 || p.window_max < p.window_min {
        return bad(format!("bad window range [{}, {}]", p.window_min, p.window_max));
    }
    if p.reward_min < 1 || p.reward_max < p.reward_min {
        return bad(format!("bad reward range [{}, {}]", p.reward_min, p.reward_max));
    }
    if p.service < 0 || p.release_max < 0 {
        return bad("service and release_max must be non-negative".into());
    }
    let mut rng = rng(seed);
    let graph = random_graph(&mut rng, p.n, p.edge_density, p.max_len)?;
    let scale = match p.window_unit {
        WindowUnit::Steps => 1,
        WindowUnit::Diameter => graph.diameter().max(1),
    };
    let (lo, hi) = (p.window_min * scale, p.window_max * scale);
    if lo < p.service {
        return bad(format!("window_min {lo} below service time {}", p.service));
    }
    if let Some(r) = p.root {
        if r >= p.n {
            return Err(Error::VertexOutOfRange { vertex: r, n: p.n });
        }
    }
    let requests = (0..p.num_requests)
        .map(|_| {
            let v = rng.gen_range(0..p.n);
            let offset = p.root.map_or(0, |r| graph.dist(r, v));
            let r = offset + rng.gen_range(0..=p.release_max);
            let w = rng.gen_range(lo..=hi);
            Request::new(v, r, r + w, rng.gen_range(p.reward_min..=p.reward_max))
        })
        .collect();
    Instance::new(graph, requests, p.service, p.root)
}

/// Error budget for [`perturb_predictions`]. `rho = rho_num / rho_den >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Targets {
    pub lambda: Time,
    pub tau: Time,
    pub rho_num: u64,
    pub rho_den: u64,
    /// Reject targets outside `lambda <= (l_min - 1) / 4`, `tau <= l_min / 2`.
    pub conforming: bool,
}

impl Default for Targets {
    fn default() -> Self {
        Targets { lambda: 0, tau: 0, rho_num: 1, rho_den: 1, conforming: false }
    }
}

/// Predicted copy of each true request: vertex within `lambda`, release and
/// deadline each moved by at most `tau`, reward scaled by at most `rho`.
pub fn perturb_predictions(instance: &Instance, targets: &Targets, seed: u64) -> Result<(Instance, Matching)> {
    let t = targets;
    if t.lambda < 0 || t.tau < 0 {
        return Err(Error::InvalidParams("lambda and tau must be non-negative".into()));
    }
    if t.rho_den == 0 || t.rho_num < t.rho_den {
        return Err(Error::InvalidParams(format!("rho {}/{} must be at least 1", t.rho_num, t.rho_den)));
    }
    if t.conforming {
        if let Some(l) = instance.l_min() {
            if 4 * t.lambda > l - 1 || 2 * t.tau > l {
                return Err(Error::TargetsViolateAssumptions(format!(
                    "lambda {} and tau {} against l_min {l}",
                    t.lambda, t.tau
                )));
            }
        }
    }
    let g = instance.graph();
    let mut rng = rng(seed);
    let preds = instance
        .requests()
        .iter()
        .map(|q| {
            let ball = g.ball(q.vertex, t.lambda);
            let v = ball[rng.gen_range(0..ball.len())];
            let r = (q.release + rng.gen_range(-t.tau..=t.tau)).max(0);
            let d = (q.deadline + rng.gen_range(-t.tau..=t.tau)).max(r + 1);
            let lo = (q.reward * t.rho_den).div_ceil(t.rho_num).max(1);
            let hi = q.reward * t.rho_num / t.rho_den;
            Request::new(v, r, d, rng.gen_range(lo..=hi))
        })
        .collect();
    let pred = Instance::new(g.clone(), preds, instance.service(), None)?;
    Ok((pred, Matching::identity(instance.len())))
}
