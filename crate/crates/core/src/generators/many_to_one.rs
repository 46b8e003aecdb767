use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::Matching;
use crate::model::{Instance, Request, Reward, Time};

use super::{random_graph, rng, Generated};

/// Coarse predictions: each predicted request stands for a cluster of true
/// requests placed within `radius` of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManyToOneParams {
    pub n: usize,
    pub edge_density: f64,
    pub max_len: i64,
    pub num_pred: usize,
    /// True requests per predicted request, drawn from `[1, cluster_max]`.
    pub cluster_max: usize,
    pub radius: i64,
    pub tau: Time,
    pub window_min: Time,
    pub window_max: Time,
    pub release_max: Time,
    pub reward_max: Reward,
    /// Predicted reward is the cluster total scaled by at most this factor.
    pub rho: u64,
}

impl Default for ManyToOneParams {
    fn default() -> Self {
        ManyToOneParams {
            n: 5,
            edge_density: 0.3,
            max_len: 2,
            num_pred: 3,
            cluster_max: 3,
            radius: 1,
            tau: 1,
            window_min: 20,
            window_max: 26,
            release_max: 15,
            reward_max: 3,
            rho: 1,
        }
    }
}

impl ManyToOneParams {
    /// Upper bound on the cycle length through any cluster: a nearest-order
    /// cycle steps at most `2 radius` between members plus one unit each.
    pub fn lambda_cap(&self) -> Time {
        self.cluster_max as Time * (2 * self.radius + 1)
    }
}

/// True and predicted instances with the many-to-one matching. Windows are
/// checked so that the location error is at most half the shortest window.
pub fn gen_many_to_one(params: &ManyToOneParams, seed: u64) -> Result<Generated> {
    let p = params;
    let bad = |m: String| Err(Error::InvalidParams(m));
    if p.cluster_max < 1 || p.radius < 0 || p.tau < 0 || p.rho < 1 || p.reward_max < 1 || p.release_max < 0 {
        return bad("cluster_max, rho, reward_max >= 1 and radius, tau, release_max >= 0 required".into());
    }
    if p.window_max < p.window_min {
        return bad(format!("bad window range [{}, {}]", p.window_min, p.window_max));
    }
    // the true windows may shrink by 2 tau
    let shortest = p.window_min - 2 * p.tau;
    if shortest < 1 || 2 * p.lambda_cap() > shortest || 2 * p.tau > shortest {
        return bad(format!(
            "window_min {} too small for lambda cap {} and tau {}",
            p.window_min,
            p.lambda_cap(),
            p.tau
        ));
    }
    let mut rng = rng(seed);
    let g = random_graph(&mut rng, p.n, p.edge_density, p.max_len)?;
    let mut preds = Vec::new();
    let mut truth = Vec::new();
    let mut assignment = Vec::new();
    for j in 0..p.num_pred {
        let u = rng.gen_range(0..p.n);
        let r = rng.gen_range(p.tau..=p.release_max + p.tau);
        let d = r + rng.gen_range(p.window_min..=p.window_max);
        let k = rng.gen_range(1..=p.cluster_max);
        let ball = g.ball(u, p.radius);
        let mut total = 0;
        for _ in 0..k {
            let v = ball[rng.gen_range(0..ball.len())];
            let tr = r + rng.gen_range(-p.tau..=p.tau);
            let td = d + rng.gen_range(-p.tau..=p.tau);
            let w = rng.gen_range(1..=p.reward_max);
            total += w;
            truth.push(Request::new(v, tr, td, w));
            assignment.push(j);
        }
        let lo = total.div_ceil(p.rho).max(1);
        preds.push(Request::new(u, r, d, rng.gen_range(lo..=total * p.rho)));
    }
    Ok(Generated {
        instance: Instance::new(g.clone(), truth, 1, None)?,
        predictions: Some(Instance::new(g, preds, 1, None)?),
        matching: Some(Matching::many_to_one(&assignment)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::profile;
    use num_rational::Ratio;

    #[test]
    fn profile_within_caps() {
        let p = ManyToOneParams { rho: 2, ..Default::default() };
        for seed in 0..40 {
            let g = gen_many_to_one(&p, seed).unwrap();
            let pred = g.predictions.as_ref().unwrap();
            let prof = profile(&g.instance, pred, g.matching.as_ref().unwrap()).unwrap();
            assert!(prof.lambda <= p.lambda_cap());
            assert!(prof.tau <= p.tau);
            assert!(prof.rho <= Ratio::from_integer(2));
            let l_min = crate::model::joint_l_min(&g.instance, pred).unwrap();
            assert!(2 * prof.lambda <= l_min && 2 * prof.tau <= l_min);
        }
    }

    #[test]
    fn rejects_tight_windows() {
        let p = ManyToOneParams { window_min: 8, ..Default::default() };
        assert!(matches!(gen_many_to_one(&p, 0), Err(Error::InvalidParams(_))));
    }
}
