use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph, Vertex};
use crate::matching::Matching;
use crate::model::{Instance, Request, Time};

use super::{rng, Generated};

/// Adversarial constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LowerBound {
    /// `n` clusters, each a complete graph on `c` vertices with edges `s`;
    /// consecutive clusters fully joined by edges `k * s`. One unit request
    /// per cluster with window `[i(ks+1), i(ks+1) + ks]`; the predictions are
    /// an independent redraw matched cluster by cluster.
    #[serde(rename = "chain")]
    ChainPredictions { s: Time, k: Time, c: usize, n: usize },
    /// Same graph, windows `[iks, (i+1)ks - 1]`, zero service time.
    #[serde(rename = "chain0")]
    ChainZeroService { s: Time, k: Time, c: usize, n: usize },
    /// Complete graph on `n` vertices with edges `d`; `count` unit requests at
    /// random vertices with windows `[(2i-1)d, (2i-1)d + l]`, `l <= d`.
    #[serde(rename = "uniform")]
    UniformNoPredictions { n: usize, count: usize, d: Time, l: Time },
    /// Line of `2s - 1` vertices with edges `alpha = l + 1 - 2s`, rooted at
    /// the first vertex, service time `s`.
    #[serde(rename = "line-service")]
    LineServiceGap { s: Time, l: Time },
    /// Unit line `v_0 .. v_d` with windows `[i, l + i]`, zero service time.
    #[serde(rename = "line0")]
    LineZeroServiceGap { d: Time, l: Time },
}

pub fn gen_lb(kind: &LowerBound, seed: u64) -> Result<Generated> {
    match *kind {
        LowerBound::ChainPredictions { s, k, c, n } => chain(s, k, c, n, seed, false),
        LowerBound::ChainZeroService { s, k, c, n } => chain(s, k, c, n, seed, true),
        LowerBound::UniformNoPredictions { n, count, d, l } => uniform(n, count, d, l, seed),
        LowerBound::LineServiceGap { s, l } => line_service(s, l),
        LowerBound::LineZeroServiceGap { d, l } => line_zero(d, l),
    }
}

fn bad<T>(msg: String) -> Result<T> {
    Err(Error::InvalidParams(msg))
}

fn chain_graph(s: Time, k: Time, c: usize, n: usize) -> Result<MetricGraph> {
    let at = |i: usize, j: usize| i * c + j;
    let mut edges: Vec<Edge> = Vec::new();
    for i in 0..n {
        for a in 0..c {
            for b in a + 1..c {
                edges.push((at(i, a), at(i, b), s));
            }
            if i + 1 < n {
                for b in 0..c {
                    edges.push((at(i, a), at(i + 1, b), k * s));
                }
            }
        }
    }
    MetricGraph::build(n * c, &edges)
}

fn chain(s: Time, k: Time, c: usize, n: usize, seed: u64, zero: bool) -> Result<Generated> {
    if s < 1 || k < 1 || n < 1 {
        return bad(format!("chain needs s, k, n >= 1 (got s={s}, k={k}, n={n})"));
    }
    if c < 2 {
        return bad(format!("chain needs c >= 2 so that predictions can miss (got c={c})"));
    }
    if zero && k * s < 2 {
        return bad("chain0 needs k * s >= 2 for a non-empty window".into());
    }
    let g = chain_graph(s, k, c, n)?;
    let mut rng = rng(seed);
    let truth: Vec<Vertex> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    let mut pred: Vec<Vertex> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    if truth == pred {
        // every pair agreeing would make the location error 0 instead of s
        let i = rng.gen_range(0..n);
        pred[i] = (truth[i] + rng.gen_range(1..c)) % c;
    }
    let ks = k * s;
    let window = |i: usize| -> (Time, Time) {
        let i = i as Time;
        if zero {
            (i * ks, (i + 1) * ks - 1)
        } else {
            (i * (ks + 1), i * (ks + 1) + ks)
        }
    };
    let reqs = |picks: &[Vertex]| -> Vec<Request> {
        picks
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                let (r, d) = window(i);
                Request::new(i * c + j, r, d, 1)
            })
            .collect()
    };
    let service = if zero { 0 } else { 1 };
    Ok(Generated {
        instance: Instance::new(g.clone(), reqs(&truth), service, None)?,
        predictions: Some(Instance::new(g, reqs(&pred), service, None)?),
        matching: Some(Matching::identity(n)),
    })
}

fn uniform(n: usize, count: usize, d: Time, l: Time, seed: u64) -> Result<Generated> {
    if n < 1 || d < 1 {
        return bad(format!("uniform needs n, d >= 1 (got n={n}, d={d})"));
    }
    if l < 1 || l > d {
        return bad(format!("uniform needs 1 <= l <= d (got l={l}, d={d})"));
    }
    let g = MetricGraph::uniform(n, d)?;
    let mut rng = rng(seed);
    let reqs = (1..=count as Time)
        .map(|i| {
            let r = (2 * i - 1) * d;
            Request::new(rng.gen_range(0..n), r, r + l, 1)
        })
        .collect();
    Ok(Generated { instance: Instance::new(g, reqs, 1, None)?, predictions: None, matching: None })
}

fn line_service(s: Time, l: Time) -> Result<Generated> {
    if s < 2 || l < 2 * s - 2 {
        return bad(format!("line-service needs l >= 2s - 2 >= 1 (got s={s}, l={l})"));
    }
    let alpha = l + 1 - 2 * s;
    if alpha < 1 {
        return bad(format!("line-service needs alpha = l + 1 - 2s >= 1 (got {alpha})"));
    }
    let n = (2 * s - 1) as usize;
    let g = MetricGraph::line(n, alpha)?;
    let reqs = (0..n)
        .map(|i| {
            if i == 0 {
                Request::new(0, 0, l, 1)
            } else {
                let d = i as Time * alpha + 2 * s - 1;
                Request::new(i, d - l, d, 1)
            }
        })
        .collect();
    // releases sit below the root distance: rooted reachability fails on purpose
    Ok(Generated { instance: Instance::new(g, reqs, s, Some(0))?, predictions: None, matching: None })
}

fn line_zero(d: Time, l: Time) -> Result<Generated> {
    if d < 1 || l < 1 || l > d {
        return bad(format!("line0 needs 1 <= l <= d (got d={d}, l={l})"));
    }
    let g = MetricGraph::line(d as usize + 1, 1)?;
    let reqs = (0..=d).map(|i| Request::new(i as usize, i, l + i, 1)).collect();
    Ok(Generated { instance: Instance::new(g, reqs, 0, None)?, predictions: None, matching: None })
}
