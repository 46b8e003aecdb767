use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Vertex};
use crate::model::{Reward, Time, Walk};

use super::OracleResult;

pub const MAX_TARGETS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TourMode {
    /// Open path from the root.
    Path,
    /// Closed tour returning to the root.
    Cycle,
}

/// A place worth `reward` if the tour idles `service` steps there. Offsets
/// are measured from the tour start: service cannot begin before
/// `earliest_start` (the tour waits) and, when `latest_start` is set, must
/// begin no later than it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub vertex: Vertex,
    pub reward: Reward,
    pub service: Time,
    pub earliest_start: Time,
    pub latest_start: Option<Time>,
}

impl Target {
    pub fn new(vertex: Vertex, reward: Reward, service: Time) -> Self {
        Target { vertex, reward, service, earliest_start: 0, latest_start: None }
    }

    /// Service start when reaching the target at `arrive`, if still allowed.
    fn start(&self, arrive: Time) -> Option<Time> {
        let s = arrive.max(self.earliest_start);
        self.latest_start.is_none_or(|l| s <= l).then_some(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub value: Reward,
    /// Target indices in visiting order.
    pub order: Vec<usize>,
    /// Duration including service and, in cycle mode, the return leg.
    pub length: Time,
    pub explored_states: u64,
}

impl Tour {
    /// The tour as a walk from `root` starting at `start_time`.
    pub fn to_walk(&self, targets: &[Target], root: Vertex, start_time: Time, mode: TourMode) -> Walk {
        let mut walk = Walk::new(root, start_time);
        for &j in &self.order {
            walk.push_move(targets[j].vertex);
            walk.push_idle(targets[j].service);
        }
        if mode == TourMode::Cycle {
            walk.push_move(root);
        }
        walk
    }

    pub fn into_result(self, walk: Option<Walk>) -> OracleResult {
        OracleResult { value: self.value, walk, explored_states: self.explored_states }
    }
}

const INF: Time = Time::MAX / 4;

struct HeldKarp {
    k: usize,
    /// finish[mask * k + last]: earliest completion of the last service.
    finish: Vec<Time>,
    parent: Vec<u8>,
}

impl HeldKarp {
    fn run(graph: &MetricGraph, root: Vertex, targets: &[Target]) -> Result<Self> {
        let k = targets.len();
        if k > MAX_TARGETS {
            return Err(Error::TooManyTargets(k));
        }
        let masks = 1usize << k;
        let mut finish = vec![INF; masks * k];
        let mut parent = vec![u8::MAX; masks * k];
        for (j, t) in targets.iter().enumerate() {
            if let Some(s) = t.start(graph.dist(root, t.vertex)) {
                finish[(1 << j) * k + j] = s + t.service;
            }
        }
        for mask in 1..masks {
            for last in 0..k {
                let f = finish[mask * k + last];
                if f >= INF {
                    continue;
                }
                let from = targets[last].vertex;
                for (j, t) in targets.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        continue;
                    }
                    let Some(start) = t.start(f + graph.dist(from, t.vertex)) else { continue };
                    let slot = (mask | 1 << j) * k + j;
                    let done = start + t.service;
                    if done < finish[slot] {
                        finish[slot] = done;
                        parent[slot] = last as u8;
                    }
                }
            }
        }
        Ok(HeldKarp { k, finish, parent })
    }

    /// Shortest feasible completion of `mask` in `mode`, with its last target.
    fn best_end(&self, graph: &MetricGraph, root: Vertex, targets: &[Target], mask: usize, mode: TourMode) -> Option<(Time, usize)> {
        (0..self.k)
            .filter(|&last| self.finish[mask * self.k + last] < INF)
            .map(|last| {
                let back = match mode {
                    TourMode::Path => 0,
                    TourMode::Cycle => graph.dist(targets[last].vertex, root),
                };
                (self.finish[mask * self.k + last] + back, last)
            })
            .min()
    }

    fn order(&self, mut mask: usize, mut last: usize) -> Vec<usize> {
        let mut order = Vec::new();
        loop {
            order.push(last);
            let p = self.parent[mask * self.k + last];
            mask &= !(1 << last);
            if p == u8::MAX {
                break;
            }
            last = p as usize;
        }
        order.reverse();
        order
    }
}

/// Maximum-reward subset of `targets` reachable from `root` within `budget`
/// (service included), by exact Held-Karp over subsets. Ties on reward go to
/// the shorter tour, then to the smaller subset mask.
pub fn orienteering_exact(
    graph: &MetricGraph,
    targets: &[Target],
    root: Vertex,
    budget: Time,
    mode: TourMode,
) -> Result<Tour> {
    let hk = HeldKarp::run(graph, root, targets)?;
    let masks = 1usize << targets.len();
    let mut best = Tour { value: 0, order: Vec::new(), length: 0, explored_states: (masks * targets.len()) as u64 };
    if budget < 0 {
        return Ok(best);
    }
    for mask in 1..masks {
        let Some((len, last)) = hk.best_end(graph, root, targets, mask, mode) else { continue };
        if len > budget {
            continue;
        }
        let value: Reward = (0..targets.len()).filter(|j| mask >> j & 1 == 1).map(|j| targets[j].reward).sum();
        if value > best.value || (value == best.value && len < best.length) {
            best.value = value;
            best.length = len;
            best.order = hk.order(mask, last);
        }
    }
    Ok(best)
}

/// Length of the shortest tour visiting every target, if one is feasible.
pub fn shortest_tour(graph: &MetricGraph, targets: &[Target], root: Vertex, mode: TourMode) -> Result<Option<Time>> {
    if targets.is_empty() {
        return Ok(Some(0));
    }
    let hk = HeldKarp::run(graph, root, targets)?;
    let full = (1usize << targets.len()) - 1;
    Ok(hk.best_end(graph, root, targets, full, mode).map(|(len, _)| len))
}

/// Ratio-greedy surrogate for large target sets: repeatedly extend the tour
/// with the target of best reward per unit of added time that still fits,
/// and return the better of that tour and the best single target.
pub fn orienteering_greedy(
    graph: &MetricGraph,
    targets: &[Target],
    root: Vertex,
    budget: Time,
    mode: TourMode,
) -> Tour {
    let back = |v: Vertex| match mode {
        TourMode::Path => 0,
        TourMode::Cycle => graph.dist(v, root),
    };
    let fits = |j: usize, at: Vertex, now: Time| {
        let t = &targets[j];
        let done = t.start(now + graph.dist(at, t.vertex))? + t.service;
        (done + back(t.vertex) <= budget).then_some(done)
    };

    let mut used = vec![false; targets.len()];
    let mut order = Vec::new();
    let (mut at, mut now, mut value) = (root, 0, 0);
    loop {
        let pick = (0..targets.len())
            .filter(|&j| !used[j])
            .filter_map(|j| fits(j, at, now).map(|done| (j, done)))
            .max_by(|&(a, da), &(b, db)| {
                // reward / (added time + 1), compared exactly
                let lhs = targets[a].reward as i128 * (db - now + 1) as i128;
                let rhs = targets[b].reward as i128 * (da - now + 1) as i128;
                lhs.cmp(&rhs).then(b.cmp(&a))
            });
        let Some((j, done)) = pick else { break };
        used[j] = true;
        order.push(j);
        value += targets[j].reward;
        now = done;
        at = targets[j].vertex;
    }
    let mut tour = Tour { value, order, length: now + back(at), explored_states: 0 };
    if let Some((j, done)) = (0..targets.len())
        .filter_map(|j| fits(j, root, 0).map(|d| (j, d)))
        .max_by(|a, b| targets[a.0].reward.cmp(&targets[b.0].reward).then(b.0.cmp(&a.0)))
    {
        if targets[j].reward > tour.value {
            tour = Tour { value: targets[j].reward, order: vec![j], length: done + back(targets[j].vertex), explored_states: 0 };
        }
    }
    tour
}
