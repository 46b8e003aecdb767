//! Offline approximation: given a (predicted) instance, build a walk with
//! service time `S`.
//!
//! `offline_solve` dispatches on `S` against the diameter `D`:
//!
//! * `S >= D`: reduce to single-machine job scheduling ([`large_service_solve`]).
//! * `S < D`: move to `S = 0` on an augmented graph ([`augment_service`]),
//!   solve long windows with aligned phases ([`aligned_phase`]) and short
//!   ones with the window-class scheme ([`window_class_solve`]), and map back.
//!
//! The best candidate by true coverage is returned, together with two cheap
//! guards (best single request, best single vertex).

mod aligned;
mod augment;
mod large_service;
mod thin;
mod window_class;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{MetricGraph, Vertex};
use crate::model::{coverage, Instance, Time, Walk};
use crate::oracle::{orienteering_exact, orienteering_greedy, JobMode, Target, Tour, TourMode, MAX_EXACT_JOBS, MAX_TARGETS};

pub use aligned::aligned_phase;
pub use augment::{augment_service, BackMap};
pub use large_service::large_service_solve;
pub use thin::thin_walk;
pub use window_class::window_class_solve;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrienteeringChoice {
    /// Exact up to the target limit, greedy beyond it.
    #[default]
    Auto,
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfflineConfig {
    pub orienteering: OrienteeringChoice,
    /// Job solver for large service times; `None` picks exact when small.
    #[serde(default)]
    pub jobs: Option<JobMode>,
}

impl OfflineConfig {
    pub fn greedy() -> Self {
        OfflineConfig { orienteering: OrienteeringChoice::Greedy, jobs: None }
    }

    pub(crate) fn job_mode(&self, jobs: usize) -> JobMode {
        self.jobs.unwrap_or(if jobs <= MAX_EXACT_JOBS { JobMode::Exact } else { JobMode::LocalRatio })
    }

    pub(crate) fn orienteer(
        &self,
        graph: &MetricGraph,
        targets: &[Target],
        root: Vertex,
        budget: Time,
        mode: TourMode,
    ) -> Result<Tour> {
        match self.orienteering {
            OrienteeringChoice::Exact => orienteering_exact(graph, targets, root, budget, mode),
            OrienteeringChoice::Greedy => Ok(orienteering_greedy(graph, targets, root, budget, mode)),
            OrienteeringChoice::Auto if targets.len() > MAX_TARGETS => {
                Ok(orienteering_greedy(graph, targets, root, budget, mode))
            }
            OrienteeringChoice::Auto => orienteering_exact(graph, targets, root, budget, mode),
        }
    }
}

/// A walk under construction together with its clock.
#[derive(Debug, Clone)]
pub(crate) struct Cursor {
    pub walk: Walk,
    pub t: Time,
}

impl Cursor {
    pub fn new(v: Vertex, t: Time) -> Self {
        Cursor { walk: Walk::new(v, t), t }
    }

    pub fn at(&self) -> Vertex {
        self.walk.current_vertex()
    }

    pub fn goto(&mut self, graph: &MetricGraph, v: Vertex) {
        self.t += graph.dist(self.at(), v);
        self.walk.push_move(v);
    }

    pub fn idle(&mut self, steps: Time) {
        if steps > 0 {
            self.walk.push_idle(steps);
            self.t += steps;
        }
    }

    pub fn idle_until(&mut self, t: Time) {
        self.idle(t - self.t);
    }
}

/// Reward-maximising walk with the instance's service time.
pub fn offline_solve(instance: &Instance, cfg: &OfflineConfig) -> Result<Walk> {
    let mut candidates = guards(instance);
    let d = instance.graph().diameter();
    let s = instance.service();
    if !instance.is_empty() && d > 0 {
        if s >= d {
            candidates.push(large_service_solve(instance, cfg)?);
        } else {
            candidates.extend(zero_service_pipeline(instance, cfg)?);
        }
    }
    Ok(best_of(instance, candidates))
}

/// Solves `instance` (service `S < D`) through the `S = 0` reduction.
fn zero_service_pipeline(instance: &Instance, cfg: &OfflineConfig) -> Result<Vec<Walk>> {
    let (zero, back) = if instance.service() == 0 {
        (instance.clone(), None)
    } else {
        let (aug, back) = augment_service(instance)?;
        (aug, Some(back))
    };
    let d0 = zero.graph().diameter();
    let (long, short): (Vec<_>, Vec<_>) = zero.requests().iter().partition(|q| q.window() >= 4 * d0);
    let mut walks = Vec::new();
    if !long.is_empty() {
        walks.push(aligned_phase(&Instance::from_parts(zero.graph().clone(), long, 0, zero.root()), cfg)?);
    }
    if !short.is_empty() {
        walks.push(window_class_solve(&Instance::from_parts(zero.graph().clone(), short, 0, zero.root()), cfg)?);
    }
    match back {
        None => Ok(walks),
        Some(b) => walks.iter().map(|w| b.apply(w)).collect(),
    }
}

/// Serving the single best request, and sitting on the single best vertex.
fn guards(instance: &Instance) -> Vec<Walk> {
    let g = instance.graph();
    let s = instance.service();
    let horizon = instance.horizon();
    let start_of = |v: Vertex| match instance.root() {
        Some(r) => (r, g.dist(r, v)),
        None => (v, 0),
    };
    let mut out = Vec::new();
    let best = instance
        .requests()
        .iter()
        .filter(|q| start_of(q.vertex).1.max(q.release) + s <= q.deadline)
        .max_by(|a, b| a.reward.cmp(&b.reward).then(std::cmp::Ordering::Greater));
    if let Some(q) = best {
        let (from, _) = start_of(q.vertex);
        let mut c = Cursor::new(from, 0);
        c.goto(g, q.vertex);
        c.idle_until(q.release.max(c.t) + s);
        out.push(c.walk);
    }
    let vertices: Vec<Vertex> = match instance.root() {
        Some(r) => vec![r],
        None => (0..g.n()).collect(),
    };
    for v in vertices {
        let mut c = Cursor::new(v, 0);
        c.idle_until(horizon);
        out.push(c.walk);
    }
    out
}

/// Highest-coverage walk; earlier candidates win ties.
fn best_of(instance: &Instance, candidates: Vec<Walk>) -> Walk {
    let mut best: Option<(u64, Walk)> = None;
    for w in candidates {
        let r = coverage(&w, instance).map(|c| c.reward).unwrap_or(0);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, w));
        }
    }
    best.map(|(_, w)| w).unwrap_or_else(|| Walk::new(instance.root().unwrap_or(0), 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Request;
    use crate::oracle::opt_twtsp;

    #[test]
    fn tiny_instance_is_optimal() {
        let g = MetricGraph::line(3, 1).unwrap();
        let inst = Instance::new(g, vec![Request::new(2, 0, 3, 4)], 1, None).unwrap();
        let w = offline_solve(&inst, &OfflineConfig::default()).unwrap();
        assert_eq!(coverage(&w, &inst).unwrap().reward, 4);
    }

    #[test]
    fn service_gap_line_instance() {
        let g = MetricGraph::line(3, 1).unwrap();
        let reqs = vec![Request::new(0, 0, 4, 1), Request::new(1, 0, 4, 1), Request::new(2, 1, 5, 1)];
        let inst = Instance::new(g, reqs, 2, Some(0)).unwrap();
        let w = offline_solve(&inst, &OfflineConfig::default()).unwrap();
        assert!(w.validate(inst.graph()).is_ok());
        assert!(coverage(&w, &inst).unwrap().reward >= 1);
        assert_eq!(w.start_vertex, 0);
        assert_eq!(w.start_time, 0);
    }

    #[test]
    fn empty_instance() {
        let g = MetricGraph::line(3, 1).unwrap();
        let inst = Instance::new(g, vec![], 1, None).unwrap();
        let w = offline_solve(&inst, &OfflineConfig::default()).unwrap();
        assert!(w.validate(inst.graph()).is_ok());
    }

    #[test]
    fn never_beats_oracle_and_stays_feasible() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..=5);
            let edges: Vec<_> = (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(1..4))).collect();
            let g = MetricGraph::build(n, &edges).unwrap();
            let s = rng.gen_range(0..=3);
            let k = rng.gen_range(0..=4);
            let reqs = (0..k)
                .map(|_| {
                    let r = rng.gen_range(0..10);
                    Request::new(rng.gen_range(0..n), r, r + rng.gen_range(s.max(1)..=s + 6), rng.gen_range(1..5))
                })
                .collect();
            let root = rng.gen_bool(0.3).then(|| rng.gen_range(0..n));
            let inst = Instance::new(g, reqs, s, root).unwrap();
            for cfg in [OfflineConfig::default(), OfflineConfig::greedy()] {
                let w = offline_solve(&inst, &cfg).unwrap();
                assert!(w.validate(inst.graph()).is_ok());
                if let Some(r) = root {
                    assert_eq!((w.start_vertex, w.start_time), (r, 0));
                }
                let got = coverage(&w, &inst).unwrap().reward;
                assert!(got <= opt_twtsp(&inst).unwrap().value);
            }
        }
    }
}
