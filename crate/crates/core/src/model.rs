//! Requests, instances, walks and the coverage semantics of TW-TSP with
//! service times.
//!
//! Time is discrete. A walk is a start position plus a list of moves (along
//! shortest paths, endpoints only) and idle periods. It occupies a vertex over
//! a sequence of *stays*: maximal intervals `[arrive, depart]` between moves.
//! A request `(v, r, d, pi)` is covered at service time `S >= 1` when some
//! stay at `v` contains `S` consecutive idle steps starting at a `tau` with
//! `r <= tau <= d - S`. With `S = 0` the walk merely has to occupy `v` at an
//! integer time in `[r, d]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Vertex};

pub type Time = i64;
pub type Reward = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Request {
    #[serde(rename = "v")]
    pub vertex: Vertex,
    #[serde(rename = "r")]
    pub release: Time,
    #[serde(rename = "d")]
    pub deadline: Time,
    #[serde(rename = "pi")]
    pub reward: Reward,
}

impl Request {
    pub fn new(vertex: Vertex, release: Time, deadline: Time, reward: Reward) -> Self {
        Request { vertex, release, deadline, reward }
    }

    #[inline]
    pub fn window(&self) -> Time {
        self.deadline - self.release
    }

    fn check(&self, index: usize, graph: &MetricGraph) -> Result<()> {
        let bad = |reason: &str| Error::InvalidRequest { index, reason: reason.to_string() };
        if !graph.contains(self.vertex) {
            return Err(Error::VertexOutOfRange { vertex: self.vertex, n: graph.n() });
        }
        if self.release < 0 {
            return Err(bad("negative release time"));
        }
        if self.deadline <= self.release {
            return Err(bad("deadline must exceed release"));
        }
        if self.reward < 1 {
            return Err(bad("reward must be positive"));
        }
        Ok(())
    }
}

/// A graph, a request sequence, a uniform service time and an optional root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceSpec", into = "InstanceSpec")]
pub struct Instance {
    graph: MetricGraph,
    requests: Vec<Request>,
    service: Time,
    root: Option<Vertex>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub graph: MetricGraph,
    pub service: Time,
    #[serde(default)]
    pub root: Option<Vertex>,
    pub requests: Vec<Request>,
}

impl TryFrom<InstanceSpec> for Instance {
    type Error = Error;

    fn try_from(s: InstanceSpec) -> Result<Self> {
        Instance::new(s.graph, s.requests, s.service, s.root)
    }
}

impl From<Instance> for InstanceSpec {
    fn from(i: Instance) -> Self {
        InstanceSpec { graph: i.graph, service: i.service, root: i.root, requests: i.requests }
    }
}

impl Instance {
    pub fn new(
        graph: MetricGraph,
        requests: Vec<Request>,
        service: Time,
        root: Option<Vertex>,
    ) -> Result<Self> {
        if service < 0 {
            return Err(Error::InvalidInstance(format!("negative service time {service}")));
        }
        if let Some(r) = root {
            if !graph.contains(r) {
                return Err(Error::VertexOutOfRange { vertex: r, n: graph.n() });
            }
        }
        for (i, req) in requests.iter().enumerate() {
            req.check(i, &graph)?;
        }
        Ok(Instance { graph, requests, service, root })
    }

    /// Skips per-request checks. Used for derived instances whose windows may
    /// collapse to a single instant (`r == d`, meaningful only at `S = 0`).
    pub(crate) fn from_parts(graph: MetricGraph, requests: Vec<Request>, service: Time, root: Option<Vertex>) -> Self {
        Instance { graph, requests, service, root }
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn service(&self) -> Time {
        self.service
    }

    pub fn root(&self) -> Option<Vertex> {
        self.root
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Shortest window length; `None` without requests.
    pub fn l_min(&self) -> Option<Time> {
        self.requests.iter().map(Request::window).min()
    }

    pub fn l_max(&self) -> Option<Time> {
        self.requests.iter().map(Request::window).max()
    }

    /// Latest deadline; no action after it can change coverage.
    pub fn horizon(&self) -> Time {
        self.requests.iter().map(|r| r.deadline).max().unwrap_or(0)
    }

    pub fn with_service(&self, service: Time) -> Self {
        Instance { service, ..self.clone() }
    }

    pub fn with_root(&self, root: Option<Vertex>) -> Self {
        Instance { root, ..self.clone() }
    }

    pub fn with_requests(&self, requests: Vec<Request>) -> Result<Self> {
        Instance::new(self.graph.clone(), requests, self.service, self.root)
    }

    /// Indices violating `dist(root, v) <= r`. Always empty when unrooted.
    pub fn rooted_reachability_violations(&self) -> Vec<usize> {
        let Some(root) = self.root else { return Vec::new() };
        self.requests
            .iter()
            .enumerate()
            .filter(|(_, q)| self.graph.dist(root, q.vertex) > q.release)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn total_reward(&self) -> Reward {
        self.requests.iter().map(|r| r.reward).sum()
    }
}

/// Smallest window over the union of two request sequences.
pub fn joint_l_min(a: &Instance, b: &Instance) -> Option<Time> {
    match (a.l_min(), b.l_min()) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// One step of a walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Action {
    /// Travel along a shortest path. `duration`, when present, is the clock
    /// advance recorded by whoever produced the walk and must equal the
    /// shortest-path distance.
    Move {
        #[serde(rename = "move")]
        to: Vertex,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration: Option<Time>,
    },
    Idle {
        idle: Time,
    },
}

impl Action {
    pub fn move_to(to: Vertex) -> Self {
        Action::Move { to, duration: None }
    }

    pub fn idle(steps: Time) -> Self {
        Action::Idle { idle: steps }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walk {
    pub start_vertex: Vertex,
    pub start_time: Time,
    pub actions: Vec<Action>,
}

/// A maximal interval during which a walk sits on one vertex. `depart ==
/// arrive` for a pass-through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stay {
    pub vertex: Vertex,
    pub arrive: Time,
    pub depart: Time,
}

impl Stay {
    pub fn idle_steps(&self) -> Time {
        self.depart - self.arrive
    }
}

/// A place the walk must reach by `ready` and leave no earlier than `leave`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Visit {
    pub vertex: Vertex,
    pub ready: Time,
    pub leave: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub action: Option<usize>,
    pub time: Time,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            Some(i) => write!(f, "action {} at t={}: {}", i, self.time, self.message),
            None => write!(f, "t={}: {}", self.time, self.message),
        }
    }
}

impl Walk {
    pub fn new(start_vertex: Vertex, start_time: Time) -> Self {
        Walk { start_vertex, start_time, actions: Vec::new() }
    }

    /// Appends an idle period, merging with a trailing idle. Non-positive
    /// durations are ignored.
    pub fn push_idle(&mut self, steps: Time) {
        if steps <= 0 {
            return;
        }
        if let Some(Action::Idle { idle }) = self.actions.last_mut() {
            *idle += steps;
        } else {
            self.actions.push(Action::idle(steps));
        }
    }

    /// Appends a move unless `to` is already the current vertex.
    pub fn push_move(&mut self, to: Vertex) {
        if self.current_vertex() != to {
            self.actions.push(Action::move_to(to));
        }
    }

    pub fn current_vertex(&self) -> Vertex {
        self.actions
            .iter()
            .rev()
            .find_map(|a| match *a {
                Action::Move { to, .. } => Some(to),
                Action::Idle { .. } => None,
            })
            .unwrap_or(self.start_vertex)
    }

    pub fn end_time(&self, graph: &MetricGraph) -> Time {
        self.stays(graph).last().map(|s| s.depart).unwrap_or(self.start_time)
    }

    /// Checks vertex ranges, durations against `graph` and the start time.
    /// Returns every violation found.
    pub fn validate(&self, graph: &MetricGraph) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut t = self.start_time;
        if self.start_time < 0 {
            out.push(Violation { action: None, time: t, message: "negative start time".into() });
        }
        let mut at = self.start_vertex;
        let mut at_valid = graph.contains(at);
        if !at_valid {
            out.push(Violation {
                action: None,
                time: t,
                message: format!("start vertex {at} out of range"),
            });
        }
        for (i, a) in self.actions.iter().enumerate() {
            match *a {
                Action::Idle { idle } => {
                    if idle <= 0 {
                        out.push(Violation {
                            action: Some(i),
                            time: t,
                            message: "non-positive idle".into(),
                        });
                    } else {
                        t += idle;
                    }
                }
                Action::Move { to, duration } => {
                    if !graph.contains(to) {
                        out.push(Violation {
                            action: Some(i),
                            time: t,
                            message: format!("vertex {to} out of range"),
                        });
                        at_valid = false;
                        t += duration.unwrap_or(0).max(0);
                        continue;
                    }
                    let expected = if at_valid { Some(graph.dist(at, to)) } else { None };
                    match (duration, expected) {
                        (Some(rec), Some(exp)) if rec != exp => {
                            out.push(Violation {
                                action: Some(i),
                                time: t,
                                message: format!(
                                    "move duration mismatch: recorded {rec}, distance {exp}"
                                ),
                            });
                            t += rec.max(0);
                        }
                        (_, Some(exp)) => t += exp,
                        (Some(rec), None) => t += rec.max(0),
                        (None, None) => {}
                    }
                    at = to;
                    at_valid = true;
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// The stays of a feasible walk, in time order. Callers should validate
    /// first; durations are always taken from the graph.
    pub fn stays(&self, graph: &MetricGraph) -> Vec<Stay> {
        let mut stays = Vec::with_capacity(self.actions.len() / 2 + 1);
        let mut cur = Stay { vertex: self.start_vertex, arrive: self.start_time, depart: self.start_time };
        for a in &self.actions {
            match *a {
                Action::Idle { idle } => cur.depart += idle.max(0),
                Action::Move { to, .. } => {
                    if to == cur.vertex {
                        continue;
                    }
                    let t = cur.depart + graph.dist(cur.vertex, to);
                    stays.push(cur);
                    cur = Stay { vertex: to, arrive: t, depart: t };
                }
            }
        }
        stays.push(cur);
        stays
    }

    /// Builds a walk honouring each visit in order. The walk starts at the
    /// first visit (at its `ready` time) unless `start` is given.
    pub fn from_visits(
        graph: &MetricGraph,
        start: Option<(Vertex, Time)>,
        visits: &[Visit],
    ) -> Result<Walk> {
        let mut iter = visits.iter().peekable();
        let (mut walk, mut t) = match (start, iter.peek()) {
            (Some((v, t0)), _) => (Walk::new(v, t0), t0),
            (None, Some(first)) => (Walk::new(first.vertex, first.ready), first.ready),
            (None, None) => return Ok(Walk::new(0, 0)),
        };
        for v in iter {
            let cur = walk.current_vertex();
            if cur != v.vertex {
                t += graph.dist(cur, v.vertex);
                walk.push_move(v.vertex);
            }
            if t > v.ready {
                return Err(Error::InfeasibleWalk(vec![format!(
                    "vertex {} reached at t={} after its ready time {}",
                    v.vertex, t, v.ready
                )]));
            }
            walk.push_idle(v.leave - t);
            t = t.max(v.leave);
        }
        Ok(walk)
    }
}

/// Validates `walk` against `graph`.
pub fn validate_walk(walk: &Walk, graph: &MetricGraph) -> std::result::Result<(), Vec<Violation>> {
    walk.validate(graph)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub covered: BTreeSet<usize>,
    pub reward: Reward,
    /// Earliest feasible service start per covered request.
    pub service_starts: BTreeMap<usize, Time>,
}

/// Covered requests of `walk` at the instance's service time.
pub fn coverage(walk: &Walk, instance: &Instance) -> Result<CoverageReport> {
    coverage_at(walk, instance, instance.service())
}

/// Covered requests of `walk` at an explicit service time.
pub fn coverage_at(walk: &Walk, instance: &Instance, service: Time) -> Result<CoverageReport> {
    walk.validate(instance.graph())
        .map_err(|v| Error::InfeasibleWalk(v.iter().map(|x| x.to_string()).collect()))?;
    let stays = walk.stays(instance.graph());
    Ok(coverage_of_stays(&stays, instance.requests(), service))
}

pub(crate) fn coverage_of_stays(stays: &[Stay], requests: &[Request], service: Time) -> CoverageReport {
    let mut report = CoverageReport::default();
    for (i, q) in requests.iter().enumerate() {
        let start = stays.iter().filter(|s| s.vertex == q.vertex).find_map(|s| {
            let tau = s.arrive.max(q.release);
            let last = if service == 0 {
                s.depart.min(q.deadline)
            } else {
                (s.depart - service).min(q.deadline - service)
            };
            (tau <= last).then_some(tau)
        });
        if let Some(tau) = start {
            report.covered.insert(i);
            report.service_starts.insert(i, tau);
            report.reward += q.reward;
        }
    }
    report
}

/// A request whose reward is a random variable with finite support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomRewardRequest {
    pub vertex: Vertex,
    pub release: Time,
    pub deadline: Time,
    /// `(value, weight)` pairs; probabilities are weights over their sum.
    pub outcomes: Vec<(Reward, u64)>,
}

/// Replaces random rewards by their expectations. Expectations are scaled by
/// the least common denominator so rewards stay integral; the returned scale
/// divides every reward back into the expectation. Coverage does not depend
/// on reward values, so optima scale linearly.
pub fn expected_reward_instance(
    graph: MetricGraph,
    requests: &[RandomRewardRequest],
    service: Time,
    root: Option<Vertex>,
) -> Result<(Instance, u64)> {
    let mut means = Vec::with_capacity(requests.len());
    for (i, q) in requests.iter().enumerate() {
        let total: u64 = q.outcomes.iter().map(|&(_, w)| w).sum();
        if total == 0 {
            return Err(Error::InvalidRequest { index: i, reason: "empty reward distribution".into() });
        }
        let num: u64 = q.outcomes.iter().map(|&(v, w)| v * w).sum();
        let g = num.gcd(&total).max(1);
        means.push((num / g, total / g));
    }
    let scale = means.iter().fold(1u64, |acc, &(_, den)| acc.lcm(&den));
    let reqs = requests
        .iter()
        .zip(&means)
        .map(|(q, &(num, den))| Request::new(q.vertex, q.release, q.deadline, num * (scale / den)))
        .collect();
    Ok((Instance::new(graph, reqs, service, root)?, scale))
}
