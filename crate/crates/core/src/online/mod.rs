//! Prediction-following online algorithms.
//!
//! A precomputed walk `W'` serves the predicted requests with service time
//! `S'`. The online walk replays `W'` shifted by `eps * K` (`K = l_min / 2`)
//! and, at the shifted service start of each predicted request `W'` covers,
//! spends up to `S'` steps on a detour to true requests revealed so far. One-to-one detours go
//! out to a single request, idle one step and come back; many-to-one detours
//! run a best orienteering cycle through several requests.
//!
//! Neither routine sees a matching: only the graph, the predictions, `W'`,
//! the stream and `l_min`.

mod stream;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Vertex};
use crate::model::{coverage_at, CoverageReport, Instance, Request, Reward, Time, Walk};
use crate::offline::{Cursor, OrienteeringChoice};
use crate::oracle::{orienteering_exact, orienteering_greedy, Target, TourMode, MAX_TARGETS};

pub use stream::{OnlineStream, Reveal};

pub const EPSILONS: [i8; 3] = [-1, 0, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetourMode {
    OneToOne,
    ManyToOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetourEntry {
    /// Predicted request whose stop hosted the detour.
    pub pred: usize,
    /// Shifted service start of the predicted request in `W'`.
    pub visit: Time,
    /// When the detour left; later than `visit` only behind a co-located
    /// detour.
    pub time: Time,
    /// True requests served, in visiting order.
    pub chosen: Vec<usize>,
    /// Steps spent away from the predicted vertex, service included.
    pub length: Time,
    pub reward: Reward,
    /// Largest reward of a single candidate that fits the block alone.
    pub best_single: Reward,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnlineRunResult {
    pub walk: Walk,
    /// Coverage of the true requests at unit service.
    pub covered: CoverageReport,
    pub epsilon: i8,
    pub detour_log: Vec<DetourEntry>,
    /// Number of covered predicted requests in `W'`.
    pub stops: usize,
    #[serde(skip)]
    pub reveals: Vec<Reveal>,
}

/// True requests a detour from `pred` starting at `t` can serve.
///
/// A revealed request qualifies when `r <= t <= d - dist - 1` (reach it and
/// idle one step before its deadline). One-to-one detours also need the
/// round trip plus service to fit the block: `2 dist + 1 <= S'`.
pub fn reachable_set(
    pred: &Request,
    t: Time,
    revealed: &[(usize, Request)],
    s_prime: Time,
    mode: DetourMode,
    graph: &MetricGraph,
) -> Vec<usize> {
    revealed
        .iter()
        .filter(|(_, q)| {
            let l = graph.dist(pred.vertex, q.vertex);
            let timely = q.release <= t && t <= q.deadline - l - 1;
            timely && (mode == DetourMode::ManyToOne || 2 * l + 1 <= s_prime)
        })
        .map(|(i, _)| *i)
        .collect()
}

/// A covered predicted request and its service start in `W'`.
#[derive(Debug, Clone, Copy)]
struct Stop {
    pred: usize,
    slot: Time,
}

/// Stays of `W'` with the predicted requests each one covers, in order of
/// service start. Co-located requests may share a start.
fn plan_stops(walk: &Walk, pred: &Instance) -> Result<Vec<(crate::model::Stay, Vec<Stop>)>> {
    let starts = coverage_at(walk, pred, pred.service())?.service_starts;
    let mut done = vec![false; pred.len()];
    let mut out = Vec::new();
    for stay in walk.stays(pred.graph()) {
        let mut stops: Vec<Stop> = starts
            .iter()
            .filter(|&(&j, &t)| {
                !done[j] && pred.requests()[j].vertex == stay.vertex && stay.arrive <= t && t <= stay.depart
            })
            .map(|(&j, &t)| Stop { pred: j, slot: t })
            .collect();
        stops.sort_by_key(|x| {
            let q = &pred.requests()[x.pred];
            (x.slot, q.deadline, q.release, x.pred)
        });
        for x in &stops {
            done[x.pred] = true;
        }
        out.push((stay, stops));
    }
    Ok(out)
}

/// One-to-one detours: a single request per stop.
pub fn run_online(
    graph: &MetricGraph,
    pred: &Instance,
    precomputed: &Walk,
    stream: OnlineStream,
    epsilon: i8,
    l_min: Time,
) -> Result<OnlineRunResult> {
    run(graph, pred, precomputed, stream, epsilon, l_min, DetourMode::OneToOne, OrienteeringChoice::Exact)
}

/// Many-to-one detours through orienteering cycles (exact when small).
pub fn run_online_many(
    graph: &MetricGraph,
    pred: &Instance,
    precomputed: &Walk,
    stream: OnlineStream,
    epsilon: i8,
    l_min: Time,
) -> Result<OnlineRunResult> {
    run(graph, pred, precomputed, stream, epsilon, l_min, DetourMode::ManyToOne, OrienteeringChoice::Auto)
}

/// Either algorithm with an explicit cycle solver choice.
#[allow(clippy::too_many_arguments)]
pub fn run(
    graph: &MetricGraph,
    pred: &Instance,
    precomputed: &Walk,
    mut stream: OnlineStream,
    epsilon: i8,
    l_min: Time,
    mode: DetourMode,
    solver: OrienteeringChoice,
) -> Result<OnlineRunResult> {
    if !EPSILONS.contains(&epsilon) {
        return Err(Error::InvalidParams(format!("epsilon must be -1, 0 or 1, got {epsilon}")));
    }
    let s_prime = pred.service();
    if s_prime < 1 {
        return Err(Error::InvalidParams("online service time S' must be at least 1".into()));
    }
    precomputed
        .validate(graph)
        .map_err(|v| Error::InfeasiblePrecomputedWalk(v.iter().map(|x| x.to_string()).collect()))?;
    let k = l_min.max(0) / 2;
    let shift = epsilon as Time * k;

    let plan = plan_stops(precomputed, pred)?;
    let stops = plan.iter().map(|(_, s)| s.len()).sum();
    let mut revealed: Vec<(usize, Request)> = Vec::new();
    let mut served = vec![false; 0];
    let mut log = Vec::new();
    let mut cursor: Option<Cursor> = None;
    // the walk ends with the last stop it served
    let mut keep = 0;

    for (stay, stops_here) in &plan {
        let depart = stay.depart + shift;
        if depart < 0 {
            continue;
        }
        let arrive = (stay.arrive + shift).max(0);
        let c = cursor.get_or_insert_with(|| Cursor::new(stay.vertex, arrive));
        c.goto(graph, stay.vertex);
        c.idle_until(arrive);
        for (n, stop) in stops_here.iter().enumerate() {
            let visit = stop.slot + shift;
            if visit < 0 {
                continue;
            }
            c.idle_until(visit);
            // an earlier detour from a co-located stop may still be running
            let t = c.t;
            for (i, q) in stream.advance(t) {
                if served.len() <= i {
                    served.resize(i + 1, false);
                }
                revealed.push((i, q));
            }
            let p = &pred.requests()[stop.pred];
            let cands: Vec<usize> = reachable_set(p, t, &revealed, s_prime, mode, graph)
                .into_iter()
                .filter(|&i| !served[i])
                .collect();
            let lookup = |i: usize| revealed.iter().find(|x| x.0 == i).map(|x| x.1).expect("revealed");
            let mut entry = match mode {
                DetourMode::OneToOne => one_to_one_detour(graph, c, p.vertex, t, stop.pred, &cands, lookup),
                DetourMode::ManyToOne => many_to_one_detour(graph, c, p.vertex, t, s_prime, stop.pred, &cands, lookup, solver)?,
            };
            entry.visit = visit;
            for &i in &entry.chosen {
                served[i] = true;
            }
            log.push(entry);
            let hold = match stops_here.get(n + 1) {
                Some(next) => (t + s_prime).min(next.slot + shift),
                None => t + s_prime,
            };
            c.idle_until(hold);
            keep = c.walk.actions.len();
        }
        c.idle_until(depart);
    }

    let (requests, reveals) = stream.finish();
    let walk = match cursor {
        Some(mut c) => {
            c.walk.actions.truncate(keep);
            c.walk
        }
        None => Walk::new(precomputed.start_vertex, 0),
    };
    let truth = Instance::from_parts(graph.clone(), requests, 1, None);
    let covered = coverage_at(&walk, &truth, 1)?;
    Ok(OnlineRunResult { walk, covered, epsilon, detour_log: log, stops, reveals })
}

fn one_to_one_detour(
    graph: &MetricGraph,
    c: &mut Cursor,
    home: Vertex,
    t: Time,
    pred: usize,
    cands: &[usize],
    lookup: impl Fn(usize) -> Request,
) -> DetourEntry {
    let pick = cands.iter().copied().max_by(|&a, &b| lookup(a).reward.cmp(&lookup(b).reward).then(b.cmp(&a)));
    let best_single = pick.map(|i| lookup(i).reward).unwrap_or(0);
    let Some(i) = pick else {
        return DetourEntry { pred, visit: t, time: t, chosen: vec![], length: 0, reward: 0, best_single };
    };
    let q = lookup(i);
    let l = graph.dist(home, q.vertex);
    c.goto(graph, q.vertex);
    c.idle(1);
    c.goto(graph, home);
    DetourEntry { pred, visit: t, time: t, chosen: vec![i], length: 2 * l + 1, reward: q.reward, best_single }
}

#[allow(clippy::too_many_arguments)]
fn many_to_one_detour(
    graph: &MetricGraph,
    c: &mut Cursor,
    home: Vertex,
    t: Time,
    s_prime: Time,
    pred: usize,
    cands: &[usize],
    lookup: impl Fn(usize) -> Request,
    solver: OrienteeringChoice,
) -> Result<DetourEntry> {
    let targets: Vec<Target> = cands
        .iter()
        .map(|&i| {
            let q = lookup(i);
            Target { vertex: q.vertex, reward: q.reward, service: 1, earliest_start: 0, latest_start: Some(q.deadline - 1 - t) }
        })
        .collect();
    let best_single = targets
        .iter()
        .filter(|x| 2 * graph.dist(home, x.vertex) + 1 <= s_prime)
        .map(|x| x.reward)
        .max()
        .unwrap_or(0);
    let tour = match solver {
        OrienteeringChoice::Greedy => orienteering_greedy(graph, &targets, home, s_prime, TourMode::Cycle),
        OrienteeringChoice::Auto if targets.len() > MAX_TARGETS => {
            orienteering_greedy(graph, &targets, home, s_prime, TourMode::Cycle)
        }
        _ => orienteering_exact(graph, &targets, home, s_prime, TourMode::Cycle)?,
    };
    for &k in &tour.order {
        c.goto(graph, targets[k].vertex);
        c.idle(1);
    }
    c.goto(graph, home);
    Ok(DetourEntry {
        pred,
        visit: t,
        time: t,
        chosen: tour.order.iter().map(|&k| cands[k]).collect(),
        length: tour.length,
        reward: tour.value,
        best_single,
    })
}

/// Candidate values for an unknown location error: `0` and the powers of two
/// up to `l_min / 4`.
pub fn lambda_guesses(l_min: Time) -> Vec<Time> {
    let mut out = vec![0];
    let mut g = 1;
    while 4 * g <= l_min {
        out.push(g);
        g *= 2;
    }
    out
}

/// Runs `runner(S')` with `S' = 2g + 1` for a guess `g` drawn uniformly from
/// [`lambda_guesses`]. Returns the guess with the run.
pub fn guess_lambda<F>(runner: F, l_min: Time, seed: u64) -> Result<(Time, OnlineRunResult)>
where
    F: FnOnce(Time) -> Result<OnlineRunResult>,
{
    let g = draw_guess(l_min, seed);
    Ok((g, runner(2 * g + 1)?))
}

/// The guess [`guess_lambda`] would use for `(l_min, seed)`.
pub fn draw_guess(l_min: Time, seed: u64) -> Time {
    let guesses = lambda_guesses(l_min);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    guesses[rng.gen_range(0..guesses.len())]
}
