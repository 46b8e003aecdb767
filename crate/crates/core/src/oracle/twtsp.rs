use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::model::{Instance, Reward, Time, Walk};

use super::OracleResult;

pub const DEFAULT_STATE_BUDGET: u128 = 100_000_000;

const UNSEEN: u32 = u32::MAX;
const ROOT: u32 = u32::MAX - 1;

/// Exact optimum of TW-TSP with the instance's service time, within the
/// default state budget.
pub fn opt_twtsp(instance: &Instance) -> Result<OracleResult> {
    opt_twtsp_with_budget(instance, DEFAULT_STATE_BUDGET)
}

/// Number of DP states `opt_twtsp` would allocate for `instance`.
pub fn state_count(instance: &Instance) -> u128 {
    let horizon = instance.horizon().max(0) as u128 + 1;
    let runs = instance.service().max(1) as u128;
    let masks = 1u128 << instance.len().min(100);
    horizon * instance.graph().n() as u128 * runs * masks
}

/// Dynamic program over `(time, vertex, idle run, covered mask)`.
///
/// The idle run counts consecutive idle steps at the current vertex, capped
/// at `S - 1`. Each idle step that completes an `S`-block starting at `tau`
/// marks every request at the vertex whose window admits `tau`; covering more
/// never hurts, so marking is forced rather than branched on. With `S = 0`
/// every occupied `(vertex, time)` marks the requests open at that time.
/// Unrooted walks start at `t = 0` at any vertex: a later start is dominated
/// by idling from `t = 0`.
pub fn opt_twtsp_with_budget(instance: &Instance, budget: u128) -> Result<OracleResult> {
    let required = state_count(instance);
    if required > budget || required >= u128::from(ROOT) || instance.len() > 30 {
        return Err(Error::StateBudgetExceeded { required, budget });
    }
    let graph = instance.graph();
    let reqs = instance.requests();
    let n = graph.n();
    let m = reqs.len();
    let service = instance.service();
    let horizon = instance.horizon().max(0) as usize;
    let runs = service.max(1) as usize;
    let masks = 1usize << m;

    // cover[v][t]: requests at v served by a block starting at t (S >= 1), or
    // open while the walk occupies v at t (S = 0).
    let mut cover = vec![0u32; n * (horizon + 1)];
    for (i, q) in reqs.iter().enumerate() {
        let last = if service == 0 { q.deadline } else { q.deadline - service };
        for t in q.release.max(0)..=last.min(horizon as Time) {
            cover[q.vertex * (horizon + 1) + t as usize] |= 1 << i;
        }
    }
    let cov = |v: Vertex, t: usize| cover[v * (horizon + 1) + t];
    let mask_reward: Vec<Reward> = (0..masks)
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).map(|i| reqs[i].reward).sum())
        .collect();

    let idx = |t: usize, v: usize, run: usize, mask: usize| ((t * n + v) * runs + run) * masks + mask;
    let total = required as usize;
    let mut pred = vec![UNSEEN; total];

    let starts: Vec<Vertex> = match instance.root() {
        Some(r) => vec![r],
        None => (0..n).collect(),
    };
    for &v in &starts {
        let mask = if service == 0 { cov(v, 0) as usize } else { 0 };
        pred[idx(0, v, 0, mask)] = ROOT;
    }

    let mut explored = 0u64;
    let mut best = (0, None::<usize>);
    for t in 0..=horizon {
        for v in 0..n {
            for run in 0..runs {
                for mask in 0..masks {
                    let here = idx(t, v, run, mask);
                    if pred[here] == UNSEEN {
                        continue;
                    }
                    explored += 1;
                    if best.1.is_none() || mask_reward[mask] > best.0 {
                        best = (mask_reward[mask], Some(here));
                    }
                    if t == horizon {
                        continue;
                    }
                    // idle one step
                    let (run2, gained) = if service == 0 {
                        (0, cov(v, t + 1))
                    } else if run + 1 >= service as usize {
                        let tau = t + 1 - service as usize;
                        (service as usize - 1, cov(v, tau))
                    } else {
                        (run + 1, 0)
                    };
                    let next = idx(t + 1, v, run2, mask | gained as usize);
                    if pred[next] == UNSEEN {
                        pred[next] = here as u32;
                    }
                    // move
                    for u in 0..n {
                        if u == v {
                            continue;
                        }
                        let t2 = t + graph.dist(v, u) as usize;
                        if t2 > horizon {
                            continue;
                        }
                        let gained = if service == 0 { cov(u, t2) as usize } else { 0 };
                        let next = idx(t2, u, 0, mask | gained);
                        if pred[next] == UNSEEN {
                            pred[next] = here as u32;
                        }
                    }
                }
            }
        }
    }

    let decode = |s: usize| {
        let mask = s % masks;
        let rest = s / masks;
        let run = rest % runs;
        let rest = rest / runs;
        (rest / n, rest % n, run, mask)
    };
    let walk = best.1.map(|end| {
        let mut path = vec![end];
        let mut cur = end;
        while pred[cur] != ROOT {
            cur = pred[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        let (_, v0, _, _) = decode(path[0]);
        let mut walk = Walk::new(v0, 0);
        for w in path.windows(2) {
            let (t1, v1, _, _) = decode(w[0]);
            let (t2, v2, _, _) = decode(w[1]);
            if v1 == v2 {
                walk.push_idle((t2 - t1) as Time);
            } else {
                walk.push_move(v2);
            }
        }
        walk
    });
    Ok(OracleResult { value: best.0, walk, explored_states: explored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MetricGraph;
    use crate::model::{coverage, Request};

    #[test]
    fn sit_and_serve() {
        let g = MetricGraph::build(2, &[(0, 1, 3)]).unwrap();
        let inst = Instance::new(g, vec![Request::new(0, 0, 2, 7)], 1, None).unwrap();
        let res = opt_twtsp(&inst).unwrap();
        assert_eq!(res.value, 7);
        assert_eq!(coverage(res.walk.as_ref().unwrap(), &inst).unwrap().reward, 7);
    }

    #[test]
    fn service_gap_line_instance() {
        // three-vertex line, alpha = 1, windows of length 4, rooted at v0
        let g = MetricGraph::line(3, 1).unwrap();
        let reqs = vec![Request::new(0, 0, 4, 1), Request::new(1, 0, 4, 1), Request::new(2, 1, 5, 1)];
        let inst = Instance::new(g, reqs, 2, Some(0)).unwrap();
        assert_eq!(opt_twtsp(&inst).unwrap().value, 1);
        assert_eq!(opt_twtsp(&inst.with_service(1)).unwrap().value, 3);
    }

    #[test]
    fn zero_service_separation_line() {
        let g = MetricGraph::line(4, 1).unwrap();
        let reqs = (0..4).map(|i| Request::new(i, i as Time, i as Time + 2, 1)).collect();
        let inst = Instance::new(g, reqs, 0, None).unwrap();
        assert_eq!(opt_twtsp(&inst).unwrap().value, 4);
        assert_eq!(opt_twtsp(&inst.with_service(1)).unwrap().value, 2);
    }

    #[test]
    fn budget_guard() {
        let g = MetricGraph::line(4, 1).unwrap();
        let reqs = (0..4).map(|i| Request::new(i, 0, 50, 1)).collect();
        let inst = Instance::new(g, reqs, 1, None).unwrap();
        let err = opt_twtsp_with_budget(&inst, 100).unwrap_err();
        assert_eq!(err, Error::StateBudgetExceeded { required: 51 * 4 * 16, budget: 100 });
    }

    #[test]
    fn empty_instance() {
        let g = MetricGraph::line(2, 1).unwrap();
        let inst = Instance::new(g, vec![], 1, None).unwrap();
        assert_eq!(opt_twtsp(&inst).unwrap().value, 0);
    }
}
