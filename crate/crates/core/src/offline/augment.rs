use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph};
use crate::model::{Instance, Request, Visit, Walk};

/// Maps zero-service walks on an augmented graph back to the original.
#[derive(Debug, Clone)]
pub struct BackMap {
    original: Instance,
    augmented: Instance,
}

/// Removes service times: every original edge is doubled, each request gets a
/// pendant vertex `n + i` hanging off its vertex by an edge of length `S`,
/// and `(v, r, d, pi)` becomes `(n + i, 2r + S, 2d - S, pi)` at `S = 0`.
/// A window of length exactly `S` collapses to a single instant.
pub fn augment_service(instance: &Instance) -> Result<(Instance, BackMap)> {
    let s = instance.service();
    let g = instance.graph();
    if s < 1 {
        return Err(Error::InvalidInstance("augmentation needs service time >= 1".into()));
    }
    if s > g.diameter() {
        return Err(Error::ServiceExceedsDiameter { service: s, diameter: g.diameter() });
    }
    let n = g.n();
    let mut edges: Vec<Edge> = g.edges().iter().map(|&(u, v, l)| (u, v, 2 * l)).collect();
    let mut reqs = Vec::with_capacity(instance.len());
    for (i, q) in instance.requests().iter().enumerate() {
        edges.push((q.vertex, n + i, s));
        reqs.push(Request::new(n + i, 2 * q.release + s, 2 * q.deadline - s, q.reward));
    }
    let aug_graph = MetricGraph::build(n + instance.len(), &edges)?;
    let augmented = Instance::from_parts(aug_graph, reqs, 0, instance.root());
    Ok((augmented.clone(), BackMap { original: instance.clone(), augmented }))
}

impl BackMap {
    pub fn augmented(&self) -> &Instance {
        &self.augmented
    }

    /// Each pendant visit at time `T` becomes a service block starting at
    /// `ceil((T - S) / 2)` on the original graph. Consecutive blocks are at
    /// least `S + dist` apart, so the result is always feasible.
    pub fn apply(&self, walk: &Walk) -> Result<Walk> {
        let s = self.original.service();
        let g = self.original.graph();
        let n = g.n();
        let aug = &self.augmented;
        let mut seen = vec![false; aug.len()];
        let mut visits = Vec::new();
        for stay in walk.stays(aug.graph()) {
            if stay.vertex < n {
                continue;
            }
            let i = stay.vertex - n;
            let q = &aug.requests()[i];
            let t = stay.arrive.max(q.release);
            if seen[i] || t > stay.depart.min(q.deadline) {
                continue;
            }
            seen[i] = true;
            let start = (t - s).div_euclid(2) + (t - s).rem_euclid(2);
            visits.push(Visit { vertex: self.original.requests()[i].vertex, ready: start, leave: start + s });
        }
        let start = self.original.root().map(|r| (r, 0));
        if visits.is_empty() {
            let (v, t) = start.unwrap_or((0, 0));
            return Ok(Walk::new(v, t));
        }
        Walk::from_visits(g, start, &visits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coverage, Time};
    use proptest::prelude::*;

    #[test]
    fn single_vertex_substitution() {
        let g = MetricGraph::build(2, &[(0, 1, 1)]).unwrap();
        let inst = Instance::new(g, vec![Request::new(0, 0, 2, 1)], 1, None).unwrap();
        let (aug, back) = augment_service(&inst).unwrap();
        assert_eq!(aug.graph().n(), 3);
        assert_eq!(aug.graph().dist(0, 2), 1);
        assert_eq!(aug.requests()[0], Request::new(2, 1, 3, 1));
        let mut w = Walk::new(2, 1);
        w.push_idle(1);
        assert_eq!(coverage(&w, &aug).unwrap().reward, 1);
        assert_eq!(coverage(&back.apply(&w).unwrap(), &inst).unwrap().reward, 1);
    }

    #[test]
    fn rejects_large_service() {
        let g = MetricGraph::line(2, 1).unwrap();
        let inst = Instance::new(g, vec![Request::new(0, 0, 4, 1)], 2, None).unwrap();
        assert_eq!(augment_service(&inst).unwrap_err(), Error::ServiceExceedsDiameter { service: 2, diameter: 1 });
    }

    fn case() -> impl Strategy<Value = (Instance, Vec<(bool, usize, i64)>, usize)> {
        (2usize..=5, 1i64..=2).prop_flat_map(|(n, s)| {
            let lens = proptest::collection::vec(2i64..4, n - 1);
            let reqs = proptest::collection::vec((0..n, 0i64..8, s..s + 5, 1u64..5), 1..=4);
            let acts = proptest::collection::vec((any::<bool>(), 0..n + 4, 1i64..4), 0..12);
            (Just(n), Just(s), lens, reqs, acts, 0..n + 4)
        })
        .prop_map(|(n, s, lens, reqs, acts, start)| {
            let edges: Vec<_> = lens.into_iter().enumerate().map(|(i, l)| (i, i + 1, l)).collect();
            let g = MetricGraph::build(n, &edges).unwrap();
            let reqs = reqs.into_iter().map(|(v, r, w, p)| Request::new(v, r, r + w, p)).collect();
            (Instance::new(g, reqs, s, None).unwrap(), acts, start)
        })
    }

    /// Original walk to augmented walk: every covered request, served at its
    /// earliest start `tau`, becomes a pendant visit at `2 tau + S`.
    fn forward(walk: &Walk, inst: &Instance, aug: &Instance) -> Walk {
        let cov = coverage(walk, inst).unwrap();
        let mut order: Vec<(Time, usize)> = cov.service_starts.iter().map(|(&i, &t)| (t, i)).collect();
        order.sort_unstable();
        let n = inst.graph().n();
        let s = inst.service();
        let visits: Vec<Visit> = order
            .into_iter()
            .map(|(t, i)| Visit { vertex: n + i, ready: 2 * t + s, leave: 2 * t + s })
            .collect();
        Walk::from_visits(aug.graph(), None, &visits).unwrap()
    }

    proptest! {
        #[test]
        fn diameter_bound((inst, _, _) in case()) {
            let (aug, _) = augment_service(&inst).unwrap();
            prop_assert!(aug.graph().diameter() <= 2 * (inst.graph().diameter() + inst.service()));
        }

        #[test]
        fn back_map_preserves_reward((inst, acts, start) in case()) {
            let (aug, back) = augment_service(&inst).unwrap();
            let m = aug.graph().n();
            let mut w = Walk::new(start % m, 0);
            for (mv, v, k) in acts {
                if mv { w.push_move(v % m) } else { w.push_idle(k) }
            }
            let a = coverage(&w, &aug).unwrap().reward;
            let b = back.apply(&w).unwrap();
            prop_assert!(b.validate(inst.graph()).is_ok());
            let r = coverage(&b, &inst).unwrap().reward;
            prop_assert!(r >= a);
            let distinct = {
                let mut vs: Vec<_> = inst.requests().iter().map(|q| q.vertex).collect();
                vs.sort_unstable();
                vs.windows(2).all(|p| p[0] != p[1])
            };
            if distinct {
                prop_assert_eq!(r, a);
            }
        }

        #[test]
        fn forward_map_preserves_reward_on_distinct_vertices((inst, acts, start) in case()) {
            let mut vs: Vec<_> = inst.requests().iter().map(|q| q.vertex).collect();
            vs.sort_unstable();
            prop_assume!(vs.windows(2).all(|p| p[0] != p[1]));
            let n = inst.graph().n();
            let mut clean = Walk::new(start % n, 0);
            for (mv, v, k) in acts {
                if mv { clean.push_move(v % n) } else { clean.push_idle(k) }
            }
            let (aug, _) = augment_service(&inst).unwrap();
            let f = forward(&clean, &inst, &aug);
            prop_assert_eq!(coverage(&f, &aug).unwrap().reward, coverage(&clean, &inst).unwrap().reward);
        }
    }
}
