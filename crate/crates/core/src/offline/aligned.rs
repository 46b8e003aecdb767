use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::model::{Instance, Reward, Time, Walk};
use crate::oracle::{Target, TourMode};

use super::{Cursor, OfflineConfig};

/// Phase algorithm for zero service time and windows of length at least
/// `4D`.
///
/// With `K = 2D`, windows are shrunk to multiples of `K` and time is cut into
/// phases `[iK, (i+1)K)`. In each phase the walk moves to the best vertex
/// within `K/2` of where it stands, runs an orienteering path of length at
/// most `K/2` over the requests whose aligned window spans the phase, and
/// idles out the rest of the phase.
pub fn aligned_phase(instance: &Instance, cfg: &OfflineConfig) -> Result<Walk> {
    let g = instance.graph();
    let d = g.diameter();
    for (i, q) in instance.requests().iter().enumerate() {
        if q.window() < 4 * d {
            return Err(Error::WindowTooSmall { index: i, len: q.window(), required: 4 * d });
        }
    }
    if d == 0 {
        let mut c = Cursor::new(instance.root().unwrap_or(0), 0);
        c.idle_until(instance.horizon());
        return Ok(c.walk);
    }
    let k = 2 * d;
    let half = d;
    let aligned: Vec<(Time, Time)> = instance
        .requests()
        .iter()
        .map(|q| (q.release.div_euclid(k) * k + if q.release.rem_euclid(k) == 0 { 0 } else { k }, q.deadline.div_euclid(k) * k))
        .collect();
    let end = aligned.iter().map(|a| a.1).max().unwrap_or(0);
    let mut covered = vec![false; instance.len()];
    let mut cursor: Option<Cursor> = instance.root().map(|r| Cursor::new(r, 0));

    let mut phase_start = 0;
    while phase_start + k <= end {
        // requests still open in this phase, merged per vertex: visiting a vertex covers all of its
        // requests at zero service time.
        let mut by_vertex: BTreeMap<Vertex, (Reward, Vec<usize>)> = BTreeMap::new();
        for (i, q) in instance.requests().iter().enumerate() {
            let (r, dl) = aligned[i];
            if !covered[i] && r <= phase_start && phase_start + k <= dl {
                let e = by_vertex.entry(q.vertex).or_default();
                e.0 += q.reward;
                e.1.push(i);
            }
        }
        let targets: Vec<Target> = by_vertex.iter().map(|(&v, &(w, _))| Target::new(v, w, 0)).collect();
        let groups: Vec<&Vec<usize>> = by_vertex.values().map(|e| &e.1).collect();

        let roots: Vec<Vertex> = match &cursor {
            Some(c) => g.ball(c.at(), half),
            None => (0..g.n()).collect(),
        };
        let mut best: Option<(Reward, Vertex, Vec<usize>)> = None;
        if !targets.is_empty() {
            for u in roots {
                let tour = cfg.orienteer(g, &targets, u, half, TourMode::Path)?;
                if best.as_ref().is_none_or(|b| tour.value > b.0) {
                    best = Some((tour.value, u, tour.order));
                }
            }
        }
        let c = cursor.get_or_insert_with(|| {
            let u = best.as_ref().map(|b| b.1).unwrap_or(0);
            Cursor::new(u, phase_start)
        });
        if let Some((_, u, order)) = best {
            c.goto(g, u);
            for j in order {
                c.goto(g, targets[j].vertex);
                for &i in groups[j] {
                    covered[i] = true;
                }
            }
        }
        phase_start += k;
        c.idle_until(phase_start);
    }
    Ok(cursor.map(|c| c.walk).unwrap_or_else(|| Walk::new(0, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MetricGraph;
    use crate::model::{coverage, Request};
    use crate::oracle::opt_twtsp;

    #[test]
    fn single_request() {
        let g = MetricGraph::line(3, 1).unwrap();
        let inst = Instance::new(g, vec![Request::new(2, 0, 8, 3)], 0, None).unwrap();
        let w = aligned_phase(&inst, &OfflineConfig::default()).unwrap();
        assert_eq!(coverage(&w, &inst).unwrap().reward, 3);
    }

    #[test]
    fn two_vertices_both_covered() {
        let g = MetricGraph::line(2, 1).unwrap();
        let inst = Instance::new(g, vec![Request::new(0, 0, 8, 1), Request::new(1, 0, 8, 1)], 0, None).unwrap();
        let w = aligned_phase(&inst, &OfflineConfig::default()).unwrap();
        let got = coverage(&w, &inst).unwrap().reward;
        assert_eq!(got, opt_twtsp(&inst).unwrap().value);
        assert_eq!(got, 2);
    }

    #[test]
    fn rejects_short_windows() {
        let g = MetricGraph::line(2, 1).unwrap();
        let inst = Instance::new(g, vec![Request::new(0, 0, 3, 1)], 0, None).unwrap();
        assert_eq!(
            aligned_phase(&inst, &OfflineConfig::default()).unwrap_err(),
            Error::WindowTooSmall { index: 0, len: 3, required: 4 }
        );
    }

    #[test]
    fn random_within_eighteen() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.gen_range(1..=5);
            let edges: Vec<_> = (1..n).map(|v| (rng.gen_range(0..v), v, 1)).collect();
            let g = MetricGraph::build(n, &edges).unwrap();
            let d = g.diameter();
            let k = rng.gen_range(1..=4);
            let reqs = (0..k)
                .map(|_| {
                    let r = rng.gen_range(0..10);
                    Request::new(rng.gen_range(0..n), r, r + 4 * d.max(1) + rng.gen_range(0..4), rng.gen_range(1..5))
                })
                .collect();
            let root = rng.gen_bool(0.3).then(|| rng.gen_range(0..n));
            let inst = Instance::new(g, reqs, 0, root).unwrap();
            let w = aligned_phase(&inst, &OfflineConfig::default()).unwrap();
            assert!(w.validate(inst.graph()).is_ok());
            if let Some(r) = root {
                assert_eq!((w.start_vertex, w.start_time), (r, 0));
            }
            let got = coverage(&w, &inst).unwrap().reward;
            let opt = opt_twtsp(&inst).unwrap().value;
            assert!(18 * got >= opt, "got {got}, opt {opt}");
        }
    }
}
