use crate::error::Result;
use crate::model::{Instance, Visit, Walk};
use crate::oracle::{job_scheduling, Job};

use super::OfflineConfig;

/// Service times at least the diameter: pretend the graph is uniform with
/// every distance `D`, so each request becomes a job `(r, d + D, S + D)`
/// that serves for `S` and then travels. Any non-overlapping job schedule is
/// a feasible walk on the real graph.
pub fn large_service_solve(instance: &Instance, cfg: &OfflineConfig) -> Result<Walk> {
    let g = instance.graph();
    let d = g.diameter();
    let s = instance.service();
    let jobs: Vec<Job> = instance
        .requests()
        .iter()
        .map(|q| {
            let release = match instance.root() {
                Some(r) => q.release.max(g.dist(r, q.vertex)),
                None => q.release,
            };
            Job::new(release, q.deadline + d, s + d, q.reward)
        })
        .collect();
    let schedule = job_scheduling(&jobs, cfg.job_mode(jobs.len()))?;
    let visits: Vec<Visit> = schedule
        .starts
        .iter()
        .map(|&(j, t)| Visit { vertex: instance.requests()[j].vertex, ready: t, leave: t + s })
        .collect();
    let start = instance.root().map(|r| (r, 0));
    if visits.is_empty() {
        let (v, t) = start.unwrap_or((0, 0));
        return Ok(Walk::new(v, t));
    }
    Walk::from_visits(g, start, &visits)
}
