use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Reward, Time};

pub const MAX_EXACT_JOBS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub release: Time,
    pub deadline: Time,
    pub processing: Time,
    pub reward: Reward,
}

impl Job {
    pub fn new(release: Time, deadline: Time, processing: Time, reward: Reward) -> Self {
        Job { release, deadline, processing, reward }
    }

    fn last_start(&self) -> Time {
        self.deadline - self.processing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobMode {
    Exact,
    LocalRatio,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub value: Reward,
    /// `(job index, start)` sorted by start.
    pub starts: Vec<(usize, Time)>,
}

/// Single-machine throughput: pick non-overlapping runs `[t, t + p)` with
/// `release <= t <= deadline - p` maximising total reward.
pub fn job_scheduling(jobs: &[Job], mode: JobMode) -> Result<Schedule> {
    match mode {
        JobMode::Exact => exact(jobs),
        JobMode::LocalRatio => Ok(local_ratio(jobs)),
    }
}

/// Subset DP on the earliest completion time of each schedulable set.
fn exact(jobs: &[Job]) -> Result<Schedule> {
    let k = jobs.len();
    if k > MAX_EXACT_JOBS {
        return Err(Error::TooManyJobs(k));
    }
    const NONE: Time = Time::MAX;
    let masks = 1usize << k;
    let mut finish = vec![NONE; masks];
    let mut last = vec![usize::MAX; masks];
    finish[0] = Time::MIN;
    let mut best = (0, 0usize);
    for mask in 0..masks {
        let f = finish[mask];
        if f == NONE {
            continue;
        }
        let value: Reward = (0..k).filter(|j| mask >> j & 1 == 1).map(|j| jobs[j].reward).sum();
        if value > best.0 {
            best = (value, mask);
        }
        for (j, job) in jobs.iter().enumerate() {
            if mask >> j & 1 == 1 {
                continue;
            }
            let start = f.max(job.release);
            if start > job.last_start() {
                continue;
            }
            let next = mask | 1 << j;
            if start + job.processing < finish[next] {
                finish[next] = start + job.processing;
                last[next] = j;
            }
        }
    }
    let mut order = Vec::new();
    let mut mask = best.1;
    while mask != 0 {
        order.push(last[mask]);
        mask &= !(1 << last[mask]);
    }
    order.reverse();
    let mut t = Time::MIN;
    let starts = order
        .into_iter()
        .map(|j| {
            let s = t.max(jobs[j].release);
            t = s + jobs[j].processing;
            (j, s)
        })
        .collect();
    Ok(Schedule { value: best.0, starts })
}

/// Local-ratio 2-approximation over the interval formulation: every job
/// contributes one interval per integer start.
fn local_ratio(jobs: &[Job]) -> Schedule {
    struct Interval {
        job: usize,
        start: Time,
        end: Time,
        weight: i128,
    }
    let mut ivs: Vec<Interval> = jobs
        .iter()
        .enumerate()
        .flat_map(|(j, job)| {
            (job.release..=job.last_start()).map(move |s| Interval {
                job: j,
                start: s,
                end: s + job.processing,
                weight: job.reward as i128,
            })
        })
        .collect();
    ivs.sort_by_key(|iv| (iv.end, iv.job, iv.start));

    let conflicts = |a: &Interval, b: &Interval| a.job == b.job || (a.start < b.end && b.start < a.end);
    let mut stack = Vec::new();
    // Sorted by end, so the earliest-ending positive interval is the next
    // positive one in order; weights only ever decrease.
    for i in 0..ivs.len() {
        let w = ivs[i].weight;
        if w <= 0 {
            continue;
        }
        stack.push(i);
        for k in i..ivs.len() {
            if conflicts(&ivs[i], &ivs[k]) {
                ivs[k].weight -= w;
            }
        }
    }
    let mut chosen: Vec<usize> = Vec::new();
    while let Some(i) = stack.pop() {
        if chosen.iter().all(|&c| !conflicts(&ivs[i], &ivs[c])) {
            chosen.push(i);
        }
    }
    let mut starts: Vec<(usize, Time)> = chosen.iter().map(|&i| (ivs[i].job, ivs[i].start)).collect();
    starts.sort_by_key(|&(j, s)| (s, j));
    Schedule { value: starts.iter().map(|&(j, _)| jobs[j].reward).sum(), starts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_feasible(jobs: &[Job], s: &Schedule) {
        let mut prev_end = Time::MIN;
        let mut seen = std::collections::BTreeSet::new();
        for &(j, t) in &s.starts {
            assert!(seen.insert(j));
            assert!(t >= jobs[j].release && t <= jobs[j].last_start());
            assert!(t >= prev_end);
            prev_end = t + jobs[j].processing;
        }
        assert_eq!(s.value, s.starts.iter().map(|&(j, _)| jobs[j].reward).sum::<Reward>());
    }

    fn brute(jobs: &[Job]) -> Reward {
        fn rec(jobs: &[Job], used: &mut Vec<bool>, t: Time, value: Reward) -> Reward {
            let mut best = value;
            for j in 0..jobs.len() {
                let s = t.max(jobs[j].release);
                if used[j] || s > jobs[j].last_start() {
                    continue;
                }
                used[j] = true;
                best = best.max(rec(jobs, used, s + jobs[j].processing, value + jobs[j].reward));
                used[j] = false;
            }
            best
        }
        rec(jobs, &mut vec![false; jobs.len()], Time::MIN, 0)
    }

    #[test]
    fn single_job() {
        let jobs = [Job::new(0, 4, 2, 3)];
        for mode in [JobMode::Exact, JobMode::LocalRatio] {
            let s = job_scheduling(&jobs, mode).unwrap();
            assert_eq!(s.value, 3);
            assert_eq!(s.starts, vec![(0, 0)]);
        }
    }

    #[test]
    fn two_fit() {
        let jobs = [Job::new(0, 4, 2, 3), Job::new(0, 4, 2, 5)];
        let s = job_scheduling(&jobs, JobMode::Exact).unwrap();
        assert_eq!(s.value, 8);
        check_feasible(&jobs, &s);
    }

    #[test]
    fn capacity_forces_choice() {
        let jobs = [Job::new(0, 2, 2, 3), Job::new(0, 2, 2, 5)];
        assert_eq!(job_scheduling(&jobs, JobMode::Exact).unwrap().value, 5);
        assert_eq!(job_scheduling(&jobs, JobMode::LocalRatio).unwrap().value, 5);
    }

    #[test]
    fn unschedulable_job_ignored() {
        let jobs = [Job::new(0, 1, 2, 9), Job::new(0, 3, 1, 1)];
        assert_eq!(job_scheduling(&jobs, JobMode::Exact).unwrap().value, 1);
        assert_eq!(job_scheduling(&jobs, JobMode::LocalRatio).unwrap().value, 1);
    }

    #[test]
    fn exact_limit() {
        let jobs = vec![Job::new(0, 2, 1, 1); 16];
        assert_eq!(job_scheduling(&jobs, JobMode::Exact).unwrap_err(), Error::TooManyJobs(16));
        assert!(job_scheduling(&jobs, JobMode::LocalRatio).is_ok());
    }

    fn job_set() -> impl Strategy<Value = Vec<Job>> {
        proptest::collection::vec((0i64..10, 1i64..5, 0i64..6, 1u64..10), 0..=7)
            .prop_map(|v| v.into_iter().map(|(r, p, slack, w)| Job::new(r, r + p + slack, p, w)).collect())
    }

    proptest! {
        #[test]
        fn exact_matches_enumeration(jobs in job_set()) {
            let s = job_scheduling(&jobs, JobMode::Exact).unwrap();
            check_feasible(&jobs, &s);
            prop_assert_eq!(s.value, brute(&jobs));
        }

        #[test]
        fn local_ratio_within_half(jobs in job_set()) {
            let exact = job_scheduling(&jobs, JobMode::Exact).unwrap();
            let lr = job_scheduling(&jobs, JobMode::LocalRatio).unwrap();
            check_feasible(&jobs, &lr);
            prop_assert!(2 * lr.value >= exact.value);
            prop_assert!(lr.value <= exact.value);
        }
    }
}
