//! Prediction errors: per-pair errors, matching profiles and the bottleneck
//! matching minimising the location error.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::model::{Instance, Request, Reward, Time};
use crate::oracle::{shortest_tour, Target, TourMode};
use crate::rational::symmetric_ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingKind {
    OneToOne,
    Partial,
    ManyToOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub kind: MatchingKind,
    /// `(true index, predicted index)`.
    pub pairs: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched_true: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched_pred: Vec<usize>,
}

impl Matching {
    pub fn identity(n: usize) -> Self {
        Matching { kind: MatchingKind::OneToOne, pairs: (0..n).map(|i| (i, i)).collect(), unmatched_true: vec![], unmatched_pred: vec![] }
    }

    pub fn one_to_one(pairs: Vec<(usize, usize)>) -> Self {
        Matching { kind: MatchingKind::OneToOne, pairs, unmatched_true: vec![], unmatched_pred: vec![] }
    }

    /// Partial matching; the unmatched sets are everything not in `pairs`.
    pub fn partial(pairs: Vec<(usize, usize)>, n_true: usize, n_pred: usize) -> Self {
        let t: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
        let p: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
        Matching {
            kind: MatchingKind::Partial,
            pairs,
            unmatched_true: (0..n_true).filter(|i| !t.contains(i)).collect(),
            unmatched_pred: (0..n_pred).filter(|j| !p.contains(j)).collect(),
        }
    }

    /// `assignment[i]` is the predicted request that true request `i` maps to.
    pub fn many_to_one(assignment: &[usize]) -> Self {
        Matching {
            kind: MatchingKind::ManyToOne,
            pairs: assignment.iter().copied().enumerate().collect(),
            unmatched_true: vec![],
            unmatched_pred: vec![],
        }
    }

    /// Predicted index matched to true request `i`, if any.
    pub fn pred_of(&self, i: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == i).map(|p| p.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairErrors {
    pub loc: Time,
    pub tw: Time,
    pub rew: Ratio<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorProfile {
    pub lambda: Time,
    pub tau: Time,
    #[serde(with = "crate::rational")]
    pub rho: Ratio<u64>,
    pub delta1: Reward,
    pub delta2: Reward,
}

impl Default for ErrorProfile {
    fn default() -> Self {
        ErrorProfile { lambda: 0, tau: 0, rho: Ratio::one(), delta1: 0, delta2: 0 }
    }
}

pub fn pair_errors(sigma: &Request, pred: &Request, graph: &MetricGraph) -> PairErrors {
    PairErrors {
        loc: graph.dist(sigma.vertex, pred.vertex),
        tw: (sigma.release - pred.release).abs().max((sigma.deadline - pred.deadline).abs()),
        rew: symmetric_ratio(sigma.reward, pred.reward),
    }
}

fn check_indices(m: &Matching, n_true: usize, n_pred: usize) -> Result<()> {
    for &(i, j) in &m.pairs {
        if i >= n_true {
            return Err(Error::IndexOutOfRange { index: i, len: n_true });
        }
        if j >= n_pred {
            return Err(Error::IndexOutOfRange { index: j, len: n_pred });
        }
    }
    for &i in &m.unmatched_true {
        if i >= n_true {
            return Err(Error::IndexOutOfRange { index: i, len: n_true });
        }
    }
    for &j in &m.unmatched_pred {
        if j >= n_pred {
            return Err(Error::IndexOutOfRange { index: j, len: n_pred });
        }
    }
    Ok(())
}

fn check_kind(m: &Matching, n_true: usize, n_pred: usize) -> Result<()> {
    let trues: BTreeSet<usize> = m.pairs.iter().map(|p| p.0).collect();
    let preds: BTreeSet<usize> = m.pairs.iter().map(|p| p.1).collect();
    let distinct_true = trues.len() == m.pairs.len();
    let distinct_pred = preds.len() == m.pairs.len();
    match m.kind {
        MatchingKind::OneToOne => {
            if n_true != n_pred || m.pairs.len() != n_true || !distinct_true || !distinct_pred {
                return Err(Error::KindMismatch("one-to-one matching must be a perfect bijection".into()));
            }
        }
        MatchingKind::Partial => {
            if !distinct_true || !distinct_pred {
                return Err(Error::KindMismatch("partial matching uses an index twice".into()));
            }
            if m.unmatched_true.iter().any(|i| trues.contains(i)) || m.unmatched_pred.iter().any(|j| preds.contains(j)) {
                return Err(Error::KindMismatch("index listed as both matched and unmatched".into()));
            }
        }
        MatchingKind::ManyToOne => {
            if !distinct_true || m.pairs.len() != n_true {
                return Err(Error::KindMismatch("many-to-one matching must map every true request exactly once".into()));
            }
        }
    }
    Ok(())
}

/// Error profile of `m` between true requests `truth` and predictions `pred`.
/// Distances are taken in the true instance's graph.
pub fn profile(truth: &Instance, pred: &Instance, m: &Matching) -> Result<ErrorProfile> {
    let (n_true, n_pred) = (truth.len(), pred.len());
    check_indices(m, n_true, n_pred)?;
    check_kind(m, n_true, n_pred)?;
    let g = truth.graph();
    let (tr, pr) = (truth.requests(), pred.requests());
    let mut out = ErrorProfile::default();
    for &(i, j) in &m.pairs {
        let e = pair_errors(&tr[i], &pr[j], g);
        out.tau = out.tau.max(e.tw);
        if m.kind != MatchingKind::ManyToOne {
            out.lambda = out.lambda.max(e.loc);
            out.rho = out.rho.max(e.rew);
        }
    }
    match m.kind {
        MatchingKind::OneToOne => {}
        MatchingKind::Partial => {
            let trues: BTreeSet<usize> = m.pairs.iter().map(|p| p.0).collect();
            let preds: BTreeSet<usize> = m.pairs.iter().map(|p| p.1).collect();
            out.delta1 = (0..n_true).filter(|i| !trues.contains(i)).map(|i| tr[i].reward).sum();
            out.delta2 = (0..n_pred).filter(|j| !preds.contains(j)).map(|j| pr[j].reward).sum();
        }
        MatchingKind::ManyToOne => {
            let mut pre: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &(i, j) in &m.pairs {
                pre.entry(j).or_default().push(i);
            }
            for (j, is) in pre {
                let targets: Vec<Target> = is.iter().map(|&i| Target::new(tr[i].vertex, tr[i].reward, 1)).collect();
                let tour = shortest_tour(g, &targets, pr[j].vertex, TourMode::Cycle)?
                    .expect("a tour without deadlines always exists");
                out.lambda = out.lambda.max(tour);
                let total: Reward = is.iter().map(|&i| tr[i].reward).sum();
                out.rho = out.rho.max(symmetric_ratio(total, pr[j].reward));
            }
        }
    }
    Ok(out)
}

/// Kuhn's augmenting-path matching restricted to `allowed`; `fixed` pins some
/// rows in advance. Returns whether every row is matched.
fn perfect(allowed: &[Vec<bool>], fixed: &[Option<usize>]) -> bool {
    let n = allowed.len();
    let mut owner = vec![usize::MAX; n];
    for (i, f) in fixed.iter().enumerate() {
        if let Some(j) = *f {
            owner[j] = i;
        }
    }
    fn augment(i: usize, allowed: &[Vec<bool>], fixed: &[Option<usize>], owner: &mut [usize], seen: &mut [bool]) -> bool {
        for j in 0..allowed.len() {
            if !allowed[i][j] || seen[j] {
                continue;
            }
            seen[j] = true;
            let o = owner[j];
            if o == usize::MAX || (fixed[o].is_none() && augment(o, allowed, fixed, owner, seen)) {
                owner[j] = i;
                return true;
            }
        }
        false
    }
    for i in 0..n {
        if fixed[i].is_some() {
            continue;
        }
        let mut seen = vec![false; n];
        for &j in fixed.iter().flatten() {
            seen[j] = true;
        }
        if !augment(i, allowed, fixed, &mut owner, &mut seen) {
            return false;
        }
    }
    true
}

/// Perfect matching minimising the largest location error. Among optimal
/// matchings the lexicographically smallest pair list is returned.
pub fn best_matching(truth: &Instance, pred: &Instance) -> Result<Matching> {
    let n = truth.len();
    if n != pred.len() {
        return Err(Error::SizeMismatch { true_len: n, pred_len: pred.len() });
    }
    let g = truth.graph();
    let cost: Vec<Vec<Time>> = truth
        .requests()
        .iter()
        .map(|a| pred.requests().iter().map(|b| g.dist(a.vertex, b.vertex)).collect())
        .collect();
    let mut thresholds: Vec<Time> = cost.iter().flatten().copied().collect();
    thresholds.sort_unstable();
    thresholds.dedup();
    let allowed_at = |th: Time| -> Vec<Vec<bool>> { cost.iter().map(|row| row.iter().map(|&c| c <= th).collect()).collect() };
    let none = vec![None; n];
    let (mut lo, mut hi) = (0usize, thresholds.len().saturating_sub(1));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect(&allowed_at(thresholds[mid]), &none) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if n == 0 {
        return Ok(Matching::one_to_one(vec![]));
    }
    let allowed = allowed_at(thresholds[lo]);
    let mut fixed = vec![None; n];
    let mut used = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if used[j] || !allowed[i][j] {
                continue;
            }
            fixed[i] = Some(j);
            if perfect(&allowed, &fixed) {
                used[j] = true;
                break;
            }
            fixed[i] = None;
        }
    }
    Ok(Matching::one_to_one(fixed.iter().enumerate().map(|(i, j)| (i, j.expect("threshold admits a perfect matching"))).collect()))
}
