use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Reward, Time};
use crate::online::DetourMode;
use crate::par;

use super::{simulate, SimConfig, SimulationReport, Suite, SuiteEntry};

/// One trial of a bench suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub label: String,
    pub seed: u64,
    pub lambda: Option<Time>,
    pub tau: Option<Time>,
    #[serde(with = "crate::rational::option")]
    pub rho: Option<Ratio<u64>>,
    pub lambda_bound: Time,
    pub s_prime: Time,
    pub diameter: Time,
    pub l_max: Time,
    pub opt: Option<Reward>,
    pub offline: Reward,
    #[serde(with = "crate::rational")]
    pub expected: Ratio<Reward>,
    #[serde(with = "crate::rational::option")]
    pub ratio: Option<Ratio<Reward>>,
    /// The error profile meets the assumptions of the online guarantee.
    pub conforming: bool,
    /// Offline walk and every online walk pass validation.
    pub walks_valid: bool,
    pub digest: String,
}

/// Max and median ratio over the trials of one label (`"all"` for the suite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub label: String,
    pub trials: usize,
    pub with_ratio: usize,
    #[serde(with = "crate::rational::option")]
    pub max_ratio: Option<Ratio<Reward>>,
    #[serde(with = "crate::rational::option")]
    pub median_ratio: Option<Ratio<Reward>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
    #[serde(skip)]
    pub reports: Vec<SimulationReport>,
}

/// CSV layout shared by trial and aggregate rows.
#[derive(Serialize)]
struct CsvRow<'a> {
    row: &'a str,
    label: &'a str,
    seed: Option<u64>,
    lambda: Option<Time>,
    tau: Option<Time>,
    rho: Option<String>,
    lambda_bound: Option<Time>,
    s_prime: Option<Time>,
    opt: Option<Reward>,
    offline: Option<Reward>,
    expected: Option<String>,
    ratio: Option<String>,
    ratio_f64: Option<f64>,
    median_ratio: Option<String>,
    conforming: Option<bool>,
    walks_valid: Option<bool>,
}

fn fmt_ratio(r: &Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn to_f64(r: &Ratio<u64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Middle element, or the mean of the two middle ones.
fn median(mut xs: Vec<Ratio<Reward>>) -> Option<Ratio<Reward>> {
    if xs.is_empty() {
        return None;
    }
    xs.sort();
    let k = xs.len();
    Some(if k % 2 == 1 { xs[k / 2] } else { (xs[k / 2 - 1] + xs[k / 2]) / 2 })
}

fn aggregate(label: &str, rows: &[&TrialRow]) -> AggregateRow {
    let ratios: Vec<_> = rows.iter().filter_map(|r| r.ratio).collect();
    AggregateRow {
        label: label.to_string(),
        trials: rows.len(),
        with_ratio: ratios.len(),
        max_ratio: ratios.iter().max().copied(),
        median_ratio: median(ratios),
    }
}

fn trial(suite: &Suite, entry: &SuiteEntry, seed: u64) -> Result<(TrialRow, SimulationReport)> {
    let g = entry.generator.generate(seed, entry.perturb.as_ref())?;
    let pred = g.predictions.as_ref().expect("generate always fills predictions");
    let cfg = SimConfig {
        mode: entry.mode,
        offline: suite.offline,
        detours: suite.detours,
        state_budget: suite.state_budget,
        ..SimConfig::default()
    };
    let rep = simulate(&g.instance, pred, g.matching.as_ref(), entry.lambda, seed, &cfg)?;
    let graph = g.instance.graph();
    let walks_valid =
        rep.offline_walk.validate(graph).is_ok() && rep.branches.iter().all(|b| b.walk.validate(graph).is_ok());
    let prof = rep.error_profile.as_ref();
    let l = rep.l_min;
    let conforming = prof.is_some_and(|p| {
        let lam_ok = match entry.mode {
            DetourMode::OneToOne => 4 * p.lambda <= l - 1,
            DetourMode::ManyToOne => 2 * p.lambda <= l,
        };
        lam_ok && 2 * p.tau <= l
    });
    let row = TrialRow {
        label: entry.label.clone(),
        seed,
        lambda: prof.map(|p| p.lambda),
        tau: prof.map(|p| p.tau),
        rho: prof.map(|p| p.rho),
        lambda_bound: rep.lambda_bound,
        s_prime: rep.s_prime,
        diameter: graph.diameter(),
        l_max: g.instance.l_max().unwrap_or(0),
        opt: rep.opt_value.value(),
        offline: rep.offline_value,
        expected: rep.expected_reward,
        ratio: rep.ratio,
        conforming,
        walks_valid,
        digest: rep.instance_digest.clone(),
    };
    Ok((row, rep))
}

/// Runs every trial of `suite` (trials in parallel), aggregates, and writes
/// `trials.csv`, `reports.json`, `ratio_vs_lambda.dat` and
/// `ratio_vs_logd.dat` into `out_dir` when given. `seed_offset` is added to
/// every entry's base seed.
pub fn bench(suite: &Suite, out_dir: Option<&Path>, seed_offset: u64) -> Result<BenchSummary> {
    if suite.entries.is_empty() {
        return Err(Error::BadSuiteFile("suite has no entries".into()));
    }
    let jobs: Vec<(&SuiteEntry, u64)> = suite
        .entries
        .iter()
        .flat_map(|e| (0..e.trials as u64).map(move |i| (e, e.seed.wrapping_add(seed_offset).wrapping_add(i))))
        .collect();
    let results = par::map(&jobs, |(e, seed)| trial(suite, e, *seed));
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for r in results {
        let (row, rep) = r?;
        rows.push(row);
        reports.push(rep);
    }

    let mut by_label: BTreeMap<&str, Vec<&TrialRow>> = BTreeMap::new();
    for r in &rows {
        by_label.entry(r.label.as_str()).or_default().push(r);
    }
    let mut aggregates: Vec<AggregateRow> = by_label.iter().map(|(l, rs)| aggregate(l, rs)).collect();
    aggregates.push(aggregate("all", &rows.iter().collect::<Vec<_>>()));

    let summary = BenchSummary { rows, aggregates, reports };
    if let Some(dir) = out_dir {
        write_outputs(&summary, dir)?;
    }
    Ok(summary)
}

pub fn write_csv(summary: &BenchSummary, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    for r in &summary.rows {
        w.serialize(CsvRow {
            row: "trial",
            label: &r.label,
            seed: Some(r.seed),
            lambda: r.lambda,
            tau: r.tau,
            rho: r.rho.as_ref().map(fmt_ratio),
            lambda_bound: Some(r.lambda_bound),
            s_prime: Some(r.s_prime),
            opt: r.opt,
            offline: Some(r.offline),
            expected: Some(fmt_ratio(&r.expected)),
            ratio: r.ratio.as_ref().map(fmt_ratio),
            ratio_f64: r.ratio.as_ref().map(to_f64),
            median_ratio: None,
            conforming: Some(r.conforming),
            walks_valid: Some(r.walks_valid),
        })
        .map_err(csv_err)?;
    }
    for a in &summary.aggregates {
        w.serialize(CsvRow {
            row: "aggregate",
            label: &a.label,
            seed: None,
            lambda: None,
            tau: None,
            rho: None,
            lambda_bound: None,
            s_prime: None,
            opt: None,
            offline: None,
            expected: None,
            ratio: a.max_ratio.as_ref().map(fmt_ratio),
            ratio_f64: a.max_ratio.as_ref().map(to_f64),
            median_ratio: a.median_ratio.as_ref().map(fmt_ratio),
            conforming: None,
            walks_valid: None,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Gnuplot table of median and max ratio grouped by `key`.
fn dat_table(rows: &[TrialRow], header: &str, key: impl Fn(&TrialRow) -> Option<i64>) -> String {
    let mut groups: BTreeMap<i64, Vec<Ratio<Reward>>> = BTreeMap::new();
    for r in rows {
        if let (Some(k), Some(x)) = (key(r), r.ratio) {
            groups.entry(k).or_default().push(x);
        }
    }
    let mut out = format!("# {header} median_ratio max_ratio trials\n");
    for (k, xs) in groups {
        let n = xs.len();
        let max = *xs.iter().max().expect("non-empty group");
        let med = median(xs).expect("non-empty group");
        writeln!(out, "{k} {:.6} {:.6} {n}", to_f64(&med), to_f64(&max)).expect("writing to a string");
    }
    out
}

fn write_outputs(summary: &BenchSummary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_csv(summary, std::fs::File::create(dir.join("trials.csv"))?)?;
    let reports = serde_json::to_string_pretty(&summary.reports).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("reports.json"), reports)?;
    std::fs::write(dir.join("ratio_vs_lambda.dat"), dat_table(&summary.rows, "lambda", |r| r.lambda))?;
    let logd = |r: &TrialRow| Some(r.diameter.min(r.l_max).max(1).ilog2() as i64);
    std::fs::write(dir.join("ratio_vs_logd.dat"), dat_table(&summary.rows, "log2_min_d_lmax", logd))?;
    Ok(())
}
