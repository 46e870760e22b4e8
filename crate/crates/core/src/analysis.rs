//! Low/high initial-h groups, cross-run aggregation of mean h-alpha
//! trajectories, and CSV export.
//!
//! Groups are formed once per run from period-0 h values: agents strictly
//! below the run's (lower) median form the low group, agents strictly above it
//! the high group. Group means are computed per run and then averaged across
//! runs with equal weights.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use log::warn;

pub use crate::engine::{AgentMetrics, PeriodMetrics, RunResult};
use crate::model::AgentId;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "period,group,mean_h_alpha";
pub const PER_RUN_CSV_HEADER: &str = "run,period,group,mean_h_alpha";

/// Lower median: the element at index `(n - 1) / 2` of the sorted values.
pub fn lower_median(values: &[u32]) -> Option<u32> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Some(sorted[(sorted.len() - 1) / 2])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Groups {
    pub median: u32,
    pub low: Vec<AgentId>,
    pub high: Vec<AgentId>,
    pub excluded: Vec<AgentId>,
}

/// Splits agents (indexed by position) around the median of `initial_h`.
pub fn split_groups(initial_h: &[u32]) -> Result<Groups> {
    let median = lower_median(initial_h)
        .ok_or_else(|| Error::data("cannot split an empty agent population"))?;
    let mut groups = Groups {
        median,
        low: Vec::new(),
        high: Vec::new(),
        excluded: Vec::new(),
    };
    for (i, &h) in initial_h.iter().enumerate() {
        let id = AgentId(i as u32);
        match h.cmp(&median) {
            std::cmp::Ordering::Less => groups.low.push(id),
            std::cmp::Ordering::Greater => groups.high.push(id),
            std::cmp::Ordering::Equal => groups.excluded.push(id),
        }
    }
    if groups.low.is_empty() && groups.high.is_empty() {
        warn!("all agents share initial h = {median}; both groups are empty");
    }
    Ok(groups)
}

/// Mean h-alpha over `members`, or `None` for an empty group.
pub fn group_mean(metrics: &PeriodMetrics, members: &[AgentId]) -> Option<f64> {
    if members.is_empty() {
        return None;
    }
    let total: u64 = members
        .iter()
        .map(|id| u64::from(metrics.agents[id.index()].h_alpha))
        .sum();
    Some(total as f64 / members.len() as f64)
}

/// Group mean trajectories of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrajectory {
    pub run_index: u32,
    pub median_initial_h: u32,
    pub low_size: usize,
    pub high_size: usize,
    /// Indexed by period - 1.
    pub low: Vec<Option<f64>>,
    pub high: Vec<Option<f64>>,
}

impl RunTrajectory {
    pub fn difference(&self, index: usize) -> Option<f64> {
        Some(self.high[index]? - self.low[index]?)
    }

    pub fn periods(&self) -> usize {
        self.low.len()
    }
}

pub fn run_trajectory(run: &RunResult) -> Result<RunTrajectory> {
    let groups = split_groups(&run.initial_h())?;
    Ok(RunTrajectory {
        run_index: run.run_index,
        median_initial_h: groups.median,
        low_size: groups.low.len(),
        high_size: groups.high.len(),
        low: run.periods.iter().map(|m| group_mean(m, &groups.low)).collect(),
        high: run.periods.iter().map(|m| group_mean(m, &groups.high)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodSummary {
    pub period: u32,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub periods: Vec<PeriodSummary>,
    /// Per-run trajectories, ordered by run index.
    pub runs: Vec<RunTrajectory>,
}

impl ExperimentResult {
    pub fn median_initial_h(&self) -> Vec<u32> {
        self.runs.iter().map(|r| r.median_initial_h).collect()
    }

    pub fn final_difference(&self) -> Option<f64> {
        self.periods.last()?.difference
    }
}

fn mean_present(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, count) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Averages per-run group means period by period. Runs whose group is empty
/// do not contribute to that group's mean.
pub fn aggregate(mut runs: Vec<RunTrajectory>) -> Result<ExperimentResult> {
    runs.sort_by_key(|r| r.run_index);
    let periods = runs.first().map_or(0, RunTrajectory::periods);
    if let Some(bad) = runs.iter().find(|r| r.periods() != periods || r.high.len() != periods) {
        return Err(Error::data(format!(
            "run {} has {} periods, expected {periods}",
            bad.run_index,
            bad.periods()
        )));
    }
    let summaries = (0..periods)
        .map(|i| {
            let low = mean_present(runs.iter().map(|r| r.low[i]));
            let high = mean_present(runs.iter().map(|r| r.high[i]));
            PeriodSummary {
                period: i as u32 + 1,
                low,
                high,
                difference: high.zip(low).map(|(h, l)| h - l),
            }
        })
        .collect();
    Ok(ExperimentResult {
        periods: summaries,
        runs,
    })
}

/// Groups and aggregates a full experiment.
pub fn analyze(runs: &[RunResult]) -> Result<ExperimentResult> {
    let trajectories = runs.iter().map(run_trajectory).collect::<Result<Vec<_>>>()?;
    aggregate(trajectories)
}

fn fmt_value(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Serializes the aggregated trajectories, or the per-run trajectories when
/// `per_run` is set. UTF-8 with LF line endings.
pub fn export_csv(result: &ExperimentResult, per_run: bool) -> Vec<u8> {
    let mut out = String::new();
    if per_run {
        out.push_str(PER_RUN_CSV_HEADER);
        out.push('\n');
        for run in &result.runs {
            for i in 0..run.periods() {
                let rows = [
                    ("low", run.low[i]),
                    ("high", run.high[i]),
                    ("diff", run.difference(i)),
                ];
                for (group, value) in rows {
                    let _ = writeln!(out, "{},{},{group},{}", run.run_index, i + 1, fmt_value(value));
                }
            }
        }
    } else {
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &result.periods {
            for (group, value) in [("low", p.low), ("high", p.high), ("diff", p.difference)] {
                let _ = writeln!(out, "{},{group},{}", p.period, fmt_value(value));
            }
        }
    }
    out.into_bytes()
}

pub fn write_csv<W: Write>(result: &ExperimentResult, per_run: bool, mut sink: W) -> io::Result<()> {
    sink.write_all(&export_csv(result, per_run))?;
    sink.flush()
}

pub fn write_csv_file(path: &Path, result: &ExperimentResult, per_run: bool) -> Result<()> {
    fs::write(path, export_csv(result, per_run)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Parses the aggregated CSV format back into period summaries.
pub fn parse_csv(text: &str) -> Result<Vec<PeriodSummary>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::data(format!("expected header `{CSV_HEADER}`")));
    }
    let mut out: Vec<PeriodSummary> = Vec::new();
    for (n, line) in lines.enumerate() {
        let bad = || Error::data(format!("malformed row {}: `{line}`", n + 2));
        let mut fields = line.split(',');
        let (Some(period), Some(group), Some(value), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad());
        };
        let period: u32 = period.parse().map_err(|_| bad())?;
        let value = if value.is_empty() {
            None
        } else {
            Some(value.parse::<f64>().map_err(|_| bad())?)
        };
        if out.last().map(|p| p.period) != Some(period) {
            out.push(PeriodSummary {
                period,
                low: None,
                high: None,
                difference: None,
            });
        }
        let row = out.last_mut().expect("row pushed above");
        match group {
            "low" => row.low = value,
            "high" => row.high = value,
            "diff" => row.difference = value,
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn traj(run_index: u32, low: &[f64], high: &[f64]) -> RunTrajectory {
        RunTrajectory {
            run_index,
            median_initial_h: 7,
            low_size: 1,
            high_size: 1,
            low: low.iter().copied().map(Some).collect(),
            high: high.iter().copied().map(Some).collect(),
        }
    }

    fn synthetic_run(run_index: u32, initial_h: &[u32], h_alpha: &[Vec<u32>]) -> RunResult {
        let metrics = |period: u32, values: &[u32], hs: &[u32]| PeriodMetrics {
            run_index,
            period,
            agents: values
                .iter()
                .zip(hs)
                .enumerate()
                .map(|(i, (&ha, &h))| AgentMetrics {
                    id: AgentId(i as u32),
                    h,
                    h_alpha: ha,
                    papers: h,
                })
                .collect(),
        };
        RunResult {
            run_index,
            initial: metrics(0, &vec![0; initial_h.len()], initial_h),
            periods: h_alpha
                .iter()
                .enumerate()
                .map(|(p, v)| metrics(p as u32 + 1, v, &vec![100; v.len()]))
                .collect(),
        }
    }

    #[test]
    fn split_around_median() {
        let hs: Vec<u32> = (1..=13).collect();
        let g = split_groups(&hs).unwrap();
        assert_eq!(g.median, 7);
        assert_eq!((g.low.len(), g.high.len(), g.excluded.len()), (6, 6, 1));
        assert_eq!(lower_median(&[1, 2, 3, 4]), Some(2));
    }

    #[test]
    fn split_degenerate() {
        let g = split_groups(&[4, 4, 4]).unwrap();
        assert!(g.low.is_empty() && g.high.is_empty());
        assert_eq!(g.excluded.len(), 3);
        assert!(split_groups(&[]).is_err());
    }

    #[test]
    fn aggregate_averages_runs() {
        let result = aggregate(vec![traj(0, &[2.0, 4.0], &[5.0, 9.0]), traj(1, &[4.0, 6.0], &[7.0, 9.0])]).unwrap();
        let low: Vec<_> = result.periods.iter().map(|p| p.low.unwrap()).collect();
        assert_eq!(low, vec![3.0, 5.0]);
        for p in &result.periods {
            assert_eq!(p.difference.unwrap(), p.high.unwrap() - p.low.unwrap());
        }
        let single = aggregate(vec![traj(3, &[1.5, 2.5], &[3.0, 4.0])]).unwrap();
        assert_eq!(single.periods[1].low, Some(2.5));
        assert_eq!(single.periods[1].high, Some(4.0));
    }

    #[test]
    fn aggregate_rejects_ragged_runs() {
        let err = aggregate(vec![traj(0, &[1.0, 2.0], &[1.0, 2.0]), traj(1, &[1.0], &[1.0])]);
        assert!(matches!(err, Err(Error::Data(_))));
    }

    #[test]
    fn analyze_synthetic_runs() {
        // agents 0,1 low (h 2,3), agent 2 excluded (h 5), agents 3,4 high (h 8,9)
        let initial = [2, 3, 5, 8, 9];
        let run = synthetic_run(0, &initial, &[vec![1, 3, 9, 4, 6], vec![2, 4, 9, 6, 8]]);
        let result = analyze(&[run]).unwrap();
        assert_eq!(result.median_initial_h(), vec![5]);
        assert_eq!(result.periods[0].low, Some(2.0));
        assert_eq!(result.periods[0].high, Some(5.0));
        assert_eq!(result.periods[1].difference, Some(4.0));
        assert_eq!((result.runs[0].low_size, result.runs[0].high_size), (2, 2));
    }

    #[test]
    fn empty_groups_export_blank_values() {
        let run = synthetic_run(0, &[3, 3], &[vec![1, 2]]);
        let result = analyze(&[run]).unwrap();
        let text = String::from_utf8(export_csv(&result, false)).unwrap();
        assert_eq!(text, "period,group,mean_h_alpha\n1,low,\n1,high,\n1,diff,\n");
        assert_eq!(parse_csv(&text).unwrap(), result.periods);
    }

    #[test]
    fn csv_shape() {
        let runs: Vec<_> = (0..2)
            .map(|r| traj(r, &[1.0; 20].map(|x| x + r as f64), &[3.0; 20]))
            .collect();
        let result = aggregate(runs).unwrap();
        let text = String::from_utf8(export_csv(&result, false)).unwrap();
        assert_eq!(text.lines().count(), 61);
        assert!(text.lines().nth(1).unwrap().starts_with("1,low,1.500000"));
        assert!(!text.contains('\r'));
        let per_run = String::from_utf8(export_csv(&result, true)).unwrap();
        assert_eq!(per_run.lines().next(), Some(PER_RUN_CSV_HEADER));
        assert_eq!(per_run.lines().count(), 121);
        assert_eq!(per_run.lines().nth(4), Some("0,2,low,1.000000"));
    }

    #[test]
    fn unwritable_path_reports_it() {
        let result = aggregate(vec![traj(0, &[1.0], &[2.0])]).unwrap();
        let path = Path::new("/nonexistent-dir/out.csv");
        match write_csv_file(path, &result, false) {
            Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
            other => panic!("{other:?}"),
        }
    }

    fn arb_trajs() -> impl Strategy<Value = Vec<RunTrajectory>> {
        (1usize..6).prop_flat_map(|periods| {
            prop::collection::vec(
                (
                    prop::collection::vec(0u32..400, periods),
                    prop::collection::vec(0u32..400, periods),
                ),
                1..6,
            )
        })
        .prop_map(|runs| {
            runs.into_iter()
                .enumerate()
                .map(|(i, (low, high))| RunTrajectory {
                    run_index: i as u32,
                    median_initial_h: 7,
                    low_size: 4,
                    high_size: 4,
                    low: low.into_iter().map(|v| Some(f64::from(v) / 4.0)).collect(),
                    high: high.into_iter().map(|v| Some(f64::from(v) / 4.0)).collect(),
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn aggregation_ignores_run_order(trajs in arb_trajs(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut shuffled = trajs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(aggregate(trajs).unwrap().periods, aggregate(shuffled).unwrap().periods);
        }

        #[test]
        fn shift_moves_means_not_difference(
            rows in prop::collection::vec(prop::collection::vec(0u32..30, 7), 1..5),
            shift in 0u32..50,
        ) {
            let initial = [1, 2, 3, 4, 5, 6, 7];
            let shifted: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
            let base = analyze(&[synthetic_run(0, &initial, &rows)]).unwrap();
            let moved = analyze(&[synthetic_run(0, &initial, &shifted)]).unwrap();
            for (a, b) in base.periods.iter().zip(&moved.periods) {
                let c = f64::from(shift);
                prop_assert!((b.low.unwrap() - a.low.unwrap() - c).abs() < 1e-9);
                prop_assert!((b.high.unwrap() - a.high.unwrap() - c).abs() < 1e-9);
                prop_assert!((b.difference.unwrap() - a.difference.unwrap()).abs() < 1e-9);
            }
        }

        #[test]
        fn csv_round_trips_at_six_decimals(trajs in arb_trajs()) {
            let result = aggregate(trajs).unwrap();
            let parsed = parse_csv(std::str::from_utf8(&export_csv(&result, false)).unwrap()).unwrap();
            prop_assert_eq!(parsed.len(), result.periods.len());
            for (p, q) in parsed.iter().zip(&result.periods) {
                prop_assert_eq!(p.period, q.period);
                for (a, b) in [(p.low, q.low), (p.high, q.high), (p.difference, q.difference)] {
                    prop_assert!((a.unwrap() - b.unwrap()).abs() <= 5e-7);
                }
            }
        }
    }
}
