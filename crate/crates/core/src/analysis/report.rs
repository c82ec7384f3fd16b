use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{format_accuracy_cell, format_gain_cell, info_gain, selectivity, AnalysisError, InfoGain};
use crate::data::TaskName;
use crate::probe::{HeadKind, LabelStats, Metrics};

/// Results of one completed (task, provider, head) run, as handed to
/// [`assemble_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub task: TaskName,
    pub provider: String,
    pub head: HeadKind,
    pub seed: u64,
    pub metrics: Metrics,
    /// Metrics of the probe trained and tested on the control task.
    pub control: Option<Metrics>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportOptions {
    /// Fail when a run has no control metrics.
    pub require_control: bool,
    /// Providers that serve as baselines for information gain.
    pub baselines: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainRecord {
    pub baseline: String,
    pub gain_bits: f64,
    pub percent: Option<f64>,
}

impl GainRecord {
    pub fn info_gain(&self) -> InfoGain {
        InfoGain { gain_bits: self.gain_bits, percent: self.percent }
    }
}

/// One report row. Accuracies and selectivity are percentages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub task: TaskName,
    pub provider: String,
    pub head: HeadKind,
    pub seed: u64,
    pub accuracy: f64,
    pub control_accuracy: Option<f64>,
    pub selectivity: Option<f64>,
    pub per_label: BTreeMap<String, LabelStats>,
    pub ce_bits: f64,
    pub gain: Option<GainRecord>,
}

impl RunReport {
    /// Table-3 style cell, e.g. `"91.8 (42.0)"`.
    pub fn accuracy_cell(&self) -> String {
        format_accuracy_cell(self.accuracy, self.selectivity)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSet {
    pub runs: Vec<RunReport>,
}

/// Builds report rows from completed runs.
///
/// Each non-baseline run gets a gain record against the baseline run with
/// the lowest test cross-entropy on the same task and head.
pub fn assemble_report(runs: &[RunOutcome], options: &ReportOptions) -> Result<ReportSet, AnalysisError> {
    let is_baseline = |p: &str| options.baselines.iter().any(|b| b == p);
    let mut out = Vec::with_capacity(runs.len());
    for run in runs {
        if options.require_control && run.control.is_none() {
            return Err(AnalysisError::MissingControl {
                task: run.task,
                provider: run.provider.clone(),
                head: run.head,
            });
        }
        let accuracy = 100.0 * run.metrics.accuracy;
        let control_accuracy = run.control.as_ref().map(|c| 100.0 * c.accuracy);
        let best_baseline = runs
            .iter()
            .filter(|b| b.task == run.task && b.head == run.head && is_baseline(&b.provider))
            .min_by(|a, b| a.metrics.ce_bits.total_cmp(&b.metrics.ce_bits));
        let gain = match best_baseline {
            Some(b) if !is_baseline(&run.provider) => {
                let g = info_gain(b.metrics.ce_bits, run.metrics.ce_bits);
                Some(GainRecord { baseline: b.provider.clone(), gain_bits: g.gain_bits, percent: g.percent })
            }
            _ => None,
        };
        out.push(RunReport {
            task: run.task,
            provider: run.provider.clone(),
            head: run.head,
            seed: run.seed,
            accuracy,
            control_accuracy,
            selectivity: control_accuracy.map(|c| selectivity(accuracy, c)),
            per_label: run.metrics.per_label.clone(),
            ce_bits: run.metrics.ce_bits,
            gain,
        });
    }
    Ok(ReportSet { runs: out })
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_default()
}

impl ReportSet {
    /// Concatenates several sets, ordered by task, provider, head and seed.
    pub fn merge(sets: impl IntoIterator<Item = ReportSet>) -> ReportSet {
        let mut runs: Vec<RunReport> = sets.into_iter().flat_map(|s| s.runs).collect();
        runs.sort_by(|a, b| {
            (a.task, &a.provider, a.head as u8, a.seed).cmp(&(b.task, &b.provider, b.head as u8, b.seed))
        });
        ReportSet { runs }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ReportSet, AnalysisError> {
        serde_json::from_str(text).map_err(|e| AnalysisError::Json(e.to_string()))
    }

    /// Columns: task, provider, head, seed, accuracy, control_accuracy,
    /// selectivity, ce_bits, gain_bits, gain_percent.
    pub fn to_csv(&self) -> Result<String, AnalysisError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| AnalysisError::Csv(e.to_string());
        w.write_record([
            "task",
            "provider",
            "head",
            "seed",
            "accuracy",
            "control_accuracy",
            "selectivity",
            "ce_bits",
            "gain_bits",
            "gain_percent",
        ])
        .map_err(csv_err)?;
        for r in &self.runs {
            w.write_record([
                r.task.as_str().to_string(),
                r.provider.clone(),
                r.head.to_string(),
                r.seed.to_string(),
                format!("{:.2}", r.accuracy),
                opt(r.control_accuracy, 2),
                opt(r.selectivity, 2),
                format!("{:.4}", r.ce_bits),
                opt(r.gain.as_ref().map(|g| g.gain_bits), 4),
                opt(r.gain.as_ref().and_then(|g| g.percent), 2),
            ])
            .map_err(csv_err)?;
        }
        finish(w)
    }

    /// Per-label accuracy in long form: one row per (run, gold label).
    pub fn labelwise_csv(&self) -> Result<String, AnalysisError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| AnalysisError::Csv(e.to_string());
        w.write_record(["task", "provider", "head", "seed", "label", "correct", "total", "accuracy"])
            .map_err(csv_err)?;
        for r in &self.runs {
            for (label, s) in &r.per_label {
                w.write_record([
                    r.task.as_str().to_string(),
                    r.provider.clone(),
                    r.head.to_string(),
                    r.seed.to_string(),
                    label.clone(),
                    s.correct.to_string(),
                    s.total.to_string(),
                    opt(s.accuracy().map(|a| 100.0 * a), 2),
                ])
                .map_err(csv_err)?;
            }
        }
        finish(w)
    }

    /// Markdown tables: accuracy (selectivity) per head, then information
    /// gain where present. Rows are providers, columns tasks.
    pub fn render_tables(&self) -> String {
        let tasks: BTreeSet<TaskName> = self.runs.iter().map(|r| r.task).collect();
        let mut out = String::new();
        for head in [HeadKind::Linear, HeadKind::Mlp] {
            let rows: Vec<&RunReport> = self.runs.iter().filter(|r| r.head == head).collect();
            if rows.is_empty() {
                continue;
            }
            let _ = writeln!(out, "## Accuracy, {head} head (selectivity in parentheses)\n");
            table(&mut out, &tasks, &rows, |r| Some(r.accuracy_cell()));
            if rows.iter().any(|r| r.gain.is_some()) {
                let _ = writeln!(out, "## Information gain over best baseline, {head} head\n");
                let gained: Vec<&RunReport> = rows.into_iter().filter(|r| r.gain.is_some()).collect();
                table(&mut out, &tasks, &gained, |r| r.gain.as_ref().map(|g| format_gain_cell(&g.info_gain())));
            }
        }
        out
    }
}

fn table(
    out: &mut String,
    tasks: &BTreeSet<TaskName>,
    rows: &[&RunReport],
    cell: impl Fn(&RunReport) -> Option<String>,
) {
    let providers: Vec<&str> = {
        let mut seen = Vec::new();
        for r in rows {
            if !seen.contains(&r.provider.as_str()) {
                seen.push(r.provider.as_str());
            }
        }
        seen
    };
    let _ = write!(out, "| provider |");
    for t in tasks {
        let _ = write!(out, " {t} |");
    }
    let _ = write!(out, "\n|---|");
    for _ in tasks {
        let _ = write!(out, "---|");
    }
    out.push('\n');
    for p in providers {
        let _ = write!(out, "| {p} |");
        for t in tasks {
            // first seed wins when a grid repeats a cell
            let c = rows
                .iter()
                .find(|r| r.provider == p && r.task == *t)
                .and_then(|r| cell(r))
                .unwrap_or_default();
            let _ = write!(out, " {c} |");
        }
        out.push('\n');
    }
    out.push('\n');
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, AnalysisError> {
    let bytes = w.into_inner().map_err(|e| AnalysisError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| AnalysisError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(acc: f64, ce: f64) -> Metrics {
        let total = 1000;
        let correct = (acc * total as f64).round() as usize;
        Metrics {
            accuracy: correct as f64 / total as f64,
            correct,
            total,
            per_label: BTreeMap::from([("Aligned".to_string(), LabelStats { correct, total })]),
            ce_bits: ce,
        }
    }

    fn outcome(provider: &str, acc: f64, ce: f64, control: Option<f64>) -> RunOutcome {
        RunOutcome {
            task: TaskName::SemGraph,
            provider: provider.into(),
            head: HeadKind::Linear,
            seed: 7,
            metrics: metrics(acc, ce),
            control: control.map(|c| metrics(c, 2.0)),
        }
    }

    #[test]
    fn control_gives_selectivity_cell() {
        let set = assemble_report(&[outcome("bert", 0.918, 0.5, Some(0.498))], &ReportOptions::default()).unwrap();
        assert_eq!(set.runs[0].accuracy_cell(), "91.8 (42.0)");
        assert!(set.runs[0].gain.is_none());
    }

    #[test]
    fn missing_control_is_an_error_when_required() {
        let opts = ReportOptions { require_control: true, ..Default::default() };
        let err = assemble_report(&[outcome("bert", 0.9, 0.5, None)], &opts).unwrap_err();
        assert!(matches!(err, AnalysisError::MissingControl { .. }));
    }

    #[test]
    fn gain_uses_lowest_ce_baseline() {
        let runs = [
            outcome("glove", 0.7, 1.6, None),
            outcome("random", 0.6, 2.0, None),
            outcome("bert", 0.9, 0.6, None),
        ];
        let opts = ReportOptions { baselines: vec!["glove".into(), "random".into()], ..Default::default() };
        let set = assemble_report(&runs, &opts).unwrap();
        assert!(set.runs[0].gain.is_none() && set.runs[1].gain.is_none());
        let g = set.runs[2].gain.as_ref().unwrap();
        assert_eq!(g.baseline, "glove");
        assert!((g.gain_bits - 1.0).abs() < 1e-12);
        assert!((g.percent.unwrap() - 62.5).abs() < 1e-9);
        assert!(set.render_tables().contains("| 1.00 (62%) |"));
    }

    #[test]
    fn json_round_trip() {
        let set = assemble_report(
            &[outcome("bert", 0.9123456789, 0.123456789, Some(0.333)), outcome("glove", 0.5, 1.0, Some(0.5))],
            &ReportOptions { baselines: vec!["glove".into()], ..Default::default() },
        )
        .unwrap();
        assert_eq!(ReportSet::from_json(&set.to_json()).unwrap(), set);
    }

    #[test]
    fn csv_columns() {
        let set = assemble_report(&[outcome("bert", 0.9, 0.5, None)], &ReportOptions::default()).unwrap();
        let csv = set.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "task,provider,head,seed,accuracy,control_accuracy,selectivity,ce_bits,gain_bits,gain_percent"
        );
        assert_eq!(lines.next().unwrap(), "SemGraph,bert,linear,7,90.00,,,0.5000,,");
        let lw = set.labelwise_csv().unwrap();
        assert!(lw.contains("SemGraph,bert,linear,7,Aligned,900,1000,90.00"));
    }
}
