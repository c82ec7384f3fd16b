//! Control tasks, selectivity, information gain and report assembly.
//!
//! Three lenses on a probe's test results:
//!
//! * accuracy against baseline embeddings,
//! * selectivity, the accuracy margin over a control task whose labels are a
//!   seeded function of each target's surface type,
//! * information gain, the drop in test cross-entropy (bits) relative to the
//!   best baseline, also given as a percentage of the baseline cross-entropy.

use thiserror::Error;

use crate::data::TaskName;
use crate::probe::HeadKind;

mod control;
mod measures;
mod report;

pub use control::{make_control, type_key, ControlSampling, ControlSpec, ControlTask};
pub use measures::{
    entropy_bits, format_accuracy_cell, format_gain_cell, info_gain, selectivity, InfoGain,
};
pub use report::{assemble_report, GainRecord, ReportOptions, ReportSet, RunOutcome, RunReport};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no control run for {task} / {provider} / {head} but selectivity was requested")]
    MissingControl {
        task: TaskName,
        provider: String,
        head: HeadKind,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("report json: {0}")]
    Json(String),
}
