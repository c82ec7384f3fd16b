use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// The seven probing tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskName {
    SemGraph,
    ContraSig,
    Monotonicity,
    #[serde(rename = "SA-Lex")]
    SaLex,
    #[serde(rename = "SA-AP")]
    SaAp,
    #[serde(rename = "SA-ST")]
    SaSt,
    #[serde(rename = "SA-RK")]
    SaRk,
}

impl TaskName {
    pub const ALL: [TaskName; 7] = [
        TaskName::SemGraph,
        TaskName::ContraSig,
        TaskName::Monotonicity,
        TaskName::SaLex,
        TaskName::SaAp,
        TaskName::SaSt,
        TaskName::SaRk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskName::SemGraph => "SemGraph",
            TaskName::ContraSig => "ContraSig",
            TaskName::Monotonicity => "Monotonicity",
            TaskName::SaLex => "SA-Lex",
            TaskName::SaAp => "SA-AP",
            TaskName::SaSt => "SA-ST",
            TaskName::SaRk => "SA-RK",
        }
    }

    /// Reference (train, test) sizes of the published datasets. Generators
    /// take sizes as parameters; these are only defaults.
    pub fn reference_sizes(self) -> (usize, usize) {
        match self {
            TaskName::SemGraph => (10_000, 5_000),
            TaskName::ContraSig => (1_000, 500),
            TaskName::Monotonicity => (5_000, 500),
            TaskName::SaLex => (1_000, 500),
            TaskName::SaSt => (1_000, 600),
            TaskName::SaAp => (500, 220),
            TaskName::SaRk => (1_000, 500),
        }
    }
}

impl fmt::Display for TaskName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskName {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskName::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| DataError::Schema(format!("unknown task {s:?}")))
    }
}

/// Edge tasks classify a pair of spans, vertex tasks a single token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeType {
    Edge,
    Vertex,
}

impl ProbeType {
    /// Number of pooled span representations fed to the classifier.
    pub fn span_slots(self) -> usize {
        match self {
            ProbeType::Edge => 2,
            ProbeType::Vertex => 1,
        }
    }
}

impl fmt::Display for ProbeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbeType::Edge => f.write_str("edge"),
            ProbeType::Vertex => f.write_str("vertex"),
        }
    }
}

/// Label set and input shape of one probing task.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSchema {
    #[serde(rename = "task")]
    pub name: TaskName,
    pub probe_type: ProbeType,
    pub labels: Vec<String>,
    pub paired: bool,
}

const SEMGRAPH_LABELS: [&str; 7] = [
    "concept-to-relation",
    "concept-to-modifier",
    "relation-to-concept",
    "relation-to-modifier",
    "relation-to-relation",
    "modifier-to-relation",
    "modifier-to-concept",
];

impl TaskSchema {
    pub fn builtin(name: TaskName) -> TaskSchema {
        let (probe_type, labels, paired): (_, &[&str], _) = match name {
            TaskName::SemGraph => (ProbeType::Edge, &SEMGRAPH_LABELS, false),
            TaskName::SaLex => (ProbeType::Edge, &["Aligned", "Unaligned"], true),
            TaskName::SaAp => (ProbeType::Edge, &["Aligned", "Unaligned"], false),
            TaskName::SaSt | TaskName::SaRk => {
                (ProbeType::Vertex, &["Aligned1", "Aligned2", "Unaligned"], true)
            }
            TaskName::ContraSig => (ProbeType::Vertex, &["Contra-sig1", "Contra-sig2", "None"], true),
            TaskName::Monotonicity => (ProbeType::Vertex, &["Monotone", "Antitone", "None"], false),
        };
        TaskSchema {
            name,
            probe_type,
            labels: labels.iter().map(|l| l.to_string()).collect(),
            paired,
        }
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    /// Checks that a (possibly hand-written) schema agrees with the built-in
    /// definition of its task. Label order may differ; the set may not.
    pub fn check(&self) -> Result<(), DataError> {
        let reference = TaskSchema::builtin(self.name);
        if self.probe_type != reference.probe_type {
            return Err(DataError::Schema(format!(
                "{} is a {} task, schema says {}",
                self.name, reference.probe_type, self.probe_type
            )));
        }
        if self.paired != reference.paired {
            return Err(DataError::Schema(format!(
                "{}: paired flag must be {}",
                self.name, reference.paired
            )));
        }
        let mut ours = self.labels.clone();
        let mut theirs = reference.labels.clone();
        ours.sort();
        theirs.sort();
        if ours != theirs {
            return Err(DataError::Schema(format!(
                "{}: labels {:?} do not match {:?}",
                self.name, self.labels, reference.labels
            )));
        }
        Ok(())
    }

    /// Parses and checks a schema JSON document.
    pub fn from_json(text: &str) -> Result<TaskSchema, DataError> {
        let schema: TaskSchema =
            serde_json::from_str(text).map_err(|e| DataError::Schema(e.to_string()))?;
        schema.check()?;
        Ok(schema)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Loads a schema file. As a convenience, `spec` may also be a bare task
    /// name such as `SA-Lex`, which yields the built-in schema.
    pub fn load(spec: &str) -> Result<TaskSchema, DataError> {
        let path = Path::new(spec);
        if !path.exists() {
            if let Ok(name) = spec.parse::<TaskName>() {
                return Ok(TaskSchema::builtin(name));
            }
        }
        let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        TaskSchema::from_json(&text)
    }
}
