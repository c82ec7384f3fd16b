//! Probing frozen token representations for inference-oriented linguistic
//! information.
//!
//! The crate is organised around the life of a probing experiment:
//!
//! * [`data`]: span-target datasets for edge and vertex probing tasks, their
//!   label schemas and the line-delimited JSON file format.
//! * [`embeddings`]: per-token vectors from a type-keyed random baseline,
//!   static word-vector files, or precomputed contextual embedding files.
//! * [`probe`]: the probe itself (projection, within-span attention pooling,
//!   linear or one-hidden-layer MLP head), hand-written backpropagation,
//!   Adam, seeded training and evaluation.
//! * [`analysis`]: control tasks and selectivity, entropy and information
//!   gain, and report assembly.
//! * [`synthetic`]: planted-signal tasks with known answers.
//! * [`taskgen`]: dataset construction from CoNLL-U parses and NLI pairs
//!   (semantic-graph edges, monotonicity polarity, diff-based alignment).
//!
//! A minimal end-to-end run:
//!
//! ```
//! use probekit::data::{Dataset, ProbingExample, Span, SpanTarget, Split, TaskName, TaskSchema};
//! use probekit::embeddings::RandomProvider;
//! use probekit::probe::{evaluate, train, HeadKind, ProbeConfig};
//!
//! let schema = TaskSchema::builtin(TaskName::Monotonicity);
//! let example = ProbingExample {
//!     id: "s1".into(),
//!     tokens: vec!["every".into(), "dog".into(), "runs".into()],
//!     targets: vec![
//!         SpanTarget::vertex(Span::new(0, 1), "Monotone"),
//!         SpanTarget::vertex(Span::new(1, 2), "Antitone"),
//!         SpanTarget::vertex(Span::new(2, 3), "Monotone"),
//!     ],
//! };
//! let data = Dataset::new(schema, Split::Train, vec![example]);
//! let provider = RandomProvider::new(16, 7);
//! let config = ProbeConfig { head: HeadKind::Linear, projection_dim: 8, epochs: 2, ..ProbeConfig::default() };
//!
//! let probe = train(&data, &provider, &config).unwrap();
//! let metrics = evaluate(&probe, &data, &provider).unwrap();
//! assert_eq!(metrics.total, 3);
//! ```

pub mod analysis;
pub mod data;
pub mod embeddings;
mod hash;
pub mod probe;
pub mod synthetic;
pub mod taskgen;
