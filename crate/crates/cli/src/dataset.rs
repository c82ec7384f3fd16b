use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Subcommand};
use probekit::analysis::entropy_bits;
use probekit::data::{
    label_histogram, read_dataset, read_records, validate_example, write_examples, Dataset, Split, TaskName,
    TaskSchema, Violation, ViolationKind,
};
use probekit::taskgen::{
    emit_task_dataset, parse_conllu, read_pairs, replicate_trees, split_dataset, DiffMode, GenOptions,
    PolarityLexicon, PropnPolicy, TaskInput,
};

use crate::fsutil::write_atomic;
use crate::{config_err, data_err, Outcome};

#[derive(Subcommand)]
pub enum DatasetCommand {
    /// Print every violation in a dataset file; exit 2 if there are any.
    Validate {
        file: PathBuf,
        /// Built-in task name or schema file.
        #[arg(long)]
        schema: String,
    },
    /// Print the label histogram and its entropy.
    Stats {
        file: PathBuf,
        #[arg(long)]
        schema: String,
    },
    /// Semantic-role edges from dependency trees.
    GenSemgraph(TreeArgs),
    /// Monotonicity marks from dependency trees.
    GenPolarity {
        #[command(flatten)]
        common: TreeArgs,
        /// Proper-noun handling.
        #[arg(long, value_enum, default_value = "name-runs")]
        propn: Propn,
        /// Operator lexicon (JSON map of lemma to operator).
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Add this many lexical replicas of every tree.
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
    /// Pronoun-antecedent edges from trees with `Antecedent=<id>` in MISC.
    GenAnaphora(TreeArgs),
    /// Sentence-pair tasks (SA-Lex, ContraSig, SA-ST, SA-RK) from a pairs file.
    GenDiff {
        /// JSON lines with premise, hypothesis and optional id, label, spans.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        task: String,
        #[arg(long, value_enum, default_value = "articles")]
        diff: Diff,
        /// Keep only pairs with this label.
        #[arg(long)]
        label: Option<String>,
        /// SA-ST: do not splice distractor phrases.
        #[arg(long)]
        no_distractors: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
pub struct TreeArgs {
    /// CoNLL-U input.
    #[arg(long)]
    conllu: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct OutputArgs {
    /// Dataset output (the train split when --test-out is given).
    #[arg(long)]
    out: PathBuf,
    /// Write a test split here.
    #[arg(long, requires = "test_size")]
    test_out: Option<PathBuf>,
    #[arg(long, requires = "test_out")]
    train_size: Option<usize>,
    #[arg(long, requires = "test_out")]
    test_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum Propn {
    NameRuns,
    All,
    Inherit,
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum Diff {
    Exact,
    Articles,
}

pub fn cmd_dataset(cmd: DatasetCommand) -> Outcome<ExitCode> {
    match cmd {
        DatasetCommand::Validate { file, schema } => validate(&file, &schema),
        DatasetCommand::Stats { file, schema } => stats(&file, &schema),
        DatasetCommand::GenSemgraph(args) => gen_trees(TaskName::SemGraph, &args, GenOptions::default(), 0),
        DatasetCommand::GenAnaphora(args) => gen_trees(TaskName::SaAp, &args, GenOptions::default(), 0),
        DatasetCommand::GenPolarity { common, propn, lexicon, replicate } => {
            let mut options = GenOptions::default();
            options.polarity.propn = match propn {
                Propn::NameRuns => PropnPolicy::NameRuns,
                Propn::All => PropnPolicy::All,
                Propn::Inherit => PropnPolicy::Inherit,
            };
            if let Some(path) = lexicon {
                options.lexicon = read_lexicon(&path).map_err(config_err)?;
            }
            gen_trees(TaskName::Monotonicity, &common, options, replicate)
        }
        DatasetCommand::GenDiff { pairs, task, diff, label, no_distractors, output } => {
            let kind: TaskName = task.parse().map_err(config_err)?;
            if !matches!(kind, TaskName::SaLex | TaskName::ContraSig | TaskName::SaSt | TaskName::SaRk) {
                return Err(config_err(anyhow!("{kind} is not built from sentence pairs")));
            }
            let options = GenOptions {
                seed: output.seed,
                diff: match diff {
                    Diff::Exact => DiffMode::Exact,
                    Diff::Articles => DiffMode::Articles,
                },
                label_filter: label,
                distractors: !no_distractors,
                ..GenOptions::default()
            };
            let text = read_text(&pairs)?;
            let pairs = read_pairs(&text).map_err(|e| data_err(anyhow!("{}: {e}", pairs.display())))?;
            let d = emit_task_dataset(kind, TaskInput::Pairs(&pairs), &options).map_err(data_err)?;
            write_generated(&d, &output)
        }
    }
}

fn load_schema(spec: &str) -> Outcome<TaskSchema> {
    TaskSchema::load(spec).map_err(config_err)
}

fn read_text(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data_err)
}

fn read_lexicon(path: &Path) -> anyhow::Result<PolarityLexicon> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let entries = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(PolarityLexicon { entries })
}

fn validate(file: &Path, schema: &str) -> Outcome<ExitCode> {
    let schema = load_schema(schema)?;
    let f = File::open(file).with_context(|| format!("opening {}", file.display())).map_err(data_err)?;
    let mut seen = HashSet::new();
    let mut bad = 0usize;
    for (line, record) in read_records(BufReader::new(f)) {
        let example = match record {
            Ok(e) => e,
            Err(e) => {
                println!("line {line}: {e}");
                bad += 1;
                continue;
            }
        };
        let mut violations = validate_example(&example, &schema);
        if !seen.insert(example.id.clone()) {
            violations.insert(0, Violation { example_id: example.id.clone(), kind: ViolationKind::DuplicateId });
        }
        for v in &violations {
            println!("line {line}: {v}");
        }
        bad += violations.len();
    }
    if bad > 0 {
        eprintln!("{bad} violation(s) in {}", file.display());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn stats(file: &Path, schema: &str) -> Outcome<ExitCode> {
    let schema = load_schema(schema)?;
    let d = read_dataset(file, &schema, Split::Train).map_err(data_err)?;
    let hist = label_histogram(&d);
    let total = d.num_targets();
    println!("task: {}", d.schema.name);
    println!("examples: {}", d.examples.len());
    println!("targets: {total}");
    let width = hist.keys().map(String::len).max().unwrap_or(0);
    for (label, n) in &hist {
        let pct = 100.0 * *n as f64 / total.max(1) as f64;
        println!("  {label:<width$}  {n:>7}  {pct:5.1}%");
    }
    println!("entropy: {:.4} bits", entropy_bits(&hist));
    Ok(ExitCode::SUCCESS)
}

fn gen_trees(kind: TaskName, args: &TreeArgs, mut options: GenOptions, replicate: usize) -> Outcome<ExitCode> {
    options.seed = args.output.seed;
    let text = read_text(&args.conllu)?;
    let mut trees = parse_conllu(&text).map_err(|e| data_err(anyhow!("{}: {e}", args.conllu.display())))?;
    if replicate > 0 {
        let extra = replicate_trees(&trees, replicate, &options.lexicon, options.seed);
        trees.extend(extra);
    }
    let d = emit_task_dataset(kind, TaskInput::Trees(&trees), &options).map_err(data_err)?;
    write_generated(&d, &args.output)
}

fn write_generated(d: &Dataset, out: &OutputArgs) -> Outcome<ExitCode> {
    if d.examples.is_empty() {
        return Err(data_err(anyhow!("no examples were generated")));
    }
    let write = |path: &Path, d: &Dataset| -> Outcome<()> {
        let mut buf = Vec::new();
        write_examples(&mut buf, &d.examples).map_err(data_err)?;
        write_atomic(path, &buf).map_err(data_err)
    };
    match &out.test_out {
        None => {
            write(&out.out, d)?;
            eprintln!("{}: {} examples, {} targets", out.out.display(), d.examples.len(), d.num_targets());
        }
        Some(test_out) => {
            let n_test = out.test_size.expect("clap requires --test-size");
            let n_train = out.train_size.unwrap_or(d.examples.len().saturating_sub(n_test));
            let (train, test) = split_dataset(d, n_train, n_test, out.seed);
            write(&out.out, &train)?;
            write(test_out, &test)?;
            eprintln!(
                "{}: {} examples; {}: {} examples",
                out.out.display(),
                train.examples.len(),
                test_out.display(),
                test.examples.len()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
