use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::anyhow;
use probekit::analysis::{assemble_report, ControlTask, ReportOptions, ReportSet, RunOutcome};
use probekit::data::{read_dataset, Dataset, Split, TaskSchema};
use probekit::embeddings::{EmbeddingMatrix, EmbeddingProvider};
use probekit::probe::{encode_examples, evaluate_encoded, save_checkpoint, train_encoded, HeadKind, Metrics, ProbeConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::fsutil::write_atomic;
use crate::{config_err, data_err, Outcome, RunArgs};

struct Encoded {
    train: Vec<EmbeddingMatrix>,
    test: Vec<EmbeddingMatrix>,
}

struct Data {
    train: Dataset,
    test: Dataset,
    control: Option<(Dataset, Dataset)>,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    version: &'a str,
    config: String,
    started_unix: u64,
    finished_unix: u64,
    jobs: usize,
    seed: u64,
    runs: usize,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("PROBEKIT_CACHE").filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn cmd_probe_run(args: &RunArgs) -> Outcome<ExitCode> {
    let started = now();
    let mut cfg = RunConfig::load(&args.config).map_err(config_err)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if args.jobs == 0 {
        return Err(config_err(anyhow!("--jobs must be at least 1")));
    }
    cfg.check().map_err(config_err)?;
    let schema = TaskSchema::load(&cfg.schema).map_err(config_err)?;

    let train = read_dataset(&cfg.train, &schema, Split::Train).map_err(data_err)?;
    let test = read_dataset(&cfg.test, &schema, Split::Test).map_err(data_err)?;
    if train.num_targets() == 0 || test.num_targets() == 0 {
        return Err(data_err(anyhow!("train and test sets need at least one target each")));
    }
    let control = cfg.control.map(|spec| {
        let task = ControlTask::fit(&train, &spec);
        (task.apply(&train), task.apply(&test))
    });
    let data = Data { train, test, control };

    let cache = cache_dir();
    let mut providers: Vec<(String, Box<dyn EmbeddingProvider>, Encoded)> = Vec::new();
    for (name, spec) in &cfg.providers {
        log::info!("loading provider {name}");
        let p = spec
            .load(cfg.seed, cache.as_deref())
            .map_err(|e| data_err(anyhow!("provider {name}: {e}")))?;
        let encoded = Encoded {
            train: encode_examples(&data.train.examples, &p).map_err(|e| data_err(anyhow!("provider {name}: {e}")))?,
            test: encode_examples(&data.test.examples, &p).map_err(|e| data_err(anyhow!("provider {name}: {e}")))?,
        };
        providers.push((name.clone(), p, encoded));
    }

    let grid = cfg.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| config_err(anyhow!(e)))?;
    let save_dir = args.save_probes.then(|| cfg.output_dir.join("probes"));
    let results: Vec<anyhow::Result<RunOutcome>> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(index, (provider, head))| {
                let (_, _, encoded) = providers.iter().find(|(n, _, _)| n == provider).expect("grid uses configured providers");
                let probe = ProbeConfig { head: *head, seed: cfg.seed.wrapping_add(index as u64), ..cfg.probe.clone() };
                run_one(&data, encoded, &probe, provider, save_dir.as_ref())
            })
            .collect()
    });
    let mut outcomes = Vec::with_capacity(results.len());
    for r in results {
        outcomes.push(r.map_err(data_err)?);
    }

    let options = ReportOptions { require_control: cfg.control.is_some(), baselines: cfg.baselines.clone() };
    let report = assemble_report(&outcomes, &options).map_err(data_err)?;
    write_outputs(&cfg, &report).map_err(data_err)?;

    let meta = RunMeta {
        version: env!("CARGO_PKG_VERSION"),
        config: args.config.display().to_string(),
        started_unix: started,
        finished_unix: now(),
        jobs: args.jobs,
        seed: cfg.seed,
        runs: outcomes.len(),
    };
    let meta = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
    write_atomic(&cfg.output_dir.join("run-meta.json"), meta.as_bytes()).map_err(data_err)?;
    for r in &report.runs {
        eprintln!("{:<12} {:<14} {:<6} {}", r.task.as_str(), r.provider, r.head, r.accuracy_cell());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_one(
    data: &Data,
    encoded: &Encoded,
    config: &ProbeConfig,
    provider: &str,
    save_dir: Option<&PathBuf>,
) -> anyhow::Result<RunOutcome> {
    let fit_eval = |train: &Dataset, test: &Dataset| -> anyhow::Result<(Metrics, probekit::probe::TrainedProbe)> {
        let probe = train_encoded(&train.schema, &train.examples, &encoded.train, config)?;
        let metrics = evaluate_encoded(&probe, &test.schema, &test.examples, &encoded.test)?;
        Ok((metrics, probe))
    };
    log::info!("training {provider}/{} (seed {})", config.head, config.seed);
    let (metrics, probe) = fit_eval(&data.train, &data.test).map_err(|e| anyhow!("{provider}/{}: {e}", config.head))?;
    let control = match &data.control {
        Some((train, test)) => Some(fit_eval(train, test).map_err(|e| anyhow!("{provider}/{} control: {e}", config.head))?.0),
        None => None,
    };
    if let Some(dir) = save_dir {
        std::fs::create_dir_all(dir)?;
        save_checkpoint(dir.join(format!("{provider}-{}.probe.json", config.head)), &probe)?;
    }
    Ok(RunOutcome {
        task: data.train.schema.name,
        provider: provider.to_string(),
        head: config.head,
        seed: config.seed,
        metrics,
        control,
    })
}

fn run_file_name(provider: &str, head: HeadKind) -> String {
    format!("{provider}-{head}.report.json")
}

fn write_outputs(cfg: &RunConfig, report: &ReportSet) -> anyhow::Result<()> {
    let out = &cfg.output_dir;
    for run in &report.runs {
        let single = ReportSet { runs: vec![run.clone()] };
        write_atomic(&out.join("runs").join(run_file_name(&run.provider, run.head)), single.to_json().as_bytes())?;
    }
    write_atomic(&out.join("report.json"), report.to_json().as_bytes())?;
    write_atomic(&out.join("report.csv"), report.to_csv()?.as_bytes())?;
    write_atomic(&out.join("labelwise.csv"), report.labelwise_csv()?.as_bytes())?;
    write_atomic(&out.join("tables.md"), report.render_tables().as_bytes())?;
    Ok(())
}
