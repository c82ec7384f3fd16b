use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use probekit::analysis::ReportSet;

use crate::fsutil::write_atomic;
use crate::{config_err, data_err, Outcome};

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let path = e.path();
        if e.file_type()?.is_dir() {
            collect(&path, out)?;
        } else if path.file_name().is_some_and(|n| n.to_string_lossy().ends_with(".report.json")) {
            out.push(path);
        }
    }
    Ok(())
}

pub fn cmd_merge(dir: &Path, out: Option<&Path>, json: bool) -> Outcome<ExitCode> {
    if !dir.is_dir() {
        return Err(config_err(anyhow!("{} is not a directory", dir.display())));
    }
    let mut files = Vec::new();
    collect(dir, &mut files).map_err(data_err)?;
    if files.is_empty() {
        return Err(data_err(anyhow!("no *.report.json files under {}", dir.display())));
    }
    let mut sets = Vec::new();
    for f in &files {
        let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display())).map_err(data_err)?;
        sets.push(ReportSet::from_json(&text).map_err(|e| data_err(anyhow!("{}: {e}", f.display())))?);
    }
    // the same run reached through two files must agree
    let merged = ReportSet::merge(sets);
    let mut unique = BTreeMap::new();
    for r in merged.runs {
        let key = (r.task, r.provider.clone(), r.head.to_string(), r.seed);
        if let Some(prev) = unique.get(&key) {
            if prev != &r {
                return Err(data_err(anyhow!("conflicting reports for {} {} {} seed {}", key.0, key.1, key.2, key.3)));
            }
            continue;
        }
        unique.insert(key, r);
    }
    let merged = ReportSet::merge([ReportSet { runs: unique.into_values().collect() }]);
    let text = if json { merged.to_json() } else { merged.to_csv().map_err(data_err)? };
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(data_err)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
