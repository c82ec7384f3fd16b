//! JSON checkpoints.
//!
//! ```text
//! {"format":"probekit-probe","version":1,"config":{..},"schema":{..},
//!  "input_dim":d,"log":[..],"adam_step":t,
//!  "params":[{"name":..,"shape":[..],"values":[..]}],"adam_m":[..],"adam_v":[..]}
//! ```
//!
//! Tensor values are written with shortest round-trip formatting, so a saved
//! probe reloads bit-identically.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::{Affine, HeadKind, Params, ProbeConfig, ProbeError, ProbeModel, TrainedProbe};
use crate::data::TaskSchema;

const FORMAT: &str = "probekit-probe";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Tensor {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Container {
    format: String,
    version: u32,
    config: ProbeConfig,
    schema: TaskSchema,
    input_dim: usize,
    log: Vec<f64>,
    adam_step: u64,
    params: Vec<Tensor>,
    adam_m: Vec<Tensor>,
    adam_v: Vec<Tensor>,
}

fn tensors(p: &Params) -> Vec<Tensor> {
    let shapes = p.shapes();
    let mut out = Vec::new();
    p.for_each_tensor(|name, values| {
        let shape = shapes.iter().find(|(n, _)| *n == name).expect("named").1.clone();
        out.push(Tensor { name, shape, values: values.to_vec() });
    });
    out
}

/// Empty parameter layout for a config and input width.
fn layout(config: &ProbeConfig, schema: &TaskSchema, input_dim: usize) -> Params {
    let k = config.projection_dim;
    let slots = schema.probe_type.span_slots();
    let n_scorers = if config.shared_attention { 1 } else { slots };
    let outputs = ProbeModel::output_width(config.loss, schema.num_labels());
    let head = match config.head {
        HeadKind::Linear => super::Head::Linear(Affine::zeros(k * slots, outputs)),
        HeadKind::Mlp => super::Head::Mlp {
            hidden: Affine::zeros(k * slots, config.hidden_dim),
            output: Affine::zeros(config.hidden_dim, outputs),
        },
    };
    Params {
        projection: Affine::zeros(input_dim, k),
        attention: vec![Array1::zeros(k); n_scorers],
        head,
    }
}

fn fill(target: &mut Params, tensors: &[Tensor], what: &str) -> Result<(), ProbeError> {
    let shapes = target.shapes();
    if shapes.len() != tensors.len() {
        return Err(ProbeError::Checkpoint(format!(
            "{what}: expected {} tensors, found {}",
            shapes.len(),
            tensors.len()
        )));
    }
    for ((name, shape), t) in shapes.iter().zip(tensors) {
        if *name != t.name || *shape != t.shape || t.values.len() != shape.iter().product::<usize>() {
            return Err(ProbeError::Checkpoint(format!(
                "{what}: tensor {} {:?} does not fit layout {name} {shape:?}",
                t.name, t.shape
            )));
        }
        if t.values.iter().any(|v| !v.is_finite()) {
            return Err(ProbeError::Checkpoint(format!("{what}: non-finite value in {name}")));
        }
    }
    let flat: Vec<f64> = tensors.iter().flat_map(|t| t.values.iter().copied()).collect();
    target.assign_flat(&flat);
    Ok(())
}

pub fn write_checkpoint<W: Write>(mut writer: W, probe: &TrainedProbe) -> Result<(), ProbeError> {
    let c = Container {
        format: FORMAT.into(),
        version: VERSION,
        config: probe.config.clone(),
        schema: probe.schema.clone(),
        input_dim: probe.model.input_dim,
        log: probe.log.clone(),
        adam_step: probe.model.moments.step,
        params: tensors(&probe.model.params),
        adam_m: tensors(&probe.model.moments.m),
        adam_v: tensors(&probe.model.moments.v),
    };
    let json = serde_json::to_string(&c).map_err(|e| ProbeError::Checkpoint(e.to_string()))?;
    writer
        .write_all(json.as_bytes())
        .and_then(|_| writer.write_all(b"\n"))
        .map_err(|e| ProbeError::Io { path: "<checkpoint>".into(), source: e })
}

pub fn read_checkpoint<R: Read>(reader: R) -> Result<TrainedProbe, ProbeError> {
    let c: Container =
        serde_json::from_reader(reader).map_err(|e| ProbeError::Checkpoint(e.to_string()))?;
    if c.format != FORMAT {
        return Err(ProbeError::Checkpoint(format!("unknown format {:?}", c.format)));
    }
    if c.version != VERSION {
        return Err(ProbeError::Checkpoint(format!("unsupported version {}", c.version)));
    }
    c.config.validate()?;
    c.schema.check()?;
    let mut params = layout(&c.config, &c.schema, c.input_dim);
    let mut m = params.clone();
    let mut v = params.clone();
    fill(&mut params, &c.params, "params")?;
    fill(&mut m, &c.adam_m, "adam_m")?;
    fill(&mut v, &c.adam_v, "adam_v")?;
    let mut model = ProbeModel::from_params(params, c.schema.probe_type, c.config.loss);
    model.moments.m = m;
    model.moments.v = v;
    model.moments.step = c.adam_step;
    Ok(TrainedProbe { model, config: c.config, schema: c.schema, log: c.log })
}

/// Writes a checkpoint atomically (temporary file, then rename).
pub fn save_checkpoint(path: impl AsRef<Path>, probe: &TrainedProbe) -> Result<(), ProbeError> {
    let path = path.as_ref();
    let io = |e| ProbeError::Io { path: path.display().to_string(), source: e };
    let tmp = path.with_extension("tmp");
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, probe)?;
    fs::write(&tmp, &buf).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<TrainedProbe, ProbeError> {
    let path = path.as_ref();
    let file = fs::File::open(path)
        .map_err(|e| ProbeError::Io { path: path.display().to_string(), source: e })?;
    read_checkpoint(std::io::BufReader::new(file))
}
