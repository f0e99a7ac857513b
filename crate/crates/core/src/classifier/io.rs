//! Model files: a magic line, a one-line JSON header, then the parameters
//! as little-endian f64 (weights row-major, then biases).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::model::{ModelMetadata, TrainedConnotationModel, N_CLASSES};
use crate::error::{Error, Result};
use crate::lexicon::Dimension;

const MAGIC: &str = "CAAMODEL 1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelHeader {
    dimension: Dimension,
    dim: usize,
    classes: usize,
    param_count: usize,
    class_weights: [f64; N_CLASSES],
    #[serde(flatten)]
    metadata: ModelMetadata,
}

pub fn write_model<W: Write>(model: &TrainedConnotationModel, mut w: W) -> Result<()> {
    let header = ModelHeader {
        dimension: model.dimension,
        dim: model.dim(),
        classes: N_CLASSES,
        param_count: model.param_count(),
        class_weights: model.class_weights,
        metadata: model.metadata.clone(),
    };
    let io = |e: std::io::Error| Error::ModelFormat(e.to_string());
    writeln!(w, "{MAGIC}").map_err(io)?;
    writeln!(w, "{}", serde_json::to_string(&header)?).map_err(io)?;
    for v in model.weights.iter().chain(model.bias.iter()) {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_model<R: Read>(r: R) -> Result<TrainedConnotationModel> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    let io = |e: std::io::Error| Error::ModelFormat(e.to_string());
    r.read_line(&mut line).map_err(io)?;
    if line.trim_end() != MAGIC {
        return Err(Error::ModelFormat("missing magic line".into()));
    }
    line.clear();
    r.read_line(&mut line).map_err(io)?;
    let header: ModelHeader = serde_json::from_str(line.trim_end())?;
    if header.classes != N_CLASSES || header.param_count != N_CLASSES * (header.dim + 1) {
        return Err(Error::ModelFormat(format!(
            "inconsistent header: {} classes, dim {}, {} parameters",
            header.classes, header.dim, header.param_count
        )));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io)?;
    if bytes.len() != header.param_count * 8 {
        return Err(Error::ModelFormat(format!(
            "expected {} parameter bytes, found {}",
            header.param_count * 8,
            bytes.len()
        )));
    }
    let params: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let split = N_CLASSES * header.dim;
    Ok(TrainedConnotationModel {
        dimension: header.dimension,
        weights: Array2::from_shape_vec((N_CLASSES, header.dim), params[..split].to_vec())
            .map_err(|e| Error::ModelFormat(e.to_string()))?,
        bias: Array1::from(params[split..].to_vec()),
        class_weights: header.class_weights,
        metadata: header.metadata,
    })
}

pub fn save_model(model: &TrainedConnotationModel, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(model, std::io::BufWriter::new(f))
}

pub fn load_model(path: &Path) -> Result<TrainedConnotationModel> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(f)
}
