//! Backend running a serialized pretrained network from an ONNX file.
//!
//! The config file is TOML:
//!
//! ```toml
//! model = "mobilenetv2.onnx"
//! input = "input"
//! output = "pooled"
//! output_dim = 1280
//! scaling = "imagenet"   # or "unit"
//! ```
//!
//! `unit` feeds pixels as `x / 255`; `imagenet` additionally subtracts the
//! ImageNet channel means and divides by their standard deviations. Input
//! layout is NCHW with batch size 1.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use tract_onnx::prelude::*;

use super::backend::{preprocess, ExtractionBackend, INPUT_SIZE};
use super::EmbeddingError;

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PixelScaling {
    Unit,
    Imagenet,
}

#[derive(Debug, Clone, Deserialize)]
pub struct OnnxConfig {
    pub model: PathBuf,
    pub input: String,
    pub output: String,
    pub output_dim: usize,
    pub scaling: PixelScaling,
}

impl OnnxConfig {
    pub fn from_file(path: &Path) -> Result<Self, EmbeddingError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: OnnxConfig =
            toml::from_str(&text).map_err(|e| EmbeddingError::Invalid(format!("backend config: {e}")))?;
        if cfg.model.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.model = dir.join(&cfg.model);
            }
        }
        Ok(cfg)
    }
}

type Plan = Arc<TypedRunnableModel>;

pub struct OnnxBackend {
    name: String,
    config: OnnxConfig,
    plan: Plan,
}

impl OnnxBackend {
    pub fn load(config: OnnxConfig) -> Result<Self, EmbeddingError> {
        let unavailable = |e: TractError| EmbeddingError::BackendUnavailable(format!("{e:#}"));
        let side = INPUT_SIZE as usize;
        let plan = tract_onnx::onnx()
            .model_for_path(&config.model)
            .map_err(unavailable)?
            .with_input_names([config.input.as_str()])
            .map_err(unavailable)?
            .with_outputs_by_name([config.output.as_str()])
            .map_err(unavailable)?
            .with_input_fact(0, f32::fact([1, 3, side, side]).into())
            .map_err(unavailable)?
            .into_optimized()
            .map_err(unavailable)?
            .into_runnable()
            .map_err(unavailable)?;
        let stem = config.model.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
        Ok(Self { name: format!("onnx:{stem}"), config, plan })
    }
}

const MEAN: [f32; 3] = [0.485, 0.456, 0.406];
const STD: [f32; 3] = [0.229, 0.224, 0.225];

impl ExtractionBackend for OnnxBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn output_dim(&self) -> usize {
        self.config.output_dim
    }

    fn extract(&self, bytes: &[u8]) -> Result<Vec<f32>, EmbeddingError> {
        let img = preprocess(bytes)?;
        let side = INPUT_SIZE as usize;
        let scaling = self.config.scaling;
        let input = tract_ndarray::Array4::from_shape_fn((1, 3, side, side), |(_, c, y, x)| {
            let v = img.get_pixel(x as u32, y as u32)[c] as f32 / 255.0;
            match scaling {
                PixelScaling::Unit => v,
                PixelScaling::Imagenet => (v - MEAN[c]) / STD[c],
            }
        });
        let out = self
            .plan
            .run(tvec!(input.into_tensor().into()))
            .map_err(|e| EmbeddingError::BackendUnavailable(format!("{e:#}")))?;
        let view = out[0]
            .to_plain_array_view::<f32>()
            .map_err(|e| EmbeddingError::BackendUnavailable(format!("{e:#}")))?;
        let v: Vec<f32> = view.iter().copied().collect();
        if v.len() != self.config.output_dim {
            return Err(EmbeddingError::DimensionMismatch { expected: self.config.output_dim, found: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite { row: 0, id: String::new() });
        }
        Ok(v)
    }
}
