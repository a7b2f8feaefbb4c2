//! Far-field files: a CSV table of samples plus a JSON sidecar.
//!
//! CSV columns are `n,theta_x,theta_y,re,im`, with reals written to 17
//! significant digits so a reload is bit-exact. The sidecar holds the wave,
//! the generating scene when known, and the noise spec when noise was added.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FarFieldData, NoiseSpec};
use crate::error::{DsmError, Result};
use crate::model::{ObservationSet, Point2, Scene, WaveContext};

/// Tolerance when checking stored directions against the uniform layout.
const DIRECTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldMetadata {
    pub wavelength: f64,
    pub wavenumber: f64,
    pub incident_direction: Point2,
    pub num_observation_directions: usize,
    #[serde(default)]
    pub scene: Option<Scene>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
}

impl FarFieldMetadata {
    pub fn new(wave: &WaveContext, data: &FarFieldData, scene: Option<&Scene>, noise: Option<&NoiseSpec>) -> Self {
        FarFieldMetadata {
            wavelength: wave.wavelength,
            wavenumber: wave.wavenumber,
            incident_direction: wave.incident_direction,
            num_observation_directions: data.len(),
            scene: scene.cloned(),
            noise: noise.filter(|n| !n.is_noiseless()).copied(),
        }
    }

    pub fn wave(&self) -> Result<WaveContext> {
        let mut wave = WaveContext::new(self.wavelength, self.incident_direction)?;
        wave.wavenumber = self.wavenumber;
        Ok(wave)
    }
}

/// `farfield.csv` → `farfield.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub(crate) fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text for the samples.
pub(crate) fn far_field_csv(data: &FarFieldData) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| DsmError::invalid(e.to_string());
    writer
        .write_record(["n", "theta_x", "theta_y", "re", "im"])
        .map_err(wrap)?;
    for (i, (theta, s)) in data.observations().directions().iter().zip(data.samples()).enumerate() {
        writer
            .write_record([
                (i + 1).to_string(),
                format_real(theta.x),
                format_real(theta.y),
                format_real(s.re),
                format_real(s.im),
            ])
            .map_err(wrap)?;
    }
    writer.into_inner().map_err(|e| DsmError::invalid(e.to_string()))
}

pub(crate) fn metadata_json(meta: &FarFieldMetadata) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(meta).map_err(|e| DsmError::invalid(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// Writes `csv_path` and its sidecar.
pub fn save_far_field(data: &FarFieldData, meta: &FarFieldMetadata, csv_path: &Path) -> Result<()> {
    let csv = far_field_csv(data)?;
    let json = metadata_json(meta)?;
    std::fs::write(csv_path, csv).map_err(|e| DsmError::io(csv_path, e))?;
    let side = sidecar_path(csv_path);
    std::fs::write(&side, json).map_err(|e| DsmError::io(&side, e))
}

#[derive(Deserialize)]
struct Row {
    n: usize,
    theta_x: f64,
    theta_y: f64,
    re: f64,
    im: f64,
}

/// Reads `csv_path` and its sidecar.
pub fn load_far_field(csv_path: &Path) -> Result<(FarFieldData, FarFieldMetadata)> {
    let side = sidecar_path(csv_path);
    let text = std::fs::read_to_string(&side).map_err(|e| DsmError::io(&side, e))?;
    let meta: FarFieldMetadata = serde_json::from_str(&text).map_err(|e| DsmError::format(&side, e.to_string()))?;

    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => DsmError::io(csv_path, io),
        other => DsmError::format(csv_path, format!("{other:?}")),
    })?;
    let mut directions = Vec::new();
    let mut samples = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| DsmError::format(csv_path, e.to_string()))?;
        if row.n != i + 1 {
            return Err(DsmError::format(csv_path, format!("row {} has n = {}", i + 1, row.n)));
        }
        directions.push(Point2::new(row.theta_x, row.theta_y));
        samples.push(Complex64::new(row.re, row.im));
    }
    if samples.len() != meta.num_observation_directions {
        return Err(DsmError::format(
            csv_path,
            format!(
                "{} samples but sidecar declares {}",
                samples.len(),
                meta.num_observation_directions
            ),
        ));
    }
    let obs = ObservationSet::from_directions(&directions, DIRECTION_TOLERANCE)
        .map_err(|e| DsmError::format(csv_path, e.to_string()))?;
    let data = FarFieldData::new(obs, meta.incident_direction, samples)
        .map_err(|e| DsmError::format(csv_path, e.to_string()))?;
    Ok((data, meta))
}
