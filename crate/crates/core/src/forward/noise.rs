//! Additive measurement noise calibrated to an exact SNR.
//!
//! Noise is circularly-symmetric complex Gaussian, i.i.d. per sample, drawn
//! from ChaCha8 seeded with `seed` (real part then imaginary part, in sample
//! order), then rescaled so that `10 log10(‖ψ‖² / ‖η‖²)` equals the requested
//! SNR exactly.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::FarFieldData;
use crate::error::{DsmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Signal-to-noise ratio in dB; `+∞` means no noise.
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        NoiseSpec { snr_db, seed }
    }

    pub fn noiseless() -> Self {
        NoiseSpec {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

pub fn add_noise(data: &FarFieldData, spec: &NoiseSpec) -> Result<FarFieldData> {
    if spec.is_noiseless() {
        return Ok(data.clone());
    }
    if !spec.snr_db.is_finite() {
        return Err(DsmError::invalid(format!(
            "SNR must be finite or +inf, got {}",
            spec.snr_db
        )));
    }
    if data.is_empty() {
        return Err(DsmError::invalid("cannot add noise to empty data"));
    }
    let signal = data.energy();
    if signal == 0.0 {
        return Err(DsmError::degenerate("SNR is undefined for all-zero data"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise: Vec<Complex64> = (0..data.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let drawn: f64 = noise.iter().map(|z| z.norm_sqr()).sum();
    let target = signal / 10f64.powf(spec.snr_db / 10.0);
    let scale = (target / drawn).sqrt();
    for z in &mut noise {
        *z *= scale;
    }

    let samples = data.samples().iter().zip(&noise).map(|(s, z)| s + z).collect();
    FarFieldData::new(data.observations().clone(), data.incident_direction(), samples)
}

/// SNR of `noisy` relative to `clean`, in dB.
pub fn achieved_snr_db(clean: &FarFieldData, noisy: &FarFieldData) -> Result<f64> {
    if clean.len() != noisy.len() {
        return Err(DsmError::LengthMismatch {
            expected: clean.len(),
            actual: noisy.len(),
        });
    }
    let noise: f64 = clean
        .samples()
        .iter()
        .zip(noisy.samples())
        .map(|(a, b)| (b - a).norm_sqr())
        .sum();
    Ok(10.0 * (clean.energy() / noise).log10())
}
