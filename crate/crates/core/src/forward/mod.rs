//! Far-field synthesis from the small-inclusion asymptotic expansion.
//!
//! For an incident direction `d` and observation direction `θ`,
//!
//! ```text
//! ψ∞(d, θ) ≈ −k²(1+i)/(4√(kπ)) Σ_m r_m² |B| (d·M_m·θ) exp(ik d·x_m) exp(−ik θ·x_m)
//! ```
//!
//! with `M_m = 2μ₀/(μ_m+μ₀) I`. Single scattering only: there is no
//! interaction between inclusions.

mod io;
mod noise;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DsmError, Result};
use crate::model::{ObservationSet, Point2, Scene, WaveContext, REFERENCE_AREA};

pub(crate) use io::{far_field_csv, metadata_json};
pub use io::{load_far_field, save_far_field, sidecar_path, FarFieldMetadata};
pub use noise::{achieved_snr_db, add_noise, NoiseSpec};

/// Scalar polarizability `2μ₀/(μ_m+μ₀)`.
pub fn polarizability_factor(inclusion_permeability: f64, background_permeability: f64) -> Result<f64> {
    for (name, mu) in [
        ("inclusion", inclusion_permeability),
        ("background", background_permeability),
    ] {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(DsmError::invalid(format!(
                "{name} permeability must be positive, got {mu}"
            )));
        }
    }
    Ok(2.0 * background_permeability / (inclusion_permeability + background_permeability))
}

/// Constant in front of the inclusion sum, `−k²(1+i)/(4√(kπ))`.
pub fn far_field_prefactor(wavenumber: f64) -> Complex64 {
    let k = wavenumber;
    Complex64::new(-1.0, -1.0) * (k * k / (4.0 * (k * std::f64::consts::PI).sqrt()))
}

/// Asymptotic far-field sample `ψ∞(d, θ)` for one observation direction.
pub fn far_field_asymptotic(scene: &Scene, wave: &WaveContext, theta: Point2) -> Complex64 {
    let k = wave.wavenumber;
    let d = wave.incident_direction;
    let mu0 = scene.background_permeability;
    let d_dot_theta = d.dot(theta);
    let sum: Complex64 = scene
        .inclusions
        .iter()
        .map(|inc| {
            // Scene construction guarantees positive permeabilities.
            let m = 2.0 * mu0 / (inc.permeability + mu0);
            let phase = k * (d - theta).dot(inc.center);
            Complex64::from_polar(inc.radius * inc.radius * REFERENCE_AREA * m * d_dot_theta, phase)
        })
        .sum();
    far_field_prefactor(k) * sum
}

/// Far-field samples `ψ∞(d, θ_n)`, one per observation direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldData {
    observations: ObservationSet,
    incident_direction: Point2,
    samples: Vec<Complex64>,
}

impl FarFieldData {
    pub fn new(observations: ObservationSet, incident_direction: Point2, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != observations.count() {
            return Err(DsmError::LengthMismatch {
                expected: observations.count(),
                actual: samples.len(),
            });
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(DsmError::invalid("far-field samples must be finite"));
        }
        Ok(FarFieldData {
            observations,
            incident_direction,
            samples,
        })
    }

    pub fn observations(&self) -> &ObservationSet {
        &self.observations
    }

    pub fn incident_direction(&self) -> Point2 {
        self.incident_direction
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `Σ |ψ_n|²`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Every sample multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Result<FarFieldData> {
        let samples = self.samples.iter().map(|s| s * factor).collect();
        FarFieldData::new(self.observations.clone(), self.incident_direction, samples)
    }

    /// A fixed representative of the complex ray `{c ψ : c ≠ 0}`.
    ///
    /// Samples are divided by the peak modulus, rotated so the first sample
    /// reaching half the peak is real and positive, and snapped to a
    /// `2^-28` lattice. Any two nonzero multiples of the same data map to the
    /// same representative unless a component lands within rounding distance
    /// of a lattice midpoint, so indicator maps built from it do not depend
    /// on the overall amplitude or phase of the data.
    pub fn canonical_representative(&self) -> Result<FarFieldData> {
        let peak = self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(DsmError::degenerate("far-field data are identically zero"));
        }
        let reference = self
            .samples
            .iter()
            .find(|s| s.norm() >= 0.5 * peak)
            .copied()
            .expect("peak sample exists");
        let rotation = reference.conj() / (reference.norm() * peak);
        let snap = |v: f64| (v * LATTICE).round() / LATTICE;
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let c = s * rotation;
                Complex64::new(snap(c.re), snap(c.im))
            })
            .collect();
        FarFieldData::new(self.observations.clone(), self.incident_direction, samples)
    }
}

const LATTICE: f64 = (1u64 << 28) as f64;

/// Samples the asymptotic far field on every observation direction.
///
/// Evaluated in parallel; each sample is a pure function of its direction.
pub fn synthesize_far_field(scene: &Scene, wave: &WaveContext, obs: &ObservationSet) -> FarFieldData {
    let samples = obs
        .directions()
        .par_iter()
        .map(|&theta| far_field_asymptotic(scene, wave, theta))
        .collect();
    FarFieldData {
        observations: obs.clone(),
        incident_direction: wave.incident_direction,
        samples,
    }
}
