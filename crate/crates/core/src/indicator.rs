//! The direct-sampling indicator and its closed-form Bessel structure.
//!
//! From data, the indicator at a search point `x_s` is the normalized
//! correlation
//!
//! ```text
//! F(x_s) = |⟨ψ∞, g⟩| / (‖ψ∞‖ ‖g‖),   g_n = exp(−ik θ_n·x_s)
//! ```
//!
//! with `⟨f, g⟩ = Σ f_n conj(g_n)` and `‖f‖ = √⟨f, f⟩`. For a permeability
//! contrast the direction sum inside the correlation collapses to `J₁`, so up
//! to a constant factor
//!
//! ```text
//! Ψ(x_s) = Σ_m r_m² μ₀/(μ_m+μ₀) exp(ik d·x_m) ((x_m−x_s)/|x_m−x_s| · d) J₁(k|x_m−x_s|)
//! ```
//!
//! The indicator therefore vanishes at each inclusion center and peaks at
//! distance `1.8412/k` along `±d` from it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DsmError, Result};
use crate::forward::FarFieldData;
use crate::model::{ObservationSet, Point2, Scene, WaveContext};
use crate::specfun::j1_nonneg;

/// Location of the first maximum of `J₁`, to the precision used for peak
/// prediction.
pub const J1_PEAK_ARGUMENT: f64 = 1.8412;

/// A search point `x_s`.
pub type SamplingPoint = Point2;

/// `Σ f_n conj(g_n)`.
pub fn inner_product(f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(DsmError::LengthMismatch {
            expected: f.len(),
            actual: g.len(),
        });
    }
    Ok(f.iter().zip(g).map(|(a, b)| a * b.conj()).sum())
}

/// `√⟨f, f⟩`.
pub fn l2_norm(f: &[Complex64]) -> f64 {
    f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `g_n = exp(−ik θ_n·x_s)`.
pub fn test_vector(obs: &ObservationSet, wavenumber: f64, x_s: SamplingPoint) -> Vec<Complex64> {
    obs.directions()
        .iter()
        .map(|theta| Complex64::cis(-wavenumber * theta.dot(x_s)))
        .collect()
}

/// Indicator with data-dependent quantities precomputed, for sweeping many
/// search points against one data set.
#[derive(Debug, Clone)]
pub struct DsmIndicator<'a> {
    data: &'a FarFieldData,
    wavenumber: f64,
    denominator: f64,
}

impl<'a> DsmIndicator<'a> {
    pub fn new(data: &'a FarFieldData, wavenumber: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(DsmError::invalid("far-field data are empty"));
        }
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(DsmError::invalid(format!(
                "wavenumber must be positive, got {wavenumber}"
            )));
        }
        let data_norm = l2_norm(data.samples());
        if data_norm == 0.0 {
            return Err(DsmError::degenerate("far-field data are identically zero"));
        }
        // every test-vector entry has unit modulus
        let test_norm = (data.len() as f64).sqrt();
        Ok(DsmIndicator {
            data,
            wavenumber,
            denominator: data_norm * test_norm,
        })
    }

    /// `⟨ψ∞, g(x_s)⟩`.
    pub fn correlation(&self, x_s: SamplingPoint) -> Complex64 {
        let k = self.wavenumber;
        self.data
            .observations()
            .directions()
            .iter()
            .zip(self.data.samples())
            .map(|(theta, psi)| psi * Complex64::cis(k * theta.dot(x_s)))
            .sum()
    }

    pub fn evaluate(&self, x_s: SamplingPoint) -> f64 {
        self.correlation(x_s).norm() / self.denominator
    }
}

/// `F(x_s)`, in `[0, 1]`.
pub fn dsm_indicator_raw(data: &FarFieldData, wavenumber: f64, x_s: SamplingPoint) -> Result<f64> {
    Ok(DsmIndicator::new(data, wavenumber)?.evaluate(x_s))
}

/// The complex sum `Ψ(x_s)`; a term whose center coincides with `x_s`
/// contributes zero.
pub fn analytic_psi_complex(scene: &Scene, wave: &WaveContext, x_s: SamplingPoint) -> Complex64 {
    let k = wave.wavenumber;
    let d = wave.incident_direction;
    let mu0 = scene.background_permeability;
    scene
        .inclusions
        .iter()
        .map(|inc| {
            let offset = inc.center - x_s;
            let dist = offset.norm();
            if dist == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let contrast = mu0 / (inc.permeability + mu0);
            let amplitude = inc.radius * inc.radius * contrast * (offset.dot(d) / dist) * j1_nonneg(k * dist);
            Complex64::from_polar(amplitude, k * d.dot(inc.center))
        })
        .sum()
}

/// `|Ψ(x_s)|`.
pub fn analytic_psi(scene: &Scene, wave: &WaveContext, x_s: SamplingPoint) -> f64 {
    analytic_psi_complex(scene, wave, x_s).norm()
}

/// The two points where inclusion `inclusion_index` is predicted to produce
/// indicator peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakPrediction {
    /// Zero-based index into the scene's inclusions.
    pub inclusion_index: usize,
    /// `x_m − (1.8412/k) d` and `x_m + (1.8412/k) d`.
    pub positions: [Point2; 2],
    pub offset_radius: f64,
}

pub fn predicted_peaks(scene: &Scene, wave: &WaveContext) -> Vec<PeakPrediction> {
    let offset_radius = J1_PEAK_ARGUMENT / wave.wavenumber;
    let step = wave.incident_direction * offset_radius;
    scene
        .inclusions
        .iter()
        .enumerate()
        .map(|(m, inc)| PeakPrediction {
            inclusion_index: m,
            positions: [inc.center - step, inc.center + step],
            offset_radius,
        })
        .collect()
}

/// `(1/N) Σ_n (ϑ·θ_n) exp(−ik θ_n·x)`.
pub fn direction_sum(obs: &ObservationSet, wavenumber: f64, vartheta: Point2, x: Point2) -> Complex64 {
    let total: Complex64 = obs
        .directions()
        .iter()
        .map(|theta| Complex64::from_polar(vartheta.dot(*theta), -wavenumber * theta.dot(x)))
        .sum();
    total / obs.count() as f64
}

/// Continuous limit of [`direction_sum`]: `−i (ϑ·x̂) J₁(k|x|)`.
pub fn direction_sum_limit(wavenumber: f64, vartheta: Point2, x: Point2) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, -(vartheta.dot(x) / r) * j1_nonneg(wavenumber * r))
}

/// `max_i |A_i/max A − B_i/max B|` for the data-based indicator `A` and
/// `B = |Ψ|` over `points`.
pub fn theorem_residual(
    data: &FarFieldData,
    scene: &Scene,
    wave: &WaveContext,
    points: &[SamplingPoint],
) -> Result<f64> {
    if points.is_empty() {
        return Err(DsmError::invalid("residual needs at least one sampling point"));
    }
    let indicator = DsmIndicator::new(data, wave.wavenumber)?;
    let a: Vec<f64> = points.par_iter().map(|&p| indicator.evaluate(p)).collect();
    let b: Vec<f64> = points.par_iter().map(|&p| analytic_psi(scene, wave, p)).collect();
    let max_a = a.iter().copied().fold(0.0, f64::max);
    let max_b = b.iter().copied().fold(0.0, f64::max);
    if max_a == 0.0 || max_b == 0.0 {
        return Err(DsmError::degenerate(
            "indicator map is identically zero on the sampling points",
        ));
    }
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x / max_a - y / max_b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::synthesize_far_field;
    use crate::model::Inhomogeneity;
    use crate::specfun::oracle::converged_jn;
    use std::f64::consts::FRAC_PI_4;

    fn wave45() -> WaveContext {
        WaveContext::from_degrees(0.4, 45.0).unwrap()
    }

    fn example1() -> Scene {
        Scene::new(1.0, vec![Inhomogeneity::new(Point2::new(0.7, 0.5), 0.1, 5.0).unwrap()]).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_product_examples() {
        let ones = vec![c(1.0, 0.0); 8];
        assert_eq!(inner_product(&ones, &ones).unwrap(), c(8.0, 0.0));
        assert_eq!(
            inner_product(&[c(0.0, 1.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(
            inner_product(&[c(1.0, 0.0), c(0.0, 1.0)], &[c(0.0, 1.0), c(1.0, 0.0)]).unwrap(),
            c(0.0, 0.0)
        );
        assert!(inner_product(&ones, &ones[..3]).is_err());
    }

    #[test]
    fn test_vector_examples() {
        let obs = ObservationSet::uniform(16).unwrap();
        assert!(test_vector(&obs, 5.0, Point2::ORIGIN).iter().all(|z| *z == c(1.0, 0.0)));

        let one = ObservationSet::uniform(1).unwrap();
        let v = test_vector(&one, 1.0, Point2::new(std::f64::consts::PI, 0.0));
        assert!((v[0] - c(-1.0, 0.0)).norm() < 1e-15);

        let v = test_vector(&obs, 15.0, Point2::new(0.3, -0.8));
        assert!((l2_norm(&v) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn indicator_is_one_on_its_own_test_vector() {
        let obs = ObservationSet::uniform(64).unwrap();
        let k = 10.0;
        let x_s = Point2::new(0.2, -0.4);
        let g: Vec<_> = test_vector(&obs, k, x_s)
            .into_iter()
            .map(|z| z * c(0.0, -2.0))
            .collect();
        let data = FarFieldData::new(obs, Point2::new(1.0, 0.0), g).unwrap();
        assert!((dsm_indicator_raw(&data, k, x_s).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn indicator_near_zero_at_example1_center() {
        let data = synthesize_far_field(&example1(), &wave45(), &ObservationSet::uniform(256).unwrap());
        let v = dsm_indicator_raw(&data, wave45().wavenumber, Point2::new(0.7, 0.5)).unwrap();
        assert!(v <= 0.05, "{v}");
    }

    #[test]
    fn indicator_ignores_complex_scaling() {
        let data = synthesize_far_field(&example1(), &wave45(), &ObservationSet::uniform(128).unwrap());
        let scaled = data.scaled(c(-0.3, 7.0)).unwrap();
        let k = wave45().wavenumber;
        for p in [Point2::new(0.6, 0.4), Point2::new(-0.5, 0.1), Point2::new(0.9, 0.9)] {
            let a = dsm_indicator_raw(&data, k, p).unwrap();
            let b = dsm_indicator_raw(&scaled, k, p).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_data_rejected() {
        let obs = ObservationSet::uniform(4).unwrap();
        let data = FarFieldData::new(obs, Point2::new(1.0, 0.0), vec![c(0.0, 0.0); 4]).unwrap();
        assert!(matches!(
            dsm_indicator_raw(&data, 1.0, Point2::ORIGIN),
            Err(DsmError::Degenerate(_))
        ));
    }

    #[test]
    fn analytic_psi_examples() {
        let scene = example1();
        let wave = wave45();
        let center = Point2::new(0.7, 0.5);
        assert_eq!(analytic_psi(&scene, &wave, center), 0.0);

        let on_axis = center - wave.incident_direction * (J1_PEAK_ARGUMENT / wave.wavenumber);
        let v = analytic_psi(&scene, &wave, on_axis);
        // r² μ₀/(μ₁+μ₀) J₁(1.8412), 40-digit reference
        assert!((v - 9.697_753_737_127_385e-4).abs() < 1e-15, "{v}");

        let d = wave.incident_direction;
        let perp = Point2::new(-d.y, d.x);
        assert!(analytic_psi(&scene, &wave, center + perp * 0.1) < 1e-17);
    }

    #[test]
    fn example1_predicted_peaks() {
        let peaks = predicted_peaks(&example1(), &wave45());
        assert_eq!(peaks.len(), 1);
        let p = peaks[0];
        assert!((p.offset_radius - 0.117_214_432_488_319_08).abs() < 1e-15);
        let xs = [p.positions[0].x, p.positions[1].x];
        let ys = [p.positions[0].y, p.positions[1].y];
        assert!((xs[0] - 0.6171).abs() < 5e-5 && (xs[1] - 0.7829).abs() < 5e-5, "{xs:?}");
        assert!((ys[0] - 0.4171).abs() < 5e-5 && (ys[1] - 0.5829).abs() < 5e-5, "{ys:?}");
        let wave = wave45();
        for pos in p.positions {
            let off = Point2::new(0.7, 0.5) - pos;
            assert!((wave.wavenumber * off.norm() - J1_PEAK_ARGUMENT).abs() < 1e-12);
            let unit = off * (1.0 / off.norm());
            let along = (unit - wave.incident_direction)
                .norm()
                .min((unit + wave.incident_direction).norm());
            assert!(along < 1e-12);
        }
        let x_dir = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
        assert!((p.positions[1].x - 0.7 - p.offset_radius * x_dir.0).abs() < 1e-15);
    }

    #[test]
    fn unit_offset_peaks() {
        let scene = Scene::new(1.0, vec![Inhomogeneity::new(Point2::ORIGIN, 0.1, 5.0).unwrap()]).unwrap();
        let wave = WaveContext::from_wavenumber(J1_PEAK_ARGUMENT, Point2::new(1.0, 0.0)).unwrap();
        let p = predicted_peaks(&scene, &wave)[0];
        assert!((p.positions[0] - Point2::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((p.positions[1] - Point2::new(1.0, 0.0)).norm() < 1e-15);
    }

    fn example1_grid() -> Vec<Point2> {
        let mut pts = Vec::new();
        for j in 0..=200 {
            for i in 0..=200 {
                pts.push(Point2::new(-1.0 + 0.01 * i as f64, -1.0 + 0.01 * j as f64));
            }
        }
        pts
    }

    #[test]
    fn residual_small_at_256_directions() {
        let wave = wave45();
        let data = synthesize_far_field(&example1(), &wave, &ObservationSet::uniform(256).unwrap());
        let r = theorem_residual(&data, &example1(), &wave, &example1_grid()).unwrap();
        assert!(r <= 1e-3, "{r}");
    }

    #[test]
    fn residual_finite_when_undersampled() {
        let wave = wave45();
        let data = synthesize_far_field(&example1(), &wave, &ObservationSet::uniform(8).unwrap());
        let r = theorem_residual(&data, &example1(), &wave, &example1_grid()).unwrap();
        assert!(r.is_finite());
    }

    #[test]
    fn residual_unchanged_by_radius_scaling() {
        let wave = wave45();
        let obs = ObservationSet::uniform(64).unwrap();
        let scene = example1();
        let doubled = scene.scaled_radii(2.0).unwrap();
        let grid: Vec<_> = example1_grid().into_iter().step_by(7).collect();
        let a = theorem_residual(&synthesize_far_field(&scene, &wave, &obs), &scene, &wave, &grid).unwrap();
        let b = theorem_residual(&synthesize_far_field(&doubled, &wave, &obs), &doubled, &wave, &grid).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn direction_sum_signed_limit() {
        // the signed form -i (ϑ·x̂) J₁(k|x|), checked against the Bessel oracle
        let obs = ObservationSet::uniform(128).unwrap();
        let vartheta = Point2::from_angle(0.3);
        let x = Point2::new(0.4, -0.9);
        let k = 20.0;
        let s = direction_sum(&obs, k, vartheta, x);
        let (j1, _) = converged_jn(1, k * x.norm(), 1e-14);
        let expected = Complex64::new(0.0, -(vartheta.dot(x) / x.norm()) * j1);
        assert!((s - expected).norm() < 1e-12, "{s} vs {expected}");
        assert!((direction_sum_limit(k, vartheta, x) - expected).norm() < 1e-12);
    }

    #[test]
    fn isolated_peak_magnitudes_follow_contrast() {
        let wave = wave45();
        let centers = [Point2::new(0.7, 0.5), Point2::new(-0.7, 0.0), Point2::new(0.2, -0.5)];
        let mus = [10.0, 6.0, 2.0];
        let values: Vec<f64> = centers
            .iter()
            .zip(mus)
            .map(|(&c, mu)| {
                let s = Scene::new(1.0, vec![Inhomogeneity::new(c, 0.1, mu).unwrap()]).unwrap();
                let p = predicted_peaks(&s, &wave)[0].positions[0];
                analytic_psi(&s, &wave, p)
            })
            .collect();
        assert!(values[2] > values[1] && values[1] > values[0]);
        let scale = values[2] * 3.0;
        assert!((values[0] / scale - 1.0 / 11.0).abs() < 1e-14);
        assert!((values[1] / scale - 1.0 / 7.0).abs() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn indicator_in_unit_interval(px in -1.5f64..1.5, py in -1.5f64..1.5, mu in 0.5f64..20.0, n in 1usize..80) {
                let scene = Scene::new(1.0, vec![
                    Inhomogeneity::new(Point2::new(0.3, 0.1), 0.1, mu).unwrap(),
                    Inhomogeneity::new(Point2::new(-0.4, -0.6), 0.05, 2.0).unwrap(),
                ]).unwrap();
                let wave = wave45();
                let data = synthesize_far_field(&scene, &wave, &ObservationSet::uniform(n).unwrap());
                if data.energy() > 0.0 {
                    let v = dsm_indicator_raw(&data, wave.wavenumber, Point2::new(px, py)).unwrap();
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
                }
            }

            #[test]
            fn direction_sum_matches_bessel(
                angle in 0.0f64..6.3,
                theta_x in 0.0f64..6.3,
                kr in 0.01f64..40.0,
                k in 1.0f64..30.0,
            ) {
                let vartheta = Point2::from_angle(angle);
                let x = Point2::from_angle(theta_x) * (kr / k);
                let n = (2.0 * kr).ceil() as usize + 16;
                let obs = ObservationSet::uniform(n).unwrap();
                let lhs = direction_sum(&obs, k, vartheta, x).norm();
                let rhs = direction_sum_limit(k, vartheta, x).norm();
                prop_assert!((lhs - rhs).abs() < 1e-8, "lhs={} rhs={}", lhs, rhs);
            }
        }
    }
}
