//! Scene, wave and observation geometry.
//!
//! Inclusions are disks `x_m + r_m B` with `B` the unit disk, so every
//! inclusion has reference area `|B| = π`. All permittivities are taken equal
//! to one; the contrast is carried by the permeability alone.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DsmError, Result};

/// Default lower bound on `k |x_m - x_m'|` for the well-separated check.
pub const DEFAULT_SEPARATION_THRESHOLD: f64 = 7.5;

/// Tolerance on `|d| = 1` for incident directions supplied as vectors.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Area of the reference inclusion shape (unit disk).
pub const REFERENCE_AREA: f64 = PI;

/// Point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Unit vector at `angle` radians from the positive x axis.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point2 { x: c, y: s }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2 { x: v[0], y: v[1] }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A small disk-shaped inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInhomogeneity")]
pub struct Inhomogeneity {
    pub center: Point2,
    pub radius: f64,
    /// Relative magnetic permeability inside the disk.
    pub permeability: f64,
}

#[derive(Deserialize)]
struct RawInhomogeneity {
    center: Point2,
    radius: f64,
    permeability: f64,
}

impl TryFrom<RawInhomogeneity> for Inhomogeneity {
    type Error = DsmError;
    fn try_from(raw: RawInhomogeneity) -> Result<Self> {
        Inhomogeneity::new(raw.center, raw.radius, raw.permeability)
    }
}

impl Inhomogeneity {
    pub fn new(center: Point2, radius: f64, permeability: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(DsmError::invalid(format!("inclusion center {center} is not finite")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(DsmError::invalid(format!(
                "inclusion radius must be positive, got {radius}"
            )));
        }
        if !(permeability > 0.0 && permeability.is_finite()) {
            return Err(DsmError::invalid(format!(
                "inclusion permeability must be positive, got {permeability}"
            )));
        }
        Ok(Inhomogeneity {
            center,
            radius,
            permeability,
        })
    }

    /// Area of the disk, `r² |B|`.
    pub fn area(&self) -> f64 {
        self.radius * self.radius * REFERENCE_AREA
    }
}

/// Background permeability and the inclusions embedded in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScene")]
pub struct Scene {
    pub background_permeability: f64,
    pub inclusions: Vec<Inhomogeneity>,
}

#[derive(Deserialize)]
struct RawScene {
    background_permeability: f64,
    inclusions: Vec<Inhomogeneity>,
}

impl TryFrom<RawScene> for Scene {
    type Error = DsmError;
    fn try_from(raw: RawScene) -> Result<Self> {
        Scene::new(raw.background_permeability, raw.inclusions)
    }
}

impl Scene {
    pub fn new(background_permeability: f64, inclusions: Vec<Inhomogeneity>) -> Result<Self> {
        if !(background_permeability > 0.0 && background_permeability.is_finite()) {
            return Err(DsmError::invalid(format!(
                "background permeability must be positive, got {background_permeability}"
            )));
        }
        if inclusions.is_empty() {
            return Err(DsmError::invalid("scene must contain at least one inclusion"));
        }
        Ok(Scene {
            background_permeability,
            inclusions,
        })
    }

    pub fn len(&self) -> usize {
        self.inclusions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inclusions.is_empty()
    }

    /// Same scene with every radius multiplied by `factor`.
    pub fn scaled_radii(&self, factor: f64) -> Result<Scene> {
        let inclusions = self
            .inclusions
            .iter()
            .map(|inc| Inhomogeneity::new(inc.center, inc.radius * factor, inc.permeability))
            .collect::<Result<Vec<_>>>()?;
        Scene::new(self.background_permeability, inclusions)
    }
}

/// `k = 2π/λ`.
pub fn wavenumber_from_wavelength(wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(DsmError::invalid(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    Ok(TAU / wavelength)
}

/// `λ = 2π/k`.
pub fn wavelength_from_wavenumber(wavenumber: f64) -> Result<f64> {
    if !(wavenumber > 0.0 && wavenumber.is_finite()) {
        return Err(DsmError::invalid(format!(
            "wavenumber must be positive, got {wavenumber}"
        )));
    }
    Ok(TAU / wavenumber)
}

/// Plane-wave illumination `exp(i k d·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveContext {
    pub wavelength: f64,
    pub wavenumber: f64,
    pub incident_direction: Point2,
}

impl WaveContext {
    /// `direction` must already be a unit vector.
    pub fn new(wavelength: f64, direction: Point2) -> Result<Self> {
        let wavenumber = wavenumber_from_wavelength(wavelength)?;
        if !direction.is_finite() || (direction.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(DsmError::invalid(format!(
                "incident direction {direction} is not a unit vector"
            )));
        }
        Ok(WaveContext {
            wavelength,
            wavenumber,
            incident_direction: direction,
        })
    }

    pub fn from_degrees(wavelength: f64, incident_degrees: f64) -> Result<Self> {
        if !incident_degrees.is_finite() {
            return Err(DsmError::invalid("incident direction angle is not finite"));
        }
        WaveContext::new(wavelength, Point2::from_angle(incident_degrees.to_radians()))
    }

    /// Builds the context from a wavenumber instead of a wavelength.
    pub fn from_wavenumber(wavenumber: f64, direction: Point2) -> Result<Self> {
        let wavelength = wavelength_from_wavenumber(wavenumber)?;
        let mut wave = WaveContext::new(wavelength, direction)?;
        wave.wavenumber = wavenumber;
        Ok(wave)
    }
}

/// `N` observation directions `θ_n = (cos 2πn/N, sin 2πn/N)`, `n = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    directions: Vec<Point2>,
}

impl ObservationSet {
    pub fn uniform(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(DsmError::invalid("number of observation directions must be at least 1"));
        }
        let directions = (1..=count).map(|n| Self::direction_for(n, count)).collect();
        Ok(ObservationSet { directions })
    }

    fn direction_for(n: usize, count: usize) -> Point2 {
        // n = N is the angle 2π; use 0 so the last direction is exactly (1, 0).
        let n = n % count;
        Point2::from_angle(TAU * n as f64 / count as f64)
    }

    /// Accepts externally supplied directions if they match the uniform layout
    /// within `tolerance`; the canonical directions are kept.
    pub fn from_directions(directions: &[Point2], tolerance: f64) -> Result<Self> {
        let set = ObservationSet::uniform(directions.len())?;
        for (n, (given, expected)) in directions.iter().zip(&set.directions).enumerate() {
            if given.distance(*expected) > tolerance {
                return Err(DsmError::invalid(format!(
                    "observation direction {} is {given}, expected {expected}",
                    n + 1
                )));
            }
        }
        Ok(set)
    }

    pub fn count(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Point2] {
        &self.directions
    }

    /// Direction `θ_n` for any integer `n`, wrapping modulo `N`.
    pub fn direction(&self, n: i64) -> Point2 {
        let count = self.directions.len() as i64;
        let idx = (n - 1).rem_euclid(count) as usize;
        self.directions[idx]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    /// True when nothing at all was flagged.
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }
}

/// Checks the standing small-and-separated assumptions.
///
/// Pairs closer than `threshold / k` and radii above `λ/2` produce warnings;
/// coincident centers are an error. Imaging may proceed on warnings.
pub fn validate_scene(scene: &Scene, wave: &WaveContext, threshold: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let k = wave.wavenumber;
    for (i, a) in scene.inclusions.iter().enumerate() {
        for (j, b) in scene.inclusions.iter().enumerate().skip(i + 1) {
            let dist = a.center.distance(b.center);
            if dist == 0.0 {
                report.issues.push(ValidationIssue {
                    severity: Severity::Error,
                    message: format!("inclusions {} and {} share the center {}", i + 1, j + 1, a.center),
                });
            } else if k * dist < threshold {
                report.issues.push(ValidationIssue {
                    severity: Severity::Warning,
                    message: format!(
                        "inclusions {} and {} are not well separated: k*dist = {:.4} < {threshold}",
                        i + 1,
                        j + 1,
                        k * dist
                    ),
                });
            }
        }
    }
    for (i, inc) in scene.inclusions.iter().enumerate() {
        if inc.radius > wave.wavelength / 2.0 {
            report.issues.push(ValidationIssue {
                severity: Severity::Warning,
                message: format!(
                    "inclusion {} radius {} exceeds half a wavelength ({})",
                    i + 1,
                    inc.radius,
                    wave.wavelength / 2.0
                ),
            });
        }
    }
    report
}

/// JSON experiment description: scene plus illumination and sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub background_permeability: f64,
    pub inclusions: Vec<Inhomogeneity>,
    pub wavelength: f64,
    pub incident_direction_degrees: f64,
    #[serde(default = "default_num_directions")]
    pub num_observation_directions: usize,
}

pub const DEFAULT_NUM_DIRECTIONS: usize = 256;

fn default_num_directions() -> usize {
    DEFAULT_NUM_DIRECTIONS
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| DsmError::io(path, e))?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| DsmError::format(path, e.to_string()))?;
        // Surface domain errors early, with the file attached.
        config.scene().map_err(|e| DsmError::format(path, e.to_string()))?;
        config.wave().map_err(|e| DsmError::format(path, e.to_string()))?;
        config
            .observations()
            .map_err(|e| DsmError::format(path, e.to_string()))?;
        Ok(config)
    }

    pub fn scene(&self) -> Result<Scene> {
        Scene::new(self.background_permeability, self.inclusions.clone())
    }

    pub fn wave(&self) -> Result<WaveContext> {
        WaveContext::from_degrees(self.wavelength, self.incident_direction_degrees)
    }

    pub fn observations(&self) -> Result<ObservationSet> {
        ObservationSet::uniform(self.num_observation_directions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example2_scene() -> Scene {
        let centers = [(0.7, 0.5), (-0.7, 0.0), (0.2, -0.5)];
        let inclusions = centers
            .iter()
            .map(|&(x, y)| Inhomogeneity::new(Point2::new(x, y), 0.1, 5.0).unwrap())
            .collect();
        Scene::new(1.0, inclusions).unwrap()
    }

    #[test]
    fn four_directions_are_the_quarter_turns() {
        let obs = ObservationSet::uniform(4).unwrap();
        let expected = [(0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)];
        for (d, (x, y)) in obs.directions().iter().zip(expected) {
            assert!((d.x - x).abs() < 1e-15 && (d.y - y).abs() < 1e-15, "{d}");
        }
        assert_eq!(obs.directions()[3], Point2::new(1.0, 0.0));
    }

    #[test]
    fn single_direction_is_east() {
        let obs = ObservationSet::uniform(1).unwrap();
        assert_eq!(obs.directions(), &[Point2::new(1.0, 0.0)]);
    }

    #[test]
    fn zero_directions_rejected() {
        assert!(ObservationSet::uniform(0).is_err());
    }

    #[test]
    fn three_sixty_directions_are_evenly_spaced_unit_vectors() {
        let obs = ObservationSet::uniform(360).unwrap();
        let gap = TAU / 360.0;
        for n in 1..=360_i64 {
            let a = obs.direction(n);
            let b = obs.direction(n + 1);
            assert!((a.norm() - 1.0).abs() < 1e-12);
            let angle = (a.x * b.y - a.y * b.x).atan2(a.dot(b));
            assert!((angle - gap).abs() < 1e-12, "n={n} angle={angle}");
        }
    }

    #[test]
    fn direction_indexing_wraps() {
        let obs = ObservationSet::uniform(7).unwrap();
        for n in -10..20 {
            assert_eq!(obs.direction(n), obs.direction(n + 7));
        }
    }

    #[test]
    fn wavenumber_examples() {
        let k = wavenumber_from_wavelength(0.4).unwrap();
        assert!((k - 15.707_963_267_948_966).abs() < 1e-12);
        assert!((k - 5.0 * PI).abs() < 1e-14);
        assert!((wavenumber_from_wavelength(TAU).unwrap() - 1.0).abs() < 1e-15);
        assert!((wavenumber_from_wavelength(1.0).unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!(wavenumber_from_wavelength(0.0).is_err());
        assert!(wavenumber_from_wavelength(-1.0).is_err());
        assert!(wavenumber_from_wavelength(f64::NAN).is_err());
    }

    #[test]
    fn inclusion_rejects_bad_parameters() {
        assert!(Inhomogeneity::new(Point2::ORIGIN, 0.0, 2.0).is_err());
        assert!(Inhomogeneity::new(Point2::ORIGIN, 0.1, 0.0).is_err());
        assert!(Inhomogeneity::new(Point2::ORIGIN, -0.1, 2.0).is_err());
        assert!(Inhomogeneity::new(Point2::new(f64::NAN, 0.0), 0.1, 2.0).is_err());
        assert!(Scene::new(1.0, vec![]).is_err());
        assert!(Scene::new(0.0, vec![Inhomogeneity::new(Point2::ORIGIN, 0.1, 2.0).unwrap()]).is_err());
    }

    #[test]
    fn wave_requires_unit_direction() {
        assert!(WaveContext::new(0.4, Point2::new(1.0, 1.0)).is_err());
        let w = WaveContext::from_degrees(0.4, 45.0).unwrap();
        assert!((w.incident_direction.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn example2_scene_is_well_separated() {
        let scene = example2_scene();
        let wave = WaveContext::from_degrees(0.4, 45.0).unwrap();
        // brute force minimum pairwise distance
        let mut min_dist = f64::INFINITY;
        for a in &scene.inclusions {
            for b in &scene.inclusions {
                if a != b {
                    min_dist = min_dist.min(a.center.distance(b.center));
                }
            }
        }
        assert!((min_dist - 1.06_f64.sqrt()).abs() < 1e-12);
        assert!(wave.wavenumber * min_dist > 16.0);
        let report = validate_scene(&scene, &wave, DEFAULT_SEPARATION_THRESHOLD);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn coincident_centers_are_an_error() {
        let inc = Inhomogeneity::new(Point2::new(0.1, 0.2), 0.1, 5.0).unwrap();
        let scene = Scene::new(1.0, vec![inc, inc]).unwrap();
        let wave = WaveContext::from_degrees(0.4, 0.0).unwrap();
        let report = validate_scene(&scene, &wave, DEFAULT_SEPARATION_THRESHOLD);
        assert!(report.has_errors());
    }

    #[test]
    fn single_inclusion_passes_separation() {
        let inc = Inhomogeneity::new(Point2::new(0.1, 0.2), 0.1, 5.0).unwrap();
        let scene = Scene::new(1.0, vec![inc]).unwrap();
        let wave = WaveContext::from_degrees(0.4, 0.0).unwrap();
        assert!(validate_scene(&scene, &wave, DEFAULT_SEPARATION_THRESHOLD).passed());
    }

    #[test]
    fn close_pair_and_large_radius_warn() {
        let a = Inhomogeneity::new(Point2::new(0.0, 0.0), 0.3, 5.0).unwrap();
        let b = Inhomogeneity::new(Point2::new(0.05, 0.0), 0.1, 5.0).unwrap();
        let scene = Scene::new(1.0, vec![a, b]).unwrap();
        let wave = WaveContext::from_degrees(0.4, 0.0).unwrap();
        let report = validate_scene(&scene, &wave, DEFAULT_SEPARATION_THRESHOLD);
        assert!(!report.has_errors());
        assert_eq!(report.warnings().count(), 2);
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{
            "background_permeability": 1.0,
            "inclusions": [{"center": [0.7, 0.5], "radius": 0.1, "permeability": 5.0}],
            "wavelength": 0.4,
            "incident_direction_degrees": 45.0
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.num_observation_directions, DEFAULT_NUM_DIRECTIONS);
        assert_eq!(cfg.inclusions[0].center, Point2::new(0.7, 0.5));
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_json_rejects_negative_radius() {
        let text = r#"{
            "background_permeability": 1.0,
            "inclusions": [{"center": [0.7, 0.5], "radius": -0.1, "permeability": 5.0}],
            "wavelength": 0.4,
            "incident_direction_degrees": 45.0
        }"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn directions_sum_to_zero(n in 2usize..2000) {
                let obs = ObservationSet::uniform(n).unwrap();
                let s = obs.directions().iter().fold(Point2::ORIGIN, |acc, d| acc + *d);
                prop_assert!(s.norm() < 1e-10);
            }

            #[test]
            fn wavelength_wavenumber_inverse(k in 1e-3f64..1e3) {
                let lambda = wavelength_from_wavenumber(k).unwrap();
                let back = wavenumber_from_wavelength(lambda).unwrap();
                prop_assert!(((back - k) / k).abs() < 1e-14);
            }
        }
    }
}
