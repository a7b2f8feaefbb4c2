//! The three reference scenes: one, three equal, and three unequal
//! permeability inclusions of radius 0.1 at wavelength 0.4, lit from 45°.

use clap::ValueEnum;
use serde::Serialize;

use crate::model::{ExperimentConfig, Inhomogeneity, Point2, DEFAULT_NUM_DIRECTIONS};

pub const CENTERS: [Point2; 3] = [Point2::new(0.7, 0.5), Point2::new(-0.7, 0.0), Point2::new(0.2, -0.5)];
pub const RADIUS: f64 = 0.1;
pub const WAVELENGTH: f64 = 0.4;
pub const INCIDENT_DEGREES: f64 = 45.0;
pub const BACKGROUND_PERMEABILITY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PaperExample {
    /// Single inclusion at (0.7, 0.5), μ = 5.
    Ex1,
    /// Three inclusions, μ = 5 each.
    Ex2,
    /// Three inclusions, μ = 10, 6, 2.
    Ex3,
}

impl PaperExample {
    pub const ALL: [PaperExample; 3] = [PaperExample::Ex1, PaperExample::Ex2, PaperExample::Ex3];

    pub fn name(self) -> &'static str {
        match self {
            PaperExample::Ex1 => "ex1",
            PaperExample::Ex2 => "ex2",
            PaperExample::Ex3 => "ex3",
        }
    }

    pub fn permeabilities(self) -> &'static [f64] {
        match self {
            PaperExample::Ex1 => &[5.0],
            PaperExample::Ex2 => &[5.0, 5.0, 5.0],
            PaperExample::Ex3 => &[10.0, 6.0, 2.0],
        }
    }

    pub fn config(self) -> ExperimentConfig {
        let inclusions = CENTERS
            .iter()
            .zip(self.permeabilities())
            .map(|(&c, &mu)| Inhomogeneity::new(c, RADIUS, mu).expect("preset inclusion is valid"))
            .collect();
        ExperimentConfig {
            background_permeability: BACKGROUND_PERMEABILITY,
            inclusions,
            wavelength: WAVELENGTH,
            incident_direction_degrees: INCIDENT_DEGREES,
            num_observation_directions: DEFAULT_NUM_DIRECTIONS,
        }
    }
}
