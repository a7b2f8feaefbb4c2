//! Search grids, indicator maps, peak extraction and map export.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DsmError, Result};
use crate::forward::FarFieldData;
use crate::indicator::{analytic_psi, DsmIndicator};
use crate::model::{Point2, Scene, WaveContext};

/// Rectangular grid of search points with spacing `step` on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
}

impl SearchGrid {
    /// `[-1, 1]²` at spacing 0.005 (401 × 401 nodes).
    pub const DEFAULT: SearchGrid = SearchGrid {
        x_min: -1.0,
        x_max: 1.0,
        y_min: -1.0,
        y_max: 1.0,
        step: 0.005,
    };

    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, step: f64) -> Result<Self> {
        let grid = SearchGrid {
            x_min,
            x_max,
            y_min,
            y_max,
            step,
        };
        if ![x_min, x_max, y_min, y_max, step].iter().all(|v| v.is_finite()) {
            return Err(DsmError::invalid("grid bounds must be finite"));
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(DsmError::invalid(format!("grid bounds are empty: {grid}")));
        }
        if step <= 0.0 {
            return Err(DsmError::invalid(format!("grid step must be positive, got {step}")));
        }
        if grid.nx() < 2 || grid.ny() < 2 {
            return Err(DsmError::invalid(format!(
                "grid {grid} has fewer than 2 nodes per axis"
            )));
        }
        Ok(grid)
    }

    fn count(span: f64, step: f64) -> usize {
        (span / step + 1e-9).floor() as usize + 1
    }

    pub fn nx(&self) -> usize {
        Self::count(self.x_max - self.x_min, self.step)
    }

    pub fn ny(&self) -> usize {
        Self::count(self.y_max - self.y_min, self.step)
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node at `row` (y index, from `y_min`) and `col` (x index, from `x_min`).
    pub fn node(&self, row: usize, col: usize) -> Point2 {
        Point2::new(self.x_min + col as f64 * self.step, self.y_min + row as f64 * self.step)
    }

    /// All nodes in row-major order.
    pub fn points(&self) -> Vec<Point2> {
        let nx = self.nx();
        (0..self.len()).map(|i| self.node(i / nx, i % nx)).collect()
    }

    /// Row and column of the node nearest to `p`, clamped to the grid.
    pub fn nearest_node(&self, p: Point2) -> (usize, usize) {
        let idx = |v: f64, lo: f64, n: usize| (((v - lo) / self.step).round().max(0.0) as usize).min(n - 1);
        (idx(p.y, self.y_min, self.ny()), idx(p.x, self.x_min, self.nx()))
    }
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid::DEFAULT
    }
}

impl fmt::Display for SearchGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.x_min, self.x_max, self.y_min, self.y_max, self.step
        )
    }
}

/// Parses `x_min,x_max,y_min,y_max,step`.
impl FromStr for SearchGrid {
    type Err = DsmError;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| DsmError::invalid(format!("bad grid component {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        match parts[..] {
            [x0, x1, y0, y1, step] => SearchGrid::new(x0, x1, y0, y1, step),
            _ => Err(DsmError::invalid(format!(
                "grid must be x_min,x_max,y_min,y_max,step; got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    GridMax,
    Raw,
}

/// Indicator values on a grid, row-major with row 0 at `y_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMap {
    pub grid: SearchGrid,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

impl IndicatorMap {
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.nx() + col]
    }

    /// Value at the node nearest to `p`.
    pub fn value_near(&self, p: Point2) -> f64 {
        let (row, col) = self.grid.nearest_node(p);
        self.value(row, col)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Position and value of the largest node (first in row-major order on ties).
    pub fn argmax(&self) -> (Point2, f64) {
        let nx = self.grid.nx();
        let (i, v) =
            self.values.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| if v > best.1 { (i, v) } else { best },
            );
        (self.grid.node(i / nx, i % nx), v)
    }

    /// Divides by the grid maximum.
    pub fn normalized(&self) -> Result<IndicatorMap> {
        let max = self.max();
        if !(max > 0.0 && max.is_finite()) {
            return Err(DsmError::degenerate("indicator map is identically zero"));
        }
        Ok(IndicatorMap {
            grid: self.grid,
            values: self.values.iter().map(|v| v / max).collect(),
            normalization: Normalization::GridMax,
        })
    }
}

/// What an indicator map is computed from.
#[derive(Debug, Clone, Copy)]
pub enum MapSource<'a> {
    /// Data-based indicator from far-field samples.
    Data { data: &'a FarFieldData, wavenumber: f64 },
    /// Closed-form `|Ψ|` from a known scene.
    Analytic { scene: &'a Scene, wave: &'a WaveContext },
}

/// Unnormalized map. Nodes are evaluated in parallel on the current rayon
/// pool; each node is independent, so the result does not depend on the
/// number of threads.
///
/// Far-field data are first reduced to their canonical representative (see
/// [`FarFieldData::canonical_representative`]).
pub fn compute_raw_map(source: MapSource<'_>, grid: &SearchGrid) -> Result<IndicatorMap> {
    let points = grid.points();
    let values = match source {
        MapSource::Data { data, wavenumber } => {
            let canonical = data.canonical_representative()?;
            let indicator = DsmIndicator::new(&canonical, wavenumber)?;
            points.par_iter().map(|&p| indicator.evaluate(p)).collect()
        }
        MapSource::Analytic { scene, wave } => points.par_iter().map(|&p| analytic_psi(scene, wave, p)).collect(),
    };
    Ok(IndicatorMap {
        grid: *grid,
        values,
        normalization: Normalization::Raw,
    })
}

/// Grid-max normalized map.
pub fn compute_map(source: MapSource<'_>, grid: &SearchGrid) -> Result<IndicatorMap> {
    compute_raw_map(source, grid)?.normalized()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub position: Point2,
    pub value: f64,
    #[serde(skip)]
    pub row: usize,
    #[serde(skip)]
    pub col: usize,
}

/// Local maxima of `map`, strongest first.
///
/// A node qualifies when it is interior, at least `min_value`, larger than
/// every 8-neighbour or tied with neighbours that come later in `(row, col)`
/// order, and strictly larger than at least one neighbour. The tie rule keeps
/// one node of an exactly symmetric pair (common at the two peaks of a
/// single inclusion) and rejects constant regions. Candidates are then kept
/// greedily by descending value, ties by `(row, col)`, skipping any closer
/// than `min_separation` to one already kept.
pub fn extract_peaks(map: &IndicatorMap, min_value: f64, min_separation: f64) -> Vec<Peak> {
    let nx = map.grid.nx();
    let ny = map.grid.ny();
    let mut candidates = Vec::new();
    for row in 1..ny.saturating_sub(1) {
        for col in 1..nx - 1 {
            let v = map.value(row, col);
            if v.is_nan() || v < min_value {
                continue;
            }
            let mut is_peak = true;
            let mut strictly_above_one = false;
            'nb: for dr in [-1isize, 0, 1] {
                for dc in [-1isize, 0, 1] {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let r = (row as isize + dr) as usize;
                    let c = (col as isize + dc) as usize;
                    let w = map.value(r, c);
                    let later = (r, c) > (row, col);
                    if w < v {
                        strictly_above_one = true;
                    } else if !(w == v && later) {
                        is_peak = false;
                        break 'nb;
                    }
                }
            }
            if is_peak && strictly_above_one {
                candidates.push(Peak {
                    position: map.grid.node(row, col),
                    value: v,
                    row,
                    col,
                });
            }
        }
    }
    candidates.sort_by(|a, b| b.value.total_cmp(&a.value).then((a.row, a.col).cmp(&(b.row, b.col))));

    let mut kept: Vec<Peak> = Vec::new();
    for p in candidates {
        if kept.iter().all(|q| q.position.distance(p.position) >= min_separation) {
            kept.push(p);
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Csv,
    Pgm,
}

/// `x,y,value` rows in storage order, 17 significant digits.
pub fn map_csv_bytes(map: &IndicatorMap) -> Vec<u8> {
    let nx = map.grid.nx();
    let mut out = String::with_capacity(map.values.len() * 72);
    out.push_str("x,y,value\n");
    for (i, v) in map.values.iter().enumerate() {
        let p = map.grid.node(i / nx, i % nx);
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.x, p.y, v));
    }
    out.into_bytes()
}

/// Binary 16-bit PGM, top row at `y_max`, samples `round(65535 v)` big-endian.
pub fn map_pgm_bytes(map: &IndicatorMap) -> Vec<u8> {
    let nx = map.grid.nx();
    let ny = map.grid.ny();
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    out.reserve(2 * nx * ny);
    for row in (0..ny).rev() {
        for col in 0..nx {
            let q = (65535.0 * map.value(row, col)).round().clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    out
}

pub fn export_map(map: &IndicatorMap, path: &Path, format: MapFormat) -> Result<()> {
    let bytes = match format {
        MapFormat::Csv => map_csv_bytes(map),
        MapFormat::Pgm => map_pgm_bytes(map),
    };
    std::fs::write(path, bytes).map_err(|e| DsmError::io(path, e))
}

/// Reads a CSV written by [`export_map`] back onto `grid`.
pub fn read_map_csv(path: &Path, grid: &SearchGrid, normalization: Normalization) -> Result<IndicatorMap> {
    #[derive(Deserialize)]
    struct Row {
        #[allow(dead_code)]
        x: f64,
        #[allow(dead_code)]
        y: f64,
        value: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| DsmError::format(path, e.to_string()))?;
    let values = reader
        .deserialize::<Row>()
        .map(|r| r.map(|r| r.value).map_err(|e| DsmError::format(path, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != grid.len() {
        return Err(DsmError::format(
            path,
            format!("{} rows, grid has {} nodes", values.len(), grid.len()),
        ));
    }
    Ok(IndicatorMap {
        grid: *grid,
        values,
        normalization,
    })
}
