//! Decision-boundary grids over the raw (unstandardized) input plane of a 2-D model.

use std::path::Path;
use std::str::FromStr;

use sequent_core::models::argmax;
use sequent_core::Model;

use crate::error::{Error, Result};
use crate::io::{csv_error, csv_writer};
use crate::snapshot::Snapshot;

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let ok = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite())
            && x_min < x_max
            && y_min < y_max;
        if !ok {
            return Err(Error::Config(format!(
                "grid bounds need finite x_min < x_max and y_min < y_max, got {x_min},{x_max},{y_min},{y_max}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }
}

impl FromStr for Bounds {
    type Err = Error;

    /// `x_min,x_max,y_min,y_max`.
    fn from_str(s: &str) -> Result<Self> {
        let values: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("bounds {s:?} are not four numbers")))?;
        match values[..] {
            [a, b, c, d] => Bounds::new(a, b, c, d),
            _ => Err(Error::Config(format!(
                "bounds need exactly four values x_min,x_max,y_min,y_max, got {}",
                values.len()
            ))),
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub predicted_class: usize,
    pub scores: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, count: usize, i: usize) -> f64 {
    lo + (hi - lo) * i as f64 / (count - 1) as f64
}

/// Evaluates `resolution × resolution` points, rows ordered by y then x.
pub fn evaluate_grid(
    snapshot: &Snapshot,
    bounds: Bounds,
    resolution: usize,
) -> Result<Vec<GridPoint>> {
    if resolution < 2 {
        return Err(Error::Config(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    if snapshot.input_dim != 2 {
        return Err(Error::Config(format!(
            "grids need a model with 2 input features, this one has {}",
            snapshot.input_dim
        )));
    }
    let model = snapshot.restore()?;
    let mut points = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        let y = linspace(bounds.y_min, bounds.y_max, resolution, j);
        for i in 0..resolution {
            let x = linspace(bounds.x_min, bounds.x_max, resolution, i);
            let scores = model.forward(&snapshot.preprocess(&[x, y])?)?;
            points.push(GridPoint {
                x,
                y,
                predicted_class: argmax(&scores),
                scores,
            });
        }
    }
    Ok(points)
}

/// Header `x,y,predicted_class,score_0,…,score_{k-1}` followed by one row per point.
pub fn write_grid_csv(path: &Path, classes: usize, points: &[GridPoint]) -> Result<()> {
    let mut writer = csv_writer(path)?;
    let mut header = vec![
        "x".to_string(),
        "y".to_string(),
        "predicted_class".to_string(),
    ];
    header.extend((0..classes).map(|c| format!("score_{c}")));
    writer
        .write_record(&header)
        .map_err(|e| csv_error(path, e))?;
    let mut fields = Vec::with_capacity(header.len());
    for p in points {
        fields.clear();
        fields.push(p.x.to_string());
        fields.push(p.y.to_string());
        fields.push(p.predicted_class.to_string());
        fields.extend(p.scores.iter().map(f64::to_string));
        writer
            .write_record(&fields)
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_grid(
    snapshot_path: &Path,
    bounds: Bounds,
    resolution: usize,
    out: &Path,
) -> Result<usize> {
    let snapshot = Snapshot::load(snapshot_path)?;
    let points = evaluate_grid(&snapshot, bounds, resolution)?;
    write_grid_csv(out, snapshot.classes, &points)?;
    Ok(points.len())
}
