use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BackendChoice, Experiment, LabError, Result};
use crate::noise::{ErrorKind, NoiseModel};

pub const TARGET_S: f64 = 3.0;
/// Refinement stops once `|S − TARGET_S|` falls below this.
pub const S_TOLERANCE: f64 = 0.05;
pub const MAX_REFINEMENTS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub algorithm: String,
    pub n: usize,
    pub error_type: String,
    /// Every `(parameter, S)` evaluated, sorted by parameter.
    pub samples: Vec<(f64, f64)>,
    pub threshold: f64,
    pub target_s: f64,
    pub shots: u64,
    pub seed: u64,
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 4 {
        return Err(LabError::Invalid(format!("grid needs at least 4 points, got {}", grid.len())));
    }
    if grid.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Err(LabError::Invalid("grid values must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Invalid("grid must be strictly increasing".into()));
    }
    if (grid[grid.len() - 1] / grid[0]).log10() < 1.0 - 1e-9 {
        return Err(LabError::Invalid("grid must span at least one decade".into()));
    }
    Ok(())
}

/// Locates the parameter where `eval` crosses [`TARGET_S`].
///
/// The grid is evaluated first; the first adjacent pair on opposite sides of
/// the target brackets the crossing, which is then refined by linear
/// interpolation of S in `log10(parameter)` (regula falsi with the Illinois
/// correction). Returns the threshold and all samples.
pub fn locate_crossing<F>(eval: F, grid: &[f64]) -> Result<(f64, Vec<(f64, f64)>)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    validate_grid(grid)?;
    let values = grid.par_iter().map(|&p| eval(p)).collect::<Result<Vec<f64>>>()?;
    let mut samples: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    let f = |s: f64| s - TARGET_S;
    if let Some(&(p, _)) = samples.iter().find(|(_, s)| *s == TARGET_S) {
        return Ok((p, samples));
    }
    let Some(i) = (0..grid.len() - 1).find(|&i| f(values[i]).signum() != f(values[i + 1]).signum()) else {
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let msg = if values.iter().all(|s| *s > TARGET_S) {
            format!("S stays above {TARGET_S} up to the upper grid edge {hi:e} (S = {:.3})", values[values.len() - 1])
        } else {
            format!("S is already below {TARGET_S} at the lower grid edge {lo:e} (S = {:.3})", values[0])
        };
        return Err(LabError::Unbracketed(msg));
    };
    let (mut xa, mut fa) = (grid[i].log10(), f(values[i]));
    let (mut xb, mut fb) = (grid[i + 1].log10(), f(values[i + 1]));
    let interpolate = |xa: f64, fa: f64, xb: f64, fb: f64| {
        if fa.is_finite() && fb.is_finite() && fa != fb {
            xa + fa * (xb - xa) / (fa - fb)
        } else {
            0.5 * (xa + xb)
        }
    };
    let mut x = interpolate(xa, fa, xb, fb);
    let mut last_side = 0i8;
    for _ in 0..MAX_REFINEMENTS {
        let s = eval(10f64.powf(x))?;
        samples.push((10f64.powf(x), s));
        let fx = f(s);
        if fx.abs() <= S_TOLERANCE {
            break;
        }
        if fx.signum() == fa.signum() {
            xa = x;
            fa = fx;
            if last_side == -1 {
                fb *= 0.5;
            }
            last_side = -1;
        } else {
            xb = x;
            fb = fx;
            if last_side == 1 {
                fa *= 0.5;
            }
            last_side = 1;
        }
        x = interpolate(xa, fa, xb, fb);
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((10f64.powf(x), samples))
}

/// Threshold of a custom noise family: `make_model(p)` builds the model at
/// strength `p`.
#[allow(clippy::too_many_arguments)]
pub fn find_threshold_with<M>(
    experiment: &Experiment,
    error_type: &str,
    make_model: M,
    grid: &[f64],
    shots: u64,
    backend: BackendChoice,
    seed: u64,
) -> Result<ThresholdResult>
where
    M: Fn(f64) -> NoiseModel + Sync,
{
    let backend = experiment.resolve_backend(backend);
    let eval = |p: f64| experiment.selectivity(&make_model(p), shots, backend, seed);
    let (threshold, samples) = locate_crossing(eval, grid)?;
    Ok(ThresholdResult {
        algorithm: experiment.label.clone(),
        n: experiment.config.n_qubits,
        error_type: error_type.to_string(),
        samples,
        threshold,
        target_s: TARGET_S,
        shots: if backend == BackendChoice::Density { 0 } else { shots },
        seed,
    })
}

/// Threshold of a gate-error family applied uniformly to every one- and
/// two-qubit gate.
pub fn find_error_threshold(
    experiment: &Experiment,
    kind: ErrorKind,
    grid: &[f64],
    shots: u64,
    backend: BackendChoice,
    seed: u64,
) -> Result<ThresholdResult> {
    if kind == ErrorKind::Thermal {
        return Err(LabError::Invalid("thermal noise is scanned with relaxation_scan".into()));
    }
    let make = |p: f64| NoiseModel::uniform(kind, p).expect("gate-error family");
    find_threshold_with(experiment, kind.name(), make, grid, shots, backend, seed)
}
