use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BackendChoice, Experiment, LabError, Result};
use crate::noise::NoiseModel;

/// Selectivity band counted as "at threshold" in relaxation scans.
pub const RELAX_BAND: (f64, f64) = (2.5, 3.5);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxPoint {
    pub t1_us: f64,
    pub t2_us: f64,
    pub s: f64,
}

impl RelaxPoint {
    pub fn qualifies(&self) -> bool {
        (RELAX_BAND.0..=RELAX_BAND.1).contains(&self.s)
    }
}

/// Result of a scan: every evaluated pair plus the qualifying subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationScan {
    pub algorithm: String,
    pub n: usize,
    pub evaluated: Vec<RelaxPoint>,
}

impl RelaxationScan {
    pub fn qualifying(&self) -> Vec<RelaxPoint> {
        self.evaluated.iter().copied().filter(RelaxPoint::qualifies).collect()
    }

    /// Arithmetic means of T1 and T2 over qualifying points.
    pub fn qualifying_means(&self) -> Option<(f64, f64)> {
        let q = self.qualifying();
        if q.is_empty() {
            return None;
        }
        let k = q.len() as f64;
        Some((q.iter().map(|p| p.t1_us).sum::<f64>() / k, q.iter().map(|p| p.t2_us).sum::<f64>() / k))
    }
}

/// `per_decade` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && per_decade > 0) {
        return Err(LabError::Invalid(format!("bad log grid {lo}..{hi} ({per_decade}/decade)")));
    }
    let steps = ((hi / lo).log10() * per_decade as f64).round() as usize;
    Ok((0..=steps)
        .map(|i| if i == steps { hi } else { lo * 10f64.powf(i as f64 / per_decade as f64) })
        .collect())
}

fn check_grids(t1_grid: &[f64], t2_grid: &[f64]) -> Result<()> {
    let ok = |g: &[f64]| !g.is_empty() && g.iter().all(|t| *t > 0.0) && g.windows(2).all(|w| w[0] < w[1]);
    if !ok(t1_grid) || !ok(t2_grid) {
        return Err(LabError::Invalid("relaxation grids must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn scan_eval(experiment: &Experiment, t1: f64, t2: f64, shots: u64, backend: BackendChoice, seed: u64) -> Result<f64> {
    experiment.selectivity(&NoiseModel::thermal(t1, t2), shots, backend, seed)
}

/// Evaluates thermal-only noise at every `(T1, T2)` pair with `T2 ≤ 2·T1`.
pub fn relaxation_scan(
    experiment: &Experiment,
    t1_grid: &[f64],
    t2_grid: &[f64],
    shots: u64,
    backend: BackendChoice,
    seed: u64,
) -> Result<RelaxationScan> {
    check_grids(t1_grid, t2_grid)?;
    let backend = experiment.resolve_backend(backend);
    let pairs: Vec<(f64, f64)> = t1_grid
        .iter()
        .flat_map(|&t1| t2_grid.iter().filter(move |&&t2| t2 <= 2.0 * t1).map(move |&t2| (t1, t2)))
        .collect();
    let evaluated = pairs
        .par_iter()
        .map(|&(t1, t2)| scan_eval(experiment, t1, t2, shots, backend, seed).map(|s| RelaxPoint { t1_us: t1, t2_us: t2, s }))
        .collect::<Result<Vec<_>>>()?;
    Ok(RelaxationScan {
        algorithm: experiment.label.clone(),
        n: experiment.config.n_qubits,
        evaluated,
    })
}

/// Same qualifying set as [`relaxation_scan`] when S is non-decreasing in
/// both T1 and T2, found by binary-searching the band edges in each T1 row
/// and narrowing each search with the previous row's edges.
pub fn relaxation_scan_pruned(
    experiment: &Experiment,
    t1_grid: &[f64],
    t2_grid: &[f64],
    shots: u64,
    backend: BackendChoice,
    seed: u64,
) -> Result<RelaxationScan> {
    check_grids(t1_grid, t2_grid)?;
    let backend = experiment.resolve_backend(backend);
    let mut memo: HashMap<(usize, usize), f64> = HashMap::new();
    let mut eval = |i: usize, j: usize| -> Result<f64> {
        if let Some(&s) = memo.get(&(i, j)) {
            return Ok(s);
        }
        let s = scan_eval(experiment, t1_grid[i], t2_grid[j], shots, backend, seed)?;
        memo.insert((i, j), s);
        Ok(s)
    };
    // First index in [lo, hi) whose value satisfies `pred`, assuming `pred`
    // is monotone false→true; `hi` when none does.
    fn search<F: FnMut(usize) -> Result<bool>>(mut lo: usize, mut hi: usize, mut pred: F) -> Result<usize> {
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if pred(mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }
    let (band_lo, band_hi) = RELAX_BAND;
    let mut prev: Option<(usize, usize, usize)> = None;
    for i in 0..t1_grid.len() {
        let width = t2_grid.iter().take_while(|&&t2| t2 <= 2.0 * t1_grid[i]).count();
        if width == 0 {
            continue;
        }
        let (mut lo_cap, mut hi_cap) = (width, width);
        if let Some((plo, phi, pwidth)) = prev {
            if plo < pwidth {
                lo_cap = plo.min(width);
            }
            if phi < pwidth {
                hi_cap = phi.min(width);
            }
        }
        let lo = search(0, lo_cap, |j| Ok(eval(i, j)? >= band_lo))?;
        let hi = search(lo, hi_cap.max(lo), |j| Ok(eval(i, j)? > band_hi))?;
        for j in lo..hi {
            eval(i, j)?;
        }
        prev = Some((lo, hi, width));
    }
    let mut evaluated: Vec<RelaxPoint> = memo
        .into_iter()
        .map(|((i, j), s)| RelaxPoint {
            t1_us: t1_grid[i],
            t2_us: t2_grid[j],
            s,
        })
        .collect();
    evaluated.sort_by(|a, b| a.t1_us.total_cmp(&b.t1_us).then(a.t2_us.total_cmp(&b.t2_us)));
    Ok(RelaxationScan {
        algorithm: experiment.label.clone(),
        n: experiment.config.n_qubits,
        evaluated,
    })
}
