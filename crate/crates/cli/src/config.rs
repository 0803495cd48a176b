use std::path::Path;

use anyhow::{bail, Context, Result};
use grover_core::grover::{Algorithm, GroverConfig};
use grover_core::lab::BackendChoice;
use grover_core::noise::NoiseModel;
use serde::Deserialize;

/// Optional defaults read from `--config`. Command-line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub algo: Option<Algorithm>,
    pub qubits: Option<usize>,
    pub target: Option<String>,
    pub error: Option<String>,
    pub grid: Option<String>,
    pub t2_grid: Option<String>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub backend: Option<BackendChoice>,
    /// Full circuit configuration; replaces the `algo` preset.
    pub grover: Option<GroverConfig>,
    pub noise: Option<NoiseModel>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// `lo:hi:points`, logarithmically spaced and inclusive.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        bail!("grid '{spec}' is not lo:hi:points");
    };
    let lo: f64 = lo.trim().parse().with_context(|| format!("grid lower bound '{lo}'"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("grid upper bound '{hi}'"))?;
    let count: usize = count.trim().parse().with_context(|| format!("grid point count '{count}'"))?;
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || count < 2 {
        bail!("grid '{spec}' needs 0 < lo < hi and at least 2 points");
    }
    let step = (hi / lo).log10() / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { hi } else { lo * 10f64.powf(step * i as f64) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = parse_grid("1e-4:1e-1:4").unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[3], 1e-1);
        assert!((g[1] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn malformed_grids() {
        for bad in ["1:2", "0:1:3", "2:1:3", "1:10:1", "a:10:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_file_parses() {
        let text = r#"
            algo = "sgaa"
            qubits = 5
            backend = "density"
            [[noise.rules]]
            family = "thermal"
            t1_us = 80.0
            t2_us = 60.0
            gate_scope = ["1q", "2q", "measure", "reset"]
        "#;
        let cfg: FileConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.algo, Some(Algorithm::Sgaa));
        assert_eq!(cfg.backend, Some(BackendChoice::Density));
        assert_eq!(cfg.noise.unwrap().rules.len(), 1);
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
    }
}
