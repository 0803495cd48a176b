use serde::{Deserialize, Serialize};

use super::{optimal_iterations, GroverError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleScope {
    /// Mark the full target on all data qubits.
    Full,
    /// Mark the stage block's substring of the target on the block.
    Block,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionScope {
    /// Inversion about the mean over all data qubits.
    Global,
    /// Inversion about the mean over the listed qubits only.
    Local(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Iteration {
    pub oracle: OracleScope,
    pub diffusion: DiffusionScope,
}

impl Iteration {
    pub fn standard() -> Self {
        Self {
            oracle: OracleScope::Full,
            diffusion: DiffusionScope::Global,
        }
    }

    pub fn local(scope: Vec<usize>) -> Self {
        Self {
            oracle: OracleScope::Full,
            diffusion: DiffusionScope::Local(scope),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub block: Vec<usize>,
    pub iterations: Vec<Iteration>,
    #[serde(default)]
    pub measure_after: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSchedule {
    pub stages: Vec<Stage>,
}

impl StageSchedule {
    /// One stage over all `n` qubits.
    pub fn single(n: usize, iterations: Vec<Iteration>) -> Self {
        Self {
            stages: vec![Stage {
                block: (0..n).collect(),
                iterations,
                measure_after: false,
            }],
        }
    }

    pub fn iteration_count(&self) -> usize {
        self.stages.iter().map(|s| s.iterations.len()).sum()
    }

    /// Compact description such as `G2 L(0,1)1 | measure`.
    pub fn describe(&self) -> String {
        let stage_text = |s: &Stage| {
            let mut parts: Vec<(String, usize)> = Vec::new();
            for it in &s.iterations {
                let label = match (&it.oracle, &it.diffusion) {
                    (OracleScope::Full, DiffusionScope::Global) => "G".to_string(),
                    (o, DiffusionScope::Local(q)) => {
                        let qs: Vec<String> = q.iter().map(|x| x.to_string()).collect();
                        let prefix = if *o == OracleScope::Block { "B" } else { "L" };
                        format!("{prefix}({})", qs.join(","))
                    }
                    (OracleScope::Block, DiffusionScope::Global) => "BG".to_string(),
                };
                match parts.last_mut() {
                    Some((l, c)) if *l == label => *c += 1,
                    _ => parts.push((label, 1)),
                }
            }
            let mut text: Vec<String> = parts.into_iter().map(|(l, c)| format!("{l}^{c}")).collect();
            if s.measure_after {
                text.push("measure".into());
            }
            text.join(" ")
        };
        self.stages.iter().map(stage_text).collect::<Vec<_>>().join(" | ")
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.stages.is_empty() {
            return Err(GroverError::Config("schedule has no stages".into()));
        }
        let mut seen = vec![false; n];
        for stage in &self.stages {
            if stage.block.is_empty() {
                return Err(GroverError::Config("empty stage block".into()));
            }
            for &q in &stage.block {
                if q >= n || std::mem::replace(&mut seen[q], true) {
                    return Err(GroverError::Config(format!(
                        "stage blocks must partition qubits 0..{n}; qubit {q} is invalid or repeated"
                    )));
                }
            }
            for it in &stage.iterations {
                if let DiffusionScope::Local(scope) = &it.diffusion {
                    let mut local = vec![false; n];
                    if scope.is_empty() || scope.iter().any(|&q| q >= n || std::mem::replace(&mut local[q], true)) {
                        return Err(GroverError::Config(format!("bad local diffusion scope {scope:?}")));
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(GroverError::Config(format!("stage blocks do not cover qubits 0..{n}")));
        }
        let last = self.stages.len() - 1;
        if self.stages[..last].iter().any(|s| !s.measure_after) {
            return Err(GroverError::Config("every stage but the last must measure its block".into()));
        }
        Ok(())
    }
}

/// Noiseless target probability of full-oracle iterations, each followed by
/// a global diffusion (`false`) or a diffusion local to a block of `m`
/// qubits (`true`), on `n` qubits. Basis states fall into four classes by
/// whether their block part and remainder agree with the target, and the
/// amplitude is uniform within each class.
pub fn block_success_model(n: usize, m: usize, local: &[bool]) -> f64 {
    let nl = (1u64 << m) as f64;
    let nr = (1u64 << (n - m)) as f64;
    let total = nl * nr;
    // counts[l][r]: l = block matches target, r = remainder matches.
    let counts = [[(nl - 1.0) * (nr - 1.0), nl - 1.0], [nr - 1.0, 1.0]];
    let mut a = [[1.0 / total.sqrt(); 2]; 2];
    for &is_local in local {
        a[1][1] = -a[1][1];
        if is_local {
            for r in 0..2 {
                let mean = (a[1][r] + (nl - 1.0) * a[0][r]) / nl;
                a[1][r] = 2.0 * mean - a[1][r];
                a[0][r] = 2.0 * mean - a[0][r];
            }
        } else {
            let mean: f64 = (0..2).flat_map(|l| (0..2).map(move |r| (l, r))).map(|(l, r)| counts[l][r] * a[l][r]).sum::<f64>()
                / total;
            for row in &mut a {
                for v in row.iter_mut() {
                    *v = 2.0 * mean - *v;
                }
            }
        }
    }
    a[1][1] * a[1][1]
}

/// Depth-reduced one-stage schedule: `a` global iterations, `b ≥ 1`
/// iterations with diffusion local to qubits `0..⌈n/2⌉`, then `c` global
/// iterations, with `a + b + c` at most the standard iteration count. The
/// triple maximizing the noiseless success is chosen; ties go to the
/// shortest schedule, then the first in `(a, b, c)` order.
pub fn default_m1_schedule(n: usize) -> StageSchedule {
    let k = optimal_iterations(n);
    let m = n.div_ceil(2);
    let mut best: Option<(f64, usize, (usize, usize, usize))> = None;
    for a in 0..k {
        for b in 1..=k - a {
            for c in 0..=k - a - b {
                let pattern: Vec<bool> = std::iter::repeat_n(false, a)
                    .chain(std::iter::repeat_n(true, b))
                    .chain(std::iter::repeat_n(false, c))
                    .collect();
                let p = block_success_model(n, m, &pattern);
                let len = a + b + c;
                let better = match best {
                    None => true,
                    Some((bp, bl, _)) => p > bp + 1e-12 || ((p - bp).abs() <= 1e-12 && len < bl),
                };
                if better {
                    best = Some((p, len, (a, b, c)));
                }
            }
        }
    }
    let (_, _, (a, b, c)) = best.expect("k >= 1");
    let block: Vec<usize> = (0..m).collect();
    let mut iterations = vec![Iteration::standard(); a];
    iterations.extend(std::iter::repeat_n(Iteration::local(block), b));
    iterations.extend(std::iter::repeat_n(Iteration::standard(), c));
    StageSchedule::single(n, iterations)
}

/// Two-stage schedule: a standard search on qubits `0..⌈n/2⌉` for their part
/// of the target, measurement of that block, then a standard search on the
/// remaining (reset and re-prepared) qubits.
pub fn default_m2_schedule(n: usize) -> StageSchedule {
    let m = n.div_ceil(2);
    if m == n {
        return StageSchedule::single(n, vec![Iteration::standard(); optimal_iterations(n)]);
    }
    let stage = |block: Vec<usize>, measure_after: bool| Stage {
        iterations: vec![
            Iteration {
                oracle: OracleScope::Block,
                diffusion: DiffusionScope::Local(block.clone()),
            };
            optimal_iterations(block.len())
        ],
        block,
        measure_after,
    };
    StageSchedule {
        stages: vec![stage((0..m).collect(), true), stage((m..n).collect(), false)],
    }
}
