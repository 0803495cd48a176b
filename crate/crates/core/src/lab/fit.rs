use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `a·e^{b·n}`
    Exponential,
    /// `a·n^b·e^{c·n}`
    PowerExponential,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::Exponential => "exponential",
            FitModel::PowerExponential => "power_exponential",
        }
    }

    pub fn min_points(self) -> usize {
        match self {
            FitModel::Exponential => 3,
            FitModel::PowerExponential => 4,
        }
    }

    fn design_row(self, n: f64) -> Vec<f64> {
        match self {
            FitModel::Exponential => vec![1.0, n],
            FitModel::PowerExponential => vec![1.0, n.ln(), n],
        }
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitModel {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "exponential" | "exp" => Ok(FitModel::Exponential),
            "power_exponential" | "powexp" => Ok(FitModel::PowerExponential),
            other => Err(LabError::Invalid(format!("unknown fit model '{other}'"))),
        }
    }
}

/// Fitted coefficients; `r2` is measured on `ln y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub r2: f64,
}

impl FitResult {
    pub fn exponential(a: f64, b: f64) -> Self {
        Self {
            model: FitModel::Exponential,
            a,
            b,
            c: None,
            r2: 1.0,
        }
    }

    pub fn power_exponential(a: f64, b: f64, c: f64) -> Self {
        Self {
            model: FitModel::PowerExponential,
            a,
            b,
            c: Some(c),
            r2: 1.0,
        }
    }

    pub fn eval(&self, n: f64) -> f64 {
        match self.model {
            FitModel::Exponential => self.a * (self.b * n).exp(),
            FitModel::PowerExponential => self.a * n.powf(self.b) * (self.c.unwrap_or(0.0) * n).exp(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fit: FitResult = serde_json::from_str(text).map_err(|e| LabError::Invalid(e.to_string()))?;
        fit.validate()?;
        Ok(fit)
    }

    pub fn validate(&self) -> Result<()> {
        let coeffs_ok = self.a.is_finite() && self.a > 0.0 && self.b.is_finite() && self.c.is_none_or(f64::is_finite);
        let shape_ok = match self.model {
            FitModel::Exponential => self.c.is_none(),
            FitModel::PowerExponential => self.c.is_some(),
        };
        if !coeffs_ok || !shape_ok || !(0.0..=1.0).contains(&self.r2) {
            return Err(LabError::Fit(format!("invalid {} fit {self:?}", self.model)));
        }
        Ok(())
    }
}

/// Ordinary least squares on `ln y`.
pub fn fit_scaling(points: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    if points.len() < model.min_points() {
        return Err(LabError::Fit(format!(
            "{model} fit needs at least {} points, got {}",
            model.min_points(),
            points.len()
        )));
    }
    if let Some((n, y)) = points.iter().find(|(n, y)| !(*y > 0.0 && y.is_finite() && n.is_finite() && *n > 0.0)) {
        return Err(LabError::Fit(format!("point ({n}, {y}) is outside the positive domain")));
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|(n, _)| model.design_row(*n)).collect();
    let cols = rows[0].len();
    let x = DMatrix::from_fn(points.len(), cols, |i, j| rows[i][j]);
    let ly = DVector::from_iterator(points.len(), points.iter().map(|(_, y)| y.ln()));

    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin.is_nan() || smin <= smax * 1e-10 {
        return Err(LabError::Fit("degenerate design matrix (too few distinct n)".into()));
    }
    let beta = svd.solve(&ly, smax * 1e-12).map_err(|e| LabError::Fit(e.to_string()))?;

    let fitted = &x * &beta;
    let mean = ly.mean();
    let ss_tot: f64 = ly.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = ly.iter().zip(fitted.iter()).map(|(v, f)| (v - f).powi(2)).sum();
    let r2 = if ss_tot <= f64::EPSILON * ly.len() as f64 * mean.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    let result = FitResult {
        model,
        a: beta[0].exp(),
        b: beta[1],
        c: (model == FitModel::PowerExponential).then(|| beta[2]),
        r2,
    };
    result.validate()?;
    Ok(result)
}

pub fn extrapolate(fit: &FitResult, n: f64) -> Result<f64> {
    fit.validate()?;
    Ok(fit.eval(n))
}
