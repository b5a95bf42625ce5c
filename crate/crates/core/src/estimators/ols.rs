use serde::{Deserialize, Serialize};

use crate::error::EstimatorError;

/// `y = slope·x + intercept` with its fit statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub slope: f64,
    pub intercept: f64,
    pub training_rmse: f64,
    pub training_r2: f64,
    pub n_train: usize,
}

impl LinearModel {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Closed-form least squares on centered data.
pub fn fit_ols(pairs: &[(f64, f64)]) -> Result<LinearModel, EstimatorError> {
    let n = pairs.len();
    if n < 2 {
        return Err(EstimatorError::DegenerateDesign(format!("{n} point(s), need at least 2")));
    }
    if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(EstimatorError::Domain("non-finite training pair".into()));
    }
    let x0 = pairs[0].0;
    if pairs.iter().all(|&(x, _)| x == x0) {
        return Err(EstimatorError::DegenerateDesign(format!("all {n} inputs equal {x0}")));
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (sxx, sxy) = pairs.iter().fold((0.0, 0.0), |(sxx, sxy), &(x, y)| {
        let dx = x - mx;
        (sxx + dx * dx, sxy + dx * (y - my))
    });
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (ss_res, ss_tot) = pairs.iter().fold((0.0, 0.0), |(r, t), &(x, y)| {
        let e = y - (slope * x + intercept);
        (r + e * e, t + (y - my) * (y - my))
    });
    let training_r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LinearModel {
        slope,
        intercept,
        training_rmse: (ss_res / nf).sqrt(),
        training_r2,
        n_train: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let m = fit_ols(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]).unwrap();
        assert!((m.slope - 2.0).abs() < 1e-12);
        assert!(m.intercept.abs() < 1e-12);
        assert!(m.training_rmse < 1e-12);
        assert!((m.training_r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_target() {
        let m = fit_ols(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).unwrap();
        assert_eq!(m.slope, 0.0);
        assert_eq!(m.intercept, 1.0);
        assert_eq!(m.training_r2, 1.0);
    }

    #[test]
    fn three_point_tent() {
        // Normal equations: 3b + 3a = 1, 3b + 5a = 1 → a = 0, b = 1/3.
        let m = fit_ols(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert!(m.slope.abs() < 1e-12);
        assert!((m.intercept - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.n_train, 3);
    }

    #[test]
    fn identical_inputs_rejected() {
        assert!(matches!(
            fit_ols(&[(2.0, 1.0), (2.0, 3.0)]),
            Err(EstimatorError::DegenerateDesign(_))
        ));
        assert!(fit_ols(&[(1.0, 1.0)]).is_err());
    }
}
