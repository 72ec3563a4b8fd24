//! Gaussian naive Bayes for two classes.

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// Per class: feature means.
    pub means: [Vec<f64>; 2],
    /// Per class: feature variances, smoothed.
    pub variances: [Vec<f64>; 2],
    pub priors: [f64; 2],
}

impl GaussianNb {
    /// Fit with variance smoothing `var_smoothing · max_j Var(x_j)` added to
    /// every per-class variance.
    pub fn fit(x: &[Vec<f64>], y: &[u8], var_smoothing: f64) -> Result<Self> {
        let d = x.first().map(Vec::len).unwrap_or(0);
        let n = x.len() as f64;
        let max_var = (0..d)
            .map(|j| {
                let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
                x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n
            })
            .fold(0.0, f64::max);
        let epsilon = var_smoothing * max_var;

        let mut means = [vec![0.0; d], vec![0.0; d]];
        let mut variances = [vec![0.0; d], vec![0.0; d]];
        let mut priors = [0.0; 2];
        for class in 0..2u8 {
            let rows: Vec<&Vec<f64>> = x
                .iter()
                .zip(y)
                .filter(|(_, &c)| c == class)
                .map(|(r, _)| r)
                .collect();
            if rows.is_empty() {
                return Err(Error::Training(format!("no examples of class {class}")));
            }
            let m = rows.len() as f64;
            let c = class as usize;
            for j in 0..d {
                let mean = rows.iter().map(|r| r[j]).sum::<f64>() / m;
                means[c][j] = mean;
                variances[c][j] =
                    rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / m + epsilon;
            }
            priors[c] = m / n;
        }
        Ok(GaussianNb {
            means,
            variances,
            priors,
        })
    }

    fn joint_log_likelihood(&self, x: &[f64], class: usize) -> f64 {
        let mut ll = self.priors[class].ln();
        for ((xj, mean), var) in x.iter().zip(&self.means[class]).zip(&self.variances[class]) {
            ll -= 0.5 * (2.0 * std::f64::consts::PI * var).ln();
            ll -= (xj - mean).powi(2) / (2.0 * var);
        }
        ll
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let l0 = self.joint_log_likelihood(x, 0);
        let l1 = self.joint_log_likelihood(x, 1);
        // P(1|x) = 1 / (1 + exp(l0 - l1))
        super::logistic::sigmoid(l1 - l0)
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        for c in 0..2 {
            w.f64s(&self.means[c]);
            w.f64s(&self.variances[c]);
            w.f64(self.priors[c]);
        }
    }

    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        let (m0, v0, p0) = (r.f64s()?, r.f64s()?, r.f64()?);
        let (m1, v1, p1) = (r.f64s()?, r.f64s()?, r.f64()?);
        Ok(GaussianNb {
            means: [m0, m1],
            variances: [v0, v1],
            priors: [p0, p1],
        })
    }
}
