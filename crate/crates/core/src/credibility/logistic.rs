//! L2-regularized logistic regression fit by Newton's method.
//!
//! Objective (intercept unpenalized, labels in {0,1}):
//! `0.5·‖w‖² + C·Σ_i log(1 + exp(−y_i·(w·x_i + b)))` with `y_i ∈ {−1,+1}`.

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            tol: 1e-4,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

fn signed(y: u8) -> f64 {
    if y == 1 {
        1.0
    } else {
        -1.0
    }
}

/// log(1 + exp(z)) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Parameters are packed as `[w_0 .. w_{d-1}, b]`.
pub fn objective(theta: &[f64], x: &[Vec<f64>], y: &[u8], c: f64) -> f64 {
    let d = theta.len() - 1;
    let reg: f64 = 0.5 * theta[..d].iter().map(|w| w * w).sum::<f64>();
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| softplus(-signed(yi) * linear(theta, xi)))
        .sum();
    reg + c * loss
}

pub fn gradient(theta: &[f64], x: &[Vec<f64>], y: &[u8], c: f64) -> Vec<f64> {
    let d = theta.len() - 1;
    let mut g: Vec<f64> = theta[..d].to_vec();
    g.push(0.0);
    for (xi, &yi) in x.iter().zip(y) {
        let s = signed(yi);
        // d/dz softplus(-s z) = -s · sigmoid(-s z)
        let coef = -c * s * sigmoid(-s * linear(theta, xi));
        for (gj, xj) in g[..d].iter_mut().zip(xi) {
            *gj += coef * xj;
        }
        g[d] += coef;
    }
    g
}

fn hessian(theta: &[f64], x: &[Vec<f64>], c: f64) -> Vec<Vec<f64>> {
    let d = theta.len() - 1;
    let mut h = vec![vec![0.0; d + 1]; d + 1];
    for (j, row) in h.iter_mut().enumerate().take(d) {
        row[j] = 1.0;
    }
    for xi in x {
        let p = sigmoid(linear(theta, xi));
        let w = c * p * (1.0 - p);
        for a in 0..=d {
            let xa = if a < d { xi[a] } else { 1.0 };
            for b in 0..=d {
                let xb = if b < d { xi[b] } else { 1.0 };
                h[a][b] += w * xa * xb;
            }
        }
    }
    h
}

fn linear(theta: &[f64], xi: &[f64]) -> f64 {
    let d = theta.len() - 1;
    theta[..d].iter().zip(xi).map(|(w, x)| w * x).sum::<f64>() + theta[d]
}

/// Solve `a·x = b` for symmetric positive definite `a` (Cholesky).
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if v <= 0.0 {
                    return None;
                }
                l[i][j] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    Some(x)
}

impl LogisticRegression {
    pub fn fit(x: &[Vec<f64>], y: &[u8], params: LogisticParams) -> Result<Self> {
        let d = x.first().map(Vec::len).unwrap_or(0);
        let mut theta = vec![0.0; d + 1];
        for _ in 0..params.max_iter {
            let g = gradient(&theta, x, y, params.c);
            if g.iter().all(|v| v.abs() <= params.tol) {
                break;
            }
            let h = hessian(&theta, x, params.c);
            let step = cholesky_solve(&h, &g)
                .ok_or_else(|| Error::Training("logistic regression Hessian is singular".into()))?;
            // Backtracking line search on the objective.
            let f0 = objective(&theta, x, y, params.c);
            let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            loop {
                let cand: Vec<f64> = theta.iter().zip(&step).map(|(th, s)| th - t * s).collect();
                if objective(&cand, x, y, params.c) <= f0 - 1e-4 * t * slope || t < 1e-10 {
                    theta = cand;
                    break;
                }
                t *= 0.5;
            }
        }
        let intercept = theta.pop().unwrap_or(0.0);
        Ok(LogisticRegression {
            weights: theta,
            intercept,
        })
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercept
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.f64s(&self.weights);
        w.f64(self.intercept);
    }

    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        Ok(LogisticRegression {
            weights: r.f64s()?,
            intercept: r.f64()?,
        })
    }
}
