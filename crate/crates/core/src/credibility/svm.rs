//! Linear SVM (hinge loss, L2) trained with averaged stochastic
//! subgradient descent, calibrated to probabilities with Platt scaling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::{Reader, Writer};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-4,
            epochs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub platt: Platt,
}

/// Sigmoid calibration `P(1|f) = 1 / (1 + exp(a·f + b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Platt {
    pub a: f64,
    pub b: f64,
}

impl Platt {
    pub fn probability(&self, f: f64) -> f64 {
        super::logistic::sigmoid(-(self.a * f + self.b))
    }

    /// Fit by Newton's method with backtracking, using Platt's smoothed
    /// targets `(N+ + 1)/(N+ + 2)` and `1/(N- + 2)`.
    pub fn fit(decisions: &[f64], y: &[u8]) -> Platt {
        let n_pos = y.iter().filter(|&&c| c == 1).count() as f64;
        let n_neg = y.len() as f64 - n_pos;
        let hi = (n_pos + 1.0) / (n_pos + 2.0);
        let lo = 1.0 / (n_neg + 2.0);
        let targets: Vec<f64> = y.iter().map(|&c| if c == 1 { hi } else { lo }).collect();

        let nll = |a: f64, b: f64| -> f64 {
            decisions
                .iter()
                .zip(&targets)
                .map(|(&f, &t)| {
                    let z = a * f + b;
                    // -[t·log p + (1-t)·log(1-p)] with p = 1/(1+e^z)
                    if z >= 0.0 {
                        t * z + (-z).exp().ln_1p()
                    } else {
                        (t - 1.0) * z + z.exp().ln_1p()
                    }
                })
                .sum()
        };

        let (mut a, mut b) = (0.0, ((n_neg + 1.0) / (n_pos + 1.0)).ln());
        let sigma = 1e-12;
        let mut fval = nll(a, b);
        for _ in 0..100 {
            let (mut h11, mut h22, mut h21, mut g1, mut g2) = (sigma, sigma, 0.0, 0.0, 0.0);
            for (&f, &t) in decisions.iter().zip(&targets) {
                let p = super::logistic::sigmoid(-(a * f + b));
                let q = 1.0 - p;
                let d2 = p * q;
                h11 += f * f * d2;
                h22 += d2;
                h21 += f * d2;
                let d1 = t - p;
                g1 += f * d1;
                g2 += d1;
            }
            if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let gd = g1 * da + g2 * db;
            let mut step = 1.0;
            while step >= 1e-10 {
                let (na, nb) = (a + step * da, b + step * db);
                let nf = nll(na, nb);
                if nf < fval + 1e-4 * step * gd {
                    a = na;
                    b = nb;
                    fval = nf;
                    break;
                }
                step /= 2.0;
            }
            if step < 1e-10 {
                break;
            }
        }
        Platt { a, b }
    }
}

impl LinearSvm {
    pub fn fit(x: &[Vec<f64>], y: &[u8], params: SvmParams, seed: u64) -> Result<Self> {
        let d = x.first().map(Vec::len).unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut w_avg = vec![0.0; d];
        let mut b_avg = 0.0;
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut t = 0.0f64;
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1.0;
                // Step size 1/(λ(t + t0)) keeps the first updates bounded.
                let eta = 1.0 / (params.lambda * (t + 1.0 / params.lambda));
                let s = if y[i] == 1 { 1.0 } else { -1.0 };
                let margin = s * (dot(&w, &x[i]) + b);
                for wj in w.iter_mut() {
                    *wj *= 1.0 - eta * params.lambda;
                }
                if margin < 1.0 {
                    for (wj, xj) in w.iter_mut().zip(&x[i]) {
                        *wj += eta * s * xj;
                    }
                    b += eta * s;
                }
                for (a, wj) in w_avg.iter_mut().zip(&w) {
                    *a += (wj - *a) / t;
                }
                b_avg += (b - b_avg) / t;
            }
        }
        let mut svm = LinearSvm {
            weights: w_avg,
            intercept: b_avg,
            platt: Platt { a: -1.0, b: 0.0 },
        };
        let decisions: Vec<f64> = x.iter().map(|xi| svm.decision(xi)).collect();
        svm.platt = Platt::fit(&decisions, y);
        Ok(svm)
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.platt.probability(self.decision(x))
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.f64s(&self.weights);
        w.f64(self.intercept);
        w.f64(self.platt.a);
        w.f64(self.platt.b);
    }

    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        Ok(LinearSvm {
            weights: r.f64s()?,
            intercept: r.f64()?,
            platt: Platt {
                a: r.f64()?,
                b: r.f64()?,
            },
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
