//! Random forest of CART trees (Gini impurity, bootstrap samples,
//! square-root feature subsampling at every split).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        /// Fraction of class-1 samples reaching this leaf.
        p1: f64,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { p1 } => return *p1,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature as usize] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    fn write(&self, w: &mut Writer) {
        match self {
            Node::Leaf { p1 } => {
                w.u8(0);
                w.f64(*p1);
            }
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                w.u8(1);
                w.u32(*feature);
                w.f64(*threshold);
                left.write(w);
                right.write(w);
            }
        }
    }

    fn read(r: &mut Reader, depth: usize) -> Result<Self> {
        if depth > 10_000 {
            return Err(Error::Model("tree too deep".into()));
        }
        match r.u8()? {
            0 => Ok(Node::Leaf { p1: r.f64()? }),
            1 => Ok(Node::Split {
                feature: r.u32()?,
                threshold: r.f64()?,
                left: Box::new(Node::read(r, depth + 1)?),
                right: Box::new(Node::read(r, depth + 1)?),
            }),
            t => Err(Error::Model(format!("unknown tree node tag {t}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<Node>,
}

fn gini(n0: f64, n1: f64) -> f64 {
    let n = n0 + n1;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (n0 / n, n1 / n);
    1.0 - p0 * p0 - p1 * p1
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    max_features: usize,
    min_samples_split: usize,
    rng: ChaCha8Rng,
}

impl TreeBuilder<'_> {
    fn build(&mut self, samples: &mut [usize]) -> Node {
        let n1 = samples.iter().filter(|&&i| self.y[i] == 1).count();
        let n = samples.len();
        let leaf = Node::Leaf {
            p1: n1 as f64 / n as f64,
        };
        if n1 == 0 || n1 == n || n < self.min_samples_split {
            return leaf;
        }
        let d = self.x[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);

        // Examine features in random order; stop once `max_features` have
        // been examined and a valid split exists.
        let mut best: Option<(f64, usize, f64)> = None;
        for (examined, &f) in features.iter().enumerate() {
            if examined >= self.max_features && best.is_some() {
                break;
            }
            if let Some((impurity, threshold)) = self.best_split(samples, f) {
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, f, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return leaf;
        };
        let split = partition(samples, |&i| self.x[i][feature] <= threshold);
        let (left, right) = samples.split_at_mut(split);
        let left = self.build(left);
        let right = self.build(right);
        Node::Split {
            feature: feature as u32,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Weighted child impurity and midpoint threshold of the best split on
    /// one feature, or None when the feature is constant here.
    fn best_split(&self, samples: &[usize], f: usize) -> Option<(f64, f64)> {
        let mut vals: Vec<(f64, u8)> = samples.iter().map(|&i| (self.x[i][f], self.y[i])).collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = vals.len() as f64;
        let total1 = vals.iter().filter(|v| v.1 == 1).count() as f64;
        let total0 = n - total1;
        let (mut l0, mut l1) = (0.0, 0.0);
        let mut best: Option<(f64, f64)> = None;
        for k in 0..vals.len() - 1 {
            if vals[k].1 == 1 {
                l1 += 1.0;
            } else {
                l0 += 1.0;
            }
            if vals[k].0 == vals[k + 1].0 {
                continue;
            }
            let nl = l0 + l1;
            let nr = n - nl;
            let impurity = (nl * gini(l0, l1) + nr * gini(total0 - l0, total1 - l1)) / n;
            if best.is_none_or(|(b, _)| impurity < b) {
                let mut threshold = vals[k].0 / 2.0 + vals[k + 1].0 / 2.0;
                if threshold >= vals[k + 1].0 {
                    threshold = vals[k].0;
                }
                best = Some((impurity, threshold));
            }
        }
        best
    }
}

/// Stable in-place partition; returns the number of elements satisfying `pred`.
fn partition(v: &mut [usize], pred: impl Fn(&usize) -> bool) -> usize {
    let (yes, no): (Vec<usize>, Vec<usize>) = v.iter().partition(|i| pred(i));
    let k = yes.len();
    for (slot, i) in v.iter_mut().zip(yes.into_iter().chain(no)) {
        *slot = i;
    }
    k
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[u8], params: ForestParams, seed: u64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Training("random forest needs training data".into()));
        }
        let d = x[0].len();
        let max_features = ((d as f64).sqrt() as usize).max(1);
        let n = x.len();
        let trees = (0..params.n_trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
                let mut samples: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut builder = TreeBuilder {
                    x,
                    y,
                    max_features,
                    min_samples_split: params.min_samples_split,
                    rng,
                };
                builder.build(&mut samples)
            })
            .collect();
        Ok(RandomForest { trees })
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u32(self.trees.len() as u32);
        for t in &self.trees {
            t.write(w);
        }
    }

    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        let n = r.u32()?;
        let trees = (0..n).map(|_| Node::read(r, 0)).collect::<Result<_>>()?;
        Ok(RandomForest { trees })
    }
}
