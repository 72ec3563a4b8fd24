//! Soft-voting ensemble over the four credibility classifiers.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::forest::{ForestParams, RandomForest};
use super::logistic::{LogisticParams, LogisticRegression};
use super::naive_bayes::GaussianNb;
use super::svm::{LinearSvm, SvmParams};
use super::{FeatureVector, Standardizer, TrainingSet, FEATURE_DIM};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"ARCM";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Logistic(LogisticRegression),
    NaiveBayes(GaussianNb),
    Forest(RandomForest),
    Svm(LinearSvm),
}

impl Member {
    pub fn name(&self) -> &'static str {
        match self {
            Member::Logistic(_) => "logistic_regression",
            Member::NaiveBayes(_) => "gaussian_nb",
            Member::Forest(_) => "random_forest",
            Member::Svm(_) => "linear_svm_platt",
        }
    }

    /// Distribution over {0, 1}.
    pub fn predict_distribution(&self, x: &[f64]) -> [f64; 2] {
        let p1 = match self {
            Member::Logistic(m) => m.predict_proba(x),
            Member::NaiveBayes(m) => m.predict_proba(x),
            Member::Forest(m) => m.predict_proba(x),
            Member::Svm(m) => m.predict_proba(x),
        };
        [1.0 - p1, p1]
    }
}

/// Combined vote of several probabilistic classifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vote {
    /// Mean probability of class 1.
    pub p1: f64,
    /// Argmax of summed probabilities; an exact tie goes to class 0.
    pub class: u8,
}

pub fn soft_vote(distributions: &[[f64; 2]]) -> Vote {
    let sum0: f64 = distributions.iter().map(|d| d[0]).sum();
    let sum1: f64 = distributions.iter().map(|d| d[1]).sum();
    Vote {
        p1: sum1 / distributions.len() as f64,
        class: u8::from(sum1 > sum0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub standardizer: Standardizer,
    pub members: Vec<Member>,
    /// Mean 5-fold cross-validated accuracy measured at training time.
    pub cv_accuracy: f64,
}

pub const CV_FOLDS: usize = 5;

impl EnsembleModel {
    /// Train all four members on standardized features.
    pub fn train(data: &TrainingSet, seed: u64) -> Result<Self> {
        data.check_trainable()?;
        let cv_accuracy = cross_validate(data, CV_FOLDS, seed)?;
        let mut model = Self::fit_members(data, seed)?;
        model.cv_accuracy = cv_accuracy;
        Ok(model)
    }

    fn fit_members(data: &TrainingSet, seed: u64) -> Result<Self> {
        let standardizer = Standardizer::fit(&data.features);
        let x: Vec<Vec<f64>> = data
            .features
            .iter()
            .map(|f| standardizer.transform(f))
            .collect();
        let y = &data.labels;
        let members = vec![
            Member::Logistic(LogisticRegression::fit(&x, y, LogisticParams::default())?),
            Member::NaiveBayes(GaussianNb::fit(&x, y, 1e-9)?),
            Member::Forest(RandomForest::fit(&x, y, ForestParams::default(), seed)?),
            Member::Svm(LinearSvm::fit(&x, y, SvmParams::default(), seed)?),
        ];
        Ok(EnsembleModel {
            standardizer,
            members,
            cv_accuracy: f64::NAN,
        })
    }

    pub fn vote(&self, x: &FeatureVector) -> Result<Vote> {
        if self.members.is_empty() {
            return Err(Error::Model("model has no trained members".into()));
        }
        if x.0.len() != self.standardizer.mean.len() {
            return Err(Error::Feature(format!(
                "expected {} features, got {}",
                self.standardizer.mean.len(),
                x.0.len()
            )));
        }
        let z = self.standardizer.transform(x);
        let dists: Vec<[f64; 2]> = self
            .members
            .iter()
            .map(|m| m.predict_distribution(&z))
            .collect();
        Ok(soft_vote(&dists))
    }

    /// Probability that the document is credible.
    pub fn predict_proba(&self, x: &FeatureVector) -> Result<f64> {
        Ok(self.vote(x)?.p1)
    }

    pub fn predict_class(&self, x: &FeatureVector) -> Result<u8> {
        Ok(self.vote(x)?.class)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(MODEL_VERSION);
        w.f64s(&self.standardizer.mean);
        w.f64s(&self.standardizer.std);
        w.f64(self.cv_accuracy);
        w.u32(self.members.len() as u32);
        for m in &self.members {
            match m {
                Member::Logistic(lr) => {
                    w.u8(0);
                    lr.write(&mut w);
                }
                Member::NaiveBayes(nb) => {
                    w.u8(1);
                    nb.write(&mut w);
                }
                Member::Forest(rf) => {
                    w.u8(2);
                    rf.write(&mut w);
                }
                Member::Svm(svm) => {
                    w.u8(3);
                    svm.write(&mut w);
                }
            }
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "credibility model");
        if r.bytes(4)? != MAGIC {
            return Err(Error::Model("not a credibility model file".into()));
        }
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported model version {version}")));
        }
        let standardizer = Standardizer {
            mean: r.f64s()?,
            std: r.f64s()?,
        };
        if standardizer.mean.len() != standardizer.std.len() {
            return Err(Error::Model(
                "standardization parameters disagree in length".into(),
            ));
        }
        let cv_accuracy = r.f64()?;
        let n = r.u32()?;
        let mut members = Vec::new();
        for _ in 0..n {
            members.push(match r.u8()? {
                0 => Member::Logistic(LogisticRegression::read(&mut r)?),
                1 => Member::NaiveBayes(GaussianNb::read(&mut r)?),
                2 => Member::Forest(RandomForest::read(&mut r)?),
                3 => Member::Svm(LinearSvm::read(&mut r)?),
                t => return Err(Error::Model(format!("unknown member tag {t}"))),
            });
        }
        r.finish()?;
        Ok(EnsembleModel {
            standardizer,
            members,
            cv_accuracy,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let model = Self::from_bytes(&bytes)?;
        if model.standardizer.mean.len() != FEATURE_DIM {
            return Err(Error::Model(format!(
                "model expects {} features, pipeline produces {FEATURE_DIM}",
                model.standardizer.mean.len()
            )));
        }
        Ok(model)
    }
}

/// Stratified k-fold cross-validated accuracy of the ensemble.
pub fn cross_validate(data: &TrainingSet, folds: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    let mut fold_of = vec![0usize; data.len()];
    for class in 0..2u8 {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels[i] == class)
            .collect();
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            fold_of[i] = k % folds;
        }
    }
    let mut accuracies = Vec::new();
    for fold in 0..folds {
        let train = data.subset(|i| fold_of[i] != fold);
        let test = data.subset(|i| fold_of[i] == fold);
        if test.is_empty() || train.check_trainable().is_err() {
            continue;
        }
        let model = EnsembleModel::fit_members(&train, seed)?;
        let mut correct = 0usize;
        for (x, &y) in test.features.iter().zip(&test.labels) {
            if model.predict_class(x)? == y {
                correct += 1;
            }
        }
        accuracies.push(correct as f64 / test.len() as f64);
    }
    if accuracies.is_empty() {
        return Err(Error::Training(
            "too few examples for cross-validation".into(),
        ));
    }
    Ok(accuracies.iter().sum::<f64>() / accuracies.len() as f64)
}
