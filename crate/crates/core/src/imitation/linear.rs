//! Linear softmax classifier over sparse features, with SGD and lazy Adam.

use serde::{Deserialize, Serialize};

use super::features::Features;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSoftmax {
    classes: usize,
    features: usize,
    /// Feature-major: `weights[f * classes + c]`.
    weights: Vec<f64>,
}

pub fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

impl LinearSoftmax {
    pub fn zeros(classes: usize, features: usize) -> Self {
        LinearSoftmax {
            classes,
            features,
            weights: vec![0.0; classes * features],
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }

    pub fn logits(&self, x: &Features, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.classes, 0.0);
        for &(f, v) in x {
            let row = &self.weights[f as usize * self.classes..(f as usize + 1) * self.classes];
            for (o, w) in out.iter_mut().zip(row) {
                *o += v * w;
            }
        }
    }

    pub fn probs(&self, x: &Features, out: &mut Vec<f64>) {
        self.logits(x, out);
        softmax_in_place(out);
    }

    pub fn nll(&self, x: &Features, label: usize) -> f64 {
        let mut p = Vec::new();
        self.probs(x, &mut p);
        -p[label].max(f64::MIN_POSITIVE).ln()
    }

    pub fn batch_loss(&self, batch: &[Example]) -> f64 {
        batch.iter().map(|e| self.nll(&e.features, e.label)).sum()
    }

    /// Adds `d nll / d weights` for one example to `grad`; returns the NLL.
    pub fn accumulate(&self, x: &Features, label: usize, grad: &mut Gradient, scratch: &mut Vec<f64>) -> f64 {
        self.probs(x, scratch);
        let loss = -scratch[label].max(f64::MIN_POSITIVE).ln();
        scratch[label] -= 1.0;
        for &(f, v) in x {
            let row = grad.row_mut(f as usize, self.classes);
            for (g, d) in row.iter_mut().zip(scratch.iter()) {
                *g += v * d;
            }
        }
        loss
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Features,
    pub label: usize,
}

/// Dense gradient buffer that remembers which feature rows were touched.
#[derive(Debug, Clone)]
pub struct Gradient {
    classes: usize,
    values: Vec<f64>,
    touched: Vec<bool>,
    rows: Vec<usize>,
}

impl Gradient {
    pub fn for_model(m: &LinearSoftmax) -> Self {
        Gradient {
            classes: m.classes,
            values: vec![0.0; m.weights.len()],
            touched: vec![false; m.features],
            rows: Vec::new(),
        }
    }

    fn row_mut(&mut self, f: usize, classes: usize) -> &mut [f64] {
        if !self.touched[f] {
            self.touched[f] = true;
            self.rows.push(f);
        }
        &mut self.values[f * classes..(f + 1) * classes]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn scale(&mut self, s: f64) {
        for &f in &self.rows {
            for g in &mut self.values[f * self.classes..(f + 1) * self.classes] {
                *g *= s;
            }
        }
    }

    pub fn clear(&mut self) {
        for &f in &self.rows {
            self.touched[f] = false;
            self.values[f * self.classes..(f + 1) * self.classes].fill(0.0);
        }
        self.rows.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Optimizer state for one model. Adam moments are only updated for touched rows.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    pub lr: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, model: &LinearSoftmax) -> Self {
        let n = match kind {
            OptimizerKind::Sgd => 0,
            OptimizerKind::Adam => model.weights.len(),
        };
        Optimizer {
            kind,
            lr,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn apply(&mut self, model: &mut LinearSoftmax, grad: &Gradient) {
        let c = model.classes;
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for &f in grad.rows() {
                    for k in f * c..(f + 1) * c {
                        model.weights[k] -= self.lr * grad.values[k];
                    }
                }
            }
            OptimizerKind::Adam => {
                let t = self.step as i32;
                let lr_t = self.lr * (1.0 - BETA2.powi(t)).sqrt() / (1.0 - BETA1.powi(t));
                for &f in grad.rows() {
                    for k in f * c..(f + 1) * c {
                        let g = grad.values[k];
                        self.m[k] = BETA1 * self.m[k] + (1.0 - BETA1) * g;
                        self.v[k] = BETA2 * self.v[k] + (1.0 - BETA2) * g * g;
                        model.weights[k] -= lr_t * self.m[k] / (self.v[k].sqrt() + EPS);
                    }
                }
            }
        }
    }
}
