//! Random-features and neural-tangent feature maps.

use crate::error::{invalid, Error, Result};
use crate::seeding::{self, Stream};
use crate::spectrum::Activation;
use crate::sphere::{sample_rows, SphereSample};
use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Default cap on design-matrix entries.
pub const DEFAULT_MAX_ENTRIES: u128 = 2_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `sum_i a_i sigma(<w_i, x>)`.
    Rf,
    /// `sum_i <a_i, x> sigma'(<w_i, x>)`.
    Nt,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Rf => "rf",
            ModelKind::Nt => "nt",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureModel {
    kind: ModelKind,
    weights: Mat<f64>,
    activation: Activation,
    coef: Option<Vec<f64>>,
}

/// `N` weights uniform on the unit sphere, one per row.
pub fn sample_weights_with(n: usize, d: usize, rng: &mut Stream) -> Mat<f64> {
    sample_rows(n, d, 1.0, rng)
}

pub fn sample_weights(n: usize, d: usize, seed: u64) -> Mat<f64> {
    sample_weights_with(n, d, &mut seeding::stream(seed, &[]))
}

/// Rows `s_i e_{r(i)}` with `r(i)` uniform over coordinates and `s_i` standard normal.
pub fn sparse_nn_weights_with(n: usize, d: usize, rng: &mut Stream) -> Mat<f64> {
    let mut w = Mat::zeros(n, d);
    for i in 0..n {
        let r = rng.gen_range(0..d);
        let s: f64 = StandardNormal.sample(rng);
        w[(i, r)] = s;
    }
    w
}

pub fn sparse_nn_weights(n: usize, d: usize, seed: u64) -> Mat<f64> {
    sparse_nn_weights_with(n, d, &mut seeding::stream(seed, &[]))
}

impl FeatureModel {
    /// Weights must have unit rows.
    pub fn new(kind: ModelKind, weights: Mat<f64>, activation: Activation) -> Result<Self> {
        for i in 0..weights.nrows() {
            let n = (0..weights.ncols()).map(|j| weights[(i, j)].powi(2)).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return invalid(format!("weight row {i} has norm {n}, expected 1"));
            }
        }
        if kind == ModelKind::Nt {
            activation.derivative()?;
        }
        Ok(Self { kind, weights, activation, coef: None })
    }

    /// Random-features model over arbitrary first-layer weights.
    pub fn free_rf(weights: Mat<f64>, activation: Activation) -> Self {
        Self { kind: ModelKind::Rf, weights, activation, coef: None }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn weights(&self) -> &Mat<f64> {
        &self.weights
    }

    pub fn activation(&self) -> &Activation {
        &self.activation
    }

    pub fn neurons(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn num_params(&self) -> usize {
        match self.kind {
            ModelKind::Rf => self.neurons(),
            ModelKind::Nt => self.neurons() * self.dim(),
        }
    }

    pub fn coef(&self) -> Option<&[f64]> {
        self.coef.as_deref()
    }

    pub fn set_coef(&mut self, coef: Vec<f64>) -> Result<()> {
        if coef.len() != self.num_params() {
            return invalid(format!("coefficient length {} != parameter count {}", coef.len(), self.num_params()));
        }
        self.coef = Some(coef);
        Ok(())
    }

    /// Design matrix; NT columns are grouped by neuron, `d` per neuron.
    pub fn design(&self, x: &SphereSample, max_entries: u128) -> Result<Mat<f64>> {
        build_design(self, x, max_entries)
    }

    pub fn predict(&self, x: &SphereSample) -> Result<Vec<f64>> {
        let coef = self.coef.as_ref().ok_or_else(|| Error::InvalidArgument("model is not fitted".into()))?;
        let z = self.design(x, u128::MAX)?;
        Ok(crate::linalg::matvec(z.as_ref(), coef))
    }
}

pub fn build_design(model: &FeatureModel, x: &SphereSample, max_entries: u128) -> Result<Mat<f64>> {
    let (n, d) = (x.n(), x.dim());
    if d != model.dim() {
        return invalid(format!("sample dimension {d} != weight dimension {}", model.dim()));
    }
    let p = model.num_params();
    let entries = n as u128 * p as u128;
    if entries > max_entries {
        return Err(Error::MemoryCap { entries, cap: max_entries });
    }
    let pre: Mat<f64> = &x.points * model.weights.transpose();
    let nn = model.neurons();
    match model.kind {
        ModelKind::Rf => {
            let act = &model.activation;
            Ok(Mat::from_fn(n, nn, |i, j| act.eval(pre[(i, j)])))
        }
        ModelKind::Nt => {
            let deriv = model.activation.derivative()?;
            let gate = Mat::from_fn(n, nn, |i, j| deriv.eval(pre[(i, j)]));
            Ok(Mat::from_fn(n, p, |i, c| x.points[(i, c % d)] * gate[(i, c / d)]))
        }
    }
}
