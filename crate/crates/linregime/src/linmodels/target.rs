//! Target functions with closed-form moments.

use crate::error::{invalid, Result};
use crate::spectrum::{activation_gegenbauer_coeffs, activation_norm_sq, Activation};
use crate::specialfn::dim_table;
use crate::sphere::SphereSample;
use std::fmt;
use std::sync::Arc;

/// `c + sum l_i x_i + sum a_i x_i^2 + g sum (x_i^3 - 3 x_i)` on `S^{d-1}(sqrt(d))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTarget {
    pub d: usize,
    pub constant: f64,
    pub linear: Vec<f64>,
    pub quad: Vec<f64>,
    pub cubic: f64,
}

impl PolyTarget {
    pub fn zero(d: usize) -> Self {
        Self { d, constant: 0.0, linear: vec![0.0; d], quad: vec![0.0; d], cubic: 0.0 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for i in 0..self.d {
            let xi = x[i];
            v += self.linear[i] * xi + self.quad[i] * xi * xi;
            if self.cubic != 0.0 {
                v += self.cubic * (xi * xi * xi - 3.0 * xi);
            }
        }
        v
    }

    fn df(&self) -> f64 {
        self.d as f64
    }

    fn quad_mean(&self) -> f64 {
        self.quad.iter().sum::<f64>() / self.df()
    }

    /// Degree-1 coefficients after removing the cubic's linear leakage.
    fn linear_part(&self) -> Vec<f64> {
        let leak = -6.0 * self.cubic / (self.df() + 2.0);
        self.linear.iter().map(|l| l + leak).collect()
    }

    /// `|P_k f|^2` for `k = 0..=3`; higher degrees vanish.
    pub fn degree_norms(&self) -> [f64; 4] {
        let d = self.df();
        let p0 = self.constant + self.quad.iter().sum::<f64>();
        let p1: f64 = self.linear_part().iter().map(|v| v * v).sum();
        let abar = self.quad_mean();
        let p2 = 2.0 * d / (d + 2.0) * self.quad.iter().map(|a| (a - abar).powi(2)).sum::<f64>();
        let e6 = 15.0 * d * d / ((d + 2.0) * (d + 4.0));
        let e4 = 3.0 * d / (d + 2.0);
        let cubic_norm = d * (e6 - 6.0 * e4 + 9.0);
        let p3 = self.cubic * self.cubic * (cubic_norm - 36.0 * d / ((d + 2.0) * (d + 2.0)));
        [p0 * p0, p1, p2, p3]
    }

    pub fn norm_sq(&self) -> f64 {
        self.degree_norms().iter().sum()
    }

    /// `(P_k f)(x)`.
    pub fn project(&self, k: usize, x: &[f64]) -> f64 {
        match k {
            0 => self.constant + self.quad.iter().sum::<f64>(),
            1 => self.linear_part().iter().zip(x).map(|(l, v)| l * v).sum(),
            2 => {
                let abar = self.quad_mean();
                self.quad.iter().zip(x).map(|(a, v)| (a - abar) * v * v).sum()
            }
            3 => {
                let leak = 6.0 * self.cubic / (self.df() + 2.0);
                x.iter().map(|v| self.cubic * (v * v * v - 3.0 * v) + leak * v).sum()
            }
            _ => 0.0,
        }
    }

    /// `P_{<= l} f` as a polynomial target.
    pub fn low_degree(&self, l: usize) -> PolyTarget {
        let mut out = PolyTarget::zero(self.d);
        match l {
            0 => out.constant = self.constant + self.quad.iter().sum::<f64>(),
            1 => {
                out.constant = self.constant + self.quad.iter().sum::<f64>();
                out.linear = self.linear_part();
            }
            2 => {
                out.constant = self.constant;
                out.quad = self.quad.clone();
                out.linear = self.linear_part();
            }
            _ => out = self.clone(),
        }
        out
    }
}

#[derive(Clone)]
pub enum TargetKind {
    Poly(PolyTarget),
    /// `sigma(<w, x>)` with `|w| = 1`.
    SingleNeuron { weight: Vec<f64>, activation: Activation },
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct TargetFunction {
    pub name: String,
    pub d: usize,
    pub kind: TargetKind,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TargetFunction({}, d = {})", self.name, self.d)
    }
}

impl TargetFunction {
    /// `sum_{i <= d/2} x_i^2 - sum_{i > d/2} x_i^2`.
    pub fn quad_split(d: usize) -> Self {
        let mut p = PolyTarget::zero(d);
        for (i, a) in p.quad.iter_mut().enumerate() {
            *a = if i < d / 2 { 1.0 } else { -1.0 };
        }
        Self { name: "quad_split".into(), d, kind: TargetKind::Poly(p) }
    }

    /// `sum_i (x_i^3 - 3 x_i)`.
    pub fn cubic_hermite(d: usize) -> Self {
        let mut p = PolyTarget::zero(d);
        p.cubic = 1.0;
        Self { name: "cubic_hermite".into(), d, kind: TargetKind::Poly(p) }
    }

    pub fn single_neuron(weight: Vec<f64>, activation: Activation) -> Result<Self> {
        let n = weight.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return invalid(format!("single-neuron weight has norm {n}, expected 1"));
        }
        Ok(Self { name: "single_neuron".into(), d: weight.len(), kind: TargetKind::SingleNeuron { weight, activation } })
    }

    pub fn custom(name: impl Into<String>, d: usize, f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>) -> Self {
        Self { name: name.into(), d, kind: TargetKind::Custom(f) }
    }

    pub fn poly(name: impl Into<String>, p: PolyTarget) -> Self {
        Self { name: name.into(), d: p.d, kind: TargetKind::Poly(p) }
    }

    pub fn by_name(name: &str, d: usize) -> Result<Self> {
        match name {
            "quad_split" => Ok(Self::quad_split(d)),
            "cubic_hermite" => Ok(Self::cubic_hermite(d)),
            "quad_split_plus_x1" => Ok(Self::quad_split(d).plus_linear(&unit(d, 0), "quad_split_plus_x1")?),
            "quad_split_plus_sum" => Ok(Self::quad_split(d).plus_linear(&vec![1.0; d], "quad_split_plus_sum")?),
            _ => invalid(format!("unknown target {name}")),
        }
    }

    /// Adds a linear term `<v, x>` to a polynomial target.
    pub fn plus_linear(&self, v: &[f64], name: &str) -> Result<Self> {
        match &self.kind {
            TargetKind::Poly(p) if v.len() == p.d => {
                let mut q = p.clone();
                q.linear.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                Ok(Self::poly(name, q))
            }
            _ => invalid("linear terms can only be added to polynomial targets of matching dimension"),
        }
    }

    pub fn as_poly(&self) -> Option<&PolyTarget> {
        match &self.kind {
            TargetKind::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            TargetKind::Poly(p) => p.eval(x),
            TargetKind::SingleNeuron { weight, activation } => {
                activation.eval(weight.iter().zip(x).map(|(a, b)| a * b).sum())
            }
            TargetKind::Custom(f) => f(x),
        }
    }

    pub fn eval_rows(&self, x: &SphereSample) -> Vec<f64> {
        let mut row = vec![0.0; x.dim()];
        (0..x.n())
            .map(|i| {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = x.points[(i, j)];
                }
                self.eval(&row)
            })
            .collect()
    }

    /// Closed-form `E f^2` when one is registered.
    pub fn second_moment(&self) -> Option<f64> {
        match &self.kind {
            TargetKind::Poly(p) => Some(p.norm_sq()),
            TargetKind::SingleNeuron { activation, .. } => activation_norm_sq(activation, self.d).ok(),
            TargetKind::Custom(_) => None,
        }
    }

    /// `|P_k f|^2` for `k = 0..=max_degree` when derivable.
    pub fn degree_norms(&self, max_degree: usize) -> Option<Vec<f64>> {
        match &self.kind {
            TargetKind::Poly(p) => {
                let n = p.degree_norms();
                Some((0..=max_degree).map(|k| if k < 4 { n[k] } else { 0.0 }).collect())
            }
            TargetKind::SingleNeuron { activation, .. } => {
                let c = activation_gegenbauer_coeffs(activation, self.d, max_degree).ok()?;
                let b = dim_table(self.d, max_degree).ok()?;
                Some(c.iter().zip(&b).map(|(l, b)| l * l * b).collect())
            }
            TargetKind::Custom(_) => None,
        }
    }

    /// `|P_{> l} f|^2`, the predicted plateau at degree `l`.
    pub fn plateau(&self, l: usize) -> Option<f64> {
        let total = self.second_moment()?;
        let low: f64 = self.degree_norms(l)?.iter().sum();
        Some((total - low).max(0.0))
    }

    /// `P_{<= l} f` for polynomial targets.
    pub fn low_degree(&self, l: usize) -> Option<TargetFunction> {
        self.as_poly().map(|p| Self::poly(format!("{}_low{l}", self.name), p.low_degree(l)))
    }
}

pub fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}
