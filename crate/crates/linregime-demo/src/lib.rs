//! Browser bindings: Gegenbauer curves, kernel spectra and an RF staircase.
//!
//! Each exported function returns a flat `Float64Array`; the page in `www/`
//! draws them on canvases.

use linregime::linmodels::{rf_population_risk, sample_weights_with, PopulationMethod, TargetFunction};
use linregime::seeding::{self, role};
use linregime::specialfn::GegenbauerEvaluator;
use linregime::spectrum::{Activation, NtKernel, RfKernel};
use wasm_bindgen::prelude::*;

const MAX_DIM: usize = 2000;
const MAX_DEGREE: usize = 60;
const MAX_WIDTH: u32 = 600;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `Q_k(d t)` at `points` evenly spaced `t` in `[-1, 1]`.
pub fn curve(d: usize, k: usize, points: usize) -> linregime::Result<Vec<f64>> {
    if !(2..=MAX_DIM).contains(&d) || k > MAX_DEGREE || !(2..=10_000).contains(&points) {
        return Err(linregime::Error::InvalidArgument(format!(
            "need 2 <= d <= {MAX_DIM}, k <= {MAX_DEGREE}, 2 <= points <= 10000"
        )));
    }
    let g = GegenbauerEvaluator::new(d, k)?;
    let mut q = vec![0.0; k + 1];
    Ok((0..points)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
            g.fill(d as f64 * t, &mut q);
            q[k]
        })
        .collect())
}

/// Share of the kernel's mass `xi_k B(d,k) / h(1)` on each degree `k <= max_degree`.
pub fn spectrum_shares(d: usize, u0: f64, kind: &str, max_degree: usize) -> linregime::Result<Vec<f64>> {
    if !(2..=MAX_DIM).contains(&d) || max_degree > MAX_DEGREE {
        return Err(linregime::Error::InvalidArgument(format!("need 2 <= d <= {MAX_DIM}, max_degree <= {MAX_DEGREE}")));
    }
    let act = Activation::shifted_relu(u0);
    let spec = match kind {
        "rf" => RfKernel::new(&act, d, max_degree)?.spectrum(),
        "nt" => NtKernel::new(&act, d, max_degree)?.spectrum(),
        _ => return Err(linregime::Error::InvalidArgument(format!("kernel `{kind}` is not rf or nt"))),
    };
    Ok(spec.xi.iter().zip(&spec.dims).map(|(x, b)| x * b / spec.total_mass).collect())
}

/// Normalized population RF risk for `sum_{i<=d/2} x_i^2 - sum_{i>d/2} x_i^2 + sum_i x_i`
/// at each width, one weight draw per width.
pub fn staircase(d: usize, u0: f64, widths: &[u32], seed: u64) -> linregime::Result<Vec<f64>> {
    if !(2..=200).contains(&d) || widths.iter().any(|&w| w == 0 || w > MAX_WIDTH) {
        return Err(linregime::Error::InvalidArgument(format!("need 2 <= d <= 200 and widths in 1..={MAX_WIDTH}")));
    }
    let target = TargetFunction::by_name("quad_split_plus_sum", d)?;
    let act = Activation::shifted_relu(u0);
    widths
        .iter()
        .map(|&n| {
            let mut rng = seeding::stream(seed, &[role::WEIGHTS, d as u64, n as u64]);
            let w = sample_weights_with(n as usize, d, &mut rng);
            let r = rf_population_risk(&act, w.as_ref(), &target, PopulationMethod::Series { max_degree: 30 })?;
            Ok(r.risk / r.norm_sq)
        })
        .collect()
}

#[wasm_bindgen]
pub fn gegenbauer_curve(d: usize, k: usize, points: usize) -> Result<Vec<f64>, JsError> {
    curve(d, k, points).map_err(err)
}

#[wasm_bindgen]
pub fn kernel_spectrum(d: usize, u0: f64, kind: &str, max_degree: usize) -> Result<Vec<f64>, JsError> {
    spectrum_shares(d, u0, kind, max_degree).map_err(err)
}

#[wasm_bindgen]
pub fn rf_staircase(d: usize, u0: f64, widths: Vec<u32>, seed: u32) -> Result<Vec<f64>, JsError> {
    staircase(d, u0, &widths, seed as u64).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_endpoints() {
        let c = curve(5, 3, 11).unwrap();
        assert!((c[10] - 1.0).abs() < 1e-12);
        assert!((c[0] + 1.0).abs() < 1e-12);
        assert!(curve(1, 3, 11).is_err());
    }

    #[test]
    fn shares_sum_to_at_most_one() {
        let s = spectrum_shares(20, 0.5, "rf", 20).unwrap();
        let total: f64 = s.iter().sum();
        assert!(total <= 1.0 + 1e-9 && total > 0.99);
        assert!(spectrum_shares(20, 0.5, "gauss", 5).is_err());
    }

    #[test]
    fn staircase_decreases() {
        let r = staircase(8, 0.5, &[2, 16, 128], 1).unwrap();
        assert!(r[0] > r[1] && r[1] > r[2]);
    }
}
