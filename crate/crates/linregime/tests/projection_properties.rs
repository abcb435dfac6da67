use linregime::linmodels::TargetFunction;
use linregime::projection::{project_low_degree, projector_gegenbauer};
use linregime::sphere::sample_sphere;

const D: usize = 10;

#[test]
fn pythagoras_and_monotone_residuals() {
    for target in [TargetFunction::quad_split(D), TargetFunction::cubic_hermite(D)] {
        let norm = target.second_moment().unwrap();
        let (mut last, mut last_se) = (f64::INFINITY, 0.0);
        for l in 1..=3 {
            let fit = project_low_degree(&target, l, 20_000, 10 + l as u64, u128::MAX).unwrap();
            let total = fit.low_norm_sq + fit.residual_norm_sq;
            let err = (fit.mean_sq_se.powi(2) + fit.residual_se.powi(2)).sqrt();
            assert!((total - norm).abs() <= 3.0 * err, "{} l={l}: {total} vs {norm} (se {err})", target.name);
            assert!(fit.residual_norm_sq >= 0.0 && fit.residual_norm_sq <= norm * (1.0 + 2.0 * fit.mean_sq_se / norm) + 3.0 * fit.residual_se);
            // exact fits leave rounding-level residuals on both sides
            let slack = 3.0 * (fit.residual_se.powi(2) + last_se * last_se).sqrt() + 1e-10 * norm;
            assert!(
                fit.residual_norm_sq <= last + slack,
                "{} l={l}: {} after {last}",
                target.name,
                fit.residual_norm_sq
            );
            (last, last_se) = (fit.residual_norm_sq, fit.residual_se);
        }
    }
}

#[test]
fn parity_of_targets() {
    // even target: nothing on degree <= 1
    let f2 = TargetFunction::quad_split(D);
    let fit = project_low_degree(&f2, 1, 50_000, 1, u128::MAX).unwrap();
    assert!(fit.low_norm_sq.abs() <= 1e-2 * f2.second_moment().unwrap());
    // odd target: the degree-2 space adds nothing beyond degree 1
    let f3 = TargetFunction::cubic_hermite(D);
    let one = project_low_degree(&f3, 1, 50_000, 2, u128::MAX).unwrap();
    let two = project_low_degree(&f3, 2, 50_000, 2, u128::MAX).unwrap();
    assert!((two.residual_norm_sq / one.residual_norm_sq - 1.0).abs() <= 0.02);
}

#[test]
fn projector_is_idempotent_on_cubic_harmonic() {
    let x = sample_sphere(1, D, 3).unwrap().row(0);
    let h = |y: &[f64]| y[0] * y[1] * y[2];
    let (v, se) = projector_gegenbauer(&h, D, 3, &x, 1_000_000, 4).unwrap();
    assert!((v - h(&x)).abs() <= 3.0 * se, "{v} vs {} (se {se})", h(&x));
    // and annihilates it at a different degree
    let (z, se) = projector_gegenbauer(&h, D, 1, &x, 400_000, 5).unwrap();
    assert!(z.abs() <= 3.0 * se);
}
