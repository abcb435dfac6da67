use linregime::experiment::sweep::{labels, repetition_seed, training_inputs};
use linregime::krr::{assemble_kernel, krr_fit, krr_test_risk, KrrOptions};
use linregime::linmodels::TargetFunction;
use linregime::spectrum::{Activation, RfKernel};

#[test]
fn cubic_target_not_learned_below_quadratic_sample_size() {
    // n = 300 is about d^1.68 at d = 30: degree-3 content stays out of reach
    let (d, n) = (30, 300);
    let f = TargetFunction::cubic_hermite(d);
    let k = RfKernel::new(&Activation::shifted_relu(0.5), d, 40).unwrap();
    let ls = k.spectrum().lambda_star(1).unwrap();
    let seed = repetition_seed(9, 0);
    let x = training_inputs(seed, d, n);
    let y = labels(&f, &x, 0.0, seed);
    let h = assemble_kernel(&k, &x, 10_000).unwrap();
    let best = [1e-3, 1e-2, 0.1, 1.0, 10.0]
        .iter()
        .map(|m| {
            let fit = krr_fit(&h, &y, m * ls, KrrOptions::default()).unwrap();
            krr_test_risk(&k, &x, &fit, &f, 2000, 10).normalized_risk
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best >= 0.7, "best normalized risk {best}");
}
