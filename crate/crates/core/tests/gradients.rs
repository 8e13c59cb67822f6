//! Analytic loss gradients against central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatial_entropy::gradcheck::{compare_grads, finite_diff_grad, DEFAULT_STEP};
use spatial_entropy::histograms::neighbor_mean;
use spatial_entropy::losses::{evaluate, spatial_kl, spatial_kl_grad, LossKind, DEFAULT_EPS};
use spatial_entropy::{BinGrid, ImageGrid, KdeJointConfig, KernelFamily, KernelSpec, Padding, Scope, WindowConfig};

/// True when `v` (or a probe within `margin` of it) could cross a kernel
/// truncation edge or the clamp at the outermost bin centers. The truncated
/// kernels jump there, so finite differences across them are meaningless.
fn near_edge(v: f64, cfg: &KdeJointConfig, margin: f64) -> bool {
    let bins = cfg.bins;
    if (v - bins.first_center()).abs() < margin || (v - bins.last_center()).abs() < margin {
        return true;
    }
    [cfg.kernel1, cfg.kernel2].iter().any(|k| {
        let reach = k.truncation_radius() * k.bandwidth();
        (0..bins.bin_count()).any(|b| {
            let c = bins.center(b);
            (v - (c + reach)).abs() < margin || (v - (c - reach)).abs() < margin
        })
    })
}

/// Random 6x6 image on `[0, 7]` whose values and neighbor means all sit
/// clear of the non-differentiable points.
fn smooth_sample(rng: &mut ChaCha8Rng, cfg: &KdeJointConfig, margin: f64) -> ImageGrid {
    loop {
        let data = (0..36).map(|_| rng.random_range(0.0..7.0)).collect();
        let img = ImageGrid::gray(6, 6, data, (0.0, 7.0)).unwrap();
        let means = neighbor_mean(&img, &cfg.weights, None).unwrap();
        if !img.data().iter().chain(means.data()).any(|&v| near_edge(v, cfg, margin)) {
            return img;
        }
    }
}

/// With a narrow gaussian (h = 0.5 bins) some cells of Q sit near eps, where
/// ln(q + eps) bends sharply enough that the O(step^2) error of a 1e-3
/// central difference alone exceeds 1e-4 relative. Refining the step by 10
/// shrinks the discrepancy ~100x, so the oracle, not the gradient, is off.
fn probe_step(family: KernelFamily, h: f64) -> f64 {
    if family == KernelFamily::Gaussian && h < 1.0 {
        1e-4
    } else {
        DEFAULT_STEP
    }
}

fn scopes() -> [(&'static str, Scope); 2] {
    [
        ("global", Scope::Global),
        ("windowed", Scope::Windowed(WindowConfig::new(3, 3, Padding::None).unwrap())),
    ]
}

fn check(kind: LossKind, cfg: &KdeJointConfig, pairs: u64, step: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..pairs {
        let target = smooth_sample(&mut rng, cfg, 2.0 * step);
        let pred = smooth_sample(&mut rng, cfg, 2.0 * step);
        let analytic = evaluate(kind, &target, &pred, cfg, DEFAULT_EPS, true)
            .unwrap()
            .gradient
            .unwrap();
        let numeric = finite_diff_grad(|x| Ok(evaluate(kind, &target, x, cfg, DEFAULT_EPS, false)?.value), &pred, step).unwrap();
        let report = compare_grads(&analytic, &numeric, 1e-4, 1e-8).unwrap();
        assert!(report.passed, "{kind} {cfg:?} pair {k}: {report:?}");
    }
}

#[test]
fn kl_gradient_matches_finite_differences() {
    let bins = BinGrid::integer(7).unwrap();
    for family in [KernelFamily::Gaussian, KernelFamily::SigmoidDerivative] {
        for h in [0.5, 1.0, 2.0] {
            for (_, scope) in scopes() {
                let cfg = KdeJointConfig::new(KernelSpec::with_bandwidth(family, h).unwrap(), bins, scope);
                check(LossKind::Kl, &cfg, 6, probe_step(family, h), 17);
            }
        }
    }
}

#[test]
fn untruncated_kernels_match_finite_differences() {
    let bins = BinGrid::integer(7).unwrap();
    for family in [KernelFamily::Gaussian, KernelFamily::SigmoidDerivative] {
        for h in [0.5, 1.0, 2.0] {
            let step = probe_step(family, h);
            for (_, scope) in scopes() {
                let cfg = KdeJointConfig::new(KernelSpec::new(family, h, 100.0).unwrap(), bins, scope);
                check(LossKind::Kl, &cfg, 4, step, 23);
            }
        }
    }
}

#[test]
fn other_losses_have_correct_gradients() {
    let bins = BinGrid::integer(7).unwrap();
    for kind in [LossKind::CrossEntropy, LossKind::Hellinger] {
        for (_, scope) in scopes() {
            let cfg = KdeJointConfig::new(KernelSpec::gaussian(1.0).unwrap(), bins, scope);
            check(kind, &cfg, 4, DEFAULT_STEP, 5);
        }
    }
}

#[test]
fn separate_bandwidths_and_raw_mode() {
    let bins = BinGrid::integer(7).unwrap();
    let mut cfg = KdeJointConfig::new(KernelSpec::gaussian(1.3).unwrap(), bins, Scope::Global);
    cfg.kernel2 = KernelSpec::sigmoid_derivative(0.8).unwrap();
    check(LossKind::Kl, &cfg, 4, DEFAULT_STEP, 8);
    check(LossKind::Kl, &cfg.clone().with_normalize(false), 4, DEFAULT_STEP, 9);
}

#[test]
fn reflect_padded_windows_and_shuffled_stencils() {
    let bins = BinGrid::integer(7).unwrap();
    let scope = Scope::Windowed(WindowConfig::new(5, 2, Padding::Reflect).unwrap());
    let w = spatial_entropy::shuffled_weights(&Default::default(), 1, 99).unwrap()[0];
    let cfg = KdeJointConfig::new(KernelSpec::gaussian(1.0).unwrap(), bins, scope).with_weights(w);
    check(LossKind::Kl, &cfg, 4, DEFAULT_STEP, 31);
}

#[test]
fn identity_is_stationary() {
    let cfg = KdeJointConfig::new(KernelSpec::gaussian(1.0).unwrap(), BinGrid::integer(7).unwrap(), Scope::Global);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = smooth_sample(&mut rng, &cfg, 2e-3);
    let report = spatial_kl_grad(&x, &x, &cfg, DEFAULT_EPS).unwrap();
    assert!(report.value.abs() <= 1e-12);
    let g = report.gradient.unwrap();
    assert!(g.data().iter().all(|v| v.is_finite()));
    let norm = g.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    // Directional finite difference along the gradient.
    let step = 1e-3 / norm.max(1e-12);
    let up = x.with_data(x.data().iter().zip(g.data()).map(|(a, b)| a + step * b).collect()).unwrap();
    let down = x.with_data(x.data().iter().zip(g.data()).map(|(a, b)| a - step * b).collect()).unwrap();
    let slope = (spatial_kl(&x, &up, &cfg, DEFAULT_EPS).unwrap().value - spatial_kl(&x, &down, &cfg, DEFAULT_EPS).unwrap().value)
        / (2.0 * step);
    assert!(slope >= -1e-6, "{slope}");
}

#[test]
fn descent_step_moves_toward_target() {
    let cfg = KdeJointConfig::eight_bit().with_scope(Scope::Global);
    let target = ImageGrid::filled(8, 8, 100.0, (0.0, 255.0)).unwrap();
    let pred = ImageGrid::filled(8, 8, 102.0, (0.0, 255.0)).unwrap();
    let report = spatial_kl_grad(&target, &pred, &cfg, DEFAULT_EPS).unwrap();
    let g = report.gradient.unwrap();
    let toward: f64 = g.data().iter().zip(target.data().iter().zip(pred.data())).map(|(g, (t, p))| g * (t - p)).sum();
    assert!(toward < 0.0);
    let lr = 0.5 / g.data().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let next = pred.with_data(pred.data().iter().zip(g.data()).map(|(p, g)| p - lr * g).collect()).unwrap();
    assert!(spatial_kl(&target, &next, &cfg, DEFAULT_EPS).unwrap().value < report.value);
}
