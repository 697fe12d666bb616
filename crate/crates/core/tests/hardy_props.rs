use proptest::prelude::*;
use tangent_hp::hardy::{
    b_inf, blaschke_factor, blaschke_product, excluded_product, poisson_kernel, reproducing_kernel,
    PointSequence, TailModel,
};
use tangent_hp::quadrature::{AxisQuadrature, Feature};
use tangent_hp::Cx;

fn point() -> impl Strategy<Value = Cx<f64>> {
    (0.05f64..5.0, -5.0f64..5.0).prop_map(|(x, y)| Cx::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factor_is_contractive_and_unimodular_on_axis(z in point(), zk in point(), omega in -50.0f64..50.0) {
        prop_assert!(blaschke_factor(z, zk).norm() < 1.0);
        prop_assert!((blaschke_factor(Cx::new(0.0, omega), zk).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excluded_product_is_multiplicative(pts in prop::collection::vec(point(), 1..8), z in point(), pick in 0usize..8) {
        let seq = PointSequence::new(pts, 1e-8).unwrap();
        let n = seq.len();
        let k = pick % n;
        let full = blaschke_product(&seq, n, z);
        let split = excluded_product(&seq, k, n, z) * blaschke_factor(z, seq.point(k));
        prop_assert!((full - split).norm() < 1e-13);
    }

    #[test]
    fn poisson_kernel_is_a_probability_density(z in point(), omega in -100.0f64..100.0) {
        prop_assert!(poisson_kernel(z, omega) >= 0.0);
        let quad = AxisQuadrature::default().with_decay(2.0);
        let r = quad.integrate_line(|w| poisson_kernel(z, w), &[Feature::new(z.im, z.re)]).unwrap();
        prop_assert!((r.value - 1.0).abs() < 1e-8, "integral {}", r.value);
    }

    #[test]
    fn reproducing_property(a in point(), b in point()) {
        let quad = AxisQuadrature::default().with_decay(2.0);
        let feats = [Feature::new(a.im, a.re), Feature::new(b.im, b.re)];
        let f = |w: f64| reproducing_kernel(a, Cx::new(0.0, w)) * reproducing_kernel(b, Cx::new(0.0, w)).conj();
        let re = quad.integrate_line(|w| f(w).re, &feats).unwrap().value;
        let im = quad.integrate_line(|w| f(w).im, &feats).unwrap().value;
        let expect = reproducing_kernel(a, b);
        prop_assert!((Cx::new(re, im) - expect).norm() < 1e-8 * (1.0 + expect.norm()));
    }
}

/// `sum_{j != k, j <= n} ln |b_j(z_k)|` for the points `j^2 + 0.3 i j` (stored part) and `j^2`.
fn explicit_log_product(k: usize, n: usize) -> f64 {
    let point = |j: usize| if j <= 20 { Cx::new((j * j) as f64, 0.3 * j as f64) } else { Cx::new((j * j) as f64, 0.0) };
    let zk = point(k + 1);
    (1..=n).filter(|&j| j != k + 1).map(|j| blaschke_factor(zk, point(j)).norm().ln()).sum()
}

#[test]
fn tail_certificate_covers_explicit_truncation() {
    let pts: Vec<Cx<f64>> = (1..=20).map(|n| Cx::new((n * n) as f64, 0.3 * n as f64)).collect();
    let tail = TailModel::RealPower { scale: 1.0, exponent: 2.0 };
    let seq = PointSequence::new(pts, 1e-6).unwrap().with_tail(tail).unwrap();
    for k in 0..10 {
        let cert = b_inf(&seq, k).unwrap();
        // The truncation error expands in powers of 1/n; three levels remove the first two terms.
        let n = 10_000;
        let (l1, l2, l4) = (explicit_log_product(k, n), explicit_log_product(k, 2 * n), explicit_log_product(k, 4 * n));
        let limit = (8.0 * l4 - 6.0 * l2 + l1) / 3.0;
        let rel = (cert.log_modulus - limit).abs();
        assert!(rel <= cert.rel_error_bound + 1e-9, "k={k}: {rel} exceeds {}", cert.rel_error_bound);
    }
}
