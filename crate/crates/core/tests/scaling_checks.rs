use num_complex::Complex64;
use proptest::prelude::*;
use quadbound_core::quad;
use quadbound_core::scaling::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn phi_reference_values_and_shape() {
    // reference values from an independent numpy/scipy evaluation
    let reference = [(0.5, 0.006_65), (1.0, 0.0973), (2.0, 0.6738), (3.0, 0.9592)];
    for (d, v) in reference {
        let e = phi(d, &cfg()).unwrap();
        assert!((e.value - v).abs() < 1e-4, "Phi({}) = {}", d, e.value);
        assert!(e.error < 1e-10);
    }
    assert_eq!(phi(0.0, &cfg()).unwrap().value, 0.0);
    let mut last = 0.0;
    for d in grid(0.05, 8.0, 80) {
        let v = phi(d, &cfg()).unwrap().value;
        assert!(v >= last - 1e-12 && v <= 1.0 + 1e-12, "Phi({}) = {}", d, v);
        last = v;
    }
    assert!((phi(12.0, &cfg()).unwrap().value - 1.0).abs() < 1e-8);
}

#[test]
fn small_d_expansions() {
    let e = phi_bar(0.05, 1.0, &cfg()).unwrap().value;
    assert!((e - 1.875e-3).abs() < 1e-5, "{}", e);
    for p in [0.5, 1.0, 2.0] {
        let v = phi_bar(0.05, p, &cfg()).unwrap().value;
        assert!((v - phi_bar_small_d(0.05, p)).abs() < 1e-5, "P = {}: {}", p, v);
    }
    for p in [0.1, 0.5] {
        let v = phi_hat(0.05, p, &cfg()).unwrap().value;
        assert!((v - phi_hat_small_d(0.05, p)).abs() < 1e-5, "P = {}: {}", p, v);
    }
}

#[test]
fn cdfs_are_monotone_and_normalized() {
    for p in [0.01, 0.5, 2.0, 5.0] {
        let mut last = 0.0;
        for d in grid(0.02, 10.0, 50) {
            let v = phi_bar(d, p, &cfg()).unwrap().value;
            assert!(v >= last - 1e-9 && v <= 1.0 + 1e-9, "P = {} D = {}: {}", p, d, v);
            last = v;
        }
        assert!((last - 1.0).abs() < 1e-6);
    }
    for p in [0.01, 0.2, 1.0] {
        let mut last = 0.0;
        for d in grid(0.02, 10.0, 50) {
            let v = phi_hat(d, p, &cfg()).unwrap().value;
            assert!(v >= last - 1e-9 && v <= 1.0 + 1e-9, "P = {} D = {}: {}", p, d, v);
            last = v;
        }
        assert!((last - 1.0).abs() < 1e-6);
    }
    assert_eq!(phi_bar_sa(0.7, 0.5, &cfg()).unwrap(), phi_bar(0.7, 1.5, &cfg()).unwrap());
}

#[test]
fn densities_integrate_to_one() {
    for p in [0.5, 1.0, 2.0, 5.0] {
        let m = rho_tilde_bound_mass(p, &cfg()).unwrap().value;
        assert!((m - 1.0).abs() < 1e-6, "P = {}: {}", p, m);
    }
    for (u, p) in [(0.3, 0.5), (0.5, 2.0)] {
        let m = rho_tilde_joint_mass(u, p, &cfg()).unwrap().value;
        assert!((m - 1.0).abs() < 1e-6, "u = {} P = {}: {}", u, p, m);
    }
    // (1/105)(35/2 + 28/2 + 12 + 9) * 2 = 1
    let exact = (35.0 * 0.5 + 28.0 * 0.5 + 12.0 * 0.5 * 2.0 + 3.0 * 0.5 * 6.0) * 2.0 / 105.0;
    assert_eq!(exact, 1.0);
    let num = quad::integrate_to_infinity(rho_tilde_small_p, 0.0, 1e-12).unwrap().value;
    assert!((num - 1.0).abs() < 1e-8, "{}", num);
}

#[test]
fn joint_law_marginalizes() {
    // averaging the joint law over u gives the one-point boundary law
    let (d, p) = (0.8, 1.0);
    let n = 400;
    let mut acc = 0.0;
    for i in 0..n {
        // midpoint in u = sin^2 t to tame the endpoints
        let t = (i as f64 + 0.5) / n as f64 * std::f64::consts::FRAC_PI_2;
        let u = t.sin().powi(2);
        acc += rho_tilde_joint(d, u, p, &cfg()).unwrap().value * (2.0 * t).sin() * std::f64::consts::FRAC_PI_2 / n as f64;
    }
    let one = rho_tilde_bound(d, p, &cfg()).unwrap().value;
    assert!((acc - one).abs() < 1e-4, "{} vs {}", acc, one);
}

#[test]
fn limit_laws() {
    assert!((mean_delta_large_p(0.5).unwrap() - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
    // small- and large-P joint laws integrate to 1 in delta
    for u in [0.2, 0.5] {
        let h = 1e-3;
        let a: f64 = (0..5000).map(|i| joint_small_p((i as f64 + 0.5) * h, u).unwrap() * h).sum();
        let b: f64 = (0..5000).map(|i| joint_large_p((i as f64 + 0.5) * h, u).unwrap() * h).sum();
        assert!((a - 1.0).abs() < 1e-6 && (b - 1.0).abs() < 1e-6, "{} {}", a, b);
        // and their means are the closed forms
        let ma: f64 = (0..5000).map(|i| (i as f64 + 0.5) * h * joint_small_p((i as f64 + 0.5) * h, u).unwrap() * h).sum();
        assert!((ma - mean_delta_small_p(u).unwrap()).abs() < 1e-6);
    }
    // at small P the full law approaches its limit
    let small = mean_delta(0.5, 0.02, &cfg()).unwrap().value;
    assert!((small - mean_delta_small_p(0.5).unwrap()).abs() < 0.05, "{}", small);
    let e = mean_delta(0.5, 100.0, &cfg()).unwrap().value;
    assert!((e - 2.0 / std::f64::consts::PI.sqrt()).abs() < 0.02, "{}", e);
    // large P: tanh^2 shape
    for x in grid(0.05, 5.0, 30) {
        let p: f64 = 50.0;
        let v = phi_bar(x / p.sqrt(), p, &cfg()).unwrap().value;
        assert!((v - phi_bar_large_p(x / p.sqrt(), p)).abs() < 1e-3);
    }
}

#[test]
fn discrete_supercritical_laws() {
    for z in [0.13, 0.2, 0.24] {
        assert_eq!(phi_z(0.0, z).unwrap() < phi_z(1.0, z).unwrap(), true);
        assert!((phi_z(400.0, z).unwrap() - 1.0).abs() < 1e-6);
    }
    for big_z in [0.23, 0.3, 1.0] {
        let mut last = 0.0;
        for d in 0..200 {
            let v = phi_tilde_z(d as f64, big_z).unwrap();
            assert!(v >= last - 1e-15 && v <= 1.0 + 1e-15);
            last = v;
        }
        assert!((last - 1.0).abs() < 1e-6);
    }
    // density integrates to 1 and has mean sqrt(pi/(4k))
    let k = (1.0 - 0.8) / (1.6 - 1.0);
    let h = 1e-3;
    let m: f64 = (0..20_000).map(|i| rho_bound_super((i as f64 + 0.5) * h, 0.2).unwrap() * h).sum();
    assert!((m - 1.0).abs() < 1e-6);
    let _ = k;
    assert!(rho_bound_super(1.0, 0.1).is_err());
}

#[test]
fn h_family_limits() {
    let s = Complex64::new(1.0, 0.0);
    let mb = Complex64::new(0.5, 0.0);
    assert!((h(40.0, s, mb).unwrap() - (mb + s).sqrt()).norm() < 1e-12);
    // small P: (1/(sqrt(pi) P^{3/2}))(1 - P F)
    let d = 0.8;
    let f = kernels_s(d, s).unwrap().big_f;
    let p: f64 = 1e-6;
    let pref = 1.0 / (std::f64::consts::PI.sqrt() * p.powf(1.5));
    let hb = h_bar(d, p, s).unwrap();
    assert!(((hb - pref * (1.0 - p * f)) / pref).norm() < 1e-8);
    // large P: e^{-sP}/(sqrt(pi) P^{3/2}) tanh^2(sqrt(3/2) D)
    let p: f64 = 400.0;
    let hb = h_bar(d, p, s).unwrap() * (s * p).exp() * std::f64::consts::PI.sqrt() * p.powf(1.5);
    let t = (SQRT_3_2 * d).tanh();
    assert!((hb - t * t).norm() < 0.05, "{}", hb);
    // quadrature and closed form of the inner integral agree inside H-bar
    for (d, p) in [(0.5, 0.3), (1.5, 2.0)] {
        let a = h_bar(d, p, Complex64::new(0.7, -0.4)).unwrap();
        let b = h_bar_by_quadrature(d, p, Complex64::new(0.7, -0.4), 1e-13).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
    }
    let adaptive = QuadratureConfig { inner: InnerRule::Adaptive, ..cfg() };
    let a = phi_bar(0.6, 1.0, &cfg()).unwrap().value;
    let b = phi_bar(0.6, 1.0, &adaptive).unwrap().value;
    assert!((a - b).abs() < 1e-8, "{} {}", a, b);
    // the enum front end dispatches to the same functions
    let mu = Complex64::new(1.0, 0.0);
    assert_eq!(h_family(HFamily::H { d: 1.0, mu_b: mb }, mu, &cfg()).unwrap(), h(1.0, s, mb).unwrap());
}

#[test]
fn residuals_on_documented_grids() {
    let ode = residual_check(ResidualKind::OdeH, &ResidualGrid::documented(ResidualKind::OdeH)).unwrap();
    assert!(ode < 1e-6, "ode {}", ode);
    let pde = residual_check(ResidualKind::PdeGStar, &ResidualGrid::documented(ResidualKind::PdeGStar)).unwrap();
    assert!(pde < 1e-5, "pde {}", pde);
    let dif = residual_check(ResidualKind::DiffusionPde, &ResidualGrid::documented(ResidualKind::DiffusionPde)).unwrap();
    assert!(dif < 1e-5, "diffusion {}", dif);
    let lap = residual_check(ResidualKind::LaplaceHHbar, &ResidualGrid::documented(ResidualKind::LaplaceHHbar)).unwrap();
    assert!(lap < 1e-4, "laplace {}", lap);
    // a wrong kernel fails: the ODE with F replaced by 0 is far off
    let g = ResidualGrid::documented(ResidualKind::OdeH);
    let s = g.s;
    let bad = g
        .d
        .iter()
        .map(|&d| {
            let hv = h(d, s, Complex64::new(0.5, 0.0)).unwrap();
            let e = 1e-4;
            let dh = (h(d + e, s, Complex64::new(0.5, 0.0)).unwrap() - h(d - e, s, Complex64::new(0.5, 0.0)).unwrap()) / (2.0 * e);
            (dh - hv * hv + 0.5).norm()
        })
        .fold(0.0, f64::max);
    assert!(bad > 0.1);
}

#[test]
fn critical_constants_meet_at_the_triple_point() {
    let twelfth = 1.0 / 12.0;
    assert!((g_crit2(0.125).unwrap() - twelfth).abs() < 1e-12);
    assert!((g_tilde_crit(2.0 / 9.0).unwrap() - twelfth).abs() < 1e-12);
    assert!((g_hat_crit(4.0 / 81.0).unwrap() - twelfth).abs() < 1e-12);
    assert!((x_crit(0.125).unwrap() - 1.0).abs() < 1e-12);
    assert!((mean_p_super(1.0 / 6.0).unwrap() - 1.0).abs() < 1e-12);
    // past the transition the new line lies below 1/12
    assert!(g_tilde_crit(0.3).unwrap() < twelfth && g_crit2(0.2).unwrap() < twelfth);
    // the subcritical mean perimeter diverges at 1/8
    assert!(mean_p_sub(0.1249).unwrap() > 100.0);
    assert!(critical_value(Critical::XTildeCrit, 0.1).is_err());
}

#[test]
fn ratio_to_tanh_approaches_one() {
    let zs = [0.13, 0.126, 0.1255, 0.1251];
    for big_d in [2.0, 3.0] {
        let r: Vec<f64> = zs
            .iter()
            .map(|&z| {
                let b = beta(z).unwrap();
                let d = (big_d / b).round();
                phi_z(d, z).unwrap() / (d * b).tanh().powi(2)
            })
            .collect();
        assert!(r.windows(2).all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs()), "{:?}", r);
        assert!((r[3] - 1.0).abs() < 0.05);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn f_identity_holds(d in 1e-3f64..20.0, re in -0.0f64..5.0, im in -5.0f64..5.0) {
        let s = Complex64::new(re, im);
        let k = kernels_s(d, s).unwrap();
        let scale = k.big_f.norm().max(1.0);
        prop_assert!((k.big_f - 2.0 * (k.f * k.f - s)).norm() < 1e-11 * scale);
        // Riccati form: f' = s - f^2 + s/2... i.e. F = s - 2 f'
        prop_assert!((k.big_f - (s - 2.0 * k.df)).norm() < 1e-11 * scale);
    }

    #[test]
    fn branch_has_positive_real_part(xi in -50.0f64..50.0) {
        prop_assume!(xi != 0.0);
        let b = branch(xi);
        prop_assert!(b.q.re > 0.0);
        prop_assert!((b.q * b.q - b.s).norm() < 1e-12 * xi.abs().max(1.0));
    }

    #[test]
    fn refinement_does_not_raise_error_estimate(d in 0.1f64..4.0, p in 0.05f64..5.0) {
        let base = QuadratureConfig { nodes: 512, xi_max: 6.0, ..cfg() };
        let finer = QuadratureConfig { nodes: 1024, ..base };
        let wider = QuadratureConfig { xi_max: 8.0, nodes: 1024, ..base };
        let e0 = phi_bar(d, p, &base).unwrap().error;
        let e1 = phi_bar(d, p, &finer).unwrap().error;
        let e2 = phi_bar(d, p, &wider).unwrap().error;
        prop_assert!(e1 <= e0 && e2 <= e1, "{} {} {}", e0, e1, e2);
    }

    #[test]
    fn erfcx_closed_form_matches_quadrature(re in 0.0f64..4.0, im in -4.0f64..4.0, p in 0.05f64..10.0) {
        let f = Complex64::new(re, im);
        let a = inner_k(f, p);
        let b = inner_k_quadrature(f, p, 1e-12).unwrap().value;
        prop_assert!((a - b).norm() < 1e-9 * p.max(1.0), "{} {}", a, b);
    }
}
