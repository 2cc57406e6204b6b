mod common;

use std::sync::Arc;

use proptest::prelude::*;
use qcurv::radial::{
    integrate_radial, radial_laplacian, reconstruct_from_laplacian, RadialFunction, RadialGrid, TailModel,
};

fn grid(n: u32, r_max: f64, m: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(n, r_max, m, 2.0).unwrap())
}

#[test]
fn gaussian_mass_in_three_dimensions() {
    let g = grid(3, 100.0, 2048);
    let f = RadialFunction::from_fn(g.clone(), |r| (-r * r).exp()).unwrap();
    let exact = std::f64::consts::PI.powf(1.5);
    let got = integrate_radial(&g, f.values(), None).unwrap().value;
    assert!((got - exact).abs() / exact <= 1e-8, "{got} vs {exact}");
}

#[test]
fn bubble_mass_matches_sphere_constant() {
    // (n-1)!·e^{nu} with u = log(2/(1+r²)) integrates to (n-1)!·|Sⁿ|
    let g = grid(3, 100.0, 2048);
    let f: Vec<f64> = g.nodes().iter().map(|r| 2.0 * (2.0 / (1.0 + r * r)).powi(3)).collect();
    let got = integrate_radial(&g, &f, Some(&TailModel::PowerLaw { exponent: 6.0 })).unwrap().value;
    let exact = 2.0 * std::f64::consts::PI.powi(2) * 2.0;
    assert!((exact - common::lambda1(3)).abs() < 1e-12);
    assert!((got - exact).abs() / exact <= 1e-6, "{got} vs {exact}");
}

#[test]
fn quartic_decay_against_reference_rule() {
    let g = grid(5, 100.0, 2048);
    let f: Vec<f64> = g.nodes().iter().map(|r| (-r.powi(4)).exp()).collect();
    let got = integrate_radial(&g, &f, None).unwrap().value;
    let exact = common::radial_mass(5, |s| (-s.powi(4)).exp(), 20.0);
    assert!((got - exact).abs() / exact <= 1e-8, "{got} vs {exact}");
}

#[test]
fn nan_integrand_is_rejected() {
    let g = grid(3, 50.0, 128);
    let mut f = vec![1.0; g.len()];
    f[7] = f64::NAN;
    assert!(integrate_radial(&g, &f, None).is_err());
}

#[test]
fn laplacian_of_quadratic_and_gaussian() {
    let g = grid(4, 30.0, 1024);
    let q = RadialFunction::from_fn(g.clone(), |r| r * r).unwrap();
    let lap = radial_laplacian(&q).unwrap();
    for v in lap.values() {
        assert!((v - 8.0).abs() < 1e-6, "{v}");
    }
    let e = RadialFunction::from_fn(g.clone(), |r| (-r * r).exp()).unwrap();
    let lap = radial_laplacian(&e).unwrap();
    for (r, v) in g.nodes().iter().zip(lap.values()) {
        let exact = (4.0 * r * r - 8.0) * (-r * r).exp();
        assert!((v - exact).abs() < 1e-4, "r = {r}: {v} vs {exact}");
    }
}

#[test]
fn reconstruction_inverts_laplacian() {
    let g = grid(5, 100.0, 2048);
    let f = |r: f64| (1.0 + r * r).ln();
    let lap = RadialFunction::from_fn(g.clone(), |r| {
        let q = 1.0 + r * r;
        // f'' + 4f'/r for n = 5
        (2.0 * q - 4.0 * r * r) / (q * q) + 8.0 / q
    })
    .unwrap();
    let back = reconstruct_from_laplacian(&lap).unwrap();
    for (r, v) in g.nodes().iter().zip(back.values()) {
        if *r <= 50.0 {
            let exact = f(*r);
            assert!((v - exact).abs() <= 1e-4 * (1.0 + exact.abs()), "r = {r}: {v} vs {exact}");
        }
    }
}

#[test]
fn interpolation_is_exact_at_nodes() {
    let g = grid(3, 40.0, 256);
    let f = RadialFunction::from_fn(g.clone(), |r| (1.0 + r).ln()).unwrap();
    for (r, v) in g.nodes().iter().zip(f.values()) {
        assert_eq!(f.eval(*r).unwrap(), *v);
    }
}

#[test]
fn csv_round_trip_is_lossless() {
    let g = grid(3, 40.0, 128);
    let f = RadialFunction::from_fn(g.clone(), |r| (r * 0.37).sin() / (1.0 + r)).unwrap();
    let mut buf = Vec::new();
    f.write_csv(&mut buf, "f").unwrap();
    let back = RadialFunction::read_csv(g, std::io::Cursor::new(buf)).unwrap();
    assert_eq!(back.values(), f.values());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integration_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, k in 0.2f64..3.0) {
        let g = grid(3, 60.0, 256);
        let f: Vec<f64> = g.nodes().iter().map(|r| (-k * r * r).exp()).collect();
        let h: Vec<f64> = g.nodes().iter().map(|r| 1.0 / (1.0 + r.powi(6))).collect();
        let mix: Vec<f64> = f.iter().zip(&h).map(|(x, y)| a * x + b * y).collect();
        let lhs = integrate_radial(&g, &mix, None).unwrap().value;
        let rhs = a * integrate_radial(&g, &f, None).unwrap().value + b * integrate_radial(&g, &h, None).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}
