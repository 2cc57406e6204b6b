mod common;

use qcurv::operator::{
    apply_t_thm1, apply_t_thm2, compute_cv, Discretization, IterationState, Problem, ProblemSpec, QProfile,
    RadialPolynomial, Variant,
};

const GAMMA_3_4: f64 = 1.2254167024651776;

fn quartic_q() -> QProfile {
    QProfile::QuarticDecay { delta: 2.0, lambda: 1.0 }
}

#[test]
fn normalization_constant_against_closed_form_mass() {
    let disc = Discretization::assemble(3, 40.0, 1024, 2.0).unwrap();
    let kappa = 2.0 * common::lambda1(3);
    let spec = ProblemSpec::new(3, kappa, quartic_q(), RadialPolynomial::zero(), Variant::Thm2).unwrap();
    let problem = Problem::new(&spec, &disc).unwrap();
    let v = vec![0.0; disc.grid.len()];
    let c = compute_cv(&disc.grid, 3, kappa, &problem.log_k(0.0), &v).unwrap();
    // ∫ 2e^{-r⁴} dx over ℝ³ = 2π·Γ(3/4)
    let mass = 2.0 * std::f64::consts::PI * GAMMA_3_4;
    assert!((mass - common::radial_mass(3, |s| 2.0 * (-s.powi(4)).exp(), 8.0)).abs() < 1e-12 * mass);
    let exact = (kappa / mass).ln() / 3.0;
    assert!((c - exact).abs() <= 1e-8, "{c} vs {exact}");
}

#[test]
fn quartic_damped_map_against_reference() {
    let disc = Discretization::assemble(5, 40.0, 1024, 2.0).unwrap();
    let kappa = common::lambda1(5);
    let spec = ProblemSpec::new(5, kappa, QProfile::Constant { value: 24.0 }, RadialPolynomial::zero(), Variant::Thm1)
        .unwrap();
    let problem = Problem::new(&spec, &disc).unwrap();
    let mut state = IterationState::initial(disc.grid.len(), 1.0, kappa);
    state.d0 = -3.0;
    let out = apply_t_thm1(&problem, &state).unwrap();
    assert_eq!(out.a_v, 0.0);

    let raw = |s: f64| 24.0 * (-5.0 * s.powi(4)).exp();
    let scale = kappa / common::radial_mass(5, raw, 4.0);
    let f = |s: f64| scale * raw(s);
    for &target in &[0.0, 1.0, 10.0] {
        let i = common::nearest(disc.grid.nodes(), target);
        let r = disc.grid.nodes()[i];
        let exact = common::potential(5, f, r, 4.0) + (r * r - r.powi(4)) * 3.0 / 10.0;
        assert!((out.v[i] - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "r={r}: {} vs {exact}", out.v[i]);
    }
    // Δ(Tv)(0) = -(n-2)/γ·∫ f|y|^{-2} dy + |d0|
    let moment = common::radial_mass(5, |s| f(s) / (s * s).max(1e-300), 4.0);
    let d0_exact = -3.0 / common::gamma_n(5) * moment + 3.0;
    assert!((out.d0 - d0_exact).abs() <= 1e-8 * d0_exact.abs(), "{} vs {d0_exact}", out.d0);
}

#[test]
fn undamped_map_against_reference() {
    let disc = Discretization::assemble(3, 40.0, 1024, 2.0).unwrap();
    let kappa = 2.0 * common::lambda1(3);
    let spec = ProblemSpec::new(3, kappa, quartic_q(), RadialPolynomial::zero(), Variant::Thm2).unwrap();
    let problem = Problem::new(&spec, &disc).unwrap();
    let mut state = IterationState::initial(disc.grid.len(), 1.0, kappa);
    state.d0 = -1.5;
    let out = apply_t_thm2(&problem, &state).unwrap();
    let mass = 2.0 * std::f64::consts::PI * GAMMA_3_4;
    let f = |s: f64| kappa / mass * 2.0 * (-s.powi(4)).exp();
    for &target in &[0.5, 2.0, 15.0] {
        let i = common::nearest(disc.grid.nodes(), target);
        let r = disc.grid.nodes()[i];
        let exact = common::potential(3, f, r, 6.0) + r * r * 1.5 / 6.0;
        assert!((out.v[i] - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "r={r}: {} vs {exact}", out.v[i]);
    }
    assert!(apply_t_thm1(&problem, &state).is_err());
}

#[test]
fn output_d0_shifts_by_input_magnitude() {
    let disc = Discretization::assemble(3, 40.0, 512, 2.0).unwrap();
    let kappa = common::lambda1(3);
    let spec = ProblemSpec::new(3, kappa, quartic_q(), RadialPolynomial::zero(), Variant::Thm2).unwrap();
    let problem = Problem::new(&spec, &disc).unwrap();
    let v: Vec<f64> = disc.grid.nodes().iter().map(|r| -0.1 * (1.0 + r * r).ln()).collect();
    let base = problem.apply_t(&v, 0.0, kappa).unwrap();
    for d0 in [-4.0, -0.25, 2.0] {
        let out = problem.apply_t(&v, d0, kappa).unwrap();
        assert!((out.d0 - base.d0 - d0.abs()).abs() <= 1e-12 * (1.0 + base.d0.abs()));
        assert_eq!(out.c_v, base.c_v);
    }
}

#[test]
fn density_carries_exactly_the_target_mass() {
    let disc = Discretization::assemble(5, 40.0, 512, 2.0).unwrap();
    let kappa = 0.7 * common::lambda1(5);
    let spec = ProblemSpec::new(
        5,
        kappa,
        QProfile::Constant { value: 24.0 },
        RadialPolynomial::new(vec![0.0, -0.1]),
        Variant::Thm1,
    )
    .unwrap();
    let problem = Problem::new(&spec, &disc).unwrap();
    let v: Vec<f64> = disc.grid.nodes().iter().map(|r| 0.5 / (1.0 + r * r)).collect();
    let out = problem.apply_t(&v, -1.0, kappa).unwrap();
    assert!(((out.mass - kappa) / kappa).abs() <= 1e-12);
    assert!(((disc.grid.integrate(&out.density) - kappa) / kappa).abs() <= 1e-12);
}

#[test]
fn invalid_problems_are_rejected() {
    let zero = QProfile::Constant { value: 0.0 };
    assert!(ProblemSpec::new(3, 1.0, zero, RadialPolynomial::zero(), Variant::Thm2).is_err());
    let q = QProfile::Constant { value: 1.0 };
    assert!(ProblemSpec::new(4, 1.0, q.clone(), RadialPolynomial::zero(), Variant::Thm1).is_err());
    assert!(ProblemSpec::new(5, -1.0, q.clone(), RadialPolynomial::zero(), Variant::Thm1).is_err());
    assert!(ProblemSpec::new(5, 1.0, q.clone(), RadialPolynomial::new(vec![0.0, 0.0, 0.0, 1.0]), Variant::Thm1).is_err());
    assert!(ProblemSpec::new(3, 1.0, q, RadialPolynomial::new(vec![1.0]), Variant::Thm2).is_err());
}

#[test]
fn problem_must_match_discretization_dimension() {
    let disc = Discretization::assemble(3, 40.0, 128, 2.0).unwrap();
    let spec = ProblemSpec::new(5, 1.0, QProfile::Constant { value: 24.0 }, RadialPolynomial::zero(), Variant::Thm1)
        .unwrap();
    assert!(Problem::new(&spec, &disc).is_err());
}
