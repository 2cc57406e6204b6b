//! Reference computations for the integration tests. Nothing here calls into the
//! library's quadrature, kernel or interpolation code: the rules are composite
//! Gauss–Legendre on fine panels with their own substitutions.
#![allow(dead_code)]

pub mod schema;

use std::f64::consts::PI;

/// Gauss–Legendre nodes/weights on [-1, 1] via Newton iteration on P_order.
pub fn gauss(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(order);
    let mut w = Vec::with_capacity(order);
    for i in 0..order {
        let mut z = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..200 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x.push(z);
        w.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

/// Composite Gauss–Legendre of `g` over `[a, b]` with `panels` equal panels.
pub fn composite(g: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mut local = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            local += wi * g(lo + 0.5 * h * (xi + 1.0));
        }
        sum += 0.5 * h * local;
    }
    sum
}

/// `|S^k|` from `|S^0| = 2`, `|S^1| = 2π` and `|S^k| = 2π/(k-1)·|S^{k-2}|`.
pub fn sphere(k: u32) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere(k - 2),
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn lambda1(n: u32) -> f64 {
    factorial(n - 1) * sphere(n)
}

pub fn gamma_n(n: u32) -> f64 {
    lambda1(n) / 2.0
}

/// `∫_{B_R} f(|y|) dy` with `s = R·x²` so the origin is well resolved.
pub fn radial_mass(n: u32, f: impl Fn(f64) -> f64, r_max: f64) -> f64 {
    let g = |x: f64| {
        let s = r_max * x * x;
        f(s) * s.powi(n as i32 - 1) * 2.0 * r_max * x
    };
    sphere(n - 1) * composite(g, 0.0, 1.0, 800, 20)
}

/// `n = 3` ring average, written directly from the antiderivative.
pub fn ring_n3(r: f64, s: f64) -> f64 {
    if r == 0.0 || s == 0.0 {
        return -(r.max(s)).ln();
    }
    let a = (r + s).powi(2) * (r + s).ln();
    let d = (r - s).abs();
    let b = if d > 0.0 { d * d * d.ln() } else { 0.0 };
    -((a - b) / (4.0 * r * s) - 0.5)
}

/// Ring average for any `n` by composite quadrature in `θ = π·τ⁴`.
pub fn ring(n: u32, r: f64, s: f64) -> f64 {
    if r == 0.0 || s == 0.0 {
        return -(r.max(s)).ln();
    }
    let num = |tau: f64| {
        let theta = PI * tau.powi(4);
        let jac = 4.0 * PI * tau.powi(3);
        let d2 = r * r + s * s - 2.0 * r * s * theta.cos();
        let d2 = if d2 > 0.0 { d2 } else { (2.0 * r * (theta / 2.0).sin()).powi(2) };
        -0.5 * d2.ln() * theta.sin().powi(n as i32 - 2) * jac
    };
    let den = |tau: f64| {
        let theta = PI * tau.powi(4);
        theta.sin().powi(n as i32 - 2) * 4.0 * PI * tau.powi(3)
    };
    composite(num, 0.0, 1.0, 60, 20) / composite(den, 0.0, 1.0, 60, 20)
}

/// `(1/γₙ)∫_{B_R} log(1/|x-y|) f(|y|) dy` at `|x| = r`, splitting at `s = r`.
pub fn potential(n: u32, f: impl Fn(f64) -> f64, r: f64, r_max: f64) -> f64 {
    let kern = |s: f64| if n == 3 { ring_n3(r, s) } else { ring(n, r, s) };
    let g = |s: f64| kern(s) * f(s) * s.powi(n as i32 - 1);
    let mut total = 0.0;
    if r > 0.0 && r < r_max {
        // graded towards both ends of each piece
        total += composite(|x| g(r * (1.0 - (1.0 - x) * (1.0 - x))) * 2.0 * r * (1.0 - x), 0.0, 1.0, 200, 16);
        let span = r_max - r;
        total += composite(|x| g(r + span * x * x) * 2.0 * span * x, 0.0, 1.0, 400, 16);
    } else {
        total += composite(|x| g(r_max * x * x) * 2.0 * r_max * x, 0.0, 1.0, 400, 16);
    }
    sphere(n - 1) * total / gamma_n(n)
}

/// Index of the grid node closest to `r`.
pub fn nearest(nodes: &[f64], r: f64) -> usize {
    let mut best = 0;
    for (i, x) in nodes.iter().enumerate() {
        if (x - r).abs() < (nodes[best] - r).abs() {
            best = i;
        }
    }
    best
}
