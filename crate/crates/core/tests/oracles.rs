//! Numerical results compared with values computed independently here.

use gcsim_core::study::graetz_centerline;
use gcsim_core::{contraction_margin, Grid, SpeciesParams, WallField, WallStepper};

/// Graetz eigenpairs by RK4 shooting on `phi'' + phi'/r + mu (1 - r^2) phi = 0`,
/// `phi(0) = 1`, `phi'(0) = 0`. Returns `phi(r)` on `n + 1` nodes of `[0, 1]`.
fn shoot(mu: f64, n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let rhs = |r: f64, p: f64, q: f64| -> (f64, f64) {
        if r == 0.0 {
            (q, -mu * p / 2.0)
        } else {
            (q, -q / r - mu * (1.0 - r * r) * p)
        }
    };
    let (mut p, mut q) = (1.0, 0.0);
    let mut out = vec![p];
    for i in 0..n {
        let r = i as f64 * h;
        let k1 = rhs(r, p, q);
        let k2 = rhs(r + h / 2.0, p + h / 2.0 * k1.0, q + h / 2.0 * k1.1);
        let k3 = rhs(r + h / 2.0, p + h / 2.0 * k2.0, q + h / 2.0 * k2.1);
        let k4 = rhs(r + h, p + h * k3.0, q + h * k3.1);
        p += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        q += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        out.push(p);
    }
    out
}

fn simpson(f: &[f64]) -> f64 {
    let n = f.len() - 1;
    let h = 1.0 / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f[i] * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f[0] + f[n] + inner)
}

/// Series value of the centerline `C(0, z)` for inlet 1 and wall 0.
fn graetz_series(z: f64, modes: usize) -> f64 {
    const N: usize = 4000;
    let end = |mu: f64| *shoot(mu, N).last().unwrap();
    let mut roots = Vec::new();
    let mut a = 0.5;
    while roots.len() < modes {
        let b = a + 0.25;
        if end(a) * end(b) < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if end(lo) * end(m) <= 0.0 {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
    }
    roots
        .iter()
        .map(|&mu| {
            let phi = shoot(mu, N);
            let w = |i: usize| {
                let r = i as f64 / N as f64;
                r * (1.0 - r * r)
            };
            let num: Vec<f64> = (0..=N).map(|i| w(i) * phi[i]).collect();
            let den: Vec<f64> = (0..=N).map(|i| w(i) * phi[i] * phi[i]).collect();
            simpson(&num) / simpson(&den) * (-mu * z).exp()
        })
        .sum()
}

#[test]
fn graetz_leading_eigenvalue() {
    let mu = {
        let end = |mu: f64| *shoot(mu, 4000).last().unwrap();
        let (mut lo, mut hi) = (7.0, 7.6);
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if end(lo) * end(m) <= 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        lo
    };
    // Square of the classical first Graetz eigenvalue 2.70436.
    assert!((mu - 2.704_364_f64.powi(2)).abs() < 1e-4, "{mu}");
}

#[test]
fn graetz_centerline_matches_series() {
    let exact = graetz_series(1.0, 3);
    // Backward Euler in z is first order: extrapolate two axial levels.
    let c1: f64 = graetz_centerline(128, 1024).unwrap();
    let c2: f64 = graetz_centerline(128, 2048).unwrap();
    let extrapolated = 2.0 * c2 - c1;
    assert!(
        ((extrapolated - exact) / exact).abs() < 2e-3,
        "series {exact:e}, extrapolated {extrapolated:e}, coarse {c1:e} {c2:e}"
    );
    assert!(c1 > exact && c2 > exact && c2 < c1);
}

#[test]
fn contraction_constants() {
    let d = contraction_margin(&[
        SpeciesParams::uniform("A", 1.0, -1.0),
        SpeciesParams::uniform("B", 1.0, 1.0),
    ]);
    assert!((d.threshold - 2.0 / 1f64.exp().sqrt()).abs() < 1e-15);
    assert_eq!(format!("{:.9}", d.threshold), "1.213061319");
    assert!((d.mu - 1.0).abs() < 1e-15);
    assert!((d.mu * 1f64.exp().sqrt() / 2.0 - 0.8244).abs() < 1e-4);
    assert!(d.satisfied);
}

#[test]
fn wall_cosine_mode_over_many_steps() {
    let nz = 128;
    let dt = 1e-4;
    let grid = Grid::new(4, nz, dt, 0.1);
    let params = [SpeciesParams::new("A", 1.0, 1.0, 1.0, -1.0)];
    let stepper = WallStepper::new(&params, &grid, dt).unwrap();
    let init: Vec<f64> = (0..=nz)
        .map(|k| (std::f64::consts::PI * grid.z(k)).cos())
        .collect();
    let mut wall = WallField::new(vec![init.clone()], 0.0);
    let zero = vec![vec![0.0; nz + 1]];
    for _ in 0..1000 {
        wall = stepper.step(&wall, &zero, &zero, &params).unwrap();
    }
    // Projection on cos(pi z) with trapezoid weights.
    let num: f64 = (0..=nz)
        .map(|k| {
            let w = if k == 0 || k == nz { 0.5 } else { 1.0 };
            w * wall.values[0][k] * init[k]
        })
        .sum();
    let den: f64 = (0..=nz)
        .map(|k| {
            let w = if k == 0 || k == nz { 0.5 } else { 1.0 };
            w * init[k] * init[k]
        })
        .sum();
    let amp = num / den;
    let exact = (-std::f64::consts::PI.powi(2) * 0.1).exp();
    assert!((amp - exact).abs() < 2e-2, "{amp} vs {exact}");
    // Semi-discrete oracle: implicit Euler on the discrete eigenvalue of the
    // ghost-node Laplacian for the k = 1 mode.
    let h = 1.0 / nz as f64;
    let lam = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    let discrete = (1.0 + dt * lam).powi(-1000);
    assert!((amp - discrete).abs() < 1e-9, "{amp} vs {discrete}");
}
