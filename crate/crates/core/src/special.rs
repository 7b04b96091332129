//! Special functions and small numerical building blocks used by the kernel
//! quadrature and the imaginary-frequency oracle.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Even Bernoulli numbers B_2, B_4, ..., B_30.
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// ζ(1/2).
const ZETA_HALF: f64 = -1.460_354_508_809_586_8;

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// B_{2k}/(2k)! for 1 ≤ k ≤ 15.
pub fn bernoulli_over_factorial(k: usize) -> f64 {
    assert!((1..=15).contains(&k), "Bernoulli table covers 1..=15");
    BERNOULLI_EVEN[k - 1] / factorial(2 * k)
}

/// Riemann zeta for real s ≥ 1.5 by Euler–Maclaurin summation.
pub fn zeta_real(s: f64) -> f64 {
    assert!(s >= 1.5, "zeta_real needs s >= 1.5");
    let n = 16.0_f64;
    let mut sum: f64 = (1..16).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for k in 1..=10 {
        sum += bernoulli_over_factorial(k) * rising * npow;
        rising *= (s + 2.0 * k as f64 - 1.0) * (s + 2.0 * k as f64);
        npow /= n * n;
    }
    sum
}

/// ζ(1/2 − k) for k ≥ 0, through the reflection formula.
pub fn zeta_half_minus(k: usize) -> f64 {
    if k == 0 {
        return ZETA_HALF;
    }
    let s = k as f64 + 0.5;
    // Γ(k + 1/2) by upward recurrence from Γ(1/2) = √π.
    let mut gamma = std::f64::consts::PI.sqrt();
    for j in 0..k {
        gamma *= j as f64 + 0.5;
    }
    let cos = std::f64::consts::FRAC_1_SQRT_2 * if matches!(k % 4, 0 | 3) { 1.0 } else { -1.0 };
    2.0 * (2.0 * std::f64::consts::PI).powf(-s) * cos * gamma * zeta_real(s)
}

/// Taylor coefficients of `f` about `z0` from `k` samples on a circle of radius `rho`.
pub fn cauchy_taylor<F>(f: F, z0: Complex64, rho: f64, k: usize) -> Vec<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut v: Vec<Complex64> = (0..k)
        .map(|m| {
            let th = 2.0 * std::f64::consts::PI * m as f64 / k as f64;
            f(z0 + Complex64::from_polar(rho, th))
        })
        .collect();
    FftPlanner::new().plan_fft_forward(k).process(&mut v);
    let mut scale = 1.0 / k as f64;
    v.iter()
        .map(|c| {
            let out = c * scale;
            scale /= rho;
            out
        })
        .collect()
}

/// Gauss–Laguerre nodes and weights for ∫₀^∞ e^{−x} f(x) dx.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - x[i - 2])
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (p1 - p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        x[i] = z;
        w[i] = -1.0 / (pp * nf * p2);
    }
    (x, w)
}
