//! The conductivity contour ω(ξ) = ξ√(1 + iσ/ξ), the kernel g(ξ) that carries
//! the contour and its Jacobian into the force integral, and the time-domain
//! kernel g(−t) obtained by Fourier-series quadrature.
//!
//! All frequencies and conductivities in this module are angular rates in
//! units of c/a.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::lattice::angular_from_user;
use crate::special::{bernoulli_over_factorial, cauchy_taylor, factorial, zeta_half_minus};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Contour ω(ξ) on the principal branch; ω(0) = 0.
pub fn omega(xi: f64, sigma: f64) -> Complex64 {
    if xi == 0.0 {
        return c(0.0);
    }
    Complex64::new(xi * xi, sigma * xi).sqrt()
}

/// dω/dξ = (2ξ + iσ)/(2ω).
pub fn domega(xi: f64, sigma: f64) -> Complex64 {
    Complex64::new(2.0 * xi, sigma) / (2.0 * omega(xi, sigma))
}

/// g(ξ) = ω² ω′/(iξ), zero for ξ < 0.
pub fn g_continuous(xi: f64, sigma: f64) -> Result<Complex64> {
    if xi < 0.0 {
        return Ok(c(0.0));
    }
    if xi == 0.0 {
        if sigma > 0.0 {
            return Err(Error::Singular("g(ξ) diverges as ξ^(-1/2) at ξ = 0".into()));
        }
        return Ok(c(0.0));
    }
    let w = omega(xi, sigma);
    Ok(w * Complex64::new(2.0 * xi, sigma) / (2.0 * I * xi))
}

/// ξ_d = (2/Δt) sin(ξΔt/2) e^{−iξΔt/2}.
pub fn xi_d(xi: f64, dt: f64) -> Complex64 {
    Complex64::from_polar(2.0 / dt * (0.5 * xi * dt).sin(), -0.5 * xi * dt)
}

/// Centred discrete frequency s = (2/Δt) sin(ξΔt/2), the magnitude of ξ_d.
pub fn centered_xi(xi: f64, dt: f64) -> f64 {
    2.0 / dt * (0.5 * xi * dt).sin()
}

/// Which frequency-domain kernel is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelForm {
    /// The kernel of the leapfrog scheme, for which the time-domain force equals
    /// the imaginary-frequency force of the spatially discrete problem.
    Discrete,
    /// The continuum g(ξ) truncated at the Nyquist frequency.
    Continuum,
}

impl KernelForm {
    pub fn name(self) -> &'static str {
        match self {
            KernelForm::Discrete => "discrete",
            KernelForm::Continuum => "continuum",
        }
    }
}

/// W(z) = ω², W′(z) and the frequency variable s(z) for one form, evaluated
/// at complex z.
#[derive(Clone, Copy, Debug)]
struct Form {
    kind: KernelForm,
    sigma: f64,
    dt: f64,
}

impl Form {
    fn parts(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let sig = self.sigma;
        match self.kind {
            KernelForm::Discrete => {
                let half = z * (0.5 * self.dt);
                let s = half.sin() * (2.0 / self.dt);
                let cs = half.cos();
                let w = s * s + I * sig * s * cs;
                let dw = 2.0 * s * cs + I * sig * (cs * cs - s * s * (0.25 * self.dt * self.dt));
                (w, dw, s)
            }
            KernelForm::Continuum => (z * z + I * sig * z, 2.0 * z + I * sig, z),
        }
    }

    /// W′√W/(2is); for σ = 0 the root is taken as s so the function is entire.
    fn g(&self, z: Complex64) -> Complex64 {
        let (w, dw, s) = self.parts(z);
        if self.sigma == 0.0 {
            dw / (2.0 * I)
        } else {
            dw * w.sqrt() / (2.0 * I * s)
        }
    }

    /// Regular factor B with g(ξ) = ξ^{-1/2} B(ξ) near the origin.
    fn b(&self, z: Complex64) -> Complex64 {
        let (w, dw, s) = self.parts(z);
        let isig = I * self.sigma;
        dw * z * isig.sqrt() * (w / (isig * z)).sqrt() / (2.0 * I * s)
    }

    /// The branch point of √W off the origin, reduced to the strip nearest 0.
    fn branch_points(&self) -> Vec<Complex64> {
        if self.sigma == 0.0 {
            return Vec::new();
        }
        match self.kind {
            KernelForm::Continuum => vec![Complex64::new(0.0, -self.sigma)],
            KernelForm::Discrete => {
                let z = Complex64::new(0.0, -2.0 / self.dt) * c(0.5 * self.sigma * self.dt).atanh();
                let p = 2.0 * std::f64::consts::PI / self.dt;
                vec![z, z + p, z - p]
            }
        }
    }

    fn radius(&self, at: f64, cap: f64) -> f64 {
        self.branch_points()
            .iter()
            .map(|z| (z - c(at)).norm())
            .fold(cap, f64::min)
            * 0.25
    }
}

/// Scheme kernel g_d(ξ) = W′√W/(2is) with s = (2/Δt) sin(ξΔt/2),
/// W = s² + iσ s cos(ξΔt/2); periodic in ξ with period 2π/Δt and zero on
/// the upper half of each period.
pub fn g_discrete(xi: f64, sigma: f64, dt: f64) -> Result<Complex64> {
    let period = 2.0 * std::f64::consts::PI / dt;
    let x = xi.rem_euclid(period);
    if x == 0.0 {
        if sigma > 0.0 {
            return Err(Error::Singular("g_d(ξ) diverges as ξ^(-1/2) at ξ = 0".into()));
        }
        return Ok(c(0.0));
    }
    if x > 0.5 * period * (1.0 + 1e-15) {
        return Ok(c(0.0));
    }
    let form = Form { kind: KernelForm::Discrete, sigma, dt };
    Ok(form.g(c(x)))
}

/// Smallest accepted quadrature point count.
pub const MIN_QUADRATURE_POINTS: usize = 1_000_000;
/// Default quadrature point count.
pub const DEFAULT_QUADRATURE_POINTS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourParams {
    /// Conductivity in units of 2πc/a.
    pub sigma_user: f64,
    pub dt: f64,
    /// Points of the periodic trapezoidal rule over [0, 2π/Δt).
    pub quadrature_points: usize,
    /// Number of time samples per table.
    pub len: usize,
    pub form: KernelForm,
}

impl ContourParams {
    pub fn sigma(&self) -> f64 {
        angular_from_user(self.sigma_user)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Configuration(m));
        if !(self.sigma_user >= 0.0) || !self.sigma_user.is_finite() {
            return cfg(format!("sigma must be finite and >= 0, got {}", self.sigma_user));
        }
        if !(self.dt > 0.0) {
            return cfg(format!("dt must be positive, got {}", self.dt));
        }
        if self.quadrature_points < MIN_QUADRATURE_POINTS || !self.quadrature_points.is_multiple_of(2) {
            return cfg(format!(
                "quadrature points must be even and >= {MIN_QUADRATURE_POINTS}, got {}",
                self.quadrature_points
            ));
        }
        if self.len > self.quadrature_points / 8 {
            return cfg(format!(
                "series length {} needs at least {} quadrature points",
                self.len,
                8 * self.len
            ));
        }
        let h = 2.0 * std::f64::consts::PI / (self.quadrature_points as f64 * self.dt);
        let form = Form { kind: self.form, sigma: self.sigma(), dt: self.dt };
        let xi_max = std::f64::consts::PI / self.dt;
        if self.sigma() > 0.0 && h > 0.5 * form.radius(0.0, 2.0 * xi_max) {
            return cfg(format!(
                "{} quadrature points cannot resolve sigma = {} at dt = {}",
                self.quadrature_points, self.sigma_user, self.dt
            ));
        }
        Ok(())
    }
}

/// Time-domain kernel samples: `integer[n] = g(−nΔt)`, `half[n] = g(−(n+½)Δt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSeries {
    pub params: ContourParams,
    pub integer: Vec<Complex64>,
    pub half: Vec<Complex64>,
}

/// Computes g(−τ) = ∫₀^{π/Δt} g(ξ) e^{iξτ} dξ at τ = nΔt and (n + ½)Δt.
///
/// The periodic trapezoidal sum is evaluated by one FFT per table. The ξ^{-1/2}
/// endpoint at ξ = 0 is corrected with the generalized Euler–Maclaurin (zeta
/// function) series and the cutoff at π/Δt with the ordinary Euler–Maclaurin
/// series, using Taylor coefficients obtained by Cauchy integrals.
pub fn kernel_series(params: ContourParams) -> Result<KernelSeries> {
    params.validate()?;
    Ok(KernelSeries { params, integer: kernel_table(&params, 0.0), half: kernel_table(&params, 0.5) })
}

const LOWER_TERMS: usize = 30;
const UPPER_TERMS: usize = 14;
const TAYLOR_POINTS: usize = 64;

fn kernel_table(p: &ContourParams, delta: f64) -> Vec<Complex64> {
    let sigma = p.sigma();
    let form = Form { kind: p.form, sigma, dt: p.dt };
    let nq = p.quadrature_points;
    let m = nq / 2;
    let xi_max = std::f64::consts::PI / p.dt;
    let h = xi_max / m as f64;
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut buf = vec![c(0.0); nq];
    for (k, slot) in buf.iter_mut().enumerate().take(m + 1).skip(1) {
        let weight = if k == m { 0.5 } else { 1.0 };
        let phase = Complex64::from_polar(weight, two_pi * k as f64 * delta / nq as f64);
        *slot = form.g(c(k as f64 * h)) * phase;
    }
    FftPlanner::new().plan_fft_inverse(nq).process(&mut buf);

    // Polynomial (in iτ) coefficients of the endpoint corrections.
    let lower = lower_correction(&form, h, xi_max);
    let upper = upper_correction(&form, h, xi_max);
    (0..p.len)
        .map(|n| {
            let tau = (n as f64 + delta) * p.dt;
            let it = I * tau;
            let horner = |coef: &[Complex64]| coef.iter().rev().fold(c(0.0), |acc, &a| acc * it + a);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let nyquist = if delta == 0.0 { c(sign) } else { Complex64::from_polar(sign, std::f64::consts::PI * delta) };
            buf[n] * h - horner(&lower) - nyquist * horner(&upper)
        })
        .collect()
}

/// Coefficients c_m with (trapezoid − integral) at the origin = Σ c_m (iτ)^m.
fn lower_correction(form: &Form, h: f64, xi_max: f64) -> Vec<Complex64> {
    let mut out = vec![c(0.0); LOWER_TERMS];
    if form.sigma > 0.0 {
        let rho = form.radius(0.0, 2.0 * xi_max);
        let b = cauchy_taylor(|z| form.b(z), c(0.0), rho, TAYLOR_POINTS);
        for (mdeg, slot) in out.iter_mut().enumerate() {
            let mut acc = c(0.0);
            for (j, bj) in b.iter().enumerate().take(LOWER_TERMS - mdeg) {
                let k = j + mdeg;
                acc += zeta_half_minus(k) * h.powf(k as f64 + 0.5) * bj;
            }
            *slot = acc / factorial(mdeg);
        }
    } else {
        // Regular endpoint: trapezoid − integral = −Σ_k β_k h^{2k} f^{(2k−1)}(0).
        let a = cauchy_taylor(|z| form.g(z), c(0.0), 0.25 * xi_max, TAYLOR_POINTS);
        add_euler_maclaurin(&mut out, &a, h, -1.0);
    }
    out
}

/// Coefficients u_m with (trapezoid − integral) at π/Δt = e^{iπτ/Δt} Σ u_m (iτ)^m.
fn upper_correction(form: &Form, h: f64, xi_max: f64) -> Vec<Complex64> {
    let rho = form.radius(xi_max, xi_max);
    let a = cauchy_taylor(|z| form.g(z), c(xi_max), rho, TAYLOR_POINTS);
    let mut out = vec![c(0.0); 2 * UPPER_TERMS];
    add_euler_maclaurin(&mut out, &a, h, 1.0);
    out
}

/// Adds `sign · Σ_k β_k h^{2k} f^{(2k−1)}` where f = (Σ a_j z^j) e^{iτz} and
/// f^{(m)} = m! Σ_j a_j (iτ)^{m−j}/(m−j)!.
fn add_euler_maclaurin(out: &mut [Complex64], a: &[Complex64], h: f64, sign: f64) {
    for k in 1..=UPPER_TERMS {
        let order = 2 * k - 1;
        let beta = bernoulli_over_factorial(k) * h.powi(2 * k as i32) * factorial(order);
        for j in 0..=order {
            let mdeg = order - j;
            if mdeg < out.len() {
                out[mdeg] += sign * beta * a[j] / factorial(mdeg);
            }
        }
    }
}

impl KernelSeries {
    /// Cache-file name keyed by the parameters.
    pub fn cache_name(p: &ContourParams) -> String {
        format!(
            "kernel_{}_s{:e}_dt{:e}_n{}_q{}.txt",
            p.form.name(),
            p.sigma_user,
            p.dt,
            p.len,
            p.quadrature_points
        )
    }

    fn header(p: &ContourParams) -> String {
        format!(
            "# kernel g(-t) form={} sigma_2pi_c_over_a={:e} dt={:e} n={} nq={}",
            p.form.name(),
            p.sigma_user,
            p.dt,
            p.len,
            p.quadrature_points
        )
    }

    /// Plain-text table: header, then `n, Re g, Im g` rows for both tables.
    pub fn to_text(&self) -> String {
        let mut s = Self::header(&self.params);
        s.push('\n');
        for (name, table) in [("integer", &self.integer), ("half", &self.half)] {
            let _ = writeln!(s, "# {name}");
            for (n, g) in table.iter().enumerate() {
                let _ = writeln!(s, "{n}, {:e}, {:e}", g.re, g.im);
            }
        }
        s
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Loads a cached table if the file exists and matches `params`.
    pub fn read_cache(path: &Path, params: &ContourParams) -> Result<Option<KernelSeries>> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let mut lines = text.lines();
        if lines.next() != Some(Self::header(params).as_str()) {
            return Ok(None);
        }
        let mut tables: Vec<Vec<Complex64>> = Vec::new();
        for line in lines {
            if line.starts_with('#') {
                tables.push(Vec::with_capacity(params.len));
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("kernel cache: {e}")));
            if f.len() != 3 || tables.is_empty() {
                return Err(Error::Parse(format!("kernel cache: malformed row `{line}`")));
            }
            tables.last_mut().expect("section").push(Complex64::new(parse(f[1])?, parse(f[2])?));
        }
        if tables.len() != 2 || tables.iter().any(|t| t.len() != params.len) {
            return Ok(None);
        }
        let half = tables.pop().expect("two tables");
        let integer = tables.pop().expect("two tables");
        Ok(Some(KernelSeries { params: *params, integer, half }))
    }
}
