//! Independent references for the time-domain pipeline.
//!
//! * [`fdfd_solve`]: direct frequency-domain solve of exactly the operator the
//!   leapfrog scheme realizes, with s = (2/Δt) sin(ξΔt/2) and
//!   W = s² + iσ s cos(ξΔt/2) in place of ξ² + iσξ.
//! * [`wick_force`]: stress-tensor force from Green's functions at imaginary
//!   frequency ω = iκ, F = −(1/π) ∫₀^∞ κ² Re X(iκ) dκ.
//! * [`mode_sum_force_1d`]: cutoff-regularized sum over continuum cavity modes.
//! * [`vacuum_green_1d`]: the analytic 1D vacuum Green's function.

use num_complex::Complex64;

use crate::banded::Banded;
use crate::engine::{Gauge, SourceSpec};
use crate::error::{Error, Result};
use crate::kernel::{centered_xi, omega};
use crate::lattice::{build_grid, Axis, Component, FieldKind, GeometrySpec, MaterialGrid, PlateSurface, Surface};
use crate::special::gauss_laguerre;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// e^{iω|d|}/(iω) with ω = ω(ξ) on the conductivity contour.
pub fn vacuum_green_1d(xi: f64, separation: f64, sigma: f64) -> Result<Complex64> {
    if !(xi > 0.0) {
        return Err(Error::Singular("vacuum Green's function needs ξ > 0".into()));
    }
    let w = omega(xi, sigma);
    Ok((I * w * separation.abs()).exp() / (I * w))
}

/// The discrete curl −∇×E as sparse rows: for every H location, the E nodes it
/// reads with their coefficients. The magnetic curl is its negative transpose.
fn curl_e(grid: &MaterialGrid) -> Vec<Vec<Vec<(usize, f64)>>> {
    let inv = 1.0 / grid.dx;
    let [nx, ny] = grid.cells;
    if grid.dimensionality == 1 {
        return vec![(0..nx).map(|i| vec![(i + 1, -inv), (i, inv)]).collect()];
    }
    let ey = ny + 1;
    let hx = (0..(nx + 1) * ny)
        .map(|k| {
            let (i, j) = (k / ny, k % ny);
            vec![(i * ey + j + 1, -inv), (i * ey + j, inv)]
        })
        .collect();
    let hy = (0..nx * ey)
        .map(|k| {
            let (i, j) = (k / ey, k % ey);
            vec![((i + 1) * ey + j, inv), (i * ey + j, -inv)]
        })
        .collect();
    vec![hx, hy]
}

/// Frequency-domain fields of a unit impulse, referenced to the source time.
#[derive(Clone, Debug, PartialEq)]
pub struct FdfdField {
    pub e: Vec<Complex64>,
    pub h: Vec<Vec<Complex64>>,
}

impl FdfdField {
    pub fn value(&self, grid: &MaterialGrid, c: Component, index: usize) -> Complex64 {
        match c.kind {
            FieldKind::E => self.e[index],
            FieldKind::H => self.h[grid.h_slot(c.axis).expect("present")][index],
        }
    }
}

/// Largest grid accepted by the direct solver.
pub const FDFD_MAX_CELLS: usize = 10_000;

/// Solves the discrete frequency-domain problem whose solution is the
/// discrete-time transform of [`crate::engine::run_impulse`] for `source`.
///
/// Both gauges reduce to one system on the E nodes,
/// `[CᵀM⁻¹C − Wε] Ê = rhs`, with C = −∇×E of [`curl_e`]:
/// the electric gauge has rhs = i s Ĵ and Ĥ = CÊ/(−i s μ);
/// the magnetic gauge has rhs = CᵀK̂/μ and Ĥ = (CÊ − K̂)/((−i s + σ cos(ξΔt/2)) μ).
pub fn fdfd_solve(grid: &MaterialGrid, xi: f64, source: &SourceSpec) -> Result<FdfdField> {
    let cells: usize = grid.cells.iter().take(grid.dimensionality).product();
    if cells > FDFD_MAX_CELLS {
        return Err(Error::InvalidArgument(format!("{cells} cells exceed the direct-solve limit")));
    }
    if source.component.kind == FieldKind::E && grid.conductor[source.index] {
        return Err(Error::Geometry("source sits on a conductor".into()));
    }
    let dt = grid.dt;
    let s = centered_xi(xi, dt);
    let cs = (0.5 * xi * dt).cos();
    let w = Complex64::new(s * s, grid.sigma * s * cs);
    let ne = grid.len(grid.e_component());
    let band = if grid.dimensionality == 1 { 1 } else { grid.cells[1] + 1 };
    let curl = curl_e(grid);

    let mut m = Banded::zeros(ne, band, band);
    for i in 0..ne {
        if grid.conductor[i] {
            m.add(i, i, Complex64::new(1.0, 0.0));
        } else {
            m.add(i, i, -w * grid.eps[i]);
        }
    }
    for (slot, rows) in curl.iter().enumerate() {
        for (k, row) in rows.iter().enumerate() {
            let inv_mu = 1.0 / grid.mu[slot][k];
            for &(a, ca) in row {
                if grid.conductor[a] {
                    continue;
                }
                for &(b, cb) in row {
                    if !grid.conductor[b] {
                        m.add(a, b, Complex64::new(ca * cb * inv_mu, 0.0));
                    }
                }
            }
        }
    }

    let unit = 1.0 / grid.dx.powi(grid.dimensionality as i32);
    let mut rhs = vec![Complex64::new(0.0, 0.0); ne];
    let mut k_hat: Option<(usize, usize)> = None;
    match source.gauge {
        Gauge::Electric => rhs[source.index] = I * s * unit,
        Gauge::Magnetic => {
            let slot = grid.h_slot(source.component.axis).expect("H source");
            for &(a, ca) in &curl[slot][source.index] {
                if !grid.conductor[a] {
                    rhs[a] += Complex64::new(ca * unit / grid.mu[slot][source.index], 0.0);
                }
            }
            k_hat = Some((slot, source.index));
        }
    }
    m.solve(&mut rhs)?;
    let e = rhs;
    let h = curl
        .iter()
        .enumerate()
        .map(|(slot, rows)| {
            rows.iter()
                .enumerate()
                .map(|(k, row)| {
                    let ce: Complex64 = row.iter().map(|&(a, ca)| e[a] * ca).sum();
                    let mu = grid.mu[slot][k];
                    match source.gauge {
                        Gauge::Electric => ce / (-I * s * mu),
                        Gauge::Magnetic => {
                            let drive = if k_hat == Some((slot, k)) { ce - unit } else { ce };
                            drive / ((-I * s + grid.sigma * cs) * mu)
                        }
                    }
                })
                .collect()
        })
        .collect();
    Ok(FdfdField { e, h })
}

/// Node-count schedule for the imaginary-frequency quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WickQuadrature {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
}

impl Default for WickQuadrature {
    fn default() -> Self {
        WickQuadrature { initial_nodes: 8, max_nodes: 256, rel_tol: 1e-6 }
    }
}

/// Diagonal of the lattice Green's function at imaginary frequency iκ for
/// `(C_of ∘ m_a⁻¹ ∘ C_ofᵀ-like) + κ² m_b` on a 1D chain, via a tridiagonal
/// solve with unit source `1/Δx` at `site`. `coupling[k]` is the inverse
/// material on link k between sites k and k+1; `onsite` the material on sites;
/// `free` marks unknowns (fixed sites are zero).
fn chain_green(coupling: &[f64], onsite: &[f64], free: &[bool], dx: f64, kappa: f64, site: usize) -> f64 {
    let n = onsite.len();
    let inv2 = 1.0 / (dx * dx);
    let mut diag = vec![1.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for i in 0..n {
        if !free[i] {
            continue;
        }
        let left = if i > 0 { coupling[i - 1] } else { 0.0 };
        let right = if i + 1 < n { coupling[i] } else { 0.0 };
        diag[i] = (left + right) * inv2 + kappa * kappa * onsite[i];
    }
    for k in 0..n.saturating_sub(1) {
        if free[k] && free[k + 1] {
            off[k] = -coupling[k] * inv2;
        }
    }
    let mut rhs = vec![0.0; n];
    rhs[site] = 1.0 / dx;
    // Thomas algorithm; the matrix is symmetric positive definite.
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - off[i - 1] * c[i - 1];
        c[i] = if i + 1 < n { off[i] / den } else { 0.0 };
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x[site]
}

/// Imaginary-frequency Green's functions of a 1D grid at E node `node`:
/// (Gᴱ at the node, Gᴴ averaged over the half nodes on either side).
fn green_1d(grid: &MaterialGrid, node: usize, kappa: f64) -> (f64, f64) {
    let mu = &grid.mu[0];
    let inv_mu: Vec<f64> = mu.iter().map(|m| 1.0 / m).collect();
    let free_e: Vec<bool> = grid.conductor.iter().map(|c| !c).collect();
    let ge = chain_green(&inv_mu, &grid.eps, &free_e, grid.dx, kappa, node);
    // H sites couple through interior E nodes; a pinned E node cuts the link.
    let nh = mu.len();
    let inv_eps: Vec<f64> = (1..nh).map(|i| if grid.conductor[i] { 0.0 } else { 1.0 / grid.eps[i] }).collect();
    let free_h = vec![true; nh];
    let gh = 0.5
        * (chain_green(&inv_eps, mu, &free_h, grid.dx, kappa, node - 1)
            + chain_green(&inv_eps, mu, &free_h, grid.dx, kappa, node));
    (ge, gh)
}

/// Diagonal Green's function of the infinite uniform 1D lattice at iκ for
/// `(1/m₁)·Laplacian + κ² m₂`: m₁/(2k√(1 + k²Δx²/4)) with k = κ√(m₁m₂).
fn infinite_chain_green(m1: f64, m2: f64, dx: f64, kappa: f64) -> f64 {
    let k = kappa * (m1 * m2).sqrt();
    m1 / (2.0 * k * (1.0 + 0.25 * k * k * dx * dx).sqrt())
}

/// Stress integrand X(iκ) for force component x on a 1D grid.
fn stress_integrand(grid: &MaterialGrid, surface: &Surface, kappa: f64) -> f64 {
    let (eps_b, mu_b) = grid.background;
    let mut x = 0.0;
    for p in &surface.points {
        let (ge, gh) = green_1d(grid, p.node[0], kappa);
        let e = grid.eps[p.node[0]];
        let m = grid.mu[0][p.node[0]];
        let mut v = -0.5 * (e * ge + m * gh);
        if surface.vacuum_subtracted {
            let ve = infinite_chain_green(mu_b, eps_b, grid.dx, kappa);
            let vh = infinite_chain_green(eps_b, mu_b, grid.dx, kappa);
            v -= -0.5 * (eps_b * ve + mu_b * vh);
        }
        x += p.weight * v;
    }
    x
}

/// Force on the body enclosed by `surface` from the imaginary-frequency
/// stress tensor of a 1D grid. Nodes are doubled until two successive
/// Gauss–Laguerre estimates agree to `quad.rel_tol`.
pub fn wick_force(grid: &MaterialGrid, surface: &Surface, quad: WickQuadrature) -> Result<f64> {
    if grid.dimensionality != 1 {
        return Err(Error::InvalidArgument("the imaginary-frequency oracle is 1D only".into()));
    }
    if surface.points.iter().any(|p| p.normal != Axis::X) {
        return Err(Error::InvalidArgument("1D stress points need normal x".into()));
    }
    // The integrand decays like e^{−2κd}, d the shortest distance from a
    // stress point to a conductor.
    let d = surface
        .points
        .iter()
        .map(|p| {
            let i = p.node[0];
            let left = (0..i).rev().find(|&k| grid.conductor[k]).map_or(i, |k| i - k);
            let right = (i..=grid.cells[0]).find(|&k| grid.conductor[k]).map_or(grid.cells[0] - i, |k| k - i);
            left.min(right) as f64 * grid.dx
        })
        .fold(f64::INFINITY, f64::min);
    let alpha = 2.0 * d;
    let estimate = |n: usize| -> f64 {
        let (x, w) = gauss_laguerre(n);
        let mut acc = 0.0;
        for (xk, wk) in x.iter().zip(&w) {
            if *wk == 0.0 {
                continue;
            }
            let kappa = xk / alpha;
            let f = kappa * kappa * stress_integrand(grid, surface, kappa);
            acc += (wk.ln() + xk).exp() * f;
        }
        -acc / (alpha * std::f64::consts::PI)
    };
    let mut n = quad.initial_nodes.max(2);
    let mut prev = estimate(n);
    let mut change = f64::INFINITY;
    while n * 2 <= quad.max_nodes {
        n *= 2;
        let next = estimate(n);
        change = (next - prev).abs();
        if change <= quad.rel_tol * next.abs() + 1e-14 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::BudgetExceeded { best_delta: change / prev.abs(), steps: n })
}

/// Imaginary-frequency force on the left plate of two 1D perfect-conductor
/// plates a distance `h` apart, single stress point with vacuum subtraction.
/// Positive values point toward the other plate.
pub fn wick_force_1d(h: f64, resolution: usize, quad: WickQuadrature) -> Result<f64> {
    let geom = GeometrySpec::plates_1d(h, h, PlateSurface::SinglePoint);
    let grid = build_grid(&geom, resolution)?;
    let surface = crate::lattice::surface_points(&geom, &grid)?;
    wick_force(&grid, &surface, quad)
}

/// d/dL of the regularized zero-point energy of a continuum 1D cavity of width L.
fn cavity_pressure(l: f64) -> f64 {
    // E_Λ = ½ Σ ωₙ e^{−ωₙ/Λ}, ωₙ = nπ/L; the bulk term LΛ²/(2π) is removed
    // and the remaining Λ^{-2} error cancelled by Richardson extrapolation.
    let at = |lambda: f64| -> f64 {
        let mut sum = 0.0;
        let mut n = 1usize;
        loop {
            let w = n as f64 * std::f64::consts::PI / l;
            let decay = (-w / lambda).exp();
            let term = 0.5 * decay * (-w / l) * (1.0 - w / lambda);
            sum += term;
            if decay < 1e-20 && n > 10 {
                break;
            }
            n += 1;
        }
        sum - lambda * lambda / (2.0 * std::f64::consts::PI)
    };
    let lambda = 200.0 / l;
    (4.0 * at(2.0 * lambda) - at(lambda)) / 3.0
}

/// Mode-sum force on the left of two ideal 1D mirrors a distance `h` apart,
/// optionally with a closed outer cavity of width `outer` on its left.
/// Positive values point toward the other plate.
pub fn mode_sum_force_1d(h: f64, outer: Option<f64>) -> f64 {
    // Force on the left plate: +dE_in/dh from the inner cavity and
    // −dE_out/dL from the outer one.
    cavity_pressure(h) - outer.map_or(0.0, cavity_pressure)
}
