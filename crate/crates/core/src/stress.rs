//! Surface-integrated responses Γ and the time-domain force.
//!
//! For force component i and a stress point with normal j and weight dS_j,
//!
//! ```text
//! Γᴱᵢ += dS_j ε (E_{i,j} − ½ δ_ij Σ_k E_{k,k})
//! Γᴴᵢ += dS_j μ (H_{i,j} − ½ δ_ij Σ_k H_{k,k})
//! ```
//!
//! where X_{i,j} is component i of the field radiated by a unit dipole along
//! j placed at the point itself. Components absent from the lattice
//! contribute zero. Electric responses come from electric-gauge runs and
//! magnetic responses from magnetic-gauge runs; both are sampled at delays
//! (k + ½)Δt, so both pair with the half-step kernel:
//!
//! ```text
//! F_i(t_k) = (1/π) Σ_{k′ ≤ k} Im[g(−t_k′) (Γᴱᵢ + Γᴴᵢ)(t_k′)] Δt.
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::engine::{run_impulse, Gauge, Probe, SourceSpec};
use crate::error::{Error, Result};
use crate::kernel::KernelSeries;
use crate::lattice::{
    build_grid, Axis, Component, FieldKind, GeometrySpec, MaterialGrid, Surface, SurfacePoint, SurfaceSpec,
};

/// One simulation: a unit dipole `source` at lattice location `site`,
/// recording the listed `(component, location)` probes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourceRequest {
    pub gauge: Gauge,
    pub source: Component,
    pub site: usize,
    pub probes: Vec<(Component, usize)>,
}

/// Recorded probe series of one simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct Response {
    pub gauge: Gauge,
    pub source: Component,
    pub site: usize,
    pub probes: Vec<((Component, usize), Vec<f64>)>,
}

fn gauge_of(kind: FieldKind) -> Gauge {
    match kind {
        FieldKind::E => Gauge::Electric,
        FieldKind::H => Gauge::Magnetic,
    }
}

fn lattice_components(grid: &MaterialGrid, kind: FieldKind) -> Vec<Component> {
    match kind {
        FieldKind::E => vec![grid.e_component()],
        FieldKind::H => grid.h_axes().iter().map(|&a| Component::h(a)).collect(),
    }
}

/// Terms `(weight factor, source, probe)` of the stress expression for one
/// point and one field kind, before the material and dS factors.
fn stress_terms(grid: &MaterialGrid, kind: FieldKind, i: Axis, normal: Axis) -> Vec<(f64, Component, Component)> {
    let present = lattice_components(grid, kind);
    let has = |a: Axis| present.iter().any(|c| c.axis == a);
    let comp = |a: Axis| Component { kind, axis: a };
    let mut out = Vec::new();
    if has(i) && has(normal) {
        out.push((1.0, comp(normal), comp(i)));
    }
    if i == normal {
        for c in &present {
            out.push((-0.5, *c, *c));
        }
    }
    out
}

fn sites_at(grid: &MaterialGrid, c: Component, node: [usize; 2]) -> Result<Vec<usize>> {
    grid.sites(c, node)
        .ok_or_else(|| Error::Geometry(format!("component {:?} has no lattice sites at node {:?}", c, node)))
}

/// Source/probe location pairs of one stress term, each with its share of
/// the term. A field at a node is the mean over the component's sites there:
/// self-correlations are averaged site by site, cross-correlations over all
/// site pairs.
fn term_pairs(grid: &MaterialGrid, src: Component, probe: Component, node: [usize; 2]) -> Result<Vec<(usize, usize, f64)>> {
    let s = sites_at(grid, src, node)?;
    if src == probe {
        let w = 1.0 / s.len() as f64;
        return Ok(s.into_iter().map(|i| (i, i, w)).collect());
    }
    let p = sites_at(grid, probe, node)?;
    let w = 1.0 / (s.len() * p.len()) as f64;
    Ok(s.iter().flat_map(|&i| p.iter().map(move |&j| (i, j, w))).collect())
}

/// Every simulation needed for force components `axes`, in a fixed order.
/// Points that share a lattice site share its simulation.
pub fn required_sources(grid: &MaterialGrid, surface: &Surface, axes: &[Axis]) -> Result<Vec<SourceRequest>> {
    let mut map: BTreeMap<(Gauge, Component, usize), BTreeSet<(Component, usize)>> = BTreeMap::new();
    for p in &surface.points {
        for &i in axes {
            for kind in [FieldKind::E, FieldKind::H] {
                for (_, src, probe) in stress_terms(grid, kind, i, p.normal) {
                    for (s, q, _) in term_pairs(grid, src, probe, p.node)? {
                        map.entry((gauge_of(kind), src, s)).or_default().insert((probe, q));
                    }
                }
            }
        }
    }
    Ok(map
        .into_iter()
        .map(|((gauge, source, site), probes)| SourceRequest { gauge, source, site, probes: probes.into_iter().collect() })
        .collect())
}

/// Runs every request for `n_steps` steps. Requests run concurrently on the
/// current rayon pool; the output order always matches `requests`.
pub fn run_requests(grid: &MaterialGrid, requests: &[SourceRequest], n_steps: usize) -> Result<Vec<Response>> {
    requests.par_iter().map(|r| run_request(grid, r, n_steps)).collect()
}

/// Runs a single request.
pub fn run_request(grid: &MaterialGrid, r: &SourceRequest, n_steps: usize) -> Result<Response> {
    let src = SourceSpec::site(grid, r.gauge, r.source, r.site)?;
    let probes: Vec<Probe> = r.probes.iter().map(|&(component, index)| Probe { component, index }).collect();
    let series = run_impulse(grid, &src, n_steps, &probes)?;
    Ok(Response { gauge: r.gauge, source: r.source, site: r.site, probes: r.probes.iter().copied().zip(series).collect() })
}

/// Surface-integrated responses for one force component.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSeries {
    pub axis: Axis,
    pub dt: f64,
    /// Γᴱ at delays (k + ½)Δt.
    pub e: Vec<f64>,
    /// Γᴴ at delays (k + ½)Δt.
    pub h: Vec<f64>,
    pub vacuum_subtracted: bool,
}

impl GammaSeries {
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    /// Delay of sample k.
    pub fn time(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dt
    }

    /// Γᴱ + Γᴴ.
    pub fn total(&self) -> Vec<f64> {
        self.e.iter().zip(&self.h).map(|(a, b)| a + b).collect()
    }

    /// This series minus a discretized-vacuum reference of at least equal length.
    pub fn subtract(&self, vacuum: &GammaSeries) -> Result<GammaSeries> {
        if vacuum.len() < self.len() || vacuum.axis != self.axis || !same_dt(vacuum.dt, self.dt) {
            return Err(Error::InvalidArgument("vacuum reference does not match the series".into()));
        }
        Ok(GammaSeries {
            axis: self.axis,
            dt: self.dt,
            e: self.e.iter().zip(&vacuum.e).map(|(a, b)| a - b).collect(),
            h: self.h.iter().zip(&vacuum.h).map(|(a, b)| a - b).collect(),
            vacuum_subtracted: true,
        })
    }
}

fn same_dt(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Combines responses into Γᴱᵢ and Γᴴᵢ over the surface.
pub fn gamma_accumulate(responses: &[Response], surface: &Surface, grid: &MaterialGrid, axis: Axis) -> Result<GammaSeries> {
    let len = responses.first().and_then(|r| r.probes.first()).map_or(0, |p| p.1.len());
    if responses.iter().flat_map(|r| &r.probes).any(|p| p.1.len() != len) {
        return Err(Error::InvalidArgument("response series differ in length".into()));
    }
    let mut index: HashMap<(Gauge, Component, usize, Component, usize), &Vec<f64>> = HashMap::new();
    for r in responses {
        for ((c, q), series) in &r.probes {
            index.insert((r.gauge, r.source, r.site, *c, *q), series);
        }
    }
    let mut e = vec![0.0; len];
    let mut h = vec![0.0; len];
    for p in &surface.points {
        for (kind, acc) in [(FieldKind::E, &mut e), (FieldKind::H, &mut h)] {
            let gauge = gauge_of(kind);
            for (factor, src, probe) in stress_terms(grid, kind, axis, p.normal) {
                for (s, q, share) in term_pairs(grid, src, probe, p.node)? {
                    let series = index.get(&(gauge, src, s, probe, q)).ok_or_else(|| {
                        Error::IncompleteCampaign(format!(
                            "no {} gauge response of {:?} at site {q} to a {:?} source at site {s}",
                            gauge.name(),
                            probe,
                            src
                        ))
                    })?;
                    let w = factor * share * material(grid, probe, q) * p.weight;
                    for (a, v) in acc.iter_mut().zip(series.iter()) {
                        *a += w * v;
                    }
                }
            }
        }
    }
    Ok(GammaSeries { axis, dt: grid.dt, e, h, vacuum_subtracted: false })
}

fn material(grid: &MaterialGrid, c: Component, site: usize) -> f64 {
    match c.kind {
        FieldKind::E => grid.eps[site],
        FieldKind::H => grid.mu[grid.h_slot(c.axis).expect("present")][site],
    }
}

/// A 1D vacuum domain matching `grid` (Δx, Δt, σ, background) whose walls are
/// far enough from its centre node that no reflection returns within
/// `n_steps` steps. Returns the grid and its centre node.
pub fn vacuum_domain(grid: &MaterialGrid, n_steps: usize) -> Result<(MaterialGrid, [usize; 2])> {
    if grid.dimensionality != 1 {
        return Err(Error::Configuration("vacuum references are built in 1D only".into()));
    }
    // Support grows one cell per step, so a round trip to a wall d cells away
    // takes 2d steps.
    let half = n_steps / 2 + 2;
    let res = (1.0 / grid.dx).round() as usize;
    let geom = GeometrySpec {
        epsilon: grid.background.0,
        mu: grid.background.1,
        ..GeometrySpec::vacuum_1d(2.0 * half as f64 * grid.dx, SurfaceSpec::SinglePoint { position: [0.0, 0.0] })
    };
    let vac = build_grid(&geom, res)?.with_sigma(grid.sigma_user)?.with_courant(grid.courant)?;
    Ok((vac, [half, 0]))
}

/// Γ for a single +x stress point at `node` of the vacuum grid `vacuum`.
pub fn vacuum_reference(vacuum: &MaterialGrid, node: [usize; 2], n_steps: usize, axis: Axis) -> Result<GammaSeries> {
    let interior = (1..vacuum.cells[0]).filter(|&i| vacuum.conductor[i]).count();
    if interior > 0 || vacuum.eps.iter().any(|&e| e != vacuum.background.0) {
        return Err(Error::Configuration("vacuum reference domain must be empty".into()));
    }
    let wall = node[0].min(vacuum.cells[0] - node[0]);
    if 2 * wall < n_steps + 2 {
        return Err(Error::Configuration(format!(
            "vacuum domain too small: wall {wall} cells from the source, {n_steps} steps requested"
        )));
    }
    let surface = Surface {
        points: vec![SurfacePoint { node, normal: Axis::X, weight: 1.0 }],
        vacuum_subtracted: false,
    };
    let requests = required_sources(vacuum, &surface, &[axis])?;
    let responses = run_requests(vacuum, &requests, n_steps)?;
    gamma_accumulate(&responses, &surface, vacuum, axis)
}

/// Running force F(t), its asymptote and relative error.
#[derive(Clone, Debug, PartialEq)]
pub struct ForceResult {
    pub axis: Axis,
    /// Sample times (k + ½)Δt.
    pub t: Vec<f64>,
    pub force: Vec<f64>,
    /// F(∞): mean of F over the final quarter of the record.
    pub asymptote: f64,
    /// Δ(t) = |F(t) − F(∞)|/|F(∞)|.
    pub delta: Vec<f64>,
    pub truncation_time: Option<f64>,
    pub tolerance: Option<f64>,
}

fn check_kernel(kernel: &KernelSeries, gamma: &GammaSeries) -> Result<()> {
    if !same_dt(kernel.params.dt, gamma.dt) {
        return Err(Error::InvalidArgument(format!(
            "kernel dt {} differs from series dt {}",
            kernel.params.dt, gamma.dt
        )));
    }
    if kernel.half.len() < gamma.len() {
        return Err(Error::InvalidArgument("kernel shorter than the response series".into()));
    }
    Ok(())
}

fn running_force(kernel: &KernelSeries, gamma: &GammaSeries) -> Vec<f64> {
    let scale = gamma.dt / std::f64::consts::PI;
    let mut acc = 0.0;
    gamma
        .e
        .iter()
        .zip(&gamma.h)
        .zip(&kernel.half)
        .map(|((e, h), g)| {
            acc += g.im * (e + h) * scale;
            acc
        })
        .collect()
}

/// Extrapolated t → ∞ limit of the running force of a vacuum reference.
///
/// In an unbounded lattice the running force approaches its limit by power
/// laws only, so the second half of the record is fitted with
/// `A + b t⁻¹ + c t^{-3/2} + d t⁻²` after averaging neighbouring samples to
/// remove the Nyquist alternation.
pub fn vacuum_force_limit(kernel: &KernelSeries, vacuum: &GammaSeries) -> Result<f64> {
    check_kernel(kernel, vacuum)?;
    let f = running_force(kernel, vacuum);
    if f.len() < 64 {
        return Err(Error::Configuration("vacuum reference too short to extrapolate".into()));
    }
    let t_end = vacuum.time(f.len() - 1);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in f.len() / 2..f.len() - 1 {
        let u = t_end / (0.5 * (vacuum.time(k) + vacuum.time(k + 1)));
        rows.push([1.0, u, u.powf(1.5), u * u]);
        rhs.push(0.5 * (f[k] + f[k + 1]));
    }
    Ok(least_squares(&rows, &rhs)[0])
}

/// Least squares by modified Gram–Schmidt QR.
fn least_squares<const N: usize>(rows: &[[f64; N]], rhs: &[f64]) -> [f64; N] {
    let m = rows.len();
    let mut q: Vec<Vec<f64>> = (0..N).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut r = [[0.0; N]; N];
    for j in 0..N {
        for i in 0..j {
            let d: f64 = (0..m).map(|k| q[i][k] * q[j][k]).sum();
            r[i][j] = d;
            for k in 0..m {
                q[j][k] -= d * q[i][k];
            }
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        r[j][j] = norm;
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    let qb: Vec<f64> = (0..N).map(|j| (0..m).map(|k| q[j][k] * rhs[k]).sum()).collect();
    let mut x = [0.0; N];
    for j in (0..N).rev() {
        let s: f64 = (j + 1..N).map(|i| r[j][i] * x[i]).sum();
        x[j] = (qb[j] - s) / r[j][j];
    }
    x
}

/// Running force of `gamma`. With `vacuum_limit`, the extrapolated limit of a
/// vacuum reference's running force is subtracted, which removes the slow
/// power-law tail that a sample-by-sample subtraction would leave.
pub fn partial_force(kernel: &KernelSeries, gamma: &GammaSeries, vacuum_limit: Option<f64>) -> Result<ForceResult> {
    check_kernel(kernel, gamma)?;
    let mut force = running_force(kernel, gamma);
    if let Some(a) = vacuum_limit {
        for f in force.iter_mut() {
            *f -= a;
        }
    }
    let t: Vec<f64> = (0..gamma.len()).map(|k| gamma.time(k)).collect();
    let tail = &force[force.len() - force.len() / 4..];
    let asymptote = if tail.is_empty() { 0.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 };
    let denom = if asymptote == 0.0 { 1.0 } else { asymptote.abs() };
    let delta = force.iter().map(|f| (f - asymptote).abs() / denom).collect();
    Ok(ForceResult { axis: gamma.axis, t, force, asymptote, delta, truncation_time: None, tolerance: None })
}

/// Smallest T with Δ(t) ≤ `tolerance` for every t ≥ T, provided at least a
/// trailing window of length `window` satisfies the bound. Records T and the
/// tolerance in `result`.
pub fn convergence(result: &mut ForceResult, tolerance: f64, window: f64) -> Result<f64> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let n = result.delta.len();
    if n == 0 {
        return Err(Error::BudgetExceeded { best_delta: f64::INFINITY, steps: 0 });
    }
    let t_end = result.t[n - 1];
    let best = result
        .t
        .iter()
        .zip(&result.delta)
        .filter(|(t, _)| **t >= t_end - window)
        .map(|(_, d)| *d)
        .fold(0.0, f64::max);
    let mut k = n;
    while k > 0 && result.delta[k - 1] <= tolerance {
        k -= 1;
    }
    if k == n || t_end - result.t[k] < window {
        return Err(Error::BudgetExceeded { best_delta: best, steps: n });
    }
    let t = result.t[k];
    result.truncation_time = Some(t);
    result.tolerance = Some(tolerance);
    Ok(t)
}
