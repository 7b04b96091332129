//! Leapfrog time stepping of Maxwell's equations in a medium with a global
//! conductivity σ, in the electric or the magnetic gauge.
//!
//! Electric gauge: `∂(μH)/∂t = −∇×E`, `∂(εE)/∂t = ∇×H − σεE − J`.
//! Magnetic gauge: `∂(εE)/∂t = ∇×H`, `∂(μH)/∂t = −∇×E − σμH − K`.
//!
//! The damped field is updated semi-implicitly,
//! `x ← [(1 − σΔt/2) x + Δt(curl − source)/m] / (1 + σΔt/2)`.
//! The source fires once, in the damped update of step 0, with amplitude
//! `1/(Δt Δx^d)`, so its discrete-time transform is one.
//!
//! Timing: after step `k`, the damped field (E in the electric gauge, H in
//! the magnetic gauge) holds the response at delay `(k + 1/2)Δt` after the
//! source; the other field holds the response at delay `kΔt`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Component, FieldKind, MaterialGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gauge {
    /// Electric current source, electric conductivity.
    Electric,
    /// Magnetic current source, magnetic conductivity.
    Magnetic,
}

impl Gauge {
    pub fn source_kind(self) -> FieldKind {
        match self {
            Gauge::Electric => FieldKind::E,
            Gauge::Magnetic => FieldKind::H,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gauge::Electric => "electric",
            Gauge::Magnetic => "magnetic",
        }
    }
}

/// Delay, in units of Δt, of the sample recorded after step 0 for a probe of
/// kind `kind` in gauge `gauge`.
pub fn delay_offset(gauge: Gauge, kind: FieldKind) -> f64 {
    if gauge.source_kind() == kind {
        0.5
    } else {
        0.0
    }
}

/// A discrete-delta dipole source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceSpec {
    pub component: Component,
    /// Flat index into the component's array.
    pub index: usize,
    pub gauge: Gauge,
}

impl SourceSpec {
    /// Source of component `component` attached to E node `node`.
    pub fn at(grid: &MaterialGrid, gauge: Gauge, component: Component, node: [usize; 2]) -> Result<Self> {
        let index = grid.attached(component, node).ok_or_else(|| {
            Error::Geometry(format!("component {:?} does not exist at node {:?}", component, node))
        })?;
        Self::site(grid, gauge, component, index)
    }

    /// Source of component `component` at flat location `index`.
    pub fn site(grid: &MaterialGrid, gauge: Gauge, component: Component, index: usize) -> Result<Self> {
        if component.kind != gauge.source_kind() {
            return Err(Error::InvalidArgument(format!(
                "a {} gauge source must drive a {:?} component",
                gauge.name(),
                gauge.source_kind()
            )));
        }
        if !grid.has_component(component) || index >= grid.len(component) {
            return Err(Error::Geometry(format!("{:?} has no location {index}", component)));
        }
        if component.kind == FieldKind::E && grid.conductor[index] {
            return Err(Error::Geometry(format!("source at location {index} sits on a conductor")));
        }
        Ok(SourceSpec { component, index, gauge })
    }

    /// Current density of the single firing step.
    pub fn amplitude(grid: &MaterialGrid) -> f64 {
        1.0 / (grid.dt * grid.dx.powi(grid.dimensionality as i32))
    }
}

/// A field sample location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Probe {
    pub component: Component,
    pub index: usize,
}

impl Probe {
    pub fn at(grid: &MaterialGrid, component: Component, node: [usize; 2]) -> Result<Self> {
        let index = grid.attached(component, node).ok_or_else(|| {
            Error::Geometry(format!("component {:?} does not exist at node {:?}", component, node))
        })?;
        if component.kind == FieldKind::E && grid.conductor[index] {
            return Err(Error::Geometry(format!("probe at node {:?} sits on a conductor", node)));
        }
        Ok(Probe { component, index })
    }
}

/// Staggered E and H arrays and the number of completed steps.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub e: Vec<f64>,
    /// One array per H component, ordered as [`MaterialGrid::h_axes`].
    pub h: Vec<Vec<f64>>,
    pub n: usize,
    pub dt: f64,
}

impl FieldState {
    pub fn zeros(grid: &MaterialGrid) -> Self {
        FieldState {
            e: vec![0.0; grid.len(grid.e_component())],
            h: grid.h_axes().iter().map(|&a| vec![0.0; grid.len(Component::h(a))]).collect(),
            n: 0,
            dt: grid.dt,
        }
    }

    pub fn value(&self, grid: &MaterialGrid, c: Component, index: usize) -> f64 {
        match c.kind {
            FieldKind::E => self.e[index],
            FieldKind::H => self.h[grid.h_slot(c.axis).expect("component on grid")][index],
        }
    }
}

/// Precomputed update coefficients for one grid.
#[derive(Clone, Debug)]
pub struct Stepper<'g> {
    grid: &'g MaterialGrid,
    inv_dx: f64,
    /// Δt/ε, zero on conductor nodes.
    ce: Vec<f64>,
    /// Δt/μ per H component.
    ch: Vec<Vec<f64>>,
    /// Damped E: (1 − a)/(1 + a), zero on conductor nodes.
    pe: Vec<f64>,
    /// Damped E: Δt/(ε(1 + a)), zero on conductor nodes.
    qe: Vec<f64>,
    /// Damped H: (1 − a)/(1 + a).
    ph: f64,
    /// Damped H: Δt/(μ(1 + a)).
    qh: Vec<Vec<f64>>,
    amplitude: f64,
}

impl<'g> Stepper<'g> {
    pub fn new(grid: &'g MaterialGrid) -> Self {
        let dt = grid.dt;
        let a = 0.5 * grid.sigma * dt;
        let p = (1.0 - a) / (1.0 + a);
        let ce: Vec<f64> = grid
            .eps
            .iter()
            .zip(&grid.conductor)
            .map(|(&eps, &c)| if c { 0.0 } else { dt / eps })
            .collect();
        let pe = grid.conductor.iter().map(|&c| if c { 0.0 } else { p }).collect();
        let qe = ce.iter().map(|&c| c / (1.0 + a)).collect();
        let ch: Vec<Vec<f64>> = grid.mu.iter().map(|m| m.iter().map(|&mu| dt / mu).collect()).collect();
        let qh = ch.iter().map(|v| v.iter().map(|&c| c / (1.0 + a)).collect()).collect();
        Stepper {
            grid,
            inv_dx: 1.0 / grid.dx,
            ce,
            ch,
            pe,
            qe,
            ph: p,
            qh,
            amplitude: SourceSpec::amplitude(grid),
        }
    }

    pub fn grid(&self) -> &MaterialGrid {
        self.grid
    }

    /// Advances one step in `gauge`; `source` fires only when `state.n == 0`.
    pub fn step(&self, state: &mut FieldState, gauge: Gauge, source: Option<&SourceSpec>) {
        let src = source.filter(|_| state.n == 0);
        if let Some(s) = src {
            debug_assert_eq!(s.gauge, gauge);
        }
        match (self.grid.dimensionality, gauge) {
            (1, Gauge::Electric) => {
                self.h_plain_1d(state);
                self.e_damped_1d(state, src);
            }
            (1, Gauge::Magnetic) => {
                self.e_plain_1d(state);
                self.h_damped_1d(state, src);
            }
            (_, Gauge::Electric) => {
                self.h_plain_2d(state);
                self.e_damped_2d(state, src);
            }
            (_, Gauge::Magnetic) => {
                self.e_plain_2d(state);
                self.h_damped_2d(state, src);
            }
        }
        state.n += 1;
    }

    /// Advances one step and returns the staggered energy
    /// `Σ m_d x_d² + Σ m_u x_u^{old} x_u^{new}` (times the cell volume),
    /// evaluated between the two half updates. Here `x_d` is the damped field
    /// and `x_u` the undamped one. For σ = 0 it is exactly conserved;
    /// for σ > 0 it never increases once the source is off.
    pub fn step_with_energy(&self, state: &mut FieldState, gauge: Gauge, source: Option<&SourceSpec>) -> f64 {
        let grid = self.grid;
        let vol = grid.dx.powi(grid.dimensionality as i32);
        let src = source.filter(|_| state.n == 0);
        let e_energy = |e: &[f64]| -> f64 { e.iter().zip(&grid.eps).map(|(x, m)| m * x * x).sum() };
        let h_energy = |h: &[Vec<f64>]| -> f64 {
            h.iter().zip(&grid.mu).map(|(v, mu)| v.iter().zip(mu).map(|(x, m)| m * x * x).sum::<f64>()).sum()
        };
        let u;
        match gauge {
            Gauge::Electric => {
                let old = state.h.clone();
                if grid.dimensionality == 1 {
                    self.h_plain_1d(state);
                } else {
                    self.h_plain_2d(state);
                }
                let cross: f64 = old
                    .iter()
                    .zip(&state.h)
                    .zip(&grid.mu)
                    .map(|((o, n), mu)| o.iter().zip(n).zip(mu).map(|((a, b), m)| m * a * b).sum::<f64>())
                    .sum();
                u = e_energy(&state.e) + cross;
                if grid.dimensionality == 1 {
                    self.e_damped_1d(state, src);
                } else {
                    self.e_damped_2d(state, src);
                }
            }
            Gauge::Magnetic => {
                let old = state.e.clone();
                if grid.dimensionality == 1 {
                    self.e_plain_1d(state);
                } else {
                    self.e_plain_2d(state);
                }
                let cross: f64 = old.iter().zip(&state.e).zip(&grid.eps).map(|((a, b), m)| m * a * b).sum();
                u = h_energy(&state.h) + cross;
                if grid.dimensionality == 1 {
                    self.h_damped_1d(state, src);
                } else {
                    self.h_damped_2d(state, src);
                }
            }
        }
        state.n += 1;
        u * vol
    }

    fn h_plain_1d(&self, s: &mut FieldState) {
        let (e, h, c, inv) = (&s.e, &mut s.h[0], &self.ch[0], self.inv_dx);
        for i in 0..h.len() {
            h[i] += c[i] * (-(e[i + 1] - e[i]) * inv);
        }
    }

    fn e_plain_1d(&self, s: &mut FieldState) {
        let (e, h, c, inv) = (&mut s.e, &s.h[0], &self.ce, self.inv_dx);
        for i in 1..e.len() - 1 {
            e[i] += c[i] * (-(h[i] - h[i - 1]) * inv);
        }
    }

    fn e_damped_1d(&self, s: &mut FieldState, src: Option<&SourceSpec>) {
        let (e, h, inv) = (&mut s.e, &s.h[0], self.inv_dx);
        let saved = src.map(|sp| (sp.index, e[sp.index]));
        for i in 1..e.len() - 1 {
            e[i] = self.pe[i] * e[i] + self.qe[i] * (-(h[i] - h[i - 1]) * inv);
        }
        if let Some((i, old)) = saved {
            e[i] = self.pe[i] * old + self.qe[i] * (-(h[i] - h[i - 1]) * inv - self.amplitude);
        }
    }

    fn h_damped_1d(&self, s: &mut FieldState, src: Option<&SourceSpec>) {
        let (e, h, inv) = (&s.e, &mut s.h[0], self.inv_dx);
        let q = &self.qh[0];
        let saved = src.map(|sp| (sp.index, h[sp.index]));
        for i in 0..h.len() {
            h[i] = self.ph * h[i] + q[i] * (-(e[i + 1] - e[i]) * inv);
        }
        if let Some((i, old)) = saved {
            h[i] = self.ph * old + q[i] * (-(e[i + 1] - e[i]) * inv - self.amplitude);
        }
    }

    fn h_plain_2d(&self, s: &mut FieldState) {
        let [nx, ny] = self.grid.cells;
        let inv = self.inv_dx;
        let e = &s.e;
        let (hx, hy) = s.h.split_at_mut(1);
        let (hx, hy) = (&mut hx[0], &mut hy[0]);
        let (cx, cy) = (&self.ch[0], &self.ch[1]);
        let ey = ny + 1;
        for i in 0..=nx {
            for j in 0..ny {
                let k = i * ny + j;
                hx[k] += cx[k] * (-(e[i * ey + j + 1] - e[i * ey + j]) * inv);
            }
        }
        for i in 0..nx {
            for j in 0..=ny {
                let k = i * ey + j;
                hy[k] += cy[k] * ((e[(i + 1) * ey + j] - e[i * ey + j]) * inv);
            }
        }
    }

    fn curl_h_2d(&self, hx: &[f64], hy: &[f64], i: usize, j: usize) -> f64 {
        let ny = self.grid.cells[1];
        let ey = ny + 1;
        (hy[i * ey + j] - hy[(i - 1) * ey + j]) * self.inv_dx - (hx[i * ny + j] - hx[i * ny + j - 1]) * self.inv_dx
    }

    fn e_plain_2d(&self, s: &mut FieldState) {
        let [nx, ny] = self.grid.cells;
        let ey = ny + 1;
        for i in 1..nx {
            for j in 1..ny {
                let k = i * ey + j;
                s.e[k] += self.ce[k] * self.curl_h_2d(&s.h[0], &s.h[1], i, j);
            }
        }
    }

    fn e_damped_2d(&self, s: &mut FieldState, src: Option<&SourceSpec>) {
        let [nx, ny] = self.grid.cells;
        let ey = ny + 1;
        let saved = src.map(|sp| (sp.index, s.e[sp.index]));
        for i in 1..nx {
            for j in 1..ny {
                let k = i * ey + j;
                s.e[k] = self.pe[k] * s.e[k] + self.qe[k] * self.curl_h_2d(&s.h[0], &s.h[1], i, j);
            }
        }
        if let Some((k, old)) = saved {
            let (i, j) = (k / ey, k % ey);
            s.e[k] = self.pe[k] * old + self.qe[k] * (self.curl_h_2d(&s.h[0], &s.h[1], i, j) - self.amplitude);
        }
    }

    fn h_damped_2d(&self, s: &mut FieldState, src: Option<&SourceSpec>) {
        let [nx, ny] = self.grid.cells;
        let inv = self.inv_dx;
        let ey = ny + 1;
        let e = &s.e;
        let (hx, hy) = s.h.split_at_mut(1);
        let (hx, hy) = (&mut hx[0], &mut hy[0]);
        let (qx, qy) = (&self.qh[0], &self.qh[1]);
        let p = self.ph;
        let slot = src.map(|sp| self.grid.h_slot(sp.component.axis).expect("H source"));
        let sx = src.filter(|_| slot == Some(0)).map(|sp| sp.index);
        let sy = src.filter(|_| slot == Some(1)).map(|sp| sp.index);
        for i in 0..=nx {
            for j in 0..ny {
                let k = i * ny + j;
                let curl = -(e[i * ey + j + 1] - e[i * ey + j]) * inv;
                let drive = if sx == Some(k) { curl - self.amplitude } else { curl };
                hx[k] = p * hx[k] + qx[k] * drive;
            }
        }
        for i in 0..nx {
            for j in 0..=ny {
                let k = i * ey + j;
                let curl = (e[(i + 1) * ey + j] - e[i * ey + j]) * inv;
                let drive = if sy == Some(k) { curl - self.amplitude } else { curl };
                hy[k] = p * hy[k] + qy[k] * drive;
            }
        }
    }
}

/// One electric-gauge step on `state`.
pub fn step_electric(state: &mut FieldState, grid: &MaterialGrid, source: Option<&SourceSpec>) {
    Stepper::new(grid).step(state, Gauge::Electric, source);
}

/// One magnetic-gauge step on `state`.
pub fn step_magnetic(state: &mut FieldState, grid: &MaterialGrid, source: Option<&SourceSpec>) {
    Stepper::new(grid).step(state, Gauge::Magnetic, source);
}

/// Runs `n_steps` steps from rest with `source` firing at step 0 and records
/// every probe after every step.
pub fn run_impulse(grid: &MaterialGrid, source: &SourceSpec, n_steps: usize, probes: &[Probe]) -> Result<Vec<Vec<f64>>> {
    for p in probes {
        if !grid.has_component(p.component) || p.index >= grid.len(p.component) {
            return Err(Error::Geometry(format!("probe {:?} is not a lattice location", p)));
        }
        if p.component.kind == FieldKind::E && grid.conductor[p.index] {
            return Err(Error::Geometry(format!("probe {:?} sits on a conductor", p)));
        }
    }
    let stepper = Stepper::new(grid);
    let mut state = FieldState::zeros(grid);
    let mut out: Vec<Vec<f64>> = probes.iter().map(|_| Vec::with_capacity(n_steps)).collect();
    let slots: Vec<Option<usize>> = probes.iter().map(|p| grid.h_slot(p.component.axis)).collect();
    for _ in 0..n_steps {
        stepper.step(&mut state, source.gauge, Some(source));
        for ((p, series), slot) in probes.iter().zip(out.iter_mut()).zip(&slots) {
            let v = match p.component.kind {
                FieldKind::E => state.e[p.index],
                FieldKind::H => state.h[slot.expect("H probe")][p.index],
            };
            series.push(v);
        }
    }
    Ok(out)
}

/// Discrete-time Fourier transform `Σ_k f_k e^{iξ(k + offset)Δt} Δt`, where
/// `offset` is the delay of the first sample in units of Δt.
pub fn dtft(series: &[f64], xi: f64, dt: f64, offset: f64) -> Complex64 {
    series
        .iter()
        .enumerate()
        .map(|(k, &f)| Complex64::from_polar(f, xi * (k as f64 + offset) * dt))
        .sum::<Complex64>()
        * dt
}
