//! Run configuration, campaign orchestration and output files.
//!
//! A campaign runs one simulation per (surface point, source component,
//! gauge), in parallel, and reduces them in a fixed order so that outputs do
//! not depend on the number of workers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;

use crate::engine::Gauge;
use crate::error::{Error, Result};
use crate::kernel::{kernel_series, ContourParams, KernelForm, KernelSeries, DEFAULT_QUADRATURE_POINTS};
use crate::lattice::{
    build_grid, surface_points, Axis, GeometrySpec, MaterialGrid, Plate, PlateSurface, Surface, SurfacePointSpec,
    SurfaceSpec,
};
use crate::stress::{
    convergence, gamma_accumulate, partial_force, required_sources, run_request, vacuum_domain,
    vacuum_force_limit, ForceResult, GammaSeries, Response,
};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "CASIMIR_TD_WORKERS";

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    #[default]
    Plates,
    Vacuum,
    Custom,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceMode {
    #[default]
    SinglePoint,
    Closed,
    Points,
    Rectangle,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PointBlock {
    pub position_in_a: Vec<f64>,
    #[serde(default = "default_normal")]
    pub normal: String,
    pub weight: f64,
}

fn default_normal() -> String {
    "x".into()
}

#[derive(Clone, Debug, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SurfaceBlock {
    #[serde(default)]
    pub mode: SurfaceMode,
    pub position_in_a: Option<Vec<f64>>,
    #[serde(default)]
    pub points: Vec<PointBlock>,
    pub lo_in_a: Option<Vec<f64>>,
    pub hi_in_a: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlateBlock {
    pub center_in_a: Vec<f64>,
    #[serde(default)]
    pub thickness_in_a: Vec<f64>,
    #[serde(default = "yes")]
    pub perfect_conductor: bool,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub mu: f64,
}

fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    #[serde(default = "one_usize")]
    pub dimensionality: usize,
    #[serde(default)]
    pub kind: GeometryKind,
    pub separation_in_a: Option<f64>,
    pub outer_gap_in_a: Option<f64>,
    #[serde(default)]
    pub plate_thickness_in_a: f64,
    pub domain_lengths_in_a: Option<Vec<f64>>,
    #[serde(default)]
    pub plates: Vec<PlateBlock>,
    #[serde(default = "one")]
    pub background_epsilon: f64,
    #[serde(default = "one")]
    pub background_mu: f64,
    #[serde(default)]
    pub surface: SurfaceBlock,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NumericBlock {
    #[serde(default = "default_resolution")]
    pub resolution_cells_per_a: usize,
    #[serde(default = "default_courant")]
    pub courant: f64,
    #[serde(default = "one")]
    pub sigma_in_2pi_c_over_a: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub max_time_in_a_over_c: Option<f64>,
    pub max_steps: Option<usize>,
    pub kernel_quadrature_points: Option<usize>,
    #[serde(default)]
    pub kernel_form: KernelFormName,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelFormName {
    #[default]
    Discrete,
    Continuum,
}

fn default_resolution() -> usize {
    40
}
fn default_courant() -> f64 {
    crate::lattice::DEFAULT_COURANT
}
fn default_tolerance() -> f64 {
    1e-3
}

impl Default for NumericBlock {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CampaignBlock {
    #[serde(default = "default_gauges")]
    pub gauges: Vec<String>,
    #[serde(default = "default_components")]
    pub components: Vec<String>,
    pub vacuum_subtraction: Option<bool>,
    pub workers: Option<usize>,
}

fn default_gauges() -> Vec<String> {
    vec!["electric".into(), "magnetic".into()]
}
fn default_components() -> Vec<String> {
    vec!["x".into()]
}

impl Default for CampaignBlock {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default)]
    pub plot_data: bool,
    #[serde(default = "yes")]
    pub kernel_cache: bool,
}

fn default_directory() -> PathBuf {
    PathBuf::from("casimir-out")
}

impl Default for OutputBlock {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

/// A parsed and validated run configuration.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryBlock,
    #[serde(default)]
    pub numeric: NumericBlock,
    #[serde(default)]
    pub campaign: CampaignBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Validation { field: field.into(), message: message.into() }
}

fn parse_axis(name: &str, field: &str) -> Result<Axis> {
    match name {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        other => Err(invalid(field, format!("unknown axis `{other}`"))),
    }
}

fn vec2(v: &[f64], field: &str, dim: usize) -> Result<[f64; 2]> {
    if v.len() != dim {
        return Err(invalid(field, format!("expected {dim} entries, got {}", v.len())));
    }
    let mut out = [0.0; 2];
    out[..dim].copy_from_slice(v);
    Ok(out)
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let n = &self.numeric;
        if !(n.sigma_in_2pi_c_over_a >= 0.0) || !n.sigma_in_2pi_c_over_a.is_finite() {
            return Err(invalid("numeric.sigma_in_2pi_c_over_a", "must be finite and >= 0 (gain is not allowed)"));
        }
        if !(n.tolerance > 0.0) {
            return Err(invalid("numeric.tolerance", "must be positive"));
        }
        if n.resolution_cells_per_a < 8 {
            return Err(invalid("numeric.resolution_cells_per_a", "must be at least 8"));
        }
        if !(n.courant > 0.0 && n.courant < 1.0) {
            return Err(invalid("numeric.courant", "must lie in (0, 1)"));
        }
        if let Some(t) = n.max_time_in_a_over_c {
            if !(t > 0.0) {
                return Err(invalid("numeric.max_time_in_a_over_c", "must be positive"));
            }
        }
        if n.max_steps == Some(0) {
            return Err(invalid("numeric.max_steps", "must be at least 1"));
        }
        for g in &self.campaign.gauges {
            parse_gauge(g)?;
        }
        for c in &self.campaign.components {
            parse_axis(c, "campaign.components")?;
        }
        if self.campaign.workers == Some(0) {
            return Err(invalid("campaign.workers", "must be at least 1"));
        }
        let geom = self.geometry_spec()?;
        let single = matches!(geom.surface, SurfaceSpec::SinglePoint { .. });
        if let Some(v) = self.campaign.vacuum_subtraction {
            if v != single {
                return Err(invalid(
                    "campaign.vacuum_subtraction",
                    "vacuum subtraction applies exactly to the single-point surface mode",
                ));
            }
        }
        Ok(())
    }

    /// Geometry described by the `[geometry]` block.
    pub fn geometry_spec(&self) -> Result<GeometrySpec> {
        let g = &self.geometry;
        let d = g.dimensionality;
        if d != 1 && d != 2 {
            return Err(invalid("geometry.dimensionality", "must be 1 or 2"));
        }
        let h = match (g.kind, g.separation_in_a) {
            (_, Some(h)) if !(h > 0.0) => return Err(invalid("geometry.separation_in_a", "must be positive")),
            (_, Some(h)) => h,
            (GeometryKind::Plates, None) => return Err(invalid("geometry.separation_in_a", "required for plates")),
            (_, None) => 1.0,
        };
        let lengths = |field: &str| -> Result<[f64; 2]> {
            let v = g.domain_lengths_in_a.as_ref().ok_or_else(|| invalid(field, "required"))?;
            vec2(v, field, d)
        };
        let surface = &g.surface;
        let mut spec = match g.kind {
            GeometryKind::Plates => {
                if d != 1 {
                    return Err(invalid("geometry.kind", "`plates` is a 1D geometry; use `custom` in 2D"));
                }
                let outer = g.outer_gap_in_a.unwrap_or(h);
                if !(outer > 0.0) {
                    return Err(invalid("geometry.outer_gap_in_a", "must be positive"));
                }
                let mode = match surface.mode {
                    SurfaceMode::SinglePoint | SurfaceMode::Points => PlateSurface::SinglePoint,
                    SurfaceMode::Closed => PlateSurface::Closed,
                    SurfaceMode::Rectangle => return Err(invalid("geometry.surface.mode", "rectangle needs 2D")),
                };
                let mut s = GeometrySpec::plates_1d(h, outer, mode);
                for p in &mut s.plates {
                    p.thickness[0] = g.plate_thickness_in_a;
                }
                s
            }
            GeometryKind::Vacuum | GeometryKind::Custom => {
                let plates = if g.kind == GeometryKind::Vacuum {
                    if !g.plates.is_empty() {
                        return Err(invalid("geometry.plates", "a vacuum geometry has no plates"));
                    }
                    Vec::new()
                } else {
                    g.plates
                        .iter()
                        .map(|p| {
                            Ok(Plate {
                                center: vec2(&p.center_in_a, "geometry.plates.center_in_a", d)?,
                                thickness: if p.thickness_in_a.is_empty() {
                                    [0.0; 2]
                                } else {
                                    vec2(&p.thickness_in_a, "geometry.plates.thickness_in_a", d)?
                                },
                                perfect_conductor: p.perfect_conductor,
                                epsilon: p.epsilon,
                                mu: p.mu,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?
                };
                GeometrySpec {
                    dimensionality: d,
                    lengths: lengths("geometry.domain_lengths_in_a")?,
                    plates,
                    separation: h,
                    epsilon: 1.0,
                    mu: 1.0,
                    surface: SurfaceSpec::Points(Vec::new()),
                }
            }
        };
        spec.epsilon = g.background_epsilon;
        spec.mu = g.background_mu;
        match (surface.mode, g.kind) {
            (_, GeometryKind::Plates) if surface.mode != SurfaceMode::Points => {}
            (SurfaceMode::SinglePoint, _) => {
                let p = surface.position_in_a.clone().unwrap_or_else(|| vec![0.0; d]);
                spec.surface = SurfaceSpec::SinglePoint { position: vec2(&p, "geometry.surface.position_in_a", d)? };
            }
            (SurfaceMode::Closed, _) => {
                if d != 1 {
                    return Err(invalid("geometry.surface.mode", "`closed` is 1D; use `rectangle` in 2D"));
                }
                spec.surface = SurfaceSpec::Points(vec![
                    SurfacePointSpec { position: [-0.5 * h, 0.0], normal: Axis::X, weight: -1.0 },
                    SurfacePointSpec { position: [0.5 * h, 0.0], normal: Axis::X, weight: 1.0 },
                ]);
            }
            (SurfaceMode::Points, _) => {
                if surface.points.is_empty() {
                    return Err(invalid("geometry.surface.points", "at least one point is required"));
                }
                spec.surface = SurfaceSpec::Points(
                    surface
                        .points
                        .iter()
                        .map(|p| {
                            Ok(SurfacePointSpec {
                                position: vec2(&p.position_in_a, "geometry.surface.points.position_in_a", d)?,
                                normal: parse_axis(&p.normal, "geometry.surface.points.normal")?,
                                weight: p.weight,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            (SurfaceMode::Rectangle, _) => {
                let lo = surface.lo_in_a.as_ref().ok_or_else(|| invalid("geometry.surface.lo_in_a", "required"))?;
                let hi = surface.hi_in_a.as_ref().ok_or_else(|| invalid("geometry.surface.hi_in_a", "required"))?;
                spec.surface = SurfaceSpec::Rectangle {
                    lo: vec2(lo, "geometry.surface.lo_in_a", d)?,
                    hi: vec2(hi, "geometry.surface.hi_in_a", d)?,
                };
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn gauges(&self) -> Vec<Gauge> {
        let mut g: Vec<Gauge> = self.campaign.gauges.iter().filter_map(|s| parse_gauge(s).ok()).collect();
        g.sort();
        g.dedup();
        g
    }

    pub fn axes(&self) -> Vec<Axis> {
        let mut a: Vec<Axis> =
            self.campaign.components.iter().filter_map(|s| parse_axis(s, "campaign.components").ok()).collect();
        a.sort();
        a.dedup();
        a
    }

    pub fn grid(&self) -> Result<(GeometrySpec, MaterialGrid, Surface)> {
        let geom = self.geometry_spec()?;
        let grid = build_grid(&geom, self.numeric.resolution_cells_per_a)?
            .with_sigma(self.numeric.sigma_in_2pi_c_over_a)?
            .with_courant(self.numeric.courant)?;
        let surface = surface_points(&geom, &grid)?;
        Ok((geom, grid, surface))
    }

    /// Number of time steps of every simulation.
    pub fn steps(&self, grid: &MaterialGrid, geom: &GeometrySpec) -> usize {
        if let Some(n) = self.numeric.max_steps {
            return n;
        }
        let t = self.numeric.max_time_in_a_over_c.unwrap_or(DEFAULT_ROUND_TRIPS * round_trip(geom));
        (t / grid.dt).ceil() as usize
    }

    pub fn kernel_params(&self, grid: &MaterialGrid, steps: usize) -> ContourParams {
        let floor = (8 * steps).div_ceil(2) * 2;
        ContourParams {
            sigma_user: grid.sigma_user,
            dt: grid.dt,
            quadrature_points: self.numeric.kernel_quadrature_points.unwrap_or(DEFAULT_QUADRATURE_POINTS.max(floor)),
            len: steps,
            form: match self.numeric.kernel_form {
                KernelFormName::Discrete => KernelForm::Discrete,
                KernelFormName::Continuum => KernelForm::Continuum,
            },
        }
    }
}

fn parse_gauge(name: &str) -> Result<Gauge> {
    match name {
        "electric" => Ok(Gauge::Electric),
        "magnetic" => Ok(Gauge::Magnetic),
        other => Err(invalid("campaign.gauges", format!("unknown gauge `{other}`"))),
    }
}

/// Default record length in cavity round trips.
pub const DEFAULT_ROUND_TRIPS: f64 = 100.0;

/// Cavity round-trip time 2h√(εμ) of the background medium.
pub fn round_trip(geom: &GeometrySpec) -> f64 {
    2.0 * geom.separation * (geom.epsilon * geom.mu).sqrt()
}

/// Convergence window: five cavity round trips.
pub fn convergence_window(geom: &GeometrySpec) -> f64 {
    5.0 * round_trip(geom)
}

/// Outcome for one force component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentResult {
    pub gamma: GammaSeries,
    pub force: ForceResult,
    /// Best Δ over the trailing window when the tolerance was not met.
    pub unconverged: Option<f64>,
}

/// Wall-clock time of one simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTiming {
    pub label: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignReport {
    pub components: Vec<ComponentResult>,
    pub kernel: Option<KernelSeries>,
    pub steps: usize,
    pub timings: Vec<SimulationTiming>,
}

impl CampaignReport {
    pub fn converged(&self) -> bool {
        self.components.iter().all(|c| c.unconverged.is_none())
    }
}

fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let probe = dir.join(".write-test");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(probe)?;
    Ok(())
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Configuration(format!("cannot start workers: {e}")))
}

fn timed_requests(
    grid: &MaterialGrid,
    requests: &[crate::stress::SourceRequest],
    steps: usize,
    prefix: &str,
    timings: &mut Vec<SimulationTiming>,
) -> Result<Vec<Response>> {
    use rayon::prelude::*;
    let out: Vec<(Response, f64)> = requests
        .par_iter()
        .map(|r| {
            let start = Instant::now();
            let resp = run_request(grid, r, steps)?;
            Ok((resp, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut responses = Vec::with_capacity(out.len());
    for (r, secs) in out {
        timings.push(SimulationTiming {
            label: format!("{prefix}{}_{:?}{}_{}", r.gauge.name(), r.source.kind, r.source.axis.name(), r.site),
            seconds: secs,
        });
        responses.push(r);
    }
    Ok(responses)
}

/// Loads the kernel from the output directory's cache or computes it.
pub fn load_or_compute_kernel(params: ContourParams, cache_dir: Option<&Path>) -> Result<KernelSeries> {
    if let Some(dir) = cache_dir {
        let path = dir.join(KernelSeries::cache_name(&params));
        if let Some(k) = KernelSeries::read_cache(&path, &params)? {
            return Ok(k);
        }
    }
    kernel_series(params)
}

/// Runs every simulation demanded by `config`, reduces them and returns the
/// forces. Nothing is written; see [`emit_outputs`].
pub fn run_campaign(config: &RunConfig, workers: Option<usize>) -> Result<CampaignReport> {
    config.validate()?;
    let (geom, grid, surface) = config.grid()?;
    let axes = config.axes();
    let gauges = config.gauges();
    let steps = config.steps(&grid, &geom);
    let params = config.kernel_params(&grid, steps);
    params.validate()?;
    if axes.is_empty() {
        return Ok(CampaignReport { components: Vec::new(), kernel: None, steps, timings: Vec::new() });
    }
    let cache_dir = config.output.kernel_cache.then_some(config.output.directory.as_path());
    let requests: Vec<_> =
        required_sources(&grid, &surface, &axes)?.into_iter().filter(|r| gauges.contains(&r.gauge)).collect();
    let vacuum = if surface.vacuum_subtracted { Some(vacuum_domain(&grid, steps)?) } else { None };

    let pool = pool(workers.or(config.campaign.workers))?;
    let mut timings = Vec::new();
    let (kernel, responses, vac_responses) = pool.install(|| -> Result<_> {
        let (kernel, runs) = rayon::join(
            || load_or_compute_kernel(params, cache_dir),
            || -> Result<_> {
                let responses = timed_requests(&grid, &requests, steps, "", &mut timings)?;
                let vac = match &vacuum {
                    Some((vgrid, node)) => {
                        let vsurf = Surface {
                            points: vec![crate::lattice::SurfacePoint { node: *node, normal: Axis::X, weight: 1.0 }],
                            vacuum_subtracted: false,
                        };
                        let vreq: Vec<_> = required_sources(vgrid, &vsurf, &axes)?
                            .into_iter()
                            .filter(|r| gauges.contains(&r.gauge))
                            .collect();
                        Some((timed_requests(vgrid, &vreq, steps, "vacuum_", &mut timings)?, vsurf))
                    }
                    None => None,
                };
                Ok((responses, vac))
            },
        );
        let (responses, vac) = runs?;
        Ok((kernel?, responses, vac))
    })?;

    let window = convergence_window(&geom);
    let mut components = Vec::new();
    for &axis in &axes {
        let raw = accumulate(&responses, &surface, &grid, axis, &gauges)?;
        let (gamma, limit) = match (&vac_responses, &vacuum) {
            (Some((vresp, vsurf)), Some((vgrid, _))) => {
                let vgamma = accumulate(vresp, vsurf, vgrid, axis, &gauges)?;
                (raw.subtract(&vgamma)?, Some(vacuum_force_limit(&kernel, &vgamma)?))
            }
            _ => (raw.clone(), None),
        };
        let mut force = partial_force(&kernel, &raw, limit)?;
        let unconverged = match convergence(&mut force, config.numeric.tolerance, window) {
            Ok(_) => None,
            Err(Error::BudgetExceeded { best_delta, .. }) => Some(best_delta),
            Err(e) => return Err(e),
        };
        components.push(ComponentResult { gamma, force, unconverged });
    }
    Ok(CampaignReport { components, kernel: Some(kernel), steps, timings })
}

/// Γ with the responses of excluded gauges treated as zero.
fn accumulate(responses: &[Response], surface: &Surface, grid: &MaterialGrid, axis: Axis, gauges: &[Gauge]) -> Result<GammaSeries> {
    let len = responses.first().and_then(|r| r.probes.first()).map_or(0, |p| p.1.len());
    let mut all = responses.to_vec();
    for r in required_sources(grid, surface, &[axis])? {
        if !gauges.contains(&r.gauge) {
            all.push(Response {
                gauge: r.gauge,
                source: r.source,
                site: r.site,
                probes: r.probes.iter().map(|&c| (c, vec![0.0; len])).collect(),
            });
        }
    }
    gamma_accumulate(&all, surface, grid, axis)
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Writes the per-component CSVs, the summary, the timing log, the kernel
/// cache and optional plot data. Everything except `timings.csv` is a pure
/// function of the configuration.
pub fn emit_outputs(report: &CampaignReport, config: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.output.directory;
    ensure_writable(dir)?;
    let mut written = Vec::new();
    let mut summary = String::from("component,force,truncation_time,delta_at_truncation,converged,best_delta,steps\n");
    for c in &report.components {
        let name = c.force.axis.name();
        let mut csv = String::from("t,gamma_e,gamma_h,force,delta\n");
        for k in 0..c.force.t.len() {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt(c.force.t[k]),
                fmt(c.gamma.e[k]),
                fmt(c.gamma.h[k]),
                fmt(c.force.force[k]),
                fmt(c.force.delta[k])
            );
        }
        let path = dir.join(format!("force_{name}.csv"));
        std::fs::write(&path, csv)?;
        written.push(path);
        let (t, d) = match c.force.truncation_time {
            Some(t) => {
                let k = c.force.t.iter().position(|&x| x == t).expect("recorded time");
                (fmt(t), fmt(c.force.delta[k]))
            }
            None => ("".into(), "".into()),
        };
        let _ = writeln!(
            summary,
            "{name},{},{t},{d},{},{},{}",
            fmt(c.force.asymptote),
            c.unconverged.is_none(),
            c.unconverged.map(fmt).unwrap_or_default(),
            report.steps
        );
    }
    let path = dir.join("summary.csv");
    std::fs::write(&path, summary)?;
    written.push(path);

    let mut timings = String::from("simulation,wall_seconds\n");
    for t in &report.timings {
        let _ = writeln!(timings, "{},{:.6}", t.label, t.seconds);
    }
    std::fs::write(dir.join("timings.csv"), timings)?;

    if let Some(k) = &report.kernel {
        if config.output.kernel_cache {
            let path = dir.join(KernelSeries::cache_name(&k.params));
            if !path.exists() {
                k.write_cache(&path)?;
            }
            written.push(path);
        }
        if config.output.plot_data {
            let mut csv = String::from("t,abs_im_g_integer,abs_im_g_half\n");
            for n in 0..k.params.len {
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    fmt(n as f64 * k.params.dt),
                    fmt(k.integer[n].im.abs()),
                    fmt(k.half[n].im.abs())
                );
            }
            let path = dir.join("kernel_envelope.csv");
            std::fs::write(&path, csv)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Validates `config`, checks the output directory, runs the campaign and
/// writes its outputs.
pub fn run_and_emit(config: &RunConfig, workers: Option<usize>) -> Result<CampaignReport> {
    config.validate()?;
    config.grid()?;
    ensure_writable(&config.output.directory)?;
    let report = run_campaign(config, workers)?;
    emit_outputs(&report, config)?;
    Ok(report)
}
