//! Geometry, materials and the Yee lattice.
//!
//! Coordinates are measured in units of the length scale `a`, with the
//! domain centred on the origin: node `i` of an axis with length `L` sits at
//! `-L/2 + i Δx`. The outer walls are perfect conductors.
//!
//! One polarization is carried per dimensionality:
//!
//! * 1D: `E_y` on integer nodes, `H_z` on half nodes (`H[i]` at `i + 1/2`).
//! * 2D: `E_z` on nodes `(i, j)`, `H_x` at `(i, j + 1/2)`, `H_y` at `(i + 1/2, j)`.

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Converts a rate quoted in units of 2πc/a to an angular rate in c/a.
pub fn angular_from_user(x: f64) -> f64 {
    x * TWO_PI
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    E,
    H,
}

/// A field component on the Yee lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Component {
    pub kind: FieldKind,
    pub axis: Axis,
}

impl Component {
    pub fn e(axis: Axis) -> Self {
        Component { kind: FieldKind::E, axis }
    }
    pub fn h(axis: Axis) -> Self {
        Component { kind: FieldKind::H, axis }
    }
}

/// A plate (slab in 1D, rectangle in 2D). Zero thickness selects the single
/// lattice node at `center`, which must then be aligned with the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Plate {
    pub center: [f64; 2],
    pub thickness: [f64; 2],
    pub perfect_conductor: bool,
    pub epsilon: f64,
    pub mu: f64,
}

impl Plate {
    pub fn conductor_1d(position: f64, thickness: f64) -> Self {
        Plate {
            center: [position, 0.0],
            thickness: [thickness, 0.0],
            perfect_conductor: true,
            epsilon: 1.0,
            mu: 1.0,
        }
    }

    fn contains(&self, p: [f64; 2], dim: usize) -> bool {
        let tol = 1e-9;
        (0..dim).all(|k| (p[k] - self.center[k]).abs() <= 0.5 * self.thickness[k] + tol)
    }
}

/// One user-specified stress point with its outward normal and weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePointSpec {
    pub position: [f64; 2],
    pub normal: Axis,
    pub weight: f64,
}

/// Description of the stress surface S.
#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceSpec {
    /// A single interior point with normal +x whose discretized-vacuum
    /// response is subtracted.
    SinglePoint { position: [f64; 2] },
    /// Explicit points, e.g. two points bracketing a plate in 1D.
    Points(Vec<SurfacePointSpec>),
    /// Closed rectangle of cell faces in 2D.
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometrySpec {
    pub dimensionality: usize,
    pub lengths: [f64; 2],
    pub plates: Vec<Plate>,
    /// Plate separation h; also sets the cavity round-trip time.
    pub separation: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub surface: SurfaceSpec,
}

/// How the stress surface is placed for a pair of 1D plates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlateSurface {
    /// Cavity centre, vacuum subtracted.
    SinglePoint,
    /// Cavity centre and the centre of the outer gap left of the left plate.
    Closed,
}

impl GeometrySpec {
    /// Two 1-node conductors at ±h/2 with gaps of `outer` to the walls.
    pub fn plates_1d(h: f64, outer: f64, surface: PlateSurface) -> Self {
        let surface = match surface {
            PlateSurface::SinglePoint => SurfaceSpec::SinglePoint { position: [0.0, 0.0] },
            PlateSurface::Closed => SurfaceSpec::Points(vec![
                SurfacePointSpec {
                    position: [-0.5 * h - 0.5 * outer, 0.0],
                    normal: Axis::X,
                    weight: -1.0,
                },
                SurfacePointSpec { position: [0.0, 0.0], normal: Axis::X, weight: 1.0 },
            ]),
        };
        GeometrySpec {
            dimensionality: 1,
            lengths: [h + 2.0 * outer, 0.0],
            plates: vec![Plate::conductor_1d(-0.5 * h, 0.0), Plate::conductor_1d(0.5 * h, 0.0)],
            separation: h,
            epsilon: 1.0,
            mu: 1.0,
            surface,
        }
    }

    /// Empty 1D domain of the given length.
    pub fn vacuum_1d(length: f64, surface: SurfaceSpec) -> Self {
        GeometrySpec {
            dimensionality: 1,
            lengths: [length, 0.0],
            plates: Vec::new(),
            separation: 1.0,
            epsilon: 1.0,
            mu: 1.0,
            surface,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let geo = |m: String| Err(Error::Geometry(m));
        if self.dimensionality != 1 && self.dimensionality != 2 {
            return geo(format!("dimensionality must be 1 or 2, got {}", self.dimensionality));
        }
        for k in 0..self.dimensionality {
            if !(self.lengths[k] > 0.0) || !self.lengths[k].is_finite() {
                return geo(format!("domain length along axis {k} must be positive"));
            }
        }
        if !(self.separation > 0.0) {
            return geo("plate separation h must be positive".into());
        }
        if self.epsilon < 1.0 || self.mu < 1.0 {
            return geo("background epsilon and mu must be >= 1".into());
        }
        for (n, p) in self.plates.iter().enumerate() {
            for k in 0..self.dimensionality {
                let half = 0.5 * self.lengths[k];
                if p.thickness[k] < 0.0 {
                    return geo(format!("plate {n} has negative thickness"));
                }
                if p.center[k] - 0.5 * p.thickness[k] <= -half || p.center[k] + 0.5 * p.thickness[k] >= half {
                    return geo(format!("plate {n} does not lie strictly inside the domain"));
                }
            }
            if !p.perfect_conductor && (p.epsilon < 1.0 || p.mu < 1.0) {
                return geo(format!("plate {n} needs epsilon and mu >= 1"));
            }
        }
        Ok(())
    }
}

/// Yee-staggered materials for one resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialGrid {
    pub dimensionality: usize,
    pub dx: f64,
    /// Cell counts per axis (the second entry is zero in 1D).
    pub cells: [usize; 2],
    pub lengths: [f64; 2],
    /// ε on E nodes.
    pub eps: Vec<f64>,
    /// μ per H component, on that component's locations.
    pub mu: Vec<Vec<f64>>,
    /// Perfect-conductor flag on E nodes (outer walls included).
    pub conductor: Vec<bool>,
    /// Conductivity in units of 2πc/a as given by the user.
    pub sigma_user: f64,
    /// Angular conductivity 2π·sigma_user in c/a.
    pub sigma: f64,
    pub courant: f64,
    pub dt: f64,
    pub background: (f64, f64),
}

pub const DEFAULT_COURANT: f64 = 0.5;

/// Discretizes `geom` with `resolution` cells per unit length. The grid starts
/// with σ = 0 and the default Courant factor; see [`MaterialGrid::with_sigma`]
/// and [`MaterialGrid::with_courant`].
pub fn build_grid(geom: &GeometrySpec, resolution: usize) -> Result<MaterialGrid> {
    if resolution < 8 {
        return Err(Error::InvalidArgument(format!("resolution must be >= 8, got {resolution}")));
    }
    geom.validate()?;
    let d = geom.dimensionality;
    let dx = 1.0 / resolution as f64;
    let mut cells = [0usize; 2];
    for k in 0..d {
        let exact = geom.lengths[k] * resolution as f64;
        let n = exact.round();
        if (exact - n).abs() > 1e-6 || n < 2.0 {
            return Err(Error::Geometry(format!(
                "domain length {} is not a whole number of cells at resolution {resolution}",
                geom.lengths[k]
            )));
        }
        cells[k] = n as usize;
    }
    let mut grid = MaterialGrid {
        dimensionality: d,
        dx,
        cells,
        lengths: geom.lengths,
        eps: Vec::new(),
        mu: Vec::new(),
        conductor: Vec::new(),
        sigma_user: 0.0,
        sigma: 0.0,
        courant: DEFAULT_COURANT,
        dt: DEFAULT_COURANT * dx / (d as f64).sqrt(),
        background: (geom.epsilon, geom.mu),
    };
    let ne = grid.len(grid.e_component());
    grid.eps = vec![geom.epsilon; ne];
    grid.conductor = vec![false; ne];
    grid.mu = grid.h_axes().iter().map(|&a| vec![geom.mu; grid.len(Component::h(a))]).collect();

    for (n, plate) in geom.plates.iter().enumerate() {
        let mut hit = false;
        for idx in 0..ne {
            let p = grid.position(grid.e_component(), idx);
            if plate.contains(p, d) {
                hit = true;
                if plate.perfect_conductor {
                    grid.conductor[idx] = true;
                } else {
                    grid.eps[idx] = plate.epsilon;
                }
            }
        }
        if !hit {
            return Err(Error::Geometry(format!(
                "plate {n} contains no lattice node at resolution {resolution}"
            )));
        }
        if !plate.perfect_conductor {
            for (slot, &axis) in grid.h_axes().to_vec().iter().enumerate() {
                let c = Component::h(axis);
                for idx in 0..grid.mu[slot].len() {
                    if plate.contains(grid.position(c, idx), d) {
                        grid.mu[slot][idx] = plate.mu;
                    }
                }
            }
        }
    }
    // Outer walls.
    for idx in 0..ne {
        let ij = grid.unflatten(grid.e_component(), idx);
        if (0..d).any(|k| ij[k] == 0 || ij[k] == cells[k]) {
            grid.conductor[idx] = true;
        }
    }
    // Surface locality is checked here so that a bad S fails at construction.
    surface_points(geom, &grid)?;
    Ok(grid)
}

impl MaterialGrid {
    /// Sets the conductivity, quoted in units of 2πc/a.
    pub fn with_sigma(mut self, sigma_user: f64) -> Result<Self> {
        if !(sigma_user >= 0.0) || !sigma_user.is_finite() {
            return Err(Error::Configuration(format!(
                "conductivity must be finite and >= 0 (no gain), got {sigma_user}"
            )));
        }
        self.sigma_user = sigma_user;
        self.sigma = angular_from_user(sigma_user);
        Ok(self)
    }

    /// Sets Δt = courant·Δx/√d. Stability of the leapfrog needs courant < 1.
    pub fn with_courant(mut self, courant: f64) -> Result<Self> {
        if !(courant > 0.0 && courant < 1.0) {
            return Err(Error::Configuration(format!(
                "Courant factor must lie in (0, 1), got {courant}"
            )));
        }
        self.courant = courant;
        self.dt = courant * self.dx / (self.dimensionality as f64).sqrt();
        Ok(self)
    }

    pub fn e_component(&self) -> Component {
        if self.dimensionality == 1 {
            Component::e(Axis::Y)
        } else {
            Component::e(Axis::Z)
        }
    }

    pub fn h_axes(&self) -> &'static [Axis] {
        if self.dimensionality == 1 {
            &[Axis::Z]
        } else {
            &[Axis::X, Axis::Y]
        }
    }

    /// Slot of an H component in `mu` and in field arrays.
    pub fn h_slot(&self, axis: Axis) -> Option<usize> {
        self.h_axes().iter().position(|&a| a == axis)
    }

    pub fn has_component(&self, c: Component) -> bool {
        match c.kind {
            FieldKind::E => c == self.e_component(),
            FieldKind::H => self.h_slot(c.axis).is_some(),
        }
    }

    /// Array shape (per axis) of a component.
    pub fn shape(&self, c: Component) -> [usize; 2] {
        let [nx, ny] = self.cells;
        if self.dimensionality == 1 {
            match c.kind {
                FieldKind::E => [nx + 1, 1],
                FieldKind::H => [nx, 1],
            }
        } else {
            match (c.kind, c.axis) {
                (FieldKind::E, _) => [nx + 1, ny + 1],
                (FieldKind::H, Axis::X) => [nx + 1, ny],
                _ => [nx, ny + 1],
            }
        }
    }

    pub fn len(&self, c: Component) -> usize {
        let s = self.shape(c);
        s[0] * s[1]
    }

    pub fn flat(&self, c: Component, ij: [usize; 2]) -> Option<usize> {
        let s = self.shape(c);
        (ij[0] < s[0] && ij[1] < s[1]).then(|| ij[0] * s[1] + ij[1])
    }

    pub fn unflatten(&self, c: Component, idx: usize) -> [usize; 2] {
        let s = self.shape(c);
        [idx / s[1], idx % s[1]]
    }

    /// Physical position of a lattice location.
    pub fn position(&self, c: Component, idx: usize) -> [f64; 2] {
        let ij = self.unflatten(c, idx);
        let mut off = [0.0, 0.0];
        if c.kind == FieldKind::H {
            if self.dimensionality == 1 || c.axis == Axis::Y {
                off[0] = 0.5;
            } else {
                off[1] = 0.5;
            }
        }
        let mut p = [0.0; 2];
        for k in 0..self.dimensionality {
            p[k] = -0.5 * self.lengths[k] + (ij[k] as f64 + off[k]) * self.dx;
        }
        p
    }

    /// Nearest E node to a position.
    pub fn nearest_node(&self, p: [f64; 2]) -> Result<[usize; 2]> {
        let mut ij = [0usize; 2];
        for k in 0..self.dimensionality {
            let r = ((p[k] + 0.5 * self.lengths[k]) / self.dx).round();
            if r < 0.0 || r > self.cells[k] as f64 {
                return Err(Error::Geometry(format!("position {:?} lies outside the domain", p)));
            }
            ij[k] = r as usize;
        }
        Ok(ij)
    }

    /// Location of component `c` attached to the E node `node`.
    pub fn attached(&self, c: Component, node: [usize; 2]) -> Option<usize> {
        if !self.has_component(c) {
            return None;
        }
        self.flat(c, node)
    }

    /// Lattice locations that represent component `c` at the E node `node`:
    /// the node itself for E, and the two half-step sites on either side of
    /// it for H.
    pub fn sites(&self, c: Component, node: [usize; 2]) -> Option<Vec<usize>> {
        if !self.has_component(c) {
            return None;
        }
        if c.kind == FieldKind::E {
            return self.flat(c, node).map(|i| vec![i]);
        }
        let k = if self.dimensionality == 1 || c.axis == Axis::Y { 0 } else { 1 };
        if node[k] == 0 {
            return None;
        }
        let mut before = node;
        before[k] -= 1;
        Some(vec![self.flat(c, before)?, self.flat(c, node)?])
    }

    pub fn is_conductor_node(&self, node: [usize; 2]) -> bool {
        self.flat(self.e_component(), node).is_none_or(|i| self.conductor[i])
    }
}

/// A stress point on the E node `node`, carrying normal `normal` and weight dS.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub node: [usize; 2],
    pub normal: Axis,
    pub weight: f64,
}

/// The discretized stress surface.
#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub points: Vec<SurfacePoint>,
    pub vacuum_subtracted: bool,
}

/// Discretizes the stress surface of `geom` on `grid`, checking locality.
pub fn surface_points(geom: &GeometrySpec, grid: &MaterialGrid) -> Result<Surface> {
    let (points, vacuum_subtracted) = match &geom.surface {
        SurfaceSpec::SinglePoint { position } => {
            if grid.dimensionality != 1 {
                return Err(Error::Geometry("single-point mode is defined in 1D only".into()));
            }
            let node = grid.nearest_node(*position)?;
            (vec![SurfacePoint { node, normal: Axis::X, weight: 1.0 }], true)
        }
        SurfaceSpec::Points(list) => {
            let mut pts = Vec::with_capacity(list.len());
            for s in list {
                pts.push(SurfacePoint { node: grid.nearest_node(s.position)?, normal: s.normal, weight: s.weight });
            }
            (pts, false)
        }
        SurfaceSpec::Rectangle { lo, hi } => {
            if grid.dimensionality != 2 {
                return Err(Error::Geometry("rectangle surfaces need a 2D geometry".into()));
            }
            let a = grid.nearest_node(*lo)?;
            let b = grid.nearest_node(*hi)?;
            if b[0] <= a[0] || b[1] <= a[1] {
                return Err(Error::Geometry("degenerate surface rectangle".into()));
            }
            let dx = grid.dx;
            let mut pts = Vec::new();
            // Trapezoid rule along each edge: corner nodes carry half weight
            // on both edges that meet there.
            let w = |k: usize, lo: usize, hi: usize| if k == lo || k == hi { 0.5 * dx } else { dx };
            for i in a[0]..=b[0] {
                pts.push(SurfacePoint { node: [i, a[1]], normal: Axis::Y, weight: -w(i, a[0], b[0]) });
                pts.push(SurfacePoint { node: [i, b[1]], normal: Axis::Y, weight: w(i, a[0], b[0]) });
            }
            for j in a[1]..=b[1] {
                pts.push(SurfacePoint { node: [a[0], j], normal: Axis::X, weight: -w(j, a[1], b[1]) });
                pts.push(SurfacePoint { node: [b[0], j], normal: Axis::X, weight: w(j, a[1], b[1]) });
            }
            (pts, false)
        }
    };
    for p in &points {
        if grid.is_conductor_node(p.node) {
            return Err(Error::Geometry(format!("surface point {:?} touches a conductor", p.node)));
        }
        let e = grid.flat(grid.e_component(), p.node).expect("node in range");
        let uniform_e = grid.eps[e] == grid.background.0;
        let uniform_h = grid.h_axes().iter().all(|&ax| {
            let slot = grid.h_slot(ax).expect("present axis");
            grid.sites(Component::h(ax), p.node)
                .is_some_and(|s| s.iter().all(|&i| grid.mu[slot][i] == grid.background.1))
        });
        if !uniform_e || !uniform_h {
            return Err(Error::Geometry(format!(
                "surface point {:?} does not lie in the uniform background medium",
                p.node
            )));
        }
    }
    Ok(Surface { points, vacuum_subtracted })
}
