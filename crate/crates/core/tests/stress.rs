use casimir_td::engine::Gauge;
use casimir_td::kernel::{kernel_series, ContourParams, KernelForm};
use casimir_td::lattice::{
    build_grid, surface_points, Axis, Component, GeometrySpec, MaterialGrid, Plate, PlateSurface, Surface,
    SurfaceSpec,
};
use casimir_td::oracle::{wick_force_1d, WickQuadrature};
use casimir_td::stress::{
    convergence, gamma_accumulate, partial_force, required_sources, run_requests, vacuum_domain, vacuum_force_limit,
    vacuum_reference, Response,
};
use casimir_td::Error;
use proptest::prelude::*;

fn plates(res: usize, sigma: f64, mode: PlateSurface) -> (MaterialGrid, Surface) {
    let g = GeometrySpec::plates_1d(1.0, 1.0, mode);
    let grid = build_grid(&g, res).unwrap().with_sigma(sigma).unwrap();
    let s = surface_points(&g, &grid).unwrap();
    (grid, s)
}

fn responses(grid: &MaterialGrid, surface: &Surface, steps: usize) -> Vec<Response> {
    let req = required_sources(grid, surface, &[Axis::X]).unwrap();
    run_requests(grid, &req, steps).unwrap()
}

#[test]
fn single_point_needs_one_electric_and_two_magnetic_runs() {
    let (grid, s) = plates(20, 1.0, PlateSurface::SinglePoint);
    let req = required_sources(&grid, &s, &[Axis::X]).unwrap();
    let node = s.points[0].node[0];
    let summary: Vec<(Gauge, usize)> = req.iter().map(|r| (r.gauge, r.site)).collect();
    assert_eq!(summary, vec![(Gauge::Electric, node), (Gauge::Magnetic, node - 1), (Gauge::Magnetic, node)]);
    assert!(req.iter().all(|r| r.probes == vec![(r.source, r.site)]));
}

#[test]
fn closed_surface_weights_cancel() {
    let (_, s) = plates(20, 1.0, PlateSurface::Closed);
    assert_eq!(s.points.iter().map(|p| p.weight).sum::<f64>(), 0.0);
    let g = GeometrySpec {
        dimensionality: 2,
        lengths: [3.0, 2.0],
        plates: vec![],
        separation: 1.0,
        epsilon: 1.0,
        mu: 1.0,
        surface: SurfaceSpec::Rectangle { lo: [-0.5, -0.5], hi: [0.75, 0.25] },
    };
    let grid = build_grid(&g, 8).unwrap();
    let s = surface_points(&g, &grid).unwrap();
    for n in [Axis::X, Axis::Y] {
        let sum: f64 = s.points.iter().filter(|p| p.normal == n).map(|p| p.weight).sum();
        assert!(sum.abs() < 1e-12);
    }
}

#[test]
fn gamma_is_linear_in_responses() {
    let (grid, s) = plates(16, 1.0, PlateSurface::SinglePoint);
    let r = responses(&grid, &s, 200);
    let g1 = gamma_accumulate(&r, &s, &grid, Axis::X).unwrap();
    let scaled: Vec<Response> = r
        .iter()
        .map(|x| Response {
            probes: x.probes.iter().map(|(c, v)| (*c, v.iter().map(|y| -2.5 * y).collect())).collect(),
            ..x.clone()
        })
        .collect();
    let g2 = gamma_accumulate(&scaled, &s, &grid, Axis::X).unwrap();
    for (a, b) in g1.total().iter().zip(g2.total()) {
        assert!((b + 2.5 * a).abs() <= 1e-12 * a.abs().max(1.0));
    }
    let zero: Vec<Response> = r
        .iter()
        .map(|x| Response { probes: x.probes.iter().map(|(c, v)| (*c, vec![0.0; v.len()])).collect(), ..x.clone() })
        .collect();
    assert!(gamma_accumulate(&zero, &s, &grid, Axis::X).unwrap().total().iter().all(|&v| v == 0.0));
}

#[test]
fn vacuum_reference_subtracted_from_itself_is_zero() {
    let (grid, _) = plates(16, 1.0, PlateSurface::SinglePoint);
    let (vac, node) = vacuum_domain(&grid, 100).unwrap();
    let g = vacuum_reference(&vac, node, 100, Axis::X).unwrap();
    let d = g.subtract(&g).unwrap();
    assert!(d.vacuum_subtracted);
    assert!(d.total().iter().all(|&v| v == 0.0));
}

#[test]
fn small_vacuum_domain_rejected() {
    let (grid, s) = plates(16, 1.0, PlateSurface::SinglePoint);
    assert!(matches!(vacuum_reference(&grid, s.points[0].node, 500, Axis::X), Err(Error::Configuration(_))));
}

#[test]
fn missing_and_mismatched_responses_are_errors() {
    let (grid, s) = plates(16, 1.0, PlateSurface::SinglePoint);
    let mut r = responses(&grid, &s, 50);
    let mut short = r.clone();
    short[0].probes[0].1.pop();
    assert!(matches!(gamma_accumulate(&short, &s, &grid, Axis::X), Err(Error::InvalidArgument(_))));
    r.pop();
    assert!(matches!(gamma_accumulate(&r, &s, &grid, Axis::X), Err(Error::IncompleteCampaign(_))));
}

#[test]
fn responses_vanish_for_absent_components() {
    // A 1D grid has no y or z force.
    let (grid, s) = plates(16, 1.0, PlateSurface::SinglePoint);
    let req = required_sources(&grid, &s, &[Axis::Y]).unwrap();
    let r = run_requests(&grid, &req, 40).unwrap();
    let g = gamma_accumulate(&r, &s, &grid, Axis::Y).unwrap();
    assert!(g.total().iter().all(|&v| v == 0.0));
}

/// Time-domain force against the imaginary-frequency oracle on the same lattice.
#[test]
fn time_domain_force_matches_wick() {
    let res = 20;
    let (grid, s) = plates(res, 1.0, PlateSurface::SinglePoint);
    let steps = (40.0 / grid.dt) as usize;
    let r = responses(&grid, &s, steps);
    let gamma = gamma_accumulate(&r, &s, &grid, Axis::X).unwrap();
    let (vac, node) = vacuum_domain(&grid, steps).unwrap();
    let vgamma = vacuum_reference(&vac, node, steps, Axis::X).unwrap();
    let kernel = kernel_series(ContourParams {
        sigma_user: 1.0,
        dt: grid.dt,
        quadrature_points: 4_000_000,
        len: steps,
        form: KernelForm::Discrete,
    })
    .unwrap();
    let limit = vacuum_force_limit(&kernel, &vgamma).unwrap();
    let mut f = partial_force(&kernel, &gamma, Some(limit)).unwrap();
    convergence(&mut f, 1e-3, 10.0).unwrap();
    let wick = wick_force_1d(1.0, res, WickQuadrature::default()).unwrap();
    assert!((f.asymptote - wick).abs() < 2e-4 * wick, "{} vs {wick}", f.asymptote);
}

/// A geometry symmetric under y → −y has no net y force.
#[test]
fn mirror_symmetric_geometry_has_no_transverse_force() {
    let g = GeometrySpec {
        dimensionality: 2,
        lengths: [3.0, 2.0],
        plates: vec![
            Plate { center: [-0.5, 0.0], thickness: [0.0, 1.0], perfect_conductor: true, epsilon: 1.0, mu: 1.0 },
            Plate { center: [0.5, 0.0], thickness: [0.0, 1.0], perfect_conductor: true, epsilon: 1.0, mu: 1.0 },
        ],
        separation: 1.0,
        epsilon: 1.0,
        mu: 1.0,
        surface: SurfaceSpec::Rectangle { lo: [-0.75, -0.75], hi: [-0.25, 0.75] },
    };
    let grid = build_grid(&g, 8).unwrap().with_sigma(1.0).unwrap();
    let s = surface_points(&g, &grid).unwrap();
    let req = required_sources(&grid, &s, &[Axis::X, Axis::Y]).unwrap();
    let r = run_requests(&grid, &req, 300).unwrap();
    let gx = gamma_accumulate(&r, &s, &grid, Axis::X).unwrap();
    let gy = gamma_accumulate(&r, &s, &grid, Axis::Y).unwrap();
    let scale = gx.total().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(scale > 0.0);
    assert!(gy.total().iter().all(|v| v.abs() <= 1e-12 * scale));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Γ of a weighted point set is the weighted sum of single-point Γ.
    #[test]
    fn gamma_is_additive_over_points(w0 in -3.0f64..3.0, w1 in -3.0f64..3.0, shift in 0usize..5) {
        let (grid, base) = plates(16, 1.0, PlateSurface::SinglePoint);
        let n0 = base.points[0].node;
        let n1 = [n0[0] - 3 - shift, 0];
        let mk = |pts: Vec<(usize, f64)>| Surface {
            points: pts.into_iter().map(|(i, w)| casimir_td::lattice::SurfacePoint { node: [i, 0], normal: Axis::X, weight: w }).collect(),
            vacuum_subtracted: false,
        };
        let both = mk(vec![(n0[0], w0), (n1[0], w1)]);
        let r = responses(&grid, &both, 80);
        let g = gamma_accumulate(&r, &both, &grid, Axis::X).unwrap().total();
        let a = gamma_accumulate(&r, &mk(vec![(n0[0], 1.0)]), &grid, Axis::X).unwrap().total();
        let b = gamma_accumulate(&r, &mk(vec![(n1[0], 1.0)]), &grid, Axis::X).unwrap().total();
        for k in 0..g.len() {
            let expect = w0 * a[k] + w1 * b[k];
            prop_assert!((g[k] - expect).abs() <= 1e-9 * (a[k].abs() + b[k].abs()).max(1.0));
        }
    }
}

#[test]
fn request_order_is_deterministic() {
    let (grid, s) = plates(16, 1.0, PlateSurface::Closed);
    let a = required_sources(&grid, &s, &[Axis::X, Axis::Y]).unwrap();
    let b = required_sources(&grid, &s, &[Axis::Y, Axis::X]).unwrap();
    assert_eq!(a, b);
    let mut sorted = a.clone();
    sorted.sort();
    assert_eq!(a, sorted);
    assert!(a.iter().all(|r| r.source.kind == casimir_td::lattice::FieldKind::E || r.gauge == Gauge::Magnetic));
    let _ = Component::h(Axis::Z);
}
