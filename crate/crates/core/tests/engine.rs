use casimir_td::engine::{delay_offset, dtft, run_impulse, FieldState, Gauge, Probe, SourceSpec, Stepper};
use casimir_td::lattice::{
    build_grid, Axis, Component, FieldKind, GeometrySpec, MaterialGrid, Plate, PlateSurface, SurfaceSpec,
};
use casimir_td::oracle::fdfd_solve;
use num_complex::Complex64;
use proptest::prelude::*;

fn vacuum(len: f64, res: usize, sigma: f64) -> MaterialGrid {
    let g = GeometrySpec::vacuum_1d(len, SurfaceSpec::SinglePoint { position: [0.0, 0.0] });
    build_grid(&g, res).unwrap().with_sigma(sigma).unwrap()
}

fn plates(res: usize, sigma: f64) -> MaterialGrid {
    let g = GeometrySpec::plates_1d(1.0, 1.0, PlateSurface::SinglePoint);
    build_grid(&g, res).unwrap().with_sigma(sigma).unwrap()
}

fn slab_2d(res: usize, sigma: f64) -> MaterialGrid {
    let g = GeometrySpec {
        dimensionality: 2,
        lengths: [2.0, 1.5],
        plates: vec![
            Plate { center: [0.5, 0.0], thickness: [0.0, 0.5], perfect_conductor: true, epsilon: 1.0, mu: 1.0 },
            Plate { center: [-0.25, 0.25], thickness: [0.25, 0.25], perfect_conductor: false, epsilon: 3.0, mu: 1.5 },
        ],
        separation: 1.0,
        epsilon: 1.0,
        mu: 1.0,
        surface: SurfaceSpec::Points(vec![]),
    };
    build_grid(&g, res).unwrap().with_sigma(sigma).unwrap()
}

/// Every lattice location of every component.
fn all_probes(grid: &MaterialGrid) -> Vec<Probe> {
    let mut comps = vec![grid.e_component()];
    comps.extend(grid.h_axes().iter().map(|&a| Component::h(a)));
    comps
        .into_iter()
        .flat_map(|c| {
            (0..grid.len(c))
                .filter(move |&i| c.kind == FieldKind::H || !grid.conductor[i])
                .map(move |index| Probe { component: c, index })
        })
        .collect()
}

/// Largest relative deviation between the transformed impulse response and
/// the frequency-domain solve, over all lattice locations.
fn transform_mismatch(grid: &MaterialGrid, src: &SourceSpec, steps: usize, xi: f64) -> f64 {
    let probes = all_probes(grid);
    let series = run_impulse(grid, src, steps, &probes).unwrap();
    let f = fdfd_solve(grid, xi, src).unwrap();
    let mut scale: f64 = 0.0;
    let mut err: f64 = 0.0;
    for (p, s) in probes.iter().zip(&series) {
        let td = dtft(s, xi, grid.dt, delay_offset(src.gauge, p.component.kind));
        let fd = f.value(grid, p.component, p.index);
        scale = scale.max(fd.norm());
        err = err.max((td - fd).norm());
    }
    err / scale
}

#[test]
fn transform_matches_frequency_solve_1d() {
    for grid in [vacuum(2.0, 32, 1.0), plates(24, 1.0)] {
        let node = [grid.cells[0] / 2 - 3, 0];
        for gauge in [Gauge::Electric, Gauge::Magnetic] {
            let comp = match gauge {
                Gauge::Electric => grid.e_component(),
                Gauge::Magnetic => Component::h(Axis::Z),
            };
            let src = SourceSpec::at(&grid, gauge, comp, node).unwrap();
            for xi in [0.3, 2.0, 7.5] {
                let r = transform_mismatch(&grid, &src, 6000, xi);
                assert!(r < 1e-9, "{gauge:?} xi={xi}: {r:e}");
            }
        }
    }
}

#[test]
fn transform_matches_frequency_solve_2d() {
    let grid = slab_2d(8, 1.0);
    let node = [5, 4];
    for (gauge, comp) in [
        (Gauge::Electric, grid.e_component()),
        (Gauge::Magnetic, Component::h(Axis::X)),
        (Gauge::Magnetic, Component::h(Axis::Y)),
    ] {
        let src = SourceSpec::at(&grid, gauge, comp, node).unwrap();
        for xi in [0.7, 4.0] {
            let r = transform_mismatch(&grid, &src, 4000, xi);
            assert!(r < 1e-9, "{gauge:?} {comp:?} xi={xi}: {r:e}");
        }
    }
}

fn energies(grid: &MaterialGrid, gauge: Gauge, comp: Component, steps: usize) -> Vec<f64> {
    let src = SourceSpec::at(grid, gauge, comp, [grid.cells[0] / 2 - 1, grid.cells[1] / 2]).unwrap();
    let stepper = Stepper::new(grid);
    let mut state = FieldState::zeros(grid);
    stepper.step(&mut state, gauge, Some(&src));
    (0..steps).map(|_| stepper.step_with_energy(&mut state, gauge, Some(&src))).collect()
}

#[test]
fn lossless_energy_is_conserved() {
    for grid in [plates(20, 0.0), slab_2d(8, 0.0)] {
        for gauge in [Gauge::Electric, Gauge::Magnetic] {
            let comp = match gauge {
                Gauge::Electric => grid.e_component(),
                Gauge::Magnetic => Component::h(grid.h_axes()[0]),
            };
            let u = energies(&grid, gauge, comp, 2000);
            assert!(u[0] > 0.0);
            for v in &u {
                assert!((v - u[0]).abs() <= 1e-11 * u[0], "{gauge:?}: {v} vs {}", u[0]);
            }
        }
    }
}

#[test]
fn damped_energy_never_increases() {
    for grid in [plates(20, 0.5), slab_2d(8, 0.5)] {
        for gauge in [Gauge::Electric, Gauge::Magnetic] {
            let comp = match gauge {
                Gauge::Electric => grid.e_component(),
                Gauge::Magnetic => Component::h(grid.h_axes()[0]),
            };
            let u = energies(&grid, gauge, comp, 2000);
            for w in u.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-13), "{gauge:?}: {} -> {}", w[0], w[1]);
            }
            assert!(u[u.len() - 1] < 1e-6 * u[0]);
        }
    }
}

#[test]
fn responses_are_causal() {
    let grid = vacuum(4.0, 16, 1.0);
    let node = [20, 0];
    let src = SourceSpec::at(&grid, Gauge::Electric, grid.e_component(), node).unwrap();
    let probes: Vec<Probe> = (1..grid.cells[0]).map(|i| Probe { component: grid.e_component(), index: i }).collect();
    let series = run_impulse(&grid, &src, 30, &probes).unwrap();
    for (p, s) in probes.iter().zip(&series) {
        let d = p.index.abs_diff(node[0]);
        for (k, v) in s.iter().enumerate() {
            if k < d {
                assert_eq!(*v, 0.0, "node {} step {k}", p.index);
            }
        }
        if d < 30 {
            assert_ne!(s[d], 0.0, "front must reach node {}", p.index);
        }
    }
}

/// Exchanging ε and μ maps the magnetic gauge onto the electric gauge with
/// the E and H lattices swapped (H site m ↔ E node m + 1), as long as no
/// wall reflection has returned.
#[test]
fn gauges_are_dual() {
    let n = 200;
    let mut a = vacuum(n as f64 / 20.0, 20, 1.3);
    let mut b = a.clone();
    let (eps, mu) = (2.0, 0.5);
    a.eps.iter_mut().for_each(|e| *e = eps);
    a.mu[0].iter_mut().for_each(|m| *m = mu);
    b.eps.iter_mut().for_each(|e| *e = mu);
    b.mu[0].iter_mut().for_each(|m| *m = eps);
    let m = 99;
    let steps = 60;
    let hsrc = SourceSpec { component: Component::h(Axis::Z), index: m, gauge: Gauge::Magnetic };
    let esrc = SourceSpec { component: a.e_component(), index: m + 1, gauge: Gauge::Electric };
    let window = 30..170usize;
    let hp: Vec<Probe> = window.clone().map(|i| Probe { component: Component::h(Axis::Z), index: i }).collect();
    let ep: Vec<Probe> = window.clone().map(|i| Probe { component: a.e_component(), index: i + 1 }).collect();
    let ep2: Vec<Probe> = window.clone().map(|i| Probe { component: a.e_component(), index: i }).collect();
    let hp2: Vec<Probe> = window.clone().map(|i| Probe { component: Component::h(Axis::Z), index: i }).collect();
    let mag_h = run_impulse(&a, &hsrc, steps, &hp).unwrap();
    let ele_e = run_impulse(&b, &esrc, steps, &ep).unwrap();
    let mag_e = run_impulse(&a, &hsrc, steps, &ep2).unwrap();
    let ele_h = run_impulse(&b, &esrc, steps, &hp2).unwrap();
    for (x, y) in mag_h.iter().flatten().zip(ele_e.iter().flatten()) {
        assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
    }
    // E node m of the magnetic run ↔ H site m of the electric run.
    for (x, y) in mag_e.iter().flatten().zip(ele_h.iter().flatten()) {
        assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
    }
}

#[test]
fn conductor_field_stays_zero() {
    let grid = slab_2d(8, 0.3);
    let src = SourceSpec::at(&grid, Gauge::Electric, grid.e_component(), [5, 4]).unwrap();
    let stepper = Stepper::new(&grid);
    let mut state = FieldState::zeros(&grid);
    for _ in 0..300 {
        stepper.step(&mut state, Gauge::Electric, Some(&src));
        for (v, &c) in state.e.iter().zip(&grid.conductor) {
            if c {
                assert_eq!(*v, 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_matches_at_random_frequency(xi in 0.05f64..10.0, sigma in 0.5f64..4.0, off in 1usize..16) {
        let grid = plates(16, sigma);
        let node = [16 + off, 0];
        let src = SourceSpec::at(&grid, Gauge::Electric, grid.e_component(), node).unwrap();
        let r = transform_mismatch(&grid, &src, 4000, xi);
        prop_assert!(r < 1e-9, "{r:e}");
    }

    #[test]
    fn damped_energy_decays_for_any_sigma(sigma in 0.01f64..20.0, courant in 0.1f64..0.95) {
        let grid = plates(12, sigma).with_courant(courant).unwrap();
        let u = energies(&grid, Gauge::Magnetic, Component::h(Axis::Z), 400);
        for w in u.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}

#[test]
fn transform_at_zero_frequency_is_finite() {
    let grid = plates(16, 1.0);
    let src = SourceSpec::at(&grid, Gauge::Electric, grid.e_component(), [20, 0]).unwrap();
    let f = fdfd_solve(&grid, 1e-3, &src).unwrap();
    assert!(f.e.iter().all(|v: &Complex64| v.is_finite()));
}
