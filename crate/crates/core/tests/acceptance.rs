//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::path::Path;

use casimir_td::cli::{parse_config, run_and_emit, run_campaign, CampaignReport};
use casimir_td::engine::{delay_offset, dtft, run_impulse, Gauge, Probe, SourceSpec};
use casimir_td::kernel::{g_continuous, g_discrete, kernel_series, ContourParams, KernelForm};
use casimir_td::lattice::{
    angular_from_user, build_grid, surface_points, Axis, Component, GeometrySpec, PlateSurface,
    SurfaceSpec,
};
use casimir_td::oracle::{fdfd_solve, mode_sum_force_1d, wick_force_1d, WickQuadrature};
use casimir_td::stress::{gamma_accumulate, required_sources, run_requests};

const FDFD_TOL: f64 = 1e-8;
const WICK_TOL: f64 = 0.02;
const MODE_SUM_TOL: f64 = 0.05;
const SIGMA_TOL: f64 = 0.01;
const ENVELOPE_EXPONENT: f64 = -1.5;
const ENVELOPE_TOL: f64 = 0.2;
const KERNEL_EXPONENT_TOL: f64 = 0.15;
const SCALING_TOL: f64 = 0.2;
const ORDER_TOL: f64 = 0.2;
const SURFACE_MODE_TOL: f64 = 0.005;
const LINEAR_FIT_R2: f64 = 0.95;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Least-squares line through (x, y); returns (slope, intercept, R²).
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, sxy * sxy / (sxx * syy))
}

fn plates_config(h: f64, res: usize, sigma: f64, tmax: f64, extra: &str) -> String {
    format!(
        "[geometry]\nseparation_in_a = {h:?}\n{extra}\n[numeric]\nresolution_cells_per_a = {res}\n\
         sigma_in_2pi_c_over_a = {sigma:?}\nmax_time_in_a_over_c = {tmax:?}\n"
    )
}

fn campaign(text: &str) -> Result<CampaignReport, String> {
    let cfg = parse_config(text).map_err(|e| e.to_string())?;
    run_campaign(&cfg, None).map_err(|e| e.to_string())
}

fn converged_force(text: &str) -> Result<f64, String> {
    let r = campaign(text)?;
    let c = &r.components[0];
    match c.unconverged {
        None => Ok(c.force.asymptote),
        Some(d) => Err(format!("not converged (best delta {d:.2e})")),
    }
}

fn criterion_1() -> Outcome {
    let vac = GeometrySpec::vacuum_1d(2.0, SurfaceSpec::SinglePoint { position: [0.0, 0.0] });
    let pl = GeometrySpec::plates_1d(1.0, 1.0, PlateSurface::SinglePoint);
    let grids = [
        build_grid(&vac, 32).unwrap().with_sigma(1.0).unwrap(),
        build_grid(&pl, 40).unwrap().with_sigma(1.0).unwrap(),
        build_grid(&vac, 128).unwrap().with_sigma(1.0).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for grid in &grids {
        let node = [grid.cells[0] / 2 - 5, 0];
        for (gauge, comp) in [(Gauge::Electric, grid.e_component()), (Gauge::Magnetic, Component::h(Axis::Z))] {
            let src = SourceSpec::at(grid, gauge, comp, node).unwrap();
            let probes: Vec<Probe> = (1..grid.cells[0])
                .filter(|&i| !grid.conductor[i])
                .map(|i| Probe { component: grid.e_component(), index: i })
                .chain((0..grid.cells[0]).map(|i| Probe { component: Component::h(Axis::Z), index: i }))
                .collect();
            let steps = (80.0 / grid.dt) as usize;
            let series = run_impulse(grid, &src, steps, &probes).unwrap();
            for xi in [0.2, 1.0, 3.0, 10.0, 40.0] {
                let f = fdfd_solve(grid, xi, &src).unwrap();
                let mut scale: f64 = 0.0;
                let mut err: f64 = 0.0;
                for (p, s) in probes.iter().zip(&series) {
                    let td = dtft(s, xi, grid.dt, delay_offset(gauge, p.component.kind));
                    let fd = f.value(grid, p.component, p.index);
                    scale = scale.max(fd.norm());
                    err = err.max((td - fd).norm());
                }
                worst = worst.max(err / scale);
            }
        }
    }
    check(worst <= FDFD_TOL, format!("max relative deviation {worst:.2e} (limit {FDFD_TOL:e})"))
}

fn criterion_2() -> Outcome {
    let exact = mode_sum_force_1d(1.0, None);
    let mut errs = Vec::new();
    let mut detail = String::new();
    let mut ok = true;
    for res in [20, 40, 80] {
        let f = converged_force(&plates_config(1.0, res, 1.0, 60.0, ""))?;
        let wick = wick_force_1d(1.0, res, WickQuadrature::default()).map_err(|e| e.to_string())?;
        let (ew, em) = ((f - wick).abs() / wick, (f - exact).abs() / exact);
        ok &= ew <= WICK_TOL && (res != 40 || em <= MODE_SUM_TOL);
        errs.push(em);
        detail += &format!("res {res}: F={f:.6} wick {ew:.1e} modesum {em:.1e}; ");
    }
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    check(ok && monotone, format!("{detail}monotone={monotone}"))
}

fn criterion_3() -> Outcome {
    let a = converged_force(&plates_config(1.0, 40, 1.0, 60.0, ""))?;
    let b = converged_force(&plates_config(1.0, 40, 10.0, 150.0, ""))?;
    let d = (a - b).abs() / a;
    check(d <= SIGMA_TOL, format!("F(sigma=1)={a:.6} F(sigma=10)={b:.6} rel diff {d:.1e}"))
}

fn criterion_4() -> Outcome {
    let r = campaign(&plates_config(1.0, 40, 1.0, 60.0, ""))?;
    let c = &r.components[0];
    if let Some(d) = c.unconverged {
        return Err(format!("tolerance not reached (best delta {d:.2e})"));
    }
    // Envelope: the largest Δ in each quarter of a cavity round trip.
    let block = (0.5 / (c.force.t[1] - c.force.t[0])) as usize;
    let mut t = Vec::new();
    let mut y = Vec::new();
    for (ts, ds) in c.force.t.chunks(block).zip(c.force.delta.chunks(block)) {
        let m = ds.iter().cloned().fold(0.0, f64::max);
        if m < 1e-2 && m > 1e-11 {
            t.push(ts[0]);
            y.push(m.ln());
        }
    }
    if t.len() < 5 {
        return Err(format!("only {} envelope points in the fitting range", t.len()));
    }
    let (slope, _, r2) = linear_fit(&t, &y);
    check(
        slope < 0.0 && r2 >= LINEAR_FIT_R2,
        format!("log delta slope {slope:.3} per unit time, R^2 {r2:.4}, {} envelope points", t.len()),
    )
}

fn gamma_total(h: f64, res: usize, sigma: f64, tmax: f64) -> (f64, Vec<f64>) {
    let g = GeometrySpec::plates_1d(h, h, PlateSurface::SinglePoint);
    let grid = build_grid(&g, res).unwrap().with_sigma(sigma).unwrap();
    let s = surface_points(&g, &grid).unwrap();
    let steps = (tmax / grid.dt) as usize;
    let req = required_sources(&grid, &s, &[Axis::X]).unwrap();
    let r = run_requests(&grid, &req, steps).unwrap();
    (grid.dt, gamma_accumulate(&r, &s, &grid, Axis::X).unwrap().total())
}

fn criterion_5() -> Outcome {
    // Reflections from plates 10 units away return after t = 20.
    let (dt, g) = gamma_total(20.0, 20, 10.0, 6.0);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (k, v) in g.iter().enumerate() {
        let t = (k as f64 + 0.5) * dt;
        if (0.5..=5.0).contains(&t) {
            x.push(t.ln());
            y.push(v.abs().ln());
        }
    }
    let (p, _, r2) = linear_fit(&x, &y);
    check(
        (p - ENVELOPE_EXPONENT).abs() <= ENVELOPE_TOL,
        format!("exponent {p:.3} over t in [0.5, 5] (R^2 {r2:.4})"),
    )
}

fn criterion_6() -> Outcome {
    let mut out = Vec::new();
    let mut ok = true;
    for (sigma, want) in [(0.0, -1.0), (100.0, -0.5)] {
        let k = kernel_series(ContourParams {
            sigma_user: sigma,
            dt: 0.01,
            quadrature_points: 10_000_000,
            len: 20_000,
            form: KernelForm::Continuum,
        })
        .map_err(|e| e.to_string())?;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for n in 10..20_000 {
            x.push(((n as f64 + 0.5) * 0.01).ln());
            y.push(k.half[n].im.abs().ln());
        }
        let (p, _, _) = linear_fit(&x, &y);
        ok &= (p - want).abs() <= KERNEL_EXPONENT_TOL;
        out.push(format!("sigma={sigma}: {p:.3} (want {want})"));
    }
    check(ok, out.join(", "))
}

/// Late-time exponential decay time of Γ, from the samples between 1e-6 and
/// 1e-12 of the peak.
fn decay_time(h: f64, sigma: f64) -> f64 {
    let (dt, g) = gamma_total(h, 20, sigma, 1600.0);
    let peak = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (k, v) in g.iter().enumerate() {
        let r = v.abs() / peak;
        if r < 1e-6 && r > 1e-12 {
            x.push((k as f64 + 0.5) * dt);
            y.push(v.abs().ln());
        }
    }
    -1.0 / linear_fit(&x, &y).0
}

fn criterion_7() -> Outcome {
    let s: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&sig| decay_time(1.0, sig)).collect();
    let h: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&hh| decay_time(hh, 40.0)).collect();
    let sigma_ratios = [s[1] / s[0] / 2.0, s[2] / s[0] / 4.0];
    let h_ratios = [h[1] / h[0] / 4.0, h[2] / h[0] / 16.0];
    let ok = sigma_ratios.iter().chain(&h_ratios).all(|r| (r - 1.0).abs() <= SCALING_TOL);
    check(
        ok,
        format!(
            "tau(sigma=10,20,40)={:.2},{:.2},{:.2}; tau(h=0.5,1,2)={:.2},{:.2},{:.2}; normalized ratios {:.3},{:.3},{:.3},{:.3}",
            s[0], s[1], s[2], h[0], h[1], h[2], sigma_ratios[0], sigma_ratios[1], h_ratios[0], h_ratios[1]
        ),
    )
}

fn criterion_8() -> Outcome {
    let sigma = angular_from_user(1.0);
    let mut out = Vec::new();
    let mut ok = true;
    for xi in [0.1, 1.0, 3.0] {
        let exact = g_continuous(xi, sigma).unwrap();
        let err = |dt: f64| (g_discrete(xi, sigma, dt).unwrap() - exact).norm();
        let order = (err(0.04) / err(0.02)).log2();
        ok &= (order - 2.0).abs() <= ORDER_TOL;
        out.push(format!("xi={xi}: {order:.3}"));
    }
    check(ok, out.join(", "))
}

fn criterion_9() -> Outcome {
    let single = converged_force(&plates_config(1.0, 40, 1.0, 60.0, ""))?;
    let closed = converged_force(&plates_config(
        1.0,
        40,
        1.0,
        2000.0,
        "outer_gap_in_a = 20.0\nsurface = { mode = \"closed\" }",
    ))?;
    let d = (closed - single).abs() / single;
    check(d <= SURFACE_MODE_TOL, format!("closed {closed:.6} single {single:.6} rel diff {d:.2e}"))
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "timings.csv")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut sets = Vec::new();
    for workers in [1usize, 4, 8] {
        let dir = root.path().join(format!("w{workers}"));
        let text = format!(
            "{}[campaign]\ncomponents = [\"x\", \"y\"]\n[output]\ndirectory = {:?}\nplot_data = true\n",
            plates_config(1.0, 40, 1.0, 30.0, "outer_gap_in_a = 2.0\nsurface = { mode = \"closed\" }"),
            dir.to_str().unwrap()
        );
        let cfg = parse_config(&text).map_err(|e| e.to_string())?;
        run_and_emit(&cfg, Some(workers)).map_err(|e| e.to_string())?;
        sets.push(read_outputs(&dir));
    }
    let same = sets.windows(2).all(|w| w[0] == w[1]);
    check(same && !sets[0].is_empty(), format!("{} files compared across 1, 4, 8 workers", sets[0].len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("transform equivalence", criterion_1),
        ("force ground truth", criterion_2),
        ("contour independence", criterion_3),
        ("exponential convergence", criterion_4),
        ("vacuum envelope", criterion_5),
        ("kernel decay transition", criterion_6),
        ("large-sigma scalings", criterion_7),
        ("discretization order", criterion_8),
        ("surface-mode equivalence", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
