//! Acceptance suite. Each test prints one `PASS` or `FAIL` line with the
//! measured value and its bound, then asserts it. Tests hold a shared lock so
//! that wall-clock measurements are not disturbed by one another.
//!
//! Report CSVs from the study runs are written under `CARGO_TARGET_TMPDIR`.

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use godunov_seis::cup::{ssp_rk2_step, CupConfig};
use godunov_seis::fd::{central_coeffs, fd_step, FdState};
use godunov_seis::grid::{Axis, Field, GridGeometry};
use godunov_seis::harness::study::{bench, convergence_study, lambda_sweep, ReferenceSpec};
use godunov_seis::harness::{convergence_order, Domain, Method, ModelSource, Scenario, SourceSpec};
use godunov_seis::io;
use godunov_seis::model::{CellMaterial, LayeredModelSpec, MaterialField};
use godunov_seis::riemann::{acoustic_eigenbasis, fwave_split, wave_split, EigenBasis, Limiter};
use godunov_seis::state::{flux, total_mass, BoundarySpec, StateField, Q3};
use godunov_seis::wpa::{step_1d, step_wpa, Transverse, WpaConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn out_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

fn rel_err(a: Q3, b: Q3) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_q(rng: &mut StdRng) -> Q3 {
    Q3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn periodic_line(interior: &[Q3], halo: usize) -> Vec<Q3> {
    let n = interior.len();
    (0..n + 2 * halo).map(|k| interior[(k + n - halo) % n]).collect()
}

fn wpa(transverse: Transverse, limiter: Limiter) -> WpaConfig {
    WpaConfig { limiter, transverse, ..WpaConfig::default() }
}

// ------------------------------------------------------------ decomposition

#[test]
fn decomposition_identities() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let (mut worst_q, mut worst_f) = (0.0f64, 0.0f64);
    let mut max_ratio = 1.0f64;
    for case in 0..10_000 {
        let rho_l = log_uniform(&mut rng, 0.1, 10.0);
        let c_l = log_uniform(&mut rng, 100.0, 10_000.0);
        let left = CellMaterial::from_speed(c_l, rho_l);
        let ratio = log_uniform(&mut rng, 0.01, 100.0);
        let rho_r = log_uniform(&mut rng, 0.1, 10.0);
        let right = CellMaterial::from_speed(left.z * ratio / rho_r, rho_r);
        max_ratio = max_ratio.max(ratio.max(1.0 / ratio));
        let axis = if case % 2 == 0 { Axis::X } else { Axis::Y };
        // Momentum scaled by the interface impedance, as in a physical wave.
        let z = (left.z * right.z).sqrt();
        let scaled = |q: Q3| Q3::new(q[0], z * q[1], z * q[2]);
        let (ql, qr) = (scaled(random_q(&mut rng)), scaled(random_q(&mut rng)));

        let basis = EigenBasis::interface(&left, &right, axis);
        let fan = wave_split(ql, qr, &basis).unwrap();
        worst_q = worst_q.max(rel_err(fan.sum(), qr - ql));

        let ffan = fwave_split(ql, qr, &left, &right, axis);
        let df = flux(qr, &right, axis) - flux(ql, &left, axis);
        worst_f = worst_f.max(rel_err(ffan.sum(), df));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_q <= 1e-12 && worst_f <= 1e-12 && secs < 5.0;
    report(
        "decomposition identities",
        pass,
        format!(
            "10000 cases, impedance ratio up to {max_ratio:.1}; wave_split rel err {worst_q:.2e}, fwave_split rel err {worst_f:.2e} (tol 1e-12); {secs:.2} s (limit 5 s)"
        ),
    );
}

// ----------------------------------------------------------- Lax-Wendroff

fn matvec(a: &[[f64; 3]; 3], q: Q3) -> Q3 {
    Q3::new(
        a[0][0] * q[0] + a[0][1] * q[1] + a[0][2] * q[2],
        a[1][0] * q[0] + a[1][1] * q[1] + a[1][2] * q[2],
        a[2][0] * q[0] + a[2][1] * q[1] + a[2][2] * q[2],
    )
}

#[test]
fn lax_wendroff_equivalence() {
    let _g = serial();
    let mut rng = StdRng::seed_from_u64(2);
    let n = 24;
    let halo = 2;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rho = log_uniform(&mut rng, 0.1, 10.0);
        let c = log_uniform(&mut rng, 0.5, 5.0);
        let mat = CellMaterial::from_speed(c, rho);
        let dx = rng.gen_range(0.1..2.0);
        let dt = rng.gen_range(0.05..1.0) * dx / c;
        let q: Vec<Q3> = (0..n).map(|_| random_q(&mut rng)).collect();
        let line = periodic_line(&q, halo);
        let mats = vec![mat; line.len()];
        let got = step_1d(&line, &mats, Axis::X, halo, dt, dx, Limiter::None).unwrap();

        // q_t + A q_x = 0 with A = d f / d q for f = (-m_u / rho, -K eps, 0).
        let a = [[0.0, -1.0 / rho, 0.0], [-mat.kappa, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let r = dt / dx;
        for i in 0..n {
            let (qm, q0, qp) = (q[(i + n - 1) % n], q[i], q[(i + 1) % n]);
            let d1 = matvec(&a, qp - qm);
            let d2 = matvec(&a, matvec(&a, qp - 2.0 * q0 + qm));
            let lw = q0 - 0.5 * r * d1 + 0.5 * r * r * d2;
            let scale = q0.norm().max(qm.norm()).max(qp.norm());
            worst = worst.max((got[halo + i] - lw).norm() / scale);
        }
    }
    report(
        "Lax-Wendroff equivalence",
        worst <= 1e-12,
        format!("100 random states, limiter none: max rel diff {worst:.2e} (tol 1e-12)"),
    );
}

// -------------------------------------------------------------- conservation

#[test]
fn conservation_periodic() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let n = 64;
    let h = 1.0 / n as f64;
    let g = GridGeometry::new(n, n, h, h, 0.0, 0.0, 2).unwrap();
    let bc = BoundarySpec::periodic();
    let speed: Vec<f64> = (0..n * n).map(|_| rng.gen_range(1.0..3.0)).collect();
    let dens: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let mut mat = MaterialField::from_speed_density(&g, &speed, &dens).unwrap();
    mat.apply_boundary(&bc).unwrap();
    let q0 = StateField::from_fn(&g, |_, _| random_q(&mut rng));
    let dt = 0.25 * h / mat.max_speed();
    let m0 = total_mass(&q0);
    let abs = total_mass(&StateField::from_fn(&g, |i, j| q0.get(i as isize, j as isize).map(f64::abs)));

    let mut lines = Vec::new();
    let mut pass = true;
    for method in [Method::Dswpa, Method::Fwpa, Method::Cup] {
        let mut q = q0.clone();
        let mut worst = 0.0f64;
        for step in 0..200 {
            q = match method {
                Method::Dswpa => step_wpa(&q, &mat, dt, &bc, &wpa(Transverse::Dswpa, Limiter::Superbee), step),
                Method::Fwpa => step_wpa(&q, &mat, dt, &bc, &wpa(Transverse::Fwpa, Limiter::Superbee), step),
                _ => ssp_rk2_step(&q, &mat, dt, &bc, &CupConfig::default()),
            }
            .unwrap();
            let m = total_mass(&q);
            for k in 0..3 {
                worst = worst.max((m[k] - m0[k]).abs() / abs[k]);
            }
        }
        pass &= worst <= 1e-12;
        lines.push(format!("{method} {worst:.2e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    report(
        "conservation",
        pass,
        format!(
            "64x64 periodic, random heterogeneous medium and data, 200 steps; max drift / total |q|: {} (tol 1e-12); {secs:.1} s (limit 30 s)",
            lines.join(", ")
        ),
    );
}

// ------------------------------------------------------------- unit CFL

#[test]
fn unit_cfl_exactness() {
    let _g = serial();
    let n = 40;
    let halo = 2;
    let (c, rho) = (2.0, 1.5);
    let mat = CellMaterial::from_speed(c, rho);
    let dx = 0.5;
    let dt = dx / c;
    let mut worst = 0.0f64;
    for dir in [1.0, -1.0] {
        // Simple wave travelling in direction `dir`: (eps, m_u) = phi (1, -Z dir).
        let phi = |i: usize| (-((i as f64 - 12.0) / 3.0).powi(2)).exp() + if (25..30).contains(&i) { 0.7 } else { 0.0 };
        let init: Vec<Q3> = (0..n).map(|i| Q3::new(phi(i), -mat.z * dir * phi(i), 0.0)).collect();
        let mut q = init.clone();
        for limiter in [Limiter::Superbee, Limiter::None] {
            q.clone_from(&init);
            for _ in 0..50 {
                let line = periodic_line(&q, halo);
                let out = step_1d(&line, &vec![mat; line.len()], Axis::X, halo, dt, dx, limiter).unwrap();
                q = out[halo..halo + n].to_vec();
            }
            for i in 0..n {
                let src = ((i as isize - dir as isize * 50).rem_euclid(n as isize)) as usize;
                worst = worst.max((q[i] - init[src]).norm());
            }
        }
    }
    report(
        "unit-CFL exactness",
        worst <= 1e-12,
        format!("c dt / dx = 1, 50 steps, both directions: max error vs circular shift {worst:.2e} (tol 1e-12)"),
    );
}

// ------------------------------------------------------------- smooth order

/// Periodic Gaussian profile of a diagonal plane wave, period `1/sqrt(2)` in
/// the travel coordinate.
fn gaussian_profile(s: f64, w: f64) -> f64 {
    let p = 1.0 / 2f64.sqrt();
    (-3..=3).map(|k| (-((s - 0.5 * p + k as f64 * p) / w).powi(2)).exp()).sum()
}

/// Cell averages (4x4 Gauss) of the right-going diagonal plane wave at `t`.
fn plane_wave_averages(n: usize, t: f64, w: f64) -> Vec<Q3> {
    let h = 1.0 / n as f64;
    let gp = [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526];
    let gw = [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538];
    let r2 = 1.0 / 2f64.sqrt();
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let mut a = 0.0;
            for (p, wp) in gp.iter().zip(gw) {
                for (q, wq) in gp.iter().zip(gw) {
                    let x = (i as f64 + 0.5 + 0.5 * p) * h;
                    let y = (j as f64 + 0.5 + 0.5 * q) * h;
                    a += wp * wq * 0.25 * gaussian_profile(r2 * (x + y) - t, w);
                }
            }
            out.push(Q3::new(a, -r2 * a, -r2 * a));
        }
    }
    out
}

fn fv_smooth_error(method: Method, n: usize) -> f64 {
    let (w, t) = (0.1, 0.5);
    let h = 1.0 / n as f64;
    let g = GridGeometry::new(n, n, h, h, 0.0, 0.0, 2).unwrap();
    let bc = BoundarySpec::periodic();
    let mut mat = MaterialField::uniform(&g, 1.0, 1.0).unwrap();
    mat.apply_boundary(&bc).unwrap();
    let init = plane_wave_averages(n, 0.0, w);
    let mut q = StateField::from_fn(&g, |i, j| init[j * n + i]);
    let steps = (t / (0.25 * h)).ceil() as usize;
    let dt = t / steps as f64;
    for step in 0..steps {
        q = match method {
            Method::Dswpa => step_wpa(&q, &mat, dt, &bc, &wpa(Transverse::Dswpa, Limiter::None), step),
            Method::Fwpa => step_wpa(&q, &mat, dt, &bc, &wpa(Transverse::Fwpa, Limiter::None), step),
            _ => ssp_rk2_step(&q, &mat, dt, &bc, &CupConfig { limiter: Limiter::None, cfl: 0.25 }),
        }
        .unwrap();
    }
    let exact = plane_wave_averages(n, t, w);
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let d = q.get(i as isize, j as isize) - exact[j * n + i];
            sum += (d[0].abs() + d[1].abs() + d[2].abs()) * h * h;
        }
    }
    sum
}

/// 1-D periodic plane wave `sin(x - n Omega)` with the leapfrog dispersion
/// relation built in, so only the spatial error is measured.
fn fd_plane_wave_error(nx: usize, half: usize) -> f64 {
    let tau = std::f64::consts::TAU;
    let dx = tau / nx as f64;
    let g = GridGeometry::new(nx, half.max(3), dx, dx, 0.0, 0.0, half.max(2)).unwrap();
    let bc = BoundarySpec::periodic();
    let mut m = MaterialField::uniform(&g, 1.0, 1.0).unwrap();
    m.apply_boundary(&bc).unwrap();
    let t_end = 1.0;
    let dt0 = 0.25 * tau / 64.0;
    let steps = (t_end / dt0).ceil() as usize;
    let dt = t_end / steps as f64;
    let omega = (1.0 - 0.5 * dt * dt).acos();
    let wave = |n: f64| Field::from_fn(&g, |i, _| (g.x_center(i as isize) - n * omega).sin());
    let mut s = FdState { sig_prev: wave(-1.0), sig_curr: wave(0.0) };
    let st = central_coeffs(half).unwrap();
    for _ in 0..steps {
        s = fd_step(s, &m, dt, &st, &bc, &[]).unwrap();
    }
    let exact = wave(steps as f64);
    let rows = g.ny as f64;
    s.sig_curr.interior().iter().zip(exact.interior()).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx / rows
}

#[test]
fn smooth_problem_order() {
    let _g = serial();
    let start = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for method in [Method::Dswpa, Method::Fwpa, Method::Cup] {
        let ns = [32usize, 64, 128];
        let errs: Vec<f64> = ns.iter().map(|&n| fv_smooth_error(method, n)).collect();
        let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let p = convergence_order(&errs, &hs).unwrap();
        pass &= p >= 1.8;
        lines.push(format!("{method} {p:.3} (>= 1.8)"));
    }
    for (method, half, bound, ns) in [(Method::Df2, 1, 1.8, [16usize, 32, 64]), (Method::Df8, 4, 7.0, [8, 16, 32])] {
        let errs: Vec<f64> = ns.iter().map(|&n| fd_plane_wave_error(n, half)).collect();
        let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let p = convergence_order(&errs, &hs).unwrap();
        pass &= p >= bound;
        lines.push(format!("{method} {p:.3} (>= {bound})"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    report(
        "smooth-problem order",
        pass,
        format!("fitted 1-norm orders: {}; {secs:.1} s (limit 120 s)", lines.join(", ")),
    );
}

// --------------------------------------------------------------- test case 1

fn test_case_1() -> Scenario {
    Scenario {
        method: Method::Df2,
        dx: 20.0,
        dy: 20.0,
        domain: Domain { x0: 0.0, y0: 0.0, width: 1000.0, height: 1000.0 },
        model: ModelSource::Layered(LayeredModelSpec { v_base: 1500.0, dv: 1000.0, n_layers: 5, lambda_pct: 0.0 }),
        source: SourceSpec::new(500.0, 20.0, 15.0),
        receivers: None,
        boundaries: BoundarySpec::default(),
        cfl: 0.25,
        t_final: 0.3,
        snapshots: vec![],
        cut_x: Some(330.0),
        side_pad: None,
        limiter: Limiter::Superbee,
        repeats: 1,
    }
}

#[test]
fn test_case_1_heterogeneity_slope() {
    let _g = serial();
    let start = Instant::now();
    let methods = [Method::Df2, Method::Dswpa, Method::Fwpa, Method::Cup];
    let rep = convergence_study(&test_case_1(), &methods, &[20.0, 10.0, 5.0], ReferenceSpec::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let _ = io::write_convergence(&out_dir().join("tc1_convergence.csv"), &rep);
    let mut pass = secs < 600.0;
    let mut lines = Vec::new();
    for s in &rep.slopes {
        pass &= (0.7..=1.3).contains(&s.one_norm);
        lines.push(format!("{} {:.3}", s.method, s.one_norm));
    }
    pass &= rep.slopes.len() == methods.len();
    report(
        "test-case-1 slope",
        pass,
        format!(
            "1-norm cut-error orders at x=330 m, t=0.3 s, h=20/10/5 m vs DF20 at 1.25 m: {} (within [0.7, 1.3]); {secs:.0} s (limit 600 s)",
            lines.join(", ")
        ),
    );
}

// ----------------------------------------------------------------- lambda sweep

#[test]
fn lambda_sweep_reproduction() {
    let _g = serial();
    let start = Instant::now();
    let mut base = test_case_1();
    base.dx = 10.0;
    base.dy = 10.0;
    let rows = lambda_sweep(&base, &[0.0, 100.0], &Method::ALL, ReferenceSpec::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let _ = io::write_sweep(&out_dir().join("lambda_sweep.csv"), &rows);
    let at = |lambda: f64, m: Method| rows.iter().find(|r| r.lambda == lambda && r.method == m).unwrap();

    let mut pass = secs < 600.0;
    let mut smaller = Vec::new();
    let mut factors = Vec::new();
    for m in Method::ALL {
        let (a, b) = (at(0.0, m), at(100.0, m));
        let ok = b.max_norm < a.max_norm && b.one_norm < a.one_norm;
        pass &= ok;
        if !ok {
            smaller.push(format!("{m} not reduced"));
        }
        factors.push((m, a.max_norm / b.max_norm));
    }
    let fv_max = factors.iter().filter(|(m, _)| !m.is_fd()).map(|(_, f)| *f).fold(0.0, f64::max);
    let fd_min = factors.iter().filter(|(m, _)| m.is_fd()).map(|(_, f)| *f).fold(f64::INFINITY, f64::min);
    pass &= fd_min > fv_max;
    let list: Vec<String> = factors.iter().map(|(m, f)| format!("{m} {f:.2}")).collect();
    report(
        "lambda-sweep reproduction",
        pass,
        format!(
            "h=10 m, max-norm reduction factor lambda 0 -> 100: {}; lambda=100 error smaller for every method: {}; min FD factor {fd_min:.2} > max FV factor {fv_max:.2}: {}; {secs:.0} s (limit 600 s)",
            list.join(", "),
            if smaller.is_empty() { "yes".to_string() } else { smaller.join(", ") },
            fd_min > fv_max
        ),
    );
}

// ---------------------------------------------------------------------- TVD

fn total_variation(w: &[f64]) -> f64 {
    let n = w.len();
    (0..n).map(|i| (w[(i + 1) % n] - w[i]).abs()).sum()
}

#[test]
fn tvd_characteristic_variables() {
    let _g = serial();
    let mut rng = StdRng::seed_from_u64(8);
    let n = 100;
    let halo = 2;
    let mut worst = f64::NEG_INFINITY;
    let mut runs = 0;
    for _ in 0..20 {
        let rho = log_uniform(&mut rng, 0.2, 5.0);
        let c = log_uniform(&mut rng, 0.5, 4.0);
        let mat = CellMaterial::from_speed(c, rho);
        let basis = acoustic_eigenbasis(mat.rho, mat.kappa, Axis::X);
        let dx = 1.0;
        for nu in [0.25, 0.5, 0.9, 1.0] {
            let dt = nu * dx / c;
            let mut q = Vec::with_capacity(n);
            while q.len() < n {
                let v = random_q(&mut rng);
                let len = rng.gen_range(1..12);
                q.extend(std::iter::repeat(v).take(len));
            }
            q.truncate(n);
            let tv = |q: &[Q3]| -> [f64; 3] {
                let w: Vec<[f64; 3]> = q.iter().map(|&v| basis.coefficients(v)).collect();
                [0, 1, 2].map(|p| total_variation(&w.iter().map(|c| c[p]).collect::<Vec<_>>()))
            };
            let mut prev = tv(&q);
            for _ in 0..100 {
                let line = periodic_line(&q, halo);
                let out = step_1d(&line, &vec![mat; line.len()], Axis::X, halo, dt, dx, Limiter::Superbee).unwrap();
                q = out[halo..halo + n].to_vec();
                let now = tv(&q);
                for p in 0..3 {
                    worst = worst.max(now[p] - prev[p]);
                }
                prev = now;
            }
            runs += 1;
        }
    }
    report(
        "TVD",
        worst <= 1e-12,
        format!("{runs} runs x 100 SuperBee steps, Courant 0.25-1: largest per-step TV increase {worst:.2e} (tol 1e-12)"),
    );
}

// -------------------------------------------------------------------- timing

#[test]
fn timing_ordering() {
    let _g = serial();
    let mut base = test_case_1();
    base.repeats = 3;
    let rows = bench(&base, &Method::ALL, &[10.0]).unwrap();
    let _ = io::write_timing(&out_dir().join("timing.csv"), &rows);
    let per_step = |m: Method| {
        let r = rows.iter().find(|r| r.method == m).unwrap();
        r.seconds / r.steps as f64
    };
    let (df2, df8) = (per_step(Method::Df2), per_step(Method::Df8));
    let fv_min = [Method::Dswpa, Method::Fwpa, Method::Cup].map(per_step).into_iter().fold(f64::INFINITY, f64::min);
    let list: Vec<String> = rows.iter().map(|r| format!("{} {:.3} ms", r.method, 1e3 * r.seconds / r.steps as f64)).collect();
    report(
        "timing ordering",
        df2 < df8 && df8 < fv_min,
        format!("h=10 m, mean of 3 runs, per-step wall clock: {}; DF2 < DF8 < every FV", list.join(", ")),
    );
}
