//! One simulation run: grid padding, material setup, the time loop with
//! source injection and recording, snapshots, the final vertical cut and
//! wall-clock timing.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cup::{ssp_rk2_step, CupConfig};
use crate::error::{Error, Result};
use crate::fd::{central_coeffs, fd_step, FdStencil, FdState, PointSource};
use crate::grid::{Field, GridGeometry};
use crate::harness::signal::{ReceiverLine, Seismogram, SourceSpec};
use crate::model::{build_layered_model, LayeredModelSpec, MaterialField};
use crate::riemann::Limiter;
use crate::state::{BoundarySpec, StateField};
use crate::wpa::{step_wpa, Transverse, WpaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Df2,
    Df8,
    Df20,
    Dswpa,
    Fwpa,
    Cup,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Df2, Method::Df8, Method::Df20, Method::Dswpa, Method::Fwpa, Method::Cup];

    pub fn name(self) -> &'static str {
        match self {
            Method::Df2 => "DF2",
            Method::Df8 => "DF8",
            Method::Df20 => "DF20",
            Method::Dswpa => "DSWPA",
            Method::Fwpa => "FWPA",
            Method::Cup => "CUP",
        }
    }

    /// Stencil half-width for the finite-difference methods.
    pub fn fd_half_width(self) -> Option<usize> {
        match self {
            Method::Df2 => Some(1),
            Method::Df8 => Some(4),
            Method::Df20 => Some(10),
            _ => None,
        }
    }

    pub fn is_fd(self) -> bool {
        self.fd_half_width().is_some()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::config("method", format!("unknown method `{s}` (expected one of DF2, DF8, DF20, DSWPA, FWPA, CUP)")))
    }
}

/// Physical (unpadded) rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub y0: f64,
    pub width: f64,
    pub height: f64,
}

impl Domain {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x0 + self.width && y >= self.y0 && y <= self.y0 + self.height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Layered(LayeredModelSpec),
    /// A material field on its own grid, point-sampled onto the run grid.
    Field(MaterialField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub method: Method,
    pub dx: f64,
    pub dy: f64,
    pub domain: Domain,
    pub model: ModelSource,
    pub source: SourceSpec,
    pub receivers: Option<ReceiverLine>,
    pub boundaries: BoundarySpec,
    pub cfl: f64,
    pub t_final: f64,
    pub snapshots: Vec<f64>,
    /// Record a vertical cut of `sigma` at this x at the final time.
    pub cut_x: Option<f64>,
    /// Side extension per edge (m); `None` picks the smallest width that keeps
    /// side reflections away from every observation point until `t_final`.
    pub side_pad: Option<f64>,
    pub limiter: Limiter,
    pub repeats: usize,
}

impl Scenario {
    /// Same scenario on a different grid and method.
    pub fn with_grid(&self, method: Method, dx: f64, dy: f64) -> Self {
        Self { method, dx, dy, ..self.clone() }
    }

    fn observation_xs(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.receivers.iter().flat_map(|r| r.xs.iter().copied()).collect();
        xs.extend(self.cut_x);
        xs.extend(self.snapshots.first().map(|_| self.domain.x0));
        xs.extend(self.snapshots.first().map(|_| self.domain.x0 + self.domain.width));
        xs
    }

    /// Side pad needed so the first reflection off a padded side edge reaches
    /// no observation point before `t_final`.
    pub fn auto_side_pad(&self, c_max: f64) -> f64 {
        let reach = c_max * self.t_final;
        let left = self.source.x - self.domain.x0;
        let right = self.domain.x0 + self.domain.width - self.source.x;
        let obs = self.observation_xs();
        let mut pad = 0.0f64;
        for (ds, dist) in [
            (left, Box::new(|x: f64| x - self.domain.x0) as Box<dyn Fn(f64) -> f64>),
            (right, Box::new(|x: f64| self.domain.x0 + self.domain.width - x)),
        ] {
            let dr = obs.iter().map(|&x| dist(x)).fold(ds, f64::min);
            pad = pad.max(0.5 * (reach - ds - dr));
        }
        pad
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0 && self.dy > 0.0) {
            return Err(Error::config("grid", format!("cell sizes must be positive (dx={}, dy={})", self.dx, self.dy)));
        }
        if !(self.domain.width > 0.0 && self.domain.height > 0.0) {
            return Err(Error::config("domain", "width and height must be positive"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::config("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::config("t_final", format!("must be a finite non-negative time, got {}", self.t_final)));
        }
        if self.repeats == 0 {
            return Err(Error::config("repeats", "must be at least 1"));
        }
        if let Some(p) = self.side_pad {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::config("side_pad", format!("must be non-negative, got {p}")));
            }
        }
        self.source.validate()?;
        if !self.domain.contains(self.source.x, self.source.y) {
            return Err(Error::SourceOutside { x: self.source.x, y: self.source.y });
        }
        if let Some(r) = &self.receivers {
            if r.every == 0 {
                return Err(Error::config("receivers.every", "must be at least 1"));
            }
            for &x in &r.xs {
                if !self.domain.contains(x, r.y) {
                    return Err(Error::config("receivers", format!("receiver ({x}, {}) lies outside the domain", r.y)));
                }
            }
        }
        if let Some(x) = self.cut_x {
            if !self.domain.contains(x, self.domain.y0) {
                return Err(Error::config("cut_x", format!("{x} lies outside the domain")));
            }
        }
        self.boundaries.validate()?;
        Ok(())
    }
}

/// `cfl * min(dx, dy) / c_max`.
pub fn cfl_dt(c_max: f64, geom: &GridGeometry, cfl: f64) -> f64 {
    cfl * geom.dx.min(geom.dy) / c_max
}

fn cells_along(extent: f64, d: f64, key: &str) -> Result<usize> {
    let n = extent / d;
    let r = n.round();
    if (n - r).abs() > 1e-6 * n.max(1.0) || r < 3.0 {
        return Err(Error::config(key, format!("extent {extent} is not a multiple of the cell size {d} (or too small)")));
    }
    Ok(r as usize)
}

/// Everything fixed before the time loop.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub geom: GridGeometry,
    /// Padding cells on each side in x.
    pub pad_cells: usize,
    pub nx_phys: usize,
    pub mat: MaterialField,
    pub dt: f64,
    pub steps: usize,
    /// Source cells and weights (summing to 1) in full-grid indices.
    pub src_cells: Vec<(usize, usize, f64)>,
    pub rx_cells: Vec<(usize, usize)>,
    pub snapshot_steps: Vec<usize>,
}

/// Bilinear weights of the cells whose centres surround `(x, y)`, so that the
/// point keeps its position on every grid. Points nearer an edge than the
/// first cell centre are clamped to it.
pub fn source_weights(phys: &GridGeometry, x: f64, y: f64) -> Result<Vec<(usize, usize, f64)>> {
    phys.locate(x, y).ok_or(Error::SourceOutside { x, y })?;
    let axis = |p: f64, o: f64, h: f64, n: usize| {
        let f = ((p - o) / h - 0.5).clamp(0.0, (n - 1) as f64);
        let k = (f.floor() as usize).min(n - 2);
        (k, f - k as f64)
    };
    let (i, fx) = axis(x, phys.x0, phys.dx, phys.nx);
    let (j, fy) = axis(y, phys.y0, phys.dy, phys.ny);
    let cells = [
        (i, j, (1.0 - fx) * (1.0 - fy)),
        (i + 1, j, fx * (1.0 - fy)),
        (i, j + 1, (1.0 - fx) * fy),
        (i + 1, j + 1, fx * fy),
    ];
    Ok(cells.into_iter().filter(|c| c.2 != 0.0).collect())
}

pub fn prepare(scn: &Scenario) -> Result<RunSetup> {
    scn.validate()?;
    let nx_phys = cells_along(scn.domain.width, scn.dx, "grid.dx")?;
    let ny = cells_along(scn.domain.height, scn.dy, "grid.dy")?;
    let halo = scn.method.fd_half_width().unwrap_or(2).max(2);
    let phys = GridGeometry::new(nx_phys, ny, scn.dx, scn.dy, scn.domain.x0, scn.domain.y0, halo)?;
    let c_max_model = match &scn.model {
        ModelSource::Layered(spec) => {
            spec.validate()?;
            spec.layer_speeds().into_iter().fold(0.0, f64::max)
        }
        ModelSource::Field(m) => m.max_speed(),
    };
    let pad = scn.side_pad.unwrap_or_else(|| scn.auto_side_pad(c_max_model));
    let mut pad_cells = (pad / scn.dx - 1e-9).ceil().max(0.0) as usize;
    if pad > 0.0 && scn.side_pad.is_none() {
        // A few cells of slack for stencil reach and numerical dispersion.
        pad_cells += halo + 2;
    }
    let geom = GridGeometry::new(
        nx_phys + 2 * pad_cells,
        ny,
        scn.dx,
        scn.dy,
        scn.domain.x0 - pad_cells as f64 * scn.dx,
        scn.domain.y0,
        halo,
    )?;
    let mut mat = match &scn.model {
        ModelSource::Layered(spec) => build_layered_model(spec, &geom)?,
        ModelSource::Field(m) => m.resample(&geom)?,
    };
    mat.apply_boundary(&scn.boundaries)?;
    let c_max = mat.max_speed();
    let dt0 = cfl_dt(c_max, &geom, scn.cfl);
    let steps = if scn.t_final > 0.0 { (scn.t_final / dt0 - 1e-9).ceil().max(1.0) as usize } else { 0 };
    let dt = if steps > 0 { scn.t_final / steps as f64 } else { dt0 };
    let src_cells = source_weights(&phys, scn.source.x, scn.source.y)?
        .into_iter()
        .map(|(i, j, w)| (i + pad_cells, j, w))
        .collect();
    let rx_cells = match &scn.receivers {
        Some(r) => r.cells(&phys)?.into_iter().map(|(i, j)| (i + pad_cells, j)).collect(),
        None => Vec::new(),
    };
    let snapshot_steps = scn
        .snapshots
        .iter()
        .map(|&t| ((t / dt).round().max(0.0) as usize).min(steps))
        .collect();
    Ok(RunSetup { geom, pad_cells, nx_phys, mat, dt, steps, src_cells, rx_cells, snapshot_steps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// `sigma` over the physical domain.
    pub sigma: Field,
}

/// Vertical profile of `sigma` at one x.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub x: f64,
    pub y0: f64,
    pub dy: f64,
    pub values: Vec<f64>,
}

impl Cut {
    /// Profile at `x` from a physical-domain field, interpolated linearly
    /// between the two nearest columns.
    pub fn from_field(field: &Field, x: f64) -> Self {
        let g = field.geometry();
        let s = (x - g.x0) / g.dx - 0.5;
        let i0 = (s.floor().max(0.0) as isize).min(g.nx as isize - 1);
        let i1 = (i0 + 1).min(g.nx as isize - 1);
        let w = (s - i0 as f64).clamp(0.0, 1.0);
        let values = (0..g.ny as isize)
            .map(|j| (1.0 - w) * field.get(i0, j) + w * field.get(i1, j))
            .collect();
        Self { x, y0: g.y0, dy: g.dy, values }
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.dy
    }

    /// Bring this profile onto `n` cells of width `dy` starting at `y0`: block
    /// averages when the cell sizes nest, linear interpolation otherwise.
    pub fn resample(&self, y0: f64, dy: f64, n: usize) -> Cut {
        let ratio = dy / self.dy;
        let r = ratio.round() as usize;
        let nested = (ratio - r as f64).abs() < 1e-9 && r >= 1 && (y0 - self.y0).abs() < 1e-9 * dy && self.values.len() == n * r;
        let values = if nested {
            self.values.chunks(r).map(|c| c.iter().sum::<f64>() / r as f64).collect()
        } else {
            (0..n)
                .map(|j| {
                    let y = y0 + (j as f64 + 0.5) * dy;
                    let s = ((y - self.y0) / self.dy - 0.5).clamp(0.0, (self.values.len() - 1) as f64);
                    let k = (s.floor() as usize).min(self.values.len().saturating_sub(2));
                    let w = s - k as f64;
                    if self.values.len() == 1 {
                        self.values[0]
                    } else {
                        (1.0 - w) * self.values[k] + w * self.values[k + 1]
                    }
                })
                .collect()
        };
        Cut { x: self.x, y0, dy, values }
    }

    /// `(max, 1-norm)` of this cut against a reference on any nested or finer grid.
    pub fn error_against(&self, reference: &Cut) -> Result<(f64, f64)> {
        let r = reference.resample(self.y0, self.dy, self.values.len());
        crate::harness::signal::error_norms(&self.values, &r.values, self.dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunTiming {
    /// Mean wall-clock seconds of the time loop over all repeats.
    pub seconds: f64,
    pub inject_seconds: f64,
    pub step_seconds: f64,
    pub record_seconds: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub seismogram: Seismogram,
    pub snapshots: Vec<Snapshot>,
    pub cut: Option<Cut>,
    /// `sigma` over the physical domain at the final time.
    pub sigma: Field,
    pub timing: RunTiming,
    pub dt: f64,
    pub steps: usize,
    /// Padded run grid.
    pub geom: GridGeometry,
}

enum Engine {
    Fv(StateField),
    Fd { state: FdState, stencil: FdStencil, g_prev: f64 },
}

impl Engine {
    fn sigma_at(&self, mat: &MaterialField, i: usize, j: usize) -> f64 {
        match self {
            Engine::Fv(q) => mat.kappa.get(i as isize, j as isize) * q.eps.get(i as isize, j as isize),
            Engine::Fd { state, .. } => state.sig_curr.get(i as isize, j as isize),
        }
    }
}

fn fv_step(scn: &Scenario, q: &StateField, mat: &MaterialField, dt: f64, n: usize) -> Result<StateField> {
    let wpa = |transverse| WpaConfig { limiter: scn.limiter, transverse, cfl: scn.cfl };
    match scn.method {
        Method::Dswpa => step_wpa(q, mat, dt, &scn.boundaries, &wpa(Transverse::Dswpa), n),
        Method::Fwpa => step_wpa(q, mat, dt, &scn.boundaries, &wpa(Transverse::Fwpa), n),
        Method::Cup => ssp_rk2_step(q, mat, dt, &scn.boundaries, &CupConfig { limiter: scn.limiter, cfl: scn.cfl }),
        m => Err(Error::config("method", format!("{m} is not a finite-volume method"))),
    }
}

fn physical_sigma(engine: &Engine, setup: &RunSetup) -> Result<Field> {
    let g = setup.geom;
    let phys = GridGeometry::new(setup.nx_phys, g.ny, g.dx, g.dy, g.x0 + setup.pad_cells as f64 * g.dx, g.y0, 2)?;
    Ok(Field::from_fn(&phys, |i, j| engine.sigma_at(&setup.mat, i + setup.pad_cells, j)))
}

fn run_once(scn: &Scenario, setup: &RunSetup) -> Result<(RunOutput, [Duration; 3])> {
    let g = setup.geom;
    let area = g.cell_area();
    let mut engine = match scn.method.fd_half_width() {
        Some(k) => Engine::Fd { state: FdState::zeros(&g), stencil: central_coeffs(k)?, g_prev: 0.0 },
        None => Engine::Fv(StateField::zeros(&g)),
    };
    let xs = scn.receivers.as_ref().map(|r| r.xs.clone()).unwrap_or_default();
    let every = scn.receivers.as_ref().map_or(1, |r| r.every);
    let mut seismogram = Seismogram::new(xs);
    let mut snapshots = Vec::new();
    let mut snap_order: Vec<(usize, usize)> = setup.snapshot_steps.iter().copied().enumerate().map(|(k, n)| (n, k)).collect();
    snap_order.sort();
    let mut next_snap = 0;
    let mut take_snapshots = |n: usize, engine: &Engine, out: &mut Vec<(usize, Snapshot)>| -> Result<()> {
        while next_snap < snap_order.len() && snap_order[next_snap].0 == n {
            out.push((snap_order[next_snap].1, Snapshot { t: n as f64 * setup.dt, sigma: physical_sigma(engine, setup)? }));
            next_snap += 1;
        }
        Ok(())
    };
    let mut tagged = Vec::new();
    take_snapshots(0, &engine, &mut tagged)?;

    let wall = Instant::now();
    let mut phase = [Duration::ZERO; 3];
    let dt = setup.dt;
    let mut row = vec![0.0; setup.rx_cells.len()];
    for n in 0..setup.steps {
        let t = n as f64 * dt;
        let gval = scn.source.value(t);
        let t0 = Instant::now();
        // The FD source enters inside its step as a second difference of the
        // accumulated strain source.
        if let Engine::Fv(q) = &mut engine {
            for &(i, j, w) in &setup.src_cells {
                let v = q.eps.get(i as isize, j as isize) + w * dt * gval / area;
                q.eps.set(i as isize, j as isize, v);
            }
        }
        let t1 = Instant::now();
        engine = match engine {
            Engine::Fv(q) => Engine::Fv(fv_step(scn, &q, &setup.mat, dt, n).map_err(|e| e.at_step(n, "step"))?),
            Engine::Fd { state, stencil, g_prev } => {
                let srcs: Vec<PointSource> = setup
                    .src_cells
                    .iter()
                    .map(|&(i, j, w)| {
                        let kappa = setup.mat.kappa.get(i as isize, j as isize);
                        PointSource { i, j, amount: w * kappa * dt * (gval - g_prev) / area }
                    })
                    .collect();
                let state = fd_step(state, &setup.mat, dt, &stencil, &scn.boundaries, &srcs).map_err(|e| e.at_step(n, "step"))?;
                Engine::Fd { state, stencil, g_prev: gval }
            }
        };
        let t2 = Instant::now();
        if (n + 1) % every == 0 && !setup.rx_cells.is_empty() {
            for (v, &(i, j)) in row.iter_mut().zip(&setup.rx_cells) {
                *v = engine.sigma_at(&setup.mat, i, j);
            }
            if let Some(k) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what: "seismogram", index: k }.at_step(n, "record"));
            }
            seismogram.push((n + 1) as f64 * dt, &row);
        }
        take_snapshots(n + 1, &engine, &mut tagged)?;
        let t3 = Instant::now();
        phase[0] += t1 - t0;
        phase[1] += t2 - t1;
        phase[2] += t3 - t2;
    }
    let seconds = wall.elapsed().as_secs_f64();
    tagged.sort_by_key(|(k, _)| *k);
    snapshots.extend(tagged.into_iter().map(|(_, s)| s));
    let sigma = physical_sigma(&engine, setup)?;
    let cut = scn.cut_x.map(|x| Cut::from_field(&sigma, x));
    let timing = RunTiming { seconds, repeats: 1, ..Default::default() };
    Ok((RunOutput { seismogram, snapshots, cut, sigma, timing, dt, steps: setup.steps, geom: g }, phase))
}

/// Run `scn.repeats` times; outputs come from the last run and timings are means.
pub fn run_scenario(scn: &Scenario) -> Result<RunOutput> {
    let setup = prepare(scn)?;
    let mut total = 0.0;
    let mut phases = [0.0; 3];
    let mut last = None;
    for _ in 0..scn.repeats {
        let (out, ph) = run_once(scn, &setup)?;
        total += out.timing.seconds;
        for (acc, d) in phases.iter_mut().zip(ph) {
            *acc += d.as_secs_f64();
        }
        last = Some(out);
    }
    let mut out = last.expect("repeats validated to be positive");
    let r = scn.repeats as f64;
    out.timing = RunTiming {
        seconds: total / r,
        inject_seconds: phases[0] / r,
        step_seconds: phases[1] / r,
        record_seconds: phases[2] / r,
        repeats: scn.repeats,
    };
    Ok(out)
}
