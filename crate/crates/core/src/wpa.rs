//! High-resolution wave propagation in f-wave form: the 1-D update, the
//! dimensionally split 2-D scheme and the unsplit scheme with transverse
//! propagation of fluctuations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridGeometry};
use crate::model::{CellMaterial, MaterialField};
use crate::riemann::{fwave_split, theta_ratio, upwind_wave, EigenBasis, Limiter, RiemannFan};
use crate::state::{apply_boundary, BoundarySpec, StateField, Q3};

/// Slack allowed on the unit Courant bound before a step is refused.
const CFL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transverse {
    /// Dimensional splitting, x sweep then y sweep.
    Dswpa,
    /// Unsplit update with transverse fluctuation splitting.
    Fwpa,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpaConfig {
    pub limiter: Limiter,
    pub transverse: Transverse,
    pub cfl: f64,
}

impl Default for WpaConfig {
    fn default() -> Self {
        Self { limiter: Limiter::Superbee, transverse: Transverse::Fwpa, cfl: 0.25 }
    }
}

/// Left- and right-going fluctuations at one interface plus its correction flux.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FluctuationPair {
    pub aminus: Q3,
    pub aplus: Q3,
    pub fcorr: Q3,
}

/// Sum the f-waves by the sign of their speed; stationary families go nowhere.
#[inline]
pub fn fluctuations(fan: &RiemannFan) -> FluctuationPair {
    let mut out = FluctuationPair::default();
    for p in 0..3 {
        let s = fan.speeds[p];
        if s < 0.0 {
            out.aminus += fan.waves[p];
        } else if s > 0.0 {
            out.aplus += fan.waves[p];
        }
    }
    out
}

/// Second-order correction flux from limiter values `psi` per family.
#[inline]
pub fn correction_flux(fan: &RiemannFan, psi: [f64; 3], dt_dx: f64) -> Result<Q3> {
    let mut f = Q3::ZERO;
    for p in 0..3 {
        let s = fan.speeds[p];
        let nu = s.abs() * dt_dx;
        if nu > 1.0 + CFL_SLACK {
            return Err(Error::Cfl { courant: nu, limit: 1.0 });
        }
        if s != 0.0 {
            f += (0.5 * s.signum() * (1.0 - nu) * psi[p]) * fan.waves[p];
        }
    }
    Ok(f)
}

/// Limiter values for the fan at one interface given its neighbours.
#[inline]
pub fn limiter_values(fan: &RiemannFan, left: &RiemannFan, right: &RiemannFan, limiter: Limiter) -> [f64; 3] {
    let mut psi = [0.0; 3];
    for p in 0..3 {
        if fan.speeds[p] == 0.0 {
            continue;
        }
        psi[p] = match limiter {
            Limiter::None => 1.0,
            Limiter::Superbee => {
                let up = upwind_wave(fan.speeds[p], left.waves[p], right.waves[p]);
                limiter.psi(theta_ratio(fan.waves[p], up))
            }
        };
    }
    psi
}

/// Per-interface results of a 1-D sweep over a line of `n` interior cells.
/// Entry `k` belongs to the interface on the left of interior cell `k`
/// (`k = 0..=n`).
#[derive(Debug, Clone, Default)]
pub struct LineFluxes {
    pub amdq: Vec<Q3>,
    pub apdq: Vec<Q3>,
    pub fcorr: Vec<Q3>,
}

/// Fluctuations and correction fluxes along one line. `q` and `mats`
/// include `halo` ghost cells on both ends.
pub fn line_fluxes(
    q: &[Q3],
    mats: &[CellMaterial],
    axis: Axis,
    halo: usize,
    dt_dx: f64,
    limiter: Limiter,
) -> Result<LineFluxes> {
    debug_assert_eq!(q.len(), mats.len());
    debug_assert!(halo >= 2);
    let n = q.len() - 2 * halo;
    // Fans for line interfaces halo-1 ..= halo+n+1, between cells k-1 and k.
    let first = halo - 1;
    let fans: Vec<RiemannFan> = (first..=halo + n + 1)
        .map(|k| fwave_split(q[k - 1], q[k], &mats[k - 1], &mats[k], axis))
        .collect();
    let mut out = LineFluxes {
        amdq: Vec::with_capacity(n + 1),
        apdq: Vec::with_capacity(n + 1),
        fcorr: Vec::with_capacity(n + 1),
    };
    for f in 1..=n + 1 {
        let fan = &fans[f];
        let psi = limiter_values(fan, &fans[f - 1], &fans[f + 1], limiter);
        let pair = fluctuations(fan);
        out.amdq.push(pair.aminus);
        out.apdq.push(pair.aplus);
        out.fcorr.push(correction_flux(fan, psi, dt_dx)?);
    }
    Ok(out)
}

/// One 1-D step on a line with filled halo. Ghost entries are returned unchanged.
pub fn step_1d(
    line: &[Q3],
    mats: &[CellMaterial],
    axis: Axis,
    halo: usize,
    dt: f64,
    dx: f64,
    limiter: Limiter,
) -> Result<Vec<Q3>> {
    let r = dt / dx;
    let fl = line_fluxes(line, mats, axis, halo, r, limiter)?;
    let mut out = line.to_vec();
    let n = line.len() - 2 * halo;
    for i in 0..n {
        let du = fl.apdq[i] + fl.amdq[i + 1] + (fl.fcorr[i + 1] - fl.fcorr[i]);
        out[halo + i] -= r * du;
    }
    Ok(out)
}

pub(crate) fn gather_row(state: &StateField, mat: &MaterialField, j: isize) -> (Vec<Q3>, Vec<CellMaterial>) {
    let g = state.geometry();
    let h = g.halo as isize;
    let start = g.index(-h, j);
    let len = g.stride();
    let q = (start..start + len).map(|k| state.get_flat(k)).collect();
    let m = (-h..g.nx as isize + h).map(|i| mat.cell(i, j)).collect();
    (q, m)
}

pub(crate) fn gather_col(state: &StateField, mat: &MaterialField, i: isize) -> (Vec<Q3>, Vec<CellMaterial>) {
    let g = state.geometry();
    let h = g.halo as isize;
    let range = -h..g.ny as isize + h;
    let q = range.clone().map(|j| state.get(i, j)).collect();
    let m = range.map(|j| mat.cell(i, j)).collect();
    (q, m)
}

pub(crate) fn check_courant(c_max: f64, dt: f64, geom: &GridGeometry, limit: f64) -> Result<()> {
    let courant = c_max * dt / geom.dx.min(geom.dy);
    if !(courant <= limit + CFL_SLACK) {
        return Err(Error::Cfl { courant, limit });
    }
    Ok(())
}

fn sweep(state: &StateField, mat: &MaterialField, dt: f64, axis: Axis, limiter: Limiter) -> Result<StateField> {
    let g = *state.geometry();
    let h = g.halo;
    let mut out = state.clone();
    match axis {
        Axis::X => {
            let d = g.dx;
            let rows: Vec<Vec<Q3>> = (0..g.ny as isize)
                .into_par_iter()
                .map(|j| {
                    let (q, m) = gather_row(state, mat, j);
                    step_1d(&q, &m, Axis::X, h, dt, d, limiter)
                })
                .collect::<Result<_>>()?;
            for (j, row) in rows.iter().enumerate() {
                for i in 0..g.nx {
                    out.set(i as isize, j as isize, row[h + i]);
                }
            }
        }
        Axis::Y => {
            let d = g.dy;
            let cols: Vec<Vec<Q3>> = (0..g.nx as isize)
                .into_par_iter()
                .map(|i| {
                    let (q, m) = gather_col(state, mat, i);
                    step_1d(&q, &m, Axis::Y, h, dt, d, limiter)
                })
                .collect::<Result<_>>()?;
            for (i, col) in cols.iter().enumerate() {
                for j in 0..g.ny {
                    out.set(i as isize, j as isize, col[h + j]);
                }
            }
        }
    }
    Ok(out)
}

/// Order of the two sweeps inside one split step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    XThenY,
    YThenX,
}

impl SweepOrder {
    /// Alternating order by step parity, which pairs consecutive steps into a
    /// symmetric (second-order) splitting.
    pub fn for_step(n: usize) -> Self {
        if n % 2 == 0 {
            SweepOrder::XThenY
        } else {
            SweepOrder::YThenX
        }
    }
}

/// Dimensionally split step: x sweeps over every row, boundary refill, then
/// y sweeps over every column.
pub fn step_dswpa(
    state: &StateField,
    mat: &MaterialField,
    dt: f64,
    bc: &BoundarySpec,
    limiter: Limiter,
) -> Result<StateField> {
    step_dswpa_ordered(state, mat, dt, bc, limiter, SweepOrder::XThenY)
}

pub fn step_dswpa_ordered(
    state: &StateField,
    mat: &MaterialField,
    dt: f64,
    bc: &BoundarySpec,
    limiter: Limiter,
    order: SweepOrder,
) -> Result<StateField> {
    check_courant(mat.max_speed(), dt, state.geometry(), 1.0)?;
    let (first, second) = match order {
        SweepOrder::XThenY => (Axis::X, Axis::Y),
        SweepOrder::YThenX => (Axis::Y, Axis::X),
    };
    let mut q = state.clone();
    apply_boundary(&mut q, bc)?;
    let mut q = sweep(&q, mat, dt, first, limiter)?;
    apply_boundary(&mut q, bc)?;
    sweep(&q, mat, dt, second, limiter)
}

/// Split `v` into the part leaving a cell toward lower index through the
/// interface `lower | cell` and the part leaving toward higher index through
/// `cell | upper`, each already multiplied by its speed.
#[inline]
fn transverse_split(v: Q3, lower: &CellMaterial, cell: &CellMaterial, upper: &CellMaterial, axis: Axis) -> (Q3, Q3) {
    let down = EigenBasis::interface(lower, cell, axis);
    let up = EigenBasis::interface(cell, upper, axis);
    let minus = (down.speeds[0] * down.coefficients(v)[0]) * down.vector(0);
    let plus = (up.speeds[2] * up.coefficients(v)[2]) * up.vector(2);
    (minus, plus)
}

/// Unsplit step: 1-D fluctuations and limited corrections in both directions,
/// plus transverse propagation of every fluctuation into the correction
/// fluxes of the other direction.
pub fn step_fwpa(
    state: &StateField,
    mat: &MaterialField,
    dt: f64,
    bc: &BoundarySpec,
    limiter: Limiter,
) -> Result<StateField> {
    let g = *state.geometry();
    check_courant(mat.max_speed(), dt, &g, 1.0)?;
    let mut q = state.clone();
    apply_boundary(&mut q, bc)?;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let (rx, ry) = (dt / g.dx, dt / g.dy);

    // x-interface data for rows -1..=ny, y-interface data for columns -1..=nx.
    let xrows: Vec<LineFluxes> = (-1..=ny)
        .into_par_iter()
        .map(|j| {
            let (line, m) = gather_row(&q, mat, j);
            line_fluxes(&line, &m, Axis::X, g.halo, rx, limiter)
        })
        .collect::<Result<_>>()?;
    let ycols: Vec<LineFluxes> = (-1..=nx)
        .into_par_iter()
        .map(|i| {
            let (line, m) = gather_col(&q, mat, i);
            line_fluxes(&line, &m, Axis::Y, g.halo, ry, limiter)
        })
        .collect::<Result<_>>()?;
    let xr = |j: isize| &xrows[(j + 1) as usize];
    let yc = |i: isize| &ycols[(i + 1) as usize];

    // ftil[j][f]: x-face f (left of cell f) in row j; gtil[f][i]: y-face f above cell i.
    let fw = (nx + 1) as usize;
    let mut ftil = vec![Q3::ZERO; fw * ny as usize];
    for j in 0..ny {
        ftil[j as usize * fw..(j as usize + 1) * fw].copy_from_slice(&xr(j).fcorr);
    }
    let gw = nx as usize;
    let mut gtil = vec![Q3::ZERO; gw * (ny + 1) as usize];
    for i in 0..nx {
        for f in 0..=ny {
            gtil[f as usize * gw + i as usize] = yc(i).fcorr[f as usize];
        }
    }

    let hx = 0.5 * dt / g.dx;
    for j in -1..=ny {
        let row = xr(j);
        for f in 0..=nx {
            // A+ enters cell f, A- enters cell f-1.
            for (v, i) in [(row.apdq[f as usize], f), (row.amdq[f as usize], f - 1)] {
                if i < 0 || i >= nx {
                    continue;
                }
                let cell = mat.cell(i, j);
                let (minus, plus) = transverse_split(v, &mat.cell(i, j - 1), &cell, &mat.cell(i, j + 1), Axis::Y);
                if j >= 0 {
                    gtil[j as usize * gw + i as usize] -= hx * minus;
                }
                if j < ny {
                    gtil[(j + 1) as usize * gw + i as usize] -= hx * plus;
                }
            }
        }
    }
    let hy = 0.5 * dt / g.dy;
    for i in -1..=nx {
        let col = yc(i);
        for f in 0..=ny {
            for (v, j) in [(col.apdq[f as usize], f), (col.amdq[f as usize], f - 1)] {
                if j < 0 || j >= ny {
                    continue;
                }
                let cell = mat.cell(i, j);
                let (minus, plus) = transverse_split(v, &mat.cell(i - 1, j), &cell, &mat.cell(i + 1, j), Axis::X);
                if i >= 0 {
                    ftil[j as usize * fw + i as usize] -= hy * minus;
                }
                if i < nx {
                    ftil[j as usize * fw + (i + 1) as usize] -= hy * plus;
                }
            }
        }
    }

    let mut out = q.clone();
    for j in 0..ny {
        let row = xr(j);
        let (ju, fr) = (j as usize, j as usize * fw);
        for i in 0..nx {
            let iu = i as usize;
            let col = yc(i);
            let dq = rx * (row.apdq[iu] + row.amdq[iu + 1] + (ftil[fr + iu + 1] - ftil[fr + iu]))
                + ry * (col.apdq[ju] + col.amdq[ju + 1] + (gtil[(ju + 1) * gw + iu] - gtil[ju * gw + iu]));
            out.set(i, j, q.get(i, j) - dq);
        }
    }
    Ok(out)
}

/// Step `n` of a run, dispatched on `cfg.transverse`. Split steps alternate
/// their sweep order with the parity of `n`.
pub fn step_wpa(state: &StateField, mat: &MaterialField, dt: f64, bc: &BoundarySpec, cfg: &WpaConfig, n: usize) -> Result<StateField> {
    match cfg.transverse {
        Transverse::Dswpa => step_dswpa_ordered(state, mat, dt, bc, cfg.limiter, SweepOrder::for_step(n)),
        Transverse::Fwpa => step_fwpa(state, mat, dt, bc, cfg.limiter),
    }
}
