//! Semi-discrete central-upwind scheme with the Kurganov–Lin anti-diffusion
//! flux, advanced in time with two-stage SSP Runge–Kutta.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::Axis;
#[cfg(test)]
use crate::grid::GridGeometry;
use crate::model::{CellMaterial, MaterialField};
use crate::riemann::{minmod4, slope, Limiter};
use crate::state::{apply_boundary, flux, BoundarySpec, StateField, Q3};
use crate::wpa::check_courant;

/// Largest `c dt / min(dx, dy)` accepted by [`ssp_rk2_step`].
pub const CUP_COURANT_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CupConfig {
    #[serde(default)]
    pub limiter: Limiter,
    pub cfl: f64,
}

impl Default for CupConfig {
    fn default() -> Self {
        Self { limiter: Limiter::Superbee, cfl: 0.25 }
    }
}

/// Everything computed at one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CupInterfaceData {
    pub aplus: f64,
    pub aminus: f64,
    pub q_minus: Q3,
    pub q_plus: Q3,
    pub w_int: Q3,
    pub q_int: Q3,
    pub flux: Q3,
}

/// One-sided speed bounds at an interface: the cell spectra are `±c`.
#[inline]
pub fn local_speeds(l: &CellMaterial, r: &CellMaterial) -> (f64, f64) {
    let a = l.c.max(r.c).max(0.0);
    (a, -a)
}

/// Reconstructed values of one cell: faces along x and y and the four corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFaces {
    pub east: Q3,
    pub west: Q3,
    pub north: Q3,
    pub south: Q3,
    /// `+x +y`, `-x +y`, `+x -y`, `-x -y`.
    pub ne: Q3,
    pub nw: Q3,
    pub se: Q3,
    pub sw: Q3,
}

/// Piecewise-linear reconstruction of cell `(i, j)`; `+x` is east and `+y` north.
pub fn reconstruct_faces(state: &StateField, i: isize, j: isize, limiter: Limiter) -> CellFaces {
    let g = state.geometry();
    let q = state.get(i, j);
    let sx = 0.5 * g.dx * slope(limiter, state.get(i - 1, j), q, state.get(i + 1, j), g.dx);
    let sy = 0.5 * g.dy * slope(limiter, state.get(i, j - 1), q, state.get(i, j + 1), g.dy);
    CellFaces {
        east: q + sx,
        west: q - sx,
        north: q + sy,
        south: q - sy,
        ne: q + sx + sy,
        nw: q - sx + sy,
        se: q + sx - sy,
        sw: q - sx - sy,
    }
}

#[inline]
fn degenerate(aplus: f64, aminus: f64) -> bool {
    aplus - aminus < 1e-14 * aplus.max(-aminus).max(1.0)
}

/// Kurganov–Lin flux with the anti-diffusion term built from two pairs of
/// point values: `minus_pts` from the cell on the low side, `plus_pts` from
/// the cell on the high side. In 1-D both entries of each pair are the face
/// values themselves.
#[allow(clippy::too_many_arguments)]
pub fn kl_flux(
    q_minus: Q3,
    q_plus: Q3,
    minus_pts: [Q3; 2],
    plus_pts: [Q3; 2],
    ml: &CellMaterial,
    mr: &CellMaterial,
    axis: Axis,
    aplus: f64,
    aminus: f64,
) -> CupInterfaceData {
    let fm = flux(q_minus, ml, axis);
    let fp = flux(q_plus, mr, axis);
    if degenerate(aplus, aminus) {
        return CupInterfaceData {
            aplus,
            aminus,
            q_minus,
            q_plus,
            w_int: 0.5 * (q_minus + q_plus),
            q_int: Q3::ZERO,
            flux: 0.5 * (fm + fp),
        };
    }
    let inv = 1.0 / (aplus - aminus);
    let w = inv * (aplus * q_plus - aminus * q_minus - (fp - fm));
    let q_int = Q3([0, 1, 2].map(|k| {
        minmod4(
            (plus_pts[0][k] - w[k]) * inv,
            (w[k] - minus_pts[0][k]) * inv,
            (plus_pts[1][k] - w[k]) * inv,
            (w[k] - minus_pts[1][k]) * inv,
        )
    }));
    let h = inv * (aplus * fm - aminus * fp) + (aplus * aminus) * (inv * (q_plus - q_minus) - q_int);
    CupInterfaceData { aplus, aminus, q_minus, q_plus, w_int: w, q_int, flux: h }
}

/// One-dimensional Kurganov–Lin flux from the two face states.
pub fn kl_flux_1d(
    q_minus: Q3,
    q_plus: Q3,
    ml: &CellMaterial,
    mr: &CellMaterial,
    axis: Axis,
    aplus: f64,
    aminus: f64,
) -> CupInterfaceData {
    kl_flux(q_minus, q_plus, [q_minus; 2], [q_plus; 2], ml, mr, axis, aplus, aminus)
}

/// Time derivative along one line with `halo` ghost cells at both ends.
/// Returns one entry per interior cell.
pub fn rhs_1d(line: &[Q3], mats: &[CellMaterial], axis: Axis, halo: usize, dx: f64, limiter: Limiter) -> Vec<Q3> {
    let n = line.len() - 2 * halo;
    let face = |k: usize, sign: f64| line[k] + (sign * 0.5 * dx) * slope(limiter, line[k - 1], line[k], line[k + 1], dx);
    // Interface f sits between line cells halo+f-1 and halo+f.
    let h: Vec<Q3> = (0..=n)
        .map(|f| {
            let (l, r) = (halo + f - 1, halo + f);
            let (ap, am) = local_speeds(&mats[l], &mats[r]);
            kl_flux_1d(face(l, 1.0), face(r, -1.0), &mats[l], &mats[r], axis, ap, am).flux
        })
        .collect();
    (0..n).map(|i| (-1.0 / dx) * (h[i + 1] - h[i])).collect()
}

/// Time derivative of every interior cell. The halo of `state` must be filled.
pub fn rhs_2d(state: &StateField, mat: &MaterialField, limiter: Limiter) -> StateField {
    let g = *state.geometry();
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    // Reconstructions for cells -1..=nx by -1..=ny, row-major.
    let w = (nx + 2) as usize;
    let rec: Vec<CellFaces> = (-1..=ny)
        .into_par_iter()
        .flat_map_iter(|j| (-1..=nx).map(move |i| reconstruct_faces(state, i, j, limiter)))
        .collect();
    let at = |i: isize, j: isize| &rec[(j + 1) as usize * w + (i + 1) as usize];

    let hx: Vec<Vec<Q3>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..=nx)
                .map(|f| {
                    let (l, r) = (at(f - 1, j), at(f, j));
                    let (ml, mr) = (mat.cell(f - 1, j), mat.cell(f, j));
                    let (ap, am) = local_speeds(&ml, &mr);
                    kl_flux(l.east, r.west, [l.ne, l.se], [r.nw, r.sw], &ml, &mr, Axis::X, ap, am).flux
                })
                .collect()
        })
        .collect();
    // hy[f][i]: face above cell (i, f).
    let hy: Vec<Vec<Q3>> = (0..=ny)
        .into_par_iter()
        .map(|f| {
            (0..nx)
                .map(|i| {
                    let (lo, hi) = (at(i, f - 1), at(i, f));
                    let (ml, mr) = (mat.cell(i, f - 1), mat.cell(i, f));
                    let (bp, bm) = local_speeds(&ml, &mr);
                    kl_flux(lo.north, hi.south, [lo.ne, lo.nw], [hi.se, hi.sw], &ml, &mr, Axis::Y, bp, bm).flux
                })
                .collect()
        })
        .collect();
    let (rx, ry) = (1.0 / g.dx, 1.0 / g.dy);
    let rows: Vec<Vec<Q3>> = (0..ny as usize)
        .map(|j| {
            (0..nx as usize)
                .map(|i| -rx * (hx[j][i + 1] - hx[j][i]) - ry * (hy[j + 1][i] - hy[j][i]))
                .collect()
        })
        .collect();

    let mut out = StateField::zeros(&g);
    for (j, row) in rows.iter().enumerate() {
        for (i, d) in row.iter().enumerate() {
            out.set(i as isize, j as isize, *d);
        }
    }
    out
}

/// Heun step: `Q* = Q + dt L(Q)`, `Q' = (Q + Q* + dt L(Q*)) / 2`, boundary
/// refilled before each stage.
pub fn ssp_rk2_step(
    state: &StateField,
    mat: &MaterialField,
    dt: f64,
    bc: &BoundarySpec,
    cfg: &CupConfig,
) -> Result<StateField> {
    check_courant(mat.max_speed(), dt, state.geometry(), CUP_COURANT_LIMIT)?;
    heun(state, dt, |q| {
        apply_boundary(q, bc)?;
        Ok(rhs_2d(q, mat, cfg.limiter))
    })
}

/// Two-stage SSP Runge–Kutta with an arbitrary operator; `rhs` may refill
/// the halo of its argument.
pub fn heun(
    state: &StateField,
    dt: f64,
    mut rhs: impl FnMut(&mut StateField) -> Result<StateField>,
) -> Result<StateField> {
    let mut q = state.clone();
    let l0 = rhs(&mut q)?;
    let mut q1 = q.axpy(dt, &l0);
    let l1 = rhs(&mut q1)?;
    let q2 = q1.axpy(dt, &l1);
    Ok(q.axpy(1.0, &q2).scale(0.5))
}
