//! Collocated leapfrog finite differences for the second-order wave equation
//! `sigma_tt = c^2 (sigma_xx + sigma_yy)` with even-order centered stencils.
//! Density is taken as uniform.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, GridGeometry};
use crate::model::MaterialField;
use crate::state::{check_halo, fill_scalar_halo, BoundarySpec};

pub const MAX_HALF_WIDTH: usize = 10;

/// Centered second-derivative weights on unit spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct FdStencil {
    pub order: usize,
    /// `2k + 1` weights, offsets `-k..=k`.
    pub coeffs: Vec<f64>,
}

impl FdStencil {
    pub fn half_width(&self) -> usize {
        self.order / 2
    }

    /// Sum of absolute weights: the spectral radius of the 1-D operator on unit spacing.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Largest stable leapfrog step for wave speed `c_max`.
    pub fn max_dt(&self, c_max: f64, dx: f64, dy: f64) -> f64 {
        let s = self.abs_sum();
        2.0 / (c_max * (s / (dx * dx) + s / (dy * dy)).sqrt())
    }
}

/// Weights of the unique symmetric `2k+1` point stencil, from the closed form
/// `w_m = 2 (-1)^(m+1) (k!)^2 / (m^2 (k-m)! (k+m)!)`, `w_0 = -2 sum w_m`.
pub fn central_coeffs(k: usize) -> Result<FdStencil> {
    if !(1..=MAX_HALF_WIDTH).contains(&k) {
        return Err(Error::StencilOrder(k));
    }
    let mut side = Vec::with_capacity(k);
    for m in 1..=k {
        // (k!)^2 / ((k-m)! (k+m)!) as a running product.
        let ratio: f64 = (0..m).map(|l| (k - l) as f64 / (k + l + 1) as f64).product();
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        side.push(2.0 * sign * ratio / (m * m) as f64);
    }
    let w0 = -2.0 * side.iter().sum::<f64>();
    let mut coeffs: Vec<f64> = side.iter().rev().copied().collect();
    coeffs.push(w0);
    coeffs.extend(side.iter().copied());
    Ok(FdStencil { order: 2 * k, coeffs })
}

/// Two time levels of `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdState {
    pub sig_prev: Field,
    pub sig_curr: Field,
}

impl FdState {
    pub fn zeros(geom: &GridGeometry) -> Self {
        Self { sig_prev: Field::zeros(geom), sig_curr: Field::zeros(geom) }
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.sig_curr.geometry()
    }

    /// Exchange the two levels, reversing the direction of time.
    pub fn reversed(self) -> Self {
        Self { sig_prev: self.sig_curr, sig_curr: self.sig_prev }
    }
}

/// An amount added to `sigma^{n+1}` at one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub i: usize,
    pub j: usize,
    pub amount: f64,
}

/// Fill `sigma` ghosts: walls mirror evenly, periodic edges wrap, extended
/// edges copy the edge cell.
pub fn fill_fd_halo(field: &mut Field, bc: &BoundarySpec) {
    fill_scalar_halo(field, bc, false, false);
}

/// One leapfrog step. `mat` must share the state's geometry; the halo of
/// `sig_curr` is refilled here.
pub fn fd_step(
    state: FdState,
    mat: &MaterialField,
    dt: f64,
    stencil: &FdStencil,
    bc: &BoundarySpec,
    sources: &[PointSource],
) -> Result<FdState> {
    let g = *state.geometry();
    let k = stencil.half_width();
    check_halo(&g, bc, k)?;
    if mat.geometry() != &g {
        return Err(Error::Geometry("material and FD state grids differ".into()));
    }
    let limit = stencil.max_dt(mat.max_speed(), g.dx, g.dy);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { courant: dt / limit, limit: 1.0 });
    }
    let FdState { sig_prev, mut sig_curr } = state;
    fill_fd_halo(&mut sig_curr, bc);

    let stride = g.stride();
    let (wx, wy) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
    let w = &stencil.coeffs;
    let cur = sig_curr.as_slice();
    let c = mat.c.as_slice();
    let mut next = sig_prev;
    let h = g.halo;
    let dt2 = dt * dt;
    next.as_mut_slice()
        .par_chunks_mut(stride)
        .enumerate()
        .skip(h)
        .take(g.ny)
        .for_each(|(row, out)| {
            // Row-at-a-time accumulation over contiguous slices vectorises.
            let base = row * stride + h;
            let nx = g.nx;
            let centre = &cur[base..base + nx];
            let mut acc: Vec<f64> = centre.iter().map(|v| w[k] * (wx + wy) * v).collect();
            for m in 1..=k {
                let (ax, ay) = (w[k + m] * wx, w[k + m] * wy);
                let left = &cur[base - m..base - m + nx];
                let right = &cur[base + m..base + m + nx];
                let up = &cur[base - m * stride..base - m * stride + nx];
                let down = &cur[base + m * stride..base + m * stride + nx];
                for ((((a, l), r), u), d) in acc.iter_mut().zip(left).zip(right).zip(up).zip(down) {
                    *a += ax * (l + r) + ay * (u + d);
                }
            }
            let speed = &c[base..base + nx];
            for (((o, q), a), v) in out[h..h + nx].iter_mut().zip(centre).zip(&acc).zip(speed) {
                *o = 2.0 * q - *o + dt2 * v * v * a;
            }
        });
    for src in sources {
        let v = next.get(src.i as isize, src.j as isize) + src.amount;
        next.set(src.i as isize, src.j as isize, v);
    }
    Ok(FdState { sig_prev: sig_curr, sig_curr: next })
}
