//! Interface mathematics shared by the finite-volume solvers: acoustic
//! eigenstructure, wave and f-wave decompositions at (possibly
//! heterogeneous) interfaces, limiter functions and limited slopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::model::CellMaterial;
use crate::state::{flux, Q3};

/// Right eigenvectors and speeds of the interface problem along one axis.
///
/// Family 0 travels left at `-c_left` along `(1, Z_left)`, family 1 is the
/// stationary tangential-momentum mode, family 2 travels right at `c_right`
/// along `(1, -Z_right)` (normal-momentum slot shown). With equal left and
/// right materials this is the eigenbasis of the coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBasis {
    pub axis: Axis,
    pub speeds: [f64; 3],
    pub z_left: f64,
    pub z_right: f64,
}

impl EigenBasis {
    pub fn interface(left: &CellMaterial, right: &CellMaterial, axis: Axis) -> Self {
        Self {
            axis,
            speeds: [-left.c, 0.0, right.c],
            z_left: left.z,
            z_right: right.z,
        }
    }

    /// Column `p` of R.
    #[inline]
    pub fn vector(&self, p: usize) -> Q3 {
        let (n, t) = (self.axis.normal(), self.axis.tangential());
        let mut r = Q3::ZERO;
        match p {
            0 => {
                r.0[0] = 1.0;
                r.0[n] = self.z_left;
            }
            1 => r.0[t] = 1.0,
            _ => {
                r.0[0] = 1.0;
                r.0[n] = -self.z_right;
            }
        }
        r
    }

    /// R as a row-major matrix.
    pub fn r(&self) -> [[f64; 3]; 3] {
        let cols = [self.vector(0), self.vector(1), self.vector(2)];
        let mut m = [[0.0; 3]; 3];
        for (p, col) in cols.iter().enumerate() {
            for row in 0..3 {
                m[row][p] = col[row];
            }
        }
        m
    }

    /// R⁻¹ as a row-major matrix.
    pub fn rinv(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for k in 0..3 {
            let mut e = Q3::ZERO;
            e.0[k] = 1.0;
            let a = self.coefficients(e);
            for p in 0..3 {
                m[p][k] = a[p];
            }
        }
        m
    }

    /// Coefficients `a` with `Σ a[p] r_p = d`, solved in closed form.
    #[inline]
    pub fn coefficients(&self, d: Q3) -> [f64; 3] {
        let (n, t) = (self.axis.normal(), self.axis.tangential());
        let zsum = self.z_left + self.z_right;
        [
            (self.z_right * d.0[0] + d.0[n]) / zsum,
            d.0[t],
            (self.z_left * d.0[0] - d.0[n]) / zsum,
        ]
    }

    fn check(&self) -> Result<()> {
        let zsum = self.z_left + self.z_right;
        if !(zsum > 0.0 && zsum.is_finite()) {
            return Err(Error::SingularBasis(zsum));
        }
        Ok(())
    }
}

/// Eigenbasis of the constant-coefficient system for one material.
pub fn acoustic_eigenbasis(rho: f64, kappa: f64, axis: Axis) -> EigenBasis {
    let m = CellMaterial::from_modulus(rho, kappa);
    EigenBasis::interface(&m, &m, axis)
}

/// Coefficient matrix of the linear system along `axis`.
pub fn coefficient_matrix(mat: &CellMaterial, axis: Axis) -> [[f64; 3]; 3] {
    let n = axis.normal();
    let mut a = [[0.0; 3]; 3];
    a[0][n] = -1.0 / mat.rho;
    a[n][0] = -mat.kappa;
    a
}

/// Waves of one interface Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannFan {
    pub waves: [Q3; 3],
    pub speeds: [f64; 3],
    /// Projection coefficients (alpha for waves, beta for f-waves).
    pub coeffs: [f64; 3],
}

impl RiemannFan {
    fn from_basis(basis: &EigenBasis, jump: Q3) -> Self {
        let coeffs = basis.coefficients(jump);
        Self {
            waves: [0, 1, 2].map(|p| coeffs[p] * basis.vector(p)),
            speeds: basis.speeds,
            coeffs,
        }
    }

    pub fn sum(&self) -> Q3 {
        self.waves[0] + self.waves[1] + self.waves[2]
    }
}

/// Decompose the state jump `qr - ql` into waves of `basis`.
pub fn wave_split(ql: Q3, qr: Q3, basis: &EigenBasis) -> Result<RiemannFan> {
    basis.check()?;
    Ok(RiemannFan::from_basis(basis, qr - ql))
}

/// Decompose the flux jump across a heterogeneous interface into f-waves.
pub fn fwave_split(ql: Q3, qr: Q3, left: &CellMaterial, right: &CellMaterial, axis: Axis) -> RiemannFan {
    let basis = EigenBasis::interface(left, right, axis);
    let df = flux(qr, right, axis) - flux(ql, left, axis);
    RiemannFan::from_basis(&basis, df)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    #[default]
    Superbee,
    /// Unlimited (psi = 1 for waves, centered slopes for reconstructions).
    None,
}

impl Limiter {
    #[inline]
    pub fn psi(self, theta: f64) -> f64 {
        match self {
            Limiter::Superbee => superbee(theta),
            Limiter::None => 1.0,
        }
    }
}

#[inline]
pub fn superbee(theta: f64) -> f64 {
    0.0f64.max((2.0 * theta).min(1.0)).max(theta.min(2.0))
}

/// Ratio of the upwind wave projected on `here` to `|here|²`; zero when
/// `here` vanishes.
#[inline]
pub fn theta_ratio(here: Q3, upwind: Q3) -> f64 {
    let denom = here.dot(here);
    if denom > 0.0 {
        upwind.dot(here) / denom
    } else {
        0.0
    }
}

/// Pick the upwind neighbour's wave for family `p` given the sign of its speed.
#[inline]
pub fn upwind_wave(speed: f64, left_neighbor: Q3, right_neighbor: Q3) -> Q3 {
    if speed > 0.0 {
        left_neighbor
    } else {
        right_neighbor
    }
}

pub fn minmod(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    if values.iter().all(|&v| v > 0.0) {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    } else if values.iter().all(|&v| v < 0.0) {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        0.0
    }
}

pub fn maxmod(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    if values.iter().all(|&v| v > 0.0) {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else if values.iter().all(|&v| v < 0.0) {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn minmod2(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn maxmod2(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.max(b)
    } else if a < 0.0 && b < 0.0 {
        a.min(b)
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn minmod4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0 {
        a.min(b).min(c).min(d)
    } else if a < 0.0 && b < 0.0 && c < 0.0 && d < 0.0 {
        a.max(b).max(c).max(d)
    } else {
        0.0
    }
}

/// SuperBee-limited slope of a scalar from three consecutive cell values.
#[inline]
pub fn slope_superbee(qm1: f64, q0: f64, qp1: f64, dx: f64) -> f64 {
    let back = (q0 - qm1) / dx;
    let fwd = (qp1 - q0) / dx;
    maxmod2(minmod2(2.0 * back, fwd), minmod2(back, 2.0 * fwd))
}

/// Componentwise slope for a state vector under `limiter`.
#[inline]
pub fn slope(limiter: Limiter, qm1: Q3, q0: Q3, qp1: Q3, dx: f64) -> Q3 {
    match limiter {
        Limiter::Superbee => Q3([0, 1, 2].map(|k| slope_superbee(qm1.0[k], q0.0[k], qp1.0[k], dx))),
        Limiter::None => (0.5 / dx) * (qp1 - qm1),
    }
}
