//! Material fields and the synthetic layered velocity model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridGeometry};
use crate::state::{check_halo, fill_scalar_halo, BoundarySpec};

/// Bulk modulus and impedance for a medium of speed `c` and density `rho`.
#[inline]
pub fn derive_material(c: f64, rho: f64) -> (f64, f64) {
    (rho * c * c, rho * c)
}

/// Material properties of a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMaterial {
    pub rho: f64,
    pub kappa: f64,
    pub c: f64,
    pub z: f64,
}

impl CellMaterial {
    pub fn from_speed(c: f64, rho: f64) -> Self {
        let (kappa, z) = derive_material(c, rho);
        Self { rho, kappa, c, z }
    }

    pub fn from_modulus(rho: f64, kappa: f64) -> Self {
        let c = (kappa / rho).sqrt();
        Self { rho, kappa, c, z: rho * c }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    pub rho: Field,
    pub kappa: Field,
    pub c: Field,
    pub z: Field,
}

impl MaterialField {
    /// Build from per-cell speed and density (interior values row-major);
    /// ghost cells copy the nearest interior cell.
    pub fn from_speed_density(geom: &GridGeometry, speed: &[f64], density: &[f64]) -> Result<Self> {
        let n = geom.nx * geom.ny;
        if speed.len() != n || density.len() != n {
            return Err(Error::Length(format!(
                "material arrays must hold {n} cells (got {} speeds, {} densities)",
                speed.len(),
                density.len()
            )));
        }
        for (k, (&c, &r)) in speed.iter().zip(density).enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite { what: "velocity", index: k });
            }
            if !r.is_finite() {
                return Err(Error::NonFinite { what: "density", index: k });
            }
            if c <= 0.0 || r <= 0.0 {
                return Err(Error::Model(format!(
                    "cell {k}: speed and density must be positive (c={c}, rho={r})"
                )));
            }
        }
        let mut c = Field::from_interior(geom, speed)?;
        let mut rho = Field::from_interior(geom, density)?;
        c.extrapolate_halo();
        rho.extrapolate_halo();
        let kappa = rho.zip_map(&c, |r, c| derive_material(c, r).0);
        let z = rho.zip_map(&c, |r, c| derive_material(c, r).1);
        Ok(Self { rho, kappa, c, z })
    }

    /// Refill material ghost cells to match the state boundary: periodic
    /// edges wrap, walls mirror, extended edges copy the edge cell.
    pub fn apply_boundary(&mut self, spec: &BoundarySpec) -> Result<()> {
        check_halo(self.geometry(), spec, 2)?;
        for f in [&mut self.rho, &mut self.kappa, &mut self.c, &mut self.z] {
            fill_scalar_halo(f, spec, false, false);
        }
        Ok(())
    }

    pub fn uniform(geom: &GridGeometry, c: f64, rho: f64) -> Result<Self> {
        let n = geom.nx * geom.ny;
        Self::from_speed_density(geom, &vec![c; n], &vec![rho; n])
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        self.c.geometry()
    }

    #[inline]
    pub fn cell(&self, i: isize, j: isize) -> CellMaterial {
        CellMaterial {
            rho: self.rho.get(i, j),
            kappa: self.kappa.get(i, j),
            c: self.c.get(i, j),
            z: self.z.get(i, j),
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.c.interior_iter().fold(0.0, f64::max)
    }

    pub fn min_speed(&self) -> f64 {
        self.c.interior_iter().fold(f64::INFINITY, f64::min)
    }

    /// Point-sample this field onto another grid: each target cell takes the
    /// material of the source cell nearest its center (clamped at the edges,
    /// so padding beyond the source extent repeats the edge material).
    pub fn resample(&self, target: &GridGeometry) -> Result<Self> {
        let src = self.geometry();
        let pick = |x: f64, n: usize, origin: f64, d: f64| -> isize {
            let k = ((x - origin) / d).floor();
            (k.max(0.0) as isize).min(n as isize - 1)
        };
        let mut speed = Vec::with_capacity(target.nx * target.ny);
        let mut density = Vec::with_capacity(target.nx * target.ny);
        for j in 0..target.ny as isize {
            let sj = pick(target.y_center(j), src.ny, src.y0, src.dy);
            for i in 0..target.nx as isize {
                let si = pick(target.x_center(i), src.nx, src.x0, src.dx);
                speed.push(self.c.get(si, sj));
                density.push(self.rho.get(si, sj));
            }
        }
        Self::from_speed_density(target, &speed, &density)
    }
}

/// Horizontally layered model with a tunable discontinuity reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayeredModelSpec {
    /// Speed of the top layer (m/s).
    pub v_base: f64,
    /// Speed increment per interface at zero reduction (m/s).
    pub dv: f64,
    pub n_layers: usize,
    /// Percentage by which every interface jump is reduced, in `[0, 100]`.
    #[serde(default)]
    pub lambda_pct: f64,
}

impl LayeredModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_layers < 1 {
            return Err(Error::Model("n_layers must be at least 1".into()));
        }
        if !(0.0..=100.0).contains(&self.lambda_pct) {
            return Err(Error::Model(format!("lambda_pct {} outside [0, 100]", self.lambda_pct)));
        }
        if !(self.v_base > 0.0 && self.v_base.is_finite()) {
            return Err(Error::Model(format!("v_base must be positive, got {}", self.v_base)));
        }
        if !(self.dv >= 0.0 && self.dv.is_finite()) {
            return Err(Error::Model(format!("dv must be non-negative, got {}", self.dv)));
        }
        Ok(())
    }

    /// Speed of layer `k`, counted from the top.
    pub fn layer_speed(&self, k: usize) -> f64 {
        self.v_base + k as f64 * self.dv * (1.0 - self.lambda_pct / 100.0)
    }

    pub fn layer_speeds(&self) -> Vec<f64> {
        (0..self.n_layers).map(|k| self.layer_speed(k)).collect()
    }

    /// Layer index of depth `y` for a model spanning `[y0, y0 + height)`.
    pub fn layer_at(&self, y: f64, y0: f64, height: f64) -> usize {
        let frac = (y - y0) / height;
        let k = (frac * self.n_layers as f64).floor();
        (k.max(0.0) as usize).min(self.n_layers - 1)
    }
}

/// Equal-thickness horizontal layers over the y-extent of `geom`, assigned by
/// cell center, with unit density.
pub fn build_layered_model(spec: &LayeredModelSpec, geom: &GridGeometry) -> Result<MaterialField> {
    spec.validate()?;
    let speeds = spec.layer_speeds();
    if let Some(v) = speeds.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Model(format!("non-positive layer speed {v}")));
    }
    let height = geom.y_extent();
    let mut c = Vec::with_capacity(geom.nx * geom.ny);
    for j in 0..geom.ny as isize {
        let v = speeds[spec.layer_at(geom.y_center(j), geom.y0, height)];
        c.extend(std::iter::repeat_n(v, geom.nx));
    }
    let rho = vec![1.0; c.len()];
    MaterialField::from_speed_density(geom, &c, &rho)
}
