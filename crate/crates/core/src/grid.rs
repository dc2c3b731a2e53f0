//! Uniform Cartesian grids and halo-padded scalar fields.
//!
//! Cells are indexed `(i, j)` with `i` along x and `j` along y (depth,
//! increasing downward). Interior cells run over `0..nx` and `0..ny`; ghost
//! cells extend `halo` cells beyond each edge and are addressed with negative
//! or past-the-end indices.

use crate::error::{Error, Result};

/// Coordinate direction of a sweep or an interface normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// Slot of the momentum component normal to this axis in `(eps, mu, mv)`.
    #[inline]
    pub fn normal(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
        }
    }

    /// Slot of the tangential momentum component.
    #[inline]
    pub fn tangential(self) -> usize {
        match self {
            Axis::X => 2,
            Axis::Y => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Left edge of the first interior cell.
    pub x0: f64,
    /// Top edge of the first interior row.
    pub y0: f64,
    pub halo: usize,
}

impl GridGeometry {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, x0: f64, y0: f64, halo: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Geometry(format!("need at least 3x3 cells, got {nx}x{ny}")));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::Geometry(format!("cell widths must be positive, got dx={dx}, dy={dy}")));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::Geometry("origin must be finite".into()));
        }
        if halo < 2 {
            return Err(Error::HaloTooSmall { need: 2, have: halo });
        }
        Ok(Self { nx, ny, dx, dy, x0, y0, halo })
    }

    /// Same geometry with a different ghost width.
    pub fn with_halo(&self, halo: usize) -> Result<Self> {
        Self::new(self.nx, self.ny, self.dx, self.dy, self.x0, self.y0, halo)
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.nx + 2 * self.halo
    }

    #[inline]
    pub fn padded_rows(&self) -> usize {
        self.ny + 2 * self.halo
    }

    #[inline]
    pub fn len_with_halo(&self) -> usize {
        self.stride() * self.padded_rows()
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn x_center(&self, i: isize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    pub fn y_center(&self, j: isize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.dy
    }

    pub fn x_extent(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn y_extent(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    /// Interior cell containing `(x, y)`, or `None` outside the grid.
    /// Points on a shared face belong to the cell on the +x / +y side.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.x0) / self.dx).floor();
        let fj = ((y - self.y0) / self.dy).floor();
        if !(fi.is_finite() && fj.is_finite()) {
            return None;
        }
        let (mut i, mut j) = (fi as i64, fj as i64);
        // The far edges close the domain.
        if x == self.x0 + self.x_extent() {
            i -= 1;
        }
        if y == self.y0 + self.y_extent() {
            j -= 1;
        }
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    #[inline]
    pub fn index(&self, i: isize, j: isize) -> usize {
        let h = self.halo as isize;
        debug_assert!(i >= -h && i < self.nx as isize + h, "i={i} out of range");
        debug_assert!(j >= -h && j < self.ny as isize + h, "j={j} out of range");
        ((j + h) as usize) * self.stride() + (i + h) as usize
    }
}

/// A scalar field over a grid, including its ghost halo.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    geom: GridGeometry,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(geom: &GridGeometry) -> Self {
        Self::filled(geom, 0.0)
    }

    pub fn filled(geom: &GridGeometry, value: f64) -> Self {
        Self {
            geom: *geom,
            data: vec![value; geom.len_with_halo()],
        }
    }

    /// Build from a function of the interior cell index; ghosts are zero.
    pub fn from_fn(geom: &GridGeometry, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut field = Self::zeros(geom);
        for j in 0..geom.ny {
            for i in 0..geom.nx {
                field.set(i as isize, j as isize, f(i, j));
            }
        }
        field
    }

    /// Build from row-major interior values (length `nx * ny`).
    pub fn from_interior(geom: &GridGeometry, values: &[f64]) -> Result<Self> {
        if values.len() != geom.nx * geom.ny {
            return Err(Error::Length(format!(
                "expected {} interior values, got {}",
                geom.nx * geom.ny,
                values.len()
            )));
        }
        Ok(Self::from_fn(geom, |i, j| values[j * geom.nx + i]))
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        self.data[self.geom.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        let k = self.geom.index(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row `j` including the horizontal halo.
    #[inline]
    pub fn row(&self, j: isize) -> &[f64] {
        let start = self.geom.index(-(self.geom.halo as isize), j);
        &self.data[start..start + self.geom.stride()]
    }

    /// Row-major copy of the interior cells.
    pub fn interior(&self) -> Vec<f64> {
        let g = &self.geom;
        let mut out = Vec::with_capacity(g.nx * g.ny);
        for j in 0..g.ny as isize {
            let start = g.index(0, j);
            out.extend_from_slice(&self.data[start..start + g.nx]);
        }
        out
    }

    pub fn interior_iter(&self) -> impl Iterator<Item = f64> + '_ {
        let g = self.geom;
        (0..g.ny as isize).flat_map(move |j| {
            let start = g.index(0, j);
            self.data[start..start + g.nx].iter().copied()
        })
    }

    /// Copy the nearest interior value into every ghost cell.
    pub fn extrapolate_halo(&mut self) {
        let g = self.geom;
        let h = g.halo as isize;
        let (nx, ny) = (g.nx as isize, g.ny as isize);
        for j in -h..ny + h {
            for i in -h..nx + h {
                if i >= 0 && i < nx && j >= 0 && j < ny {
                    continue;
                }
                let v = self.get(i.clamp(0, nx - 1), j.clamp(0, ny - 1));
                self.set(i, j, v);
            }
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            geom: self.geom,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.geom, other.geom);
        Self {
            geom: self.geom,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.interior_iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(GridGeometry::new(2, 5, 1.0, 1.0, 0.0, 0.0, 2).is_err());
        assert!(GridGeometry::new(5, 5, 0.0, 1.0, 0.0, 0.0, 2).is_err());
        assert!(matches!(
            GridGeometry::new(5, 5, 1.0, 1.0, 0.0, 0.0, 1),
            Err(Error::HaloTooSmall { need: 2, have: 1 })
        ));
    }

    #[test]
    fn locate_uses_half_open_cells() {
        let g = GridGeometry::new(10, 10, 10.0, 10.0, 0.0, 0.0, 2).unwrap();
        assert_eq!(g.locate(5.0, 5.0), Some((0, 0)));
        assert_eq!(g.locate(10.0, 0.0), Some((1, 0)));
        assert_eq!(g.locate(100.0, 100.0), Some((9, 9)));
        assert_eq!(g.locate(-0.1, 5.0), None);
        assert_eq!(g.locate(5.0, 100.1), None);
    }

    #[test]
    fn halo_extrapolation_copies_edges() {
        let g = GridGeometry::new(3, 4, 1.0, 1.0, 0.0, 0.0, 2).unwrap();
        let mut f = Field::from_fn(&g, |i, j| (10 * j + i) as f64);
        f.extrapolate_halo();
        assert_eq!(f.get(-2, 0), 0.0);
        assert_eq!(f.get(4, 3), 32.0);
        assert_eq!(f.get(-1, -2), 0.0);
        assert_eq!(f.get(1, 5), 31.0);
        assert_eq!(f.interior().len(), 12);
    }
}
