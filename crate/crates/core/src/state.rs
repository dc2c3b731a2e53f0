//! Conserved state `(eps, m_u, m_v)` with ghost halo, and boundary fills.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Field, GridGeometry};
use crate::model::{CellMaterial, MaterialField};

/// One conserved state vector: strain, x-momentum, y-momentum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Q3(pub [f64; 3]);

impl Q3 {
    pub const ZERO: Q3 = Q3([0.0; 3]);

    #[inline]
    pub fn new(eps: f64, mu: f64, mv: f64) -> Self {
        Q3([eps, mu, mv])
    }

    #[inline]
    pub fn dot(self, o: Q3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn map(self, f: impl Fn(f64) -> f64) -> Q3 {
        Q3([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    #[inline]
    pub fn zip(self, o: Q3, f: impl Fn(f64, f64) -> f64) -> Q3 {
        Q3([f(self.0[0], o.0[0]), f(self.0[1], o.0[1]), f(self.0[2], o.0[2])])
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<usize> for Q3 {
    type Output = f64;
    #[inline]
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl std::ops::IndexMut<usize> for Q3 {
    #[inline]
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.0[k]
    }
}

impl Add for Q3 {
    type Output = Q3;
    #[inline]
    fn add(self, o: Q3) -> Q3 {
        Q3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Q3 {
    type Output = Q3;
    #[inline]
    fn sub(self, o: Q3) -> Q3 {
        Q3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Q3 {
    type Output = Q3;
    #[inline]
    fn neg(self) -> Q3 {
        Q3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<Q3> for f64 {
    type Output = Q3;
    #[inline]
    fn mul(self, q: Q3) -> Q3 {
        Q3([self * q.0[0], self * q.0[1], self * q.0[2]])
    }
}

impl Mul<f64> for Q3 {
    type Output = Q3;
    #[inline]
    fn mul(self, a: f64) -> Q3 {
        a * self
    }
}

impl AddAssign for Q3 {
    #[inline]
    fn add_assign(&mut self, o: Q3) {
        *self = *self + o;
    }
}

impl SubAssign for Q3 {
    #[inline]
    fn sub_assign(&mut self, o: Q3) {
        *self = *self - o;
    }
}

/// Physical flux of the P-wave system in direction `axis` for a cell of
/// material `mat`: `f = (-m_u/rho, -K eps, 0)` along x and
/// `g = (-m_v/rho, 0, -K eps)` along y.
#[inline]
pub fn flux(q: Q3, mat: &CellMaterial, axis: Axis) -> Q3 {
    let n = axis.normal();
    let mut f = Q3::ZERO;
    f.0[0] = -q.0[n] / mat.rho;
    f.0[n] = -mat.kappa * q.0[0];
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub eps: Field,
    pub mu: Field,
    pub mv: Field,
}

impl StateField {
    pub fn zeros(geom: &GridGeometry) -> Self {
        Self {
            eps: Field::zeros(geom),
            mu: Field::zeros(geom),
            mv: Field::zeros(geom),
        }
    }

    pub fn from_fn(geom: &GridGeometry, mut f: impl FnMut(usize, usize) -> Q3) -> Self {
        let mut s = Self::zeros(geom);
        for j in 0..geom.ny {
            for i in 0..geom.nx {
                s.set(i as isize, j as isize, f(i, j));
            }
        }
        s
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        self.eps.geometry()
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> Q3 {
        let k = self.geometry().index(i, j);
        Q3([self.eps.as_slice()[k], self.mu.as_slice()[k], self.mv.as_slice()[k]])
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, q: Q3) {
        let k = self.geometry().index(i, j);
        self.eps.as_mut_slice()[k] = q.0[0];
        self.mu.as_mut_slice()[k] = q.0[1];
        self.mv.as_mut_slice()[k] = q.0[2];
    }

    #[inline]
    pub fn get_flat(&self, k: usize) -> Q3 {
        Q3([self.eps.as_slice()[k], self.mu.as_slice()[k], self.mv.as_slice()[k]])
    }

    #[inline]
    pub fn set_flat(&mut self, k: usize, q: Q3) {
        self.eps.as_mut_slice()[k] = q.0[0];
        self.mu.as_mut_slice()[k] = q.0[1];
        self.mv.as_mut_slice()[k] = q.0[2];
    }

    /// `self + a * other` over every stored cell.
    pub fn axpy(&self, a: f64, other: &StateField) -> StateField {
        StateField {
            eps: self.eps.zip_map(&other.eps, |x, y| x + a * y),
            mu: self.mu.zip_map(&other.mu, |x, y| x + a * y),
            mv: self.mv.zip_map(&other.mv, |x, y| x + a * y),
        }
    }

    pub fn scale(&self, a: f64) -> StateField {
        StateField {
            eps: self.eps.map(|x| a * x),
            mu: self.mu.map(|x| a * x),
            mv: self.mv.map(|x| a * x),
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.eps, &self.mu, &self.mv]
            .iter()
            .all(|f| f.interior_iter().all(f64::is_finite))
    }

    /// Largest absolute difference over interior cells and components.
    pub fn max_abs_diff(&self, other: &StateField) -> f64 {
        [(&self.eps, &other.eps), (&self.mu, &other.mu), (&self.mv, &other.mv)]
            .iter()
            .flat_map(|(a, b)| a.interior_iter().zip(b.interior_iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    SolidWall,
    Periodic,
    Extended,
}

/// Boundary condition per edge. `top` is the `y = y0` edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub top: BoundaryKind,
    pub bottom: BoundaryKind,
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

impl Default for BoundarySpec {
    /// Solid walls at top and bottom, extended sides.
    fn default() -> Self {
        Self {
            top: BoundaryKind::SolidWall,
            bottom: BoundaryKind::SolidWall,
            left: BoundaryKind::Extended,
            right: BoundaryKind::Extended,
        }
    }
}

impl BoundarySpec {
    pub fn periodic() -> Self {
        Self::uniform(BoundaryKind::Periodic)
    }

    pub fn uniform(kind: BoundaryKind) -> Self {
        Self { top: kind, bottom: kind, left: kind, right: kind }
    }

    pub fn validate(&self) -> Result<()> {
        let paired = |a: BoundaryKind, b: BoundaryKind| {
            (a == BoundaryKind::Periodic) == (b == BoundaryKind::Periodic)
        };
        if !paired(self.left, self.right) || !paired(self.top, self.bottom) {
            return Err(Error::Boundary("periodic edges must be paired with their opposite edge".into()));
        }
        Ok(())
    }
}

/// How a ghost cell at mirror distance `m` (0 = adjacent) past an edge is
/// sourced: which interior cell index and whether the normal component flips.
#[inline]
fn ghost_source(kind: BoundaryKind, m: isize, n: isize, low_edge: bool) -> (isize, bool) {
    match (kind, low_edge) {
        (BoundaryKind::SolidWall, true) => (m, true),
        (BoundaryKind::SolidWall, false) => (n - 1 - m, true),
        (BoundaryKind::Periodic, true) => (n - 1 - m, false),
        (BoundaryKind::Periodic, false) => (m, false),
        (BoundaryKind::Extended, true) => (0, false),
        (BoundaryKind::Extended, false) => (n - 1, false),
    }
}

/// Fill scalar ghost cells: `flip` gives the sign rule per edge for solid
/// walls (`true` means odd reflection). X edges are filled first over the
/// interior rows, then the y edges over the full padded width, so corners
/// are consistent.
pub(crate) fn fill_scalar_halo(field: &mut Field, spec: &BoundarySpec, odd_x: bool, odd_y: bool) {
    let g = *field.geometry();
    let h = g.halo as isize;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    for j in 0..ny {
        for m in 0..h {
            let (src, wall) = ghost_source(spec.left, m, nx, true);
            let s = if wall && odd_x { -1.0 } else { 1.0 };
            field.set(-1 - m, j, s * field.get(src, j));
            let (src, wall) = ghost_source(spec.right, m, nx, false);
            let s = if wall && odd_x { -1.0 } else { 1.0 };
            field.set(nx + m, j, s * field.get(src, j));
        }
    }
    for m in 0..h {
        let (src_t, wall_t) = ghost_source(spec.top, m, ny, true);
        let (src_b, wall_b) = ghost_source(spec.bottom, m, ny, false);
        let st = if wall_t && odd_y { -1.0 } else { 1.0 };
        let sb = if wall_b && odd_y { -1.0 } else { 1.0 };
        for i in -h..nx + h {
            field.set(i, -1 - m, st * field.get(i, src_t));
            field.set(i, ny + m, sb * field.get(i, src_b));
        }
    }
}

pub(crate) fn check_halo(geom: &GridGeometry, spec: &BoundarySpec, need: usize) -> Result<()> {
    spec.validate()?;
    if geom.halo < need {
        return Err(Error::HaloTooSmall { need, have: geom.halo });
    }
    let periodic_x = spec.left == BoundaryKind::Periodic;
    let periodic_y = spec.top == BoundaryKind::Periodic;
    let wall_x = spec.left == BoundaryKind::SolidWall || spec.right == BoundaryKind::SolidWall;
    let wall_y = spec.top == BoundaryKind::SolidWall || spec.bottom == BoundaryKind::SolidWall;
    // Wrapped and mirrored ghosts must come from distinct interior cells.
    if ((periodic_x || wall_x) && geom.halo > geom.nx) || ((periodic_y || wall_y) && geom.halo > geom.ny) {
        return Err(Error::Boundary(format!(
            "halo of {} exceeds the {}x{} interior",
            geom.halo, geom.nx, geom.ny
        )));
    }
    Ok(())
}

/// Fill every ghost cell of `state` according to `spec`.
///
/// Solid walls mirror strain and tangential momentum evenly and flip the sign
/// of the wall-normal momentum; periodic edges wrap; extended edges copy the
/// nearest interior cell.
pub fn apply_boundary(state: &mut StateField, spec: &BoundarySpec) -> Result<()> {
    check_halo(state.geometry(), spec, 2)?;
    fill_scalar_halo(&mut state.eps, spec, false, false);
    fill_scalar_halo(&mut state.mu, spec, true, false);
    fill_scalar_halo(&mut state.mv, spec, false, true);
    Ok(())
}

/// Stress `sigma = K eps` for every stored cell.
pub fn stress_of(state: &StateField, mat: &MaterialField) -> Field {
    state.eps.zip_map(&mat.kappa, |e, k| k * e)
}

/// Compensated sum, so traversal order does not matter to working precision.
pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Interior totals of each conserved component times the cell area.
pub fn total_mass(state: &StateField) -> [f64; 3] {
    let area = state.geometry().cell_area();
    [&state.eps, &state.mu, &state.mv].map(|f| neumaier_sum(f.interior_iter()) * area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand::rngs::StdRng;

    fn geom(nx: usize, ny: usize) -> GridGeometry {
        GridGeometry::new(nx, ny, 1.0, 1.0, 0.0, 0.0, 2).unwrap()
    }

    fn random_state(g: &GridGeometry, seed: u64) -> StateField {
        let mut rng = StdRng::seed_from_u64(seed);
        StateField::from_fn(g, |_, _| Q3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn top_wall_flips_normal_momentum() {
        let g = geom(4, 4);
        let mut s = StateField::zeros(&g);
        s.set(2, 0, Q3::new(1.0, 2.0, 3.0));
        s.set(2, 1, Q3::new(4.0, 5.0, 6.0));
        apply_boundary(&mut s, &BoundarySpec::default()).unwrap();
        assert_eq!(s.get(2, -1), Q3::new(1.0, 2.0, -3.0));
        assert_eq!(s.get(2, -2), Q3::new(4.0, 5.0, -6.0));
    }

    #[test]
    fn side_wall_flips_x_momentum() {
        let g = geom(4, 4);
        let mut s = StateField::zeros(&g);
        s.set(3, 1, Q3::new(1.0, 2.0, 3.0));
        apply_boundary(&mut s, &BoundarySpec::uniform(BoundaryKind::SolidWall)).unwrap();
        assert_eq!(s.get(4, 1), Q3::new(1.0, -2.0, 3.0));
    }

    #[test]
    fn periodic_wraps_and_extended_copies() {
        let g = geom(5, 4);
        let mut s = random_state(&g, 1);
        apply_boundary(&mut s, &BoundarySpec::periodic()).unwrap();
        for j in 0..4 {
            assert_eq!(s.get(-1, j), s.get(4, j));
            assert_eq!(s.get(-2, j), s.get(3, j));
            assert_eq!(s.get(5, j), s.get(0, j));
        }
        assert_eq!(s.get(-1, -1), s.get(4, 3));
        apply_boundary(&mut s, &BoundarySpec::uniform(BoundaryKind::Extended)).unwrap();
        assert_eq!(s.get(-2, 2), s.get(0, 2));
        assert_eq!(s.get(6, 5), s.get(4, 3));
    }

    #[test]
    fn zero_state_has_zero_ghosts() {
        let g = geom(4, 5);
        for kind in [BoundaryKind::SolidWall, BoundaryKind::Periodic, BoundaryKind::Extended] {
            let mut s = StateField::zeros(&g);
            apply_boundary(&mut s, &BoundarySpec::uniform(kind)).unwrap();
            assert!(s.eps.as_slice().iter().chain(s.mu.as_slice()).chain(s.mv.as_slice()).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rejects_unpaired_periodic_and_small_grids() {
        let g = geom(4, 4);
        let mut s = StateField::zeros(&g);
        let spec = BoundarySpec { left: BoundaryKind::Periodic, ..BoundarySpec::default() };
        assert!(matches!(apply_boundary(&mut s, &spec), Err(Error::Boundary(_))));
        let g = GridGeometry::new(3, 3, 1.0, 1.0, 0.0, 0.0, 4).unwrap();
        let mut s = StateField::zeros(&g);
        assert!(apply_boundary(&mut s, &BoundarySpec::periodic()).is_err());
    }

    #[test]
    fn boundary_fill_is_idempotent() {
        let g = geom(6, 5);
        for spec in [BoundarySpec::default(), BoundarySpec::periodic(), BoundarySpec::uniform(BoundaryKind::SolidWall)] {
            let mut a = random_state(&g, 7);
            apply_boundary(&mut a, &spec).unwrap();
            let mut b = a.clone();
            apply_boundary(&mut b, &spec).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn wall_ghosts_preserve_magnitudes() {
        let g = geom(6, 5);
        let mut s = random_state(&g, 3);
        apply_boundary(&mut s, &BoundarySpec::uniform(BoundaryKind::SolidWall)).unwrap();
        for i in 0..6 {
            for m in 0..2 {
                let (ghost, inner) = (s.get(i, -1 - m), s.get(i, m));
                assert_eq!(ghost.0.map(f64::abs), inner.0.map(f64::abs));
            }
        }
    }

    #[test]
    fn stress_examples() {
        let g = geom(3, 3);
        let mut s = StateField::zeros(&g);
        let m = MaterialField::uniform(&g, 3f64.sqrt(), 1.0).unwrap();
        assert!(stress_of(&s, &m).as_slice().iter().all(|&v| v == 0.0));
        s.set(1, 1, Q3::new(2.0, 0.0, 0.0));
        let sig = stress_of(&s, &m);
        assert!((sig.get(1, 1) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn stress_ratio_and_linearity() {
        let g = geom(8, 8);
        let mut rng = StdRng::seed_from_u64(11);
        let speed: Vec<f64> = (0..64).map(|_| rng.gen_range(0.5..5.0)).collect();
        let m = MaterialField::from_speed_density(&g, &speed, &vec![1.0; 64]).unwrap();
        let s = random_state(&g, 5);
        let sig = stress_of(&s, &m);
        for j in 0..8 {
            for i in 0..8 {
                let e = s.get(i, j)[0];
                if e != 0.0 {
                    assert!((sig.get(i, j) / e - m.kappa.get(i, j)).abs() <= 1e-15 * m.kappa.get(i, j) * 4.0);
                }
            }
        }
        let scaled = stress_of(&s.scale(-2.5), &m);
        for (a, b) in scaled.interior_iter().zip(sig.interior_iter()) {
            assert!((a + 2.5 * b).abs() <= 1e-14 * b.abs().max(1.0));
        }
    }

    #[test]
    fn total_mass_examples() {
        let g = geom(4, 4);
        let mut s = StateField::zeros(&g);
        assert_eq!(total_mass(&s), [0.0; 3]);
        s.set(1, 2, Q3::new(1.0, 0.0, 0.0));
        assert_eq!(total_mass(&s), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn total_mass_independent_of_traversal() {
        let g = GridGeometry::new(37, 29, 0.5, 2.0, 0.0, 0.0, 2).unwrap();
        let s = random_state(&g, 9);
        let forward = total_mass(&s);
        // column-major, reversed
        let mut backward = [0.0; 3];
        for i in (0..37).rev() {
            for j in (0..29).rev() {
                let q = s.get(i, j);
                for c in 0..3 {
                    backward[c] += q[c];
                }
            }
        }
        for c in 0..3 {
            let b = backward[c] * g.cell_area();
            let scale: f64 = 37.0 * 29.0;
            assert!((forward[c] - b).abs() <= 1e-12 * scale, "{c}: {} vs {}", forward[c], b);
        }
    }
}
