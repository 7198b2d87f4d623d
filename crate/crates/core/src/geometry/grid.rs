use rayon::prelude::*;

use crate::algebra::RealPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid on the cube `[-R, R]^n` around the ball of radius `R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    n: usize,
    radius: T,
    h: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(n: usize, radius: T, h: T) -> Result<Self> {
        if !(n == 2 || n == 3) {
            return Err(Error::InvalidArgument(format!("grids exist for n = 2 or 3, got {n}")));
        }
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        if !(h > T::zero() && h < radius) {
            return Err(Error::InvalidArgument(format!("need 0 < h < radius, got h = {h}")));
        }
        Ok(Self { n, radius, h })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// Requested cell edge.
    pub fn h(&self) -> T {
        self.h
    }

    /// Cells per axis, `round(2R / h)`.
    pub fn cells_per_axis(&self) -> usize {
        let m = (T::lit(2.0) * self.radius / self.h).round().to_usize().unwrap_or(2);
        m.max(2)
    }

    /// Actual cell edge `2R / m`.
    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.radius / T::from_usize_lossy(self.cells_per_axis())
    }

    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.n as i32)
    }

    pub fn node_coord(&self, i: usize) -> T {
        -self.radius + T::from_usize_lossy(i) * self.spacing()
    }

    pub fn cell_center(&self, i: usize) -> T {
        -self.radius + (T::from_usize_lossy(i) + T::lit(0.5)) * self.spacing()
    }

    pub fn num_nodes(&self) -> usize {
        (self.cells_per_axis() + 1).pow(self.n as u32)
    }

    pub fn num_cells(&self) -> usize {
        self.cells_per_axis().pow(self.n as u32)
    }

    /// Node multi-index of a flat node id (last axis fastest).
    pub fn node_index(&self, id: usize) -> [usize; 3] {
        unflatten(id, self.cells_per_axis() + 1, self.n)
    }

    pub fn node_id(&self, idx: [usize; 3]) -> usize {
        flatten(idx, self.cells_per_axis() + 1, self.n)
    }

    pub fn cell_index(&self, id: usize) -> [usize; 3] {
        unflatten(id, self.cells_per_axis(), self.n)
    }

    pub fn cell_id(&self, idx: [usize; 3]) -> usize {
        flatten(idx, self.cells_per_axis(), self.n)
    }

    /// Coordinates of a node, padded with zeros to three entries.
    pub fn node_point(&self, id: usize) -> [T; 3] {
        let idx = self.node_index(id);
        let mut p = [T::zero(); 3];
        for a in 0..self.n {
            p[a] = self.node_coord(idx[a]);
        }
        p
    }

    pub fn cell_point(&self, id: usize) -> [T; 3] {
        let idx = self.cell_index(id);
        let mut p = [T::zero(); 3];
        for a in 0..self.n {
            p[a] = self.cell_center(idx[a]);
        }
        p
    }

    /// Values of `F` at every node, in node-id order.
    pub fn sample_nodes(&self, f: &RealPolynomial<T>) -> Vec<T> {
        let n = self.n;
        (0..self.num_nodes()).into_par_iter().map(|id| f.value(&self.node_point(id)[..n])).collect()
    }
}

fn flatten(idx: [usize; 3], side: usize, n: usize) -> usize {
    let mut id = 0;
    for &i in &idx[..n] {
        id = id * side + i;
    }
    id
}

fn unflatten(mut id: usize, side: usize, n: usize) -> [usize; 3] {
    let mut idx = [0; 3];
    for a in (0..n).rev() {
        idx[a] = id % side;
        id /= side;
    }
    idx
}

/// `true` iff `F(x, l) <= 0` and `|x| <= R`.
pub fn domain_indicator<T: Real>(f: &RealPolynomial<T>, x: &[T], radius: T) -> bool {
    let r2: T = x.iter().map(|&v| v * v).sum();
    r2 <= radius * radius && f.value(x) <= T::zero()
}

/// Volume of `{F <= 0} ∩ B` by counting cell centers.
pub fn indicator_volume<T: Real>(f: &RealPolynomial<T>, grid: &GridSpec<T>) -> T {
    let n = grid.dim();
    let count = (0..grid.num_cells())
        .into_par_iter()
        .filter(|&id| domain_indicator(f, &grid.cell_point(id)[..n], grid.radius()))
        .count();
    T::from_usize_lossy(count) * grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_indexing() {
        let g = GridSpec::<f64>::new(3, 1.5, 1.5 / 64.0).unwrap();
        assert_eq!(g.cells_per_axis(), 128);
        assert!((g.spacing() - 1.5 / 64.0).abs() < 1e-15);
        let id = g.node_id([3, 7, 11]);
        assert_eq!(g.node_index(id), [3, 7, 11]);
        assert_eq!(g.node_coord(0), -1.5);
        assert!((g.node_coord(128) - 1.5).abs() < 1e-12);
        let g2 = GridSpec::<f64>::new(2, 1.0, 0.1).unwrap();
        assert_eq!(g2.cells_per_axis(), 20);
        assert_eq!(g2.cell_index(g2.cell_id([4, 9, 0])), [4, 9, 0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(4, 1.0, 0.1).is_err());
        assert!(GridSpec::new(3, -1.0, 0.1).is_err());
        assert!(GridSpec::new(3, 1.0, 2.0).is_err());
    }

    #[test]
    fn indicator_examples() {
        let sphere = RealPolynomial::new(
            3,
            vec![(vec![2, 0, 0], 1.0), (vec![0, 2, 0], 1.0), (vec![0, 0, 2], 1.0), (vec![0, 0, 0], -1.0)],
        );
        assert!(domain_indicator(&sphere, &[0.0, 0.0, 0.0], 1.5));
        assert!(!domain_indicator(&sphere, &[2.0, 0.0, 0.0], 1.5));
        assert!(!domain_indicator(&sphere, &[0.9, 0.0, 0.0], 0.5));
    }
}
