use std::collections::VecDeque;

use rayon::prelude::*;

use crate::algebra::RealPolynomial;
use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::scalar::{par_pairwise_sum, Real};

/// Cell quadrature on the compact part of `{F <= 0} ∩ B`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Cells fully in or out according to the sign of `F` at the center.
    Midpoint,
    /// Boundary cells weighted by the linearized volume fraction
    /// `clamp(1/2 - F / (h |grad F|_1), 0, 1)`, which makes the weights
    /// continuous in `F` and in the deformation parameters.
    #[default]
    Fractional,
}

/// Weighted cell centers covering the compact domain.
///
/// The domain is the union of the 6-connected groups of cells with
/// `F(center) <= 0` that stay away from the ball boundary; unbounded
/// sublevel pieces cut off by the ball are discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSample<T> {
    n: usize,
    radius: T,
    points: Vec<[T; 3]>,
    weights: Vec<T>,
    extent: T,
    discarded_cells: usize,
}

impl<T: Real> DomainSample<T> {
    pub fn new(f: &RealPolynomial<T>, grid: &GridSpec<T>, rule: QuadratureRule) -> Result<Self> {
        let n = grid.dim();
        if f.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.dim() });
        }
        let m = grid.cells_per_axis();
        let h = grid.spacing();
        let limit = grid.radius() - h;
        let values: Vec<T> =
            (0..grid.num_cells()).into_par_iter().map(|id| f.value(&grid.cell_point(id)[..n])).collect();

        let mut strides = [0usize; 3];
        for a in 0..n {
            strides[a] = m.pow((n - 1 - a) as u32);
        }
        // Calls `visit` for every in-grid neighbor: face neighbors only, or
        // all 3^n - 1 with `diagonal`.
        let for_neighbors = |id: usize, diagonal: bool, visit: &mut dyn FnMut(usize)| {
            let idx = grid.cell_index(id);
            if !diagonal {
                for a in 0..n {
                    if idx[a] > 0 {
                        visit(id - strides[a]);
                    }
                    if idx[a] + 1 < m {
                        visit(id + strides[a]);
                    }
                }
                return;
            }
            let lo: Vec<usize> = (0..n).map(|a| idx[a].saturating_sub(1)).collect();
            let hi: Vec<usize> = (0..n).map(|a| (idx[a] + 1).min(m - 1)).collect();
            let mut j = [lo[0], lo[1], if n == 3 { lo[2] } else { 0 }];
            loop {
                if j[..n] != idx[..n] {
                    visit(grid.cell_id(j));
                }
                let mut a = n;
                loop {
                    if a == 0 {
                        return;
                    }
                    a -= 1;
                    if j[a] < hi[a] {
                        j[a] += 1;
                        break;
                    }
                    j[a] = lo[a];
                }
            }
        };

        // 0 = unvisited, 1 = selected, 2 = discarded, 3 = queued
        let mut label = vec![0u8; values.len()];
        let mut discarded_cells = 0;
        for seed in 0..values.len() {
            if label[seed] != 0 || values[seed] > T::zero() {
                continue;
            }
            let mut members = vec![seed];
            let mut queue = VecDeque::from([seed]);
            let mut touches = false;
            label[seed] = 3;
            while let Some(c) = queue.pop_front() {
                let p = grid.cell_point(c);
                let r = p[..n].iter().map(|&v| v * v).sum::<T>().sqrt();
                let idx = grid.cell_index(c);
                if r > limit || idx[..n].iter().any(|&i| i == 0 || i + 1 == m) {
                    touches = true;
                }
                for_neighbors(c, false, &mut |nb| {
                    if label[nb] == 0 && values[nb] <= T::zero() {
                        label[nb] = 3;
                        members.push(nb);
                        queue.push_back(nb);
                    }
                });
            }
            let mark = if touches { 2 } else { 1 };
            if touches {
                discarded_cells += members.len();
            }
            for c in members {
                label[c] = mark;
            }
        }

        // Selected cells plus their outside neighbors carry weight.
        let mut candidate = vec![false; values.len()];
        for id in 0..values.len() {
            if label[id] == 1 {
                candidate[id] = true;
                if rule == QuadratureRule::Fractional {
                    for_neighbors(id, true, &mut |nb| {
                        if values[nb] > T::zero() {
                            candidate[nb] = true;
                        }
                    });
                }
            }
        }
        let ids: Vec<usize> = (0..values.len()).filter(|&i| candidate[i]).collect();
        let cell_volume = grid.cell_volume();
        let weighted: Vec<([T; 3], T)> = ids
            .par_iter()
            .map(|&id| {
                let p = grid.cell_point(id);
                let v = values[id];
                let phi = match rule {
                    QuadratureRule::Midpoint => T::one(),
                    QuadratureRule::Fractional => {
                        let mut g = [T::zero(); 3];
                        f.gradient(&p[..n], &mut g[..n]);
                        let l1: T = g[..n].iter().map(|v| v.abs()).sum();
                        let width = h * l1;
                        if width > T::lit(1e-12) {
                            (T::lit(0.5) - v / width).max(T::zero()).min(T::one())
                        } else if v <= T::zero() {
                            T::one()
                        } else {
                            T::zero()
                        }
                    }
                };
                (p, phi * cell_volume)
            })
            .collect();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut extent = T::zero();
        for (p, w) in weighted {
            if w > T::zero() {
                extent = extent.max(p[..n].iter().map(|&v| v * v).sum::<T>().sqrt());
                points.push(p);
                weights.push(w);
            }
        }
        Ok(Self { n, radius: grid.radius(), points, weights, extent, discarded_cells })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Radius of the ball the sample was taken in.
    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[[T; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Largest `|x|` over weighted cell centers.
    pub fn extent(&self) -> T {
        self.extent
    }

    /// Cells with `F <= 0` dropped because their piece reaches the ball boundary.
    pub fn discarded_cells(&self) -> usize {
        self.discarded_cells
    }

    /// `sum_c w_c g(x_c)`, summed in a fixed order.
    pub fn integrate<G>(&self, g: G) -> T
    where
        G: Fn(&[T]) -> T + Sync,
    {
        let n = self.n;
        let idx: Vec<usize> = (0..self.points.len()).collect();
        par_pairwise_sum(&idx, |&i| g(&self.points[i][..n]) * self.weights[i])
    }

    pub fn volume(&self) -> T {
        self.integrate(|_| T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;
    use std::f64::consts::PI;

    #[test]
    fn ball_volume_both_rules() {
        let f = parse_polynomial("x1^2 + x2^2 + x3^2 - 1", 3).unwrap().to_real::<f64>();
        let g = GridSpec::new(3, 1.5, 1.5 / 64.0).unwrap();
        let exact = 4.0 * PI / 3.0;
        for rule in [QuadratureRule::Midpoint, QuadratureRule::Fractional] {
            let s = DomainSample::new(&f, &g, rule).unwrap();
            assert!((s.volume() - exact).abs() / exact < 0.01, "{rule:?}: {}", s.volume());
        }
    }

    #[test]
    fn unbounded_pieces_are_discarded() {
        // x1^3 - x1 + 0.3 - ... : a half-space-like piece plus nothing compact
        let f = parse_polynomial("x1 + 0.1", 2).unwrap().to_real::<f64>();
        let g = GridSpec::new(2, 1.0, 0.05).unwrap();
        let s = DomainSample::new(&f, &g, QuadratureRule::Fractional).unwrap();
        assert!(s.is_empty());
        assert!(s.discarded_cells() > 0);
    }

    #[test]
    fn empty_domain() {
        let f = parse_polynomial("x1^2 + x2^2 + x3^2 + 1", 3).unwrap().to_real::<f64>();
        let g = GridSpec::new(3, 1.0, 0.1).unwrap();
        assert!(DomainSample::new(&f, &g, QuadratureRule::Fractional).unwrap().is_empty());
    }
}
