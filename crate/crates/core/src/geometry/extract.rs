//! Marching simplices on the uniform grid.
//!
//! Each cube is split into six Kuhn tetrahedra sharing the main diagonal
//! (each square into two triangles); the split is conforming, so the
//! contour is watertight. A node counts as inside when `F < 0`.

use std::collections::HashMap;

use rayon::prelude::*;

use super::grid::GridSpec;
use super::mesh::{assemble, LevelSetMesh};
use crate::algebra::RealPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Vertex key: the grid edge it lies on, or `(v, v)` when it sits on node `v`.
pub(crate) type EdgeKey = (usize, usize);

/// A raw facet: vertex keys in orientation order (third key unused in 2D).
pub(crate) type RawFacet = [EdgeKey; 3];

const KUHN: [[usize; 4]; 6] = [[0, 1, 3, 7], [0, 1, 5, 7], [0, 2, 3, 7], [0, 2, 6, 7], [0, 4, 5, 7], [0, 4, 6, 7]];

const SQUARE: [[usize; 3]; 2] = [[0, 1, 3], [0, 2, 3]];

struct Context<'a, T> {
    grid: &'a GridSpec<T>,
    values: &'a [T],
    /// Node id strides per axis.
    strides: [usize; 3],
}

impl<T: Real> Context<'_, T> {
    fn inside(&self, node: usize) -> bool {
        self.values[node] < T::zero()
    }

    fn key(&self, a: usize, b: usize) -> EdgeKey {
        let (inside, outside) = if self.inside(a) { (a, b) } else { (b, a) };
        if self.values[outside] == T::zero() {
            (outside, outside)
        } else {
            (inside.min(outside), inside.max(outside))
        }
    }

    /// Direction from the inside nodes to the outside nodes of a simplex.
    fn outward(&self, ins: &[usize], outs: &[usize]) -> [T; 3] {
        let mean = |ids: &[usize]| {
            let mut m = [T::zero(); 3];
            for &id in ids {
                let p = self.grid.node_point(id);
                for a in 0..3 {
                    m[a] = m[a] + p[a];
                }
            }
            let k = T::from_usize_lossy(ids.len());
            m.map(|v| v / k)
        };
        let (a, b) = (mean(ins), mean(outs));
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
    }

    fn position(&self, key: EdgeKey) -> [T; 3] {
        let (a, b) = key;
        let pa = self.grid.node_point(a);
        if a == b {
            return pa;
        }
        let pb = self.grid.node_point(b);
        let (fa, fb) = (self.values[a], self.values[b]);
        let t = fa / (fa - fb);
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]), pa[2] + t * (pb[2] - pa[2])]
    }

    fn orient_triangle(&self, mut tri: RawFacet, dir: [T; 3], out: &mut Vec<RawFacet>) {
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return;
        }
        let p: Vec<[T; 3]> = tri.iter().map(|&k| self.position(k)).collect();
        let u = sub(p[1], p[0]);
        let v = sub(p[2], p[0]);
        if dot(cross(u, v), dir) < T::zero() {
            tri.swap(1, 2);
        }
        out.push(tri);
    }

    fn tetrahedron(&self, nodes: [usize; 4], out: &mut Vec<RawFacet>) {
        let ins: Vec<usize> = nodes.iter().copied().filter(|&v| self.inside(v)).collect();
        let outs: Vec<usize> = nodes.iter().copied().filter(|&v| !self.inside(v)).collect();
        match ins.len() {
            1 => {
                let a = ins[0];
                let tri = [self.key(a, outs[0]), self.key(a, outs[1]), self.key(a, outs[2])];
                self.orient_triangle(tri, self.outward(&ins, &outs), out);
            }
            3 => {
                let d = outs[0];
                let tri = [self.key(ins[0], d), self.key(ins[1], d), self.key(ins[2], d)];
                self.orient_triangle(tri, self.outward(&ins, &outs), out);
            }
            2 => {
                let (a, b, c, d) = (ins[0], ins[1], outs[0], outs[1]);
                let quad = [self.key(a, c), self.key(a, d), self.key(b, d), self.key(b, c)];
                let dir = self.outward(&ins, &outs);
                self.orient_triangle([quad[0], quad[1], quad[2]], dir, out);
                self.orient_triangle([quad[0], quad[2], quad[3]], dir, out);
            }
            _ => {}
        }
    }

    fn triangle(&self, nodes: [usize; 3], out: &mut Vec<RawFacet>) {
        let ins: Vec<usize> = nodes.iter().copied().filter(|&v| self.inside(v)).collect();
        let outs: Vec<usize> = nodes.iter().copied().filter(|&v| !self.inside(v)).collect();
        let (mut s0, mut s1) = match ins.len() {
            1 => (self.key(ins[0], outs[0]), self.key(ins[0], outs[1])),
            2 => (self.key(ins[0], outs[0]), self.key(ins[1], outs[0])),
            _ => return,
        };
        if s0 == s1 {
            return;
        }
        // Outward normal of the segment is the tangent rotated clockwise.
        let t = sub(self.position(s1), self.position(s0));
        let normal = [t[1], -t[0], T::zero()];
        if dot(normal, self.outward(&ins, &outs)) < T::zero() {
            std::mem::swap(&mut s0, &mut s1);
        }
        out.push([s0, s1, s1]);
    }

    fn cell(&self, cell: [usize; 3], out: &mut Vec<RawFacet>) {
        let n = self.grid.dim();
        let base: usize = (0..n).map(|a| cell[a] * self.strides[a]).sum();
        // bit 0 is the last axis
        let corner = |bits: usize| base + (0..n).map(|a| ((bits >> (n - 1 - a)) & 1) * self.strides[a]).sum::<usize>();
        let corners = 1usize << self.grid.dim();
        let first = self.inside(corner(0));
        if (1..corners).all(|b| self.inside(corner(b)) == first) {
            return;
        }
        if self.grid.dim() == 3 {
            for tet in KUHN {
                self.tetrahedron(tet.map(corner), out);
            }
        } else {
            for tri in SQUARE {
                self.triangle(tri.map(corner), out);
            }
        }
    }
}

pub(crate) fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Oriented raw facets of `{F = 0}` in deterministic cell order, with vertex
/// positions.
pub(crate) fn march<T: Real>(f: &RealPolynomial<T>, grid: &GridSpec<T>) -> (Vec<[T; 3]>, Vec<[usize; 3]>) {
    let values = grid.sample_nodes(f);
    let m = grid.cells_per_axis();
    let n = grid.dim();
    let mut strides = [0; 3];
    for a in 0..n {
        strides[a] = (m + 1).pow((n - 1 - a) as u32);
    }
    let ctx = Context { grid, values: &values, strides };
    let slabs: Vec<Vec<RawFacet>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let rest = m.pow(n as u32 - 1);
            for r in 0..rest {
                let mut cell = [i, 0, 0];
                if n == 3 {
                    cell[1] = r / m;
                    cell[2] = r % m;
                } else {
                    cell[1] = r;
                }
                ctx.cell(cell, &mut out);
            }
            out
        })
        .collect();

    let mut ids: HashMap<EdgeKey, usize> = HashMap::new();
    let mut positions = Vec::new();
    let mut facets = Vec::new();
    for facet in slabs.into_iter().flatten() {
        let mut f = [0usize; 3];
        for (slot, key) in f.iter_mut().zip(facet) {
            *slot = *ids.entry(key).or_insert_with(|| {
                positions.push(ctx.position(key));
                positions.len() - 1
            });
        }
        facets.push(f);
    }
    (positions, facets)
}

/// Oriented level set `{F(., l) = 0}` on the grid, split into components.
///
/// Components that are closed and lie in the ball are kept; pieces cut by
/// the ball or the grid boundary are only counted (`clipped`).
pub fn extract_level_set<T: Real>(f: &RealPolynomial<T>, grid: &GridSpec<T>) -> Result<LevelSetMesh<T>> {
    if f.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: f.dim() });
    }
    let (positions, facets) = march(f, grid);
    Ok(assemble(f, grid, positions, facets))
}
