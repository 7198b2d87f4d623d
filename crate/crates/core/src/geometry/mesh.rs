use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::extract::{cross, dot, sub};
use super::grid::GridSpec;
use crate::algebra::RealPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

/// One facet (triangle in 3D, segment in 2D) with quadrature data at its
/// centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet<T> {
    /// Vertex indices in orientation order; segments use the first two.
    pub vertices: [usize; 3],
    pub centroid: [T; 3],
    /// Unit normal pointing from `{F < 0}` to `{F > 0}`.
    pub normal: [T; 3],
    pub gradient: [T; 3],
    pub grad_norm: T,
    /// Frobenius norm of the Hessian of `F` at the centroid.
    pub hess_norm: T,
    /// Area (3D) or length (2D).
    pub measure: T,
}

/// A closed, naturally oriented component of the level set.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<T> {
    pub vertices: Vec<[T; 3]>,
    pub facets: Vec<Facet<T>>,
    /// Nesting depth, 1 for outermost; 0 until computed.
    pub depth: usize,
    /// Arnold orientation relative to the natural one; 0 until assigned.
    pub orientation_sign: i8,
}

impl<T: Real> Component<T> {
    pub fn measure(&self) -> T {
        let m: Vec<T> = self.facets.iter().map(|f| f.measure).collect();
        pairwise_sum(&m)
    }

    pub fn min_grad(&self) -> T {
        self.facets.iter().map(|f| f.grad_norm).fold(T::infinity(), T::min)
    }

    /// Largest distance of a vertex from the origin.
    pub fn max_radius(&self) -> T {
        self.vertices.iter().map(|v| dot(*v, *v).sqrt()).fold(T::zero(), T::max)
    }
}

/// Oriented compact components of `{F(., l) = 0}` inside the ball.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetMesh<T> {
    pub n: usize,
    pub grid: GridSpec<T>,
    pub components: Vec<Component<T>>,
    /// Number of level-set pieces cut by the ball or the grid boundary.
    pub clipped_pieces: usize,
    /// Facets of the clipped pieces lying inside the ball.
    pub clipped_facets: Vec<Facet<T>>,
}

impl<T: Real> LevelSetMesh<T> {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn clipped(&self) -> bool {
        self.clipped_pieces > 0
    }

    pub fn num_facets(&self) -> usize {
        self.components.iter().map(|c| c.facets.len()).sum()
    }

    pub fn depths(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.depth).collect()
    }

    pub fn signs(&self) -> Vec<i8> {
        self.components.iter().map(|c| c.orientation_sign).collect()
    }

    /// Facets of all compact components with their component's Arnold sign.
    pub fn signed_facets(&self) -> impl Iterator<Item = (&Facet<T>, i8)> {
        self.components.iter().flat_map(|c| c.facets.iter().map(move |f| (f, c.orientation_sign)))
    }

    /// Total measure of the compact components.
    pub fn measure(&self) -> T {
        let m: Vec<T> = self.components.iter().map(|c| c.measure()).collect();
        pairwise_sum(&m)
    }
}

fn facet_data<T: Real>(f: &RealPolynomial<T>, n: usize, verts: [usize; 3], pos: &[[T; 3]]) -> Facet<T> {
    let p: Vec<[T; 3]> = verts[..n].iter().map(|&v| pos[v]).collect();
    let mut centroid = [T::zero(); 3];
    for q in &p {
        for a in 0..3 {
            centroid[a] = centroid[a] + q[a];
        }
    }
    let k = T::from_usize_lossy(n);
    centroid = centroid.map(|v| v / k);

    let (measure, raw_normal) = if n == 3 {
        let c = cross(sub(p[1], p[0]), sub(p[2], p[0]));
        let len = dot(c, c).sqrt();
        (len / T::lit(2.0), c)
    } else {
        let t = sub(p[1], p[0]);
        (dot(t, t).sqrt(), [t[1], -t[0], T::zero()])
    };
    let len = dot(raw_normal, raw_normal).sqrt();
    let normal = if len > T::zero() { raw_normal.map(|v| v / len) } else { [T::zero(); 3] };

    let mut g = [T::zero(); 3];
    f.gradient(&centroid[..n], &mut g[..n]);
    let mut hess = [T::zero(); 9];
    f.hessian(&centroid[..n], &mut hess[..n * n]);
    let hess_norm = hess[..n * n].iter().map(|&v| v * v).sum::<T>().sqrt();
    Facet { vertices: verts, centroid, normal, gradient: g, grad_norm: dot(g, g).sqrt(), hess_norm, measure }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn is_closed(n: usize, facets: &[[usize; 3]]) -> bool {
    let mut counts: HashMap<(usize, usize), u32> = HashMap::new();
    if n == 3 {
        for f in facets {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                *counts.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        counts.values().all(|&c| c % 2 == 0)
    } else {
        for f in facets {
            *counts.entry((f[0], 0)).or_default() += 1;
            *counts.entry((f[1], 0)).or_default() += 1;
        }
        counts.values().all(|&c| c % 2 == 0)
    }
}

fn lex_less<T: Real>(a: &[T; 3], b: &[T; 3]) -> std::cmp::Ordering {
    for k in 0..3 {
        match a[k].partial_cmp(&b[k]) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Splits raw facets into components, keeps the compact ones and computes
/// per-facet data.
pub(crate) fn assemble<T: Real>(
    f: &RealPolynomial<T>,
    grid: &GridSpec<T>,
    positions: Vec<[T; 3]>,
    facets: Vec<[usize; 3]>,
) -> LevelSetMesh<T> {
    let n = grid.dim();
    let mut uf = UnionFind::new(positions.len());
    for fc in &facets {
        for k in 1..n {
            uf.union(fc[0], fc[k]);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, fc) in facets.iter().enumerate() {
        groups.entry(uf.find(fc[0])).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort_by_key(|g| g[0]);

    let mut components = Vec::new();
    let mut clipped_pieces = 0;
    let mut clipped_facets = Vec::new();
    let r = grid.radius();
    for group in groups {
        let raw: Vec<[usize; 3]> = group.iter().map(|&i| facets[i]).collect();
        let inside_ball = raw.iter().flat_map(|fc| fc[..n].iter()).all(|&v| dot(positions[v], positions[v]) <= r * r);
        if !(inside_ball && is_closed(n, &raw)) {
            clipped_pieces += 1;
            for fc in &raw {
                let data = facet_data(f, n, *fc, &positions);
                if dot(data.centroid, data.centroid) <= r * r {
                    clipped_facets.push(data);
                }
            }
            continue;
        }
        let mut local: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut local_facets = Vec::with_capacity(raw.len());
        for fc in &raw {
            let mut lf = *fc;
            for k in 0..3 {
                lf[k] = *local.entry(fc[k]).or_insert_with(|| {
                    vertices.push(positions[fc[k]]);
                    vertices.len() - 1
                });
            }
            local_facets.push(facet_data(f, n, lf, &vertices));
        }
        components.push(Component { vertices, facets: local_facets, depth: 0, orientation_sign: 0 });
    }
    components.sort_by(|a, b| {
        let ma = a.vertices.iter().min_by(|x, y| lex_less(x, y)).copied().unwrap_or([T::zero(); 3]);
        let mb = b.vertices.iter().min_by(|x, y| lex_less(x, y)).copied().unwrap_or([T::zero(); 3]);
        lex_less(&ma, &mb)
    });
    LevelSetMesh { n, grid: *grid, components, clipped_pieces, clipped_facets }
}

const MAX_RAY_RETRIES: usize = 32;
const DEGENERACY: f64 = 1e-9;

/// Number of crossings of the ray `p + t d` (t > 0) with a component, or
/// `None` if the ray grazes an edge or vertex.
fn crossings<T: Real>(n: usize, c: &Component<T>, p: [T; 3], d: [T; 3]) -> Option<usize> {
    let eps = T::lit(DEGENERACY);
    let mut count = 0;
    for fc in &c.facets {
        if n == 3 {
            let [a, b, cc] = [c.vertices[fc.vertices[0]], c.vertices[fc.vertices[1]], c.vertices[fc.vertices[2]]];
            let e1 = sub(b, a);
            let e2 = sub(cc, a);
            let pv = cross(d, e2);
            let det = dot(e1, pv);
            let scale = dot(e1, e1).sqrt() * dot(e2, e2).sqrt();
            if det.abs() <= eps * scale {
                // parallel ray: degenerate only if it lies in the plane
                let w = sub(p, a);
                let nrm = cross(e1, e2);
                if dot(w, nrm).abs() <= eps * scale {
                    return None;
                }
                continue;
            }
            let inv = T::one() / det;
            let s = sub(p, a);
            let u = dot(s, pv) * inv;
            let q = cross(s, e1);
            let v = dot(d, q) * inv;
            let t = dot(e2, q) * inv;
            let w = T::one() - u - v;
            let inside = u > -eps && v > -eps && w > -eps;
            if !inside || t < -eps {
                continue;
            }
            if u.abs() <= eps || v.abs() <= eps || w.abs() <= eps || t.abs() <= eps {
                return None;
            }
            if t > T::zero() {
                count += 1;
            }
        } else {
            let a = c.vertices[fc.vertices[0]];
            let b = c.vertices[fc.vertices[1]];
            let e = sub(b, a);
            let det = d[0] * (-e[1]) + e[0] * d[1];
            let len = dot(e, e).sqrt();
            if det.abs() <= eps * len {
                continue;
            }
            let s = sub(a, p);
            // p + t d = a + u e
            let t = (s[0] * (-e[1]) + e[0] * s[1]) / det;
            let u = (d[0] * s[1] - d[1] * s[0]) / det;
            if u < -eps || u > T::one() + eps || t < -eps {
                continue;
            }
            if u.abs() <= eps || (u - T::one()).abs() <= eps || t.abs() <= eps {
                return None;
            }
            count += 1;
        }
    }
    Some(count)
}

fn random_direction<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> [T; 3] {
    loop {
        let mut d = [T::zero(); 3];
        for a in 0..n {
            d[a] = T::lit(rng.random_range(-1.0..1.0));
        }
        let len = dot(d, d).sqrt();
        if len > T::lit(0.1) {
            return d.map(|v| v / len);
        }
    }
}

/// Whether `p` lies inside the closed component `c`, by ray parity.
pub fn point_inside<T: Real>(n: usize, c: &Component<T>, p: [T; 3]) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..MAX_RAY_RETRIES {
        let d = random_direction(n, &mut rng);
        if let Some(k) = crossings(n, c, p, d) {
            return Ok(k % 2 == 1);
        }
    }
    Err(Error::RayCastingFailed { retries: MAX_RAY_RETRIES })
}

/// Assigns nesting depths: `1 +` the number of other components enclosing
/// a sample point of the component.
pub fn compute_nesting<T: Real>(mut mesh: LevelSetMesh<T>) -> Result<LevelSetMesh<T>> {
    let n = mesh.n;
    let samples: Vec<[T; 3]> = mesh.components.iter().map(|c| c.facets[0].centroid).collect();
    let mut depths = vec![1; mesh.components.len()];
    for (i, p) in samples.iter().enumerate() {
        for (j, other) in mesh.components.iter().enumerate() {
            if i != j && point_inside(n, other, *p)? {
                depths[i] += 1;
            }
        }
    }
    for (c, d) in mesh.components.iter_mut().zip(depths) {
        c.depth = d;
    }
    Ok(mesh)
}

/// Arnold signs: natural orientation on odd depths, reversed on even depths.
pub fn orient_arnold<T: Real>(mut mesh: LevelSetMesh<T>) -> Result<LevelSetMesh<T>> {
    for c in &mesh.components {
        if c.depth == 0 {
            return Err(Error::InvalidArgument("nesting depths have not been computed".into()));
        }
        if let Some(f) = c.facets.iter().find(|f| !(f.grad_norm > T::zero())) {
            return Err(Error::Irregular(format!("zero gradient at {:?}", f.centroid)));
        }
    }
    for c in &mut mesh.components {
        c.orientation_sign = if c.depth % 2 == 1 { 1 } else { -1 };
    }
    Ok(mesh)
}

/// Extraction followed by nesting and Arnold orientation.
pub fn arnold_cycle<T: Real>(f: &RealPolynomial<T>, grid: &GridSpec<T>) -> Result<LevelSetMesh<T>> {
    let mesh = super::extract::extract_level_set(f, grid)?;
    orient_arnold(compute_nesting(mesh)?)
}

/// Which orientation to use when summing over components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Every component as the boundary of `{F <= 0}` (sign +1).
    Natural,
    /// Component signs from [`orient_arnold`].
    Arnold,
}

impl Orientation {
    pub(crate) fn sign<T: Real>(self, c: &Component<T>) -> T {
        match self {
            Orientation::Natural => T::one(),
            Orientation::Arnold => T::from_i8(c.orientation_sign).unwrap(),
        }
    }
}

/// Winding number of the oriented level set around `p` (solid angle over
/// `4 pi` in 3D, turning angle over `2 pi` in 2D).
pub fn winding_number<T: Real>(mesh: &LevelSetMesh<T>, p: [T; 3], orientation: Orientation) -> T {
    let mut total = Vec::new();
    for c in &mesh.components {
        let s = orientation.sign(c);
        let mut parts = Vec::with_capacity(c.facets.len());
        for fc in &c.facets {
            let a = sub(c.vertices[fc.vertices[0]], p);
            let b = sub(c.vertices[fc.vertices[1]], p);
            if mesh.n == 3 {
                let cc = sub(c.vertices[fc.vertices[2]], p);
                let (la, lb, lc) = (dot(a, a).sqrt(), dot(b, b).sqrt(), dot(cc, cc).sqrt());
                let num = dot(a, cross(b, cc));
                let den = la * lb * lc + dot(a, b) * lc + dot(a, cc) * lb + dot(b, cc) * la;
                parts.push(T::lit(2.0) * num.atan2(den));
            } else {
                let crs = a[0] * b[1] - a[1] * b[0];
                parts.push(crs.atan2(dot(a, b)));
            }
        }
        total.push(s * pairwise_sum(&parts));
    }
    let full = if mesh.n == 3 { T::lit(4.0) * T::PI() } else { T::lit(2.0) * T::PI() };
    pairwise_sum(&total) / full
}

/// Enclosed volume (area in 2D) by the divergence theorem.
pub fn divergence_volume<T: Real>(mesh: &LevelSetMesh<T>, orientation: Orientation) -> T {
    let n = T::from_usize_lossy(mesh.n);
    let parts: Vec<T> = mesh
        .components
        .iter()
        .map(|c| {
            let terms: Vec<T> = c.facets.iter().map(|fc| dot(fc.centroid, fc.normal) * fc.measure).collect();
            orientation.sign(c) * pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&parts) / n
}

/// Wavefront OBJ text, one group per component. Facet vertex order encodes
/// the Arnold orientation.
pub fn to_obj<T: Real>(mesh: &LevelSetMesh<T>) -> String {
    let mut out = String::new();
    let mut offset = 1;
    for (i, c) in mesh.components.iter().enumerate() {
        let sign = if c.orientation_sign < 0 { "-1" } else { "+1" };
        let _ = writeln!(out, "g comp_{}_depth_{}_sign_{}", i + 1, c.depth, sign);
        for v in &c.vertices {
            let p = v.map(|x| x.to_f64().unwrap_or(f64::NAN));
            let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
        }
        for fc in &c.facets {
            let mut ids: Vec<usize> = fc.vertices[..mesh.n].iter().map(|&v| v + offset).collect();
            if c.orientation_sign < 0 {
                ids.reverse();
            }
            let kind = if mesh.n == 3 { "f" } else { "l" };
            let body: Vec<String> = ids.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{kind} {}", body.join(" "));
        }
        offset += c.vertices.len();
    }
    out
}
