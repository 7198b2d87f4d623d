//! Newton potentials of the domains `D = {F <= 0} ∩ B`: volume quadrature,
//! single layers with the standard charge `dS / |grad F|`, the
//! Gelfand-Leray derivative in the deformation parameters, harmonic
//! moments and their multipole expansion.

mod domain;
mod kernel;

pub use domain::{DomainSample, QuadratureRule};
pub use kernel::{moment_indices, multipole_coefficients, newton_kernel};

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::algebra::{ExponentVector, Polynomial, RealPolynomial, VersalDeformation};
use crate::error::{Error, Result};
use crate::geometry::{GridSpec, LevelSetMesh, Orientation};
use crate::io::{fmt_f64, Float};
use crate::scalar::{pairwise_sum, to_real, Rational, Real};
use kernel::kernel_r2;

/// Mass density `psi` on the domain.
#[derive(Clone, Debug)]
pub struct Density<T> {
    psi: RealPolynomial<T>,
    nonzero_at_origin: bool,
}

impl<T: Real> Density<T> {
    pub fn constant(n: usize, c: T) -> Self {
        Self { psi: RealPolynomial::new(n, vec![(vec![0; n], c)]), nonzero_at_origin: c != T::zero() }
    }

    /// `psi = 1`.
    pub fn one(n: usize) -> Self {
        Self::constant(n, T::one())
    }

    /// Polynomial density; with `require_nonzero_at_origin`, `psi(0) = 0`
    /// is rejected.
    pub fn polynomial(p: &Polynomial, require_nonzero_at_origin: bool) -> Result<Self> {
        let at_origin = p.constant_term();
        if require_nonzero_at_origin && at_origin == Rational::from_integer(0.into()) {
            return Err(Error::InvalidArgument("density must be nonzero at the origin".into()));
        }
        Ok(Self { psi: p.to_real(), nonzero_at_origin: require_nonzero_at_origin })
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    pub fn is_nonzero_at_origin(&self) -> bool {
        self.nonzero_at_origin
    }

    pub fn value(&self, x: &[T]) -> T {
        self.psi.value(x)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { psi: self.psi.scaled(c), nonzero_at_origin: self.nonzero_at_origin && c != T::zero() }
    }
}

fn norm<T: Real>(y: &[T]) -> T {
    y.iter().map(|&v| v * v).sum::<T>().sqrt()
}

fn r2<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

/// `sum_c w_c psi(x_c) K(x_c, y)` over the domain sample (`n = 3`).
pub fn volume_potential<T: Real>(sample: &DomainSample<T>, psi: &Density<T>, y: &[T]) -> Result<T> {
    let n = sample.dim();
    if n != 3 {
        return Err(Error::InvalidArgument(format!("volume potentials are evaluated for n = 3, got {n}")));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let dist = norm(y);
    if !(dist > sample.radius()) {
        return Err(Error::TooClose {
            distance: dist.to_f64().unwrap_or(0.0),
            required: sample.radius().to_f64().unwrap_or(0.0),
        });
    }
    Ok(sample.integrate(|x| psi.value(x) * kernel_r2(r2(x, y), n)))
}

/// Builds the domain sample and evaluates the volume potential.
pub fn volume_potential_on_grid<T: Real>(
    f: &RealPolynomial<T>,
    psi: &Density<T>,
    y: &[T],
    grid: &GridSpec<T>,
) -> Result<T> {
    let sample = DomainSample::new(f, grid, QuadratureRule::default())?;
    volume_potential(&sample, psi, y)
}

/// `sum_facets sign * g(c) * measure / |grad F(c)|`.
pub fn surface_integral<T, G>(mesh: &LevelSetMesh<T>, orientation: Orientation, g: G) -> Result<T>
where
    T: Real,
    G: Fn(&[T]) -> T,
{
    let n = mesh.n;
    let mut parts = Vec::with_capacity(mesh.components.len());
    for c in &mesh.components {
        let mut terms = Vec::with_capacity(c.facets.len());
        for f in &c.facets {
            if !(f.grad_norm > T::zero()) {
                return Err(Error::Irregular(format!("zero gradient at {:?}", f.centroid)));
            }
            terms.push(g(&f.centroid[..n]) * f.measure / f.grad_norm);
        }
        let sign = match orientation {
            Orientation::Natural => T::one(),
            Orientation::Arnold => {
                if c.orientation_sign == 0 {
                    return Err(Error::InvalidArgument("mesh has no Arnold orientation".into()));
                }
                T::from_i8(c.orientation_sign).unwrap()
            }
        };
        parts.push(sign * pairwise_sum(&terms));
    }
    Ok(pairwise_sum(&parts))
}

fn check_outside_mesh<T: Real>(mesh: &LevelSetMesh<T>, y: &[T]) -> Result<()> {
    if y.len() != mesh.n {
        return Err(Error::DimensionMismatch { expected: mesh.n, got: y.len() });
    }
    if mesh.n < 3 {
        return Err(Error::InvalidArgument(format!("the Newton kernel needs n >= 3, got {}", mesh.n)));
    }
    let hull = mesh.components.iter().map(|c| c.max_radius()).fold(T::zero(), T::max);
    let d = norm(y);
    if !(d > hull) {
        return Err(Error::TooClose { distance: d.to_f64().unwrap_or(0.0), required: hull.to_f64().unwrap_or(0.0) });
    }
    Ok(())
}

/// Single-layer potential of the Arnold cycle with the standard charge
/// `psi dS / |grad F|`.
pub fn surface_charge_potential<T: Real>(mesh: &LevelSetMesh<T>, psi: &Density<T>, y: &[T]) -> Result<T> {
    check_outside_mesh(mesh, y)?;
    let n = mesh.n;
    surface_integral(mesh, Orientation::Arnold, |c| psi.value(c) * kernel_r2(r2(c, y), n))
}

/// `dI(y)/dl_i = -int_{dD} e_i psi K(., y) dS / |grad F|`, with `dD`
/// the boundary of the domain `{F <= 0}` (every component with its
/// natural orientation). `e` is the basis monomial of the parameter.
pub fn surface_derivative<T: Real>(
    mesh: &LevelSetMesh<T>,
    e: &RealPolynomial<T>,
    psi: &Density<T>,
    y: &[T],
) -> Result<T> {
    check_outside_mesh(mesh, y)?;
    let n = mesh.n;
    Ok(-surface_integral(mesh, Orientation::Natural, |c| e.value(c) * psi.value(c) * kernel_r2(r2(c, y), n))?)
}

/// Gelfand-Leray derivative of the volume potential in the parameter with
/// 0-based index `i`, on the mesh of `F(., l)`.
pub fn potential_lambda_derivative<T: Real>(
    deformation: &VersalDeformation,
    i: usize,
    psi: &Density<T>,
    y: &[T],
    mesh: &LevelSetMesh<T>,
) -> Result<T> {
    let e = deformation.basis_function::<T>(i)?;
    surface_derivative(mesh, &e, psi, y)
}

/// Moments `m_alpha = int_D x^alpha psi dx`, `|alpha| <= L`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<T> {
    pub n: usize,
    pub order: u32,
    pub indices: Vec<ExponentVector>,
    pub values: Vec<T>,
    /// Largest `|x|` over the domain; the multipole series needs `|y| > 2 extent`.
    pub extent: T,
}

#[derive(Serialize)]
struct MomentEntry {
    alpha: Vec<u32>,
    value: Float,
}

#[derive(Serialize)]
struct MomentsJson {
    order: u32,
    entries: Vec<MomentEntry>,
}

impl<T: Real> MomentVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, alpha: &[u32]) -> Option<T> {
        self.indices.iter().position(|a| a.exps() == alpha).map(|i| self.values[i])
    }

    /// `{order, entries: [{alpha, value}]}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = MomentsJson {
            order: self.order,
            entries: self
                .indices
                .iter()
                .zip(&self.values)
                .map(|(a, &v)| MomentEntry { alpha: a.exps().to_vec(), value: Float(v.to_f64().unwrap_or(f64::NAN)) })
                .collect(),
        };
        serde_json::to_value(doc).expect("moments serialize")
    }

    pub fn to_json_string(&self) -> String {
        let doc = MomentsJson {
            order: self.order,
            entries: self
                .indices
                .iter()
                .zip(&self.values)
                .map(|(a, &v)| MomentEntry { alpha: a.exps().to_vec(), value: Float(v.to_f64().unwrap_or(f64::NAN)) })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("moments serialize")
    }
}

fn monomial_value<T: Real>(alpha: &ExponentVector, x: &[T]) -> T {
    alpha.exps().iter().zip(x).fold(T::one(), |acc, (&k, &v)| if k == 0 { acc } else { acc * v.powi(k as i32) })
}

/// Quadrature moments over the domain sample.
pub fn moments<T: Real>(sample: &DomainSample<T>, psi: &Density<T>, order: u32) -> MomentVector<T> {
    let n = sample.dim();
    let indices = moment_indices(n, order);
    let values = indices.iter().map(|a| sample.integrate(|x| monomial_value(a, x) * psi.value(x))).collect();
    MomentVector { n, order, indices, values, extent: sample.extent() }
}

/// Derivatives of the moments in one parameter by the surface formula:
/// `-int_{dD} x^alpha psi e dS / |grad F|`.
pub fn moment_surface_derivative<T: Real>(
    mesh: &LevelSetMesh<T>,
    e: &RealPolynomial<T>,
    psi: &Density<T>,
    order: u32,
) -> Result<Vec<T>> {
    moment_indices(mesh.n, order)
        .iter()
        .map(|a| {
            Ok(-surface_integral(mesh, Orientation::Natural, |c| monomial_value(a, c) * psi.value(c) * e.value(c))?)
        })
        .collect()
}

/// Truncated multipole series `sum_{|alpha| <= L} T_alpha(y) m_alpha`.
pub fn multipole_eval<T: Real>(m: &MomentVector<T>, y: &[T]) -> Result<T> {
    if y.len() != m.n {
        return Err(Error::DimensionMismatch { expected: m.n, got: y.len() });
    }
    let d = norm(y);
    let required = T::lit(2.0) * m.extent;
    if !(d > required) {
        return Err(Error::TooClose {
            distance: d.to_f64().unwrap_or(0.0),
            required: required.to_f64().unwrap_or(0.0),
        });
    }
    let coeffs = multipole_coefficients(y, m.order)?;
    let terms: Vec<T> = coeffs.iter().zip(&m.values).map(|(&t, &v)| t * v).collect();
    Ok(pairwise_sum(&terms))
}

/// Evaluation points `y` with their potential values.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSamples<T> {
    pub points: Vec<Vec<T>>,
    pub values: Vec<T>,
}

impl<T: Real> PotentialSamples<T> {
    /// CSV with header `y1,...,yn,I`.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |p| p.len());
        let mut out = String::new();
        let header: Vec<String> = (1..=n).map(|i| format!("y{i}")).chain(std::iter::once("I".to_string())).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for (p, v) in self.points.iter().zip(&self.values) {
            let row: Vec<String> =
                p.iter().chain(std::iter::once(v)).map(|x| fmt_f64(x.to_f64().unwrap_or(f64::NAN))).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// `count` seeded uniform points on the sphere of the given radius.
pub fn evaluation_sphere<T: Real>(n: usize, radius: T, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len < 1e-12 {
            continue;
        }
        out.push(g.iter().map(|&v| radius * T::lit(v / len)).collect());
    }
    out
}

/// Volume potential at every point.
pub fn sample_volume_potential<T: Real>(
    sample: &DomainSample<T>,
    psi: &Density<T>,
    points: &[Vec<T>],
) -> Result<PotentialSamples<T>> {
    let values = points.iter().map(|y| volume_potential(sample, psi, y)).collect::<Result<Vec<T>>>()?;
    Ok(PotentialSamples { points: points.to_vec(), values })
}

/// Surface-charge potential at every point.
pub fn sample_surface_potential<T: Real>(
    mesh: &LevelSetMesh<T>,
    psi: &Density<T>,
    points: &[Vec<T>],
) -> Result<PotentialSamples<T>> {
    let values = points.iter().map(|y| surface_charge_potential(mesh, psi, y)).collect::<Result<Vec<T>>>()?;
    Ok(PotentialSamples { points: points.to_vec(), values })
}

/// Exact rational parameters as floats.
pub fn lambda_to_real<T: Real>(lambda: &[Rational]) -> Vec<T> {
    lambda.iter().map(to_real::<T, Rational>).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;
    use crate::geometry::{arnold_cycle, extract_level_set};
    use std::f64::consts::PI;

    fn real(s: &str, n: usize) -> RealPolynomial<f64> {
        parse_polynomial(s, n).unwrap().to_real()
    }

    fn shell() -> RealPolynomial<f64> {
        let p = parse_polynomial("x1^2 + x2^2 + x3^2 - 1", 3).unwrap();
        let q = parse_polynomial("x1^2 + x2^2 + x3^2 - 4", 3).unwrap();
        (&p * &q).to_real()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn small_ball_potential() {
        let g = GridSpec::new(3, 1.0, 1.0 / 64.0).unwrap();
        let psi = Density::one(3);
        let v = volume_potential_on_grid(&real("x1^2 + x2^2 + x3^2 - 0.25", 3), &psi, &[2.0, 0.0, 0.0], &g).unwrap();
        assert!(rel(v, PI / 12.0) < 0.01, "{v}");
        let empty = volume_potential_on_grid(&real("x1^2 + x2^2 + x3^2 + 1", 3), &psi, &[2.0, 0.0, 0.0], &g).unwrap();
        assert_eq!(empty, 0.0);
    }

    #[test]
    fn shell_potential() {
        let g = GridSpec::new(3, 2.5, 2.5 / 64.0).unwrap();
        let v = volume_potential_on_grid(&shell(), &Density::one(3), &[8.0, 0.0, 0.0], &g).unwrap();
        let exact = 4.0 * PI / 3.0 * 7.0 / 8.0;
        assert!(rel(v, exact) < 0.01, "{v} vs {exact}");
    }

    #[test]
    fn rejects_interior_points() {
        let g = GridSpec::new(3, 1.0, 0.1).unwrap();
        let r = volume_potential_on_grid(&real("x1^2 + x2^2 + x3^2 - 0.25", 3), &Density::one(3), &[0.5, 0.0, 0.0], &g);
        assert!(matches!(r, Err(Error::TooClose { .. })));
    }

    #[test]
    fn unit_sphere_single_layer() {
        let g = GridSpec::new(3, 1.5, 1.0 / 32.0).unwrap();
        let mesh = arnold_cycle(&real("x1^2 + x2^2 + x3^2 - 1", 3), &g).unwrap();
        let v = surface_charge_potential(&mesh, &Density::one(3), &[2.0, 0.0, 0.0]).unwrap();
        assert!(rel(v, PI) < 0.01, "{v}");
        let z = surface_charge_potential(&mesh, &Density::constant(3, 0.0), &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn nested_single_layers_use_arnold_signs() {
        let g = GridSpec::new(3, 2.5, 2.5 / 64.0).unwrap();
        let mesh = arnold_cycle(&shell(), &g).unwrap();
        // |grad F| = 6 on r = 1 and 12 on r = 2; each sphere contributes
        // (area / |grad F|) / |y|.
        let inner = 4.0 * PI / 6.0 / 8.0;
        let outer = 16.0 * PI / 12.0 / 8.0;
        let v = surface_charge_potential(&mesh, &Density::one(3), &[8.0, 0.0, 0.0]).unwrap();
        assert!(rel(v, outer - inner) < 0.01, "{v}");
    }

    #[test]
    fn morse_derivative_closed_form() {
        let germ = crate::algebra::SingularityGerm::fermat(3, 2).unwrap();
        let def = VersalDeformation::new(germ).unwrap();
        let f = def.at(&[-1.0]).unwrap();
        let g = GridSpec::new(3, 1.5, 1.5 / 64.0).unwrap();
        let mesh = extract_level_set(&f, &g).unwrap();
        let d = potential_lambda_derivative(&def, 0, &Density::one(3), &[2.0, 0.0, 0.0], &mesh).unwrap();
        assert!(rel(d, -PI) < 0.01, "{d}");
        assert!(potential_lambda_derivative(&def, 1, &Density::one(3), &[2.0, 0.0, 0.0], &mesh).is_err());
    }

    #[test]
    fn ball_moments() {
        let g = GridSpec::new(3, 1.5, 1.0 / 64.0).unwrap();
        let s = DomainSample::new(&real("x1^2 + x2^2 + x3^2 - 1", 3), &g, QuadratureRule::default()).unwrap();
        let m = moments(&s, &Density::one(3), 2);
        assert_eq!(m.len(), 10);
        assert!(rel(m.get(&[0, 0, 0]).unwrap(), 4.0 * PI / 3.0) < 0.01);
        assert!(m.get(&[1, 0, 0]).unwrap().abs() < 1e-12);
        assert!(rel(m.get(&[2, 0, 0]).unwrap(), 4.0 * PI / 15.0) < 0.01);
        let json = m.to_json_value();
        assert_eq!(json["order"], 2);
        assert_eq!(json["entries"].as_array().unwrap().len(), 10);
    }

    #[test]
    fn multipole_of_centered_ball_is_exact_at_order_zero() {
        let g = GridSpec::new(3, 1.5, 1.0 / 32.0).unwrap();
        let s = DomainSample::new(&real("x1^2 + x2^2 + x3^2 - 1", 3), &g, QuadratureRule::default()).unwrap();
        let psi = Density::one(3);
        let m0 = moments(&s, &psi, 0);
        let y = [4.0, 0.0, 0.0];
        let approx = multipole_eval(&m0, &y).unwrap();
        assert!(rel(approx, m0.values[0] / 4.0) < 1e-14);
        assert!(rel(approx, PI / 3.0) < 0.01);
        let doubled = moments(&s, &psi.scaled(2.0), 0);
        assert!(rel(multipole_eval(&doubled, &y).unwrap(), 2.0 * approx) < 1e-14);
        assert!(matches!(multipole_eval(&m0, &[1.5, 0.0, 0.0]), Err(Error::TooClose { .. })));
    }

    #[test]
    fn csv_layout() {
        let s = PotentialSamples { points: vec![vec![1.0, 2.0, 3.0]], values: vec![0.5] };
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("y1,y2,y3,I"));
        assert_eq!(
            lines.next(),
            Some("1.0000000000000000e0,2.0000000000000000e0,3.0000000000000000e0,5.0000000000000000e-1")
        );
    }

    #[test]
    fn sphere_points_are_on_the_sphere_and_seeded() {
        let a: Vec<Vec<f64>> = evaluation_sphere(3, 4.0, 5, 0);
        let b: Vec<Vec<f64>> = evaluation_sphere(3, 4.0, 5, 0);
        assert_eq!(a, b);
        for p in &a {
            assert!((norm(p) - 4.0).abs() < 1e-12);
        }
    }
}
