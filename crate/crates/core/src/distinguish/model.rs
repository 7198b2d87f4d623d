use rayon::prelude::*;
use serde::Serialize;

use super::svd::{singular_values, Matrix};
use crate::algebra::VersalDeformation;
use crate::error::{Error, Result};
use crate::geometry::{check_regularity, extract_level_set, GridSpec, LevelSetMesh};
use crate::io::{ser_f64_rows, ser_f64_vec};
use crate::potential::{
    moment_indices, moment_surface_derivative, moments, surface_derivative, volume_potential, Density, DomainSample,
    QuadratureRule,
};
use crate::scalar::Real;

/// How derivatives in the parameters are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JacobianMethod {
    /// Gelfand-Leray surface integrals on the level set.
    Surface,
    /// Central differences of the quadrature with step `delta`.
    FiniteDifference { delta: f64 },
}

impl JacobianMethod {
    pub fn finite_difference() -> Self {
        Self::FiniteDifference { delta: 1e-3 }
    }
}

/// Parameter-to-observation map.
pub trait ForwardModel<T: Real>: Sync {
    fn num_params(&self) -> usize;

    fn num_outputs(&self) -> usize;

    fn evaluate(&self, lambda: &[T]) -> Result<Vec<T>>;

    /// `num_outputs x num_params` derivative at `lambda`.
    fn jacobian(&self, lambda: &[T]) -> Result<Matrix<T>>;

    /// Fails when `lambda` is outside the regular set of the model.
    fn check_admissible(&self, lambda: &[T]) -> Result<()> {
        self.evaluate(lambda).map(|_| ())
    }
}

/// Derivative matrix with row labels and singular values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobianMatrix {
    /// Moment multi-indices as `x1^a*x2^b` strings, or `y{j}` sample ids.
    pub rows: Vec<String>,
    pub cols: usize,
    #[serde(serialize_with = "ser_f64_rows")]
    pub entries: Vec<Vec<f64>>,
    /// Descending, of the unscaled matrix.
    #[serde(serialize_with = "ser_f64_vec")]
    pub singular_values: Vec<f64>,
}

impl JacobianMatrix {
    pub fn new<T: Real>(rows: Vec<String>, m: &Matrix<T>) -> Self {
        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        Self {
            rows,
            cols: m.cols(),
            entries: m.to_rows().into_iter().map(|r| r.into_iter().map(f).collect()).collect(),
            singular_values: singular_values(m).into_iter().map(f).collect(),
        }
    }

    pub fn matrix(&self) -> Matrix<f64> {
        if self.entries.is_empty() {
            return Matrix::zeros(0, self.cols);
        }
        Matrix::from_rows(&self.entries).expect("rectangular")
    }
}

/// Shared setup of the quadrature-based models.
#[derive(Clone, Debug)]
pub struct ModelSetup<T> {
    pub deformation: VersalDeformation,
    pub psi: Density<T>,
    pub grid: GridSpec<T>,
    pub rule: QuadratureRule,
    pub regularity_tol: T,
    pub method: JacobianMethod,
}

impl<T: Real> ModelSetup<T> {
    pub fn new(deformation: VersalDeformation, grid: GridSpec<T>) -> Self {
        let n = deformation.dim();
        Self {
            deformation,
            psi: Density::one(n),
            grid,
            rule: QuadratureRule::default(),
            regularity_tol: T::lit(1e-6),
            method: JacobianMethod::Surface,
        }
    }

    pub fn with_density(mut self, psi: Density<T>) -> Self {
        self.psi = psi;
        self
    }

    pub fn with_method(mut self, method: JacobianMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_regularity_tol(mut self, tol: T) -> Self {
        self.regularity_tol = tol;
        self
    }

    pub fn num_params(&self) -> usize {
        self.deformation.num_params()
    }

    /// Compact domain sample of `F(., lambda)`; errors on an empty domain.
    pub fn sample(&self, lambda: &[T]) -> Result<DomainSample<T>> {
        let f = self.deformation.at(lambda)?;
        let s = DomainSample::new(&f, &self.grid, self.rule)?;
        if s.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(s)
    }

    /// Level set of `F(., lambda)`, required to be regular.
    pub fn regular_mesh(&self, lambda: &[T]) -> Result<LevelSetMesh<T>> {
        let f = self.deformation.at(lambda)?;
        let mesh = extract_level_set(&f, &self.grid)?;
        let report = check_regularity(&mesh, self.regularity_tol);
        if mesh.components.is_empty() && !mesh.clipped() {
            return Err(Error::EmptyDomain);
        }
        if !report.is_regular() {
            return Err(Error::Irregular(report.reason.unwrap_or_default()));
        }
        Ok(mesh)
    }

    fn shifted(&self, lambda: &[T], i: usize, d: T) -> Vec<T> {
        let mut l = lambda.to_vec();
        l[i] = l[i] + d;
        l
    }

    fn fd_columns<F>(&self, lambda: &[T], delta: f64, eval: F) -> Result<Vec<Vec<T>>>
    where
        F: Fn(&[T]) -> Result<Vec<T>> + Sync,
    {
        let d = T::lit(delta);
        (0..self.num_params())
            .into_par_iter()
            .map(|i| {
                let plus = eval(&self.shifted(lambda, i, d))?;
                let minus = eval(&self.shifted(lambda, i, -d))?;
                Ok(plus.iter().zip(&minus).map(|(&a, &b)| (a - b) / (T::lit(2.0) * d)).collect())
            })
            .collect()
    }
}

/// Harmonic moments `m_alpha`, `|alpha| <= order`, of the compact domain.
#[derive(Clone, Debug)]
pub struct MomentModel<T> {
    pub setup: ModelSetup<T>,
    pub order: u32,
}

impl<T: Real> MomentModel<T> {
    pub fn new(setup: ModelSetup<T>, order: u32) -> Self {
        Self { setup, order }
    }

    pub fn row_labels(&self) -> Vec<String> {
        moment_indices(self.setup.deformation.dim(), self.order).iter().map(|a| a.render()).collect()
    }
}

impl<T: Real> ForwardModel<T> for MomentModel<T> {
    fn num_params(&self) -> usize {
        self.setup.num_params()
    }

    fn num_outputs(&self) -> usize {
        moment_indices(self.setup.deformation.dim(), self.order).len()
    }

    fn evaluate(&self, lambda: &[T]) -> Result<Vec<T>> {
        let s = self.setup.sample(lambda)?;
        Ok(moments(&s, &self.setup.psi, self.order).values)
    }

    fn jacobian(&self, lambda: &[T]) -> Result<Matrix<T>> {
        let columns = match self.setup.method {
            JacobianMethod::Surface => {
                let mesh = self.setup.regular_mesh(lambda)?;
                (0..self.num_params())
                    .into_par_iter()
                    .map(|i| {
                        let e = self.setup.deformation.basis_function::<T>(i)?;
                        moment_surface_derivative(&mesh, &e, &self.setup.psi, self.order)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            JacobianMethod::FiniteDifference { delta } => self.setup.fd_columns(lambda, delta, |l| self.evaluate(l))?,
        };
        Matrix::from_columns(&columns)
    }

    fn check_admissible(&self, lambda: &[T]) -> Result<()> {
        self.setup.regular_mesh(lambda).map(|_| ())
    }
}

/// Volume potential sampled at fixed exterior points (`n = 3`).
#[derive(Clone, Debug)]
pub struct PotentialModel<T> {
    pub setup: ModelSetup<T>,
    pub points: Vec<Vec<T>>,
}

impl<T: Real> PotentialModel<T> {
    pub fn new(setup: ModelSetup<T>, points: Vec<Vec<T>>) -> Self {
        Self { setup, points }
    }

    pub fn row_labels(&self) -> Vec<String> {
        (1..=self.points.len()).map(|j| format!("y{j}")).collect()
    }
}

impl<T: Real> ForwardModel<T> for PotentialModel<T> {
    fn num_params(&self) -> usize {
        self.setup.num_params()
    }

    fn num_outputs(&self) -> usize {
        self.points.len()
    }

    fn evaluate(&self, lambda: &[T]) -> Result<Vec<T>> {
        let s = self.setup.sample(lambda)?;
        self.points.iter().map(|y| volume_potential(&s, &self.setup.psi, y)).collect()
    }

    fn jacobian(&self, lambda: &[T]) -> Result<Matrix<T>> {
        let columns = match self.setup.method {
            JacobianMethod::Surface => {
                let mesh = self.setup.regular_mesh(lambda)?;
                (0..self.num_params())
                    .into_par_iter()
                    .map(|i| {
                        let e = self.setup.deformation.basis_function::<T>(i)?;
                        self.points.iter().map(|y| surface_derivative(&mesh, &e, &self.setup.psi, y)).collect()
                    })
                    .collect::<Result<Vec<Vec<T>>>>()?
            }
            JacobianMethod::FiniteDifference { delta } => self.setup.fd_columns(lambda, delta, |l| self.evaluate(l))?,
        };
        Matrix::from_columns(&columns)
    }

    fn check_admissible(&self, lambda: &[T]) -> Result<()> {
        self.setup.regular_mesh(lambda).map(|_| ())
    }
}

/// `Gamma(k / 2)` for a positive integer `k`.
fn gamma_half(k: u32) -> f64 {
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `int_{|x| <= 1} x^alpha dx`.
pub fn unit_ball_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let n = alpha.len() as u32;
    let deg: u32 = alpha.iter().sum();
    let sphere = 2.0 * alpha.iter().map(|&a| gamma_half(a + 1)).product::<f64>() / gamma_half(deg + n);
    sphere / (deg + n) as f64
}

/// Closed-form moments of the Morse family `F = |x|^2 + l` with a constant
/// density: the ball of radius `sqrt(-l)`.
#[derive(Clone, Debug)]
pub struct BallMomentModel {
    pub n: usize,
    pub order: u32,
    pub density: f64,
}

impl BallMomentModel {
    pub fn new(n: usize, order: u32) -> Self {
        Self { n, order, density: 1.0 }
    }

    fn radius2<T: Real>(lambda: &[T]) -> Result<T> {
        if lambda.len() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: lambda.len() });
        }
        if !(lambda[0] < T::zero()) {
            return Err(Error::EmptyDomain);
        }
        Ok(-lambda[0])
    }
}

impl<T: Real> ForwardModel<T> for BallMomentModel {
    fn num_params(&self) -> usize {
        1
    }

    fn num_outputs(&self) -> usize {
        moment_indices(self.n, self.order).len()
    }

    fn evaluate(&self, lambda: &[T]) -> Result<Vec<T>> {
        let r2 = Self::radius2(lambda)?;
        Ok(moment_indices(self.n, self.order)
            .iter()
            .map(|a| {
                let k = T::from_u32(a.degree() + self.n as u32).unwrap();
                T::lit(self.density * unit_ball_moment(a.exps())) * r2.powf(k / T::lit(2.0))
            })
            .collect())
    }

    fn jacobian(&self, lambda: &[T]) -> Result<Matrix<T>> {
        let r2 = Self::radius2(lambda)?;
        let col: Vec<T> = moment_indices(self.n, self.order)
            .iter()
            .map(|a| {
                let k = T::from_u32(a.degree() + self.n as u32).unwrap();
                -T::lit(self.density * unit_ball_moment(a.exps())) * k / T::lit(2.0)
                    * r2.powf(k / T::lit(2.0) - T::one())
            })
            .collect();
        Matrix::from_columns(&[col])
    }
}

/// Moment Jacobian at `lambda` with labelled rows; needs at least as many
/// moments as parameters.
pub fn moment_jacobian<T: Real>(model: &MomentModel<T>, lambda: &[T]) -> Result<JacobianMatrix> {
    let (rows, cols) = (model.num_outputs(), model.num_params());
    if rows < cols {
        return Err(Error::TooFewRows { rows, cols });
    }
    Ok(JacobianMatrix::new(model.row_labels(), &model.jacobian(lambda)?))
}

/// Potential-sample Jacobian at `lambda`.
pub fn potential_jacobian<T: Real>(model: &PotentialModel<T>, lambda: &[T]) -> Result<JacobianMatrix> {
    let (rows, cols) = (model.num_outputs(), model.num_params());
    if rows < cols {
        return Err(Error::TooFewRows { rows, cols });
    }
    Ok(JacobianMatrix::new(model.row_labels(), &model.jacobian(lambda)?))
}

/// Smallest `L` with `C(L + n, n) >= mu + margin`.
pub fn default_moment_order(n: usize, mu: usize, margin: usize) -> u32 {
    let mut l = 0u32;
    while moment_indices(n, l).len() < mu + margin {
        l += 1;
    }
    l
}
