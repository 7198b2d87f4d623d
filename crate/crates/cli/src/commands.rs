use serde::Serialize;
use vcycle::algebra::{germ_from_spec, parse_polynomial, RealPolynomial, VersalDeformation};
use vcycle::distinguish::{
    default_moment_order, injectivity_certificate, moment_jacobian, potential_jacobian, recover_parameters,
    separation_experiment, ForwardModel, InjectivityCertificate, JacobianMatrix, JacobianMethod, ModelSetup,
    MomentModel, PotentialModel, RecoveryOptions, RecoveryResult, SeparationOptions, SeparationReport,
};
use vcycle::geometry::{arnold_cycle, check_regularity, to_obj, GridSpec, LevelSetMesh, RegularityReport};
use vcycle::io::{ser_f64, ser_f64_vec};
use vcycle::potential::{
    evaluation_sphere, moments, sample_surface_potential, sample_volume_potential, Density, DomainSample,
    QuadratureRule,
};
use vcycle::reduction::{
    certificate_over, multiply_by_deformation_power, CohomologyClass, RelationSpan, SurjectivityCertificate,
    VolumeFormGerm,
};
use vcycle::scalar::rational_from_f64;
use vcycle::Rational;

use crate::config::RunConfig;
use crate::manifest::Outputs;
use crate::CliError;

/// Process exit status of a finished command.
pub type Status = u8;

pub const OK: Status = 0;
pub const PRECONDITION: Status = 2;

fn deformation(cfg: &RunConfig) -> Result<VersalDeformation, CliError> {
    let germ = germ_from_spec(&cfg.germ, cfg.n)?;
    Ok(VersalDeformation::new(germ)?)
}

/// Radii `(a, b)` when `germ` names the shell preset `shell` or `shell:a,b`.
fn shell_radii(cfg: &RunConfig) -> Result<Option<(f64, f64)>, CliError> {
    let spec = cfg.germ.trim();
    let rest = match spec.strip_prefix("shell") {
        Some(r) => r,
        None => return Ok(None),
    };
    let (a, b) = match rest.strip_prefix(':') {
        None if rest.is_empty() => (1.0, 2.0),
        Some(list) => {
            let v: Vec<f64> = list
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad shell radii in `{spec}`")))?;
            match v[..] {
                [a, b] if 0.0 < a && a < b => (a, b),
                _ => return Err(CliError::Usage(format!("shell needs radii 0 < a < b, got `{spec}`"))),
            }
        }
        None => return Ok(None),
    };
    if cfg.n != 3 {
        return Err(CliError::Usage("the shell preset is three-dimensional".into()));
    }
    if cfg.grid.radius <= b {
        return Err(CliError::Usage(format!("grid.radius must exceed the outer shell radius {b}")));
    }
    Ok(Some((a, b)))
}

/// The function whose sublevel set is the domain, and the parameter count
/// used for the default moment order. Presets that are not germs ignore `lambda`.
fn domain_function(cfg: &RunConfig) -> Result<(RealPolynomial<f64>, usize), CliError> {
    if let Some((a, b)) = shell_radii(cfg)? {
        let sq = |r: f64| parse_polynomial(&format!("x1^2 + x2^2 + x3^2 - {}", r * r), 3);
        let f = &sq(a)? * &sq(b)?;
        return Ok((f.to_real(), 1));
    }
    let def = deformation(cfg)?;
    check_lambda(cfg, &def)?;
    Ok((def.at(&cfg.lambda)?, def.num_params()))
}

fn check_lambda(cfg: &RunConfig, def: &VersalDeformation) -> Result<(), CliError> {
    if cfg.lambda.len() != def.num_params() {
        return Err(CliError::Usage(format!(
            "lambda has {} entries but the germ has mu = {} parameters",
            cfg.lambda.len(),
            def.num_params()
        )));
    }
    Ok(())
}

fn grid(cfg: &RunConfig) -> Result<GridSpec<f64>, CliError> {
    Ok(GridSpec::new(cfg.n, cfg.grid.radius, cfg.h())?)
}

fn density(cfg: &RunConfig) -> Result<Density<f64>, CliError> {
    let p = parse_polynomial(&cfg.psi, cfg.n)?;
    if p.constant_term() == Rational::from_integer(0.into()) {
        eprintln!("warning: density vanishes at the origin");
    }
    Ok(Density::polynomial(&p, false)?)
}

fn rule(cfg: &RunConfig) -> Result<QuadratureRule, CliError> {
    match cfg.quadrature.as_str() {
        "fractional" => Ok(QuadratureRule::Fractional),
        "midpoint" => Ok(QuadratureRule::Midpoint),
        other => Err(CliError::Usage(format!("unknown quadrature rule `{other}`"))),
    }
}

fn method(cfg: &RunConfig) -> Result<JacobianMethod, CliError> {
    match cfg.jacobian.method.as_str() {
        "surface" => Ok(JacobianMethod::Surface),
        "finite_difference" => Ok(JacobianMethod::FiniteDifference { delta: cfg.jacobian.delta }),
        other => Err(CliError::Usage(format!("unknown jacobian method `{other}`"))),
    }
}

fn setup(cfg: &RunConfig, def: &VersalDeformation) -> Result<ModelSetup<f64>, CliError> {
    Ok(ModelSetup::new(def.clone(), grid(cfg)?)
        .with_density(density(cfg)?)
        .with_rule(rule(cfg)?)
        .with_regularity_tol(cfg.thresholds.regularity)
        .with_method(method(cfg)?))
}

fn moment_order(cfg: &RunConfig, mu: usize) -> u32 {
    cfg.moment_order.unwrap_or_else(|| default_moment_order(cfg.n, mu, 3))
}

fn eval_points(cfg: &RunConfig) -> Vec<Vec<f64>> {
    evaluation_sphere(cfg.n, cfg.sphere_radius(), cfg.eval.num_points, cfg.eval.seed)
}

fn require_potential_dim(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.n != 3 {
        return Err(CliError::Usage(format!("potentials are evaluated for n = 3, got n = {}", cfg.n)));
    }
    Ok(())
}

#[derive(Serialize)]
struct BasisJson {
    germ: String,
    n: usize,
    mu: usize,
    basis: Vec<String>,
    deformation: String,
}

pub fn algebra(cfg: &RunConfig) -> Result<Status, CliError> {
    let def = deformation(cfg)?;
    let mut out = Outputs::new(&cfg.output_dir)?;
    out.write_json(
        "basis.json",
        &BasisJson {
            germ: def.germ().poly().to_string(),
            n: cfg.n,
            mu: def.num_params(),
            basis: def.algebra().rendered(),
            deformation: def.render(),
        },
    )?;
    out.finish("algebra", cfg)?;
    Ok(OK)
}

#[derive(Serialize)]
struct ReductionJson {
    form: String,
    k: u32,
    fermat_degree: u32,
    maxdeg: u32,
    level: String,
    mu: usize,
    normal_form: CohomologyClass,
    normal_form_rendered: String,
    chain_length: usize,
    certificates: Vec<SurjectivityCertificate>,
}

fn exact_lambda(cfg: &RunConfig) -> Result<Vec<Rational>, CliError> {
    cfg.lambda
        .iter()
        .map(|&v| rational_from_f64(v).ok_or_else(|| CliError::Usage(format!("lambda entry {v} is not finite"))))
        .collect()
}

pub fn reduce(cfg: &RunConfig) -> Result<Status, CliError> {
    let def = deformation(cfg)?;
    check_lambda(cfg, &def)?;
    let big_n =
        def.germ().fermat_degree().ok_or_else(|| CliError::Usage("reduce needs a Fermat germ (fermat:N)".into()))?;
    let lambda = exact_lambda(cfg)?;
    let maxdeg = cfg.reduce.maxdeg.unwrap_or_else(|| vcycle::reduction::default_maxdeg(big_n, cfg.n));
    let span = RelationSpan::for_constant_parameter(big_n, cfg.n, maxdeg, &lambda[lambda.len() - 1])?;
    let form = VolumeFormGerm::new(big_n, parse_polynomial(&cfg.reduce.form, cfg.n)?)?;
    let multiplied = multiply_by_deformation_power(&form, &def, &lambda, cfg.reduce.k)?;
    let reduction = span.reduce(&multiplied)?;
    let certificates = span.basis().iter().map(|e| certificate_over(&span, e)).collect::<vcycle::Result<Vec<_>>>()?;
    let mut out = Outputs::new(&cfg.output_dir)?;
    out.write_json(
        "reduction.json",
        &ReductionJson {
            form: cfg.reduce.form.clone(),
            k: cfg.reduce.k,
            fermat_degree: big_n,
            maxdeg,
            level: span.level().to_string(),
            mu: span.mu(),
            normal_form_rendered: reduction.class.to_polynomial(cfg.n).to_string(),
            normal_form: reduction.class,
            chain_length: reduction.steps,
            certificates,
        },
    )?;
    out.finish("reduce", cfg)?;
    Ok(OK)
}

#[derive(Serialize)]
struct ComponentJson {
    depth: usize,
    orientation_sign: i8,
    vertices: usize,
    facets: usize,
    #[serde(serialize_with = "ser_f64")]
    measure: f64,
    #[serde(serialize_with = "ser_f64")]
    min_grad: f64,
    #[serde(serialize_with = "ser_f64")]
    max_radius: f64,
}

#[derive(Serialize)]
struct LevelSetJson {
    #[serde(serialize_with = "ser_f64_vec")]
    lambda: Vec<f64>,
    regularity: RegularityReport,
    clipped_pieces: usize,
    components: Vec<ComponentJson>,
}

fn levelset_json(cfg: &RunConfig, mesh: &LevelSetMesh<f64>, report: RegularityReport) -> LevelSetJson {
    LevelSetJson {
        lambda: cfg.lambda.clone(),
        regularity: report,
        clipped_pieces: mesh.clipped_pieces,
        components: mesh
            .components
            .iter()
            .map(|c| ComponentJson {
                depth: c.depth,
                orientation_sign: c.orientation_sign,
                vertices: c.vertices.len(),
                facets: c.facets.len(),
                measure: c.measure(),
                min_grad: c.min_grad(),
                max_radius: c.max_radius(),
            })
            .collect(),
    }
}

/// Extracts and orients the level set of `f` together with its regularity report.
fn oriented_mesh(cfg: &RunConfig, f: &RealPolynomial<f64>) -> Result<(LevelSetMesh<f64>, RegularityReport), CliError> {
    let mesh = arnold_cycle(f, &grid(cfg)?)?;
    let report = check_regularity(&mesh, cfg.thresholds.regularity);
    Ok((mesh, report))
}

pub fn levelset(cfg: &RunConfig) -> Result<Status, CliError> {
    let (f, _) = domain_function(cfg)?;
    let (mesh, report) = oriented_mesh(cfg, &f)?;
    let regular = report.is_regular();
    let mut out = Outputs::new(&cfg.output_dir)?;
    out.write("mesh.obj", to_obj(&mesh).as_bytes())?;
    out.write_json("levelset.json", &levelset_json(cfg, &mesh, report.clone()))?;
    out.finish("levelset", cfg)?;
    if !regular {
        eprintln!("level set is not regular: {}", report.reason.unwrap_or_default());
        return Ok(PRECONDITION);
    }
    Ok(OK)
}

pub fn potential(cfg: &RunConfig) -> Result<Status, CliError> {
    require_potential_dim(cfg)?;
    let (f, mu) = domain_function(cfg)?;
    let psi = density(cfg)?;
    let g = grid(cfg)?;
    let sample = DomainSample::new(&f, &g, rule(cfg)?)?;
    if sample.is_empty() {
        eprintln!("warning: empty domain, potentials vanish");
    }
    let points = eval_points(cfg);
    let volume = sample_volume_potential(&sample, &psi, &points)?;
    let m = moments(&sample, &psi, moment_order(cfg, mu));
    let (mesh, report) = oriented_mesh(cfg, &f)?;

    let mut out = Outputs::new(&cfg.output_dir)?;
    out.write("potential.csv", volume.to_csv().as_bytes())?;
    out.write("mesh.obj", to_obj(&mesh).as_bytes())?;
    out.write("moments.json", format!("{}\n", m.to_json_string()).as_bytes())?;
    let status = if report.is_regular() {
        let surface = sample_surface_potential(&mesh, &psi, &points)?;
        out.write("potential_surface.csv", surface.to_csv().as_bytes())?;
        OK
    } else {
        eprintln!("level set is not regular, surface-charge potential skipped: {}", report.reason.unwrap_or_default());
        PRECONDITION
    };
    out.finish("potential", cfg)?;
    Ok(status)
}

#[derive(Serialize)]
struct JacobianJson<'a> {
    #[serde(serialize_with = "ser_f64_vec")]
    lambda: Vec<f64>,
    mu: usize,
    #[serde(rename = "L")]
    order: Option<u32>,
    observable: &'a str,
    method: &'a str,
    jacobian: JacobianMatrix,
    certificate: InjectivityCertificate,
}

pub fn jacobian(cfg: &RunConfig) -> Result<Status, CliError> {
    let def = deformation(cfg)?;
    check_lambda(cfg, &def)?;
    let mu = def.num_params();
    let s = setup(cfg, &def)?;
    let (order, j) = match cfg.jacobian.observable.as_str() {
        "moments" => {
            let order = moment_order(cfg, mu);
            (Some(order), moment_jacobian(&MomentModel::new(s, order), &cfg.lambda)?)
        }
        "potential" => {
            require_potential_dim(cfg)?;
            (None, potential_jacobian(&PotentialModel::new(s, eval_points(cfg)), &cfg.lambda)?)
        }
        other => return Err(CliError::Usage(format!("unknown observable `{other}`"))),
    };
    let certificate = injectivity_certificate(&j, cfg.thresholds.rank);
    let mut out = Outputs::new(&cfg.output_dir)?;
    out.write_json(
        "jacobian.json",
        &JacobianJson {
            lambda: cfg.lambda.clone(),
            mu,
            order,
            observable: &cfg.jacobian.observable,
            method: &cfg.jacobian.method,
            jacobian: j,
            certificate,
        },
    )?;
    out.finish("jacobian", cfg)?;
    Ok(OK)
}

#[derive(Serialize)]
struct RecoveryJson {
    #[serde(serialize_with = "ser_f64_vec")]
    lambda_true: Vec<f64>,
    #[serde(serialize_with = "ser_f64_vec")]
    lambda0: Vec<f64>,
    #[serde(rename = "L")]
    order: u32,
    #[serde(flatten)]
    result: RecoveryResult,
    #[serde(serialize_with = "ser_f64")]
    error: f64,
}

pub fn recover(cfg: &RunConfig) -> Result<Status, CliError> {
    let def = deformation(cfg)?;
    check_lambda(cfg, &def)?;
    let mu = def.num_params();
    let order = moment_order(cfg, mu);
    let model = MomentModel::new(setup(cfg, &def)?, order);
    let lambda0 = match cfg.recover.lambda0.len() {
        0 => {
            let d = &evaluation_sphere(mu, cfg.recover.offset, 1, cfg.eval.seed)[0];
            cfg.lambda.iter().zip(d).map(|(a, b)| a + b).collect()
        }
        k if k == mu => cfg.recover.lambda0.clone(),
        k => return Err(CliError::Usage(format!("recover.lambda0 has {k} entries, expected {mu}"))),
    };
    let target = model.evaluate(&cfg.lambda)?;
    let opts = RecoveryOptions {
        max_iterations: cfg.recover.max_iterations,
        residual_tol: cfg.recover.residual_tol,
        ..Default::default()
    };
    let result = recover_parameters(&model, &target, &lambda0, &opts)?;
    let error = result.lambda_hat.iter().zip(&cfg.lambda).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let converged = result.converged;
    let mut out = Outputs::new(&cfg.output_dir)?;
    out.write_json("recovery.json", &RecoveryJson { lambda_true: cfg.lambda.clone(), lambda0, order, result, error })?;
    out.finish("recover", cfg)?;
    Ok(if converged { OK } else { PRECONDITION })
}

#[derive(Serialize)]
struct CertificateJson {
    #[serde(serialize_with = "ser_f64_vec")]
    lambda: Vec<f64>,
    /// Only when there is no certificate, which carries its own `mu`.
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<usize>,
    #[serde(rename = "L")]
    order: u32,
    seed: u64,
    #[serde(flatten)]
    certificate: Option<InjectivityCertificate>,
    /// Set when the run stopped before the certificate.
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
    levelset: Option<LevelSetJson>,
}

#[derive(Serialize)]
struct SeparationJson {
    observable: &'static str,
    #[serde(serialize_with = "ser_f64")]
    sphere_radius: f64,
    #[serde(flatten)]
    report: SeparationReport,
}

pub fn verify(cfg: &RunConfig) -> Result<Status, CliError> {
    let def = deformation(cfg)?;
    check_lambda(cfg, &def)?;
    let mu = def.num_params();
    let order = moment_order(cfg, mu);
    let s = setup(cfg, &def)?;
    let mut out = Outputs::new(&cfg.output_dir)?;
    let fail = |out: &mut Outputs, reason: String, levelset: Option<LevelSetJson>| -> Result<Status, CliError> {
        eprintln!("verify: {reason}");
        out.write_json(
            "certificate.json",
            &CertificateJson {
                lambda: cfg.lambda.clone(),
                mu: Some(mu),
                order,
                seed: cfg.eval.seed,
                certificate: None,
                failure: Some(reason),
                levelset,
            },
        )?;
        Ok(PRECONDITION)
    };

    let (mesh, report) = oriented_mesh(cfg, &def.at(&cfg.lambda)?)?;
    let summary = levelset_json(cfg, &mesh, report.clone());
    if mesh.components.is_empty() && !mesh.clipped() {
        let st = fail(&mut out, "empty domain".into(), Some(summary))?;
        out.finish("verify", cfg)?;
        return Ok(st);
    }
    if !report.is_regular() {
        let st = fail(&mut out, format!("irregular level set: {}", report.reason.unwrap_or_default()), Some(summary))?;
        out.finish("verify", cfg)?;
        return Ok(st);
    }

    let moment_model = MomentModel::new(s.clone(), order);
    let j = match moment_jacobian(&moment_model, &cfg.lambda) {
        Ok(j) => j,
        Err(e) if e.class() == vcycle::ErrorClass::Precondition => {
            let st = fail(&mut out, e.to_string(), Some(summary))?;
            out.finish("verify", cfg)?;
            return Ok(st);
        }
        Err(e) => return Err(e.into()),
    };
    let certificate = injectivity_certificate(&j, cfg.thresholds.rank);
    let verdict = certificate.verdict;
    out.write_json(
        "certificate.json",
        &CertificateJson {
            lambda: cfg.lambda.clone(),
            mu: None,
            order,
            seed: cfg.eval.seed,
            certificate: Some(certificate),
            failure: None,
            levelset: Some(summary),
        },
    )?;

    let opts = SeparationOptions {
        radius: cfg.separation.radius,
        num_pairs: cfg.separation.pairs,
        seed: cfg.eval.seed,
        factor: cfg.separation.factor,
        ..Default::default()
    };
    let report = if cfg.n == 3 {
        let points = eval_points(cfg);
        let model = PotentialModel::new(s.with_method(JacobianMethod::Surface), points.clone());
        SeparationJson {
            observable: "potential",
            sphere_radius: cfg.sphere_radius(),
            report: separation_experiment(&model, &cfg.lambda, points, &opts)?,
        }
    } else {
        SeparationJson {
            observable: "moments",
            sphere_radius: cfg.sphere_radius(),
            report: separation_experiment(&moment_model, &cfg.lambda, vec![], &opts)?,
        }
    };
    let positive = report.report.all_positive;
    out.write_json("separation.json", &report)?;
    out.finish("verify", cfg)?;
    eprintln!("verify: verdict {verdict}, all separations positive {positive}");
    Ok(if verdict && positive { OK } else { PRECONDITION })
}
