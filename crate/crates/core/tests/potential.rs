use std::f64::consts::PI;

use vcycle::algebra::{parse_polynomial, RealPolynomial, SingularityGerm, VersalDeformation};
use vcycle::geometry::{arnold_cycle, GridSpec};
use vcycle::potential::{
    evaluation_sphere, moments, multipole_eval, surface_charge_potential, volume_potential, Density, DomainSample,
    QuadratureRule,
};

fn real(s: &str) -> RealPolynomial<f64> {
    parse_polynomial(s, 3).unwrap().to_real()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn directions() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                let v: [f64; 3] = [sx * 0.6, sy * 0.48, sz * 0.64];
                let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                out.push([v[0] / r, v[1] / r, v[2] / r]);
            }
        }
    }
    out
}

#[test]
fn ball_potential_decays_like_a_point_mass() {
    let def = VersalDeformation::new(SingularityGerm::fermat(3, 2).unwrap()).unwrap();
    let f = def.at(&[-1.0]).unwrap();
    let big_r = 1.5;
    let g = GridSpec::new(3, big_r, big_r / 64.0).unwrap();
    let sample = DomainSample::new(&f, &g, QuadratureRule::Fractional).unwrap();
    let psi = Density::one(3);
    let mut products = Vec::new();
    for scale in [2.0, 4.0, 8.0] {
        for d in directions() {
            let y = [d[0] * scale * big_r, d[1] * scale * big_r, d[2] * scale * big_r];
            products.push(volume_potential(&sample, &psi, &y).unwrap() * scale * big_r);
        }
    }
    let lo = products.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((hi - lo) / lo < 0.01, "spread {lo}..{hi}");
    assert!(rel(hi, 4.0 * PI / 3.0) < 0.01, "{hi}");
}

#[test]
fn midpoint_rule_also_obeys_the_ball_law() {
    let f = real("x1^2 + x2^2 + x3^2 - 1");
    let g = GridSpec::new(3, 1.5, 1.5 / 64.0).unwrap();
    let sample = DomainSample::new(&f, &g, QuadratureRule::Midpoint).unwrap();
    let v = volume_potential(&sample, &Density::one(3), &[0.0, 0.0, 6.0]).unwrap();
    assert!(rel(v * 6.0, 4.0 * PI / 3.0) < 0.01, "{v}");
}

#[test]
fn shifted_ball_multipole_converges() {
    let f = real("(x1 - 0.3)^2 + x2^2 + x3^2 - 1");
    let g = GridSpec::new(3, 1.5, 1.5 / 64.0).unwrap();
    let sample = DomainSample::new(&f, &g, QuadratureRule::Fractional).unwrap();
    let psi = Density::one(3);
    let y = [5.0, 0.0, 0.0];
    let exact = 4.0 * PI / 3.0 / 4.7;
    let direct = volume_potential(&sample, &psi, &y).unwrap();
    let mut last = f64::INFINITY;
    for order in 0..=4 {
        let approx = multipole_eval(&moments(&sample, &psi, order), &y).unwrap();
        let err = (approx - direct).abs();
        assert!(err < last, "order {order}: {err} not below {last}");
        last = err;
        if order == 2 {
            assert!(rel(approx, exact) < 0.005, "L=2 {approx} vs {exact}");
        }
    }
}

#[test]
fn exterior_potential_is_harmonic() {
    let f = real("x1^4 + x2^2 + x3^2 + 0.3*x1*x2 - 0.8");
    let g = GridSpec::new(3, 1.5, 1.5 / 48.0).unwrap();
    let sample = DomainSample::new(&f, &g, QuadratureRule::Fractional).unwrap();
    let psi = Density::polynomial(&parse_polynomial("1 + 1/2*x1", 3).unwrap(), true).unwrap();
    let step = 0.05;
    for y in evaluation_sphere::<f64>(3, 4.0, 4, 7) {
        let at = |d: [f64; 3]| volume_potential(&sample, &psi, &[y[0] + d[0], y[1] + d[1], y[2] + d[2]]).unwrap();
        let center = at([0.0; 3]);
        let mut lap = -6.0 * center;
        for a in 0..3 {
            let mut d = [0.0; 3];
            d[a] = step;
            lap += at(d);
            d[a] = -step;
            lap += at(d);
        }
        lap /= step * step;
        // A non-harmonic perturbation of size I/|y|^2 would show up at order one here.
        assert!((lap * 16.0 / center).abs() < 1e-3, "laplacian {lap} at {y:?}");
    }
}

#[test]
fn nested_shell_matches_difference_of_balls() {
    let f = real("(x1^2 + x2^2 + x3^2 - 1)*(x1^2 + x2^2 + x3^2 - 4)");
    let g = GridSpec::new(3, 2.5, 2.5 / 64.0).unwrap();
    let psi = Density::one(3);
    let sample = DomainSample::new(&f, &g, QuadratureRule::Fractional).unwrap();
    let mesh = arnold_cycle(&f, &g).unwrap();
    let mut signs: Vec<(f64, usize, i8)> =
        mesh.components.iter().map(|c| (c.max_radius(), c.depth, c.orientation_sign)).collect();
    signs.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(signs.iter().map(|t| (t.1, t.2)).collect::<Vec<_>>(), vec![(2, -1), (1, 1)]);
    for y in evaluation_sphere::<f64>(3, 10.0, 6, 3) {
        let vol = volume_potential(&sample, &psi, &y).unwrap();
        let exact = 4.0 * PI / 3.0 * (8.0 - 1.0) / 10.0;
        assert!(rel(vol, exact) < 0.01, "{vol} vs {exact}");
        // Standard charge 1/|grad F| is 1/12 on r = 2 and 1/6 on r = 1.
        let surf = surface_charge_potential(&mesh, &psi, &y).unwrap();
        let single = (16.0 * PI / 12.0 - 4.0 * PI / 6.0) / 10.0;
        assert!(rel(surf, single) < 0.01, "{surf} vs {single}");
    }
}

#[test]
fn three_concentric_spheres_alternate() {
    let f = real("(x1^2 + x2^2 + x3^2 - 1)*(x1^2 + x2^2 + x3^2 - 4)*(x1^2 + x2^2 + x3^2 - 9)");
    let g = GridSpec::new(3, 3.5, 3.5 / 48.0).unwrap();
    let mesh = arnold_cycle(&f, &g).unwrap();
    let mut by_radius: Vec<(f64, usize, i8)> =
        mesh.components.iter().map(|c| (c.max_radius(), c.depth, c.orientation_sign)).collect();
    by_radius.sort_by(|a, b| a.0.total_cmp(&b.0));
    let got: Vec<(usize, i8)> = by_radius.iter().map(|t| (t.1, t.2)).collect();
    assert_eq!(got, vec![(3, 1), (2, -1), (1, 1)]);
}
