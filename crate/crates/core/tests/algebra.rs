use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use proptest::prelude::*;
use vcycle::algebra::{
    box_monomials, local_algebra, milnor_number, monomials_up_to, parse_polynomial, Polynomial, SingularityGerm,
    VersalDeformation,
};
use vcycle::reduction::{
    certificate_over, default_maxdeg, multiply_by_deformation_power, relation_generators, relation_polynomial,
    RelationGenerator, RelationSpan, VolumeFormGerm,
};
use vcycle::scalar::{rat, ratio};
use vcycle::Rational;

/// Differential forms with polynomial coefficients, keyed by sorted index sets.
type Form = BTreeMap<Vec<usize>, Polynomial>;

fn add_to(form: &mut Form, key: Vec<usize>, p: Polynomial) {
    let n = p.dim();
    let slot = form.entry(key).or_insert_with(|| Polynomial::zero(n));
    *slot = &*slot + &p;
}

/// `dx_j ^ (p dx_J)` as a signed, sorted term, or `None` if `j` is in `J`.
fn wedge_left(j: usize, set: &[usize]) -> Option<(Vec<usize>, bool)> {
    if set.contains(&j) {
        return None;
    }
    let before = set.iter().filter(|&&s| s < j).count();
    let mut out = set.to_vec();
    out.insert(before, j);
    Some((out, before % 2 == 1))
}

fn exterior_d(form: &Form) -> Form {
    let mut out = Form::new();
    for (set, p) in form {
        for j in 0..p.dim() {
            let dp = p.derivative(j);
            if dp.is_zero() {
                continue;
            }
            if let Some((key, negative)) = wedge_left(j, set) {
                add_to(&mut out, key, if negative { dp.scale(&rat(-1)) } else { dp });
            }
        }
    }
    out
}

fn wedge_one_form(alpha: &[Polynomial], form: &Form) -> Form {
    let mut out = Form::new();
    for (j, a) in alpha.iter().enumerate() {
        for (set, p) in form {
            if let Some((key, negative)) = wedge_left(j, set) {
                let prod = a * p;
                add_to(&mut out, key, if negative { prod.scale(&rat(-1)) } else { prod });
            }
        }
    }
    out
}

/// Top-degree coefficient of `df ^ d(x^beta dx_{[n] minus {i,k}})`.
fn oracle_relation(g: &RelationGenerator, big_n: u32, n: usize) -> Polynomial {
    let f = SingularityGerm::fermat(n, big_n).unwrap();
    let df: Vec<Polynomial> = (0..n).map(|j| f.poly().derivative(j)).collect();
    let set: Vec<usize> = (0..n).filter(|&j| j != g.i - 1 && j != g.k - 1).collect();
    let mut eta = Form::new();
    eta.insert(set, Polynomial::monomial(g.beta.clone(), Rational::one()));
    let top = wedge_one_form(&df, &exterior_d(&eta));
    let full: Vec<usize> = (0..n).collect();
    top.get(&full).cloned().unwrap_or_else(|| Polynomial::zero(n))
}

fn span(big_n: u32, n: usize) -> &'static RelationSpan {
    static CACHE: OnceLock<Vec<((u32, usize), RelationSpan)>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        [(3, 2), (4, 2), (3, 3)]
            .into_iter()
            .map(|(bn, n)| ((bn, n), RelationSpan::new(bn, n, default_maxdeg(bn, n)).unwrap()))
            .collect()
    });
    &all.iter().find(|(k, _)| *k == (big_n, n)).expect("cached span").1
}

#[test]
fn fermat_local_algebras_are_boxes() {
    for n in 1..=3 {
        for big_n in 2..=5u32 {
            let f = SingularityGerm::fermat(n, big_n).unwrap();
            let a = local_algebra(&f, f.default_degree_bound()).unwrap();
            let mut got = a.basis().to_vec();
            got.sort();
            let mut want = box_monomials(n, big_n - 2);
            want.sort();
            assert_eq!(got, want, "n={n} N={big_n}");
            assert_eq!(a.mu(), (big_n as usize - 1).pow(n as u32));
        }
    }
}

#[test]
fn milnor_numbers_of_small_germs() {
    let cases = [("x1^2 + x2^2", 2, 1), ("x1^3 + x2^2", 2, 2), ("x1^2*x2 + x2^4", 2, 5), ("x1^3 + x2^3 + x3^2", 3, 4)];
    for (s, n, mu) in cases {
        let g = SingularityGerm::new(parse_polynomial(s, n).unwrap()).unwrap();
        assert_eq!(milnor_number(&g).unwrap(), mu, "{s}");
    }
}

#[test]
fn relation_generators_match_exterior_calculus() {
    for (big_n, n) in [(3, 2), (4, 2), (3, 3), (4, 3)] {
        let gens = relation_generators(big_n, n, big_n + 2);
        assert!(!gens.is_empty());
        for g in gens {
            let ours = relation_polynomial(&g, big_n, n).unwrap();
            let oracle = oracle_relation(&g, big_n, n);
            let scaled = ours.coeff().scale(&rat(big_n as i64));
            let negated = scaled.scale(&rat(-1));
            assert!(oracle == scaled || oracle == negated, "{g:?}: {oracle} vs {}", ours.coeff());
        }
    }
}

#[test]
fn relations_reduce_to_zero_and_quotient_has_dimension_mu() {
    for (big_n, n) in [(3u32, 2usize), (4, 2), (3, 3)] {
        let s = span(big_n, n);
        let mu = (big_n as usize - 1).pow(n as u32);
        assert_eq!(s.mu(), mu);
        assert_eq!(s.quotient_dimension(), mu, "N={big_n} n={n}");
        for g in relation_generators(big_n, n, s.maxdeg()) {
            let oracle = VolumeFormGerm::new(big_n, oracle_relation(&g, big_n, n)).unwrap();
            assert!(s.reduce_to_basis(&oracle).unwrap().is_zero(), "{g:?}");
        }
        for e in s.basis() {
            let c = certificate_over(s, &e).unwrap();
            assert!(c.full_rank, "N={big_n} n={n} e={e}");
            assert_eq!(c.rank, mu);
            let class = s.reduce_to_basis(&VolumeFormGerm::monomial(big_n, e.clone()).unwrap()).unwrap();
            assert_eq!(class.coords().count(), 1);
            assert_eq!(class.coord(&e), rat(1));
        }
    }
}

#[test]
fn fermat_example_reductions() {
    let s = span(3, 2);
    let a = s.reduce_to_basis(&VolumeFormGerm::new(3, parse_polynomial("x1^5", 2).unwrap()).unwrap()).unwrap();
    let b = s.reduce_to_basis(&VolumeFormGerm::new(3, parse_polynomial("3*x1^2*x2^3", 2).unwrap()).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = s.reduce_to_basis(&VolumeFormGerm::new(3, parse_polynomial("x1*x2", 2).unwrap()).unwrap()).unwrap();
    assert_eq!(c.to_polynomial(2), parse_polynomial("x1*x2", 2).unwrap());
}

fn small_poly(n: usize, maxdeg: u32) -> impl Strategy<Value = Polynomial> {
    let monos = monomials_up_to(n, maxdeg);
    let len = monos.len();
    prop::collection::vec((0..len, -5i64..=5), 1..6).prop_map(move |terms| {
        let mut p = Polynomial::zero(n);
        for (i, c) in terms {
            p.add_term(monos[i].clone(), rat(c));
        }
        p
    })
}

fn case() -> impl Strategy<Value = (u32, usize)> {
    prop_oneof![Just((3u32, 2usize)), Just((4, 2)), Just((3, 3))]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn reduction_is_linear(
        (big_n, n, p, q) in case().prop_flat_map(|(bn, n)| {
            let d = default_maxdeg(bn, n);
            (Just(bn), Just(n), small_poly(n, d), small_poly(n, d))
        }),
        a in -4i64..=4,
        b in 1i64..=4,
    ) {
        let s = span(big_n, n);
        let (ra, rb) = (rat(a), ratio(1, b));
        let combo = &p.scale(&ra) + &q.scale(&rb);
        let red = |x: &Polynomial| s.reduce_to_basis(&VolumeFormGerm::new(big_n, x.clone()).unwrap()).unwrap();
        let basis = s.basis();
        let lhs = red(&combo).vector(&basis);
        let (vp, vq) = (red(&p).vector(&basis), red(&q).vector(&basis));
        let rhs: Vec<Rational> = vp.iter().zip(&vq).map(|(x, y)| x * &ra + y * &rb).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn deformation_power_multiplies_by_sign(
        (big_n, n) in case(),
        coeffs in prop::collection::vec(-6i64..=6, 10),
        level in prop_oneof![Just(ratio(-1, 1)), Just(ratio(-1, 2)), Just(ratio(-3, 1))],
    ) {
        let def = VersalDeformation::new(SingularityGerm::fermat(n, big_n).unwrap()).unwrap();
        let mu = def.num_params();
        let mut lambda = vec![Rational::zero(); mu];
        lambda[mu - 1] = level.clone();
        let s = RelationSpan::for_constant_parameter(big_n, n, default_maxdeg(big_n, n), &lambda[mu - 1]).unwrap();
        let low = monomials_up_to(n, 2);
        let mut c = Polynomial::zero(n);
        for (e, &k) in low.iter().zip(&coeffs) {
            c.add_term(e.clone(), rat(k));
        }
        let form = VolumeFormGerm::new(big_n, c).unwrap();
        let base = s.reduce_to_basis(&form).unwrap();
        for k in 1..=2u32 {
            let m = multiply_by_deformation_power(&form, &def, &lambda, k).unwrap();
            let sign = if k % 2 == 1 { rat(-1) } else { rat(1) };
            prop_assert_eq!(s.reduce_to_basis(&m).unwrap(), base.scale(&sign));
        }
    }
}
