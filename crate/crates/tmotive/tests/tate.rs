use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use tmotive::skew::{SkewPoly, Var};
use tmotive::tate::*;
use tmotive::{CInf, FieldConfig, Mat, MathError, Rat, Ring, TPoly};

fn runner(cases: u32, seed: u8) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]),
    )
}

fn f3() -> FieldConfig {
    FieldConfig::new(3, 1, 2).unwrap()
}

fn series(f: &FieldConfig, terms: &[(i64, u32)], den: i64, prec: i64) -> CInf {
    let t: Vec<(Rat, _)> = terms.iter().map(|&(e, c)| (Rat::new(e, den), f.elem(c))).collect();
    CInf::from_terms(f, &t, Some(Rat::from_integer(prec)))
}

fn coeff_strategy(f: &FieldConfig) -> impl Strategy<Value = Vec<(i64, u32)>> {
    let size = f.size();
    prop::collection::vec((-12i64..8, 1..size), 1..4)
}

/// (poly coefficients, (level, mult, coefficient) terms)
fn elem_strategy(f: &FieldConfig) -> impl Strategy<Value = (Vec<Vec<(i64, u32)>>, Vec<(u32, u32, Vec<(i64, u32)>)>)> {
    (prop::collection::vec(coeff_strategy(f), 0..3), prop::collection::vec((0u32..3, 1u32..3, coeff_strategy(f)), 0..3))
}

fn build(f: &FieldConfig, spec: &(Vec<Vec<(i64, u32)>>, Vec<(u32, u32, Vec<(i64, u32)>)>)) -> TateElem {
    let mut e = TateElem::zero(f);
    if !spec.0.is_empty() {
        let c: Vec<CInf> = spec.0.iter().map(|t| series(f, t, 2, 120)).collect();
        e = e.add(&TateElem::from_tpoly(&TPoly::new(c)));
    }
    for (l, m, c) in &spec.1 {
        e = e.add(&TateElem::pole_term(*l, *m, &series(f, c, 2, 120)));
    }
    e
}

fn series_defect(a: &TateElem, b: &TateElem, t: usize) -> Option<Rat> {
    a.to_series(t).sub(&b.to_series(t)).gauss_deg()
}

fn below(d: Option<Rat>, p: i64) -> bool {
    d.map_or(true, |x| x < Rat::from_integer(-p))
}

#[test]
fn twist_examples() {
    let f = f3();
    let theta = CInf::theta(&f);
    let x = TateElem::from_tpoly(&TPoly::t_minus(&theta)).try_twist(1).unwrap();
    let want = TateElem::from_tpoly(&TPoly::t_minus(&theta.twist(1)));
    assert!(x.sub(&want).is_zero());
    let p = TateElem::pole_term(1, 1, &CInf::one(&f)).try_twist(-1).unwrap();
    let terms: Vec<_> = p.pfrac_terms().map(|(l, m, c)| (l, m, c.clone())).collect();
    assert_eq!(terms.len(), 1);
    assert_eq!((terms[0].0, terms[0].1), (0, 1));
    let err = TateElem::pole_term(0, 1, &CInf::one(&f)).try_twist(-1).unwrap_err();
    assert_eq!(err, MathError::NegativePoleLevel(-1));
}

#[test]
fn twist_round_trip() {
    let f = f3();
    let mut run = runner(24, 3);
    run.run(&elem_strategy(&f), |spec| {
        let e = build(&f, &spec);
        let back = e.try_twist(2).unwrap().try_twist(-2).unwrap();
        prop_assert!(below(back.sub(&e).gauss_deg(), 20));
        let s = e.to_series(12);
        let sback = s.try_twist(-1).unwrap().try_twist(1).unwrap();
        prop_assert!(below(sback.sub(&s).gauss_deg(), 20));
        Ok(())
    })
    .unwrap();
}

#[test]
fn eval_and_residue_examples() {
    let f = f3();
    let theta = CInf::theta(&f);
    let t = TateElem::from_tpoly(&TPoly::t(&theta));
    let ev = t.eval_theta().unwrap();
    assert!(ev.value.unwrap().sub(&theta).is_zero());
    assert!(ev.residue.is_zero());
    let y = series(&f, &[(3, 1), (0, 2)], 1, 80);
    let g = TateElem::pole_term(0, 1, &y.neg()).add(&TateElem::pole_term(1, 1, &CInf::one(&f)));
    let ev = g.eval_theta().unwrap();
    assert!(ev.value.is_none());
    assert!(ev.residue.add(&y).is_zero());
    let e2 = TateElem::pole_term(0, 2, &CInf::one(&f)).eval_theta().unwrap_err();
    assert!(matches!(e2, MathError::PoleAtTheta(_)));
    assert!(matches!(t.to_series(4).eval_theta(), Err(MathError::Representation(_))));
}

#[test]
fn gauss_norm_examples() {
    let f = f3();
    let theta = CInf::theta(&f);
    assert_eq!(TateElem::one(&f).gauss_deg(), Some(Rat::from_integer(0)));
    assert_eq!(TateElem::from_tpoly(&TPoly::t_minus(&theta)).gauss_deg(), Some(Rat::from_integer(1)));
    // |c / (t - theta^{q^n})^m| = |c| |theta|^{-m q^n}
    let p = TateElem::pole_term(1, 2, &theta);
    assert_eq!(p.gauss_deg(), Some(Rat::from_integer(1 - 6)));
    assert_eq!(p.to_series(10).gauss_deg(), p.gauss_deg());
    assert_eq!(TateElem::zero(&f).gauss_deg(), None);
}

#[test]
fn zero_matrix_passes_frobenius_check() {
    let f = f3();
    let z = Mat::zeros_like(&TateElem::zero(&f), 2, 2);
    let phi = Mat::identity_like(&TateElem::zero(&f), 2);
    assert_eq!(check_frobenius_equation(&phi, &z, Side::Dual, 8).unwrap(), None);
    assert_eq!(check_frobenius_equation(&phi, &z, Side::Motive, 8).unwrap(), None);
}

/// Products in partial-fraction form agree with products of expansions.
#[test]
fn partial_fraction_product_matches_series_product() {
    let f = f3();
    let mut run = runner(32, 9);
    run.run(&(elem_strategy(&f), elem_strategy(&f)), |(a, b)| {
        let a = build(&f, &a);
        let b = build(&f, &b);
        let exact = a.try_mul(&b).unwrap();
        prop_assert!(exact.trunc().is_none());
        let via_series = a.to_series(16).try_mul(&b.to_series(16)).unwrap();
        let d = series_defect(&exact, &via_series, 16);
        prop_assert!(below(d, 60), "defect {:?}", d);
        Ok(())
    })
    .unwrap();
}

#[test]
fn simple_pole_division_inverts_multiplication() {
    let f = f3();
    let theta = CInf::theta(&f);
    let mut run = runner(24, 13);
    run.run(&(elem_strategy(&f), 0u32..3), |(a, b)| {
        let a = build(&f, &a);
        let q = a.mul_simple_pole(b).unwrap();
        let lin = TateElem::from_tpoly(&TPoly::t_minus(&theta.twist(b as i64)));
        let back = q.try_mul(&lin).unwrap();
        let d = back.sub(&a).gauss_deg();
        prop_assert!(below(d, 60), "defect {:?}", d);
        Ok(())
    })
    .unwrap();
}

#[test]
fn series_inverse() {
    let f = f3();
    let mut run = runner(16, 17);
    run.run(&elem_strategy(&f), |spec| {
        let a = build(&f, &spec).add(&TateElem::constant(&series(&f, &[(20, 1)], 1, 200)));
        let inv = a.inv_series(14).unwrap();
        let one = a.try_mul(&inv).unwrap();
        let d = one.sub(&TateElem::one(&f)).gauss_deg();
        prop_assert!(below(d, 40), "defect {:?}", d);
        Ok(())
    })
    .unwrap();
}

/// Gauss lemma for t-polynomials: |FG| = |F||G|.
#[test]
fn gauss_norm_is_multiplicative() {
    let f = f3();
    let mut run = runner(32, 21);
    let strat = (prop::collection::vec(coeff_strategy(&f), 1..4), prop::collection::vec(coeff_strategy(&f), 1..4));
    run.run(&strat, |(a, b)| {
        let pa = TateElem::from_tpoly(&TPoly::new(a.iter().map(|t| series(&f, t, 2, 200)).collect()));
        let pb = TateElem::from_tpoly(&TPoly::new(b.iter().map(|t| series(&f, t, 2, 200)).collect()));
        let (da, db) = (pa.gauss_deg().unwrap(), pb.gauss_deg().unwrap());
        prop_assert_eq!(pa.try_mul(&pb).unwrap().gauss_deg(), Some(da + db));
        Ok(())
    })
    .unwrap();
}

/// <B1 B2 | F> = <B1 | <B2 | F>>.
#[test]
fn inner_product_respects_ore_multiplication() {
    let f = f3();
    let mut run = runner(16, 25);
    let poly = || prop::collection::vec(coeff_strategy(&f), 1..3);
    run.run(&(poly(), poly(), elem_strategy(&f)), |(b1, b2, fspec)| {
        let sp = |c: &Vec<Vec<(i64, u32)>>| SkewPoly::new(Var::Tau, c.iter().map(|t| series(&f, t, 2, 200)).collect());
        let b1 = Mat::from_rows(vec![vec![sp(&b1)]]);
        let b2 = Mat::from_rows(vec![vec![sp(&b2)]]);
        let fm = Mat::from_rows(vec![vec![build(&f, &fspec)]]);
        let lhs = inner_product(&b1.mul(&b2), &fm).unwrap();
        let rhs = inner_product(&b1, &inner_product(&b2, &fm).unwrap()).unwrap();
        let d = lhs.get(0, 0).sub(rhs.get(0, 0)).gauss_deg();
        prop_assert!(below(d, 60), "defect {:?}", d);
        Ok(())
    })
    .unwrap();
}

/// The residue at theta equals the value of (t - theta) F there, and the
/// expansion commutes with multiplying by t - theta.
#[test]
fn residue_and_expansion_are_consistent() {
    let f = f3();
    let theta = CInf::theta(&f);
    let lin = TateElem::from_tpoly(&TPoly::t_minus(&theta));
    let mut run = runner(24, 29);
    run.run(&elem_strategy(&f), |spec| {
        let mut a = build(&f, &spec);
        // keep poles at theta simple
        a = TateElem::zero(&f).add(&a);
        let simple: Vec<_> = a.pfrac_terms().filter(|(l, m, _)| *l == 0 && *m > 1).collect();
        prop_assume!(simple.is_empty());
        let res = a.eval_theta().unwrap().residue;
        let v = lin.try_mul(&a).unwrap().eval_theta().unwrap();
        let d = v.value.unwrap().sub(&res).deg_bound();
        prop_assert!(below(d, 60), "defect {:?}", d);
        let two = lin.to_series(12).try_mul(&a.to_series(12)).unwrap();
        let one = lin.try_mul(&a).unwrap().to_series(12);
        prop_assert!(below(two.sub(&one).gauss_deg(), 60));
        Ok(())
    })
    .unwrap();
}

#[test]
fn json_dump_lists_both_parts() {
    let f = f3();
    let e = TateElem::from_tpoly(&TPoly::t(&CInf::theta(&f))).add(&TateElem::pole_term(2, 1, &CInf::one(&f)));
    let j = e.to_json();
    assert_eq!(j["pfrac"][0]["level"], 2);
    assert_eq!(j["poly"].as_array().unwrap().len(), 2);
    assert!(j["t_degree"].is_null());
}
