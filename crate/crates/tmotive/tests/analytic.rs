use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use tmotive::analytic::*;
use tmotive::skew::{skew_apply, skew_apply_scalar};
use tmotive::tmodule::{carlitz_tensor, drinfeld, BiderivationDef};
use tmotive::{CInf, FieldConfig, MathError, Rat, SkewPoly, Var};

fn runner(cases: u32, seed: u8) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]),
    )
}

fn f2() -> FieldConfig {
    FieldConfig::new(2, 1, 1).unwrap()
}

fn f3() -> FieldConfig {
    FieldConfig::new(3, 1, FieldConfig::min_s_for_neg_one_root(3, 1)).unwrap()
}

fn r(n: i64) -> Rat {
    Rat::from_integer(n)
}

fn th(f: &FieldConfig, e: i64) -> CInf {
    CInf::theta_pow(f, r(e))
}

/// Series from (exponent, code) pairs with an absolute precision.
fn series(f: &FieldConfig, terms: &[(i64, u32)], den: i64, prec: i64) -> CInf {
    let t: Vec<(Rat, _)> = terms.iter().map(|&(e, c)| (Rat::new(e, den), f.elem(c))).collect();
    CInf::from_terms(f, &t, Some(r(prec)))
}

fn small_series(f: &FieldConfig, max_num: i64) -> impl Strategy<Value = Vec<(i64, u32)>> {
    let size = f.size();
    prop::collection::vec((-40..=max_num, 1..size), 1..5)
}

fn assert_close(a: &CInf, b: &CInf, p: i64, what: &str) {
    let d = a.defect(b);
    assert!(d.map_or(true, |x| x < r(-p)), "{what}: defect {:?}, lhs {a:?}, rhs {b:?}", d);
}

/// Agreement to `rel` digits below the larger leading degree (or below 0).
fn rel_close(a: &CInf, b: &CInf, rel: i64) -> bool {
    let top = [a.deg(), b.deg(), Some(r(0))].into_iter().flatten().max().unwrap();
    a.defect(b).map_or(true, |d| d < top - r(rel))
}

#[test]
fn carlitz_exp_and_log_low_coefficients() {
    for f in [f2(), f3()] {
        let q = f.q();
        let m = AnalyticModule::carlitz(&f, 80);
        let t = CInf::theta(&f);
        let tq = t.twist(1);
        let tq2 = t.twist(2);
        let d1 = tq.sub(&t);
        let d2 = tq2.sub(&t).mul(&tq2.sub(&tq));
        let l1 = t.sub(&tq);
        let l2 = l1.mul(&t.sub(&tq2));
        let rel = r(90);
        let b1 = m.exp_coeff(1).unwrap().get(0, 0).clone();
        let b2 = m.exp_coeff(2).unwrap().get(0, 0).clone();
        let p1 = m.log_coeff(1).unwrap().get(0, 0).clone();
        let p2 = m.log_coeff(2).unwrap().get(0, 0).clone();
        let p = 78 + q as i64;
        assert_close(&b1, &d1.inv_rel(rel).unwrap(), p, "B_1");
        assert_close(&b2, &d2.inv_rel(rel).unwrap(), p, "B_2");
        assert_close(&p1, &l1.inv_rel(rel).unwrap(), p, "P_1");
        assert_close(&p2, &l2.inv_rel(rel).unwrap(), p, "P_2");
    }
}

#[test]
fn rank_two_first_exp_coefficient() {
    let f = f3();
    let t = CInf::theta(&f);
    let k1 = series(&f, &[(2, 1), (0, 2)], 1, 100);
    let k2 = CInf::one(&f);
    let m = AnalyticModule::drinfeld(&t, &[k1.clone(), k2], 80);
    let want = k1.mul(&t.twist(1).sub(&t).inv_rel(r(80)).unwrap());
    assert_close(m.exp_coeff(1).unwrap().get(0, 0), &want, 70, "b_1");
}

#[test]
fn carlitz_period_degree_and_leading_coefficient() {
    for f in [f2(), f3()] {
        let q = f.q() as i64;
        let pi = carlitz_pi(&f, 40).unwrap();
        assert_eq!(pi.deg(), Some(Rat::new(q, q - 1)));
        let lead = pi.leading().unwrap().1;
        let neg = CInf::theta(&f).neg().root((q - 1) as u64).unwrap();
        let c = f.neg(neg.leading().unwrap().1);
        assert_eq!(lead, f.mul(c, f.neg(f.from_int(1))));
        assert!(pi.prec().unwrap() >= r(40));
    }
}

#[test]
fn carlitz_exp_kills_the_period() {
    for f in [f2(), f3()] {
        let p = 60;
        let pi = carlitz_pi(&f, p + 10).unwrap();
        let m = AnalyticModule::carlitz(&f, p + 20);
        let v = m.exp_eval(&[pi.clone()], r(p + 10)).unwrap();
        let d = v.scalar().deg_bound();
        assert!(d.map_or(true, |x| x < r(-p + 10)), "Exp(pi) degree {d:?}");
        let v2 = m.exp_eval(&[pi.mul(&CInf::theta(&f))], r(p)).unwrap();
        let d2 = v2.scalar().deg_bound();
        assert!(d2.map_or(true, |x| x < r(-p + 12)), "Exp(theta pi) degree {d2:?}");
    }
}

#[test]
fn fq_multiples_of_the_period_vanish_but_torsion_does_not() {
    let f = f3();
    let pi = carlitz_pi(&f, 40).unwrap();
    let m = AnalyticModule::carlitz(&f, 60);
    let scaled = pi.mul(&CInf::from_int(&f, 2));
    let v = m.exp_eval(&[scaled], r(40)).unwrap();
    assert!(v.scalar().deg_bound().unwrap() < r(-30));
    let torsion = pi.mul(&CInf::theta_pow(&f, r(-1)));
    let v = m.exp_eval(&[torsion], r(40)).unwrap();
    assert_eq!(v.scalar().deg(), Some(Rat::new(1, 2)));
}

#[test]
fn log_inverts_exp_inside_the_radius() {
    let f = f2();
    let m = AnalyticModule::carlitz(&f, 80);
    let z = series(&f, &[(3, 1), (0, 1), (-5, 1)], 3, 60);
    let e = m.exp_eval(&[z.clone()], r(60)).unwrap();
    let l = m.log_eval(&e.value, r(60)).unwrap();
    assert_close(&l.value[0], &z, 50, "Log(Exp z)");
}

#[test]
fn exp_inverts_log() {
    let f = f3();
    let t = CInf::theta(&f);
    let k = vec![series(&f, &[(1, 1)], 1, 100), series(&f, &[(0, 2)], 1, 100)];
    let m = AnalyticModule::drinfeld(&t, &k, 80);
    let x = series(&f, &[(1, 2), (-1, 1)], 2, 60);
    let l = m.log_eval(&[x.clone()], r(60)).unwrap();
    let e = m.exp_eval(&l.value, r(60)).unwrap();
    assert_close(&e.value[0], &x, 50, "Exp(Log x)");
}

#[test]
fn log_outside_radius_errors() {
    let f = f2();
    let m = AnalyticModule::carlitz(&f, 60);
    let err = m.log_eval(&[th(&f, 3)], r(40)).unwrap_err();
    assert!(matches!(err, MathError::OutsideLogRadius(_)));
}

#[test]
fn drinfeld_exp_functional_equation() {
    let f = f3();
    let t = CInf::theta(&f);
    let mut run = runner(12, 7);
    let strat = (small_series(&f, 4), small_series(&f, 2), small_series(&f, 9));
    run.run(&strat, |(k1, k2, z)| {
        let k1 = series(&f, &k1, 4, 400);
        let k2 = series(&f, &k2, 4, 400);
        let z = series(&f, &z, 4, 400);
        let phi = drinfeld(&t, &[k1.clone(), k2.clone()]);
        let m = AnalyticModule::drinfeld(&t, &[k1, k2], 400);
        let ez = m.exp_eval(&[z.clone()], r(350)).unwrap();
        let lhs = m.exp_eval(&[t.mul(&z)], r(350)).unwrap();
        let rhs = skew_apply(&phi.phi_t, &ez.value);
        prop_assert!(rel_close(&lhs.value[0], &rhs[0], 300), "defect {:?}", lhs.value[0].defect(&rhs[0]));
        // a = t^2 + 1
        let phi2 = phi.phi_power(2);
        let az = t.mul(&t).add(&CInf::one(&f)).mul(&z);
        let lhs2 = m.exp_eval(&[az], r(350)).unwrap();
        let rhs2 = skew_apply(&phi2, &ez.value)[0].add(&ez.value[0]);
        prop_assert!(rel_close(&lhs2.value[0], &rhs2, 300), "defect {:?}", lhs2.value[0].defect(&rhs2));
        Ok(())
    })
    .unwrap();
}

#[test]
fn exp_is_fq_linear() {
    let f = f3();
    let t = CInf::theta(&f);
    let m = AnalyticModule::drinfeld(&t, &[CInf::from_int(&f, 2), CInf::one(&f)], 400);
    let mut run = runner(16, 11);
    let strat = (small_series(&f, 8), small_series(&f, 8), 1u32..3);
    run.run(&strat, |(a, b, c)| {
        let a = series(&f, &a, 3, 70);
        let b = series(&f, &b, 3, 70);
        let c = f.elem(c);
        let ea = m.exp_eval(&[a.clone()], r(60)).unwrap().value[0].clone();
        let eb = m.exp_eval(&[b.clone()], r(60)).unwrap().value[0].clone();
        let es = m.exp_eval(&[a.add(&b)], r(60)).unwrap().value[0].clone();
        let ec = m.exp_eval(&[a.scale(c)], r(60)).unwrap().value[0].clone();
        let d1 = es.defect(&ea.add(&eb));
        let d2 = ec.defect(&ea.scale(c));
        prop_assert!(d1.map_or(true, |x| x < r(-50)), "additivity {:?}", d1);
        prop_assert!(d2.map_or(true, |x| x < r(-50)), "scaling {:?}", d2);
        Ok(())
    })
    .unwrap();
}

#[test]
fn carlitz_tensor_square_functional_equation() {
    let f = f2();
    let t = CInf::theta(&f);
    let c2 = carlitz_tensor(&t, 2);
    let m = tmotive::analytic::AnalyticModule::new(c2.clone(), &t, 100);
    let z = vec![series(&f, &[(2, 1), (-1, 1)], 1, 80), series(&f, &[(3, 1)], 2, 80)];
    let ez = m.exp_eval(&z, r(70)).unwrap();
    let tz = mat_vec(&c2.dphi(), &z);
    let lhs = m.exp_eval(&tz, r(70)).unwrap();
    let rhs = skew_apply(&c2.phi_t, &ez.value);
    let d = vec_defect(&lhs.value, &rhs);
    assert!(d.map_or(true, |x| x < r(-50)), "defect {d:?}");
    let l = m.log_eval(&[th(&f, -1), th(&f, -2)], r(60)).unwrap();
    let back = m.exp_eval(&l.value, r(60)).unwrap();
    let d = vec_defect(&back.value, &[th(&f, -1), th(&f, -2)]);
    assert!(d.map_or(true, |x| x < r(-50)), "Exp(Log) defect {d:?}");
}

#[test]
fn quasi_periodic_functional_equation() {
    let f = f3();
    let t = CInf::theta(&f);
    let kappa = vec![series(&f, &[(1, 1)], 1, 120), CInf::one(&f)];
    let base = AnalyticModule::drinfeld(&t, &kappa, 120);
    let phi = drinfeld(&t, &kappa);
    let beta = series(&f, &[(2, 1), (0, 1)], 2, 120);
    let delta = BiderivationDef::from_betas(1, 1, &[beta.clone()], &t);
    let z = series(&f, &[(5, 1), (1, 2)], 3, 80);
    let ez = base.exp_eval(&[z.clone()], r(70)).unwrap().value[0].clone();
    let dexp = beta.mul(&ez.twist(1));

    // G_a with theta
    let qf = QuasiPeriodic::new(&base, &Target::Trivial, &delta).unwrap();
    let fz = qf.eval(&[z.clone()], r(70)).unwrap().value[0].clone();
    let ftz = qf.eval(&[t.mul(&z)], r(70)).unwrap().value[0].clone();
    assert_close(&ftz, &t.mul(&fz).add(&dexp), 50, "F(theta z) on G_a");

    // Carlitz target
    let qc = QuasiPeriodic::new(&base, &Target::Module(carlitz_tensor(&t, 1)), &delta).unwrap();
    let gz = qc.eval(&[z.clone()], r(70)).unwrap().value[0].clone();
    let gtz = qc.eval(&[t.mul(&z)], r(70)).unwrap().value[0].clone();
    let carlitz_t = SkewPoly::new(Var::Tau, vec![t.clone(), CInf::one(&f)]);
    let want = skew_apply_scalar(&carlitz_t, &gz).add(&dexp);
    assert_close(&gtz, &want, 50, "F(theta z) on C");
    assert!(qc.coeff(0).unwrap().is_zero());
    let _ = phi;
}

#[test]
fn quasi_periodic_rejects_constant_term() {
    let f = f2();
    let base = AnalyticModule::carlitz(&f, 40);
    let d = SkewPoly::new(Var::Tau, vec![CInf::one(&f), CInf::one(&f)]);
    let delta = BiderivationDef::new(tmotive::Mat::from_rows(vec![vec![d]]));
    assert!(QuasiPeriodic::new(&base, &Target::Trivial, &delta).is_err());
}
