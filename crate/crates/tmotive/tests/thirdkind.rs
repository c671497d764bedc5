use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use tmotive::analytic::*;
use tmotive::lattice::*;
use tmotive::motives::frame_matrices;
use tmotive::thirdkind::*;
use tmotive::tmodule::build_ee;
use tmotive::{CInf, FieldConfig, MathError, Rat};

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
    FieldConfig::new(3, 1, 2).unwrap()
}

fn th(f: &FieldConfig, n: i64, d: i64) -> CInf {
    CInf::theta_pow(f, Rat::new(n, d))
}

fn below(d: Option<Rat>, p: i64) -> bool {
    d.map_or(true, |x| x < Rat::from_integer(-p))
}

fn input(f: FieldConfig, r: usize, prec: i64, work: i64) -> ScenarioInput {
    let pi = carlitz_pi(&f, work + 80).unwrap();
    let mut basis = vec![pi.clone(), pi.mul(&th(&f, 1, 3)).add(&th(&f, 1, 1)), pi.mul(&th(&f, 2, 3))];
    basis.truncate(r);
    let betas = (0..r - 1).map(|i| th(&f, i as i64 + 1, 1).add(&CInf::one(&f))).collect();
    ScenarioInput { field: f, basis, betas, prec, guard: None, work, t_deg: 24, max_scale: 12 }
}

fn a_of(r: &Result<RecoveredA, String>) -> Vec<tmotive::FqElem> {
    r.as_ref().expect("a_j recovered").a.clone()
}

#[test]
fn compare_mod_api_examples() {
    let f = f3();
    let pi = carlitz_pi(&f, 120).unwrap();
    let y = th(&f, -1, 2).add(&th(&f, 3, 1));
    let guard = Rat::from_integer(30);

    let a = th(&f, 2, 1).add(&CInf::one(&f));
    let c = compare_mod_api(&y.add(&a.mul(&pi)), &y, &pi, guard).unwrap();
    assert!(c.pass, "{c:?}");
    assert_eq!(c.a, vec![f.elem(1), f.elem(0), f.elem(1)]);
    assert_eq!(fmt_apoly(&f, &c.a), "t^2 + 1");

    let c = compare_mod_api(&y.add(&th(&f, 1, 2).mul(&pi)), &y, &pi, guard).unwrap();
    assert!(!c.pass);
    assert!(c.diagnostic.unwrap().contains("fractional"));

    // a coefficient of F_9 outside F_3
    let z = f.elements().into_iter().find(|z| !f.in_fq(*z)).unwrap();
    let x = y.add(&CInf::constant(&f, z).mul(&th(&f, 1, 1)).mul(&pi));
    let c = compare_mod_api(&x, &y, &pi, guard).unwrap();
    assert!(!c.pass);
    assert!(c.diagnostic.unwrap().contains("not in F_q"));

    // a tail above the guard
    let c = compare_mod_api(&y.add(&th(&f, -5, 1).mul(&pi)), &y, &pi, guard).unwrap();
    assert!(!c.pass && c.diagnostic.is_none());
    assert_eq!(c.tail_deg, Some(Rat::from_integer(-5)));

    let m = f.from_int(-1);
    assert_eq!(fmt_apoly(&f, &[m, f.elem(1)]), "t + 2");
    assert_eq!(fmt_apoly(&f, &[]), "0");
}

/// Rank 2: alpha_delta = beta_1 / (-kappa_2)^{1/(q-1)}.
#[test]
fn rank_two_alpha() {
    let f = f3();
    let k: Vec<CInf> = [th(&f, 1, 2).add(&CInf::one(&f)), th(&f, -1, 1).add(&th(&f, -3, 1))]
        .iter()
        .map(|x| x.truncate(Rat::from_integer(200)))
        .collect();
    let ce = constant_ce(&k).unwrap();
    let lhs = ce.pow(f.q() - 1).mul(&k[1].neg());
    assert!(below(lhs.defect(&CInf::one(&f)), 100));
    let beta = th(&f, 2, 1);
    let alpha = alpha_delta(&ce, std::slice::from_ref(&beta));
    assert_eq!(alpha.len(), 1);
    assert!(alpha[0].sub(&beta.mul(&ce)).is_zero());
}

/// Both expressions of c_E agree up to F_q^x.
#[test]
fn constant_two_forms() {
    // det V_E involves kappa_r^{(1-r)}, known only to W / q^{r-1}
    for (f, r, w) in [(f2(), 2, 200), (f2(), 3, 200), (f3(), 2, 120), (f3(), 3, 280)] {
        {
            let inp = input(f.clone(), r, 20, w);
            let l = lattice_to_drinfeld(&LatticeDef { basis: inp.basis }, w).unwrap();
            let fr = frame_matrices(&CInf::theta(&f), &l.kappa).unwrap();
            let a = constant_ce(&l.kappa).unwrap();
            let b = constant_ce_via_normalizer(&fr).unwrap();
            assert!(below(ce_defect(&a, &b), 10), "q={} r={r} {:?}", f.q(), ce_defect(&a, &b));
        }
    }
}

#[test]
fn zero_delta_gives_zero_periods() {
    let f = f2();
    let mut inp = input(f.clone(), 2, 30, 180);
    inp.betas = vec![CInf::zero(&f)];
    let sc = Scenario::build(&inp).unwrap();
    assert_eq!(sc.scale, 0);
    assert!(sc.alpha.iter().chain(&sc.y).chain(&sc.lambda).all(|x| x.deg().is_none()));
    let tk = sc.third_kind().unwrap();
    assert!(tk.pass(sc.guard()));
    assert!(tk.rows.iter().all(|r| r.comparison.a.is_empty()));
}

#[test]
fn scenario_errors() {
    let f = f2();
    let mut inp = input(f.clone(), 2, 30, 120);
    inp.betas.push(CInf::one(&f));
    assert!(matches!(Scenario::build(&inp), Err(MathError::DimensionMismatch(_))));
    let mut inp = input(f, 3, 30, 120);
    inp.max_scale = 2;
    assert!(matches!(Scenario::build(&inp), Err(MathError::OutsideLogRadius(_))));
}

fn check_full(sc: &Scenario) {
    let g = sc.guard();
    let p = g.to_integer();
    assert!(below(sc.y_residual, p), "{:?}", sc.y_residual);
    for fd in &sc.fdelta {
        assert!(below(fd.defect(), p));
    }
    let tk = sc.third_kind().unwrap();
    assert!(tk.pass(g), "{tk:?}");
    let lem = sc.lemma44().unwrap();
    assert!(below(lem.defect, p), "{lem:?}");
    let parts = sc.trivialization().unwrap();
    let pr = sc.pipeline(&parts).unwrap();
    assert!(pr.pass(g), "{pr:?}");
    for (row, a) in tk.rows.iter().zip(&pr.a) {
        assert_eq!(row.comparison.a, a_of(a));
    }
    let s = pr.series_route.as_ref().unwrap();
    for (a1, a2) in pr.a.iter().zip(&s.a) {
        assert_eq!(a_of(a1), a_of(a2));
    }
}

#[test]
fn rank_two_scenario() {
    let sc = Scenario::build(&input(f2(), 2, 30, 240)).unwrap();
    check_full(&sc);
}

#[test]
fn rank_three_scenario() {
    let sc = Scenario::build(&input(f2(), 3, 30, 240)).unwrap();
    assert!(sc.scale > 0);
    check_full(&sc);
}

/// Moving lambda_j by b(theta) pi~ moves a_j by b in every route; at q = 3
/// this pins the signs.
#[test]
fn shifted_lambda_moves_a() {
    let f = f3();
    let mut sc = Scenario::build(&input(f.clone(), 2, 20, 140)).unwrap();
    let b0 = vec![f.from_int(-1), f.elem(1)];
    let b1 = vec![f.elem(0), f.elem(0), f.from_int(-1)];
    let base = sc.third_kind().unwrap();
    for (j, b) in [(0, &b0), (1, &b1)] {
        sc.lambda[j] = sc.lambda[j].add(&apoly_at_theta(&f, b).mul(&sc.pi));
    }
    let tk = sc.third_kind().unwrap();
    assert!(tk.pass(sc.guard()), "{tk:?}");
    let parts = sc.trivialization().unwrap();
    let pr = sc.pipeline(&parts).unwrap();
    assert!(pr.pass(sc.guard()), "{pr:?}");
    for (j, b) in [(0, &b0), (1, &b1)] {
        let mut want = b.clone();
        let a0 = &base.rows[j].comparison.a;
        want.resize(want.len().max(a0.len()), f.elem(0));
        for (w, x) in want.iter_mut().zip(a0) {
            *w = f.add(*w, *x);
        }
        while want.last().map_or(false, |c| c.is_zero()) {
            want.pop();
        }
        assert_eq!(tk.rows[j].comparison.a, want);
        assert_eq!(a_of(&pr.a[j]), want);
    }
}

/// Scaling delta by zeta in F_q^x scales alpha, y and lambda by zeta.
#[test]
fn fq_scaling_equivariance() {
    let f = f3();
    let inp = input(f.clone(), 2, 20, 140);
    let sc = Scenario::build(&inp).unwrap();
    let z = f.from_int(-1);
    let mut inz = inp.clone();
    inz.betas = inz.betas.iter().map(|b| b.scale(z)).collect();
    let scz = Scenario::build(&inz).unwrap();
    assert_eq!(sc.scale, scz.scale);
    for (a, b) in
        sc.alpha.iter().zip(&scz.alpha).chain(sc.y.iter().zip(&scz.y)).chain(sc.lambda.iter().zip(&scz.lambda))
    {
        assert!(below(a.scale(z).defect(b), 10));
    }
    let (t, tz) = (sc.third_kind().unwrap(), scz.third_kind().unwrap());
    for (r, rz) in t.rows.iter().zip(&tz.rows) {
        assert!(below(r.rhs.scale(z).defect(&rz.rhs), 10));
    }
}

/// The E_0 difference equation holds for any point y with alpha = Exp(y).
#[test]
fn lemma_for_arbitrary_points() {
    let f = f2();
    let w = 180;
    let inp = input(f.clone(), 3, 30, w);
    let l = lattice_to_drinfeld(&LatticeDef { basis: inp.basis }, w).unwrap();
    let theta = CInf::theta(&f);
    let fr = frame_matrices(&theta, &l.kappa).unwrap();
    let e0 = AnalyticModule::new(build_ee(3, 0, &theta, &l.kappa), &theta, w + 20);
    let mut run = runner(6, 53);
    run.run(&((-4i64..1, 1u32..4), (-4i64..1, 1u32..4)), |((e1, d1), (e2, d2))| {
        let y = vec![th(&f, e1, d1 as i64).add(&th(&f, -6, 1)), th(&f, e2, d2 as i64)];
        let alpha = e0.exp_eval(&y, Rat::from_integer(w)).unwrap().value;
        let rep = verify_lemma_vext(&e0, &fr, &alpha, &y, w).unwrap();
        prop_assert!(below(rep.defect, 15), "{:?}", rep.defect);
        Ok(())
    })
    .unwrap();
}

/// F_eps(y): quasi-periodic series against the AGF route.
#[test]
fn f_eps_two_routes() {
    let f = f2();
    let inp = input(f.clone(), 3, 30, 180);
    let l = lattice_to_drinfeld(&LatticeDef { basis: inp.basis }, 180).unwrap();
    let theta = CInf::theta(&f);
    let e0 = AnalyticModule::new(build_ee(3, 0, &theta, &l.kappa), &theta, 200);
    for y in [vec![th(&f, -1, 2), CInf::one(&f)], vec![CInf::zero(&f), th(&f, 1, 3)]] {
        let r = f_eps(&e0, &y, 180).unwrap();
        assert!(below(r.defect(), 90), "{:?}", r.defect());
    }
}
