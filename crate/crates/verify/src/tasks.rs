//! The eight standard verification tasks.

use crate::config::Module;
use crate::registry::{Context, Needs, VerificationTask};
use crate::report::{fmt_deg, TaskReport};
use tmotive::agf::*;
use tmotive::analytic::{carlitz_pi, AnalyticModule};
use tmotive::motives::*;
use tmotive::tate::{check_frobenius_equation, tate_mat_from_tpoly, Side};
use tmotive::thirdkind::{fmt_apoly, ThirdKindReport};
use tmotive::{CInf, MathError, Rat, Ring};

pub fn all() -> Vec<Box<dyn VerificationTask>> {
    vec![
        Box::new(Frames),
        Box::new(DualFrames),
        Box::new(Asp),
        Box::new(Diffeq),
        Box::new(ThirdKind),
        Box::new(Pipeline39),
        Box::new(Lemma44),
        Box::new(QuasiChecks),
    ]
}

macro_rules! attempt {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return TaskReport::from_error(&err),
        }
    };
}

/// Errors borrowed from the shared context.
macro_rules! attempt_ref {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return TaskReport::from_error(err),
        }
    };
}

fn outcome(rep: &mut TaskReport, name: String, r: Result<(), MathError>) {
    match r {
        Ok(()) => rep.verdict(name, true, "ok"),
        Err(e) => rep.verdict(name, false, e.to_string()),
    };
}

pub struct Frames;

impl VerificationTask for Frames {
    fn name(&self) -> &'static str {
        "frames"
    }

    fn needs(&self) -> Needs {
        Needs::Symbolic
    }

    fn run(&self, ctx: &Context) -> TaskReport {
        let s = &ctx.res.symbolic;
        let mut rep = TaskReport::new();
        for &r in &s.ranks {
            let fr = attempt!(frame_matrices(&sym_theta(s.char), &sym_kappas(s.char, r)));
            rep.exact(format!("r{r} V relation"), fr.v_relation_defect().is_zero());
            rep.exact(format!("r{r} Cof relation"), fr.cof_relation_defect().is_zero());
            let dets = fr.det_defects();
            rep.exact(format!("r{r} determinants"), dets.iter().all(|d| d.is_zero()));
        }
        for (r, e) in s.pairs() {
            outcome(&mut rep, format!("r{r} e{e} t-frame"), verify_tframe_ee(r, e, s.char));
        }
        rep.finish()
    }
}

pub struct DualFrames;

impl VerificationTask for DualFrames {
    fn name(&self) -> &'static str {
        "dual_frames"
    }

    fn needs(&self) -> Needs {
        Needs::Symbolic
    }

    fn run(&self, ctx: &Context) -> TaskReport {
        let s = &ctx.res.symbolic;
        let mut rep = TaskReport::new();
        for &r in &s.ranks {
            rep.exact(format!("r{r} chi conjugation"), attempt!(chi_conjugation_defect(r, s.char)).is_zero());
            rep.exact(format!("r{r} constant identity"), attempt!(constant_identity_defect(r, s.char)).is_zero());
        }
        for (r, e) in s.pairs() {
            outcome(&mut rep, format!("r{r} e{e} dual t-frame"), verify_dual_tframe_ee(r, e, s.char));
        }
        rep.finish()
    }
}

pub struct Asp;

impl VerificationTask for Asp {
    fn name(&self) -> &'static str {
        "asp"
    }

    fn needs(&self) -> Needs {
        Needs::Symbolic
    }

    fn run(&self, ctx: &Context) -> TaskReport {
        let s = &ctx.res.symbolic;
        let mut rep = TaskReport::new();
        if s.goldens {
            for (name, bad) in attempt!(check_goldens()) {
                let v = if bad.is_empty() { "match".to_string() } else { bad.join("; ") };
                rep.verdict(format!("golden {name}"), bad.is_empty(), v);
            }
            rep.pin("errata", errata().len());
        }
        for (r, e) in s.pairs() {
            let a = asp_check(r, e, s.char);
            let v = format!("top degree {} at t^{}", a.top_degree, a.power);
            rep.verdict(format!("r{r} e{e} almost strictly pure"), a.pass(), v);
        }
        rep.finish()
    }
}

/// Carlitz identities at precision P, plus the rigid analytic trivialization
/// of a lattice module.
pub struct Diffeq;

impl VerificationTask for Diffeq {
    fn name(&self) -> &'static str {
        "diffeq"
    }

    fn needs(&self) -> Needs {
        Needs::Module
    }

    fn run(&self, ctx: &Context) -> TaskReport {
        let n = ctx.numeric();
        let f = &n.field;
        let g = -n.guard;
        let mut rep = TaskReport::new();
        let pi = attempt!(carlitz_pi(f, n.work + 40));
        let c = AnalyticModule::carlitz(f, n.work + 20);
        let e = attempt!(c.exp_eval(std::slice::from_ref(&pi), Rat::from_integer(n.work)));
        rep.degree("Exp_C(pi)", e.value[0].deg_bound(), Rat::from_integer(10 - n.prec));
        let o = attempt!(omega_big_omega(f, n.work, n.t_deg));
        rep.degree("Omega dual equation", attempt!(o.dual_defect()), g);
        rep.degree("omega motive equation", attempt!(o.motive_defect()), g);
        rep.pin("deg pi", fmt_deg(pi.deg()));
        if let Some(Module::Lattice(_)) = &n.module {
            let d = attempt_ref!(ctx.drinfeld());
            let theta = CInf::theta(f);
            let r = d.periods.len();
            let agfs: Vec<_> = attempt!(d
                .periods
                .iter()
                .map(|w| agf_compute(&d.module, std::slice::from_ref(w), n.work))
                .collect::<Result<Vec<_>, _>>());
            let levels = agfs.iter().map(|a| a.levels).max().unwrap_or(0);
            rep.pin("agf levels", levels);
            if let Some(cap) = n.agf_level {
                rep.verdict("agf level", levels <= cap, format!("{levels} of at most {cap}"));
            }
            let ups = attempt!(upsilon_matrix(&drinfeld_tau_rows(&theta, r), &agfs));
            let md = check_frobenius_equation(&tate_mat_from_tpoly(&d.frames.phi_tilde), &ups, Side::Motive, n.t_deg);
            rep.degree("Upsilon motive equation", attempt!(md), g);
            let tr = attempt!(psi_dual(&ups, &d.frames.v, n.t_deg));
            let dd = check_frobenius_equation(&tate_mat_from_tpoly(&d.frames.phi), &tr.psi, Side::Dual, n.t_deg);
            rep.degree("Psi dual equation", attempt!(dd), g);
            let uc = attempt!(normalizer(&d.frames.c));
            let want = o.big_omega.scale(&uc);
            let det = tr.psi.det();
            // det Psi / (u_c Omega) must be a constant in F_q^x
            let zeta = match (det.series_coeff(0), want.series_coeff(0)) {
                (Some(a), Some(b)) => attempt!(a.div(&b)).leading(),
                _ => None,
            };
            match zeta {
                Some((e, z)) if e == Rat::from_integer(0) && f.in_fq(z) && !z.is_zero() => {
                    rep.pin("det Psi / u_c Omega", f.fmt_elem(z));
                    let dd = det.sub(&want.scale(&CInf::constant(f, z))).gauss_deg();
                    rep.degree("det Psi = u_c Omega", dd, g);
                }
                other => {
                    rep.verdict("det Psi = u_c Omega", false, format!("ratio leading term {other:?}"));
                }
            }
            for (i, k) in d.kappa.iter().enumerate() {
                rep.pin(format!("deg kappa_{}", i + 1), fmt_deg(k.deg()));
            }
        }
        rep.finish()
    }
}

/// The terms of x within `width` of its leading degree.
fn head(x: &CInf, width: i64) -> String {
    match x.deg() {
        Some(d) => x.truncate(Rat::from_integer(width) - d).to_string(),
        None => "0".into(),
    }
}

fn third_kind_checks(rep: &mut TaskReport, tk: &ThirdKindReport, ctx: &Context) {
    let g = -ctx.numeric().guard;
    let f = &ctx.numeric().field;
    rep.degree("c_E two forms", tk.ce_defect, g);
    rep.degree("F_eps(y) two routes", tk.feps_defect, g);
    for (j, row) in tk.rows.iter().enumerate() {
        let c = &row.comparison;
        let name = format!("lambda_{} vs formula mod A pi", j + 1);
        match &c.diagnostic {
            Some(d) => rep.verdict(name, false, d.clone()),
            None => rep.verdict(name, c.pass, fmt_deg(c.tail_deg)),
        };
        rep.degree(format!("lambda_{} certificate", j + 1), row.certificate, g);
        rep.degree(format!("extension period {}", j + 1), row.extension_certificate, g);
        rep.a.insert(format!("a_{}", j + 1), fmt_apoly(f, &c.a));
        rep.pin(format!("deg lambda_{}", j + 1), fmt_deg(row.lambda.deg()));
        rep.pin(format!("lambda_{} head", j + 1), head(&row.lambda, 4));
    }
}

pub struct ThirdKind;

impl VerificationTask for ThirdKind {
    fn name(&self) -> &'static str {
        "thirdkind"
    }

    fn needs(&self) -> Needs {
        Needs::Extension
    }

    fn run(&self, ctx: &Context) -> TaskReport {
        let sc = attempt_ref!(ctx.scenario());
        let tk = attempt_ref!(ctx.third_kind());
        let mut rep = TaskReport::new();
        rep.degree("Exp(y_delta) = alpha_delta", sc.y_residual, -sc.guard());
        for (j, fd) in sc.fdelta.iter().enumerate() {
            rep.degree(format!("F_delta(w_{}) two routes", j + 1), fd.defect(), -sc.guard());
        }
        third_kind_checks(&mut rep, tk, ctx);
        rep.pin("scale", sc.scale);
        rep.pin("deg c_E", fmt_deg(sc.ce.deg()));
        rep.finish()
    }
}

pub struct Lemma44;

impl VerificationTask for Lemma44 {
    fn name(&self) -> &'static str {
        "lemma44"
    }

    fn needs(&self) -> Needs {
        Needs::Extension
    }

    fn run(&self, ctx: &Context) -> TaskReport {
        let sc = attempt_ref!(ctx.scenario());
        let lem = attempt!(sc.lemma44());
        let mut rep = TaskReport::new();
        rep.degree("g_y difference equation on V_E", lem.defect, -sc.guard());
        rep.pin("agf levels", lem.levels);
        if let Some(cap) = ctx.numeric().agf_level {
            rep.verdict("agf level", lem.levels <= cap, format!("{} of at most {cap}", lem.levels));
        }
        rep.finish()
    }
}

pub struct Pipeline39;

impl VerificationTask for Pipeline39 {
    fn name(&self) -> &'static str {
        "pipeline39"
    }

    fn needs(&self) -> Needs {
        Needs::Extension
    }

    fn run(&self, ctx: &Context) -> TaskReport {
        let sc = attempt_ref!(ctx.scenario());
        let parts = attempt_ref!(ctx.parts());
        let pr = attempt!(sc.pipeline(parts));
        let f = &sc.field;
        let g = -sc.guard();
        let mut rep = TaskReport::new();
        rep.degree("h by specialness vs closed form", pr.h_specialness_vs_closed, g);
        rep.degree("h vs h_alpha", pr.h_vs_h_alpha, g);
        rep.degree("g equation", pr.equation_defect, g);
        rep.degree("Upsilon motive equation", pr.motive_defect, g);
        rep.degree("Psi dual equation", pr.dual_defect, g);
        for (j, d) in pr.relation_agf_defects.iter().enumerate() {
            rep.degree(format!("relation {} via AGF", j + 1), *d, g);
        }
        for (j, d) in pr.theta_value_defects.iter().enumerate() {
            rep.degree(format!("value {} at theta", j + 1), *d, g);
        }
        let tk = ctx.third_kind().ok();
        for (j, a) in pr.a.iter().enumerate() {
            let key = format!("a_{}", j + 1);
            match a {
                Ok(x) => {
                    rep.a.insert(key.clone(), fmt_apoly(f, &x.a));
                    rep.degree(format!("{key} residual"), x.residual, g);
                    if let Some(tk) = tk {
                        let same = tk.rows[j].comparison.a == x.a;
                        rep.verdict(
                            format!("{key} matches third-kind formula"),
                            same,
                            fmt_apoly(f, &tk.rows[j].comparison.a),
                        );
                    }
                }
                Err(e) => {
                    rep.verdict(format!("{key} in F_q[t]"), false, e.clone());
                }
            }
        }
        match &pr.series_route {
            Ok(s) => {
                rep.degree("series route: wp round trip", s.wp_defect, g);
                rep.degree("series route: closed form", s.closed_form_defect, g);
                rep.degree("series route: g equation", s.equation_defect, g);
                for (j, a) in s.a.iter().enumerate() {
                    let v = a.as_ref().map(|x| fmt_apoly(f, &x.a));
                    rep.verdict(format!("series route a_{}", j + 1), v.is_ok(), v.unwrap_or_else(|e| e.clone()));
                }
            }
            Err(e @ MathError::NormNotLessThanOne(_)) => {
                rep.verdict("series route", true, format!("not applicable: {e}"));
            }
            Err(e) => {
                rep.verdict("series route", false, e.to_string());
            }
        }
        rep.pin("omega convention", &pr.omega_convention);
        rep.finish()
    }
}

/// Quasi-periodic values by the closed form, the series and the AGF, for
/// delta = tau^k at every period; with a delta, also F_delta and F_eps.
pub struct QuasiChecks;

impl VerificationTask for QuasiChecks {
    fn name(&self) -> &'static str {
        "quasichecks"
    }

    fn needs(&self) -> Needs {
        Needs::Module
    }

    fn run(&self, ctx: &Context) -> TaskReport {
        let n = ctx.numeric();
        let g = -n.guard;
        let mut rep = TaskReport::new();
        let carlitz;
        let (m, periods, ks): (&AnalyticModule, Vec<CInf>, Vec<usize>) = match n.module.as_ref() {
            Some(Module::Lattice(_)) => {
                let d = attempt_ref!(ctx.drinfeld());
                let r = d.periods.len();
                (&d.module, d.periods.clone(), (1..r).collect())
            }
            _ => {
                carlitz = AnalyticModule::carlitz(&n.field, n.work + 20);
                (&carlitz, vec![attempt!(carlitz_pi(&n.field, n.work + 40))], vec![1, 2])
            }
        };
        for (j, w) in periods.iter().enumerate() {
            let agf = attempt!(agf_compute(m, std::slice::from_ref(w), n.work));
            for &k in &ks {
                let delta = tau_power_delta(&n.field, k);
                let closed = attempt!(quasi_tau_closed(m, k, w, n.work));
                let series = attempt!(quasi_value_series(m, &delta, std::slice::from_ref(w), n.work));
                let via_agf = attempt!(quasi_value(&delta, &agf));
                let tag = format!("F_tau^{k}(w_{})", j + 1);
                rep.degree(format!("{tag} series vs AGF"), series.sub(&via_agf).deg_bound(), g);
                rep.degree(format!("{tag} closed form vs AGF"), closed.sub(&via_agf).deg_bound(), g);
            }
        }
        if n.betas.is_some() {
            let sc = attempt_ref!(ctx.scenario());
            for (j, fd) in sc.fdelta.iter().enumerate() {
                rep.degree(format!("F_delta(w_{}) series vs AGF", j + 1), fd.defect(), g);
            }
            let fe = attempt!(sc.f_eps());
            rep.degree("F_eps(y_delta) series vs AGF", fe.defect(), g);
        }
        rep.finish()
    }
}
