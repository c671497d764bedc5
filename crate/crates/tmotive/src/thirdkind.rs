//! Periods of the third kind of a Drinfeld module E for
//! delta(t) = beta_1 tau + ... + beta_{r-1} tau^{r-1}: the closed formula
//! through the point alpha_delta of E_0 = wedge^{r-1} E, the period of the
//! extension itself, and the AGF identity tying the two together.

use crate::agf::{
    agf_compute, drinfeld_tau_rows, normalizer, omega_big_omega, psi_dual, quasi_tau_closed, quasi_value,
    upsilon_matrix, AgfValue, OmegaPair, Trivialization,
};
use crate::analytic::{carlitz_pi, vec_defect, vec_deg, AnalyticModule, QuasiPeriodic, Target};
use crate::cinf::{cmp_deg, max_deg, CInf};
use crate::error::MathError;
use crate::field::{FieldConfig, FqElem};
use crate::lattice::{lattice_to_drinfeld, LatticeDef, LatticeReport};
use crate::motives::{frame_matrices, is_special, FrameSet};
use crate::ring::{Mat, Ring, Twist};
use crate::skew::{SkewMat, SkewPoly, Var};
use crate::tate::{inner_product, tate_mat_from_cinf, tate_mat_from_tpoly, try_twist_mat, TateElem, TateMat};
use crate::tmodule::{build_ee, carlitz_tensor, drinfeld, extension_module, BiderivationDef};
use crate::tpoly::TPoly;
use crate::Rat;
use std::cmp::Ordering;

fn below(d: Option<Rat>, bound: Rat) -> bool {
    cmp_deg(d, Some(bound)) == Ordering::Less
}

fn sign(field: &FieldConfig, k: usize) -> CInf {
    CInf::from_int(field, if k % 2 == 0 { 1 } else { -1 })
}

fn row_gauss(m: &TateMat) -> Option<Rat> {
    m.entries().fold(None, |acc, x| max_deg(acc, x.gauss_deg()))
}

// ---------------------------------------------------------------------------
// The constant c_E and the point alpha_delta.

/// c_E = ((-1)^{(r-1)(r-2)/2} prod_{j=1}^{r-2} kappa_r^{(-j)} ((-1)^{r-1} kappa_r^{(2-r)})^{1/(q-1)})^{-1}.
pub fn constant_ce(kappa: &[CInf]) -> Result<CInf, MathError> {
    let r = kappa.len();
    if r < 2 {
        return Err(MathError::DimensionMismatch("c_E needs rank at least 2".into()));
    }
    let field = kappa[0].field();
    let kr = &kappa[r - 1];
    let mut x = sign(field, (r - 1) * (r - 2) / 2);
    for j in 1..r - 1 {
        x = x.mul(&kr.twist(-(j as i64)));
    }
    let inner = sign(field, r - 1).mul(&kr.twist(2 - r as i64));
    let root = inner.root(field.q() - 1)?;
    x.mul(&root).inv()
}

/// The same constant through the normalizer: u_c^{-1} (-1)^{r-1} kappa_r det(V_E)^{-1}.
pub fn constant_ce_via_normalizer(fr: &FrameSet<CInf>) -> Result<CInf, MathError> {
    let r = fr.r;
    let field = fr.theta.field();
    let uc = normalizer(&fr.c)?;
    let det_v = fr.v.det().coeff(0);
    sign(field, r - 1).mul(&fr.kappa[r - 1]).div(&uc.mul(&det_v))
}

/// Defect between two values of c_E, which agree up to a factor in F_q^x
/// coming from the choice of (q-1)-th root.
pub fn ce_defect(a: &CInf, b: &CInf) -> Option<Rat> {
    let field = a.field();
    field
        .elements()
        .into_iter()
        .filter(|z| !z.is_zero())
        .map(|z| a.sub(&b.scale(z)).deg_bound())
        .min_by(|x, y| cmp_deg(*x, *y))
        .flatten()
}

/// alpha_delta = c_E (beta_{r-1}, ..., beta_1)^tr.
pub fn alpha_delta(ce: &CInf, betas: &[CInf]) -> Vec<CInf> {
    betas.iter().rev().map(|b| ce.mul(b)).collect()
}

/// epsilon(t) = tau s~_1 on E_0, a 1 x (r-1) skew matrix.
pub fn epsilon(field: &FieldConfig, r: usize) -> SkewMat<CInf> {
    Mat::from_fn(1, r - 1, |_, k| {
        if k == 0 {
            SkewPoly::monomial(Var::Tau, CInf::one(field), 1)
        } else {
            SkewPoly::tau(vec![CInf::zero(field)])
        }
    })
}

/// Rows of m_{E_0} = ((-1)^{r-1} tau s~_1, s~_{r-1}, ..., s~_1)^tr, premultiplied by tau^shift.
pub fn m_e0_rows(field: &FieldConfig, r: usize, shift: usize) -> SkewMat<CInf> {
    let z = SkewPoly::tau(vec![CInf::zero(field)]);
    Mat::from_fn(r, r - 1, |i, k| {
        if i == 0 {
            if k == 0 {
                SkewPoly::monomial(Var::Tau, sign(field, r - 1), 1 + shift)
            } else {
                z.clone()
            }
        } else if k == r - 1 - i {
            SkewPoly::monomial(Var::Tau, CInf::one(field), shift)
        } else {
            z.clone()
        }
    })
}

/// <m_{E_0} | alpha> for a point alpha of E_0.
fn m_e0_at_point(r: usize, alpha: &[CInf]) -> Vec<CInf> {
    let field = alpha[0].field();
    (0..r).map(|i| if i == 0 { sign(field, r - 1).mul(&alpha[0].twist(1)) } else { alpha[r - 1 - i].clone() }).collect()
}

fn const_mat(m: &Mat<TPoly<CInf>>) -> Mat<CInf> {
    m.map(|p| p.coeff(0))
}

/// Inverse of a constant matrix through its adjugate.
fn const_inverse(m: &Mat<CInf>) -> Result<Mat<CInf>, MathError> {
    let (_, adj, det) = m.cof_adj_det();
    let inv = det.inv()?;
    Ok(adj.map(|x| x.mul(&inv)))
}

// ---------------------------------------------------------------------------
// Quasi-periodic values and the logarithms.

#[derive(Clone, Debug)]
pub struct TwoRoute {
    pub series: CInf,
    pub agf: CInf,
}

impl TwoRoute {
    pub fn defect(&self) -> Option<Rat> {
        self.series.sub(&self.agf).deg_bound()
    }
}

/// F_eps(y) for the E_0 biderivation eps(t) = tau s~_1, through the
/// quasi-periodic series and through <eps | G_y(psi_0)> at t = theta.
pub fn f_eps(e0: &AnalyticModule, y: &[CInf], target: i64) -> Result<TwoRoute, MathError> {
    let r = e0.dim() + 1;
    let eps = epsilon(e0.field(), r);
    let bd = BiderivationDef::new(eps.clone());
    let qf = QuasiPeriodic::new(e0, &Target::Trivial, &bd)?;
    let series = qf.eval(y, Rat::from_integer(target))?.value[0].clone();
    let g = agf_compute(e0, y, target)?;
    let agf = quasi_value(&eps, &g)?;
    Ok(TwoRoute { series, agf })
}

/// F_delta(w) for the Carlitz-valued biderivation delta, through the
/// quasi-periodic series and through the extension's exponential at (w, 0).
pub fn f_delta_carlitz(e: &AnalyticModule, betas: &[CInf], w: &CInf, target: i64) -> Result<TwoRoute, MathError> {
    let theta = &e.theta;
    let bd = BiderivationDef::from_betas(1, 1, betas, theta);
    let qf = QuasiPeriodic::new(e, &Target::Module(carlitz_tensor(theta, 1)), &bd)?;
    let series = qf.eval(std::slice::from_ref(w), Rat::from_integer(target))?.value[0].clone();
    let ext = extension_module(&e.module, &bd, theta);
    let em = AnalyticModule::new(ext.module, theta, e.rel);
    let v = em.exp_eval(&[w.clone(), CInf::zero(w.field())], Rat::from_integer(target))?;
    Ok(TwoRoute { series, agf: v.value[1].clone() })
}

/// lambda = -Log_C(F_delta(w)) with the certificate deg(Exp_C(lambda) + F_delta(w)).
pub fn lambda_oracle(carlitz: &AnalyticModule, fdelta: &CInf, target: i64) -> Result<(CInf, Option<Rat>), MathError> {
    let t = Rat::from_integer(target);
    let lam = carlitz.log_eval(std::slice::from_ref(fdelta), t)?.value[0].neg();
    let back = carlitz.exp_eval(std::slice::from_ref(&lam), t)?.value[0].add(fdelta);
    Ok((lam, back.deg_bound()))
}

/// lambda_j = -c_E^{-1} [sum_{l=2}^r y_{r-l+1} F_{tau^{l-1}}(w_j) + (-1)^{r-1} F_eps(y) w_j],
/// without the a_j(theta) pi~ term. `ftau[k-1] = F_{tau^k}(w_j)`.
pub fn rhs_formula(ce: &CInf, y: &[CInf], ftau: &[CInf], feps: &CInf, w: &CInf) -> Result<CInf, MathError> {
    let r = y.len() + 1;
    let field = w.field();
    let mut acc = CInf::zero(field);
    for l in 2..=r {
        acc = acc.add(&y[r - l].mul(&ftau[l - 2]));
    }
    acc = acc.add(&sign(field, r - 1).mul(feps).mul(w));
    Ok(acc.div(ce)?.neg())
}

// ---------------------------------------------------------------------------
// Comparison modulo A pi~.

#[derive(Clone, Debug)]
pub struct ApiComparison {
    pub pass: bool,
    /// a_0, a_1, ... with x - y = (a(theta) + tail) pi~.
    pub a: Vec<FqElem>,
    pub tail_deg: Option<Rat>,
    pub diagnostic: Option<String>,
}

/// Format a in F_q[t] as "t^2 + 1".
pub fn fmt_apoly(field: &FieldConfig, a: &[FqElem]) -> String {
    let mut parts = Vec::new();
    for (k, c) in a.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let one = field.from_int(1);
        let cs = if *c == one && k > 0 {
            String::new()
        } else {
            field.as_prime(*c).map_or_else(|| field.fmt_elem(*c), |v| v.to_string())
        };
        let mono = match k {
            0 => String::new(),
            1 => "t".to_string(),
            _ => format!("t^{k}"),
        };
        let sep = if !cs.is_empty() && !mono.is_empty() { "*" } else { "" };
        parts.push(format!("{cs}{sep}{mono}"));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Split z into a(theta) + tail with a in F_q[theta]; fails on fractional
/// exponents or coefficients outside F_q among the nonnegative-degree terms.
fn split_a(z: &CInf) -> (Vec<FqElem>, CInf, Option<String>) {
    let field = z.field();
    let mut a: Vec<FqElem> = Vec::new();
    let mut diag = None;
    let mut tail = z.clone();
    for (e, c) in z.terms() {
        if e < Rat::from_integer(0) {
            continue;
        }
        if !e.is_integer() {
            diag.get_or_insert_with(|| format!("fractional exponent {e} in the quotient"));
            continue;
        }
        if !field.in_fq(c) {
            diag.get_or_insert_with(|| format!("coefficient {} of theta^{e} is not in F_q", field.fmt_elem(c)));
            continue;
        }
        let k = e.to_integer() as usize;
        if a.len() <= k {
            a.resize(k + 1, field.from_int(0));
        }
        a[k] = c;
        tail = tail.sub(&CInf::monomial(field, c, e));
    }
    (a, tail, diag)
}

/// Is x - y in A pi~ up to a tail of degree below -guard?
pub fn compare_mod_api(x: &CInf, y: &CInf, pi: &CInf, guard: Rat) -> Result<ApiComparison, MathError> {
    let z = x.sub(y).div(pi)?;
    let (a, tail, diagnostic) = split_a(&z);
    let tail_deg = tail.deg_bound();
    let pass = diagnostic.is_none() && below(tail_deg, -guard);
    Ok(ApiComparison { pass, a, tail_deg, diagnostic })
}

/// Read a series coefficient as an element of F_q: the nonnegative-degree
/// part must be a single constant in F_q, the rest below -guard.
fn fq_constant(x: &CInf, guard: Rat) -> Result<FqElem, String> {
    let (a, tail, diag) = split_a(x);
    if let Some(d) = diag {
        return Err(d);
    }
    if a.len() > 1 {
        return Err(format!("positive theta-degree {} in a t-coefficient", a.len() - 1));
    }
    if !below(tail.deg_bound(), -guard) {
        return Err(format!("tail of degree {:?} above the guard", tail.deg_bound()));
    }
    Ok(a.first().copied().unwrap_or_else(|| x.field().from_int(0)))
}

// ---------------------------------------------------------------------------
// Scenarios.

#[derive(Clone, Debug)]
pub struct ScenarioInput {
    pub field: FieldConfig,
    /// Lattice basis w_1..w_r.
    pub basis: Vec<CInf>,
    /// beta_1..beta_{r-1}.
    pub betas: Vec<CInf>,
    /// Nominal theta-precision P.
    pub prec: i64,
    /// Identities pass below -guard; None means P/2.
    pub guard: Option<Rat>,
    /// Working precision for kappa and all series.
    pub work: i64,
    pub t_deg: usize,
    /// Largest k tried when scaling the betas by theta^{-k} for admission.
    pub max_scale: u32,
}

#[derive(Debug)]
pub struct Scenario {
    pub field: FieldConfig,
    pub theta: CInf,
    pub r: usize,
    pub prec: i64,
    pub guard: Rat,
    pub work: i64,
    pub t_deg: usize,
    pub pi: CInf,
    pub periods: Vec<CInf>,
    pub kappa: Vec<CInf>,
    pub lattice: LatticeReport,
    pub module: AnalyticModule,
    pub e0: AnalyticModule,
    pub carlitz: AnalyticModule,
    pub frames: FrameSet<CInf>,
    /// The betas were multiplied by theta^{-scale} for admission.
    pub scale: u32,
    pub betas: Vec<CInf>,
    pub ce: CInf,
    pub alpha: Vec<CInf>,
    pub y: Vec<CInf>,
    /// deg(Exp_{psi_0}(y) - alpha).
    pub y_residual: Option<Rat>,
    /// F_delta(w_j), both routes.
    pub fdelta: Vec<TwoRoute>,
    pub lambda: Vec<CInf>,
    pub lambda_cert: Vec<Option<Rat>>,
}

impl Scenario {
    pub fn guard(&self) -> Rat {
        self.guard
    }

    pub fn build(input: &ScenarioInput) -> Result<Scenario, MathError> {
        let field = input.field.clone();
        let theta = CInf::theta(&field);
        let r = input.basis.len();
        if r < 2 || input.betas.len() != r - 1 {
            return Err(MathError::DimensionMismatch(format!(
                "rank {r} needs {} betas, got {}",
                r.saturating_sub(1),
                input.betas.len()
            )));
        }
        let w = input.work;
        let lat = lattice_to_drinfeld(&LatticeDef { basis: input.basis.clone() }, w)?;
        let kappa = lat.kappa.clone();
        let rel = w + 20;
        let module = AnalyticModule::drinfeld(&theta, &kappa, rel);
        let e0 = AnalyticModule::new(build_ee(r, 0, &theta, &kappa), &theta, rel);
        let carlitz = AnalyticModule::carlitz(&field, rel);
        let frames = frame_matrices(&theta, &kappa)?;
        let pi = carlitz_pi(&field, w + 40)?;
        let ce = constant_ce(&kappa)?;
        let mut last_err = None;
        for k in 0..=input.max_scale {
            let s = CInf::theta_pow(&field, Rat::from_integer(-(k as i64)));
            let betas: Vec<CInf> = input.betas.iter().map(|b| b.mul(&s)).collect();
            match admit(&module, &e0, &carlitz, &ce, &betas, &input.basis, w) {
                Ok(a) => {
                    return Ok(Scenario {
                        field,
                        theta,
                        r,
                        prec: input.prec,
                        guard: input.guard.unwrap_or(Rat::new(input.prec, 2)),
                        work: w,
                        t_deg: input.t_deg,
                        pi,
                        periods: input.basis.clone(),
                        kappa,
                        lattice: lat.report,
                        module,
                        e0,
                        carlitz,
                        frames,
                        scale: k,
                        betas,
                        ce,
                        alpha: a.alpha,
                        y: a.y,
                        y_residual: a.y_residual,
                        fdelta: a.fdelta,
                        lambda: a.lambda,
                        lambda_cert: a.cert,
                    })
                }
                Err(e @ MathError::OutsideLogRadius(_)) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or_else(|| MathError::OutsideLogRadius("no admission attempt".into())))
    }

    /// F_{tau^k}(w_j), k = 1..r-1.
    pub fn quasi_periods(&self, j: usize) -> Result<Vec<CInf>, MathError> {
        (1..self.r).map(|k| quasi_tau_closed(&self.module, k, &self.periods[j], self.work)).collect()
    }

    pub fn f_eps(&self) -> Result<TwoRoute, MathError> {
        f_eps(&self.e0, &self.y, self.work)
    }
}

struct Admitted {
    alpha: Vec<CInf>,
    y: Vec<CInf>,
    y_residual: Option<Rat>,
    fdelta: Vec<TwoRoute>,
    lambda: Vec<CInf>,
    cert: Vec<Option<Rat>>,
}

fn admit(
    module: &AnalyticModule,
    e0: &AnalyticModule,
    carlitz: &AnalyticModule,
    ce: &CInf,
    betas: &[CInf],
    periods: &[CInf],
    w: i64,
) -> Result<Admitted, MathError> {
    let t = Rat::from_integer(w);
    let alpha = alpha_delta(ce, betas);
    let y = e0.log_eval(&alpha, t)?.value;
    let back = e0.exp_eval(&y, t)?.value;
    let y_residual = vec_defect(&back, &alpha);
    let mut fdelta = Vec::new();
    let mut lambda = Vec::new();
    let mut cert = Vec::new();
    for p in periods {
        let f = f_delta_carlitz(module, betas, p, w)?;
        let (l, c) = lambda_oracle(carlitz, &f.series, w)?;
        fdelta.push(f);
        lambda.push(l);
        cert.push(c);
    }
    Ok(Admitted { alpha, y, y_residual, fdelta, lambda, cert })
}

// ---------------------------------------------------------------------------
// The third-kind formula.

#[derive(Clone, Debug)]
pub struct ThirdKindRow {
    pub lambda: CInf,
    pub rhs: CInf,
    pub comparison: ApiComparison,
    /// deg(Exp_C(lambda) + F_delta(w)).
    pub certificate: Option<Rat>,
    /// deg of the second coordinate of Exp_{G_delta}((w, lambda)).
    pub extension_certificate: Option<Rat>,
}

#[derive(Clone, Debug)]
pub struct ThirdKindReport {
    pub ce_defect: Option<Rat>,
    pub feps: CInf,
    pub feps_defect: Option<Rat>,
    pub rows: Vec<ThirdKindRow>,
}

impl ThirdKindReport {
    pub fn pass(&self, guard: Rat) -> bool {
        below(self.ce_defect, -guard)
            && below(self.feps_defect, -guard)
            && self
                .rows
                .iter()
                .all(|r| r.comparison.pass && below(r.certificate, -guard) && below(r.extension_certificate, -guard))
    }
}

impl Scenario {
    pub fn third_kind(&self) -> Result<ThirdKindReport, MathError> {
        let guard = self.guard();
        let ce2 = constant_ce_via_normalizer(&self.frames)?;
        let ce_defect = ce_defect(&self.ce, &ce2);
        let fe = self.f_eps()?;
        let feps_defect = fe.defect();
        let bd = BiderivationDef::from_betas(1, 1, &self.betas, &self.theta);
        let ext = extension_module(&self.module.module, &bd, &self.theta);
        let em = AnalyticModule::new(ext.module, &self.theta, self.module.rel);
        let mut rows = Vec::new();
        for j in 0..self.r {
            let ftau = self.quasi_periods(j)?;
            let rhs = rhs_formula(&self.ce, &self.y, &ftau, &fe.series, &self.periods[j])?;
            let lambda = self.lambda[j].clone();
            let comparison = compare_mod_api(&lambda, &rhs, &self.pi, guard)?;
            let v = em.exp_eval(&[self.periods[j].clone(), lambda.clone()], Rat::from_integer(self.work))?;
            rows.push(ThirdKindRow {
                lambda,
                rhs,
                comparison,
                certificate: self.lambda_cert[j],
                extension_certificate: v.value[1].deg_bound(),
            });
        }
        Ok(ThirdKindReport { ce_defect, feps: fe.series, feps_defect, rows })
    }
}

// ---------------------------------------------------------------------------
// The difference equation for g_y on E_0.

/// g_y = -<tau m_{E_0} | G_y(psi_0)>^tr Cof(V_E), a 1 x r row.
pub fn g_row(fr: &FrameSet<CInf>, g: &AgfValue) -> Result<TateMat, MathError> {
    let field = fr.theta.field();
    let rows = m_e0_rows(field, fr.r, 1);
    let ip = inner_product(&rows, &g.column())?;
    let w = tate_mat_from_cinf(&const_mat(&fr.v.cofactor()));
    Ok(ip.transpose().mul(&w).map(|x| x.neg()))
}

/// h_alpha = <U~_1 m_{E_0} | alpha>^tr Cof(V_E) with Cof(Phi~_E) = U~_0 + U~_1 t.
pub fn h_alpha(fr: &FrameSet<CInf>, alpha: &[CInf]) -> Mat<CInf> {
    let u1 = fr.cof_phi_tilde.map(|p| p.coeff(1));
    let m = m_e0_at_point(fr.r, alpha);
    let col = Mat::from_fn(fr.r, 1, |i, _| m[i].clone());
    u1.mul(&col).transpose().mul(&const_mat(&fr.v.cofactor()))
}

/// Gauss degree of g^{(-1)} Cof(Phi_E) - g - h.
pub fn vext_defect(fr: &FrameSet<CInf>, g: &TateMat, h: &TateMat) -> Result<Option<Rat>, MathError> {
    let gm = try_twist_mat(g, -1)?;
    let lhs = gm.mul(&tate_mat_from_tpoly(&fr.cof_phi));
    Ok(row_gauss(&lhs.sub(g).sub(h)))
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub defect: Option<Rat>,
    pub levels: usize,
}

/// The E_0 difference equation for an arbitrary pair Exp_{psi_0}(y) = alpha.
pub fn verify_lemma_vext(
    e0: &AnalyticModule,
    fr: &FrameSet<CInf>,
    alpha: &[CInf],
    y: &[CInf],
    target: i64,
) -> Result<LemmaReport, MathError> {
    let g = agf_compute(e0, y, target)?;
    let row = g_row(fr, &g)?;
    let h = tate_mat_from_cinf(&h_alpha(fr, alpha));
    Ok(LemmaReport { defect: vext_defect(fr, &row, &h)?, levels: g.levels })
}

// ---------------------------------------------------------------------------
// The AGF pipeline.

/// h = -u_c^{-1} Phi~_delta Phi~_E^{-1} (V_E^{-1})^tr from the specialness row.
pub fn h_vector(fr: &FrameSet<CInf>, betas: &[CInf]) -> Result<Vec<TPoly<CInf>>, MathError> {
    let bd = BiderivationDef::from_betas(1, 1, betas, &fr.theta);
    let (special, row) = is_special(&fr.theta, &fr.kappa, &bd)?;
    let row = match (special, row) {
        (true, Some(r)) => r,
        _ => return Err(MathError::IdentityFailed("delta is not special".into())),
    };
    let uinv = normalizer(&fr.c)?.inv()?;
    let vinv_t = const_inverse(&const_mat(&fr.v))?.transpose();
    Ok((0..fr.r)
        .map(|j| {
            let mut acc = TPoly::constant(CInf::zero(fr.theta.field()));
            for (i, p) in row.iter().enumerate() {
                acc = acc.add(&p.scale(vinv_t.get(i, j)));
            }
            acc.scale(&uinv).neg()
        })
        .collect())
}

/// u_c^{-1} (beta_1, ..., beta_{r-1}, 0) (V_E^{-1})^tr.
pub fn h_closed(fr: &FrameSet<CInf>, betas: &[CInf]) -> Result<Vec<CInf>, MathError> {
    let uinv = normalizer(&fr.c)?.inv()?;
    let vinv_t = const_inverse(&const_mat(&fr.v))?.transpose();
    Ok((0..fr.r)
        .map(|j| {
            let mut acc = CInf::zero(fr.theta.field());
            for (i, b) in betas.iter().enumerate() {
                acc = acc.add(&b.mul(vinv_t.get(i, j)));
            }
            acc.mul(&uinv)
        })
        .collect())
}

fn poly_row_defect(a: &[TPoly<CInf>], b: &[CInf]) -> Option<Rat> {
    let mut d = None;
    for (p, c) in a.iter().zip(b) {
        d = max_deg(d, p.coeff(0).sub(c).deg_bound());
        for k in 1..p.coeffs().len() {
            d = max_deg(d, p.coeff(k).deg_bound());
        }
    }
    d
}

fn poly_row_mat(h: &[TPoly<CInf>]) -> TateMat {
    Mat::from_fn(1, h.len(), |_, j| TateElem::from_tpoly(&h[j]))
}

#[derive(Clone, Debug)]
pub struct RecoveredA {
    pub a: Vec<FqElem>,
    /// Degree of the largest coefficient left after removing a(t).
    pub residual: Option<Rat>,
}

#[derive(Clone, Debug)]
pub struct SeriesRoute {
    /// Gauss degree of h Cof(Psi).
    pub norm: Option<Rat>,
    /// deg of u^{(-1)} - u - h Cof(Psi).
    pub wp_defect: Option<Rat>,
    /// Series solution against the pole-by-pole closed form.
    pub closed_form_defect: Option<Rat>,
    /// Difference equation for the closed form.
    pub equation_defect: Option<Rat>,
    pub a: Vec<Result<RecoveredA, String>>,
}

/// The normalization of omega and Omega used throughout.
pub const OMEGA_CONVENTION: &str = "omega = G_pi(t; C), Omega = 1/omega^(1), Omega^(-1)(theta) = -pi";

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub omega_convention: String,
    pub h_specialness_vs_closed: Option<Rat>,
    pub h_vs_h_alpha: Option<Rat>,
    pub equation_defect: Option<Rat>,
    pub relation_agf_defects: Vec<Option<Rat>>,
    /// bracket_j(theta) + a_j(theta) pi~ for the recovered a_j.
    pub theta_value_defects: Vec<Option<Rat>>,
    pub a: Vec<Result<RecoveredA, String>>,
    /// The series solution, or why it was skipped.
    pub series_route: Result<SeriesRoute, MathError>,
    pub motive_defect: Option<Rat>,
    pub dual_defect: Option<Rat>,
}

impl PipelineReport {
    pub fn pass(&self, guard: Rat) -> bool {
        let b = |d: &Option<Rat>| below(*d, -guard);
        b(&self.h_specialness_vs_closed)
            && b(&self.h_vs_h_alpha)
            && b(&self.equation_defect)
            && self.relation_agf_defects.iter().all(b)
            && self.theta_value_defects.iter().all(b)
            && self.a.iter().all(|x| x.is_ok())
            && b(&self.motive_defect)
            && b(&self.dual_defect)
            && match &self.series_route {
                Ok(s) => {
                    b(&s.wp_defect)
                        && b(&s.closed_form_defect)
                        && b(&s.equation_defect)
                        && s.a.iter().all(|x| x.is_ok())
                }
                Err(MathError::NormNotLessThanOne(_)) => true,
                Err(_) => false,
            }
    }
}

/// Read a_j from the series Omega * bracket_j, whose t-coefficients must be
/// constants in F_q.
fn recover_a(series: &TateElem, guard: Rat) -> Result<RecoveredA, String> {
    let t = series.trunc().ok_or("expected a series")?;
    let field = series.field().clone();
    let mut a = Vec::new();
    let mut residual = None;
    for k in 0..=t {
        let c = series.series_coeff(k).unwrap_or_else(|| CInf::zero(&field));
        let v = fq_constant(&c, guard).map_err(|e| format!("t^{k}: {e}"))?;
        residual = max_deg(residual, c.sub(&CInf::constant(&field, v)).deg_bound());
        a.push(v);
    }
    while a.last().map_or(false, |c| c.is_zero()) {
        a.pop();
    }
    Ok(RecoveredA { a, residual })
}

pub fn apoly_at_theta(field: &FieldConfig, a: &[FqElem]) -> CInf {
    let mut acc = CInf::zero(field);
    for (k, c) in a.iter().enumerate() {
        acc = acc.add(&CInf::monomial(field, *c, Rat::from_integer(k as i64)));
    }
    acc
}

pub struct PipelineParts {
    pub omega: OmegaPair,
    pub agfs: Vec<AgfValue>,
    pub triv: Trivialization,
}

impl Scenario {
    pub fn trivialization(&self) -> Result<PipelineParts, MathError> {
        let agfs: Vec<AgfValue> = self
            .periods
            .iter()
            .map(|w| agf_compute(&self.module, std::slice::from_ref(w), self.work))
            .collect::<Result<_, _>>()?;
        let ups = upsilon_matrix(&drinfeld_tau_rows(&self.theta, self.r), &agfs)?;
        let triv = psi_dual(&ups, &self.frames.v, self.t_deg)?;
        let omega = omega_big_omega(&self.field, self.work, self.t_deg)?;
        Ok(PipelineParts { omega, agfs, triv })
    }

    pub fn lemma44(&self) -> Result<LemmaReport, MathError> {
        verify_lemma_vext(&self.e0, &self.frames, &self.alpha, &self.y, self.work)
    }

    pub fn pipeline(&self, parts: &PipelineParts) -> Result<PipelineReport, MathError> {
        let guard = self.guard();
        let fr = &self.frames;
        let field = &self.field;
        let t_deg = self.t_deg;
        let uc = normalizer(&fr.c)?;

        let h = h_vector(fr, &self.betas)?;
        let hc = h_closed(fr, &self.betas)?;
        let ha = h_alpha(fr, &self.alpha);
        let h_specialness_vs_closed = poly_row_defect(&h, &hc);
        let h_vs_h_alpha = poly_row_defect(&h, &ha.row(0));

        let gy = agf_compute(&self.e0, &self.y, self.work)?;
        let g = g_row(fr, &gy)?;
        let hm = poly_row_mat(&h);
        let equation_defect = vext_defect(fr, &g, &hm)?;

        let ups = &parts.triv.upsilon;
        let vt = tate_mat_from_cinf(&const_mat(&fr.v).transpose());
        let gvu = g.mul(&vt).mul(ups);

        let bd = BiderivationDef::from_betas(1, 1, &self.betas, &self.theta);
        let ext = extension_module(&self.module.module, &bd, &self.theta);
        let em = AnalyticModule::new(ext.module, &self.theta, self.module.rel);
        let delta_row: SkewMat<CInf> = Mat::from_rows(vec![vec![bd.delta_t.get(0, 0).clone()]]);
        let tt = TateElem::from_tpoly(&TPoly::t_minus(&self.theta));
        let mut relation_agf_defects = Vec::new();
        let mut theta_value_defects = Vec::new();
        let mut a = Vec::new();
        let mut brackets1 = Vec::new();
        for j in 0..self.r {
            let ge = agf_compute(&em, &[self.periods[j].clone(), self.lambda[j].clone()], self.work)?;
            let g1 = ge.entries[1].clone();
            let g1t = g1.try_twist(1)?;
            let f = Mat::from_rows(vec![vec![ge.entries[0].clone()]]);
            let dd = inner_product(&delta_row, &f)?;
            let rel = tt.try_mul(&g1)?.sub(dd.get(0, 0)).sub(&g1t);
            relation_agf_defects.push(rel.gauss_deg());
            brackets1.push(g1t.clone());
            let bracket = g1t.sub(&gvu.get(0, j).scale(&uc));
            let series = parts.omega.big_omega.try_mul(&bracket.to_series(t_deg))?;
            let rec = recover_a(&series, guard);
            let tv = match (&rec, bracket.eval_theta()) {
                (Ok(ra), Ok(ev)) => match ev.value {
                    Some(v) => v.add(&apoly_at_theta(field, &ra.a).mul(&self.pi)).deg_bound(),
                    None => Some(Rat::from_integer(i64::MAX / 4)),
                },
                _ => Some(Rat::from_integer(i64::MAX / 4)),
            };
            theta_value_defects.push(tv);
            a.push(rec);
        }

        let series_route = self.series_route(parts, &h, &uc, &brackets1);
        let pt = tate_mat_from_tpoly(&fr.phi_tilde);
        let motive_defect = crate::tate::check_frobenius_equation(&pt, ups, crate::tate::Side::Motive, t_deg)?;
        let ph = tate_mat_from_tpoly(&fr.phi);
        let dual_defect = crate::tate::check_frobenius_equation(&ph, &parts.triv.psi, crate::tate::Side::Dual, t_deg)?;
        Ok(PipelineReport {
            omega_convention: OMEGA_CONVENTION.into(),
            h_specialness_vs_closed,
            h_vs_h_alpha,
            equation_defect,
            relation_agf_defects,
            theta_value_defects,
            a,
            series_route,
            motive_defect,
            dual_defect,
        })
    }

    /// g = (sum_{m>=1} (h Cof(Psi))^{(m)}) Cof(Psi)^{-1} when ||h Cof(Psi)|| < 1,
    /// checked against sum_m h^{(m)} (Phi^tr)^{(m)}...(Phi^tr)^{(1)} / prod_i c^{(i)} (t - theta^{q^i}).
    fn series_route(
        &self,
        parts: &PipelineParts,
        h: &[TPoly<CInf>],
        uc: &CInf,
        brackets1: &[TateElem],
    ) -> Result<SeriesRoute, MathError> {
        let t_deg = self.t_deg;
        let guard = self.guard();
        let psi = &parts.triv.psi;
        let cof_psi = psi.cofactor();
        let hm = mat_series(&poly_row_mat(h), t_deg);
        let f = hm.mul(&cof_psi);
        let norm = row_gauss(&f);
        if cmp_deg(norm, Some(Rat::from_integer(0))) != Ordering::Less {
            return Err(MathError::NormNotLessThanOne(format!("||h Cof(Psi)|| has degree {:?}", norm)));
        }
        let stop = Rat::from_integer(-self.work);
        let mut u = Mat::zeros_like(&TateElem::zero(&self.field), 1, self.r);
        let mut fm = f.clone();
        for _ in 0..64 {
            fm = try_twist_mat(&fm, 1)?;
            u = u.add(&fm);
            if below(row_gauss(&fm), stop) {
                break;
            }
        }
        let wp = try_twist_mat(&u, -1)?.sub(&u).sub(&f);
        let wp_defect = row_gauss(&wp);
        let det = psi.det().inv_series(t_deg)?;
        let cof_inv = psi.transpose().map(|x| x.try_mul(&det).expect("series"));
        let g_series = u.mul(&cof_inv);
        let g_closed = closed_form_g(&self.frames, h, self.prec)?;
        let closed_form_defect = row_gauss(&mat_series(&g_closed, t_deg).sub(&g_series));
        let equation_defect = vext_defect(&self.frames, &g_closed, &poly_row_mat(h))?;
        let vt = tate_mat_from_cinf(&const_mat(&self.frames.v).transpose());
        let gvu = g_closed.mul(&vt).mul(&parts.triv.upsilon);
        let mut a = Vec::new();
        for j in 0..self.r {
            let bracket = brackets1[j].sub(&gvu.get(0, j).scale(uc));
            let series = parts.omega.big_omega.try_mul(&bracket.to_series(t_deg))?;
            a.push(recover_a(&series, guard));
        }
        Ok(SeriesRoute { norm, wp_defect, closed_form_defect, equation_defect, a })
    }
}

fn mat_series(m: &TateMat, t_deg: usize) -> TateMat {
    m.map(|x| x.to_series(t_deg))
}

/// Number of terms of the closed form needed to get below theta^{-target}.
/// Term degrees are read off directly while they are reliable and then
/// extrapolated by the factor q once the numerators swamp the precision.
pub fn closed_form_terms(fr: &FrameSet<CInf>, h: &[TPoly<CInf>], target: i64) -> Result<usize, MathError> {
    let r = fr.r;
    let field = fr.theta.field();
    let q = Rat::from_integer(field.q() as i64);
    let phi_t = fr.phi.transpose();
    let mut prod: Mat<TPoly<CInf>> = Mat::identity_like(&TPoly::constant(CInf::one(field)), r);
    let mut cprod = CInf::one(field);
    let stop = Rat::from_integer(-target);
    let mut last: Option<Rat> = None;
    for m in 1..64usize {
        prod = phi_t.map(|p| p.twist(m as i64)).mul(&prod);
        cprod = cprod.mul(&fr.c.twist(m as i64));
        let cinv = cprod.inv()?;
        let mut term = Vec::with_capacity(r);
        for j in 0..r {
            let mut num = TPoly::constant(CInf::zero(field));
            for (i, hi) in h.iter().enumerate() {
                num = num.add(&hi.twist(m as i64).mul(prod.get(i, j)));
            }
            let mut x = TateElem::from_tpoly(&num.scale(&cinv));
            for i in 1..=m {
                x = x.mul_simple_pole(i as u32)?;
            }
            term.push(x);
        }
        let d = row_gauss(&Mat::from_rows(vec![term]));
        if m > 1 && cmp_deg(d, last) == Ordering::Greater {
            let mut est = match last {
                Some(x) if x < Rat::from_integer(0) => x,
                _ => {
                    return Err(MathError::IdentityFailed(format!(
                        "closed form for g lost precision at m = {m} before its terms decay"
                    )))
                }
            };
            let mut n = m - 1;
            while est >= stop {
                est *= q;
                n += 1;
            }
            return Ok(n);
        }
        if below(d, stop) {
            return Ok(m);
        }
        last = d;
    }
    Err(MathError::IdentityFailed("closed form for g did not converge".into()))
}

/// g = sum_{m=1}^N h^{(m)} M^{(m)} ... M^{(1)} with M = Phi^tr / (c (t - theta)),
/// in partial-fraction form, evaluated as G_N = 0, G_k = (h + G_{k+1})^{(1)} M^{(1)}.
pub fn closed_form_g(fr: &FrameSet<CInf>, h: &[TPoly<CInf>], target: i64) -> Result<TateMat, MathError> {
    let n = closed_form_terms(fr, h, target)?;
    let r = fr.r;
    let cinv = fr.c.twist(1).inv()?;
    let m1 = fr.phi.transpose().map(|p| TateElem::from_tpoly(&p.twist(1).scale(&cinv)));
    let hm = poly_row_mat(h);
    let mut g = Mat::zeros_like(&TateElem::zero(fr.theta.field()), 1, r);
    for _ in 0..n {
        let x = try_twist_mat(&hm.add(&g), 1)?.mul(&m1);
        g = x.map(|e| e.mul_simple_pole(1).expect("exact element"));
    }
    Ok(g)
}

/// Gauss degree of a vector of points, for reports.
pub fn point_deg(v: &[CInf]) -> Option<Rat> {
    vec_deg(v)
}

/// A Drinfeld module from kappa's (no lattice) for small symbolic-free checks.
pub fn drinfeld_module(theta: &CInf, kappa: &[CInf], rel: i64) -> AnalyticModule {
    AnalyticModule::new(drinfeld(theta, kappa), theta, rel)
}
