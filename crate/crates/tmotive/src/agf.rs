//! Anderson generating functions, rigid analytic trivializations and
//! quasi-periodic values.

use crate::analytic::{carlitz_pi, mat_vec, vec_deg, AnalyticModule, QuasiPeriodic, Target};
use crate::cinf::{cmp_deg, max_deg, CInf};
use crate::error::MathError;
use crate::field::FieldConfig;
use crate::ring::{Mat, Ring};
use crate::skew::SkewMat;
use crate::tate::{check_frobenius_equation, inner_product, tate_mat_from_tpoly, Side, TateElem, TateMat};
use crate::tmodule::BiderivationDef;
use crate::tpoly::TPoly;
use crate::Rat;

/// G_y(t) = sum_n B_n ((d phi_t - t)^{-1})^{(n)} y^{(n)} in partial-fraction form.
#[derive(Clone, Debug)]
pub struct AgfValue {
    pub entries: Vec<TateElem>,
    /// Pole levels 0..levels are present.
    pub levels: usize,
    /// Gauss degree of each level's contribution.
    pub level_degs: Vec<Option<Rat>>,
    /// Gauss degree of the last level; dropped levels lie below it.
    pub tail_deg: Option<Rat>,
}

impl AgfValue {
    pub fn column(&self) -> TateMat {
        Mat::from_fn(self.entries.len(), 1, |i, _| self.entries[i].clone())
    }
}

/// Level-n principal parts: (d phi_t - t)^{(n)} = a + N^{(n)} - t with
/// a = theta^{q^n}, so its inverse is -sum_k N^{(n)k} / (t - a)^{k+1}.
pub fn agf_compute(m: &AnalyticModule, y: &[CInf], target: i64) -> Result<AgfValue, MathError> {
    let field = m.field().clone();
    let d = m.dim();
    if y.len() != d {
        return Err(MathError::DimensionMismatch(format!("AGF point of length {} for dimension {d}", y.len())));
    }
    let mut entries = vec![TateElem::zero(&field); d];
    let mut level_degs = Vec::new();
    if vec_deg(y).is_none() {
        return Ok(AgfValue { entries, levels: 0, level_degs, tail_deg: None });
    }
    let q = m.q() as i64;
    let below = |x: Option<Rat>| cmp_deg(x, Some(Rat::from_integer(-target))) == std::cmp::Ordering::Less;
    let mut qn: i64 = 1;
    let mut n = 0usize;
    loop {
        let yn: Vec<CInf> = y.iter().map(|x| x.twist(n as i64)).collect();
        let bn = m.exp_coeff(n)?;
        let nil = m.nilpotent().twist(n as i64);
        let mut v = yn;
        let mut deg = None;
        for k in 0..d {
            if k > 0 {
                v = mat_vec(&nil, &v);
                if vec_deg(&v).is_none() && v.iter().all(|x| x.is_exact()) {
                    break;
                }
            }
            let c = mat_vec(&bn, &v);
            for (e, ci) in entries.iter_mut().zip(&c) {
                let term = TateElem::pole_term(n as u32, k as u32 + 1, &ci.neg());
                *e = e.add(&term);
            }
            let shift = Rat::from_integer((k as i64 + 1) * qn);
            deg = max_deg(deg, vec_deg(&c).map(|x| x - shift));
        }
        let prev = level_degs.last().copied().flatten();
        level_degs.push(deg);
        if n >= 1 && below(deg) && below(prev) && cmp_deg(deg, prev) != std::cmp::Ordering::Greater {
            break;
        }
        n += 1;
        qn = qn.checked_mul(q).ok_or_else(|| MathError::IdentityFailed("AGF levels overflow".into()))?;
    }
    let tail = *level_degs.last().unwrap();
    Ok(AgfValue { entries, levels: n + 1, level_degs, tail_deg: tail })
}

/// Gauss degree of <phi_t | G> - t G.
pub fn agf_eigen_defect(m: &AnalyticModule, g: &AgfValue) -> Result<Option<Rat>, MathError> {
    let col = g.column();
    let lhs = inner_product(&m.module.phi_t, &col)?;
    let t = TateElem::from_tpoly(&TPoly::t(&m.theta));
    let mut d = None;
    for i in 0..col.rows() {
        let diff = lhs.get(i, 0).sub(&t.mul(col.get(i, 0)));
        d = max_deg(d, diff.gauss_deg());
    }
    Ok(d)
}

/// Upsilon = < (tau m_1 ... tau m_r)^tr | (G_{w_1}, ..., G_{w_r}) >.
pub fn upsilon_matrix(rows: &SkewMat<CInf>, agfs: &[AgfValue]) -> Result<TateMat, MathError> {
    if agfs.is_empty() {
        return Err(MathError::DimensionMismatch("no periods".into()));
    }
    let d = agfs[0].entries.len();
    let f = Mat::from_fn(d, agfs.len(), |i, j| agfs[j].entries[i].clone());
    inner_product(rows, &f)
}

/// Rows tau^1, ..., tau^r for a Drinfeld module with m_E = (1, tau, ..., tau^{r-1}).
pub fn drinfeld_tau_rows(theta: &CInf, r: usize) -> SkewMat<CInf> {
    Mat::from_fn(r, 1, |i, _| crate::skew::SkewPoly::monomial(crate::skew::Var::Tau, CInf::one(theta.field()), i + 1))
}

#[derive(Clone, Debug)]
pub struct Trivialization {
    pub upsilon: TateMat,
    pub v: TateMat,
    /// (Upsilon^tr V)^{-1} as series modulo t^{T+1}.
    pub psi: TateMat,
    pub t_deg: usize,
}

/// Psi = (Upsilon^tr V)^{-1} = adj(M) det(M)^{-1}.
pub fn psi_dual(upsilon: &TateMat, v: &Mat<TPoly<CInf>>, t_deg: usize) -> Result<Trivialization, MathError> {
    let vt = tate_mat_from_tpoly(v);
    let m = upsilon.transpose().mul(&vt);
    let (_, adj, det) = m.cof_adj_det();
    let dinv = det.inv_series(t_deg)?;
    let psi = adj.map(|x| x.try_mul(&dinv).expect("series product"));
    Ok(Trivialization { upsilon: upsilon.clone(), v: vt, psi, t_deg })
}

/// omega = G_{pi}(t; C) and Omega = 1/omega^{(1)} (series modulo t^{T+1}).
#[derive(Clone, Debug)]
pub struct OmegaPair {
    pub pi: CInf,
    pub omega: AgfValue,
    pub big_omega: TateElem,
    pub t_deg: usize,
}

pub fn omega_big_omega(field: &FieldConfig, prec: i64, t_deg: usize) -> Result<OmegaPair, MathError> {
    let pi = carlitz_pi(field, prec)?;
    let carlitz = AnalyticModule::carlitz(field, prec + 20);
    let omega = agf_compute(&carlitz, std::slice::from_ref(&pi), prec)?;
    let w1 = omega.entries[0].try_twist(1)?;
    let big_omega = w1.inv_series(t_deg)?;
    Ok(OmegaPair { pi, omega, big_omega, t_deg })
}

impl OmegaPair {
    /// Gauss degree of Omega^{(-1)} - (t - theta) Omega.
    pub fn dual_defect(&self) -> Result<Option<Rat>, MathError> {
        let theta = CInf::theta(self.pi.field());
        let phi = Mat::from_rows(vec![vec![TateElem::from_tpoly(&TPoly::t_minus(&theta))]]);
        let x = Mat::from_rows(vec![vec![self.big_omega.clone()]]);
        check_frobenius_equation(&phi, &x, Side::Dual, self.t_deg)
    }

    /// Gauss degree of omega - (t - theta) omega^{(-1)} ... written as
    /// omega^{(1)} = (t - theta) omega.
    pub fn motive_defect(&self) -> Result<Option<Rat>, MathError> {
        let theta = CInf::theta(self.pi.field());
        let w = &self.omega.entries[0];
        let lhs = w.try_twist(1)?;
        let rhs = TateElem::from_tpoly(&TPoly::t_minus(&theta)).mul(w);
        Ok(lhs.sub(&rhs).gauss_deg())
    }
}

/// <delta(t) | G_y>|_{t = theta}, for delta with values in G_a (one row).
pub fn quasi_value(delta: &SkewMat<CInf>, g: &AgfValue) -> Result<CInf, MathError> {
    let v = inner_product(delta, &g.column())?;
    if v.rows() != 1 {
        return Err(MathError::DimensionMismatch("quasi_value needs a single row".into()));
    }
    let e = v.get(0, 0).eval_theta()?;
    e.value.ok_or_else(|| MathError::PoleAtTheta(format!("{}", e.residue)))
}

/// The same value through the quasi-periodic series on G_a.
pub fn quasi_value_series(
    m: &AnalyticModule,
    delta: &SkewMat<CInf>,
    y: &[CInf],
    target: i64,
) -> Result<CInf, MathError> {
    let bd = BiderivationDef::new(delta.clone());
    let qf = QuasiPeriodic::new(m, &Target::Trivial, &bd)?;
    Ok(qf.eval(y, Rat::from_integer(target))?.value[0].clone())
}

/// delta(t) = tau^k on a Drinfeld module, as a 1x1 skew matrix.
pub fn tau_power_delta(field: &FieldConfig, k: usize) -> SkewMat<CInf> {
    Mat::from_rows(vec![vec![crate::skew::SkewPoly::monomial(crate::skew::Var::Tau, CInf::one(field), k)]])
}

/// F_{tau^k}(w) = sum_n alpha_n^{q^k} w^{q^{n+k}} / (theta^{q^{n+k}} - theta)
/// for a Drinfeld module with Exp coefficients alpha_n.
pub fn quasi_tau_closed(m: &AnalyticModule, k: usize, w: &CInf, target: i64) -> Result<CInf, MathError> {
    let field = m.field();
    let mut acc = CInf::zero(field);
    let mut prev: Option<Rat> = None;
    let below = |x: Option<Rat>| cmp_deg(x, Some(Rat::from_integer(-target))) == std::cmp::Ordering::Less;
    for n in 0.. {
        let a = m.exp_coeff(n)?.get(0, 0).twist(k as i64);
        let num = a.mul(&w.twist((n + k) as i64));
        let gap = CInf::theta(field).twist((n + k) as i64).sub(&CInf::theta(field));
        let rel = num.prec().zip(num.deg()).map_or(Rat::from_integer(m.rel), |(p, d)| p + d);
        let term = num.mul(&gap.inv_rel(rel)?);
        let d = term.deg_bound();
        acc = acc.add(&term);
        if n >= 1 && below(d) && below(prev) {
            break;
        }
        prev = d;
        if n > 60 {
            return Err(MathError::IdentityFailed("closed quasi-period series did not converge".into()));
        }
    }
    Ok(acc)
}

/// Quasi-period matrix (w_i, F_tau(w_i), ..., F_{tau^{r-1}}(w_i)) with rows i.
pub fn quasi_period_matrix(m: &AnalyticModule, periods: &[CInf], target: i64) -> Result<Mat<CInf>, MathError> {
    let r = periods.len();
    let mut rows = Vec::with_capacity(r);
    for w in periods {
        let mut row = vec![w.clone()];
        for k in 1..r {
            row.push(quasi_tau_closed(m, k, w, target)?);
        }
        rows.push(row);
    }
    Ok(Mat::from_rows(rows))
}

/// Normalizer u with u^{(-1)} = eta u: u = (eta^{-q})^{1/(q-1)}, with eta^q
/// taken as eta^{(1)} (same value, q times the precision).
pub fn normalizer(eta: &CInf) -> Result<CInf, MathError> {
    let q = eta.field().q();
    let x = eta.twist(1).inv()?;
    x.root(q - 1)
}
