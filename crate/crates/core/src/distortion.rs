//! Diagnostics of flow maps: quasiconformal distortion of `D phi_t`, the
//! Liouville determinant bounds, growth of the distortion in `t`, flow
//! commutation and stability of flows under mollification.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{ae_collect, divergence};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::flow::{FlowMap, FlowSettings};
use crate::linalg::{dist, singular_values};

/// Default endpoint-differencing step for flow Jacobians.
pub const FLOW_FD_STEP: f64 = 1e-5;
/// `|det D phi_t|` below this is reported as singular.
pub const SINGULAR_DET: f64 = 1e-12;
/// Relative slack of the Liouville bounds.
pub const LIOUVILLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    pub point: Vec<f64>,
    pub time: f64,
    /// `D phi_t(x)`, row-major.
    pub jacobian: Vec<Vec<f64>>,
    pub op_norm: f64,
    /// `m(D phi_t) = min |D phi_t v|` over unit `v`.
    pub min_norm: f64,
    pub det: f64,
    /// `max(|D|^n / |det|, |det| / m^n)`, infinite when singular.
    pub k_estimate: f64,
    pub singular: bool,
}

impl DistortionReport {
    fn from_matrix(point: &[f64], time: f64, d: &DMatrix<f64>) -> Self {
        let n = d.nrows();
        let sv = singular_values(d);
        let op = sv[0];
        let m = sv[n - 1];
        // |det| as the ordered product of singular values keeps |det| <= op^n exact
        let abs_det = sv.iter().product::<f64>();
        let sign = d.clone().determinant().signum();
        let det = if sign == 0.0 { 0.0 } else { sign * abs_det };
        let singular = abs_det < SINGULAR_DET;
        let k = if singular {
            f64::INFINITY
        } else {
            let ni = n as i32;
            (op.powi(ni) / abs_det).max(abs_det / m.powi(ni)).max(1.0)
        };
        Self {
            point: point.to_vec(),
            time,
            jacobian: d.row_iter().map(|r| r.iter().copied().collect()).collect(),
            op_norm: op,
            min_norm: m,
            det,
            k_estimate: k,
            singular,
        }
    }
}

/// `D phi_t(x0)` by central differences of flow endpoints.
///
/// The perturbed starts replay the step sequence of the central trajectory, so
/// the differenced map is one fixed Runge-Kutta composition.
pub fn flow_jacobian(f: &FlowMap, x0: &[f64], t: f64, h: Option<f64>) -> Result<DistortionReport> {
    let n = f.field().dim();
    let h = h.unwrap_or(FLOW_FD_STEP);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if t == 0.0 {
        f.field().eval(x0)?;
        return Ok(DistortionReport::from_matrix(x0, t, &DMatrix::identity(n, n)));
    }
    let steps = f.trajectory(x0, t)?.steps;
    let mut d = DMatrix::zeros(n, n);
    let mut xp = x0.to_vec();
    let mut xm = x0.to_vec();
    for j in 0..n {
        xp[j] = x0[j] + h;
        xm[j] = x0[j] - h;
        let (yp, ym) = (f.replay(&xp, &steps)?, f.replay(&xm, &steps)?);
        for i in 0..n {
            d[(i, j)] = (yp[i] - ym[i]) / (2.0 * h);
        }
        xp[j] = x0[j];
        xm[j] = x0[j];
    }
    Ok(DistortionReport::from_matrix(x0, t, &d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleViolation {
    pub point: Vec<f64>,
    pub time: f64,
    pub det: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleReport {
    pub div_bound: f64,
    /// Largest `|div X|` seen on the grid; the bound is only meaningful above it.
    pub sampled_div_sup: f64,
    pub checks: usize,
    pub violations: Vec<LiouvilleViolation>,
    pub passed: bool,
}

/// Check `exp(-|t| B) (1 - tol) <= det D phi_t(x) <= exp(|t| B) (1 + tol)`.
pub fn liouville_check(
    f: &FlowMap,
    grid: &[Vec<f64>],
    t_values: &[f64],
    div_bound: f64,
) -> Result<LiouvilleReport> {
    let divs: Vec<Result<f64>> = grid
        .par_iter()
        .map(|x| divergence(f.field(), x, None).map(f64::abs))
        .collect();
    let (divs, _) = ae_collect(divs)?;
    let sampled_div_sup = divs.into_iter().fold(0.0, f64::max);

    let jobs: Vec<(usize, f64)> = (0..grid.len())
        .flat_map(|i| t_values.iter().map(move |&t| (i, t)))
        .collect();
    let reports = jobs
        .par_iter()
        .map(|&(i, t)| flow_jacobian(f, &grid[i], t, None))
        .collect::<Result<Vec<_>>>()?;
    let violations: Vec<LiouvilleViolation> = reports
        .iter()
        .filter_map(|r| {
            let lower = (-r.time.abs() * div_bound).exp() * (1.0 - LIOUVILLE_TOL);
            let upper = (r.time.abs() * div_bound).exp() * (1.0 + LIOUVILLE_TOL);
            (!(lower <= r.det && r.det <= upper)).then(|| LiouvilleViolation {
                point: r.point.clone(),
                time: r.time,
                det: r.det,
                lower,
                upper,
            })
        })
        .collect();
    Ok(LiouvilleReport {
        div_bound,
        sampled_div_sup,
        checks: reports.len(),
        passed: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QcProfile {
    /// `(t, max over grid of K_estimate)`.
    pub profile: Vec<(f64, f64)>,
    /// Least-squares slope of `log K` against `|t|`, through the origin.
    pub fitted_c: f64,
    /// RMS residual of that fit.
    pub residual: f64,
}

pub fn qc_growth_profile(f: &FlowMap, grid: &[Vec<f64>], t_values: &[f64]) -> Result<QcProfile> {
    let mut profile = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let ks = grid
            .par_iter()
            .map(|x| flow_jacobian(f, x, t, None).map(|r| r.k_estimate))
            .collect::<Result<Vec<_>>>()?;
        profile.push((t, ks.into_iter().fold(1.0, f64::max)));
    }
    let (mut stt, mut stk) = (0.0, 0.0);
    for &(t, k) in &profile {
        stt += t * t;
        stk += t.abs() * k.ln();
    }
    let fitted_c = if stt > 0.0 { stk / stt } else { 0.0 };
    let residual = if profile.is_empty() {
        0.0
    } else {
        (profile
            .iter()
            .map(|&(t, k)| (k.ln() - fitted_c * t.abs()).powi(2))
            .sum::<f64>()
            / profile.len() as f64)
            .sqrt()
    };
    Ok(QcProfile {
        profile,
        fitted_c,
        residual,
    })
}

/// `max over grid of |phi_t(psi_s(x)) - psi_s(phi_t(x))|` with `phi` the flow of
/// `f` and `psi` the flow of `g`.
pub fn commutation_defect(
    f: &FlowMap,
    g: &FlowMap,
    grid: &[Vec<f64>],
    s: f64,
    t: f64,
) -> Result<f64> {
    let d = grid
        .par_iter()
        .map(|x| {
            let a = f.flow(&g.flow(x, s)?, t)?;
            let b = g.flow(&f.flow(x, t)?, s)?;
            Ok(dist(&a, &b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollificationSample {
    pub eps: f64,
    /// Grid average of `|phi^eps_t(x) - phi_t(x)|`.
    pub error: f64,
}

/// Flow error of mollified fields against the field itself, per scale.
pub fn mollification_stability(
    x: &VectorField,
    eps_list: &[f64],
    grid: &[Vec<f64>],
    t: f64,
    settings: FlowSettings,
) -> Result<Vec<MollificationSample>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let base = FlowMap::with_settings(x.clone(), settings)?;
    let reference = grid
        .par_iter()
        .map(|p| base.flow(p, t))
        .collect::<Result<Vec<_>>>()?;
    eps_list
        .iter()
        .map(|&eps| {
            let fm = FlowMap::with_settings(x.mollify(eps)?, settings)?;
            let errs = grid
                .par_iter()
                .zip(&reference)
                .map(|(p, r)| Ok(dist(&fm.flow(p, t)?, r)))
                .collect::<Result<Vec<_>>>()?;
            Ok(MollificationSample {
                eps,
                error: errs.iter().sum::<f64>() / errs.len() as f64,
            })
        })
        .collect()
}
