//! Flow-box charts of involutive plane fields.
//!
//! The k coordinate fields on the tangent axes are lifted to sections of the
//! plane field, and the chart composes their flows starting from the normal
//! slice through the base point. Chart coordinates list the tangent axes
//! first (in split order) and then the normal axes.

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{ae_collect, lie_bracket};
use crate::domain::{tensor_grid, DomainBox};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::flow::{FlowMap, FlowSettings};
use crate::linalg::{dist, norm, orthogonal_residual, percentile, sub};
use crate::plane::{lift, make_bump, select_split, BumpFunction, PlaneField, ProbeGrid, TransverseSplit};

/// `|Phi(x) - Phi(y)| >= INJECTIVITY_LOWER * |x - y|` on the test grid.
pub const INJECTIVITY_LOWER: f64 = 1e-3;
/// Relative round-trip tolerance of the inverse.
pub const ROUND_TRIP_TOL: f64 = 1e-6;
/// Smallest radius the injectivity search may return.
pub const MIN_RADIUS: f64 = 1e-4;
/// Absolute allowance when comparing tangency residuals across refinements.
pub const RESIDUAL_FLOOR: f64 = 1e-9;
/// Relative allowance when comparing tangency residuals across refinements.
pub const TREND_SLACK: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartConfig {
    /// Initial radius; the bump plateau has half-width `2 * eps0` and its
    /// support half-width `4 * eps0`.
    pub eps0: f64,
    pub flow: FlowSettings,
    /// Bound on the 99th percentile of lifted bracket norms.
    pub bracket_gate: f64,
    /// Minimum number of points of the bracket sweep.
    pub bracket_samples: usize,
    /// Points per axis of the injectivity test grid.
    pub injectivity_grid: usize,
    pub bisection_steps: usize,
    pub fd_step: Option<f64>,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self {
            eps0: 0.25,
            flow: FlowSettings::default(),
            bracket_gate: 1e-4,
            bracket_samples: 1000,
            injectivity_grid: 5,
            bisection_steps: 8,
            fd_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketGateReport {
    pub max_norm: f64,
    pub p99_norm: f64,
    pub samples: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct Chart {
    plane: PlaneField,
    p: Vec<f64>,
    eps: f64,
    eps0: f64,
    split: TransverseSplit,
    bump: BumpFunction,
    lifted: Vec<VectorField>,
    flows: Vec<FlowMap>,
    bracket: BracketGateReport,
}

/// Serializable summary of a chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartMetadata {
    pub p: Vec<f64>,
    pub eps: f64,
    pub eps0: f64,
    pub tangent_axes: Vec<usize>,
    pub normal_axes: Vec<usize>,
    pub split_margin: f64,
    pub plateau: DomainBox,
    pub support: DomainBox,
    pub bracket: BracketGateReport,
    pub flow: FlowSettings,
}

impl Chart {
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn split(&self) -> &TransverseSplit {
        &self.split
    }

    pub fn bump(&self) -> &BumpFunction {
        &self.bump
    }

    pub fn plane(&self) -> &PlaneField {
        &self.plane
    }

    /// The lifted coordinate fields, in split order.
    pub fn lifted(&self) -> &[VectorField] {
        &self.lifted
    }

    pub fn flows(&self) -> &[FlowMap] {
        &self.flows
    }

    pub fn bracket_report(&self) -> &BracketGateReport {
        &self.bracket
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn k(&self) -> usize {
        self.split.tangent.len()
    }

    pub fn metadata(&self) -> ChartMetadata {
        ChartMetadata {
            p: self.p.clone(),
            eps: self.eps,
            eps0: self.eps0,
            tangent_axes: self.split.tangent.clone(),
            normal_axes: self.split.normal.clone(),
            split_margin: self.split.margin,
            plateau: self.bump.inner().clone(),
            support: self.bump.outer().clone(),
            bracket: self.bracket.clone(),
            flow: *self.flows[0].settings(),
        }
    }

    fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    /// `p` moved by the normal chart coordinates.
    fn normal_start(&self, x: &[f64]) -> Vec<f64> {
        let k = self.k();
        let mut q = self.p.clone();
        for (j, &axis) in self.split.normal.iter().enumerate() {
            q[axis] += x[k + j];
        }
        q
    }

    fn in_cube(&self, x: &[f64]) -> bool {
        x.len() == self.n() && x.iter().all(|c| c.abs() <= self.eps * (1.0 + 1e-12))
    }

    fn forward_in_order(&self, x: &[f64], order: &[usize]) -> Result<Vec<f64>> {
        let mut q = self.normal_start(x);
        // innermost flow first
        for &i in order.iter().rev() {
            q = self.flows[i].flow(&q, x[i])?;
        }
        Ok(q)
    }
}

pub fn build_chart(e: &PlaneField, p: &[f64], cfg: &ChartConfig) -> Result<Chart> {
    let n = e.n();
    let k = e.k();
    if p.len() != n {
        return Err(Error::Arity {
            expected: n,
            found: p.len(),
        });
    }
    if !e.domain().contains(p) {
        return Err(Error::OutOfDomain { point: p.to_vec() });
    }
    if !(cfg.eps0 > 0.0 && cfg.eps0.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps0 must be positive, got {}", cfg.eps0)));
    }
    cfg.flow.validate()?;

    let probe = ProbeGrid {
        half_width: 4.0 * cfg.eps0,
        ..ProbeGrid::default()
    };
    let split = select_split(e, p, &probe)?;
    let center = split.project(p);
    let bump = make_bump(
        DomainBox::centered(&center, 2.0 * cfg.eps0)?,
        DomainBox::centered(&center, 4.0 * cfg.eps0)?,
    )?;
    let tangent_domain = e.domain().select(&split.tangent)?;
    let lifted = (0..k)
        .map(|i| {
            let mut v = vec![0.0; k];
            v[i] = 1.0;
            let coord = VectorField::constant(v, tangent_domain.clone())?;
            Ok(lift(e, &split, &coord, &bump)?.with_label(format!("lift of e{}", split.tangent[i] + 1)))
        })
        .collect::<Result<Vec<_>>>()?;

    let bracket = bracket_sweep(e, p, &lifted, cfg)?;
    if bracket.p99_norm > cfg.bracket_gate {
        return Err(Error::InvolutivityGate {
            value: bracket.p99_norm,
            gate: cfg.bracket_gate,
        });
    }
    let flows = lifted
        .iter()
        .map(|f| FlowMap::with_settings(f.clone(), cfg.flow))
        .collect::<Result<Vec<_>>>()?;
    let partial = Chart {
        plane: e.clone(),
        p: p.to_vec(),
        eps: cfg.eps0,
        eps0: cfg.eps0,
        split,
        bump,
        lifted,
        flows,
        bracket,
    };
    let eps = injectivity_radius(&partial, cfg.eps0, cfg)?;
    Ok(partial.with_eps(eps))
}

/// Norms of all pairwise brackets of the lifted fields on the plateau around `p`.
fn bracket_sweep(
    e: &PlaneField,
    p: &[f64],
    lifted: &[VectorField],
    cfg: &ChartConfig,
) -> Result<BracketGateReport> {
    let n = e.n();
    let k = lifted.len();
    let inner = e.domain().shrink(1e-3).unwrap_or_else(|_| e.domain().clone());
    let region = DomainBox::centered(p, 2.0 * cfg.eps0)?.intersect(&inner)?;
    let mut m: usize = 2;
    while m.pow(n as u32) < cfg.bracket_samples {
        m += 1;
    }
    let pts = region.grid(m);
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    if pairs.is_empty() {
        return Ok(BracketGateReport {
            max_norm: 0.0,
            p99_norm: 0.0,
            samples: pts.len(),
            skipped: 0,
        });
    }
    let per_point: Vec<Result<Vec<f64>>> = pts
        .par_iter()
        .map(|q| {
            pairs
                .iter()
                .map(|&(i, j)| Ok(norm(&lie_bracket(&lifted[i], &lifted[j], q, cfg.fd_step)?)))
                .collect()
        })
        .collect();
    let (ok, skipped) = ae_collect(per_point)?;
    let all: Vec<f64> = ok.into_iter().flatten().collect();
    Ok(BracketGateReport {
        max_norm: all.iter().copied().fold(0.0, f64::max),
        p99_norm: percentile(&all, 0.99),
        samples: pts.len() - skipped,
        skipped,
    })
}

/// `Phi(x)`: the lifted flows applied to the normal slice point, flow `k`
/// innermost and flow 1 outermost.
pub fn chart_forward(c: &Chart, x: &[f64]) -> Result<Vec<f64>> {
    if !c.in_cube(x) {
        return Err(Error::InvalidArgument(format!(
            "chart coordinates {x:?} lie outside the cube of radius {}",
            c.eps
        )));
    }
    c.forward_in_order(x, &(0..c.k()).collect::<Vec<_>>())
}

/// `Phi` with the flows composed in `order` (outermost first).
pub fn chart_forward_ordered(c: &Chart, x: &[f64], order: &[usize]) -> Result<Vec<f64>> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..c.k()).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument(format!("{order:?} is not a permutation of the flows")));
    }
    if !c.in_cube(x) {
        return Err(Error::InvalidArgument(format!("chart coordinates {x:?} lie outside the cube")));
    }
    c.forward_in_order(x, order)
}

pub fn chart_inverse(c: &Chart, q: &[f64]) -> Result<Vec<f64>> {
    let k = c.k();
    if q.len() != c.n() {
        return Err(Error::Arity {
            expected: c.n(),
            found: q.len(),
        });
    }
    let mut x = vec![0.0; c.n()];
    for (i, &axis) in c.split.tangent.iter().enumerate() {
        x[i] = q[axis] - c.p[axis];
    }
    let mut back = q.to_vec();
    for i in 0..k {
        back = c.flows[i].flow(&back, -x[i])?;
    }
    for (j, &axis) in c.split.normal.iter().enumerate() {
        x[k + j] = back[axis] - c.p[axis];
    }
    let again = c.forward_in_order(&x, &(0..k).collect::<Vec<_>>())?;
    let residual = dist(&again, q);
    let tol = ROUND_TRIP_TOL * (1.0 + norm(q));
    if residual > tol || x.iter().any(|v| v.abs() > c.eps + tol) {
        return Err(Error::NotInImage {
            point: q.to_vec(),
            residual,
        });
    }
    Ok(x)
}

/// Whether `Phi` passes the injectivity test on the closed cube of radius `eps`.
pub fn injective_on(c: &Chart, eps: f64, grid: usize) -> bool {
    let trial = c.with_eps(eps);
    let pts = DomainBox::cube(c.n(), eps).map(|b| b.grid(grid));
    let Ok(pts) = pts else { return false };
    let images: Result<Vec<Vec<f64>>> = pts
        .par_iter()
        .map(|x| {
            let q = chart_forward(&trial, x)?;
            let back = chart_inverse(&trial, &q)?;
            if dist(&back, x) > ROUND_TRIP_TOL * (1.0 + norm(x)) {
                return Err(Error::NotInImage {
                    point: q,
                    residual: dist(&back, x),
                });
            }
            Ok(q)
        })
        .collect();
    let Ok(images) = images else { return false };
    (0..pts.len()).into_par_iter().all(|i| {
        (i + 1..pts.len())
            .all(|j| dist(&images[i], &images[j]) >= INJECTIVITY_LOWER * dist(&pts[i], &pts[j]))
    })
}

/// `eps0` if it passes the injectivity test, otherwise the largest radius
/// found by bisection on `(0, eps0)`.
pub fn injectivity_radius(c: &Chart, eps0: f64, cfg: &ChartConfig) -> Result<f64> {
    if injective_on(c, eps0, cfg.injectivity_grid) {
        return Ok(eps0);
    }
    let (mut lo, mut hi) = (0.0, eps0);
    for _ in 0..cfg.bisection_steps {
        let mid = 0.5 * (lo + hi);
        if injective_on(c, mid, cfg.injectivity_grid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo < MIN_RADIUS {
        return Err(Error::InjectivityCollapse {
            min_radius: MIN_RADIUS,
        });
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceMesh {
    /// Normal chart coordinates of the slice.
    pub c: Vec<f64>,
    pub resolution: usize,
    /// Tangent chart coordinates, first axis varying slowest.
    pub params: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    /// `max_i |(I - P_E) T_i| / |T_i|` over the mesh tangents at each vertex.
    pub residuals: Vec<f64>,
}

impl SliceMesh {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Vertex spacing in chart coordinates.
    pub fn spacing(&self) -> f64 {
        match self.params.as_slice() {
            [a, .., b] if self.resolution > 1 => (b[0] - a[0]) / (self.resolution - 1) as f64,
            _ => 0.0,
        }
    }
}

/// Image of the slice `x_normal = c` over a `resolution^k` grid of `[-eps, eps]^k`.
pub fn trace_slice(chart: &Chart, c: &[f64], resolution: usize) -> Result<SliceMesh> {
    let k = chart.k();
    let n = chart.n();
    if c.len() != n - k {
        return Err(Error::Arity {
            expected: n - k,
            found: c.len(),
        });
    }
    if c.iter().any(|v| v.abs() >= chart.eps) {
        return Err(Error::InvalidArgument(format!("slice {c:?} is not inside the chart radius {}", chart.eps)));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument("slice resolution must be at least 2".into()));
    }
    let m = resolution;
    let eps = chart.eps;
    let axis: Vec<f64> = (0..m)
        .map(|i| if i + 1 == m { eps } else { -eps + 2.0 * eps * i as f64 / (m - 1) as f64 })
        .collect();
    let params = tensor_grid(k, &axis);
    let points = params
        .par_iter()
        .map(|u| {
            let x: Vec<f64> = u.iter().chain(c).copied().collect();
            chart_forward(chart, &x)
        })
        .collect::<Result<Vec<_>>>()?;
    let spacing = 2.0 * eps / (m - 1) as f64;
    let residuals = (0..points.len())
        .into_par_iter()
        .map(|v| {
            let b = chart.plane.frame_matrix(&points[v])?;
            let mut worst: f64 = 0.0;
            for axis in 0..k {
                let t = mesh_tangent(&points, v, axis, k, m, spacing);
                let len = norm(&t);
                if len > 0.0 {
                    worst = worst.max(norm(&orthogonal_residual(&b, &t)) / len);
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SliceMesh {
        c: c.to_vec(),
        resolution: m,
        params,
        points,
        residuals,
    })
}

/// Finite-difference tangent along mesh axis `axis` at vertex `v`: central in
/// the interior, one-sided second order on the boundary (first order when the
/// mesh has only two points per axis).
fn mesh_tangent(points: &[Vec<f64>], v: usize, axis: usize, k: usize, m: usize, h: f64) -> Vec<f64> {
    let stride = m.pow((k - 1 - axis) as u32);
    let i = (v / stride) % m;
    let at = |j: usize| &points[v - i * stride + j * stride];
    let scale = |d: Vec<f64>, s: f64| d.into_iter().map(|c| c / s).collect::<Vec<_>>();
    if m == 2 {
        return scale(sub(at(1), at(0)), h);
    }
    if i == 0 {
        let (p0, p1, p2) = (at(0), at(1), at(2));
        return (0..p0.len()).map(|d| (-3.0 * p0[d] + 4.0 * p1[d] - p2[d]) / (2.0 * h)).collect();
    }
    if i == m - 1 {
        let (p0, p1, p2) = (at(m - 1), at(m - 2), at(m - 3));
        return (0..p0.len()).map(|d| (3.0 * p0[d] - 4.0 * p1[d] + p2[d]) / (2.0 * h)).collect();
    }
    scale(sub(at(i + 1), at(i - 1)), 2.0 * h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub resolution: usize,
    pub spacing: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1Probe {
    pub levels: Vec<RefinementLevel>,
    /// `None` when there is a single level and no trend to check.
    pub non_increasing: Option<bool>,
}

/// Re-trace the slice of `mesh` at refined resolutions. A factor `r` refines
/// the `m`-point axis to `(m - 1) r + 1` points so that coarse vertices are kept.
/// Residuals must satisfy `r_next <= (1 + TREND_SLACK) r_prev + RESIDUAL_FLOOR`.
pub fn c1_regularity_probe(chart: &Chart, mesh: &SliceMesh, factors: &[usize]) -> Result<C1Probe> {
    if factors.iter().any(|&f| f == 0) {
        return Err(Error::InvalidArgument("refinement factors must be positive".into()));
    }
    let levels = factors
        .iter()
        .map(|&f| {
            let m = (mesh.resolution - 1) * f + 1;
            let refined = if f == 1 {
                mesh.clone()
            } else {
                trace_slice(chart, &mesh.c, m)?
            };
            Ok(RefinementLevel {
                resolution: m,
                spacing: refined.spacing(),
                max_residual: refined.max_residual(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let non_increasing = (levels.len() > 1).then(|| {
        levels
            .windows(2)
            .all(|w| w[1].max_residual <= (1.0 + TREND_SLACK) * w[0].max_residual + RESIDUAL_FLOOR)
    });
    Ok(C1Probe {
        levels,
        non_increasing,
    })
}
