//! k-plane fields given by frames: transverse coordinate splittings, lifts of
//! fields on the tangent coordinates, and an involutivity test.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{ae_collect, lie_bracket};
use crate::domain::DomainBox;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::{columns_to_matrix, min_norm, norm, orthogonal_residual, percentile};

/// Smallest singular value below which a frame counts as rank deficient.
pub const FRAME_RANK_TOL: f64 = 1e-8;
/// Smallest admissible transversality margin of a splitting.
pub const SPLIT_MARGIN_MIN: f64 = 1e-6;
/// Default gate on the 99th-percentile involutivity residual.
pub const INVOLUTIVITY_GATE: f64 = 1e-4;
/// Fewest grid points on which the involutivity gate is meaningful.
pub const INVOLUTIVITY_MIN_SAMPLES: usize = 1000;

/// A k-plane field on a box, spanned pointwise by `k` vector fields.
#[derive(Debug, Clone)]
pub struct PlaneField {
    n: usize,
    frame: Vec<VectorField>,
    domain: DomainBox,
}

impl PlaneField {
    pub fn new(frame: Vec<VectorField>, domain: DomainBox) -> Result<Self> {
        let n = domain.dim();
        let k = frame.len();
        if k == 0 || k >= n {
            return Err(Error::InvalidArgument(format!(
                "plane field rank must satisfy 1 <= k < n, got k = {k}, n = {n}"
            )));
        }
        if let Some(f) = frame.iter().find(|f| f.dim() != n) {
            return Err(Error::InvalidArgument(format!(
                "frame field of dimension {} in R^{n}",
                f.dim()
            )));
        }
        Ok(Self { n, frame, domain })
    }

    /// Parse a frame from expression strings, one field per string.
    pub fn parse(frame: &[&str], domain: DomainBox) -> Result<Self> {
        let n = domain.dim();
        let fields = frame
            .iter()
            .map(|s| VectorField::parse(s, n, domain.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(fields, domain)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.frame.len()
    }

    pub fn frame(&self) -> &[VectorField] {
        &self.frame
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// The n x k matrix whose columns are the frame vectors at `q`.
    pub fn frame_matrix(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let cols = self
            .frame
            .iter()
            .map(|f| f.eval(q))
            .collect::<Result<Vec<_>>>()?;
        Ok(columns_to_matrix(&cols))
    }

    /// Smallest singular value of the frame over the points (singular points skipped).
    pub fn rank_margin(&self, points: &[Vec<f64>]) -> Result<f64> {
        let vals: Vec<Result<f64>> = points
            .par_iter()
            .map(|q| Ok(min_norm(&self.frame_matrix(q)?)))
            .collect();
        let (vals, _) = ae_collect(vals)?;
        Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// `|(I - P_E) v| ` at `q`.
    pub fn normal_component(&self, q: &[f64], v: &[f64]) -> Result<f64> {
        Ok(norm(&orthogonal_residual(&self.frame_matrix(q)?, v)))
    }
}

/// A splitting of the coordinates into k tangent and n - k normal axes such
/// that the plane field projects isomorphically onto the tangent axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransverseSplit {
    /// Zero-based tangent axes, increasing.
    pub tangent: Vec<usize>,
    /// Zero-based normal axes, increasing.
    pub normal: Vec<usize>,
    /// Smallest singular value of the projected frame over the probe region.
    pub margin: f64,
}

impl TransverseSplit {
    pub fn project(&self, q: &[f64]) -> Vec<f64> {
        self.tangent.iter().map(|&i| q[i]).collect()
    }
}

/// Region sampled to certify a splitting around a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeGrid {
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            half_width: 0.25,
            points_per_axis: 5,
        }
    }
}

fn projected_sigma(b: &DMatrix<f64>, rows: &[usize]) -> f64 {
    let p = DMatrix::from_fn(rows.len(), b.ncols(), |i, j| b[(rows[i], j)]);
    min_norm(&p)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Choose the coordinate splitting whose projected frame is best conditioned at `p`.
///
/// Ties go to the lexicographically first tangent set.
pub fn select_split(e: &PlaneField, p: &[f64], probe: &ProbeGrid) -> Result<TransverseSplit> {
    let b = e.frame_matrix(p)?;
    if min_norm(&b) < FRAME_RANK_TOL {
        return Err(Error::DegenerateFrame(format!("frame has rank < {} at {p:?}", e.k())));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for rows in combinations(e.n(), e.k()) {
        let s = projected_sigma(&b, &rows);
        if best.as_ref().is_none_or(|(_, bs)| s > *bs) {
            best = Some((rows, s));
        }
    }
    let (tangent, _) = best.expect("at least one splitting");
    let normal: Vec<usize> = (0..e.n()).filter(|i| !tangent.contains(i)).collect();

    let region = DomainBox::centered(p, probe.half_width)?
        .intersect(e.domain())
        .unwrap_or_else(|_| DomainBox::centered(p, f64::EPSILON.max(1e-12)).expect("tiny box"));
    let pts = region.grid(probe.points_per_axis);
    let sig: Vec<Result<f64>> = pts
        .par_iter()
        .map(|q| Ok(projected_sigma(&e.frame_matrix(q)?, &tangent)))
        .collect();
    let (sig, _) = ae_collect(sig)?;
    let margin = sig.into_iter().fold(f64::INFINITY, f64::min);
    if !(margin >= SPLIT_MARGIN_MIN) {
        return Err(Error::DegenerateFrame(format!(
            "best splitting {tangent:?} has margin {margin:e} near {p:?}"
        )));
    }
    Ok(TransverseSplit {
        tangent,
        normal,
        margin,
    })
}

/// Smooth tensor-product bump: 1 on `inner`, 0 outside `outer`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpFunction {
    inner: DomainBox,
    outer: DomainBox,
}

/// `e(s) = exp(-1/s)` for `s > 0`, else 0.
fn flat(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// `b(t) = e(2 - |t|) / (e(2 - |t|) + e(|t| - 1))`: 1 for |t| <= 1, 0 for |t| >= 2.
pub fn bump_profile(t: f64) -> f64 {
    let t = t.abs();
    let a = flat(2.0 - t);
    let b = flat(t - 1.0);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

pub fn make_bump(inner: DomainBox, outer: DomainBox) -> Result<BumpFunction> {
    if inner.dim() != outer.dim() {
        return Err(Error::InvalidArgument("bump boxes differ in dimension".into()));
    }
    let strictly_inside = (0..inner.dim())
        .all(|i| outer.lo()[i] < inner.lo()[i] && inner.hi()[i] < outer.hi()[i]);
    if !strictly_inside {
        return Err(Error::InvalidArgument("bump inner box must lie strictly inside the outer box".into()));
    }
    Ok(BumpFunction { inner, outer })
}

impl BumpFunction {
    pub fn inner(&self) -> &DomainBox {
        &self.inner
    }

    pub fn outer(&self) -> &DomainBox {
        &self.outer
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let mut v = 1.0;
        for (i, &s) in y.iter().enumerate() {
            let (il, ih) = (self.inner.lo()[i], self.inner.hi()[i]);
            let (ol, oh) = (self.outer.lo()[i], self.outer.hi()[i]);
            let t = if s < il {
                1.0 + (il - s) / (il - ol)
            } else if s > ih {
                1.0 + (s - ih) / (oh - ih)
            } else {
                0.0
            };
            v *= bump_profile(t);
            if v == 0.0 {
                break;
            }
        }
        v
    }
}

/// Lift of a field `V` on the tangent coordinates to a section of a plane field:
/// `q -> B(q) (pi B(q))^{-1} beta(pi q) V(pi q)`, and 0 where `beta` vanishes.
pub struct Lift {
    frame: Vec<VectorField>,
    tangent: Vec<usize>,
    bump: BumpFunction,
    v: VectorField,
}

impl Lift {
    pub(crate) fn eval(&self, q: &[f64]) -> Result<Vec<f64>> {
        let y: Vec<f64> = self.tangent.iter().map(|&i| q[i]).collect();
        let beta = self.bump.eval(&y);
        let n = q.len();
        if beta == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let cols = self
            .frame
            .iter()
            .map(|f| f.eval(q))
            .collect::<Result<Vec<_>>>()?;
        let b = columns_to_matrix(&cols);
        let k = self.tangent.len();
        let p = DMatrix::from_fn(k, k, |i, j| b[(self.tangent[i], j)]);
        let rhs = DVector::from_iterator(k, self.v.eval(&y)?.into_iter().map(|c| beta * c));
        let c = p.lu().solve(&rhs).ok_or_else(|| {
            Error::DegenerateFrame(format!("projected frame is singular at {q:?}"))
        })?;
        Ok((b * c).as_slice().to_vec())
    }
}

/// Lift `v` (a field on the k tangent coordinates) to a section of `e`.
pub fn lift(
    e: &PlaneField,
    split: &TransverseSplit,
    v: &VectorField,
    bump: &BumpFunction,
) -> Result<VectorField> {
    let k = e.k();
    if split.tangent.len() != k || v.dim() != k || bump.dim() != k {
        return Err(Error::InvalidArgument(format!(
            "lift needs k = {k} tangent axes, field and bump dimensions"
        )));
    }
    let l = Lift {
        frame: e.frame().to_vec(),
        tangent: split.tangent.clone(),
        bump: bump.clone(),
        v: v.clone(),
    };
    VectorField::lifted(l, e.domain().clone())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvolutivityReport {
    pub max_residual: f64,
    pub p99_residual: f64,
    pub worst_point: Vec<f64>,
    /// Zero-based frame indices of the worst bracket.
    pub worst_pair: (usize, usize),
    pub samples: usize,
    pub skipped: usize,
}

impl InvolutivityReport {
    /// The a.e. gate: enough samples and a small 99th-percentile residual.
    pub fn passes(&self, gate: f64) -> bool {
        self.samples >= INVOLUTIVITY_MIN_SAMPLES && self.p99_residual <= gate
    }
}

/// Normalised out-of-plane part of every frame bracket,
/// `|(I - P_E)[X_i, X_j]| / (1 + |[X_i, X_j]|)`, over a grid.
pub fn involutivity_residual(
    e: &PlaneField,
    grid: &[Vec<f64>],
    h: Option<f64>,
) -> Result<InvolutivityReport> {
    let k = e.k();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let per_point: Vec<Result<Vec<f64>>> = grid
        .par_iter()
        .map(|q| {
            let b = e.frame_matrix(q)?;
            pairs
                .iter()
                .map(|&(i, j)| {
                    let br = lie_bracket(&e.frame()[i], &e.frame()[j], q, h)?;
                    Ok(norm(&orthogonal_residual(&b, &br)) / (1.0 + norm(&br)))
                })
                .collect()
        })
        .collect();
    let indexed: Vec<Result<(usize, Vec<f64>)>> = per_point
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map(|v| (i, v)))
        .collect();
    let (ok, skipped) = ae_collect(indexed)?;
    let mut all = Vec::with_capacity(ok.len() * pairs.len());
    let mut worst = (f64::NEG_INFINITY, 0, (0, 0));
    for (idx, rs) in &ok {
        for (r, &pair) in rs.iter().zip(&pairs) {
            all.push(*r);
            if *r > worst.0 {
                worst = (*r, *idx, pair);
            }
        }
    }
    if ok.is_empty() {
        return Err(Error::InvalidArgument("involutivity test needs grid points".into()));
    }
    if all.is_empty() {
        // a line field is always involutive
        all.push(0.0);
        worst = (0.0, ok[0].0, (0, 0));
    }
    Ok(InvolutivityReport {
        max_residual: worst.0,
        p99_residual: percentile(&all, 0.99),
        worst_point: grid[worst.1].clone(),
        worst_pair: worst.2,
        samples: ok.len(),
        skipped,
    })
}
