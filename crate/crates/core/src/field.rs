//! Evaluatable vector fields `R^n -> R^n` on a box.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::domain::{tensor_grid, DomainBox};
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::plane::Lift;

/// A vector field together with the box it is defined on.
///
/// Cloning is cheap: the body is shared.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    body: Arc<Body>,
    domain: DomainBox,
    label: Option<String>,
}

pub enum Body {
    Constant(Vec<f64>),
    Linear(DMatrix<f64>),
    Expr(Vec<Expr>),
    Sum(VectorField, VectorField),
    Scale(f64, VectorField),
    Mollified(Mollifier),
    Lifted(Lift),
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("body", &self.describe())
            .finish()
    }
}

impl VectorField {
    fn from_body(dim: usize, body: Body, domain: DomainBox) -> Result<Self> {
        if domain.dim() != dim {
            return Err(Error::InvalidArgument(format!(
                "field of dimension {dim} on a {}-dimensional domain",
                domain.dim()
            )));
        }
        Ok(Self {
            dim,
            body: Arc::new(body),
            domain,
            label: None,
        })
    }

    pub fn constant(v: Vec<f64>, domain: DomainBox) -> Result<Self> {
        Self::from_body(v.len(), Body::Constant(v), domain)
    }

    pub fn zero(domain: DomainBox) -> Self {
        let n = domain.dim();
        Self::from_body(n, Body::Constant(vec![0.0; n]), domain).expect("dimensions agree")
    }

    pub fn linear(a: DMatrix<f64>, domain: DomainBox) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!(
                "linear field needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        Self::from_body(a.nrows(), Body::Linear(a), domain)
    }

    pub fn parse(text: &str, n: usize, domain: DomainBox) -> Result<Self> {
        let comps = expr::parse_field(text, n)?;
        Self::from_body(n, Body::Expr(comps), domain)
    }

    pub fn from_exprs(comps: Vec<Expr>, domain: DomainBox) -> Result<Self> {
        let n = comps.len();
        if let Some(a) = comps.iter().map(Expr::arity).max() {
            if a > n {
                return Err(Error::InvalidArgument(format!("expression uses x{a} but n = {n}")));
            }
        }
        Self::from_body(n, Body::Expr(comps), domain)
    }

    /// Pointwise sum; defined on the intersection of the two domains.
    pub fn sum(a: &VectorField, b: &VectorField) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::InvalidArgument("summands differ in dimension".into()));
        }
        let domain = a.domain.intersect(&b.domain)?;
        Self::from_body(a.dim, Body::Sum(a.clone(), b.clone()), domain)
    }

    pub fn scale(s: f64, f: &VectorField) -> Self {
        Self::from_body(f.dim, Body::Scale(s, f.clone()), f.domain.clone()).expect("same domain")
    }

    /// Convolution with the standard bump mollifier at scale `eps`.
    ///
    /// The result is defined on the inner domain shrunk by `eps`.
    pub fn mollify(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("mollifier scale must be positive, got {eps}")));
        }
        let domain = self.domain.shrink(eps)?;
        let m = Mollifier::new(self.clone(), eps);
        Self::from_body(self.dim, Body::Mollified(m), domain)
    }

    pub(crate) fn lifted(lift: Lift, domain: DomainBox) -> Result<Self> {
        Self::from_body(domain.dim(), Body::Lifted(lift), domain)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_domain(&self, domain: DomainBox) -> Result<Self> {
        if domain.dim() != self.dim {
            return Err(Error::InvalidArgument("domain dimension mismatch".into()));
        }
        Ok(Self {
            domain,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    /// Evaluate at `x`, which must lie in the domain.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Arity {
                expected: self.dim,
                found: x.len(),
            });
        }
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        let v = self.eval_body(x)?;
        if v.iter().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(Error::Singular { point: x.to_vec() })
        }
    }

    fn eval_body(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &*self.body {
            Body::Constant(v) => Ok(v.clone()),
            Body::Linear(a) => Ok((0..self.dim)
                .map(|i| (0..self.dim).map(|j| a[(i, j)] * x[j]).sum())
                .collect()),
            Body::Expr(comps) => Ok(comps.iter().map(|c| c.eval(x)).collect()),
            Body::Sum(a, b) => {
                let (u, v) = (a.eval(x)?, b.eval(x)?);
                Ok(u.iter().zip(&v).map(|(p, q)| p + q).collect())
            }
            Body::Scale(s, f) => Ok(f.eval(x)?.into_iter().map(|v| s * v).collect()),
            Body::Mollified(m) => m.eval(x),
            Body::Lifted(l) => l.eval(x),
        }
    }

    /// Short human-readable description of the body.
    pub fn describe(&self) -> String {
        match &*self.body {
            Body::Constant(v) => format!("constant {v:?}"),
            Body::Linear(a) => {
                let rows: Vec<String> = a
                    .row_iter()
                    .map(|r| r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", "))
                    .collect();
                format!("linear [{}]", rows.join("; "))
            }
            Body::Expr(c) => expr::print_field(c),
            Body::Sum(a, b) => format!("({}) + ({})", a.describe(), b.describe()),
            Body::Scale(s, f) => format!("{s} * ({})", f.describe()),
            Body::Mollified(m) => format!("mollified[eps={}] ({})", m.eps, m.inner.describe()),
            Body::Lifted(_) => "lift to plane field".into(),
        }
    }
}

/// Seven-point Gauss-Legendre rule on [-1, 1].
const GAUSS7_NODES: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const GAUSS7_WEIGHTS: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// Unnormalised bump `exp(-1/(1 - |u|^2))` on the unit ball.
pub fn bump_kernel(u: &[f64]) -> f64 {
    let r2: f64 = u.iter().map(|v| v * v).sum();
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// `x -> sum_k w_k f(x - eps u_k)` over a tensor Gauss grid on the unit cube,
/// weights carrying the bump kernel and normalised to unit mass.
pub struct Mollifier {
    inner: VectorField,
    eps: f64,
    nodes: Vec<(Vec<f64>, f64)>,
}

impl Mollifier {
    fn new(inner: VectorField, eps: f64) -> Self {
        let n = inner.dim();
        let idx: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let mut nodes: Vec<(Vec<f64>, f64)> = tensor_grid(n, &idx)
            .into_iter()
            .filter_map(|ix| {
                let u: Vec<f64> = ix.iter().map(|&i| GAUSS7_NODES[i as usize]).collect();
                let w: f64 = ix.iter().map(|&i| GAUSS7_WEIGHTS[i as usize]).product::<f64>()
                    * bump_kernel(&u);
                (w > 0.0).then_some((u, w))
            })
            .collect();
        let mass: f64 = nodes.iter().map(|(_, w)| w).sum();
        for (_, w) in &mut nodes {
            *w /= mass;
        }
        Self { inner, eps, nodes }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn inner(&self) -> &VectorField {
        &self.inner
    }

    // Singular quadrature nodes are dropped and the remaining mass renormalised.
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        let mut acc = vec![0.0; n];
        let mut mass = 0.0;
        let mut y = vec![0.0; n];
        for (u, w) in &self.nodes {
            for i in 0..n {
                y[i] = x[i] - self.eps * u[i];
            }
            match self.inner.eval(&y) {
                Ok(v) => {
                    for i in 0..n {
                        acc[i] += w * v[i];
                    }
                    mass += w;
                }
                Err(e) if e.is_pointwise() => continue,
                Err(e) => return Err(e),
            }
        }
        if mass <= 0.5 {
            return Err(Error::Singular { point: x.to_vec() });
        }
        Ok(acc.into_iter().map(|v| v / mass).collect())
    }
}
