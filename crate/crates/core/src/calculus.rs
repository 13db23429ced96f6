//! Central-difference calculus on vector fields: Jacobian, divergence,
//! anticonformal part, Lie bracket and a growth diagnostic.
//!
//! Fields may be only a.e. differentiable. A stencil that hits a singular
//! point is retried with a halved step; sweeps over many points skip and
//! count failures through [`ae_collect`].

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::{matvec, norm};

/// Fraction of singular sample points a sweep tolerates before failing.
pub const SINGULAR_FRACTION: f64 = 0.01;

const STEP_RETRIES: usize = 4;

/// Default central-difference step: `1e-5 * max(1, |x|)`.
pub fn default_step(x: &[f64]) -> f64 {
    1e-5 * norm(x).max(1.0)
}

#[derive(Debug, Clone)]
pub struct JacobianEstimate {
    pub matrix: DMatrix<f64>,
    pub point: Vec<f64>,
    /// Step actually used after any singularity retries.
    pub step: f64,
}

/// `J_ij = (f_i(x + h e_j) - f_i(x - h e_j)) / 2h`.
pub fn jacobian(f: &VectorField, x: &[f64], h: Option<f64>) -> Result<JacobianEstimate> {
    let n = f.dim();
    if x.len() != n {
        return Err(Error::Arity {
            expected: n,
            found: x.len(),
        });
    }
    let mut h = h.unwrap_or_else(|| default_step(x));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if f.domain().margin(x) < h {
        return Err(Error::OutOfDomain { point: x.to_vec() });
    }
    let mut attempt = 0;
    loop {
        match stencil(f, x, h) {
            Ok(matrix) => {
                return Ok(JacobianEstimate {
                    matrix,
                    point: x.to_vec(),
                    step: h,
                })
            }
            Err(Error::Singular { .. }) if attempt < STEP_RETRIES => {
                attempt += 1;
                h *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
}

fn stencil(f: &VectorField, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = f.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        let (fp, fm) = (f.eval(&xp)?, f.eval(&xm)?);
        for i in 0..n {
            m[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    Ok(m)
}

pub fn divergence(f: &VectorField, x: &[f64], h: Option<f64>) -> Result<f64> {
    Ok(jacobian(f, x, h)?.matrix.trace())
}

/// `S = (J + J^T)/2 - tr(J)/n I`: the part of `J` that is neither
/// skew nor a multiple of the identity.
pub fn anticonformal_of(j: &DMatrix<f64>) -> DMatrix<f64> {
    let n = j.nrows();
    let tr = j.trace() / n as f64;
    DMatrix::from_fn(n, n, |a, b| {
        let s = 0.5 * (j[(a, b)] + j[(b, a)]);
        if a == b {
            s - tr
        } else {
            s
        }
    })
}

pub fn anticonformal_part(f: &VectorField, x: &[f64], h: Option<f64>) -> Result<DMatrix<f64>> {
    Ok(anticonformal_of(&jacobian(f, x, h)?.matrix))
}

/// `[X, Y](x) = DX(x) Y(x) - DY(x) X(x)`.
pub fn lie_bracket(
    fx: &VectorField,
    fy: &VectorField,
    x: &[f64],
    h: Option<f64>,
) -> Result<Vec<f64>> {
    if fx.dim() != fy.dim() {
        return Err(Error::InvalidArgument("bracket of fields of different dimension".into()));
    }
    let jx = jacobian(fx, x, h)?.matrix;
    let jy = jacobian(fy, x, h)?.matrix;
    let dxy = matvec(&jx, &fy.eval(x)?);
    let dyx = matvec(&jy, &fx.eval(x)?);
    Ok(dxy.iter().zip(&dyx).map(|(a, b)| a - b).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthSample {
    pub radius: f64,
    /// `max |f(x)| / (R log R)` over the sampled sphere `|x| = R`.
    pub ratio: f64,
}

/// Sample `|f(x)| / (R log R)` on spheres of the given radii.
///
/// Directions are deterministic: the coordinate axes (both signs) followed by
/// seeded Gaussian directions, `samples_per_radius` in total.
pub fn growth_ratio(
    f: &VectorField,
    radii: &[f64],
    samples_per_radius: usize,
) -> Result<Vec<GrowthSample>> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("empty radius list".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 1.0)) {
        return Err(Error::InvalidArgument(format!("radii must exceed 1, got {r}")));
    }
    if samples_per_radius == 0 {
        return Err(Error::InvalidArgument("need at least one sample per radius".into()));
    }
    let dirs = sphere_directions(f.dim(), samples_per_radius, 0x5eed);
    radii
        .iter()
        .map(|&r| {
            let denom = r * r.ln();
            let vals: Vec<Result<f64>> = dirs
                .iter()
                .map(|d| {
                    let x: Vec<f64> = d.iter().map(|v| r * v).collect();
                    Ok(norm(&f.eval(&x)?) / denom)
                })
                .collect();
            let (vals, _) = ae_collect(vals)?;
            Ok(GrowthSample {
                radius: r,
                ratio: vals.into_iter().fold(0.0, f64::max),
            })
        })
        .collect()
}

pub(crate) fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
    }
    out.truncate(count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let len = norm(&g);
        if len > 1e-12 {
            out.push(g.into_iter().map(|v| v / len).collect());
        }
    }
    out
}

/// Keep successful results, counting pointwise failures (singular or off-domain
/// stencils). Fails when more than [`SINGULAR_FRACTION`] of the points failed or
/// when a non-pointwise error occurred.
pub fn ae_collect<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, usize)> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) if e.is_pointwise() => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if skipped as f64 > SINGULAR_FRACTION * total as f64 {
        return Err(Error::TooManySingular {
            singular: skipped,
            total,
        });
    }
    Ok((ok, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainBox;
    use proptest::prelude::*;

    fn field(text: &str, n: usize, half: f64) -> VectorField {
        VectorField::parse(text, n, DomainBox::cube(n, half).unwrap()).unwrap()
    }

    fn xloga() -> VectorField {
        field("x1*log(sqrt(x1^2+x2^2)); x2*log(sqrt(x1^2+x2^2))", 2, 3.0)
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn jacobian_examples() {
        let id = field("x1; x2; x3", 3, 2.0);
        let j = jacobian(&id, &[0.3, 0.1, -0.4], None).unwrap();
        assert!(max_abs_diff(&j.matrix, &DMatrix::identity(3, 3)) < 1e-10);

        // symbolic oracle: D(x log|x|) = log|x| I + x x^T / |x|^2
        let j = jacobian(&xloga(), &[1.0, 0.0], Some(1e-5)).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(max_abs_diff(&j.matrix, &expect) < 1e-6);

        let p = [0.7, -1.1];
        let r2: f64 = p.iter().map(|v| v * v).sum();
        let oracle = DMatrix::from_fn(2, 2, |i, k| {
            let d = if i == k { 1.0 } else { 0.0 };
            0.5 * r2.ln() * d + p[i] * p[k] / r2
        });
        let j = jacobian(&xloga(), &p, None).unwrap();
        assert!(max_abs_diff(&j.matrix, &oracle) < 1e-8);
    }

    #[test]
    fn jacobian_requires_stencil_inside_domain() {
        let id = field("x1; x2", 2, 1.0);
        assert!(matches!(
            jacobian(&id, &[1.0, 0.0], Some(1e-3)),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn jacobian_retries_then_fails_at_singularity() {
        // |x1|^(1/2) has an infinite derivative but is finite at 0; log|x1| is not.
        let f = field("log(abs(x1)); 0", 2, 1.0);
        match jacobian(&f, &[0.0, 0.0], Some(1e-3)) {
            Ok(j) => panic!("expected failure, got {:?}", j.matrix),
            Err(e) => assert!(matches!(e, Error::Singular { .. })),
        }
        // a stencil that straddles a singular point only at the first step size
        let g = field("log(abs(x1 - 0.001)); 0", 2, 1.0);
        let j = jacobian(&g, &[0.0, 0.0], Some(1e-3)).unwrap();
        assert_eq!(j.step, 5e-4);
    }

    #[test]
    fn divergence_examples() {
        for n in 1..=4 {
            let text = (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(";");
            let id = field(&text, n, 2.0);
            let d = divergence(&id, &vec![0.2; n], None).unwrap();
            assert!((d - n as f64).abs() < 1e-9);
        }
        let rot = field("-x2; x1", 2, 2.0);
        assert!(divergence(&rot, &[0.4, 0.9], None).unwrap().abs() < 1e-10);
        // symbolic oracle: div(x log|x|) = n log|x| + 1
        let d = divergence(&xloga(), &[1.0, 0.0], Some(1e-5)).unwrap();
        assert!((d - 1.0).abs() < 1e-6);
        let p = [1.5, 1.2];
        let d = divergence(&xloga(), &p, None).unwrap();
        assert!((d - (2.0 * norm(&p).ln() + 1.0)).abs() < 1e-8);
    }

    #[test]
    fn anticonformal_examples() {
        let id = field("x1; x2", 2, 2.0);
        assert!(anticonformal_part(&id, &[0.1, 0.2], None).unwrap().abs().max() < 1e-10);
        let rot = field("-x2; x1", 2, 2.0);
        assert!(anticonformal_part(&rot, &[0.1, 0.2], None).unwrap().abs().max() < 1e-10);
        // symbolic oracle: S(x log|x|) = x x^T/|x|^2 - I/n
        let s = anticonformal_part(&xloga(), &[1.0, 0.0], Some(1e-5)).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]);
        assert!(max_abs_diff(&s, &expect) < 1e-6);
    }

    #[test]
    fn bracket_examples() {
        let dom = DomainBox::cube(2, 2.0).unwrap();
        let e1 = VectorField::constant(vec![1.0, 0.0], dom.clone()).unwrap();
        let e2 = VectorField::constant(vec![0.0, 1.0], dom.clone()).unwrap();
        assert_eq!(lie_bracket(&e1, &e2, &[0.3, 0.3], None).unwrap(), vec![0.0, 0.0]);

        // DX = 0 and DY X = e2, so DX(Y) - DY(X) = -e2
        let shear = VectorField::parse("0; x1", 2, dom.clone()).unwrap();
        for p in [[0.0, 0.0], [0.5, -1.0], [-1.2, 0.7]] {
            let b = lie_bracket(&e1, &shear, &p, None).unwrap();
            assert!((b[0]).abs() < 1e-10 && (b[1] + 1.0).abs() < 1e-10, "{b:?}");
        }

        // matrix-algebra oracle: [Ax, Bx] = (AB - BA) x
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 0.3]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.5, 2.0]);
        let fa = VectorField::linear(a.clone(), dom.clone()).unwrap();
        let fb = VectorField::linear(b.clone(), dom).unwrap();
        let p = [0.4, -0.9];
        let oracle = matvec(&(&a * &b - &b * &a), &p);
        let got = lie_bracket(&fa, &fb, &p, None).unwrap();
        assert!(norm(&crate::linalg::sub(&got, &oracle)) < 1e-9);
    }

    #[test]
    fn growth_examples() {
        let e = std::f64::consts::E;
        let dom = DomainBox::cube(2, 10.0).unwrap();
        let id = VectorField::parse("x1; x2", 2, dom.clone()).unwrap();
        let g = growth_ratio(&id, &[e, e * e], 16).unwrap();
        assert!((g[0].ratio - 1.0).abs() < 1e-14);
        assert!((g[1].ratio - 0.5).abs() < 1e-14);

        let xl = VectorField::parse(
            "x1*log(sqrt(x1^2+x2^2)); x2*log(sqrt(x1^2+x2^2))",
            2,
            dom.clone(),
        )
        .unwrap();
        for s in growth_ratio(&xl, &[1.5, 3.0, 9.0], 32).unwrap() {
            assert!((s.ratio - 1.0).abs() < 1e-12);
        }
        let z = VectorField::zero(dom);
        assert!(growth_ratio(&z, &[2.0], 8).unwrap().iter().all(|s| s.ratio == 0.0));
        assert!(growth_ratio(&z, &[], 8).is_err());
        assert!(growth_ratio(&z, &[1.0], 8).is_err());
    }

    fn rand_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| DMatrix::from_row_slice(n, n, &v))
    }

    proptest! {
        // No cancellation: |x| small enough that eps*|Ax|/h stays far below 1e-12.
        #[test]
        fn jacobian_reproduces_linear_maps(
            a in rand_matrix(3),
            x in prop::array::uniform3(-1e-3f64..1e-3),
        ) {
            let f = VectorField::linear(a.clone(), DomainBox::cube(3, 1.0).unwrap()).unwrap();
            for h in [1e-4, 1e-5, 1e-6] {
                let j = jacobian(&f, &x, Some(h)).unwrap();
                prop_assert!(max_abs_diff(&j.matrix, &a) <= 1e-12);
            }
        }

        #[test]
        fn anticonformal_symmetric_trace_free(
            x in prop::array::uniform2(-2.5f64..2.5),
        ) {
            let fields = [
                field("x1; x2", 2, 3.0),
                field("-x2; x1", 2, 3.0),
                xloga(),
                field("1; abs(x1)", 2, 3.0),
                VectorField::linear(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0]),
                    DomainBox::cube(2, 3.0).unwrap()).unwrap(),
            ];
            for f in &fields {
                let Ok(s) = anticonformal_part(f, &x, None) else { continue };
                prop_assert!(max_abs_diff(&s, &s.transpose()) <= 1e-12);
                let norm_s = s.norm();
                prop_assert!(s.trace().abs() <= 1e-10 * norm_s + 1e-14);
            }
        }

        #[test]
        fn bracket_antisymmetric_and_bilinear(
            x in prop::array::uniform3(-0.9f64..0.9),
            s in -3.0f64..3.0,
        ) {
            let d = DomainBox::cube(3, 1.0).unwrap();
            let fx = VectorField::parse("1; 0; x2", 3, d.clone()).unwrap();
            let fy = VectorField::parse("0; 1; x1", 3, d.clone()).unwrap();
            let fz = VectorField::parse("x2*x3; sin(x1); x1^2", 3, d).unwrap();
            let xy = lie_bracket(&fx, &fy, &x, None).unwrap();
            let yx = lie_bracket(&fy, &fx, &x, None).unwrap();
            for (a, b) in xy.iter().zip(&yx) {
                prop_assert_eq!(*a, -*b);
            }
            let h = Some(1e-5);
            // [s X + Z, Y] = s [X, Y] + [Z, Y]
            let comb = VectorField::sum(&VectorField::scale(s, &fx), &fz).unwrap();
            let lhs = lie_bracket(&comb, &fy, &x, h).unwrap();
            let r1 = lie_bracket(&fx, &fy, &x, h).unwrap();
            let r2 = lie_bracket(&fz, &fy, &x, h).unwrap();
            let rhs: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| s * a + b).collect();
            let scale = 1.0 + norm(&rhs);
            prop_assert!(norm(&crate::linalg::sub(&lhs, &rhs)) <= 1e-10 * scale);
        }
    }
}
