//! Sampled lower bounds for the Q, Zygmund and Lipschitz seminorms and for the
//! essential supremum of the anticonformal part.
//!
//! Base points come from a Halton sequence in the domain shrunk by the largest
//! radius. Base point `i` owns its own ChaCha stream, so a configuration with
//! more base points or more pairs samples a superset of a smaller one.

use std::ops::Range;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{anticonformal_part, SINGULAR_FRACTION};
use crate::domain::DomainBox;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::{add, dist, dot, norm, op_norm, percentile, sub, sym_eigenvalues};

/// Starting perturbation factor of the local refinement.
const REFINE_DELTA: f64 = 0.3;
const REFINE_DECAY: f64 = 0.8;
/// Refinement starts taken from each nested sub-configuration.
const STARTS_PER_LEVEL: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub base_points: usize,
    pub direction_pairs: usize,
    /// `|a|` values; pair `j` uses `radii[j % radii.len()]`.
    pub radii: Vec<f64>,
    pub rng_seed: u64,
    pub refine_steps: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            base_points: 200,
            direction_pairs: 400,
            radii: geometric_radii(0.5, 8),
            rng_seed: 0,
            refine_steps: 20,
        }
    }
}

/// `r_max, r_max/2, ...`, `count` values.
pub fn geometric_radii(r_max: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| r_max * 0.5f64.powi(i as i32)).collect()
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base_points == 0 || self.direction_pairs == 0 {
            return Err(Error::InvalidArgument("sample counts must be at least 1".into()));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "radii must be a non-empty list of positive reals, got {:?}",
                self.radii
            )));
        }
        Ok(())
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    /// Same seed and radii, `factor` times the base points and pairs.
    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            base_points: self.base_points * factor,
            direction_pairs: self.direction_pairs * factor,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeminormKind {
    Q,
    Zygmund,
    Lipschitz,
    SfEssSup,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Base point and the two increments of the Q quotient.
    Triple { x: Vec<f64>, a: Vec<f64>, b: Vec<f64> },
    /// Zygmund: base point and increment. Lipschitz: the two points.
    Pair { x: Vec<f64>, y: Vec<f64> },
    Point { x: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormEstimate {
    pub kind: SeminormKind,
    /// Lower bound of the supremum.
    pub value: f64,
    pub witness: Witness,
    pub config: SamplingConfig,
    /// Quotients evaluated before refinement.
    pub samples: usize,
    /// Samples dropped because an evaluation was singular.
    pub skipped: usize,
    /// 99th percentile of the raw samples, for the essential-supremum variant.
    pub p99: Option<f64>,
    /// Finite-difference step of the Jacobians, when one is used.
    pub fd_step: Option<f64>,
}

impl SeminormEstimate {
    /// Re-evaluate the quotient at the witness.
    pub fn recompute(&self, f: &VectorField) -> Result<f64> {
        match (&self.kind, &self.witness) {
            (SeminormKind::Q, Witness::Triple { x, a, b }) => q_quotient(f, x, a, b),
            (SeminormKind::Zygmund, Witness::Pair { x, y }) => zygmund_quotient(f, x, y),
            (SeminormKind::Lipschitz, Witness::Pair { x, y }) => lipschitz_quotient(f, x, y),
            (SeminormKind::SfEssSup, Witness::Point { x }) => sf_norm(f, x, self.fd_step),
            _ => Err(Error::InvalidArgument("witness does not match the seminorm kind".into())),
        }
    }
}

/// `|f(x+y) + f(x-y) - 2 f(x)| / |y|`.
pub fn zygmund_quotient(f: &VectorField, x: &[f64], y: &[f64]) -> Result<f64> {
    let fx = f.eval(x)?;
    let fp = f.eval(&add(x, y))?;
    let fm = f.eval(&sub(x, y))?;
    let d: Vec<f64> = (0..fx.len())
        .map(|i| (fp[i] - fx[i]) + (fm[i] - fx[i]))
        .collect();
    Ok(norm(&d) / norm(y))
}

/// `|<a, f(x+a) - f(x)>/|a|^2 - <b, f(x+b) - f(x)>/|b|^2|`.
pub fn q_quotient(f: &VectorField, x: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    if x.len() == 1 && b[0] == -a[0] {
        // on the line the quotient is the second difference over |a|
        return zygmund_quotient(f, x, a);
    }
    let fx = f.eval(x)?;
    let fa = f.eval(&add(x, a))?;
    let fb = f.eval(&add(x, b))?;
    let qa = dot(a, &sub(&fa, &fx)) / dot(a, a);
    let qb = dot(b, &sub(&fb, &fx)) / dot(b, b);
    Ok((qa - qb).abs())
}

/// `|f(x) - f(y)| / |x - y|`.
pub fn lipschitz_quotient(f: &VectorField, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(dist(&f.eval(x)?, &f.eval(y)?) / dist(x, y))
}

fn sf_norm(f: &VectorField, x: &[f64], h: Option<f64>) -> Result<f64> {
    Ok(op_norm(&anticonformal_part(f, x, h)?))
}

/// `lambda_max - lambda_min` of the symmetric part: the Q seminorm of `x -> Ax`.
pub fn q_oracle_linear(a: &DMatrix<f64>) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    let ev = sym_eigenvalues(&sym);
    match (ev.first(), ev.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    }
}

pub fn estimate_q(f: &VectorField, cfg: &SamplingConfig) -> Result<SeminormEstimate> {
    let n = f.dim();
    if n == 1 {
        let obj = |v: &[f64]| q_quotient(f, &v[..1], &v[1..2], &[-v[1]]);
        let wit = |v: &[f64]| Witness::Triple {
            x: v[..1].to_vec(),
            a: v[1..2].to_vec(),
            b: vec![-v[1]],
        };
        return run(f, cfg, SeminormKind::Q, &obj, &|_| {}, &wit, 1..2, |x, a, _| [x, a].concat());
    }
    let obj = |v: &[f64]| q_quotient(f, &v[..n], &v[n..2 * n], &v[2 * n..]);
    let normalize = |v: &mut [f64]| {
        let ra = norm(&v[n..2 * n]);
        let rb = norm(&v[2 * n..]);
        if rb > 0.0 {
            v[2 * n..].iter_mut().for_each(|c| *c *= ra / rb);
        }
    };
    let wit = |v: &[f64]| Witness::Triple {
        x: v[..n].to_vec(),
        a: v[n..2 * n].to_vec(),
        b: v[2 * n..].to_vec(),
    };
    run(f, cfg, SeminormKind::Q, &obj, &normalize, &wit, n..2 * n, |x, a, b| {
        [x, a, b].concat()
    })
}

pub fn estimate_zygmund(f: &VectorField, cfg: &SamplingConfig) -> Result<SeminormEstimate> {
    let n = f.dim();
    let obj = |v: &[f64]| zygmund_quotient(f, &v[..n], &v[n..]);
    let wit = |v: &[f64]| Witness::Pair {
        x: v[..n].to_vec(),
        y: v[n..].to_vec(),
    };
    run(f, cfg, SeminormKind::Zygmund, &obj, &|_| {}, &wit, n..2 * n, |x, a, _| {
        [x, a].concat()
    })
}

pub fn estimate_lipschitz(f: &VectorField, cfg: &SamplingConfig) -> Result<SeminormEstimate> {
    let n = f.dim();
    let obj = |v: &[f64]| lipschitz_quotient(f, &v[..n], &add(&v[..n], &v[n..]));
    let wit = |v: &[f64]| Witness::Pair {
        x: v[..n].to_vec(),
        y: add(&v[..n], &v[n..]),
    };
    run(f, cfg, SeminormKind::Lipschitz, &obj, &|_| {}, &wit, n..2 * n, |x, a, _| {
        [x, a].concat()
    })
}

/// Max over base points of `|Sf(x)|`; the estimate also carries the 99th
/// percentile. Only `base_points` and the largest radius (as a boundary
/// margin) of the config are used.
pub fn estimate_sf_esssup(
    f: &VectorField,
    cfg: &SamplingConfig,
    h: Option<f64>,
) -> Result<SeminormEstimate> {
    let one = SamplingConfig {
        direction_pairs: 1,
        ..cfg.clone()
    };
    let obj = |v: &[f64]| sf_norm(f, v, h);
    let wit = |v: &[f64]| Witness::Point { x: v.to_vec() };
    let mut est = run(f, &one, SeminormKind::SfEssSup, &obj, &|_| {}, &wit, 0..0, |x, _, _| {
        x.to_vec()
    })?;
    est.config = cfg.clone();
    est.fd_step = h;
    Ok(est)
}

type Objective<'a> = dyn Fn(&[f64]) -> Result<f64> + Sync + 'a;

struct Sample {
    i: usize,
    j: usize,
    value: f64,
    vars: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run(
    f: &VectorField,
    cfg: &SamplingConfig,
    kind: SeminormKind,
    obj: &Objective,
    normalize: &(dyn Fn(&mut [f64]) + Sync),
    witness: &dyn Fn(&[f64]) -> Witness,
    increment: Range<usize>,
    pack: impl Fn(&[f64], &[f64], &[f64]) -> Vec<f64> + Sync,
) -> Result<SeminormEstimate> {
    cfg.validate()?;
    let n = f.dim();
    let region = f.domain().shrink(cfg.max_radius())?;
    let pairs = cfg.direction_pairs;

    let rows: Vec<Result<Vec<Option<Sample>>>> = (0..cfg.base_points)
        .into_par_iter()
        .map(|i| {
            let x = region.from_unit(&halton(i + 1, n));
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rng.set_stream(i as u64);
            (0..pairs)
                .map(|j| {
                    let r = cfg.radii[j % cfg.radii.len()];
                    let a: Vec<f64> = direction(&mut rng, n).into_iter().map(|c| c * r).collect();
                    let mut b: Vec<f64> = direction(&mut rng, n).into_iter().map(|c| c * r).collect();
                    if n == 1 {
                        b = vec![-a[0]];
                    }
                    let vars = pack(&x, &a, &b);
                    match obj(&vars) {
                        Ok(value) if value.is_finite() => Ok(Some(Sample { i, j, value, vars })),
                        Ok(_) => Ok(None),
                        Err(e) if e.is_pointwise() => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let total = cfg.base_points * pairs;
    let skipped = rows.iter().flatten().filter(|s| s.is_none()).count();
    if skipped as f64 > SINGULAR_FRACTION * total as f64 || skipped == total {
        return Err(Error::TooManySingular {
            singular: skipped,
            total,
        });
    }
    let raw: Vec<f64> = rows.iter().flatten().flatten().map(|s| s.value).collect();
    let p99 = (kind == SeminormKind::SfEssSup).then(|| percentile(&raw, 0.99));

    // refinement starts: the best few samples of every nested sub-configuration
    // (ceil(B / 2^l), ceil(P / 2^l)), so doubling the effort only adds starts
    let mut starts: Vec<&Sample> = Vec::new();
    let (mut bl, mut pl) = (cfg.base_points, pairs);
    loop {
        let mut level: Vec<&Sample> = rows[..bl]
            .iter()
            .flat_map(|row| row[..pl].iter().flatten())
            .collect();
        level.sort_by(|s, t| t.value.total_cmp(&s.value).then(s.i.cmp(&t.i)).then(s.j.cmp(&t.j)));
        starts.extend(level.into_iter().take(STARTS_PER_LEVEL));
        if bl == 1 && pl == 1 {
            break;
        }
        bl = bl.div_ceil(2);
        pl = pl.div_ceil(2);
    }
    starts.sort_by_key(|s| (s.i, s.j));
    starts.dedup_by_key(|s| (s.i, s.j));
    let best_raw = rows
        .iter()
        .flatten()
        .flatten()
        .fold(None::<&Sample>, |acc, s| match acc {
            Some(b) if b.value >= s.value => Some(b),
            _ => Some(s),
        })
        .expect("at least one sample survived");

    // refined increments stay within the configured radii, below which the
    // quotients only amplify rounding
    let r_min = cfg.radii.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = cfg.max_radius();
    let admissible = |v: &[f64]| {
        increment.is_empty() || {
            let r = norm(&v[increment.clone()]);
            r_min <= r && r <= r_max
        }
    };
    let refined: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|s| refine(obj, normalize, &admissible, &s.vars, s.value, cfg.refine_steps))
        .collect();
    let mut best = (best_raw.value, best_raw.vars.clone());
    for (v, vars) in refined {
        if v > best.0 {
            best = (v, vars);
        }
    }
    Ok(SeminormEstimate {
        kind,
        value: best.0,
        witness: witness(&best.1),
        config: cfg.clone(),
        samples: total,
        skipped,
        p99,
        fd_step: None,
    })
}

/// Coordinate-wise multiplicative hill climbing; a candidate replaces the
/// current point only if its quotient is strictly larger.
fn refine(
    obj: &Objective,
    normalize: &(dyn Fn(&mut [f64]) + Sync),
    admissible: &(dyn Fn(&[f64]) -> bool + Sync),
    start: &[f64],
    value: f64,
    steps: usize,
) -> (f64, Vec<f64>) {
    let mut v = start.to_vec();
    let mut best = value;
    // additive scale for coordinates that are (nearly) zero
    let floor = norm(start).max(1e-3) * 1e-3;
    let mut delta = REFINE_DELTA;
    for _ in 0..steps {
        for c in 0..v.len() {
            for sign in [1.0, -1.0] {
                let mut t = v.clone();
                t[c] = if t[c].abs() > floor {
                    t[c] * (1.0 + sign * delta)
                } else {
                    t[c] + sign * delta * floor
                };
                normalize(&mut t);
                if !admissible(&t) {
                    continue;
                }
                if let Ok(q) = obj(&t) {
                    if q > best {
                        best = q;
                        v = t;
                        break;
                    }
                }
            }
        }
        delta *= REFINE_DECAY;
    }
    (best, v)
}

fn direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let len = norm(&g);
        if len > 1e-12 {
            return g.into_iter().map(|v| v / len).collect();
        }
    }
}

/// Point `index` (from 1) of the Halton sequence in `[0, 1]^n`.
pub fn halton(index: usize, n: usize) -> Vec<f64> {
    primes(n)
        .into_iter()
        .map(|p| {
            let (mut i, mut f, mut r) = (index, 1.0, 0.0);
            while i > 0 {
                f /= p as f64;
                r += f * (i % p) as f64;
                i /= p;
            }
            r
        })
        .collect()
}

fn primes(count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let mut c = 2;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Domain on which base points are drawn for `cfg`.
pub fn sampling_region(f: &VectorField, cfg: &SamplingConfig) -> Result<DomainBox> {
    cfg.validate()?;
    f.domain().shrink(cfg.max_radius())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cube(n: usize, half: f64) -> DomainBox {
        DomainBox::cube(n, half).unwrap()
    }

    fn small() -> SamplingConfig {
        SamplingConfig {
            base_points: 50,
            direction_pairs: 60,
            ..SamplingConfig::default()
        }
    }

    fn linear(a: &[f64], n: usize) -> VectorField {
        VectorField::linear(DMatrix::from_row_slice(n, n, a), cube(n, 2.0)).unwrap()
    }

    #[test]
    fn halton_prefix() {
        assert_eq!(halton(1, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(4, 1), vec![0.125]);
        assert_eq!(primes(6), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(q_oracle_linear(&DMatrix::identity(3, 3)), 0.0);
        assert_eq!(q_oracle_linear(&DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])), 0.0);
        assert!((q_oracle_linear(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0])) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn q_examples() {
        let id = VectorField::parse("x1; x2", 2, cube(2, 2.0)).unwrap();
        assert!(estimate_q(&id, &small()).unwrap().value <= 1e-12);
        let rot = VectorField::parse("-x2; x1", 2, cube(2, 2.0)).unwrap();
        assert!(estimate_q(&rot, &small()).unwrap().value <= 1e-12);
        let cfg = SamplingConfig {
            base_points: 100,
            direction_pairs: 200,
            ..SamplingConfig::default()
        };
        let d = estimate_q(&linear(&[2.0, 0.0, 0.0, -1.0], 2), &cfg).unwrap();
        assert!((d.value - 3.0).abs() <= 0.06, "{}", d.value);
        assert!(d.value <= 3.0 + 1e-9);
    }

    #[test]
    fn q_matches_linear_oracle_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 3] {
            for _ in 0..5 {
                let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-2.0..2.0)).collect();
                let oracle = q_oracle_linear(&DMatrix::from_row_slice(n, n, &a));
                let est = estimate_q(&linear(&a, n), &SamplingConfig::default()).unwrap();
                assert!(
                    (est.value - oracle).abs() <= 0.02 * oracle,
                    "n={n}: {} vs {oracle}",
                    est.value
                );
            }
        }
    }

    #[test]
    fn zygmund_examples() {
        let z = estimate_zygmund(&linear(&[0.3, -1.2, 2.0, 0.7], 2), &small()).unwrap();
        assert!(z.value <= 1e-12, "{}", z.value);
        let zero = VectorField::zero(cube(3, 1.0));
        assert_eq!(estimate_zygmund(&zero, &small()).unwrap().value, 0.0);
    }

    #[test]
    fn one_dimensional_pairing_is_bitwise() {
        let dom = DomainBox::new(vec![0.25], vec![4.0]).unwrap();
        let f = VectorField::parse("x1*log(abs(x1))", 1, dom).unwrap();
        let cfg = SamplingConfig {
            radii: geometric_radii(0.2, 6),
            ..small()
        };
        let q = estimate_q(&f, &cfg).unwrap();
        let z = estimate_zygmund(&f, &cfg).unwrap();
        assert!(z.value > 0.0);
        assert_eq!(q.value.to_bits(), z.value.to_bits());
        let (Witness::Triple { x, a, b }, Witness::Pair { x: zx, y }) = (&q.witness, &z.witness) else {
            panic!("unexpected witnesses");
        };
        assert_eq!((x, a), (zx, y));
        assert_eq!(b[0], -a[0]);
        // quotient identity holds sample by sample
        for &(x, a) in &[(1.0, 0.1), (0.5, -0.2), (3.3, 0.05)] {
            assert_eq!(
                q_quotient(&f, &[x], &[a], &[-a]).unwrap().to_bits(),
                zygmund_quotient(&f, &[x], &[a]).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn lipschitz_examples() {
        let a = [0.5, -1.0, 1.5, 0.2];
        let l = estimate_lipschitz(&linear(&a, 2), &small()).unwrap();
        let oracle = op_norm(&DMatrix::from_row_slice(2, 2, &a));
        assert!((l.value - oracle).abs() <= 0.02 * oracle);
        let rot = VectorField::parse("-x2; x1", 2, cube(2, 2.0)).unwrap();
        assert!((estimate_lipschitz(&rot, &small()).unwrap().value - 1.0).abs() <= 0.02);
        let c = VectorField::constant(vec![1.0, -3.0], cube(2, 1.0)).unwrap();
        assert_eq!(estimate_lipschitz(&c, &small()).unwrap().value, 0.0);
    }

    #[test]
    fn sf_examples() {
        let id = VectorField::parse("x1; x2", 2, cube(2, 2.0)).unwrap();
        assert!(estimate_sf_esssup(&id, &small(), None).unwrap().value <= 1e-9);
        let xlog = VectorField::parse(
            "x1*log(sqrt(x1^2+x2^2)); x2*log(sqrt(x1^2+x2^2))",
            2,
            cube(2, 3.0),
        )
        .unwrap();
        let s = estimate_sf_esssup(&xlog, &small(), None).unwrap();
        assert!((s.value - 0.5).abs() <= 0.01, "{}", s.value);
        assert!((s.p99.unwrap() - 0.5).abs() <= 0.01);
        let d = estimate_sf_esssup(&linear(&[2.0, 0.0, 0.0, -1.0], 2), &small(), None).unwrap();
        assert!((d.value - 1.5).abs() <= 0.03);
    }

    #[test]
    fn witness_recomputes_value() {
        let f = VectorField::parse("abs(x1) + x2^2; sin(3*x1*x2)", 2, cube(2, 1.5)).unwrap();
        let cfg = small();
        for est in [
            estimate_q(&f, &cfg).unwrap(),
            estimate_zygmund(&f, &cfg).unwrap(),
            estimate_lipschitz(&f, &cfg).unwrap(),
            estimate_sf_esssup(&f, &cfg, None).unwrap(),
        ] {
            assert!(est.value >= 0.0);
            assert!((est.recompute(&f).unwrap() - est.value).abs() <= 1e-12, "{:?}", est.kind);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let f = VectorField::parse("abs(x1)*x2; x1 - x2^3", 2, cube(2, 1.0)).unwrap();
        let cfg = small();
        let pool = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        let one = pool(1).install(|| estimate_q(&f, &cfg).unwrap());
        let four = pool(4).install(|| estimate_q(&f, &cfg).unwrap());
        assert_eq!(one, four);
        assert_eq!(one, estimate_q(&f, &cfg).unwrap());
    }

    #[test]
    fn more_effort_never_lowers_the_estimate() {
        let fields = [
            VectorField::parse("abs(x1)*x2; x1 - x2^3", 2, cube(2, 1.0)).unwrap(),
            VectorField::parse("1; abs(x1)", 2, cube(2, 1.0)).unwrap(),
        ];
        let base = SamplingConfig {
            base_points: 20,
            direction_pairs: 15,
            ..SamplingConfig::default()
        };
        for f in &fields {
            let mut prev = [0.0; 3];
            for factor in [1, 2, 4] {
                let c = base.scaled(factor);
                let now = [
                    estimate_q(f, &c).unwrap().value,
                    estimate_zygmund(f, &c).unwrap().value,
                    estimate_lipschitz(f, &c).unwrap().value,
                ];
                for k in 0..3 {
                    assert!(now[k] >= prev[k], "{now:?} < {prev:?}");
                }
                prev = now;
            }
        }
    }

    #[test]
    fn radius_larger_than_domain() {
        let f = VectorField::zero(cube(2, 0.2));
        let r = estimate_q(&f, &SamplingConfig::default());
        assert!(matches!(r, Err(Error::DegenerateDomain(_))), "{r:?}");
        let bad = SamplingConfig {
            base_points: 0,
            ..SamplingConfig::default()
        };
        assert!(matches!(estimate_q(&f, &bad), Err(Error::InvalidArgument(_))));
    }
}
