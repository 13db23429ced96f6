//! Built-in example fields and plane fields, addressed as `name` or
//! `name:p1,p2,...`.

use nalgebra::DMatrix;

use crate::domain::DomainBox;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::plane::PlaneField;

/// A loaded definition: either a vector field or a plane field.
#[derive(Debug, Clone)]
pub enum Definition {
    Field(VectorField),
    Plane(PlaneField),
}

impl Definition {
    pub fn dim(&self) -> usize {
        match self {
            Definition::Field(f) => f.dim(),
            Definition::Plane(e) => e.n(),
        }
    }

    pub fn field(self) -> Result<VectorField> {
        match self {
            Definition::Field(f) => Ok(f),
            Definition::Plane(_) => Err(Error::InvalidArgument("expected a vector field, got a plane field".into())),
        }
    }

    pub fn plane(self) -> Result<PlaneField> {
        match self {
            Definition::Plane(e) => Ok(e),
            Definition::Field(_) => Err(Error::InvalidArgument("expected a plane field, got a vector field".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Field,
    Plane,
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: EntryKind,
    /// Parameter syntax, empty when the entry takes none.
    pub params: &'static str,
    pub description: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry { name: "identity", kind: EntryKind::Field, params: "[n]", description: "f(x) = x on [-2,2]^n, n = 2 by default" },
    CatalogEntry { name: "rotation2d", kind: EntryKind::Field, params: "", description: "(-x2, x1) on [-2,2]^2" },
    CatalogEntry { name: "linear", kind: EntryKind::Field, params: "[a11,a12,...]", description: "x -> Ax on [-2,2]^n, row-major square A; diag(2,-1) by default" },
    CatalogEntry { name: "xloga", kind: EntryKind::Field, params: "", description: "x log|x| on [-3,3]^2, singular at the origin" },
    CatalogEntry { name: "xloga1d", kind: EntryKind::Field, params: "", description: "x log|x| on [0.25, 4]" },
    CatalogEntry { name: "abskink", kind: EntryKind::Field, params: "", description: "(1, |x1|) on [-2,2]^2" },
    CatalogEntry { name: "constant", kind: EntryKind::Field, params: "i[,n]", description: "unit vector e_i in R^n on [-2,2]^n, n = 2 by default" },
    CatalogEntry { name: "contact3d", kind: EntryKind::Plane, params: "", description: "span(e1, e2 + x1 e3) on [-1,1]^3, not involutive" },
    CatalogEntry { name: "coords", kind: EntryKind::Plane, params: "k,n", description: "span(e1, ..., ek) on [-1,1]^n" },
    CatalogEntry { name: "graph-parabola3d", kind: EntryKind::Plane, params: "", description: "tangent planes of z = (x^2 + y^2)/2 translates on [-1,1]^3" },
    CatalogEntry { name: "graph-xy3d", kind: EntryKind::Plane, params: "", description: "tangent planes of z = xy translates on [-1,1]^3" },
    CatalogEntry { name: "graph-rough3d", kind: EntryKind::Plane, params: "", description: "tangent planes of z = xy log(x^2 + y^2) translates on [-1,1]^3; the axis x = y = 0 is singular" },
    CatalogEntry { name: "squeeze2d", kind: EntryKind::Plane, params: "[lambda]", description: "span(e1 - lambda x2 e2) on [-2,2] x [-100,100], lambda = 150 by default; the chart loses injectivity near ln(1000)/lambda" },
];

/// Field names covered by sweeps over "every catalog field".
pub const FIELD_EXAMPLES: &[&str] = &["identity", "rotation2d", "linear", "xloga", "xloga1d", "abskink", "constant:1"];

fn params(name: &str, raw: Option<&str>) -> Result<Vec<f64>> {
    let Some(raw) = raw else { return Ok(Vec::new()) };
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad parameter `{s}` for catalog entry `{name}`")))
        })
        .collect()
}

fn count(name: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v <= 64.0 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidArgument(format!("`{name}` needs a positive integer parameter, got {v}")))
    }
}

fn no_params(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("catalog entry `{name}` takes no parameters")))
    }
}

pub fn load_catalog(entry: &str) -> Result<Definition> {
    let (name, raw) = match entry.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (entry.trim(), None),
    };
    let p = params(name, raw)?;
    let field = |text: &str, n: usize, domain: DomainBox| -> Result<Definition> {
        Ok(Definition::Field(VectorField::parse(text, n, domain)?.with_label(entry)))
    };
    let plane = |frame: &[&str], domain: DomainBox| -> Result<Definition> {
        Ok(Definition::Plane(PlaneField::parse(frame, domain)?))
    };
    match name {
        "identity" => {
            let n = match p.as_slice() {
                [] => 2,
                [v] => count(name, *v)?,
                _ => return Err(Error::InvalidArgument("identity takes one parameter".into())),
            };
            let text = (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join("; ");
            field(&text, n, DomainBox::cube(n, 2.0)?)
        }
        "rotation2d" => {
            no_params(name, &p)?;
            field("-x2; x1", 2, DomainBox::cube(2, 2.0)?)
        }
        "linear" => {
            let entries = if p.is_empty() { vec![2.0, 0.0, 0.0, -1.0] } else { p };
            let n = (entries.len() as f64).sqrt().round() as usize;
            if n == 0 || n * n != entries.len() {
                return Err(Error::InvalidArgument(format!(
                    "linear needs n^2 entries, got {}",
                    entries.len()
                )));
            }
            let a = DMatrix::from_row_slice(n, n, &entries);
            Ok(Definition::Field(VectorField::linear(a, DomainBox::cube(n, 2.0)?)?.with_label(entry)))
        }
        "xloga" => {
            no_params(name, &p)?;
            field(
                "x1*log(sqrt(x1^2+x2^2)); x2*log(sqrt(x1^2+x2^2))",
                2,
                DomainBox::cube(2, 3.0)?,
            )
        }
        "xloga1d" => {
            no_params(name, &p)?;
            field("x1*log(abs(x1))", 1, DomainBox::new(vec![0.25], vec![4.0])?)
        }
        "abskink" => {
            no_params(name, &p)?;
            field("1; abs(x1)", 2, DomainBox::cube(2, 2.0)?)
        }
        "constant" => {
            let (i, n) = match p.as_slice() {
                [i] => (count(name, *i)?, 2),
                [i, n] => (count(name, *i)?, count(name, *n)?),
                _ => return Err(Error::InvalidArgument("constant takes i[,n]".into())),
            };
            if i > n {
                return Err(Error::InvalidArgument(format!("constant:{i},{n} has i > n")));
            }
            let mut v = vec![0.0; n];
            v[i - 1] = 1.0;
            Ok(Definition::Field(VectorField::constant(v, DomainBox::cube(n, 2.0)?)?.with_label(entry)))
        }
        "contact3d" => {
            no_params(name, &p)?;
            plane(&["1; 0; 0", "0; 1; x1"], DomainBox::cube(3, 1.0)?)
        }
        "coords" => {
            let (k, n) = match p.as_slice() {
                [k, n] => (count(name, *k)?, count(name, *n)?),
                _ => return Err(Error::InvalidArgument("coords takes k,n".into())),
            };
            if k >= n {
                return Err(Error::InvalidArgument(format!("coords:{k},{n} needs k < n")));
            }
            let frame: Vec<String> = (0..k)
                .map(|i| {
                    (0..n).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join("; ")
                })
                .collect();
            let refs: Vec<&str> = frame.iter().map(String::as_str).collect();
            plane(&refs, DomainBox::cube(n, 1.0)?)
        }
        "graph-parabola3d" => {
            no_params(name, &p)?;
            plane(&["1; 0; x1", "0; 1; x2"], DomainBox::cube(3, 1.0)?)
        }
        "graph-xy3d" => {
            no_params(name, &p)?;
            plane(&["1; 0; x2", "0; 1; x1"], DomainBox::cube(3, 1.0)?)
        }
        "graph-rough3d" => {
            no_params(name, &p)?;
            plane(
                &[
                    "1; 0; x2*log(x1^2+x2^2) + 2*x1^2*x2/(x1^2+x2^2)",
                    "0; 1; x1*log(x1^2+x2^2) + 2*x1*x2^2/(x1^2+x2^2)",
                ],
                DomainBox::cube(3, 1.0)?,
            )
        }
        "squeeze2d" => {
            let lambda = match p.as_slice() {
                [] => 150.0,
                [l] if *l > 0.0 && l.is_finite() => *l,
                _ => return Err(Error::InvalidArgument("squeeze2d takes one positive parameter".into())),
            };
            plane(
                &[&format!("1; -{lambda:?}*x2")],
                DomainBox::new(vec![-2.0, -100.0], vec![2.0, 100.0])?,
            )
        }
        _ => Err(Error::UnknownCatalog(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    #[test]
    fn every_entry_loads() {
        for e in CATALOG {
            let entry = match e.name {
                "constant" => "constant:1",
                "coords" => "coords:2,3",
                n => n,
            };
            let d = load_catalog(entry).unwrap();
            assert_eq!(matches!(d, Definition::Field(_)), e.kind == EntryKind::Field, "{entry}");
        }
        for f in FIELD_EXAMPLES {
            load_catalog(f).unwrap().field().unwrap();
        }
    }

    #[test]
    fn field_examples() {
        let id = load_catalog("identity:3").unwrap().field().unwrap();
        assert_eq!(id.eval(&[0.5, -1.0, 1.5]).unwrap(), vec![0.5, -1.0, 1.5]);
        let rot = load_catalog("rotation2d").unwrap().field().unwrap();
        assert_eq!(rot.eval(&[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        let x = load_catalog("xloga").unwrap().field().unwrap();
        let e = std::f64::consts::E;
        assert!(dist(&x.eval(&[e, 0.0]).unwrap(), &[e, 0.0]) < 1e-15);
        let lin = load_catalog("linear:1,2,3,4").unwrap().field().unwrap();
        assert_eq!(lin.eval(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        let c = load_catalog("constant:3,4").unwrap().field().unwrap();
        assert_eq!(c.eval(&[0.0; 4]).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn plane_examples() {
        let q = [0.3, -0.4, 0.1];
        let c = load_catalog("contact3d").unwrap().plane().unwrap();
        let b = c.frame_matrix(&q).unwrap();
        assert_eq!(b.column(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.3]);
        let g = load_catalog("graph-parabola3d").unwrap().plane().unwrap();
        let b = g.frame_matrix(&q).unwrap();
        assert_eq!((b[(2, 0)], b[(2, 1)]), (0.3, -0.4));
        let co = load_catalog("coords:2,4").unwrap().plane().unwrap();
        assert_eq!((co.n(), co.k()), (4, 2));
    }

    #[test]
    fn rough_graph_frame_matches_differentiated_height() {
        // central differences of g = xy log(x^2 + y^2)
        let g = |x: f64, y: f64| x * y * (x * x + y * y).ln();
        let e = load_catalog("graph-rough3d").unwrap().plane().unwrap();
        let h = 1e-6;
        for (x, y) in [(0.3, -0.2), (-0.7, 0.5), (0.05, 0.9)] {
            let b = e.frame_matrix(&[x, y, 0.0]).unwrap();
            let gx = (g(x + h, y) - g(x - h, y)) / (2.0 * h);
            let gy = (g(x, y + h) - g(x, y - h)) / (2.0 * h);
            assert!((b[(2, 0)] - gx).abs() < 1e-8);
            assert!((b[(2, 1)] - gy).abs() < 1e-8);
        }
        assert!(e.frame_matrix(&[0.0, 0.0, 0.5]).is_err());
    }

    #[test]
    fn bad_names_and_parameters() {
        assert_eq!(load_catalog("nope").unwrap_err(), Error::UnknownCatalog("nope".into()));
        assert!(matches!(load_catalog("linear:1,2,3"), Err(Error::InvalidArgument(_))));
        assert!(matches!(load_catalog("coords:3,3"), Err(Error::InvalidArgument(_))));
        assert!(matches!(load_catalog("rotation2d:1"), Err(Error::InvalidArgument(_))));
        assert!(matches!(load_catalog("identity:x"), Err(Error::InvalidArgument(_))));
        assert!(matches!(load_catalog("constant:0"), Err(Error::InvalidArgument(_))));
    }
}
