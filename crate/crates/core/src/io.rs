//! JSON definition files and CSV export of meshes and trajectories.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::Definition;
use crate::chart::SliceMesh;
use crate::domain::DomainBox;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::flow::Trajectory;
use crate::plane::PlaneField;

/// `{"n", "field"}` for a vector field or `{"n", "k", "frame", "domain"}` for a
/// plane field. The domain defaults to `[-1, 1]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DefinitionFile {
    Plane {
        n: usize,
        k: usize,
        frame: Vec<String>,
        #[serde(default)]
        domain: Option<DomainBox>,
    },
    Field {
        n: usize,
        field: String,
        #[serde(default)]
        domain: Option<DomainBox>,
    },
}

impl DefinitionFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Syntax {
            pos: 0,
            msg: format!("definition file: {e}"),
        })
    }

    pub fn build(&self) -> Result<Definition> {
        let domain = |n: usize, d: &Option<DomainBox>| -> Result<DomainBox> {
            let d = match d {
                Some(d) => d.clone(),
                None => DomainBox::cube(n, 1.0)?,
            };
            if d.dim() != n {
                return Err(Error::Arity {
                    expected: n,
                    found: d.dim(),
                });
            }
            Ok(d)
        };
        match self {
            DefinitionFile::Field { n, field, domain: d } => {
                Ok(Definition::Field(VectorField::parse(field, *n, domain(*n, d)?)?))
            }
            DefinitionFile::Plane {
                n,
                k,
                frame,
                domain: d,
            } => {
                if frame.len() != *k {
                    return Err(Error::Arity {
                        expected: *k,
                        found: frame.len(),
                    });
                }
                let refs: Vec<&str> = frame.iter().map(String::as_str).collect();
                let dom = domain(*n, d)?;
                let e = PlaneField::parse(&refs, dom)?;
                if e.n() != *n {
                    return Err(Error::Arity {
                        expected: *n,
                        found: e.n(),
                    });
                }
                Ok(Definition::Plane(e))
            }
        }
    }
}

pub fn load_definition(text: &str) -> Result<Definition> {
    DefinitionFile::from_json(text)?.build()
}

pub fn mesh_csv_header(k: usize, n: usize) -> String {
    let mut cols: Vec<String> = (1..=k).map(|i| format!("u{i}")).collect();
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.push("residual".into());
    cols.join(",")
}

/// Columns `u1..uk, x1..xn, residual`.
pub fn write_mesh_csv<W: Write>(mesh: &SliceMesh, out: &mut W) -> std::io::Result<()> {
    let k = mesh.params.first().map_or(0, Vec::len);
    let n = mesh.points.first().map_or(0, Vec::len);
    writeln!(out, "{}", mesh_csv_header(k, n))?;
    for ((u, x), r) in mesh.params.iter().zip(&mesh.points).zip(&mesh.residuals) {
        let row: Vec<String> = u.iter().chain(x).chain(std::iter::once(r)).map(f64::to_string).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Columns `t, x1..xn`.
pub fn write_trajectory_csv<W: Write>(tr: &Trajectory, out: &mut W) -> std::io::Result<()> {
    let n = tr.points.first().map_or(0, Vec::len);
    let head: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .collect();
    writeln!(out, "{}", head.join(","))?;
    for (t, x) in tr.times.iter().zip(&tr.points) {
        let row: Vec<String> = std::iter::once(t).chain(x).map(f64::to_string).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
