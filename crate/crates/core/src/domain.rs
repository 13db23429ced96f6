use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl TryFrom<RawBox> for DomainBox {
    type Error = Error;
    fn try_from(raw: RawBox) -> Result<Self> {
        DomainBox::new(raw.lo, raw.hi)
    }
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::DegenerateDomain("dimension must be at least 1".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::DegenerateDomain(format!(
                "lo has {} entries, hi has {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::DegenerateDomain(format!(
                    "axis {i}: need lo < hi, got [{l}, {h}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-half, half]^n` centred at the origin.
    pub fn cube(n: usize, half: f64) -> Result<Self> {
        Self::new(vec![-half; n], vec![half; n])
    }

    /// The cube of half-width `half` centred at `center`.
    pub fn centered(center: &[f64], half: f64) -> Result<Self> {
        Self::new(
            center.iter().map(|c| c - half).collect(),
            center.iter().map(|c| c + half).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Distance (sup-norm) from `x` to the boundary; negative outside.
    pub fn margin(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| (v - l).min(h - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Shrink every face inward by `r`.
    pub fn shrink(&self, r: f64) -> Result<Self> {
        Self::new(
            self.lo.iter().map(|l| l + r).collect(),
            self.hi.iter().map(|h| h - r).collect(),
        )
        .map_err(|_| Error::DegenerateDomain(format!("margin {r} exceeds the box half-width")))
    }

    pub fn intersect(&self, other: &DomainBox) -> Result<Self> {
        Self::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        )
    }

    /// Project onto a subset of axes.
    pub fn select(&self, axes: &[usize]) -> Result<Self> {
        Self::new(
            axes.iter().map(|&i| self.lo[i]).collect(),
            axes.iter().map(|&i| self.hi[i]).collect(),
        )
    }

    /// Map a point of the unit cube onto the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(t, (l, h))| l + t * (h - l))
            .collect()
    }

    /// Tensor grid with `m` points per axis, endpoints included (`m >= 2`),
    /// or the centre when `m == 1`.
    pub fn grid(&self, m: usize) -> Vec<Vec<f64>> {
        let axis: Vec<f64> = if m <= 1 {
            vec![0.5]
        } else {
            (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
        };
        tensor_grid(self.dim(), &axis)
            .into_iter()
            .map(|u| self.from_unit(&u))
            .collect()
    }

    /// Cell-centred tensor grid; never touches the boundary.
    pub fn interior_grid(&self, m: usize) -> Vec<Vec<f64>> {
        let m = m.max(1);
        let axis: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        tensor_grid(self.dim(), &axis)
            .into_iter()
            .map(|u| self.from_unit(&u))
            .collect()
    }
}

/// All points of `axis^dim`, first coordinate varying slowest.
pub(crate) fn tensor_grid(dim: usize, axis: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}
