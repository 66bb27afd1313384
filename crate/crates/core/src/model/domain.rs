use crate::error::{Error, Result};

/// Axis-aligned box `Ω = Π [lower_k, upper_k]` with the equilibrium inside.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    equilibrium: Vec<f64>,
}

impl BoxDomain {
    /// Box with the equilibrium at the origin.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let eq = vec![0.0; lower.len()];
        Self::with_equilibrium(lower, upper, eq)
    }

    pub fn symmetric(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn with_equilibrium(lower: Vec<f64>, upper: Vec<f64>, equilibrium: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != equilibrium.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds / equilibrium".into(),
                expected: lower.len(),
                found: upper.len().max(equilibrium.len()),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidArgument("box domain needs at least one dimension".into()));
        }
        for k in 0..lower.len() {
            if !(lower[k] < upper[k]) {
                return Err(Error::InvalidParameter {
                    name: format!("domain.lower[{k}]"),
                    reason: format!("lower {} must be below upper {}", lower[k], upper[k]),
                });
            }
            if !(lower[k] < equilibrium[k] && equilibrium[k] < upper[k]) {
                return Err(Error::InvalidParameter {
                    name: format!("domain.equilibrium[{k}]"),
                    reason: format!("{} not strictly inside ({}, {})", equilibrium[k], lower[k], upper[k]),
                });
            }
        }
        Ok(Self {
            lower,
            upper,
            equilibrium,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn equilibrium(&self) -> &[f64] {
        &self.equilibrium
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&xi, (&a, &b))| xi >= a - tol && xi <= b + tol)
    }

    /// Largest distance by which `x` lies outside the box (0 inside).
    pub fn overshoot(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&a, &b))| (a - xi).max(xi - b).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Uniform tensor grid with `n` points per dimension, boundaries included.
    pub fn uniform_grid(&self, n: usize) -> Vec<Vec<f64>> {
        let per_dim: Vec<Vec<f64>> = (0..self.dim())
            .map(|k| linspace(self.lower[k], self.upper[k], n))
            .collect();
        cartesian(&per_dim)
    }
}

/// `n` equispaced points from `a` to `b` inclusive (`n = 1` gives the midpoint).
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (a + b)],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Cartesian product with the last coordinate varying fastest.
pub fn cartesian(per_dim: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for axis in per_dim {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}
