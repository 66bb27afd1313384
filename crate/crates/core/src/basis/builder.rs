use super::{shift_to_equilibrium, Basis1D, IndexSet, OrthonormalBasis, TensorBasis, DEFAULT_DROP_TOL};
use crate::error::{Error, Result};
use crate::model::{linspace, BoxDomain, WeightFunction};
use crate::quadrature::{composite_rule, gauss_legendre, tensor_grid, Rule1D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorSpec {
    /// Normalized Legendre polynomials up to `degree`; quadrature is a single
    /// Gauss rule over the interval.
    Legendre { degree: usize },
    /// Clamped B-splines on `nodes` equispaced breakpoints (endpoints
    /// included); quadrature is a Gauss rule on every spline cell.
    BSpline { nodes: usize, degree: usize },
}

/// Everything needed to turn a box and a weight into an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationSpec {
    pub factors: Vec<FactorSpec>,
    pub index_set: IndexSet,
    /// Gauss order per dimension (per cell for B-spline factors).
    pub quad_nodes: Vec<usize>,
    /// Divide the quadrature measure by `|Ω|`.
    pub normalize_measure: bool,
    pub equilibrium_vanishing: bool,
    pub drop_tol: f64,
}

impl DiscretizationSpec {
    /// Full tensor Legendre basis of per-dimension `degree` with `gauss` nodes
    /// per dimension, equilibrium-vanishing, raw measure.
    pub fn legendre(dim: usize, degree: usize, gauss: usize) -> Self {
        Self {
            factors: vec![FactorSpec::Legendre { degree }; dim],
            index_set: IndexSet::Full,
            quad_nodes: vec![gauss; dim],
            normalize_measure: false,
            equilibrium_vanishing: true,
            drop_tol: DEFAULT_DROP_TOL,
        }
    }

    pub fn with_unit_measure(mut self) -> Self {
        self.normalize_measure = true;
        self
    }
}

fn factor_and_rule(spec: FactorSpec, a: f64, b: f64, nodes: usize) -> Result<(Basis1D, Rule1D)> {
    if nodes == 0 {
        return Err(Error::InvalidParameter {
            name: "quadrature.nodes".into(),
            reason: "must be at least 1".into(),
        });
    }
    match spec {
        FactorSpec::Legendre { degree } => Ok((Basis1D::legendre(degree, a, b)?, gauss_legendre(nodes, a, b)?)),
        FactorSpec::BSpline { nodes: breaks, degree } => {
            if breaks < 2 {
                return Err(Error::InvalidParameter {
                    name: "basis.nodes".into(),
                    reason: format!("B-splines need at least 2 breakpoints, got {breaks}"),
                });
            }
            let bp = linspace(a, b, breaks);
            Ok((Basis1D::bspline_clamped(&bp, degree)?, composite_rule(&bp, nodes)?))
        }
    }
}

/// Builds the tensor grid and the whitened basis for `dom` and `w`.
pub fn build_orthonormal_basis(spec: &DiscretizationSpec, dom: &BoxDomain, w: &WeightFunction) -> Result<OrthonormalBasis> {
    let d = dom.dim();
    for (name, len) in [("basis factors", spec.factors.len()), ("quadrature nodes", spec.quad_nodes.len())] {
        if len != d {
            return Err(Error::DimensionMismatch {
                context: name.into(),
                expected: d,
                found: len,
            });
        }
    }
    let mut factors = Vec::with_capacity(d);
    let mut rules = Vec::with_capacity(d);
    for k in 0..d {
        let (f, r) = factor_and_rule(spec.factors[k], dom.lower()[k], dom.upper()[k], spec.quad_nodes[k])?;
        factors.push(f);
        rules.push(r);
    }
    let mut grid = tensor_grid(&rules, w)?;
    if spec.normalize_measure {
        grid = grid.with_unit_measure();
    }
    let mut raw = TensorBasis::new(factors, spec.index_set)?;
    if spec.equilibrium_vanishing {
        raw = shift_to_equilibrium(&raw, dom.equilibrium())?;
    }
    OrthonormalBasis::new(raw, grid, spec.drop_tol)
}
