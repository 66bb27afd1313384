//! Tensor bases, the discrete weighted Gram matrix and whitening.
//!
//! An [`OrthonormalBasis`] is a raw [`TensorBasis`] `b` together with a
//! whitener `W` such that `φ = Wᵀ b` is orthonormal in the grid inner product.

mod builder;
mod univariate;

use rayon::prelude::*;

pub use builder::{build_orthonormal_basis, DiscretizationSpec, FactorSpec};
pub use univariate::{bspline_eval, legendre_eval, Basis1D, Basis1DKind};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, DenseMatrix};
use crate::quadrature::TensorGrid;

/// Default relative eigenvalue cut in [`orthonormalize`].
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSet {
    /// Every combination of factor indices.
    Full,
    /// Index tuples with `Σ_k i_k ≤ max`.
    TotalDegree(usize),
}

/// Products `b_j(x) = Π_k B^{(k)}_{i_k}(x_k)` over a set of index tuples,
/// optionally shifted to vanish at an equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBasis {
    factors: Vec<Basis1D>,
    indices: Vec<Vec<usize>>,
    shift: Option<Shift>,
}

#[derive(Debug, Clone, PartialEq)]
struct Shift {
    x_eq: Vec<f64>,
    offsets: Vec<f64>,
}

impl TensorBasis {
    pub fn new(factors: Vec<Basis1D>, index_set: IndexSet) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("tensor basis needs at least one factor".into()));
        }
        let per_dim: Vec<Vec<f64>> = factors
            .iter()
            .map(|f| (0..f.count()).map(|i| i as f64).collect())
            .collect();
        let indices: Vec<Vec<usize>> = crate::model::cartesian(&per_dim)
            .into_iter()
            .map(|t| t.into_iter().map(|v| v as usize).collect::<Vec<_>>())
            .filter(|idx| match index_set {
                IndexSet::Full => true,
                IndexSet::TotalDegree(max) => idx.iter().sum::<usize>() <= max,
            })
            .collect();
        Ok(Self {
            factors,
            indices,
            shift: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn factors(&self) -> &[Basis1D] {
        &self.factors
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn is_equilibrium_vanishing(&self) -> bool {
        self.shift.is_some()
    }

    pub fn equilibrium(&self) -> Option<&[f64]> {
        self.shift.as_ref().map(|s| s.x_eq.as_slice())
    }

    /// Raw values `b(x)` and gradients, `grads[m][j] = ∂_m b_j(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "tensor basis evaluation point".into(),
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut values = vec![0.0; self.len()];
        let mut grads = vec![vec![0.0; self.len()]; self.dim()];
        self.eval_unshifted(x, &mut values, &mut grads);
        if let Some(s) = &self.shift {
            for (v, o) in values.iter_mut().zip(&s.offsets) {
                *v -= o;
            }
        }
        Ok((values, grads))
    }

    fn eval_unshifted(&self, x: &[f64], values: &mut [f64], grads: &mut [Vec<f64>]) {
        let d = self.dim();
        let tables: Vec<(Vec<f64>, Vec<f64>)> = self
            .factors
            .iter()
            .zip(x)
            .map(|(f, &xk)| {
                let mut v = vec![0.0; f.count()];
                let mut dv = vec![0.0; f.count()];
                f.eval_all(xk, &mut v, &mut dv);
                (v, dv)
            })
            .collect();
        for (j, idx) in self.indices.iter().enumerate() {
            let mut prod = 1.0;
            for k in 0..d {
                prod *= tables[k].0[idx[k]];
            }
            values[j] = prod;
            for m in 0..d {
                let mut g = tables[m].1[idx[m]];
                for k in (0..d).filter(|&k| k != m) {
                    g *= tables[k].0[idx[k]];
                }
                grads[m][j] = g;
            }
        }
    }

    /// Raw values and gradients at every grid point.
    pub fn tabulate(&self, grid: &TensorGrid) -> Result<EvalTable> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "grid dimension vs basis dimension".into(),
                expected: self.dim(),
                found: grid.dim(),
            });
        }
        let rows: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..grid.len())
            .into_par_iter()
            .map(|q| self.eval(grid.point(q)).expect("dimension checked"))
            .collect();
        Ok(EvalTable::from_rows(rows, self.len(), self.dim()))
    }
}

/// Drops constant tensor functions and replaces every remaining `b_j` by
/// `b_j − b_j(x_eq)`, so that each retained function vanishes at `x_eq`.
///
/// For B-spline factors no tensor function is constant; the shifted family then
/// has a one-dimensional linear dependency which whitening removes.
pub fn shift_to_equilibrium(basis: &TensorBasis, x_eq: &[f64]) -> Result<TensorBasis> {
    if x_eq.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            context: "equilibrium dimension".into(),
            expected: basis.dim(),
            found: x_eq.len(),
        });
    }
    let indices: Vec<Vec<usize>> = basis
        .indices
        .iter()
        .filter(|idx| !idx.iter().zip(&basis.factors).all(|(&i, f)| f.is_constant(i)))
        .cloned()
        .collect();
    let mut shifted = TensorBasis {
        factors: basis.factors.clone(),
        indices,
        shift: None,
    };
    let (offsets, _) = shifted.eval(x_eq)?;
    shifted.shift = Some(Shift {
        x_eq: x_eq.to_vec(),
        offsets,
    });
    Ok(shifted)
}

/// Basis values (grid points × functions) and one gradient matrix per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTable {
    pub values: DenseMatrix,
    pub gradients: Vec<DenseMatrix>,
}

impl EvalTable {
    fn from_rows(rows: Vec<(Vec<f64>, Vec<Vec<f64>>)>, n: usize, d: usize) -> Self {
        let q = rows.len();
        let mut values = DenseMatrix::zeros(q, n);
        let mut gradients = vec![DenseMatrix::zeros(q, n); d];
        for (i, (v, g)) in rows.into_iter().enumerate() {
            values.row_mut(i).copy_from_slice(&v);
            for m in 0..d {
                gradients[m].row_mut(i).copy_from_slice(&g[m]);
            }
        }
        Self { values, gradients }
    }

    /// Table of the functions `Wᵀ b` given the table of `b`.
    pub fn transformed(&self, w: &DenseMatrix) -> Result<Self> {
        Ok(Self {
            values: self.values.matmul(w)?,
            gradients: self.gradients.iter().map(|g| g.matmul(w)).collect::<Result<_>>()?,
        })
    }
}

/// `Bᵀ diag(ω w²) B` for a table `B` (points × functions).
fn weighted_gram(values: &DenseMatrix, grid: &TensorGrid) -> Result<DenseMatrix> {
    if values.rows() != grid.len() {
        return Err(Error::DimensionMismatch {
            context: "table rows vs grid points".into(),
            expected: grid.len(),
            found: values.rows(),
        });
    }
    let mut scaled = values.clone();
    for q in 0..grid.len() {
        let s = grid.inner_weight(q).sqrt();
        scaled.row_mut(q).iter_mut().for_each(|v| *v *= s);
    }
    Ok(scaled.tr_matmul(&scaled)?.symmetrized())
}

/// `G_jk = Σ_q ω_q w²(x_q) b_j(x_q) b_k(x_q)`.
pub fn gram_matrix(basis: &TensorBasis, grid: &TensorGrid) -> Result<DenseMatrix> {
    weighted_gram(&basis.tabulate(grid)?.values, grid)
}

/// Whitener `W = V Λ^{-1/2}` over the eigenpairs of `G` with
/// `λ > drop_tol · λ_max`; returns `(W, rank)` with `Wᵀ G W = I`.
pub fn orthonormalize(g: &DenseMatrix, drop_tol: f64) -> Result<(DenseMatrix, usize)> {
    let eig = sym_eig(g)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0);
    if !(lambda_max > 0.0) {
        return Err(Error::EmptyBasis { lambda_max });
    }
    let rank = eig.values.iter().take_while(|&&l| l > drop_tol * lambda_max).count();
    let n = g.rows();
    let mut w = DenseMatrix::zeros(n, rank);
    for j in 0..rank {
        let s = 1.0 / eig.values[j].sqrt();
        for i in 0..n {
            w[(i, j)] = eig.vectors[(i, j)] * s;
        }
    }
    Ok((w, rank))
}

/// Functions `φ = Wᵀ b` orthonormal in the grid inner product, with their
/// values and gradients tabulated on the grid.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    raw: TensorBasis,
    whitener: DenseMatrix,
    grid: TensorGrid,
    table: EvalTable,
}

impl OrthonormalBasis {
    pub fn new(raw: TensorBasis, grid: TensorGrid, drop_tol: f64) -> Result<Self> {
        let raw_table = raw.tabulate(&grid)?;
        let g = weighted_gram(&raw_table.values, &grid)?;
        let (whitener, _) = orthonormalize(&g, drop_tol)?;
        let table = raw_table.transformed(&whitener)?;
        Ok(Self {
            raw,
            whitener,
            grid,
            table,
        })
    }

    /// Same space with `W` replaced by `W·O` (`O` orthogonal, rank × rank).
    pub fn reparameterized(&self, o: &DenseMatrix) -> Result<Self> {
        if o.rows() != self.rank() || o.cols() != self.rank() {
            return Err(Error::DimensionMismatch {
                context: "reparameterization matrix".into(),
                expected: self.rank(),
                found: o.rows(),
            });
        }
        Ok(Self {
            raw: self.raw.clone(),
            whitener: self.whitener.matmul(o)?,
            grid: self.grid.clone(),
            table: self.table.transformed(o)?,
        })
    }

    pub fn raw(&self) -> &TensorBasis {
        &self.raw
    }

    pub fn whitener(&self) -> &DenseMatrix {
        &self.whitener
    }

    pub fn rank(&self) -> usize {
        self.whitener.cols()
    }

    pub fn dim(&self) -> usize {
        self.raw.dim()
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn table(&self) -> &EvalTable {
        &self.table
    }

    /// `φ(x)` and `∇φ(x)` (`grads[m][j] = ∂_m φ_j(x)`).
    pub fn eval(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let (b, db) = self.raw.eval(x)?;
        let phi = self.whitener.tr_matvec(&b)?;
        let grads = db
            .iter()
            .map(|g| self.whitener.tr_matvec(g))
            .collect::<Result<_>>()?;
        Ok((phi, grads))
    }

    /// Gram matrix of `φ` on the grid (the identity up to rounding).
    pub fn gram(&self) -> Result<DenseMatrix> {
        weighted_gram(&self.table.values, &self.grid)
    }

    /// `max |⟨φ_i, φ_j⟩ − δ_ij|`.
    pub fn orthonormality_error(&self) -> Result<f64> {
        let g = self.gram()?;
        Ok(g.sub(&DenseMatrix::identity(self.rank()))?.max_abs())
    }
}

/// Coefficients `⟨s, φ_j⟩` of grid samples `s`.
pub fn project(samples: &[f64], onb: &OrthonormalBasis) -> Result<Vec<f64>> {
    let grid = onb.grid();
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            context: "samples vs grid points".into(),
            expected: grid.len(),
            found: samples.len(),
        });
    }
    let weighted: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(q, s)| s * grid.inner_weight(q))
        .collect();
    onb.table().values.tr_matvec(&weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WeightFunction;
    use crate::quadrature::{gauss_legendre, tensor_grid};

    fn unit_grid_1d(n: usize) -> TensorGrid {
        tensor_grid(
            &[gauss_legendre(n, -1.0, 1.0).unwrap()],
            &WeightFunction::constant(1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn legendre_gram_is_identity() {
        let f = Basis1D::legendre(5, -1.0, 1.0).unwrap();
        let tb = TensorBasis::new(vec![f.clone(), f], IndexSet::Full).unwrap();
        let r = gauss_legendre(8, -1.0, 1.0).unwrap();
        let grid = tensor_grid(&[r.clone(), r], &WeightFunction::constant(1.0).unwrap()).unwrap();
        let g = gram_matrix(&tb, &grid).unwrap();
        assert!(g.sub(&DenseMatrix::identity(36)).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn monomial_gram() {
        let tb = TensorBasis::new(vec![Basis1D::monomial(1, -1.0, 1.0).unwrap()], IndexSet::Full).unwrap();
        let g = gram_matrix(&tb, &unit_grid_1d(4)).unwrap();
        let expect = DenseMatrix::from_rows(&[[2.0, 0.0], [0.0, 2.0 / 3.0]]).unwrap();
        assert!(g.sub(&expect).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn orthonormalize_examples() {
        let (w, r) = orthonormalize(&DenseMatrix::identity(3), 1e-12).unwrap();
        assert_eq!(r, 3);
        assert!(w.tr_matmul(&w).unwrap().sub(&DenseMatrix::identity(3)).unwrap().max_abs() < 1e-15);

        let g = DenseMatrix::from_diag(&[4.0, 1.0]);
        let (w, r) = orthonormalize(&g, 1e-12).unwrap();
        assert_eq!(r, 2);
        assert!((w[(0, 0)].abs() - 0.5).abs() < 1e-15 && (w[(1, 1)].abs() - 1.0).abs() < 1e-15);
        assert_eq!(w[(0, 1)], 0.0);

        let g = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(orthonormalize(&g, 1e-12).unwrap().1, 1);
        assert!(matches!(
            orthonormalize(&DenseMatrix::zeros(2, 2), 1e-12),
            Err(Error::EmptyBasis { .. })
        ));
    }

    #[test]
    fn shifted_legendre() {
        let raw = TensorBasis::new(vec![Basis1D::legendre_raw(2, -1.0, 1.0).unwrap()], IndexSet::Full).unwrap();
        let s = shift_to_equilibrium(&raw, &[0.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.is_equilibrium_vanishing());
        let (v, _) = s.eval(&[0.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
        let x = 0.6;
        let (v, g) = s.eval(&[x]).unwrap();
        assert!((v[0] - x).abs() < 1e-15);
        assert!((v[1] - ((3.0 * x * x - 1.0) / 2.0 + 0.5)).abs() < 1e-15);
        assert!((g[0][1] - 3.0 * x).abs() < 1e-15);
    }

    #[test]
    fn project_examples() {
        let tb = TensorBasis::new(vec![Basis1D::legendre(4, -1.0, 1.0).unwrap()], IndexSet::Full).unwrap();
        let onb = OrthonormalBasis::new(tb, unit_grid_1d(6), DEFAULT_DROP_TOL).unwrap();
        assert!(onb.orthonormality_error().unwrap() < 1e-12);
        let zero = project(&vec![0.0; 6], &onb).unwrap();
        assert!(zero.iter().all(|&c| c == 0.0));
        let c2 = project(&onb.table().values.column(2), &onb).unwrap();
        for (j, c) in c2.iter().enumerate() {
            assert!((c - if j == 2 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        assert!(project(&[1.0], &onb).is_err());
    }

    #[test]
    fn project_identity_onto_legendre() {
        // With the raw identity whitener the degree-one function is √(3/2) x.
        let tb = TensorBasis::new(vec![Basis1D::legendre(3, -1.0, 1.0).unwrap()], IndexSet::Full).unwrap();
        let grid = unit_grid_1d(5);
        let x: Vec<f64> = grid.points().map(|p| p[0]).collect();
        let onb = OrthonormalBasis::new(tb, grid, DEFAULT_DROP_TOL).unwrap();
        let c = project(&x, &onb).unwrap();
        let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn total_degree_index_set() {
        let f = Basis1D::legendre(3, -1.0, 1.0).unwrap();
        let tb = TensorBasis::new(vec![f.clone(), f], IndexSet::TotalDegree(3)).unwrap();
        assert_eq!(tb.len(), 10);
    }
}
