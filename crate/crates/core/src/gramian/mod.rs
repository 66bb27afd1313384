//! Galerkin matrices of the Koopman generator and the observation map, the
//! Gramian `P̂` solving `K P̂ + P̂ Kᵀ + ĈᵀĈ = 0`, and the sum-of-squares
//! Lyapunov function `v(x) = Σ_i λ_i (φ(x)ᵀ v_i)²`.

mod analysis;
mod io;

use std::sync::Arc;

pub use analysis::{
    decay_fit, decay_fit_range, laguerre_coefficients, lyap_residual, pde_residual, DecayFit, LaguerreConfig,
    LaguerreDecomposition, ResidualStats,
};
pub use io::{write_eigenfunction_csv, write_eigenvalues_csv, write_value_csv};

use crate::basis::OrthonormalBasis;
use crate::error::{Error, Result};
use crate::linalg::{real_schur, solve_lyapunov_schur, sym_eig, DenseMatrix};
use crate::model::{NuclearCost, PolynomialMap};

/// Relative threshold below which negative Gramian eigenvalues are rounding noise.
pub const CLAMP_TOL: f64 = 1e-10;
/// Default relative eigenvalue cut for sum-of-squares terms.
pub const DEFAULT_TRUNC_TOL: f64 = 1e-14;

/// `K_jk = ⟨φ_j, fᵀ∇φ_k⟩`.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub k: DenseMatrix,
    pub basis: Arc<OrthonormalBasis>,
}

/// `Ĉ_ij = ⟨c_i, φ_j⟩` plus the grid norm of `c_i − Π c_i`.
#[derive(Debug, Clone)]
pub struct ObservationMatrix {
    pub chat: DenseMatrix,
    pub residuals: Vec<f64>,
}

/// Rows of the table scaled by `√(ω_q w²_q)`.
fn sqrt_weighted(values: &DenseMatrix, onb: &OrthonormalBasis) -> DenseMatrix {
    let grid = onb.grid();
    let mut out = values.clone();
    for q in 0..grid.len() {
        let s = grid.inner_weight(q).sqrt();
        out.row_mut(q).iter_mut().for_each(|v| *v *= s);
    }
    out
}

pub fn assemble_generator(f: &PolynomialMap, onb: &Arc<OrthonormalBasis>) -> Result<GeneratorMatrix> {
    let d = onb.dim();
    if f.dim_in() != d || f.dim_out() != d {
        return Err(Error::DimensionMismatch {
            context: "vector field vs basis dimension".into(),
            expected: d,
            found: f.dim_in(),
        });
    }
    let grid = onb.grid();
    let table = onb.table();
    let n = onb.rank();
    // Lie derivative table (fᵀ∇φ_k)(x_q).
    let mut lie = DenseMatrix::zeros(grid.len(), n);
    let mut fx = vec![0.0; d];
    for q in 0..grid.len() {
        f.eval_into(grid.point(q), &mut fx);
        let row = lie.row_mut(q);
        for (m, fm) in fx.iter().enumerate() {
            if *fm == 0.0 {
                continue;
            }
            for (r, g) in row.iter_mut().zip(table.gradients[m].row(q)) {
                *r += fm * g;
            }
        }
    }
    let lhs = sqrt_weighted(&table.values, onb);
    let rhs = sqrt_weighted(&lie, onb);
    Ok(GeneratorMatrix {
        k: lhs.tr_matmul(&rhs)?,
        basis: Arc::clone(onb),
    })
}

pub fn assemble_observation(g: &NuclearCost, onb: &OrthonormalBasis) -> Result<ObservationMatrix> {
    let grid = onb.grid();
    let phi = &onb.table().values;
    let r = g.rank();
    let mut chat = DenseMatrix::zeros(r, onb.rank());
    let mut residuals = Vec::with_capacity(r);
    for (i, c) in g.observables().iter().enumerate() {
        if c.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                context: "observable vs grid dimension".into(),
                expected: grid.dim(),
                found: c.dim(),
            });
        }
        let samples: Vec<f64> = grid.points().map(|x| c.eval_unchecked(x)).collect();
        let coeffs = crate::basis::project(&samples, onb)?;
        let fitted = phi.matvec(&coeffs)?;
        let diff: Vec<f64> = samples.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        residuals.push(grid.inner(&diff, &diff)?.max(0.0).sqrt());
        chat.row_mut(i).copy_from_slice(&coeffs);
    }
    Ok(ObservationMatrix { chat, residuals })
}

/// Gramian `P̂` with its (clamped, descending) eigenpairs.
#[derive(Debug, Clone)]
pub struct GramianSolution {
    pub phat: DenseMatrix,
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors of `P̂` as columns, coordinates in the orthonormal basis.
    pub eigenvectors: DenseMatrix,
    /// Largest magnitude of a negative eigenvalue that was set to zero.
    pub max_clamp: f64,
    /// Largest real part in the spectrum of `K` (diagnostic).
    pub generator_abscissa: f64,
    pub basis: Arc<OrthonormalBasis>,
}

pub fn solve_gramian(gen: &GeneratorMatrix, obs: &ObservationMatrix) -> Result<GramianSolution> {
    if obs.chat.cols() != gen.k.rows() {
        return Err(Error::DimensionMismatch {
            context: "observation columns vs generator order".into(),
            expected: gen.k.rows(),
            found: obs.chat.cols(),
        });
    }
    let q = obs.chat.tr_matmul(&obs.chat)?.symmetrized();
    let schur = real_schur(&gen.k)?;
    let phat = solve_lyapunov_schur(&schur, &q)?;
    let eig = sym_eig(&phat)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut max_clamp: f64 = 0.0;
    let mut eigenvalues = eig.values.clone();
    for v in &mut eigenvalues {
        if *v < 0.0 {
            if *v < -CLAMP_TOL * lambda_max {
                return Err(Error::IndefiniteGramian { value: *v, lambda_max });
            }
            max_clamp = max_clamp.max(-*v);
            *v = 0.0;
        }
    }
    Ok(GramianSolution {
        phat,
        eigenvalues,
        eigenvectors: eig.vectors,
        max_clamp,
        generator_abscissa: if gen.k.rows() == 0 { f64::NEG_INFINITY } else { schur.spectral_abscissa() },
        basis: Arc::clone(&gen.basis),
    })
}

/// `v(x) = Σ_i λ_i (φ(x)ᵀ v_i)²` over the retained eigenpairs. Coefficients are
/// stored against the raw basis, `u_i = W v_i`, so `φ(x)ᵀ v_i = b(x)ᵀ u_i`.
#[derive(Debug, Clone)]
pub struct SumOfSquares {
    lambdas: Vec<f64>,
    raw_coeffs: Vec<Vec<f64>>,
    basis: Arc<OrthonormalBasis>,
}

impl SumOfSquares {
    /// Terms with `λ_i > trunc_tol · λ₁`.
    pub fn new(sol: &GramianSolution, trunc_tol: f64) -> Result<Self> {
        let lambda1 = sol.eigenvalues.first().copied().unwrap_or(0.0);
        let keep = sol
            .eigenvalues
            .iter()
            .take_while(|&&l| l > 0.0 && l > trunc_tol * lambda1)
            .count();
        Self::with_terms(sol, keep)
    }

    /// The leading `k` terms.
    pub fn with_terms(sol: &GramianSolution, k: usize) -> Result<Self> {
        let k = k.min(sol.eigenvalues.len());
        let w = sol.basis.whitener();
        let mut raw_coeffs = Vec::with_capacity(k);
        for i in 0..k {
            raw_coeffs.push(w.matvec(&sol.eigenvectors.column(i))?);
        }
        Ok(Self {
            lambdas: sol.eigenvalues[..k].to_vec(),
            raw_coeffs,
            basis: Arc::clone(&sol.basis),
        })
    }

    /// Explicit terms `(λ_i, v_i)` with `v_i` in orthonormal-basis coordinates.
    pub fn from_terms(basis: Arc<OrthonormalBasis>, terms: &[(f64, Vec<f64>)]) -> Result<Self> {
        let mut lambdas = Vec::with_capacity(terms.len());
        let mut raw_coeffs = Vec::with_capacity(terms.len());
        for (l, v) in terms {
            lambdas.push(*l);
            raw_coeffs.push(basis.whitener().matvec(v)?);
        }
        Ok(Self {
            lambdas,
            raw_coeffs,
            basis,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn basis(&self) -> &Arc<OrthonormalBasis> {
        &self.basis
    }

    /// `p_i(x) = √λ_i φ(x)ᵀ v_i` for every term.
    pub fn eigenfunctions(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (b, _) = self.basis.raw().eval(x)?;
        Ok(self
            .raw_coeffs
            .iter()
            .zip(&self.lambdas)
            .map(|(u, l)| l.sqrt() * dot(&b, u))
            .collect())
    }

    /// `v(x)` at every grid node of the basis, from the tabulated values.
    pub fn eval_on_grid(&self) -> Result<Vec<f64>> {
        let grid = self.basis.grid();
        let raw = self.basis.raw().tabulate(grid)?;
        let mut v = vec![0.0; grid.len()];
        for (u, l) in self.raw_coeffs.iter().zip(&self.lambdas) {
            let p = raw.values.matvec(u)?;
            for (vq, pq) in v.iter_mut().zip(p) {
                *vq += l * pq * pq;
            }
        }
        Ok(v)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(v(x), ∇v(x))`.
pub fn sos_eval(sos: &SumOfSquares, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (b, db) = sos.basis.raw().eval(x)?;
    let mut v = 0.0;
    let mut grad = vec![0.0; x.len()];
    for (u, l) in sos.raw_coeffs.iter().zip(&sos.lambdas) {
        let p = dot(&b, u);
        v += l * p * p;
        for (gm, dbm) in grad.iter_mut().zip(&db) {
            *gm += 2.0 * l * p * dot(dbm, u);
        }
    }
    Ok((v, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{shift_to_equilibrium, Basis1D, IndexSet, TensorBasis, DEFAULT_DROP_TOL};
    use crate::model::{Polynomial, WeightFunction};
    use crate::quadrature::{gauss_legendre, tensor_grid};

    pub(crate) fn toy_basis() -> Arc<OrthonormalBasis> {
        let raw = TensorBasis::new(vec![Basis1D::legendre(1, -1.0, 1.0).unwrap()], IndexSet::Full).unwrap();
        let raw = shift_to_equilibrium(&raw, &[0.0]).unwrap();
        let grid = tensor_grid(
            &[gauss_legendre(4, -1.0, 1.0).unwrap()],
            &WeightFunction::constant(1.0).unwrap(),
        )
        .unwrap();
        Arc::new(OrthonormalBasis::new(raw, grid, DEFAULT_DROP_TOL).unwrap())
    }

    fn decay_1d() -> PolynomialMap {
        PolynomialMap::new(1, vec![Polynomial::from_terms(1, &[(-1.0, &[1])]).unwrap()]).unwrap()
    }

    #[test]
    fn toy_chain() {
        let onb = toy_basis();
        assert_eq!(onb.rank(), 1);
        let gen = assemble_generator(&decay_1d(), &onb).unwrap();
        assert!((gen.k[(0, 0)] + 1.0).abs() < 1e-14);
        let obs = assemble_observation(&NuclearCost::coordinates(1), &onb).unwrap();
        assert!((obs.chat[(0, 0)].abs() - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!(obs.residuals[0] < 1e-14);
        let sol = solve_gramian(&gen, &obs).unwrap();
        assert!((sol.phat[(0, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert!((sol.eigenvalues[0] - 1.0 / 3.0).abs() < 1e-14);
        let sos = SumOfSquares::new(&sol, DEFAULT_TRUNC_TOL).unwrap();
        for x in [-0.7, 0.0, 0.4] {
            let (v, g) = sos_eval(&sos, &[x]).unwrap();
            assert!((v - 0.5 * x * x).abs() < 1e-14);
            assert!((g[0] - x).abs() < 1e-14);
        }
        assert_eq!(sos_eval(&sos, &[0.0]).unwrap().0, 0.0);
        assert!(lyap_residual(&gen, &obs, &sol).unwrap() < 1e-14);
    }

    #[test]
    fn single_term_and_zero_field() {
        let onb = toy_basis();
        let sos = SumOfSquares::from_terms(Arc::clone(&onb), &[(1.0, vec![1.0])]).unwrap();
        let (v, g) = sos_eval(&sos, &[0.5]).unwrap();
        assert!((v - 1.5 * 0.25).abs() < 1e-14 && (g[0] - 1.5).abs() < 1e-14);

        let zero = PolynomialMap::new(1, vec![Polynomial::zero(1)]).unwrap();
        assert_eq!(assemble_generator(&zero, &onb).unwrap().k.max_abs(), 0.0);
    }

    #[test]
    fn orthogonal_observable_and_zero_observation() {
        let onb = toy_basis();
        // x² is orthogonal to x on [-1, 1]; its grid norm is √(2/5).
        let c = NuclearCost::new(vec![Polynomial::from_terms(1, &[(1.0, &[2])]).unwrap()]).unwrap();
        let obs = assemble_observation(&c, &onb).unwrap();
        assert!(obs.chat[(0, 0)].abs() < 1e-15);
        assert!((obs.residuals[0] - 0.4f64.sqrt()).abs() < 1e-14);
        let gen = assemble_generator(&decay_1d(), &onb).unwrap();
        let sol = solve_gramian(&gen, &obs).unwrap();
        assert_eq!(sol.phat.max_abs(), 0.0);
        assert_eq!(lyap_residual(&gen, &obs, &sol).unwrap(), 0.0);
    }
}
