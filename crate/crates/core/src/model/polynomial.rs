use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Exponent vector of a monomial `x₁^{e₁}⋯x_d^{e_d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// Unit exponent in coordinate `k`.
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut e = vec![0; dim];
        e[k] = 1;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| if e == 0 { 1.0 } else { xi.powi(e as i32) })
            .product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub monomial: MultiIndex,
}

/// Scalar multivariate polynomial as an explicit list of monomial terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.monomial.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "polynomial term exponents".into(),
                    expected: dim,
                    found: t.monomial.dim(),
                });
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient {}", t.coeff)));
            }
        }
        Ok(Self { dim, terms })
    }

    /// Builds from `(coeff, exponents)` pairs.
    pub fn from_terms(dim: usize, terms: &[(f64, &[u32])]) -> Result<Self> {
        Self::new(
            dim,
            terms
                .iter()
                .map(|(c, e)| Term {
                    coeff: *c,
                    monomial: MultiIndex(e.to_vec()),
                })
                .collect(),
        )
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: vec![] }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            dim,
            terms: vec![Term {
                coeff: c,
                monomial: MultiIndex::zero(dim),
            }],
        }
    }

    /// The coordinate function `x_k`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        Self {
            dim,
            terms: vec![Term {
                coeff: 1.0,
                monomial: MultiIndex::unit(dim, k),
            }],
        }
    }

    /// `Σ_j a_j x_j`.
    pub fn linear(coeffs: &[f64]) -> Self {
        let dim = coeffs.len();
        Self {
            dim,
            terms: coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(k, &c)| Term {
                    coeff: c,
                    monomial: MultiIndex::unit(dim, k),
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.monomial.total_degree()).max().unwrap_or(0)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "polynomial evaluation point".into(),
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.coeff * t.monomial.eval(x)).sum()
    }

    /// Formal partial derivative `∂/∂x_k`.
    pub fn derivative(&self, k: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.monomial.0[k] > 0)
            .map(|t| {
                let mut e = t.monomial.0.clone();
                let p = e[k];
                e[k] -= 1;
                Term {
                    coeff: t.coeff * p as f64,
                    monomial: MultiIndex(e),
                }
            })
            .collect();
        Self { dim: self.dim, terms }
    }

    pub fn gradient_polys(&self) -> Vec<Polynomial> {
        (0..self.dim).map(|k| self.derivative(k)).collect()
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for t in &self.terms {
            for (k, gk) in g.iter_mut().enumerate() {
                let p = t.monomial.0[k];
                if p == 0 {
                    continue;
                }
                let mut v = t.coeff * p as f64;
                for (j, (&e, &xj)) in t.monomial.0.iter().zip(x).enumerate() {
                    let e = if j == k { e - 1 } else { e };
                    if e > 0 {
                        v *= xj.powi(e as i32);
                    }
                }
                *gk += v;
            }
        }
        g
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                context: "polynomial sum".into(),
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { dim: self.dim, terms })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                context: "polynomial product".into(),
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let e = a.monomial.0.iter().zip(&b.monomial.0).map(|(x, y)| x + y).collect();
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    monomial: MultiIndex(e),
                });
            }
        }
        Ok(Self { dim: self.dim, terms })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * s,
                    monomial: t.monomial.clone(),
                })
                .collect(),
        }
    }
}

/// Vector-valued polynomial map `ℝ^d → ℝ^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMap {
    dim_in: usize,
    components: Vec<Polynomial>,
}

impl PolynomialMap {
    pub fn new(dim_in: usize, components: Vec<Polynomial>) -> Result<Self> {
        for (i, c) in components.iter().enumerate() {
            if c.dim() != dim_in {
                return Err(Error::DimensionMismatch {
                    context: format!("component {i} of polynomial map"),
                    expected: dim_in,
                    found: c.dim(),
                });
            }
        }
        Ok(Self { dim_in, components })
    }

    /// `x ↦ A x`.
    pub fn linear(a: &DenseMatrix) -> Self {
        let components = (0..a.rows()).map(|i| Polynomial::linear(a.row(i))).collect();
        Self {
            dim_in: a.cols(),
            components,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "polynomial map evaluation point".into(),
                expected: self.dim_in,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_unchecked(x)).collect()
    }

    pub(crate) fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval_unchecked(x);
        }
    }

    /// Jacobian `∂p_i/∂x_j` at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DenseMatrix> {
        self.check_point(x)?;
        let mut jac = DenseMatrix::zeros(self.dim_out(), self.dim_in);
        for (i, c) in self.components.iter().enumerate() {
            let g = c.gradient_unchecked(x);
            jac.row_mut(i).copy_from_slice(&g);
        }
        Ok(jac)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim_out() != other.dim_out() {
            return Err(Error::DimensionMismatch {
                context: "polynomial map sum (outputs)".into(),
                expected: self.dim_out(),
                found: other.dim_out(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Self::new(self.dim_in, components)
    }

    /// True when every term of every component has total degree exactly 1.
    pub fn is_linear(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.terms().iter().all(|t| t.monomial.total_degree() == 1 || t.coeff == 0.0))
    }

    /// Coefficient matrix of the degree-one part.
    pub fn linear_part(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.dim_out(), self.dim_in);
        for (i, c) in self.components.iter().enumerate() {
            for t in c.terms() {
                if t.monomial.total_degree() == 1 {
                    let k = t.monomial.0.iter().position(|&e| e == 1).unwrap();
                    a[(i, k)] += t.coeff;
                }
            }
        }
        a
    }
}

/// Matrix whose entries are polynomials, e.g. `J(x)` and `R(x)` of a
/// port-Hamiltonian field.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Polynomial>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "polynomial matrix entries".into(),
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn constant(m: &DenseMatrix, dim: usize) -> Self {
        let entries = m.as_slice().iter().map(|&v| Polynomial::constant(dim, v)).collect();
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, k: usize) -> &Polynomial {
        &self.entries[i * self.cols + k]
    }

    pub fn eval(&self, x: &[f64]) -> Result<DenseMatrix> {
        let data = self.entries.iter().map(|p| p.eval(x)).collect::<Result<Vec<_>>>()?;
        DenseMatrix::from_row_major(self.rows, self.cols, data)
    }
}
