//! Problem description: polynomial dynamics `f`, nuclear costs `g = Σ c_i²`,
//! weights `w` and box domains `Ω`.

mod domain;
mod polynomial;
mod weight;

use std::collections::BTreeMap;

pub use domain::{cartesian, linspace, BoxDomain};
pub use polynomial::{MultiIndex, PolyMatrix, Polynomial, PolynomialMap, Term};
pub use weight::{WeightFunction, WeightKind, SINGULAR_RADIUS};

use crate::error::{Error, Result};
use crate::linalg::{real_schur, DenseMatrix};

/// Cost `g(x) = Σ_i c_i(x)²` given by finitely many polynomial observables.
#[derive(Debug, Clone, PartialEq)]
pub struct NuclearCost {
    observables: Vec<Polynomial>,
}

impl NuclearCost {
    pub fn new(observables: Vec<Polynomial>) -> Result<Self> {
        if let Some(first) = observables.first() {
            let d = first.dim();
            if let Some(bad) = observables.iter().find(|c| c.dim() != d) {
                return Err(Error::DimensionMismatch {
                    context: "nuclear cost observables".into(),
                    expected: d,
                    found: bad.dim(),
                });
            }
        }
        Ok(Self { observables })
    }

    /// `g(x) = ‖x‖²`, i.e. `c_i(x) = x_i`.
    pub fn coordinates(dim: usize) -> Self {
        Self {
            observables: (0..dim).map(|k| Polynomial::coordinate(dim, k)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.observables.len()
    }

    pub fn observables(&self) -> &[Polynomial] {
        &self.observables
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut g = 0.0;
        for c in &self.observables {
            let v = c.eval(x)?;
            g += v * v;
        }
        Ok(g)
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.observables
            .iter()
            .map(|c| {
                let v = c.eval_unchecked(x);
                v * v
            })
            .sum()
    }

    /// `∇g = 2 Σ c_i ∇c_i`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        for c in &self.observables {
            let v = c.eval(x)?;
            for (gk, dk) in g.iter_mut().zip(c.gradient(x)?) {
                *gk += 2.0 * v * dk;
            }
        }
        Ok(g)
    }
}

/// Port-Hamiltonian structure `f = (J − R) ∇H`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortHamiltonian {
    pub hamiltonian: Polynomial,
    pub j: PolyMatrix,
    pub r: PolyMatrix,
}

impl PortHamiltonian {
    /// The field `(J − R)∇H` as a polynomial map (entries multiplied out formally).
    pub fn field(&self) -> Result<PolynomialMap> {
        let d = self.hamiltonian.dim();
        let grad = self.hamiltonian.gradient_polys();
        let mut comps = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc = Polynomial::zero(d);
            for (k, gk) in grad.iter().enumerate() {
                let coeff = self.j.entry(i, k).add(&self.r.entry(i, k).scaled(-1.0))?;
                acc = acc.add(&coeff.mul(gk)?)?;
            }
            comps.push(acc);
        }
        PolynomialMap::new(d, comps)
    }
}

/// A fully parameterized problem: dynamics, cost, weight and domain.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub field: PolynomialMap,
    pub cost: NuclearCost,
    pub weight: WeightFunction,
    pub domain: BoxDomain,
    pub port_hamiltonian: Option<PortHamiltonian>,
}

pub const BUILTIN_SYSTEMS: [&str; 3] = ["linear2d", "vdp_modified", "port_hamiltonian_demo"];

fn param(params: &BTreeMap<String, f64>, allowed: &[&str], name: &str, default: f64) -> Result<f64> {
    debug_assert!(allowed.contains(&name));
    let v = params.get(name).copied().unwrap_or(default);
    if !v.is_finite() {
        return Err(Error::InvalidParameter {
            name: name.into(),
            reason: format!("non-finite value {v}"),
        });
    }
    Ok(v)
}

fn reject_unknown(params: &BTreeMap<String, f64>, allowed: &[&str], system: &str) -> Result<()> {
    let unknown: Vec<&str> = params
        .keys()
        .map(String::as_str)
        .filter(|k| !allowed.contains(k))
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: unknown.join(", "),
            reason: format!("not a parameter of {system} (allowed: {})", allowed.join(", ")),
        })
    }
}

/// Spectral abscissa of `Df(x_eq)`.
fn linearization_abscissa(f: &PolynomialMap, x_eq: &[f64]) -> Result<f64> {
    let jac = f.jacobian(x_eq)?;
    Ok(real_schur(&jac)?.spectral_abscissa())
}

/// Returns one of the builtin problems; unspecified parameters take the
/// published defaults.
///
/// - `linear2d`: `f = A_m x`, `A_m = [[a11, a12], [a21, a22]] = [[-2, 1], [-1, -3]]`,
///   `c_i = x_i`, `w = 1/‖x‖`, `Ω = [-h, h]²` with `h = half_width = 1`.
/// - `vdp_modified`: `f = (x₂ − αx₁³, −μ(x₁²−1)x₂ − x₁ − ηx₂)` with
///   `μ = 2`, `η = 2.2`, `α = 0.15`, `c_i = x_i`, `w = 1/‖x‖`, `Ω = [-3, 3]²`.
/// - `port_hamiltonian_demo`: `H = ½‖x‖²`, `J = [[0,1],[-1,0]]`, `R = r·I`
///   (`r = 1`), `f = (J − R)∇H`, `w = H^{-1/2}`, `Ω = [-1, 1]²`.
pub fn builtin_system(name: &str, params: &BTreeMap<String, f64>) -> Result<Problem> {
    match name {
        "linear2d" => {
            let allowed = ["a11", "a12", "a21", "a22", "half_width"];
            reject_unknown(params, &allowed, name)?;
            let a = DenseMatrix::from_rows(&[
                [param(params, &allowed, "a11", -2.0)?, param(params, &allowed, "a12", 1.0)?],
                [param(params, &allowed, "a21", -1.0)?, param(params, &allowed, "a22", -3.0)?],
            ])?;
            let h = param(params, &allowed, "half_width", 1.0)?;
            if h <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "half_width".into(),
                    reason: format!("must be positive, got {h}"),
                });
            }
            let field = PolynomialMap::linear(&a);
            let abscissa = real_schur(&a)?.spectral_abscissa();
            if abscissa >= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "a11..a22".into(),
                    reason: format!("A_m is not Hurwitz (spectral abscissa {abscissa})"),
                });
            }
            Ok(Problem {
                name: name.into(),
                field,
                cost: NuclearCost::coordinates(2),
                weight: WeightFunction::inverse_norm(vec![0.0, 0.0]),
                domain: BoxDomain::symmetric(2, h)?,
                port_hamiltonian: None,
            })
        }
        "vdp_modified" => {
            let allowed = ["mu", "eta", "alpha", "half_width"];
            reject_unknown(params, &allowed, name)?;
            let mu = param(params, &allowed, "mu", 2.0)?;
            let eta = param(params, &allowed, "eta", 2.2)?;
            let alpha = param(params, &allowed, "alpha", 0.15)?;
            let h = param(params, &allowed, "half_width", 3.0)?;
            if alpha <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "alpha".into(),
                    reason: format!("must be positive, got {alpha}"),
                });
            }
            if h <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "half_width".into(),
                    reason: format!("must be positive, got {h}"),
                });
            }
            let f1 = Polynomial::from_terms(2, &[(1.0, &[0, 1]), (-alpha, &[3, 0])])?;
            let f2 = Polynomial::from_terms(
                2,
                &[(-mu, &[2, 1]), (mu, &[0, 1]), (-1.0, &[1, 0]), (-eta, &[0, 1])],
            )?;
            let field = PolynomialMap::new(2, vec![f1, f2])?;
            let abscissa = linearization_abscissa(&field, &[0.0, 0.0])?;
            if abscissa >= -1e-12 {
                return Err(Error::InvalidParameter {
                    name: "eta".into(),
                    reason: format!(
                        "linearization at the origin is not Hurwitz (p = mu - eta = {}, abscissa {abscissa})",
                        mu - eta
                    ),
                });
            }
            Ok(Problem {
                name: name.into(),
                field,
                cost: NuclearCost::coordinates(2),
                weight: WeightFunction::inverse_norm(vec![0.0, 0.0]),
                domain: BoxDomain::symmetric(2, h)?,
                port_hamiltonian: None,
            })
        }
        "port_hamiltonian_demo" => {
            let allowed = ["r", "half_width"];
            reject_unknown(params, &allowed, name)?;
            let r = param(params, &allowed, "r", 1.0)?;
            let h = param(params, &allowed, "half_width", 1.0)?;
            if r < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "r".into(),
                    reason: format!("dissipation must be non-negative, got {r}"),
                });
            }
            let ham = Polynomial::from_terms(2, &[(0.5, &[2, 0]), (0.5, &[0, 2])])?;
            let j = PolyMatrix::constant(&DenseMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]])?, 2);
            let rm = PolyMatrix::constant(&DenseMatrix::identity(2).scale(r), 2);
            let ph = PortHamiltonian {
                hamiltonian: ham.clone(),
                j,
                r: rm,
            };
            Ok(Problem {
                name: name.into(),
                field: ph.field()?,
                cost: NuclearCost::coordinates(2),
                weight: WeightFunction::hamiltonian(ham, vec![vec![0.0, 0.0]]),
                domain: BoxDomain::symmetric(2, h)?,
                port_hamiltonian: Some(ph),
            })
        }
        other => Err(Error::UnknownSystem(other.into())),
    }
}
