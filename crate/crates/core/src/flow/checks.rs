use std::collections::BTreeMap;
use std::fmt;

use super::{integrate_flow, IntegratorConfig};
use crate::error::{Error, Result};
use crate::linalg::{real_schur, sym_eig};
use crate::model::{cartesian, linspace, BoxDomain, PolyMatrix, Polynomial, PolynomialMap, WeightFunction};

/// Threshold on the maximal outward flux `νᵀf` over the boundary.
pub const TANGENT_TOL: f64 = 1e-12;
/// Threshold on the relative violation of `w(z) ≤ e^{tω₀} w(Φᵗ(z))`.
pub const DECAY_BOUND_TOL: f64 = 1e-6;
const STRUCTURE_TOL: f64 = 1e-12;

/// Outcome of one hypothesis check with its numeric evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub name: String,
    pub passed: bool,
    pub witness: BTreeMap<String, f64>,
}

impl HypothesisReport {
    pub fn new(name: &str, passed: bool, witness: impl IntoIterator<Item = (&'static str, f64)>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            witness: witness.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.witness.get(key).copied()
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.name, if self.passed { "pass" } else { "FAIL" })?;
        for (k, v) in &self.witness {
            write!(f, " {k}={v:.12e}")?;
        }
        Ok(())
    }
}

/// Tangent condition `ν(x)ᵀ f(x) ≤ 0` on a uniform grid of every box face.
pub fn check_tangent(f: &PolynomialMap, dom: &BoxDomain, n_per_face: usize) -> Result<HypothesisReport> {
    if n_per_face < 2 {
        return Err(Error::InvalidArgument("check_tangent needs n_per_face >= 2".into()));
    }
    let d = dom.dim();
    let mut max_flux = f64::NEG_INFINITY;
    for k in 0..d {
        for (sign, fixed) in [(-1.0, dom.lower()[k]), (1.0, dom.upper()[k])] {
            let axes: Vec<Vec<f64>> = (0..d)
                .map(|m| {
                    if m == k {
                        vec![fixed]
                    } else {
                        linspace(dom.lower()[m], dom.upper()[m], n_per_face)
                    }
                })
                .collect();
            for x in cartesian(&axes) {
                let fx = f.eval(&x)?;
                max_flux = max_flux.max(sign * fx[k]);
            }
        }
    }
    Ok(HypothesisReport::new(
        "tangent_condition",
        max_flux <= TANGENT_TOL,
        [("max_boundary_flux", max_flux)],
    ))
}

/// Uniform `n`-per-dimension grid of `dom`; with odd `n` it contains the
/// equilibrium axes of a symmetric box.
pub fn omega0_grid(dom: &BoxDomain, n: usize) -> Vec<Vec<f64>> {
    dom.uniform_grid(n)
}

/// `max_x −f(x)ᵀ∇w(x) / w(x)` over the grid points where `w` is finite.
///
/// A grid maximum is a lower bound for the essential supremum `ω₀`.
pub fn estimate_omega0(f: &PolynomialMap, w: &WeightFunction, grid: &[Vec<f64>]) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut used = 0usize;
    for x in grid {
        if w.is_singular_at(x) {
            continue;
        }
        let (wv, gw) = w.eval(x)?;
        let fx = f.eval(x)?;
        let dot: f64 = fx.iter().zip(&gw).map(|(a, b)| a * b).sum();
        best = best.max(-dot / wv);
        used += 1;
    }
    if used == 0 {
        return Err(Error::InvalidArgument("omega0 grid has no regular points".into()));
    }
    Ok(best)
}

/// Samples `w(z) / (e^{tω₀} w(Φᵗ(z))) − 1` at the given times.
pub fn check_decay_bound(
    f: &PolynomialMap,
    w: &WeightFunction,
    z: &[f64],
    times: &[f64],
    omega0: f64,
    cfg: &IntegratorConfig,
) -> Result<HypothesisReport> {
    let (wz, _) = w.eval(z)?;
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut x = z.to_vec();
    let mut t_prev = 0.0;
    let mut max_violation = f64::NEG_INFINITY;
    for &t in &sorted {
        x = integrate_flow(f, &x, t - t_prev, cfg)?;
        t_prev = t;
        let (wx, _) = w.eval(&x)?;
        max_violation = max_violation.max(wz / ((t * omega0).exp() * wx) - 1.0);
    }
    Ok(HypothesisReport::new(
        "decay_bound",
        max_violation <= DECAY_BOUND_TOL,
        [("max_violation", max_violation), ("omega0", omega0)],
    ))
}

/// Port-Hamiltonian contraction rate `max −∇HᵀR∇H / (2H)` together with the
/// skewness of `J` and symmetry/semidefiniteness of `R` on the grid.
pub fn check_port_hamiltonian(
    h: &Polynomial,
    j: &PolyMatrix,
    r: &PolyMatrix,
    grid: &[Vec<f64>],
) -> Result<HypothesisReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("port-Hamiltonian check needs grid points".into()));
    }
    let mut omega0 = f64::NEG_INFINITY;
    let mut skew_defect: f64 = 0.0;
    let mut r_asym: f64 = 0.0;
    let mut r_min_eig = f64::INFINITY;
    for x in grid {
        let hv = h.eval(x)?;
        if !(hv > 0.0) {
            return Err(Error::InvalidParameter {
                name: "hamiltonian".into(),
                reason: format!("H = {hv} is not positive at {x:?}"),
            });
        }
        let gh = h.gradient(x)?;
        let jm = j.eval(x)?;
        let rm = r.eval(x)?;
        skew_defect = skew_defect.max(jm.add(&jm.transpose())?.max_abs());
        r_asym = r_asym.max(rm.sub(&rm.transpose())?.max_abs());
        let eig = sym_eig(&rm.symmetrized())?;
        r_min_eig = r_min_eig.min(*eig.values.last().unwrap_or(&0.0));
        let rg = rm.matvec(&gh)?;
        let quad: f64 = gh.iter().zip(&rg).map(|(a, b)| a * b).sum();
        omega0 = omega0.max(-quad / (2.0 * hv));
    }
    let passed = omega0 < 0.0 && skew_defect <= STRUCTURE_TOL && r_asym <= STRUCTURE_TOL && r_min_eig >= -STRUCTURE_TOL;
    Ok(HypothesisReport::new(
        "port_hamiltonian",
        passed,
        [
            ("omega0", omega0),
            ("j_skew_defect", skew_defect),
            ("r_asymmetry", r_asym),
            ("r_min_eigenvalue", r_min_eig),
        ],
    ))
}

/// Spectral abscissa of `Df(x_eq)` via the real Schur form.
pub fn check_linearization(f: &PolynomialMap, x_eq: &[f64]) -> Result<HypothesisReport> {
    let residual = f.eval(x_eq)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let schur = real_schur(&f.jacobian(x_eq)?)?;
    let abscissa = schur.spectral_abscissa();
    Ok(HypothesisReport::new(
        "linearization",
        abscissa < 0.0 && residual <= STRUCTURE_TOL,
        [("spectral_abscissa", abscissa), ("equilibrium_residual", residual)],
    ))
}
