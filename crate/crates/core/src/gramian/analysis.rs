use super::{sos_eval, GeneratorMatrix, GramianSolution, ObservationMatrix, SumOfSquares};
use crate::error::{Error, Result};
use crate::flow::rk::Dopri5;
use crate::flow::{tail_estimate, IntegratorConfig};
use crate::linalg::lyapunov_residual_norm;
use crate::model::{NuclearCost, Polynomial, PolynomialMap};
use crate::quadrature::gauss_legendre;

/// `‖K P̂ + P̂ Kᵀ + ĈᵀĈ‖_F / max(‖ĈᵀĈ‖_F, ε)`.
pub fn lyap_residual(gen: &GeneratorMatrix, obs: &ObservationMatrix, sol: &GramianSolution) -> Result<f64> {
    let q = obs.chat.tr_matmul(&obs.chat)?;
    let r = lyapunov_residual_norm(&gen.k, &sol.phat, &q)?;
    Ok(r / q.frobenius_norm().max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub max: f64,
    pub rms: f64,
    pub count: usize,
}

/// Statistics of `r(z) = ∇v(z)ᵀ f(z) + g(z)` over `points`.
pub fn pde_residual(sos: &SumOfSquares, f: &PolynomialMap, g: &NuclearCost, points: &[Vec<f64>]) -> Result<ResidualStats> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("pde_residual needs at least one point".into()));
    }
    let (mut max, mut sq) = (0.0f64, 0.0);
    for z in points {
        let (_, grad) = sos_eval(sos, z)?;
        let fz = f.eval(z)?;
        let r = grad.iter().zip(&fz).map(|(a, b)| a * b).sum::<f64>() + g.eval(z)?;
        max = max.max(r.abs());
        sq += r * r;
    }
    Ok(ResidualStats {
        max,
        rms: (sq / points.len() as f64).sqrt(),
        count: points.len(),
    })
}

/// Algebraic decay rate of eigenvalue tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `−slope` of `log Σ_{n≥N} λ_n` against `log N`.
    pub m_hat: f64,
    /// Coefficient of determination of the fit.
    pub fit_quality: f64,
    pub n_min: usize,
    pub n_max: usize,
}

/// Fit over `N = n_min..=P`, `P` the number of positive eigenvalues (1-based `N`).
pub fn decay_fit(eigenvalues: &[f64], n_min: usize) -> Result<DecayFit> {
    let positive = eigenvalues.iter().take_while(|&&l| l > 0.0).count();
    if n_min == 0 || positive < n_min + 5 {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs at least n_min + 5 = {} positive eigenvalues, found {positive}",
            n_min + 5
        )));
    }
    decay_fit_range(&eigenvalues[..positive], n_min, positive)
}

/// Fit over `N = n_min..=n_max`, tails taken over the whole list.
pub fn decay_fit_range(eigenvalues: &[f64], n_min: usize, n_max: usize) -> Result<DecayFit> {
    if n_min == 0 || n_max < n_min + 2 || n_max > eigenvalues.len() {
        return Err(Error::InvalidArgument(format!(
            "invalid decay-fit range {n_min}..={n_max} for {} eigenvalues",
            eigenvalues.len()
        )));
    }
    // tails[i] = Σ_{n ≥ i+1} λ_n, summed from the small end.
    let mut tails = vec![0.0; eigenvalues.len()];
    let mut acc = 0.0;
    for i in (0..eigenvalues.len()).rev() {
        acc += eigenvalues[i].max(0.0);
        tails[i] = acc;
    }
    let mut xs = Vec::with_capacity(n_max - n_min + 1);
    let mut ys = Vec::with_capacity(xs.capacity());
    for n in n_min..=n_max {
        let t = tails[n - 1];
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("eigenvalue tail from N = {n} is not positive")));
        }
        xs.push((n as f64).ln());
        ys.push(t.ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum();
    let fit_quality = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        m_hat: -slope,
        fit_quality,
        n_min,
        n_max,
    })
}

/// Time discretization for [`laguerre_coefficients`]: cells of width
/// `min(h0 · ratio^k, max_cell)` with `n_per_cell` Gauss nodes each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreConfig {
    pub h0: f64,
    pub ratio: f64,
    pub max_cell: f64,
    pub n_per_cell: usize,
    /// Stop once the estimated `∫_T^∞ |c(Φᵗ(z))| dt` is below this.
    pub tail_tol: f64,
}

impl Default for LaguerreConfig {
    fn default() -> Self {
        Self {
            h0: 0.05,
            ratio: 1.1,
            max_cell: 1.0,
            n_per_cell: 16,
            tail_tol: 1e-12,
        }
    }
}

pub const LAGUERRE_MAX_TERMS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreDecomposition {
    /// `a_n = ∫₀^∞ c(Φᵗ(z)) e^{−t/2} L_n(t) dt`, `n = 0..N−1`.
    pub coefficients: Vec<f64>,
    pub horizon: f64,
    pub tail_bound: f64,
    pub cells: usize,
    pub nodes: usize,
}

impl LaguerreDecomposition {
    /// `Σ_{n<N} a_n²` for `N = 1..`.
    pub fn parseval_partial_sums(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .scan(0.0, |acc, a| {
                *acc += a * a;
                Some(*acc)
            })
            .collect()
    }
}

/// Laguerre functions `H_n(t) = e^{−t/2} L_n(t)`, `n < out.len()`.
fn laguerre_functions(t: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let e = (-0.5 * t).exp();
    out[0] = e;
    if n > 1 {
        out[1] = (1.0 - t) * e;
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 - t) * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// Laguerre coefficients of `t ↦ c(Φᵗ(z))`.
///
/// Since `|H_n| ≤ 1`, the truncation error of every coefficient is bounded by
/// the tail of `∫|c(Φᵗ(z))| dt`, which is estimated as in the cost oracle.
pub fn laguerre_coefficients(
    f: &PolynomialMap,
    c: &Polynomial,
    z: &[f64],
    n_terms: usize,
    cfg: &IntegratorConfig,
    lcfg: &LaguerreConfig,
) -> Result<LaguerreDecomposition> {
    if n_terms > LAGUERRE_MAX_TERMS {
        return Err(Error::InvalidArgument(format!(
            "at most {LAGUERRE_MAX_TERMS} Laguerre terms are supported, requested {n_terms}"
        )));
    }
    if z.len() != f.dim_in() || c.dim() != f.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "Laguerre initial state".into(),
            expected: f.dim_in(),
            found: z.len(),
        });
    }
    if !(lcfg.h0 > 0.0 && lcfg.ratio >= 1.0 && lcfg.max_cell >= lcfg.h0 && lcfg.n_per_cell > 0 && lcfg.tail_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("invalid Laguerre configuration {lcfg:?}")));
    }
    let mut coefficients = vec![0.0; n_terms];
    if c.terms().iter().all(|t| t.coeff == 0.0) {
        return Ok(LaguerreDecomposition {
            coefficients,
            horizon: 0.0,
            tail_bound: 0.0,
            cells: 0,
            nodes: 0,
        });
    }
    cfg.validate()?;
    let mut rk = Dopri5::new(|x: &[f64], out: &mut [f64]| f.eval_into(x, out), z, cfg.rel_tol, cfg.abs_tol, cfg.max_step)?;
    let mut h_vals = vec![0.0; n_terms];
    let mut samples = vec![(0.0, c.eval(z)?.abs())];
    let mut t0 = 0.0;
    let mut width = lcfg.h0;
    let mut cells = 0;
    let mut tail = f64::INFINITY;
    while t0 < cfg.max_time {
        let rule = gauss_legendre(lcfg.n_per_cell, t0, t0 + width)?;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            rk.advance_to(t, |_, _| {})?;
            let cv = c.eval_unchecked(&rk.y);
            samples.push((t, cv.abs()));
            laguerre_functions(t, &mut h_vals);
            for (a, h) in coefficients.iter_mut().zip(&h_vals) {
                *a += w * cv * h;
            }
        }
        t0 += width;
        cells += 1;
        width = (width * lcfg.ratio).min(lcfg.max_cell);
        let at_rest = samples.last().map_or(false, |s| s.1 == 0.0) && f.eval_unchecked(&rk.y).iter().all(|&v| v == 0.0);
        if at_rest {
            tail = 0.0;
        } else if let Some(b) = tail_estimate(&samples) {
            tail = b;
        }
        if tail < lcfg.tail_tol {
            return Ok(LaguerreDecomposition {
                coefficients,
                horizon: t0,
                tail_bound: tail,
                cells,
                nodes: samples.len() - 1,
            });
        }
    }
    Err(Error::Integration {
        t: t0,
        reason: format!("horizon insufficient: Laguerre integrand tail {tail:e} above {:e}", lcfg.tail_tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_functions_match_closed_forms() {
        let mut h = vec![0.0; 3];
        let t = 0.7f64;
        laguerre_functions(t, &mut h);
        let e = (-t / 2.0).exp();
        assert!((h[0] - e).abs() < 1e-16);
        assert!((h[1] - (1.0 - t) * e).abs() < 1e-16);
        assert!((h[2] - (t * t / 2.0 - 2.0 * t + 1.0) * e).abs() < 1e-15);
    }

    #[test]
    fn decay_fit_power_law() {
        let l: Vec<f64> = (1..=2000).map(|n| (n as f64).powi(-5)).collect();
        let fit = decay_fit_range(&l, 20, 200).unwrap();
        assert!(fit.m_hat > 3.8 && fit.m_hat < 4.2, "{fit:?}");
        assert!(fit.fit_quality > 0.99);
    }

    #[test]
    fn decay_fit_geometric_and_constant() {
        let l: Vec<f64> = (1..=60).map(|n| 2f64.powi(-n)).collect();
        assert!(decay_fit(&l, 5).unwrap().m_hat > 10.0);
        let c = vec![1.0; 10_000];
        assert!(decay_fit_range(&c, 5, 40).unwrap().m_hat.abs() < 0.01);
        assert!(decay_fit(&[1.0, 0.5, 0.0, 0.0], 1).is_err());
    }
}
