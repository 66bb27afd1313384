//! Numerical flow `Φᵗ(z)`, the trajectory cost oracle
//! `v(z) = ∫₀^∞ g(Φᵗ(z)) dt` and checks of the hypotheses on `(f, w, Ω)`.

mod checks;
pub(crate) mod rk;

use std::io::{BufRead, Write};

use rayon::prelude::*;

pub use checks::{
    check_decay_bound, check_linearization, check_port_hamiltonian, check_tangent, estimate_omega0,
    omega0_grid, HypothesisReport, DECAY_BOUND_TOL, TANGENT_TOL,
};

use crate::error::{Error, Result};
use crate::model::{BoxDomain, NuclearCost, PolynomialMap};
use rk::Dopri5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1.0,
            max_time: 200.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.rel_tol) && ok(self.abs_tol) && ok(self.max_step) && ok(self.max_time) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid integrator configuration {self:?}")))
        }
    }
}

fn check_start(f: &PolynomialMap, z: &[f64], t: f64) -> Result<()> {
    if z.len() != f.dim_in() || f.dim_out() != f.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "initial state".into(),
            expected: f.dim_in(),
            found: z.len(),
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("flow time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

fn stepper<'a>(f: &'a PolynomialMap, z: &[f64], cfg: &IntegratorConfig) -> Result<Dopri5<impl Fn(&[f64], &mut [f64]) + 'a>> {
    cfg.validate()?;
    Dopri5::new(
        move |x: &[f64], out: &mut [f64]| f.eval_into(x, out),
        z,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_step,
    )
}

/// `Φᵗ(z)` by adaptive Dormand–Prince 5(4).
pub fn integrate_flow(f: &PolynomialMap, z: &[f64], t: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    check_start(f, z, t)?;
    let mut rk = stepper(f, z, cfg)?;
    rk.advance_to(t, |_, _| {})?;
    Ok(rk.y)
}

/// End state plus the largest distance by which any accepted step left `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    pub state: Vec<f64>,
    pub max_overshoot: f64,
}

/// As [`integrate_flow`], reporting (not clamping) excursions outside `dom`.
pub fn integrate_flow_in(
    f: &PolynomialMap,
    dom: &BoxDomain,
    z: &[f64],
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<FlowReport> {
    check_start(f, z, t)?;
    let mut rk = stepper(f, z, cfg)?;
    let mut max_overshoot = dom.overshoot(z);
    rk.advance_to(t, |_, y| max_overshoot = max_overshoot.max(dom.overshoot(y)))?;
    Ok(FlowReport {
        state: rk.y,
        max_overshoot,
    })
}

/// Truncated cost integral with an estimate of the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostIntegral {
    /// `∫₀^T g(Φᵗ(z)) dt`.
    pub value: f64,
    /// The horizon `T`.
    pub horizon: f64,
    /// Estimated bound on `∫_T^∞ g(Φᵗ(z)) dt`.
    pub tail_bound: f64,
}

/// Exponential tail estimate over the samples since `g` last exceeded
/// `10·g(T)`: fit `log g ≈ α + βt` and bound the tail by
/// `max_s g(t_s) e^{β(T − t_s)} / |β|`.
pub(crate) fn tail_estimate(samples: &[(f64, f64)]) -> Option<f64> {
    let &(t_end, g_end) = samples.last()?;
    if g_end <= 0.0 {
        return None;
    }
    let start = samples.iter().rposition(|&(_, g)| g >= 10.0 * g_end)?;
    let window = &samples[start..];
    if window.len() < 3 || window.iter().any(|&(_, g)| g <= 0.0) {
        return None;
    }
    let n = window.len() as f64;
    let mt = window.iter().map(|s| s.0).sum::<f64>() / n;
    let ml = window.iter().map(|s| s.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, g) in window {
        sxy += (t - mt) * (g.ln() - ml);
        sxx += (t - mt) * (t - mt);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return None;
    }
    let peak = window
        .iter()
        .map(|&(t, g)| g * (slope * (t_end - t)).exp())
        .fold(0.0, f64::max);
    Some(peak / slope.abs())
}

/// `v(z) = ∫₀^∞ g(Φᵗ(z)) dt` from the augmented system `ẋ = f, v̇ = g`,
/// integrated until the tail estimate drops below `tail_tol`.
pub fn cost_oracle(
    f: &PolynomialMap,
    g: &NuclearCost,
    z: &[f64],
    cfg: &IntegratorConfig,
    tail_tol: f64,
) -> Result<CostIntegral> {
    check_start(f, z, 0.0)?;
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tail tolerance must be positive, got {tail_tol}")));
    }
    let d = z.len();
    let g0 = g.eval(z)?;
    if g0 == 0.0 && f.eval(z)?.iter().all(|&v| v == 0.0) {
        // Equilibrium: the trajectory is constant and the cost vanishes identically.
        return Ok(CostIntegral {
            value: 0.0,
            horizon: 0.0,
            tail_bound: 0.0,
        });
    }
    cfg.validate()?;
    let rhs = |y: &[f64], out: &mut [f64]| {
        f.eval_into(&y[..d], &mut out[..d]);
        out[d] = g.eval_unchecked(&y[..d]);
    };
    let mut y0 = z.to_vec();
    y0.push(0.0);
    let mut rk = Dopri5::new(rhs, &y0, cfg.rel_tol, cfg.abs_tol, cfg.max_step)?;
    let mut samples = vec![(0.0, g0)];
    let mut tail = f64::INFINITY;
    while rk.t < cfg.max_time {
        rk.step(cfg.max_time)?;
        let gt = g.eval_unchecked(&rk.y[..d]);
        samples.push((rk.t, gt));
        if gt == 0.0 && f.eval_unchecked(&rk.y[..d]).iter().all(|&v| v == 0.0) {
            tail = 0.0;
        } else if let Some(b) = tail_estimate(&samples) {
            tail = b;
        }
        if tail < tail_tol {
            return Ok(CostIntegral {
                value: rk.y[d],
                horizon: rk.t,
                tail_bound: tail,
            });
        }
    }
    Err(Error::NonDecayingCost {
        value: rk.y[d],
        horizon: rk.t,
        tail_bound: tail,
    })
}

/// [`cost_oracle`] at many points in parallel (results in input order).
pub fn cost_oracle_batch(
    f: &PolynomialMap,
    g: &NuclearCost,
    points: &[Vec<f64>],
    cfg: &IntegratorConfig,
    tail_tol: f64,
) -> Vec<Result<CostIntegral>> {
    points
        .par_iter()
        .map(|z| cost_oracle(f, g, z, cfg, tail_tol))
        .collect()
}

/// Reads points from CSV, one per row. Blank lines, `#` comments and a
/// non-numeric header row are skipped.
pub fn read_points_csv<R: BufRead>(input: R, dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(p) if p.len() == dim => points.push(p),
            Ok(p) => {
                return Err(Error::Parse(format!(
                    "line {}: expected {dim} coordinates, found {}",
                    lineno + 1,
                    p.len()
                )))
            }
            Err(_) if points.is_empty() => continue,
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
        }
    }
    Ok(points)
}

/// Writes `x1..xd,value,horizon,tail_bound,status` rows.
pub fn write_oracle_csv<W: Write>(
    mut out: W,
    points: &[Vec<f64>],
    results: &[Result<CostIntegral>],
) -> std::io::Result<()> {
    let dim = points.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    header.extend(["value", "horizon", "tail_bound", "status"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for (p, r) in points.iter().zip(results) {
        for v in p {
            write!(out, "{v:e},")?;
        }
        match r {
            Ok(c) => writeln!(out, "{:e},{:e},{:e},ok", c.value, c.horizon, c.tail_bound)?,
            Err(e) => writeln!(out, "NaN,NaN,NaN,\"{}\"", e.to_string().replace('"', "'"))?,
        }
    }
    Ok(())
}
