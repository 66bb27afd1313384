//! Gauss–Legendre rules, composite rules over breakpoints and weighted tensor
//! grids. Every discrete inner product in the crate is
//! `⟨φ, ψ⟩ = Σ_q ω_q w²(x_q) φ(x_q) ψ(x_q)` over a [`TensorGrid`].

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::WeightFunction;

const NEWTON_MAX_ITER: usize = 100;

/// One-dimensional quadrature rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Legendre `(P_n(t), P_n'(t))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[a, b]`, exact for degree `≤ 2n − 1`.
///
/// Nodes come from Newton's method on `P_n` started at the Chebyshev-like
/// guesses `cos(π(4i+3)/(4n+2))`; the rule is exactly symmetric and odd `n`
/// has the midpoint as a node.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Rule1D> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Legendre rule needs n >= 1".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid interval [{a}, {b}]")));
    }
    let mut t = vec![0.0; n];
    let mut wt = vec![0.0; n];
    let half = n / 2;
    for i in 0..half {
        let mut x = (PI * (4 * i + 3) as f64 / (4 * n + 2) as f64).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                algorithm: "Gauss-Legendre Newton",
                iterations: NEWTON_MAX_ITER,
            });
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Guess i approximates the i-th largest root.
        t[n - 1 - i] = x;
        t[i] = -x;
        wt[n - 1 - i] = w;
        wt[i] = w;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_with_derivative(n, 0.0);
        t[half] = 0.0;
        wt[half] = 2.0 / (dp * dp);
    }
    let mid = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    Ok(Rule1D {
        nodes: t.iter().map(|&x| mid + hw * x).collect(),
        weights: wt.iter().map(|&w| hw * w).collect(),
        a,
        b,
    })
}

/// Concatenated `n_per_cell`-point Gauss–Legendre rules on consecutive cells.
pub fn composite_rule(breakpoints: &[f64], n_per_cell: usize) -> Result<Rule1D> {
    if breakpoints.len() < 2 {
        return Err(Error::InvalidArgument("composite rule needs at least two breakpoints".into()));
    }
    if let Some(w) = breakpoints.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(format!(
            "breakpoints must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    let mut nodes = Vec::with_capacity((breakpoints.len() - 1) * n_per_cell);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in breakpoints.windows(2) {
        let r = gauss_legendre(n_per_cell, w[0], w[1])?;
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Ok(Rule1D {
        nodes,
        weights,
        a: breakpoints[0],
        b: *breakpoints.last().unwrap(),
    })
}

/// Tensor product grid with cached weight factors.
///
/// Points are stored flat (`dim` coordinates per point) in the order of
/// [`crate::model::cartesian`], last coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    dim: usize,
    shape: Vec<usize>,
    points: Vec<f64>,
    vol_weights: Vec<f64>,
    w2_factors: Vec<f64>,
}

/// Tensor grid of `rules` with `w²` cached at every node.
pub fn tensor_grid(rules: &[Rule1D], w: &WeightFunction) -> Result<TensorGrid> {
    if rules.is_empty() || rules.iter().any(Rule1D::is_empty) {
        return Err(Error::InvalidArgument("tensor grid needs non-empty rules".into()));
    }
    let dim = rules.len();
    let shape: Vec<usize> = rules.iter().map(Rule1D::len).collect();
    let total: usize = shape.iter().product();
    let mut points = Vec::with_capacity(total * dim);
    let mut vol_weights = Vec::with_capacity(total);
    let mut w2_factors = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    for _ in 0..total {
        let mut omega = 1.0;
        for k in 0..dim {
            x[k] = rules[k].nodes[idx[k]];
            omega *= rules[k].weights[idx[k]];
        }
        if w.is_singular_at(&x) {
            return Err(Error::SingularWeight { point: x.clone() });
        }
        let w2 = w.squared(&x)?;
        points.extend_from_slice(&x);
        vol_weights.push(omega);
        w2_factors.push(w2);
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(TensorGrid {
        dim,
        shape,
        points,
        vol_weights,
        w2_factors,
    })
}

impl TensorGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.vol_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vol_weights.is_empty()
    }

    pub fn point(&self, q: usize) -> &[f64] {
        &self.points[q * self.dim..(q + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn vol_weights(&self) -> &[f64] {
        &self.vol_weights
    }

    pub fn w2_factors(&self) -> &[f64] {
        &self.w2_factors
    }

    /// `ω_q w²(x_q)`, the full weight of node `q` in the inner product.
    pub fn inner_weight(&self, q: usize) -> f64 {
        self.vol_weights[q] * self.w2_factors[q]
    }

    pub fn measure(&self) -> f64 {
        self.vol_weights.iter().sum()
    }

    /// Rescales the volume weights so that they sum to one, i.e. uses the
    /// Lebesgue measure divided by `|Ω|`.
    pub fn with_unit_measure(mut self) -> Self {
        let m = self.measure();
        for w in &mut self.vol_weights {
            *w /= m;
        }
        self
    }

    /// `Σ_q ω_q f(x_q)` (volume weights only).
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.points()
            .zip(&self.vol_weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }

    /// Discrete weighted inner product of two sample vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != self.len() || b.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "grid samples".into(),
                expected: self.len(),
                found: if a.len() != self.len() { a.len() } else { b.len() },
            });
        }
        Ok((0..self.len()).map(|q| self.inner_weight(q) * a[q] * b[q]).sum())
    }

    /// CSV dump: one row per node with coordinates, `ω_q` and `w²(x_q)`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim)
            .map(|k| format!("x{}", k + 1))
            .chain(["omega".to_string(), "w2".to_string()])
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (q, x) in self.points().enumerate() {
            for v in x {
                write!(out, "{v:e},")?;
            }
            writeln!(out, "{:e},{:e}", self.vol_weights[q], self.w2_factors[q])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn classical_rules() {
        let r = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!(close(r.weights[0], 2.0, 1e-15));

        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!(close(r.nodes[0], -s, 1e-15) && close(r.nodes[1], s, 1e-15));
        assert!(close(r.weights[0], 1.0, 1e-15) && close(r.weights[1], 1.0, 1e-15));

        let r = gauss_legendre(3, -1.0, 1.0).unwrap();
        let s = 0.6f64.sqrt();
        assert!(close(r.nodes[0], -s, 1e-15) && r.nodes[1] == 0.0 && close(r.nodes[2], s, 1e-15));
        assert!(close(r.weights[1], 8.0 / 9.0, 1e-15));
        assert!(close(r.weights[0], 5.0 / 9.0, 1e-15) && close(r.weights[2], 5.0 / 9.0, 1e-15));
    }

    #[test]
    fn large_rules_are_sorted_and_sum_to_length() {
        for n in [10, 33, 64, 150] {
            let r = gauss_legendre(n, -3.0, 3.0).unwrap();
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes[0] > -3.0 && r.nodes[n - 1] < 3.0);
            assert!(close(r.weights.iter().sum::<f64>(), 6.0, 1e-13));
        }
    }

    #[test]
    fn composite_examples() {
        let r = composite_rule(&[-1.0, 0.0, 1.0], 2).unwrap();
        assert_eq!(r.len(), 4);
        assert!(close(r.weights.iter().sum::<f64>(), 2.0, 1e-15));

        let single = composite_rule(&[-2.0, 5.0], 6).unwrap();
        assert_eq!(single, gauss_legendre(6, -2.0, 5.0).unwrap());

        let r = composite_rule(&[-1.0, 0.0, 1.0], 4).unwrap();
        assert!(close(r.integrate(|x| x.powi(6)), 2.0 / 7.0, 1e-14));

        assert!(composite_rule(&[0.0, 0.0, 1.0], 2).is_err());
        assert!(composite_rule(&[0.0], 2).is_err());
    }

    #[test]
    fn tensor_examples() {
        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let g = tensor_grid(&[r.clone(), r.clone()], &WeightFunction::constant(1.0).unwrap()).unwrap();
        assert_eq!(g.len(), 4);
        for q in 0..4 {
            assert!(close(g.vol_weights()[q], 1.0, 1e-15));
            assert_eq!(g.w2_factors()[q], 1.0);
        }
        assert!(close(g.measure(), 4.0, 1e-14));
        let unit = g.clone().with_unit_measure();
        assert!(close(unit.measure(), 1.0, 1e-15));

        let r3 = gauss_legendre(5, -2.0, 1.0).unwrap();
        let g = tensor_grid(&[r3.clone(), r], &WeightFunction::constant(1.0).unwrap()).unwrap();
        assert!(close(g.measure(), 6.0, 1e-13));

        let odd = gauss_legendre(3, -1.0, 1.0).unwrap();
        let w = WeightFunction::inverse_norm(vec![0.0, 0.0]);
        assert!(matches!(
            tensor_grid(&[odd.clone(), odd], &w),
            Err(Error::SingularWeight { .. })
        ));
    }

    #[test]
    fn csv_dump() {
        let r = gauss_legendre(2, 0.0, 1.0).unwrap();
        let g = tensor_grid(&[r], &WeightFunction::constant(2.0).unwrap()).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,omega,w2");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",4e0"));
    }
}
