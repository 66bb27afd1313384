use crate::error::{Error, Result};

/// Legendre polynomial `(P_k(x), P_k'(x))` on `[-1, 1]`.
///
/// Values use the Bonnet recurrence, derivatives `P'_{k+1} = P'_{k-1} + (2k+1) P_k`,
/// which stays finite at `x = ±1`.
pub fn legendre_eval(k: usize, x: f64) -> (f64, f64) {
    let mut out_v = vec![0.0; k + 1];
    let mut out_d = vec![0.0; k + 1];
    legendre_all(x, &mut out_v, &mut out_d);
    (out_v[k], out_d[k])
}

/// Fills `P_0..P_n` and their derivatives, `n + 1 = values.len()`.
fn legendre_all(x: f64, values: &mut [f64], ders: &mut [f64]) {
    let n = values.len();
    if n == 0 {
        return;
    }
    values[0] = 1.0;
    ders[0] = 0.0;
    if n == 1 {
        return;
    }
    values[1] = x;
    ders[1] = 1.0;
    for k in 1..n - 1 {
        let kf = k as f64;
        values[k + 1] = ((2.0 * kf + 1.0) * x * values[k] - kf * values[k - 1]) / (kf + 1.0);
        ders[k + 1] = ders[k - 1] + (2.0 * kf + 1.0) * values[k];
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Basis1DKind {
    /// `P_0..P_max_degree` mapped to `[a, b]`; `normalized` scales by
    /// `√((2k+1)/(b−a))` so the functions are orthonormal in `L²(a, b)`.
    Legendre { max_degree: usize, normalized: bool },
    /// `1, x, …, x^max_degree`.
    Monomial { max_degree: usize },
    /// B-splines of `degree` on the full knot vector `knots`.
    BSpline { knots: Vec<f64>, degree: usize },
}

/// A finite family of univariate functions on `[a, b]` with first derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis1D {
    kind: Basis1DKind,
    a: f64,
    b: f64,
}

impl Basis1D {
    pub fn legendre(max_degree: usize, a: f64, b: f64) -> Result<Self> {
        Self::checked(
            Basis1DKind::Legendre {
                max_degree,
                normalized: true,
            },
            a,
            b,
        )
    }

    /// Unscaled `P_k((2x − a − b)/(b − a))`.
    pub fn legendre_raw(max_degree: usize, a: f64, b: f64) -> Result<Self> {
        Self::checked(
            Basis1DKind::Legendre {
                max_degree,
                normalized: false,
            },
            a,
            b,
        )
    }

    pub fn monomial(max_degree: usize, a: f64, b: f64) -> Result<Self> {
        Self::checked(Basis1DKind::Monomial { max_degree }, a, b)
    }

    /// Clamped B-splines: `breakpoints` (endpoints included) with the end
    /// knots repeated `degree + 1` times.
    pub fn bspline_clamped(breakpoints: &[f64], degree: usize) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidArgument("B-spline basis needs at least two breakpoints".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("B-spline breakpoints must be strictly increasing".into()));
        }
        let a = breakpoints[0];
        let b = *breakpoints.last().unwrap();
        let mut knots = vec![a; degree];
        knots.extend_from_slice(breakpoints);
        knots.extend(std::iter::repeat(b).take(degree));
        Self::bspline(knots, degree)
    }

    /// B-splines on an explicit non-decreasing knot vector.
    pub fn bspline(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if knots.len() < degree + 2 {
            return Err(Error::InvalidArgument(format!(
                "{} knots are too few for degree {degree}",
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("knot vector must be non-decreasing".into()));
        }
        let a = knots[degree];
        let b = knots[knots.len() - 1 - degree];
        Self::checked(Basis1DKind::BSpline { knots, degree }, a, b)
    }

    fn checked(kind: Basis1DKind, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("invalid basis interval [{a}, {b}]")));
        }
        Ok(Self { kind, a, b })
    }

    pub fn kind(&self) -> &Basis1DKind {
        &self.kind
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn count(&self) -> usize {
        match &self.kind {
            Basis1DKind::Legendre { max_degree, .. } | Basis1DKind::Monomial { max_degree } => max_degree + 1,
            Basis1DKind::BSpline { knots, degree } => knots.len() - degree - 1,
        }
    }

    /// Whether function `i` is constant on the interval.
    pub fn is_constant(&self, i: usize) -> bool {
        match &self.kind {
            Basis1DKind::Legendre { .. } | Basis1DKind::Monomial { .. } => i == 0,
            Basis1DKind::BSpline { .. } => false,
        }
    }

    /// Values and derivatives of all functions at `x`.
    pub fn eval_all(&self, x: f64, values: &mut [f64], ders: &mut [f64]) {
        match &self.kind {
            Basis1DKind::Legendre { normalized, .. } => {
                let scale = 2.0 / (self.b - self.a);
                let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
                legendre_all(t, values, ders);
                for (k, (v, d)) in values.iter_mut().zip(ders.iter_mut()).enumerate() {
                    let c = if *normalized {
                        ((2 * k + 1) as f64 / (self.b - self.a)).sqrt()
                    } else {
                        1.0
                    };
                    *v *= c;
                    *d *= c * scale;
                }
            }
            Basis1DKind::Monomial { .. } => {
                let mut p = 1.0;
                for k in 0..values.len() {
                    ders[k] = if k == 0 { 0.0 } else { k as f64 * values[k - 1] };
                    values[k] = p;
                    p *= x;
                }
            }
            Basis1DKind::BSpline { knots, degree } => {
                values.iter_mut().for_each(|v| *v = 0.0);
                ders.iter_mut().for_each(|v| *v = 0.0);
                let p = *degree;
                let span = find_span(knots, p, values.len(), x);
                let n_p = basis_funs(knots, span, x, p);
                for (r, v) in n_p.iter().enumerate() {
                    values[span - p + r] = *v;
                }
                if p > 0 {
                    // N'_{i,p} = p/(u_{i+p}−u_i) N_{i,p−1} − p/(u_{i+p+1}−u_{i+1}) N_{i+1,p−1}
                    let n_q = basis_funs(knots, span, x, p - 1);
                    let lower = |i: usize| -> f64 {
                        // N_{i,p−1} is nonzero only for i in span−p+1..=span.
                        if i + p >= span + 1 && i <= span {
                            n_q[i + p - 1 - span]
                        } else {
                            0.0
                        }
                    };
                    let pf = p as f64;
                    for i in span - p..=span {
                        let mut d = 0.0;
                        let den1 = knots[i + p] - knots[i];
                        if den1 > 0.0 {
                            d += pf / den1 * lower(i);
                        }
                        let den2 = knots[i + p + 1] - knots[i + 1];
                        if den2 > 0.0 {
                            d -= pf / den2 * lower(i + 1);
                        }
                        ders[i] = d;
                    }
                }
            }
        }
    }
}

/// Knot span index `s` with `u_s ≤ x < u_{s+1}` (right end mapped to the last span).
fn find_span(knots: &[f64], p: usize, count: usize, x: f64) -> usize {
    let n = count - 1;
    if x >= knots[n + 1] {
        return n;
    }
    if x <= knots[p] {
        return p;
    }
    let (mut low, mut high) = (p, n + 1);
    let mut mid = (low + high) / 2;
    while x < knots[mid] || x >= knots[mid + 1] {
        if x < knots[mid] {
            high = mid;
        } else {
            low = mid;
        }
        mid = (low + high) / 2;
    }
    mid
}

/// Nonzero `N_{span−p..span, p}(x)` by the Cox–de Boor triangle.
fn basis_funs(knots: &[f64], span: usize, x: f64, p: usize) -> Vec<f64> {
    let mut n = vec![0.0; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    n[0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let den = right[r + 1] + left[j - r];
            let temp = if den != 0.0 { n[r] / den } else { 0.0 };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// `(B_i(x), B_i'(x))` for B-spline `i` of `basis`.
pub fn bspline_eval(basis: &Basis1D, i: usize, x: f64) -> Result<(f64, f64)> {
    let Basis1DKind::BSpline { knots, .. } = basis.kind() else {
        return Err(Error::InvalidArgument("bspline_eval needs a B-spline basis".into()));
    };
    let count = basis.count();
    if i >= count {
        return Err(Error::InvalidArgument(format!("B-spline index {i} out of range (count {count})")));
    }
    if x < knots[0] || x > knots[knots.len() - 1] {
        return Err(Error::InvalidArgument(format!("{x} outside the knot vector")));
    }
    let mut v = vec![0.0; count];
    let mut d = vec![0.0; count];
    basis.eval_all(x, &mut v, &mut d);
    Ok((v[i], d[i]))
}
