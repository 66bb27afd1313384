use super::Polynomial;
use crate::error::{Error, Result};

/// Points closer than this to a singular point of a weight count as singular.
pub const SINGULAR_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `w(x) = c`.
    Constant(f64),
    /// `w(x) = 1 / ‖x − center‖`.
    InverseNorm { center: Vec<f64> },
    /// `w(x) = H(x)^{-1/2}` for a positive Hamiltonian `H`.
    Hamiltonian(Polynomial),
}

/// Weight `w: Ω → ℝ₊` defining `L¹_w` and `H = L²_{w²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    kind: WeightKind,
    singular_points: Vec<Vec<f64>>,
}

impl WeightFunction {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "weight.value".into(),
                reason: format!("constant weight must be positive, got {c}"),
            });
        }
        Ok(Self {
            kind: WeightKind::Constant(c),
            singular_points: vec![],
        })
    }

    pub fn inverse_norm(center: Vec<f64>) -> Self {
        Self {
            singular_points: vec![center.clone()],
            kind: WeightKind::InverseNorm { center },
        }
    }

    /// `w = H^{-1/2}`; `zeros` lists the points where `H` vanishes (typically the equilibrium).
    pub fn hamiltonian(h: Polynomial, zeros: Vec<Vec<f64>>) -> Self {
        Self {
            kind: WeightKind::Hamiltonian(h),
            singular_points: zeros,
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn singular_points(&self) -> &[Vec<f64>] {
        &self.singular_points
    }

    pub fn is_singular_at(&self, x: &[f64]) -> bool {
        self.singular_points.iter().any(|s| {
            s.iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                <= SINGULAR_RADIUS
        })
    }

    /// `(w(x), ∇w(x))`.
    pub fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if self.is_singular_at(x) {
            return Err(Error::SingularWeight { point: x.to_vec() });
        }
        match &self.kind {
            WeightKind::Constant(c) => Ok((*c, vec![0.0; x.len()])),
            WeightKind::InverseNorm { center } => {
                if center.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        context: "weight center".into(),
                        expected: center.len(),
                        found: x.len(),
                    });
                }
                let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let r = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
                let r3 = r * r * r;
                Ok((1.0 / r, diff.iter().map(|d| -d / r3).collect()))
            }
            WeightKind::Hamiltonian(h) => {
                let hv = h.eval(x)?;
                if hv <= 0.0 {
                    return Err(Error::SingularWeight { point: x.to_vec() });
                }
                let grad_h = h.gradient(x)?;
                let w = hv.powf(-0.5);
                let factor = -0.5 * hv.powf(-1.5);
                Ok((w, grad_h.iter().map(|g| factor * g).collect()))
            }
        }
    }

    /// `w(x)²`, the density of the Hilbert-space inner product.
    pub fn squared(&self, x: &[f64]) -> Result<f64> {
        let (w, _) = self.eval(x)?;
        Ok(w * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_norm_closed_form() {
        let w = WeightFunction::inverse_norm(vec![0.0, 0.0]);
        let (v, g) = w.eval(&[3.0, 4.0]).unwrap();
        assert!((v - 0.2).abs() < 1e-16);
        assert!((g[0] + 3.0 / 125.0).abs() < 1e-16);
        assert!((g[1] + 4.0 / 125.0).abs() < 1e-16);
        assert!(matches!(w.eval(&[0.0, 0.0]), Err(Error::SingularWeight { .. })));
    }

    #[test]
    fn constant_weight() {
        let w = WeightFunction::constant(1.0).unwrap();
        assert_eq!(w.eval(&[0.3, -2.0]).unwrap(), (1.0, vec![0.0, 0.0]));
        assert!(WeightFunction::constant(0.0).is_err());
    }

    #[test]
    fn hamiltonian_weight() {
        let h = Polynomial::from_terms(2, &[(0.5, &[2, 0]), (0.5, &[0, 2])]).unwrap();
        let w = WeightFunction::hamiltonian(h, vec![vec![0.0, 0.0]]);
        let (v, g) = w.eval(&[1.0, 0.0]).unwrap();
        let s2 = 2f64.sqrt();
        assert!((v - s2).abs() < 1e-15);
        assert!((g[0] + s2).abs() < 1e-15 && g[1] == 0.0);
        assert!(w.eval(&[0.0, 0.0]).is_err());
    }
}
