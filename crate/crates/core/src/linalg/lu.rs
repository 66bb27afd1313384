use super::DenseMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial (row) pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(mut a: DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "LU requires a square matrix".into(),
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.rows();
        let scale = a.max_abs();
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * n.max(1) as f64 * 1e-3;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in (k + 1)..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(Error::SingularSystem { pivot: best, column: k });
            }
            if p != k {
                swap_rows(&mut a, p, k);
                perm.swap(p, k);
            }
            let pivot = a[(k, k)];
            let cols = a.cols();
            let data = a.as_mut_slice();
            let (head, tail) = data.split_at_mut((k + 1) * cols);
            let pivot_row = &head[k * cols + k + 1..(k + 1) * cols];
            for row in tail.chunks_exact_mut(cols) {
                let f = row[k] / pivot;
                row[k] = f;
                if f == 0.0 {
                    continue;
                }
                for (r, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *r -= f * u;
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "LU solve".into(),
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in 0..i {
                acc -= row[j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        Ok(x)
    }
}

fn swap_rows(a: &mut DenseMatrix, i: usize, j: usize) {
    let cols = a.cols();
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let data = a.as_mut_slice();
    let (head, tail) = data.split_at_mut(hi * cols);
    head[lo * cols..(lo + 1) * cols].swap_with_slice(&mut tail[..cols]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = DenseMatrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]]).unwrap();
        let x = [1.0, -2.0, 0.5];
        let b = a.matvec(&x).unwrap();
        let sol = LuFactor::new(a).unwrap().solve(&b).unwrap();
        for (s, e) in sol.iter().zip(x) {
            assert!((s - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_detected() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(LuFactor::new(a), Err(Error::SingularSystem { .. })));
    }
}
