//! Symmetric eigendecomposition: Householder reduction to tridiagonal form
//! followed by the implicit QL iteration with Wilkinson shifts.

use super::DenseMatrix;
use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Eigenpairs of a symmetric matrix, values sorted descending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: DenseMatrix,
}

impl SymEig {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// `V diag(values) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.values.len();
        let mut out = DenseMatrix::zeros(n, n);
        for k in 0..n {
            let lam = self.values[k];
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = lam * self.vectors[(i, k)];
                if vik == 0.0 {
                    continue;
                }
                let row = out.row_mut(i);
                for (j, o) in row.iter_mut().enumerate() {
                    *o += vik * self.vectors[(j, k)];
                }
            }
        }
        out
    }
}

/// Full spectral decomposition of a symmetric matrix.
///
/// The input may be asymmetric up to `1e-10 ‖S‖_F`; it is symmetrized first.
pub fn sym_eig(s: &DenseMatrix) -> Result<SymEig> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            context: "sym_eig requires a square matrix".into(),
            expected: s.rows(),
            found: s.cols(),
        });
    }
    let norm = s.frobenius_norm();
    let asym = s.asymmetry();
    if asym > 1e-10 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(format!(
            "sym_eig: matrix not symmetric (‖S−Sᵀ‖ = {asym:e}, ‖S‖ = {norm:e})"
        )));
    }
    let n = s.rows();
    if n == 0 {
        return Ok(SymEig {
            values: vec![],
            vectors: DenseMatrix::zeros(0, 0),
        });
    }

    // Work on V stored row-major as V[i][j]; the QL stage works on Vᵀ for contiguous rotations.
    let mut v = s.symmetrized();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    let mut vt = v.transpose();
    tridiagonal_ql(&mut vt, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let src = vt.row(k);
        for i in 0..n {
            vectors[(i, col)] = src[i];
        }
    }
    Ok(SymEig { values, vectors })
}

/// Householder tridiagonalization; on exit `v` holds the accumulated
/// orthogonal transform, `d` the diagonal and `e[1..]` the off-diagonal.
fn tridiagonalize(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal (d, e); `vt` rows are eigenvectors on exit.
fn tridiagonal_ql(vt: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence {
                        algorithm: "symmetric QL iteration",
                        iterations: iter,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_rows(vt, i, i + 1, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Applies `[row_i; row_j] ← [c·row_i − s·row_j; s·row_i + c·row_j]`.
#[inline]
fn rotate_rows(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    debug_assert!(i < j);
    let cols = m.cols();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(j * cols);
    let ri = &mut head[i * cols..(i + 1) * cols];
    let rj = &mut tail[..cols];
    for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}
