//! Real Schur form `A = Q T Qᵀ`.
//!
//! Householder reduction to upper Hessenberg form, then Francis implicit
//! double-shift QR with deflation. Complex conjugate pairs stay as 2×2
//! diagonal blocks; real pairs that converge together are split by a
//! Givens rotation so every 2×2 block carries a genuinely complex pair.

use super::DenseMatrix;
use crate::error::{Error, Result};

/// A (possibly complex) eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl std::fmt::Display for Eigenvalue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.im == 0.0 {
            write!(f, "{:.6e}", self.re)
        } else {
            write!(f, "{:.6e}{:+.6e}i", self.re, self.im)
        }
    }
}

/// Diagonal block of a quasi-triangular matrix: start index and size 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: DenseMatrix,
    pub t: DenseMatrix,
}

impl SchurForm {
    /// Diagonal blocks of `t`, top to bottom.
    pub fn blocks(&self) -> Vec<Block> {
        quasi_triangular_blocks(&self.t)
    }

    pub fn eigenvalues(&self) -> Vec<Eigenvalue> {
        let mut out = Vec::with_capacity(self.t.rows());
        for b in self.blocks() {
            let i = b.start;
            if b.size == 1 {
                out.push(Eigenvalue {
                    re: self.t[(i, i)],
                    im: 0.0,
                });
            } else {
                let (a, bb, c, d) = (
                    self.t[(i, i)],
                    self.t[(i, i + 1)],
                    self.t[(i + 1, i)],
                    self.t[(i + 1, i + 1)],
                );
                let p = 0.5 * (a - d);
                let disc = p * p + bb * c;
                let re = 0.5 * (a + d);
                let im = (-disc).max(0.0).sqrt();
                out.push(Eigenvalue { re, im });
                out.push(Eigenvalue { re, im: -im });
            }
        }
        out
    }

    /// Largest real part of the spectrum.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|e| e.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn quasi_triangular_blocks(t: &DenseMatrix) -> Vec<Block> {
    let n = t.rows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            blocks.push(Block { start: i, size: 2 });
            i += 2;
        } else {
            blocks.push(Block { start: i, size: 1 });
            i += 1;
        }
    }
    blocks
}

pub fn real_schur(a: &DenseMatrix) -> Result<SchurForm> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "real_schur requires a square matrix".into(),
            expected: a.rows(),
            found: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("real_schur: non-finite entries".into()));
    }
    let n = a.rows();
    let mut h = a.clone();
    if n == 0 {
        return Ok(SchurForm {
            q: DenseMatrix::zeros(0, 0),
            t: h,
        });
    }
    // Schur vectors are accumulated transposed (row k of `qt` is column k of Q).
    let mut qt = hessenberg(&mut h);
    let complex_top = francis_qr(&mut h, &mut qt)?;

    // Clean up: exact zeros below the quasi-triangular structure.
    for i in 0..n {
        for j in 0..i {
            let keep = j + 1 == i && complex_top[j];
            if !keep {
                h[(i, j)] = 0.0;
            }
        }
    }
    Ok(SchurForm {
        q: qt.transpose(),
        t: h,
    })
}

/// Reduces `h` to upper Hessenberg form in place, returning the transposed
/// accumulated transform.
fn hessenberg(h: &mut DenseMatrix) -> DenseMatrix {
    let n = h.rows();
    let high = n - 1;
    let mut ort = vec![0.0; n];
    let mut vt = DenseMatrix::identity(n);
    if n < 3 {
        return vt;
    }

    for m in 1..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += h[(i, m - 1)].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        // H ← (I − u uᵀ/hh) H
        let mut fvec = vec![0.0; n];
        for i in m..=high {
            let oi = ort[i];
            for (j, fj) in fvec.iter_mut().enumerate().skip(m) {
                *fj += oi * h[(i, j)];
            }
        }
        for fj in fvec.iter_mut().skip(m) {
            *fj /= hh;
        }
        for i in m..=high {
            let oi = ort[i];
            let row = h.row_mut(i);
            for j in m..n {
                row[j] -= fvec[j] * oi;
            }
        }
        // H ← H (I − u uᵀ/hh)
        for i in 0..=high {
            let row = h.row_mut(i);
            let mut f = 0.0;
            for j in m..=high {
                f += ort[j] * row[j];
            }
            f /= hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }

    // Accumulate the transforms; V is held as Vᵀ.
    for m in (1..high).rev() {
        if h[(m, m - 1)] == 0.0 {
            continue;
        }
        for i in (m + 1)..=high {
            ort[i] = h[(i, m - 1)];
        }
        for j in m..=high {
            let mut g = 0.0;
            for i in m..=high {
                g += ort[i] * vt[(j, i)];
            }
            g = (g / ort[m]) / h[(m, m - 1)];
            let row = vt.row_mut(j);
            for i in m..=high {
                row[i] += g * ort[i];
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = 0.0;
        }
    }
    vt
}

/// Francis double-shift QR on an upper Hessenberg matrix; returns, per row,
/// whether a 2×2 complex block starts there.
fn francis_qr(h: &mut DenseMatrix, vt: &mut DenseMatrix) -> Result<Vec<bool>> {
    let nn = h.rows();
    let low = 0usize;
    let high = nn - 1;
    let eps = f64::EPSILON;
    let max_iter = 40 * nn.max(10);
    let mut complex_top = vec![false; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);
    let (mut w, mut x, mut y);

    while n >= low as isize {
        let nu = n as usize;
        // Look for a single small subdiagonal element.
        let mut l = nu;
        while l > low {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // One root.
            h[(nu, nu)] += exshift;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            // Two roots.
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;

            if q >= 0.0 {
                // Real pair: rotate to upper triangular.
                z = if p >= 0.0 { p + z } else { p - z };
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (nu - 1)..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                rotate_pair(vt, nu - 1, nu, q, p);
                h[(nu, nu - 1)] = 0.0;
            } else {
                complex_top[nu - 1] = true;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // Exceptional shifts.
            if iter == 10 {
                exshift += x;
                for i in low..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iter += 1;
            if total_iter > max_iter {
                return Err(Error::NoConvergence {
                    algorithm: "Francis QR",
                    iterations: total_iter,
                });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    // Row modification.
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    // Column modification.
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                    // Accumulate transformations (rows of Vᵀ).
                    reflect_rows(vt, k, notlast, x, y, z, q, r);
                }
                k += 1;
            }
        }
    }
    let _ = high;
    Ok(complex_top)
}

/// Rotation of Schur-vector columns `a`, `b` stored as rows of Vᵀ:
/// `col_a ← q·col_a + p·col_b`, `col_b ← q·col_b − p·col_a`.
fn rotate_pair(vt: &mut DenseMatrix, a: usize, b: usize, q: f64, p: f64) {
    let cols = vt.cols();
    let data = vt.as_mut_slice();
    let (head, tail) = data.split_at_mut(b * cols);
    let ra = &mut head[a * cols..(a + 1) * cols];
    let rb = &mut tail[..cols];
    for (va, vb) in ra.iter_mut().zip(rb.iter_mut()) {
        let z = *va;
        *va = q * z + p * *vb;
        *vb = q * *vb - p * z;
    }
}

#[allow(clippy::too_many_arguments)]
fn reflect_rows(vt: &mut DenseMatrix, k: usize, notlast: bool, x: f64, y: f64, z: f64, q: f64, r: f64) {
    let cols = vt.cols();
    let data = vt.as_mut_slice();
    let (head, rest) = data.split_at_mut((k + 1) * cols);
    let rk = &mut head[k * cols..];
    if notlast {
        let (r1, r2) = rest.split_at_mut(cols);
        let r2 = &mut r2[..cols];
        for ((a, b), c) in rk.iter_mut().zip(r1.iter_mut()).zip(r2.iter_mut()) {
            let p = x * *a + y * *b + z * *c;
            *c -= p * r;
            *a -= p;
            *b -= p * q;
        }
    } else {
        let r1 = &mut rest[..cols];
        for (a, b) in rk.iter_mut().zip(r1.iter_mut()) {
            let p = x * *a + y * *b;
            *a -= p;
            *b -= p * q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig;

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed;
        move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        }
    }

    pub(crate) fn check_schur(a: &DenseMatrix, s: &SchurForm) {
        let n = a.rows();
        let qtq = s.q.tr_matmul(&s.q).unwrap();
        let orth = qtq.sub(&DenseMatrix::identity(n)).unwrap().frobenius_norm();
        assert!(orth <= 1e-12 * n as f64, "orthogonality {orth:e}");
        let rec = s.q.matmul(&s.t).unwrap().matmul(&s.q.transpose()).unwrap();
        let err = rec.sub(a).unwrap().frobenius_norm();
        assert!(err <= 1e-10 * a.frobenius_norm().max(1e-300), "reconstruction {err:e}");
        for i in 0..n {
            for j in 0..i {
                if j + 1 < i {
                    assert_eq!(s.t[(i, j)], 0.0);
                }
            }
        }
        for i in 1..n.saturating_sub(1) {
            assert!(s.t[(i, i - 1)] == 0.0 || s.t[(i + 1, i)] == 0.0, "adjacent 2x2 blocks overlap");
        }
    }

    #[test]
    fn upper_triangular_is_fixed() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [0.0, 4.0, 5.0], [0.0, 0.0, 6.0]]).unwrap();
        let s = real_schur(&a).unwrap();
        check_schur(&a, &s);
        for i in 0..3 {
            assert!((s.t[(i, i)] - a[(i, i)]).abs() < 1e-14);
            assert!((s.q[(i, i)].abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_block() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let s = real_schur(&a).unwrap();
        check_schur(&a, &s);
        assert_eq!(s.blocks(), vec![Block { start: 0, size: 2 }]);
        let ev = s.eigenvalues();
        assert!(ev[0].re.abs() < 1e-15 && (ev[0].im.abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_matches_sym_eig() {
        let mut next = lcg(11);
        let b = DenseMatrix::from_fn(12, 12, |_, _| next());
        let a = b.add(&b.transpose()).unwrap();
        let s = real_schur(&a).unwrap();
        check_schur(&a, &s);
        assert!(s.blocks().iter().all(|b| b.size == 1));
        let mut schur_vals: Vec<f64> = s.eigenvalues().iter().map(|e| e.re).collect();
        schur_vals.sort_by(|x, y| y.total_cmp(x));
        let eig = sym_eig(&a).unwrap();
        for (x, y) in schur_vals.iter().zip(&eig.values) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn random_matrices_reconstruct() {
        for (seed, n) in [(1u64, 1usize), (2, 2), (3, 3), (4, 7), (5, 40), (6, 120)] {
            let mut next = lcg(seed);
            let a = DenseMatrix::from_fn(n, n, |_, _| next());
            let s = real_schur(&a).unwrap();
            check_schur(&a, &s);
        }
    }

    #[test]
    fn companion_and_defective() {
        // Jordan block and a companion matrix with clustered roots.
        let jordan = DenseMatrix::from_rows(&[[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]]).unwrap();
        check_schur(&jordan, &real_schur(&jordan).unwrap());
        let companion = DenseMatrix::from_rows(&[
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let s = real_schur(&companion).unwrap();
        check_schur(&companion, &s);
        for e in s.eigenvalues() {
            assert!(((e.re * e.re + e.im * e.im).sqrt() - 1.0).abs() < 1e-12);
        }
    }
}
