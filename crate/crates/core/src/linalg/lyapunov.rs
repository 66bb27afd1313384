//! Continuous Lyapunov equation `K P + P Kᵀ + Q = 0`.
//!
//! [`solve_lyapunov`] is Bartels–Stewart on the real Schur form of `K`;
//! [`solve_lyapunov_kron`] is an independent dense Kronecker-product solve
//! used as an oracle for small sizes.

use super::lu::LuFactor;
use super::schur::{real_schur, Block, Eigenvalue, SchurForm};
use super::DenseMatrix;
use crate::error::{Error, Result};

/// Largest order accepted by the Kronecker oracle (the system is n² × n²).
pub const KRON_MAX_ORDER: usize = 64;

fn check_shapes(k: &DenseMatrix, q: &DenseMatrix) -> Result<usize> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch {
            context: "Lyapunov: K must be square".into(),
            expected: k.rows(),
            found: k.cols(),
        });
    }
    if q.rows() != k.rows() || q.cols() != k.rows() {
        return Err(Error::DimensionMismatch {
            context: "Lyapunov: Q must match K".into(),
            expected: k.rows(),
            found: q.rows().max(q.cols()),
        });
    }
    Ok(k.rows())
}

/// Solves `K P + P Kᵀ + Q = 0` by Bartels–Stewart; the result is symmetrized.
///
/// Fails with [`Error::SingularSylvester`] when two eigenvalues of `K` sum to
/// within `1e-10 ‖K‖_F` of zero.
pub fn solve_lyapunov(k: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    let schur = real_schur(k)?;
    solve_lyapunov_schur(&schur, q)
}

/// Same as [`solve_lyapunov`] but reuses a precomputed Schur form of `K`.
pub fn solve_lyapunov_schur(schur: &SchurForm, q: &DenseMatrix) -> Result<DenseMatrix> {
    let n = check_shapes(&schur.t, q)?;
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let blocks = schur.blocks();
    check_sylvester_gap(schur, &blocks)?;

    // T Y + Y Tᵀ = C with C = −Uᵀ Q U.
    let c = schur.q.tr_matmul(&q.matmul(&schur.q)?)?.scale(-1.0);
    let y = solve_quasi_triangular(&schur.t, &blocks, &c)?;
    let p = schur.q.matmul(&y)?.matmul(&schur.q.transpose())?;
    Ok(p.symmetrized())
}

fn check_sylvester_gap(schur: &SchurForm, blocks: &[Block]) -> Result<()> {
    let eig: Vec<Eigenvalue> = schur.eigenvalues();
    let scale = schur.t.frobenius_norm();
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    // Eigenvalues come in block order; pair sums only need one representative
    // of each conjugate pair plus both signs of the imaginary part.
    let _ = blocks;
    for (i, a) in eig.iter().enumerate() {
        for b in eig.iter().skip(i) {
            let re = a.re + b.re;
            let im = a.im + b.im;
            let sum = re.hypot(im);
            if sum <= tol {
                return Err(Error::SingularSylvester {
                    lambda_i: a.to_string(),
                    lambda_j: b.to_string(),
                    sum,
                });
            }
        }
    }
    Ok(())
}

/// Solves `T Y + Y Tᵀ = C` for quasi-upper-triangular `T`.
fn solve_quasi_triangular(t: &DenseMatrix, blocks: &[Block], c: &DenseMatrix) -> Result<DenseMatrix> {
    let n = t.rows();
    // Work column-major-ish: ycols[j] holds column j of Y.
    let mut ycols: Vec<Vec<f64>> = vec![vec![0.0; n]; n];

    for jb in blocks.iter().rev() {
        let cols: Vec<usize> = (jb.start..jb.start + jb.size).collect();
        // R = C[:, J] − Σ_{l > J} Y[:, l] T[J, l]ᵀ
        let mut rhs: Vec<Vec<f64>> = cols.iter().map(|&j| c.column(j)).collect();
        let after = jb.start + jb.size;
        for (r, &j) in rhs.iter_mut().zip(&cols) {
            let trow = t.row(j);
            for l in after..n {
                let tjl = trow[l];
                if tjl == 0.0 {
                    continue;
                }
                for (ri, yi) in r.iter_mut().zip(&ycols[l]) {
                    *ri -= tjl * yi;
                }
            }
        }
        // S = T[J, J]ᵀ ; solve T Z + Z S = R by block back-substitution.
        let s = small_block(t, *jb, true);
        let z = solve_column_block(t, blocks, &s, rhs)?;
        for (k, &j) in cols.iter().enumerate() {
            ycols[j] = z[k].clone();
        }
    }

    let mut y = DenseMatrix::zeros(n, n);
    for (j, col) in ycols.iter().enumerate() {
        y.set_column(j, col);
    }
    Ok(y)
}

/// Returns the diagonal block as a small dense row-major array (optionally transposed).
fn small_block(t: &DenseMatrix, b: Block, transpose: bool) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for i in 0..b.size {
        for j in 0..b.size {
            let v = t[(b.start + i, b.start + j)];
            if transpose {
                m[j][i] = v;
            } else {
                m[i][j] = v;
            }
        }
    }
    m
}

/// Solves `T Z + Z S = R`, `Z` with `rhs.len()` (1 or 2) columns.
fn solve_column_block(
    t: &DenseMatrix,
    blocks: &[Block],
    s: &[[f64; 2]; 2],
    mut rhs: Vec<Vec<f64>>,
) -> Result<Vec<Vec<f64>>> {
    let n = t.rows();
    let m = rhs.len();
    let mut z = vec![vec![0.0; n]; m];
    for ib in blocks.iter().rev() {
        let p = ib.size;
        let rows = ib.start..ib.start + p;
        // rhs_i −= Σ_{k > i} T[i, k] Z[k]  (accumulated lazily below)
        let tb = small_block(t, *ib, false);
        // Unknowns z[c][r] for r in rows, c in 0..m: (p·m) ≤ 4.
        let dim = p * m;
        let mut a = [[0.0f64; 4]; 4];
        let mut b = [0.0f64; 4];
        for c in 0..m {
            for r in 0..p {
                let row = c * p + r;
                b[row] = rhs[c][ib.start + r];
                // (T Z)[r, c] = Σ_r' T[r, r'] Z[r', c]
                for rp in 0..p {
                    a[row][c * p + rp] += tb[r][rp];
                }
                // (Z S)[r, c] = Σ_c' Z[r, c'] S[c', c]
                for cp in 0..m {
                    a[row][cp * p + r] += s[cp][c];
                }
            }
        }
        let sol = solve_small(&mut a, &mut b, dim)?;
        for c in 0..m {
            for r in 0..p {
                z[c][ib.start + r] = sol[c * p + r];
            }
        }
        // Propagate the solved rows into the remaining right-hand sides.
        for c in 0..m {
            for r in rows.clone() {
                let zr = z[c][r];
                if zr == 0.0 {
                    continue;
                }
                for i in 0..ib.start {
                    rhs[c][i] -= t[(i, r)] * zr;
                }
            }
        }
    }
    Ok(z)
}

/// Gaussian elimination with complete pivoting on a ≤4×4 system.
fn solve_small(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], n: usize) -> Result<[f64; 4]> {
    let mut perm = [0usize, 1, 2, 3];
    let scale = a.iter().take(n).flat_map(|r| r.iter().take(n)).fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for (i, row) in a.iter().enumerate().take(n).skip(k) {
            for (j, v) in row.iter().enumerate().take(n).skip(k) {
                if v.abs() > best {
                    best = v.abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) * 1e-2 {
            return Err(Error::SingularSystem { pivot: best, column: k });
        }
        a.swap(k, pi);
        b.swap(k, pi);
        if pj != k {
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            perm.swap(k, pj);
        }
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 4];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in (k + 1)..n {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    let mut out = [0.0; 4];
    for k in 0..n {
        out[perm[k]] = x[k];
    }
    Ok(out)
}

/// Oracle: solves `(I⊗K + K⊗I) vec(P) = −vec(Q)` by dense LU with partial pivoting.
pub fn solve_lyapunov_kron(k: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    let n = check_shapes(k, q)?;
    if n > KRON_MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "solve_lyapunov_kron: order {n} exceeds {KRON_MAX_ORDER} (n² × n² dense system)"
        )));
    }
    let nn = n * n;
    // vec is column-major: index(i, j) = i + j n.
    let mut big = DenseMatrix::zeros(nn, nn);
    for j in 0..n {
        for i in 0..n {
            let row = i + j * n;
            // (K P)_{ij} = Σ_l K_{il} P_{lj}
            for l in 0..n {
                big[(row, l + j * n)] += k[(i, l)];
            }
            // (P Kᵀ)_{ij} = Σ_l P_{il} K_{jl}
            for l in 0..n {
                big[(row, i + l * n)] += k[(j, l)];
            }
        }
    }
    let mut rhs = vec![0.0; nn];
    for j in 0..n {
        for i in 0..n {
            rhs[i + j * n] = -q[(i, j)];
        }
    }
    let lu = LuFactor::new(big)?;
    let x = lu.solve(&rhs)?;
    let p = DenseMatrix::from_fn(n, n, |i, j| x[i + j * n]);
    Ok(p.symmetrized())
}

/// `‖K P + P Kᵀ + Q‖_F`.
pub fn lyapunov_residual_norm(k: &DenseMatrix, p: &DenseMatrix, q: &DenseMatrix) -> Result<f64> {
    let kp = k.matmul(p)?;
    let r = kp.add(&kp.transpose())?.add(q)?;
    Ok(r.frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
        let d = a.sub(b).unwrap().frobenius_norm();
        assert!(d <= tol, "difference {d:e}\n{a:?}\n{b:?}");
    }

    fn linear2d_transposed() -> DenseMatrix {
        DenseMatrix::from_rows(&[[-2.0, -1.0], [1.0, -3.0]]).unwrap()
    }

    fn x_linear2d() -> DenseMatrix {
        DenseMatrix::from_rows(&[[17.0 / 70.0, 1.0 / 70.0], [1.0 / 70.0, 12.0 / 70.0]]).unwrap()
    }

    #[test]
    fn diagonal_case() {
        let k = DenseMatrix::from_diag(&[-1.0, -2.0]);
        let q = DenseMatrix::identity(2);
        let expect = DenseMatrix::from_diag(&[0.5, 0.25]);
        close(&solve_lyapunov(&k, &q).unwrap(), &expect, 1e-15);
        close(&solve_lyapunov_kron(&k, &q).unwrap(), &expect, 1e-15);
    }

    #[test]
    fn scaled_identity_case() {
        let k = DenseMatrix::identity(2).scale(-2.0);
        let q = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        close(&solve_lyapunov(&k, &q).unwrap(), &q.scale(0.25), 1e-15);
        close(&solve_lyapunov_kron(&k, &q).unwrap(), &q.scale(0.25), 1e-15);
    }

    #[test]
    fn linear2d_matrix() {
        // X = [[17,1],[1,12]]/70 solves A_mᵀ X + X A_m + I = 0 (hand-solved 3×3 system).
        let k = linear2d_transposed();
        let q = DenseMatrix::identity(2);
        let bs = solve_lyapunov(&k, &q).unwrap();
        let kr = solve_lyapunov_kron(&k, &q).unwrap();
        close(&bs, &x_linear2d(), 1e-14);
        close(&kr, &x_linear2d(), 1e-14);
        close(&bs, &kr, 1e-12);
    }

    #[test]
    fn zero_rhs() {
        let k = linear2d_transposed();
        let q = DenseMatrix::zeros(2, 2);
        assert_eq!(solve_lyapunov(&k, &q).unwrap().max_abs(), 0.0);
        assert_eq!(solve_lyapunov_kron(&k, &q).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn singular_sylvester_is_named() {
        let k = DenseMatrix::from_diag(&[-1.0, 0.0]);
        let err = solve_lyapunov(&k, &DenseMatrix::identity(2)).unwrap_err();
        assert!(matches!(err, Error::SingularSylvester { .. }), "{err}");
        let rot = DenseMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert!(matches!(
            solve_lyapunov(&rot, &DenseMatrix::identity(2)),
            Err(Error::SingularSylvester { .. })
        ));
    }

    #[test]
    fn kron_order_cap() {
        let k = DenseMatrix::identity(KRON_MAX_ORDER + 1).scale(-1.0);
        let q = DenseMatrix::identity(KRON_MAX_ORDER + 1);
        assert!(solve_lyapunov_kron(&k, &q).is_err());
    }

    #[test]
    fn complex_blocks_and_mixed() {
        // Block-diagonal with a complex pair and real eigenvalues, rotated.
        let k = DenseMatrix::from_rows(&[
            [-0.5, 2.0, 0.3, 0.0],
            [-2.0, -0.5, 0.1, 0.2],
            [0.0, 0.0, -1.0, 0.7],
            [0.0, 0.0, -0.4, -1.5],
        ])
        .unwrap();
        let q = DenseMatrix::from_rows(&[
            [2.0, 0.5, 0.0, 0.1],
            [0.5, 1.0, 0.2, 0.0],
            [0.0, 0.2, 1.5, 0.3],
            [0.1, 0.0, 0.3, 1.0],
        ])
        .unwrap();
        let bs = solve_lyapunov(&k, &q).unwrap();
        let kr = solve_lyapunov_kron(&k, &q).unwrap();
        close(&bs, &kr, 1e-12);
        assert!(lyapunov_residual_norm(&k, &bs, &q).unwrap() < 1e-13);
    }
}
