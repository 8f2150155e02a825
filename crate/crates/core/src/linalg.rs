//! Stack-allocated dense kernels for the small matrices this crate meets:
//! chart dimension at most 4, ambient dimension at most 5. Everything is
//! deterministic (no randomized pivots, fixed sweep order), which the
//! reproducibility guarantees of the residual reports rely on.

/// Hard cap on ambient dimension (chart dimension + 1).
pub const MAX_DIM: usize = 5;

pub type SVec = [f64; MAX_DIM];
pub type SMat = [[f64; MAX_DIM]; MAX_DIM];

pub fn zero_vec() -> SVec {
    [0.0; MAX_DIM]
}

pub fn zero_mat() -> SMat {
    [[0.0; MAX_DIM]; MAX_DIM]
}

pub fn dot(dim: usize, a: &SVec, b: &SVec) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        s += a[i] * b[i];
    }
    s
}

/// Inner product with respect to a metric: `a^T g b`.
pub fn metric_dot(dim: usize, g: &SMat, a: &SVec, b: &SVec) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += a[i] * g[i][j] * b[j];
        }
    }
    s
}

pub fn mat_vec(dim: usize, m: &SMat, v: &SVec) -> SVec {
    let mut out = zero_vec();
    for i in 0..dim {
        for j in 0..dim {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

pub fn mat_mul(dim: usize, a: &SMat, b: &SMat) -> SMat {
    let mut out = zero_mat();
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn trace(dim: usize, m: &SMat) -> f64 {
    (0..dim).map(|i| m[i][i]).sum()
}

/// LU decomposition with partial pivoting, in place. Returns the pivot
/// permutation and the parity sign, or `None` when the matrix is singular to
/// working precision.
fn lu_decompose(dim: usize, a: &mut SMat) -> Option<([usize; MAX_DIM], f64)> {
    let mut perm = [0usize; MAX_DIM];
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    let mut sign = 1.0;
    for k in 0..dim {
        let mut piv = k;
        let mut best = a[k][k].abs();
        for r in k + 1..dim {
            if a[r][k].abs() > best {
                best = a[r][k].abs();
                piv = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            a.swap(piv, k);
            perm.swap(piv, k);
            sign = -sign;
        }
        for r in k + 1..dim {
            let f = a[r][k] / a[k][k];
            a[r][k] = f;
            for c in k + 1..dim {
                a[r][c] -= f * a[k][c];
            }
        }
    }
    Some((perm, sign))
}

pub fn determinant(dim: usize, m: &SMat) -> f64 {
    let mut a = *m;
    match lu_decompose(dim, &mut a) {
        None => 0.0,
        Some((_, sign)) => {
            let mut d = sign;
            for i in 0..dim {
                d *= a[i][i];
            }
            d
        }
    }
}

pub fn invert(dim: usize, m: &SMat) -> Option<SMat> {
    let mut a = *m;
    let (perm, _) = lu_decompose(dim, &mut a)?;
    let mut inv = zero_mat();
    for col in 0..dim {
        // forward/backward substitution on the permuted unit vector
        let mut x = zero_vec();
        for i in 0..dim {
            x[i] = if perm[i] == col { 1.0 } else { 0.0 };
            for j in 0..i {
                x[i] -= a[i][j] * x[j];
            }
        }
        for i in (0..dim).rev() {
            for j in i + 1..dim {
                x[i] -= a[i][j] * x[j];
            }
            x[i] /= a[i][i];
        }
        for i in 0..dim {
            inv[i][col] = x[i];
        }
    }
    Some(inv)
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(dim: usize, g: &SMat) -> Option<SMat> {
    let mut l = zero_mat();
    for i in 0..dim {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L x = b` for lower-triangular `L`.
fn solve_lower(dim: usize, l: &SMat, b: &SVec) -> SVec {
    let mut x = *b;
    for i in 0..dim {
        for j in 0..i {
            x[i] -= l[i][j] * x[j];
        }
        x[i] /= l[i][i];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(dim: usize, m: &SMat) -> SVec {
    let mut a = *m;
    let scale = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| a[i][j].abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in p + 1..dim {
                off = off.max(a[p][q].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                if a[p][q].abs() <= 1e-18 * scale {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev = zero_vec();
    for i in 0..dim {
        ev[i] = a[i][i];
    }
    ev[..dim].sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Eigenvalues of the pencil `b v = k g v` with `g` symmetric positive
/// definite: reduce by Cholesky of `g` to a standard symmetric problem.
pub fn generalized_symmetric_eigenvalues(dim: usize, b: &SMat, g: &SMat) -> Option<SVec> {
    let l = cholesky(dim, g)?;
    // C = L^{-1} b L^{-T}: first solve L Y = b columnwise on the left,
    // then apply the same solve to the rows.
    let mut y = zero_mat();
    for col in 0..dim {
        let mut rhs = zero_vec();
        for r in 0..dim {
            rhs[r] = b[r][col];
        }
        let x = solve_lower(dim, &l, &rhs);
        for r in 0..dim {
            y[r][col] = x[r];
        }
    }
    let mut c = zero_mat();
    for row in 0..dim {
        let mut rhs = zero_vec();
        rhs[..dim].copy_from_slice(&y[row][..dim]);
        let x = solve_lower(dim, &l, &rhs);
        c[row][..dim].copy_from_slice(&x[..dim]);
    }
    // symmetrize away the rounding skew before Jacobi
    for i in 0..dim {
        for j in i + 1..dim {
            let v = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    Some(symmetric_eigenvalues(dim, &c))
}

/// A vector orthogonal to `count` row vectors in `count + 1` dimensions: the
/// generalized cross product, with components given by signed maximal minors.
pub fn orthogonal_complement(count: usize, rows: &[SVec]) -> SVec {
    debug_assert!(count < MAX_DIM && rows.len() >= count);
    let dim = count + 1;
    let mut out = zero_vec();
    let mut sign = 1.0;
    for drop in 0..dim {
        let mut minor = zero_mat();
        for (r, row) in rows.iter().take(count).enumerate() {
            let mut cc = 0;
            for c in 0..dim {
                if c == drop {
                    continue;
                }
                minor[r][cc] = row[c];
                cc += 1;
            }
        }
        out[drop] = sign * determinant(count, &minor);
        sign = -sign;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_inverse_roundtrip() {
        let m: SMat = {
            let mut m = zero_mat();
            let rows = [
                [2.0, 1.0, 0.3, 0.0],
                [1.0, 3.0, -0.2, 0.5],
                [0.3, -0.2, 1.5, 0.1],
                [0.0, 0.5, 0.1, 2.5],
            ];
            for i in 0..4 {
                m[i][..4].copy_from_slice(&rows[i]);
            }
            m
        };
        let inv = invert(4, &m).unwrap();
        let prod = mat_mul(4, &m, &inv);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i][j] - want).abs() < 1e-12);
            }
        }
        assert!((determinant(4, &m) * determinant(4, &inv) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let mut m = zero_mat();
        m[0][0] = 2.0;
        m[0][1] = 1.0;
        m[1][0] = 1.0;
        m[1][1] = 2.0;
        let ev = symmetric_eigenvalues(2, &m);
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_pencil_matches_scaled_identity() {
        // b = diag(2, 6), g = diag(1, 2) -> eigenvalues 2 and 3
        let mut b = zero_mat();
        let mut g = zero_mat();
        b[0][0] = 2.0;
        b[1][1] = 6.0;
        g[0][0] = 1.0;
        g[1][1] = 2.0;
        let ev = generalized_symmetric_eigenvalues(2, &b, &g).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_complement_is_orthogonal() {
        let mut r0 = zero_vec();
        let mut r1 = zero_vec();
        r0[..3].copy_from_slice(&[1.0, 0.2, -0.4]);
        r1[..3].copy_from_slice(&[0.1, -1.3, 0.7]);
        let n = orthogonal_complement(2, &[r0, r1]);
        assert!(dot(3, &n, &r0).abs() < 1e-14);
        assert!(dot(3, &n, &r1).abs() < 1e-14);
        assert!(dot(3, &n, &n) > 1e-6);
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut g = zero_mat();
        g[0][0] = 4.0;
        g[0][1] = 1.0;
        g[1][0] = 1.0;
        g[1][1] = 3.0;
        let l = cholesky(2, &g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    s += l[i][k] * l[j][k];
                }
                assert!((s - g[i][j]).abs() < 1e-14);
            }
        }
        // not positive definite
        g[0][0] = -1.0;
        assert!(cholesky(2, &g).is_none());
    }
}
