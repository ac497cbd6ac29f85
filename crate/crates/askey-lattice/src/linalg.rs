//! Small dense linear algebra used by the oracle paths: symmetric
//! tridiagonal QL with implicit shifts, Householder reduction for dense
//! symmetric matrices, and a scaling-and-squaring matrix exponential.
//!
//! Matrices are plain `Vec<Vec<f64>>`, row-major; everything here is O(n³)
//! and runs on matrices of at most a few hundred rows.

use crate::error::{Error, Result};

const MAX_QL_ITER: usize = 50;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric
/// tridiagonal matrix. `offdiag` holds the n−1 subdiagonal entries.
///
/// The matrices arising here are strongly graded: diagonal entries can span
/// fifteen orders of magnitude (q-lattices grow like q^{-x}). QL with
/// implicit shifts is accurate on graded matrices when the small entries
/// come first, so the matrix is processed in reversed index order and the
/// eigenvectors un-reversed afterwards; feeding the natural order in loses
/// roughly two digits in the small eigenvalues.
pub fn eigh_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    assert!(n > 0 && offdiag.len() + 1 == n, "inconsistent tridiagonal");
    // decide orientation by the corner diagonal entries
    let reversed = diag[0].abs() > diag[n - 1].abs();
    let mut d: Vec<f64> = if reversed {
        diag.iter().rev().copied().collect()
    } else {
        diag.to_vec()
    };
    // tql2 wants the subdiagonal in e[1..]
    let mut e: Vec<f64> = vec![0.0];
    if reversed {
        e.extend(offdiag.iter().rev());
    } else {
        e.extend_from_slice(offdiag);
    }
    let mut z: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    tql2(&mut d, &mut e, &mut z)?;
    // columns of z are the eigenvectors; extract, undo the reversal
    let mut vecs: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut v: Vec<f64> = (0..n).map(|i| z[i][j]).collect();
            if reversed {
                v.reverse();
            }
            v
        })
        .collect();
    // tql2 leaves (d, columns) sorted ascending already, but make it explicit
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    vecs = order.iter().map(|&k| std::mem::take(&mut vecs[k])).collect();
    Ok((vals, vecs))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a dense symmetric
/// matrix, by Householder tridiagonalization followed by QL.
pub fn eigh(mat: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = mat.len();
    assert!(n > 0 && mat.iter().all(|r| r.len() == n), "matrix not square");
    let mut z: Vec<Vec<f64>> = mat.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, &mut d, &mut e);
    tql2(&mut d, &mut e, &mut z)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let vecs: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| (0..n).map(|i| z[i][j]).collect())
        .collect();
    Ok((vals, vecs))
}

/// Symmetric Householder reduction to tridiagonal form (EISPACK tred2, via
/// the JAMA translation). On exit `z` holds the accumulated transformation,
/// `d` the diagonal and `e[1..]` the subdiagonal.
fn tred2(z: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = z.len();
    d.copy_from_slice(&z[n - 1][..n]);

    for i in (1..n).rev() {
        // accumulate the scale to avoid under/overflow
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = z[i - 1][j];
                z[i][j] = 0.0;
                z[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            // apply the Householder similarity
            for j in 0..i {
                f = d[j];
                z[j][i] = f;
                g = e[j] + z[j][j] * f;
                for k in j + 1..i {
                    g += z[k][j] * d[k];
                    e[k] += z[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    z[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = z[i - 1][j];
                z[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n - 1 {
        z[n - 1][i] = z[i][i];
        z[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = z[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += z[k][i + 1] * z[k][j];
                }
                for k in 0..=i {
                    z[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            z[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = z[n - 1][j];
        z[n - 1][j] = 0.0;
    }
    z[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Symmetric tridiagonal QL with implicit shifts (EISPACK tql2, via JAMA).
/// `d` holds the diagonal, `e[1..]` the subdiagonal; `z` accumulates the
/// rotations (identity in for the purely tridiagonal case). Eigenvalues come
/// out ascending in `d` with eigenvectors in the columns of `z`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
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
                if iter > MAX_QL_ITER {
                    return Err(Error::ConvergenceFailure(format!(
                        "QL iteration did not converge at row {l} after {MAX_QL_ITER} sweeps"
                    )));
                }
                // implicit shift from the 2x2 corner
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
                for i in l + 2..n {
                    d[i] -= h;
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
                    for zk in z.iter_mut() {
                        let h = zk[i + 1];
                        zk[i + 1] = s * zk[i] + c * h;
                        zk[i] = c * zk[i] - s * h;
                    }
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

    // sort ascending, dragging eigenvector columns along
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in i + 1..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for zj in z.iter_mut() {
                zj.swap(i, k);
            }
        }
    }
    Ok(())
}

/// exp(A) by scaling and squaring with a diagonal Padé(13) approximant
/// (Higham 2005). General real square matrices; used as the independent
/// oracle against the spectral heat kernels.
pub fn expm(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    assert!(n > 0 && a.iter().all(|r| r.len() == n), "matrix not square");
    let norm = (0..n)
        .map(|j| (0..n).map(|i| a[i][j].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    // theta_13 for double precision
    let theta = 5.371920351148152;
    let s = if norm > theta {
        (norm / theta).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(s);
    let a1: Vec<Vec<f64>> = a
        .iter()
        .map(|row| row.iter().map(|&v| v * scale).collect())
        .collect();

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let ident = eye(n);
    let a2 = matmul(&a1, &a1);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a2, &a4);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let mut w = lincomb(&[(B[13], &a6), (B[11], &a4), (B[9], &a2)]);
    w = matmul(&a6, &w);
    let w = add(
        &w,
        &lincomb(&[(B[7], &a6), (B[5], &a4), (B[3], &a2), (B[1], &ident)]),
    );
    let u = matmul(&a1, &w);
    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut v = lincomb(&[(B[12], &a6), (B[10], &a4), (B[8], &a2)]);
    v = matmul(&a6, &v);
    let v = add(
        &v,
        &lincomb(&[(B[6], &a6), (B[4], &a4), (B[2], &a2), (B[0], &ident)]),
    );

    // solve (V - U) R = (V + U)
    let vmu = sub(&v, &u);
    let vpu = add(&v, &u);
    let mut r = solve(&vmu, &vpu);
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    r
}

pub fn eye(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

fn add(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

fn sub(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

fn lincomb(terms: &[(f64, &Vec<Vec<f64>>)]) -> Vec<Vec<f64>> {
    let n = terms[0].1.len();
    let mut out = vec![vec![0.0; n]; n];
    for &(coef, m) in terms {
        for (ro, rm) in out.iter_mut().zip(m) {
            for (o, v) in ro.iter_mut().zip(rm) {
                *o += coef * v;
            }
        }
    }
    out
}

/// Solve A X = B by partial-pivot LU; panics on exactly singular input,
/// which cannot occur for the diagonally dominant Padé denominators.
fn solve(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut lu: Vec<Vec<f64>> = a.to_vec();
    let mut x: Vec<Vec<f64>> = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| lu[i][col].abs().total_cmp(&lu[j][col].abs()))
            .unwrap();
        assert!(lu[piv][col] != 0.0, "singular system in Pade solve");
        lu.swap(col, piv);
        x.swap(col, piv);
        for row in col + 1..n {
            let f = lu[row][col] / lu[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = lu[col][k];
                lu[row][k] -= f * v;
            }
            for k in 0..m {
                let v = x[col][k];
                x[row][k] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        for k in 0..m {
            let mut s = x[col][k];
            for j in col + 1..n {
                s -= lu[col][j] * x[j][k];
            }
            x[col][k] = s / lu[col][col];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_2x2() {
        // [[1, 2], [2, 1]] has eigenvalues -1 and 3
        let (vals, vecs) = eigh_tridiagonal(&[1.0, 1.0], &[2.0]).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
        for v in &vecs {
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tridiagonal_laplacian() {
        // path-graph Laplacian-ish: known eigenvalues 2 - 2 cos(k pi / (n+1))
        let n = 12;
        let (vals, _) = eigh_tridiagonal(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, &v) in vals.iter().enumerate() {
            let expect = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - expect).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn dense_matches_tridiagonal() {
        let n = 9;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64) * 1.7 + 0.3).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| -(0.9 + 0.1 * i as f64)).collect();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i + 1 < n {
                dense[i][i + 1] = off[i];
                dense[i + 1][i] = off[i];
            }
        }
        let (v1, _) = eigh_tridiagonal(&diag, &off).unwrap();
        let (v2, w2) = eigh(&dense).unwrap();
        for i in 0..n {
            assert!((v1[i] - v2[i]).abs() < 1e-12 * (1.0 + v1[i].abs()));
            let hv = matvec(&dense, &w2[i]);
            for j in 0..n {
                assert!((hv[j] - v2[i] * w2[i][j]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn expm_diagonal_and_nilpotent() {
        let e = expm(&[vec![1.0, 0.0], vec![0.0, -2.0]]);
        assert!((e[0][0] - 1f64.exp()).abs() < 1e-14);
        assert!((e[1][1] - (-2f64).exp()).abs() < 1e-14);
        assert!(e[0][1].abs() < 1e-16 && e[1][0].abs() < 1e-16);
        // nilpotent: exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let e = expm(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!((e[0][0] - 1.0).abs() < 1e-15 && (e[0][1] - 1.0).abs() < 1e-15);
        // scaling path: exp(t L) for a stochastic generator keeps column sums 1
        let l = vec![vec![-3.0, 2.0], vec![3.0, -2.0]];
        let tl: Vec<Vec<f64>> = l.iter().map(|r| r.iter().map(|v| v * 4.0).collect()).collect();
        let e = expm(&tl);
        for j in 0..2 {
            let cs: f64 = (0..2).map(|i| e[i][j]).sum();
            assert!((cs - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn expm_matches_eigendecomposition() {
        // symmetric case: exp via spectral decomposition as reference
        let a = vec![
            vec![0.2, -1.1, 0.0, 0.4],
            vec![-1.1, 1.5, 0.7, 0.0],
            vec![0.0, 0.7, -0.9, 0.3],
            vec![0.4, 0.0, 0.3, 2.0],
        ];
        let (vals, vecs) = eigh(&a).unwrap();
        let n = 4;
        let mut reference = vec![vec![0.0; n]; n];
        for k in 0..n {
            let ek = vals[k].exp();
            for i in 0..n {
                for j in 0..n {
                    reference[i][j] += ek * vecs[k][i] * vecs[k][j];
                }
            }
        }
        let e = expm(&a);
        for i in 0..n {
            for j in 0..n {
                assert!((e[i][j] - reference[i][j]).abs() < 1e-12);
            }
        }
    }
}
