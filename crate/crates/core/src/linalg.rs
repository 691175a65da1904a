//! Dense symmetric factorization support for the exact synthesizer.
//!
//! Row-major lower-triangular Cholesky, blocked so the cubic work runs
//! through `matrixmultiply`'s SIMD GEMM kernels. Only the lower triangle
//! (including the diagonal) of the input is read or written; the strict
//! upper triangle is scratch.

/// Panel width for the blocked factorization.
const NB: usize = 128;
/// Sub-panel width for the scalar triangular solves.
const SB: usize = 32;

/// In-place Cholesky `A = L L^T` of a symmetric positive-definite matrix.
///
/// On failure returns the zero-based pivot index whose leading minor is not
/// positive definite.
pub(crate) fn cholesky_lower_in_place(a: &mut [f64], n: usize) -> Result<(), usize> {
    assert_eq!(a.len(), n * n);
    let mut p = 0;
    while p < n {
        let pb = NB.min(n - p);
        factor_diag_block(a, n, p, pb)?;
        if p + pb < n {
            panel_solve(a, n, p, pb);
            trailing_update(a, n, p, pb);
        }
        p += pb;
    }
    Ok(())
}

/// Unblocked factorization of the `pb x pb` diagonal block at offset `p`.
fn factor_diag_block(a: &mut [f64], n: usize, p: usize, pb: usize) -> Result<(), usize> {
    for j in 0..pb {
        let row_j = (p + j) * n + p;
        let mut d = a[row_j + j];
        for k in 0..j {
            d -= a[row_j + k] * a[row_j + k];
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(p + j);
        }
        let d = d.sqrt();
        a[row_j + j] = d;
        for i in (j + 1)..pb {
            let row_i = (p + i) * n + p;
            let mut s = a[row_i + j];
            for k in 0..j {
                s -= a[row_i + k] * a[row_j + k];
            }
            a[row_i + j] = s / d;
        }
    }
    Ok(())
}

/// Solves `L21 * L11^T = A21` for the panel rows below the diagonal block.
fn panel_solve(a: &mut [f64], n: usize, p: usize, pb: usize) {
    let r0 = p + pb;
    let rows = n - r0;
    let base = a.as_mut_ptr();
    let mut js = 0;
    while js < pb {
        let sb = SB.min(pb - js);
        if js > 0 {
            // A[r0.., p+js .. p+js+sb] -= L[r0.., p..p+js] * L11[js..js+sb, 0..js]^T
            unsafe {
                matrixmultiply::dgemm(
                    rows,
                    js,
                    sb,
                    -1.0,
                    base.add(r0 * n + p),
                    n as isize,
                    1,
                    base.add((p + js) * n + p),
                    1,
                    n as isize,
                    1.0,
                    base.add(r0 * n + p + js),
                    n as isize,
                    1,
                );
            }
        }
        for r in r0..n {
            let row_r = r * n + p;
            for j in js..(js + sb) {
                let row_j = (p + j) * n + p;
                let mut s = a[row_r + j];
                for k in js..j {
                    s -= a[row_r + k] * a[row_j + k];
                }
                a[row_r + j] = s / a[row_j + j];
            }
        }
        js += sb;
    }
}

/// `A22 -= L21 * L21^T`, one GEMM per trailing block column (lower part only).
fn trailing_update(a: &mut [f64], n: usize, p: usize, pb: usize) {
    let base = a.as_mut_ptr();
    let mut j0 = p + pb;
    while j0 < n {
        let jb = NB.min(n - j0);
        let m2 = n - j0;
        unsafe {
            matrixmultiply::dgemm(
                m2,
                pb,
                jb,
                -1.0,
                base.add(j0 * n + p),
                n as isize,
                1,
                base.add(j0 * n + p),
                1,
                n as isize,
                1.0,
                base.add(j0 * n + j0),
                n as isize,
                1,
            );
        }
        j0 += jb;
    }
}

/// `out = L z` for a lower-triangular row-major `L`.
pub(crate) fn lower_matvec(l: &[f64], n: usize, z: &[f64], out: &mut [f64]) {
    assert_eq!(z.len(), n);
    assert_eq!(out.len(), n);
    for i in 0..n {
        let row = &l[i * n..i * n + i + 1];
        let mut s = 0.0;
        for (lij, zj) in row.iter().zip(z.iter()) {
            s += lij * zj;
        }
        out[i] = s;
    }
}
