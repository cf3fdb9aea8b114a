//! Dense complex linear algebra helpers shared by the rest of the crate.
//!
//! Everything here works on `DMatrix<Complex64>` ("[`CMat`]"). Matrices that
//! live on a tensor product carry an explicit dimension vector `dims`, with
//! slot 0 being the leftmost tensor factor; composite indices are row-major
//! over `dims`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Frobenius inner product `tr(a† b)`.
pub fn frob_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn herm_eigvals(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    let se = m.clone().symmetric_eigen();
    let mut evs: Vec<f64> = se.eigenvalues.iter().cloned().collect();
    evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    evs
}

/// Hermitian eigendecomposition: `(eigenvalues ascending, eigenvectors as columns)`.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], CMat::identity(1, 1));
    }
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let evs: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        vecs.set_column(new_col, &se.eigenvectors.column(old_col));
    }
    (evs, vecs)
}

pub fn min_eig(m: &CMat) -> f64 {
    herm_eigvals(m).first().cloned().unwrap_or(0.0)
}

pub fn max_eig(m: &CMat) -> f64 {
    herm_eigvals(m).last().cloned().unwrap_or(0.0)
}

/// Operator (spectral) norm: largest singular value.
pub fn opnorm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    let sv = m.clone().singular_values();
    sv.iter().cloned().fold(0.0, f64::max)
}

/// Trace norm (sum of singular values).
pub fn trace_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone().singular_values().iter().sum()
}

/// Deviation from self-adjointness in operator norm.
pub fn herm_deviation(m: &CMat) -> f64 {
    opnorm(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Row-major strides for a dimension vector.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn decompose(mut idx: usize, dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for i in 0..dims.len() {
        out[i] = idx / strides[i];
        idx %= strides[i];
    }
    out
}

fn compose(multi: &[usize], strides: &[usize]) -> usize {
    multi.iter().zip(strides).map(|(i, s)| i * s).sum()
}

/// Reorders the tensor slots of a square matrix on `⊗ dims`.
///
/// `perm[j]` names the old slot that lands at new position `j`; the result
/// acts on `⊗_j dims[perm[j]]`.
pub fn permute_slots(x: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let d: usize = dims.iter().product();
    assert_eq!(x.nrows(), d);
    assert_eq!(x.ncols(), d);
    assert_eq!(perm.len(), dims.len());
    let st_old = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let st_new = strides(&new_dims);
    // map new flat index -> old flat index
    let mut back = vec![0usize; d];
    for (new_flat, item) in back.iter_mut().enumerate() {
        let multi_new = decompose(new_flat, &new_dims, &st_new);
        let mut multi_old = vec![0usize; dims.len()];
        for (j, &p) in perm.iter().enumerate() {
            multi_old[p] = multi_new[j];
        }
        *item = compose(&multi_old, &st_old);
    }
    let mut out = CMat::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            out[(r, c)] = x[(back[r], back[c])];
        }
    }
    out
}

/// Partial trace over the listed slots; kept slots retain their order.
pub fn partial_trace(x: &CMat, dims: &[usize], traced: &[usize]) -> CMat {
    let d: usize = dims.iter().product();
    assert_eq!(x.nrows(), d);
    let keep: Vec<usize> = (0..dims.len()).filter(|i| !traced.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let tr_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = tr_dims.iter().product();
    let st = strides(dims);
    let st_keep = strides(&keep_dims);
    let st_tr = strides(&tr_dims);
    let mut out = CMat::zeros(dk, dk);
    let mut multi = vec![0usize; dims.len()];
    for rk in 0..dk {
        for ck in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..dt {
                let mt = decompose(t, &tr_dims, &st_tr);
                let mrk = decompose(rk, &keep_dims, &st_keep);
                for (j, &slot) in keep.iter().enumerate() {
                    multi[slot] = mrk[j];
                }
                for (j, &slot) in traced.iter().enumerate() {
                    multi[slot] = mt[j];
                }
                let r = compose(&multi, &st);
                let mck = decompose(ck, &keep_dims, &st_keep);
                for (j, &slot) in keep.iter().enumerate() {
                    multi[slot] = mck[j];
                }
                let c = compose(&multi, &st);
                acc += x[(r, c)];
            }
            out[(rk, ck)] = acc;
        }
    }
    out
}

/// Partial transpose on the listed slots.
pub fn partial_transpose(x: &CMat, dims: &[usize], transposed: &[usize]) -> CMat {
    let d: usize = dims.iter().product();
    assert_eq!(x.nrows(), d);
    let st = strides(dims);
    let mut out = CMat::zeros(d, d);
    for r in 0..d {
        let mr = decompose(r, dims, &st);
        for c in 0..d {
            let mc = decompose(c, dims, &st);
            let mut mr2 = mr.clone();
            let mut mc2 = mc.clone();
            for &slot in transposed {
                mr2[slot] = mc[slot];
                mc2[slot] = mr[slot];
            }
            out[(compose(&mr2, &st), compose(&mc2, &st))] = x[(r, c)];
        }
    }
    out
}

/// Inserts an identity factor of dimension `dim_new` at slot `pos` of `x` on `⊗ dims`.
pub fn insert_identity_slot(x: &CMat, dims: &[usize], pos: usize, dim_new: usize) -> CMat {
    let k = kron(x, &identity(dim_new));
    // k lives on dims ++ [dim_new]; move the last slot to position `pos`.
    let mut full_dims: Vec<usize> = dims.to_vec();
    full_dims.push(dim_new);
    let last = full_dims.len() - 1;
    let mut perm: Vec<usize> = Vec::with_capacity(full_dims.len());
    for j in 0..full_dims.len() {
        if j == pos {
            perm.push(last);
        }
        if j < last {
            perm.push(j);
        }
    }
    perm.truncate(full_dims.len());
    permute_slots(&k, &full_dims, &perm)
}

// ---------------------------------------------------------------------------
// Hermitian real-coordinate basis.
//
// Herm(n) is an n²-dimensional real vector space; we use the orthonormal
// basis {e_ii} ∪ {(e_ij+e_ji)/√2, (i e_ij − i e_ji)/√2 : i<j}, enumerated by
// (i,i) then (i,j,re), (i,j,im) in lexicographic order.
// ---------------------------------------------------------------------------

pub fn herm_dim(n: usize) -> usize {
    n * n
}

/// The `p`-th orthonormal Hermitian basis matrix of size `n`.
pub fn herm_basis(n: usize, p: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    let mut idx = 0usize;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i..n {
            if i == j {
                if idx == p {
                    m[(i, i)] = re(1.0);
                    return m;
                }
                idx += 1;
            } else {
                if idx == p {
                    m[(i, j)] = re(s);
                    m[(j, i)] = re(s);
                    return m;
                }
                idx += 1;
                if idx == p {
                    m[(i, j)] = cplx(0.0, s);
                    m[(j, i)] = cplx(0.0, -s);
                    return m;
                }
                idx += 1;
            }
        }
    }
    panic!("herm_basis index {} out of range for n={}", p, n);
}

/// Coordinates of a Hermitian matrix in the orthonormal basis above.
pub fn herm_coords(x: &CMat) -> RVec {
    let n = x.nrows();
    let mut v = RVec::zeros(herm_dim(n));
    let mut idx = 0usize;
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i..n {
            if i == j {
                v[idx] = x[(i, i)].re;
                idx += 1;
            } else {
                v[idx] = x[(i, j)].re * s;
                idx += 1;
                v[idx] = x[(i, j)].im * s;
                idx += 1;
            }
        }
    }
    v
}

pub fn herm_from_coords(v: &RVec, n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    let mut idx = 0usize;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i..n {
            if i == j {
                m[(i, i)] = re(v[idx]);
                idx += 1;
            } else {
                let a = v[idx] * s;
                idx += 1;
                let b = v[idx] * s;
                idx += 1;
                m[(i, j)] = cplx(a, b);
                m[(j, i)] = cplx(a, -b);
            }
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Real symmetric embedding of complex Hermitian matrices:
// E(X) = [[Re X, −Im X], [Im X, Re X]] is symmetric, PSD iff X is, and has
// the spectrum of X with doubled multiplicities.
// ---------------------------------------------------------------------------

pub fn embed_herm(x: &CMat) -> RMat {
    let n = x.nrows();
    let mut s = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = x[(i, j)];
            s[(i, j)] = z.re;
            s[(i + n, j + n)] = z.re;
            s[(i, j + n)] = -z.im;
            s[(i + n, j)] = z.im;
        }
    }
    s
}

/// Left inverse of [`embed_herm`]; on general symmetric input it averages over
/// the embedding symmetry, which preserves positive semidefiniteness.
pub fn unembed_sym(s: &RMat) -> CMat {
    let n = s.nrows() / 2;
    let mut x = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re_part = 0.5 * (s[(i, j)] + s[(i + n, j + n)]);
            let im_part = 0.5 * (s[(i + n, j)] - s[(i, j + n)]);
            x[(i, j)] = cplx(re_part, im_part);
        }
    }
    // enforce exact hermiticity
    (&x + x.adjoint()).scale(0.5)
}

// ---------------------------------------------------------------------------
// svec packing for real symmetric matrices (off-diagonals scaled by √2 so the
// packed inner product equals the Frobenius one).
// ---------------------------------------------------------------------------

pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

pub fn svec(m: &RMat) -> RVec {
    let n = m.nrows();
    let mut v = RVec::zeros(svec_len(n));
    let s = std::f64::consts::SQRT_2;
    let mut idx = 0;
    for i in 0..n {
        v[idx] = m[(i, i)];
        idx += 1;
        for j in (i + 1)..n {
            v[idx] = m[(i, j)] * s;
            idx += 1;
        }
    }
    v
}

pub fn smat(v: &RVec, n: usize) -> RMat {
    let mut m = RMat::zeros(n, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = 0;
    for i in 0..n {
        m[(i, i)] = v[idx];
        idx += 1;
        for j in (i + 1)..n {
            let val = v[idx] * s;
            m[(i, j)] = val;
            m[(j, i)] = val;
            idx += 1;
        }
    }
    m
}

/// Gram matrix `G_ij = ⟨v_i, v_j⟩` (conjugate-linear in the first slot).
pub fn gram(vs: &[CVec]) -> CMat {
    let k = vs.len();
    let mut g = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = vs[i].dotc(&vs[j]);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn herm_eig_reconstructs() {
        let m = CMat::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.0, 1.0),
                c(1.0, 0.0),
                c(0.0, -1.0),
                c(3.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
            ],
        );
        let (evs, vecs) = herm_eig(&m);
        let d = CMat::from_diagonal(&CVec::from_iterator(3, evs.iter().map(|&x| re(x))));
        let recon = &vecs * d * vecs.adjoint();
        assert!((&m - recon).norm() < 1e-10);
        assert!(evs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn partial_trace_of_kron_factorizes() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.2), c(0.5, -0.2), c(2.0, 0.0)]);
        let b = CMat::from_row_slice(3, 3, &[
            c(1.0, 0.0), c(0.0, 0.3), c(0.0, 0.0),
            c(0.0, -0.3), c(0.5, 0.0), c(0.1, 0.0),
            c(0.0, 0.0), c(0.1, 0.0), c(0.25, 0.0),
        ]);
        let k = kron(&a, &b);
        let ta = partial_trace(&k, &[2, 3], &[1]);
        let tb = partial_trace(&k, &[2, 3], &[0]);
        assert!((ta - a.scale(trace(&b).re)).norm() < 1e-12);
        assert!((tb - b.scale(trace(&a).re)).norm() < 1e-12);
    }

    #[test]
    fn permute_slots_swaps_kron_factors() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let b = CMat::from_row_slice(3, 3, &[
            c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
            c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0),
            c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0),
        ]);
        let ab = kron(&a, &b);
        let ba = kron(&b, &a);
        let swapped = permute_slots(&ab, &[2, 3], &[1, 0]);
        assert!((swapped - ba).norm() < 1e-14);
    }

    #[test]
    fn insert_identity_slot_matches_manual_kron() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.5, 0.0)]);
        let b = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let x = kron(&a, &b); // on [2, 2]
        let lifted = insert_identity_slot(&x, &[2, 2], 1, 3);
        let direct = kron(&kron(&a, &identity(3)), &b);
        assert!((lifted - direct).norm() < 1e-14);
    }

    #[test]
    fn herm_coords_roundtrip_and_orthonormal() {
        let n = 3;
        for p in 0..herm_dim(n) {
            for q in 0..herm_dim(n) {
                let hp = herm_basis(n, p);
                let hq = herm_basis(n, q);
                let ip = frob_inner(&hp, &hq);
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!((ip.re - expect).abs() < 1e-14 && ip.im.abs() < 1e-14);
            }
        }
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, -0.7), c(0.3, 0.7), c(-2.0, 0.0)]);
        let v = herm_coords(&m);
        let back = herm_from_coords(&v, 2);
        assert!((m - back).norm() < 1e-14);
    }

    #[test]
    fn embedding_preserves_spectrum_and_inverts() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, -0.7), c(0.3, 0.7), c(-2.0, 0.0)]);
        let s = embed_herm(&m);
        assert!((&s - s.transpose()).norm() < 1e-14);
        let evs_c = herm_eigvals(&m);
        let se = s.clone().symmetric_eigen();
        let mut evs_r: Vec<f64> = se.eigenvalues.iter().cloned().collect();
        evs_r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((evs_r[0] - evs_c[0]).abs() < 1e-12);
        assert!((evs_r[1] - evs_c[0]).abs() < 1e-12);
        assert!((evs_r[2] - evs_c[1]).abs() < 1e-12);
        assert!((evs_r[3] - evs_c[1]).abs() < 1e-12);
        let back = unembed_sym(&s);
        assert!((back - m).norm() < 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn herm_coords_isometry(entries in proptest::collection::vec(-10.0f64..10.0, 8)) {
            // coordinates in the orthonormal basis preserve the Frobenius
            // pairing and invert exactly
            let m = CMat::from_fn(2, 2, |i, j| {
                let idx = 2 * (2 * i + j);
                Complex64::new(entries[idx], entries[idx + 1])
            });
            let h = hermitian_part(&m);
            let v = herm_coords(&h);
            let back = herm_from_coords(&v, 2);
            proptest::prop_assert!((h.clone() - back).norm() < 1e-12);
            let frob = frob_inner(&h, &h).re;
            proptest::prop_assert!((frob - v.dot(&v)).abs() < 1e-10 * (1.0 + frob));
        }
    }

    #[test]
    fn svec_preserves_inner_products() {
        let a = RMat::from_row_slice(3, 3, &[1.0, 2.0, 0.5, 2.0, -1.0, 0.0, 0.5, 0.0, 3.0]);
        let b = RMat::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 2.0, -0.5, 1.0, -0.5, 1.0]);
        let ip_mat = (a.transpose() * &b).trace();
        let ip_vec = svec(&a).dot(&svec(&b));
        assert!((ip_mat - ip_vec).abs() < 1e-12);
        assert!((smat(&svec(&a), 3) - a).norm() < 1e-14);
    }
}
