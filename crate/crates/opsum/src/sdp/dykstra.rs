//! Alternating-projection (Dykstra) fallback for pure feasibility.
//!
//! Projects alternately onto the affine set `{A x = b}` and the PSD cone with
//! Dykstra's correction so the iterates converge to a point of the
//! intersection when it is nonempty. Never certifies infeasibility; a stall
//! is reported as no answer.

use crate::linalg::{smat, svec, svec_len, RMat, RVec};
use crate::sdp::solver::ConeProgram;

pub(crate) struct DykstraOpts {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DykstraOpts {
    fn default() -> Self {
        DykstraOpts {
            tol: 1e-9,
            max_iter: 20_000,
        }
    }
}

/// Attempts to find `x` with `A x = b` and all cone blocks PSD.
pub(crate) fn dykstra_feasible(prog: &ConeProgram, opts: &DykstraOpts) -> Option<RVec> {
    let m = prog.a.nrows();
    let n = prog.n_total();
    if m == 0 {
        return Some(prog.cone_identity());
    }
    // pseudo-inverse pieces for the affine projection x ← x − Aᵀ(AAᵀ)⁻¹(Ax−b)
    let gram = &prog.a * prog.a.transpose();
    let gram_svd = gram.clone().svd(true, true);

    let project_affine = |x: &RVec| -> RVec {
        let r = &prog.a * x - &prog.b;
        match gram_svd.solve(&r, 1e-12) {
            Ok(u) => x - prog.a.transpose() * u,
            Err(_) => x.clone(),
        }
    };
    let project_cone = |x: &RVec| -> RVec {
        let mut out = x.clone();
        let mut off = 0usize;
        for &d in &prog.sym_dims {
            let len = svec_len(d);
            let mat = smat(&x.rows(off, len).into_owned(), d);
            let se = mat.symmetric_eigen();
            let mut dm = RMat::zeros(d, d);
            for i in 0..d {
                dm[(i, i)] = se.eigenvalues[i].max(0.0);
            }
            let clipped = &se.eigenvectors * dm * se.eigenvectors.transpose();
            out.rows_mut(off, len).copy_from(&svec(&clipped));
            off += len;
        }
        out
    };
    let min_block_eig = |x: &RVec| -> f64 {
        let mut me = f64::INFINITY;
        let mut off = 0usize;
        for &d in &prog.sym_dims {
            let len = svec_len(d);
            let mat = smat(&x.rows(off, len).into_owned(), d);
            let se = mat.symmetric_eigen();
            me = me.min(se.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min));
            off += len;
        }
        me
    };

    let mut x = prog.cone_identity();
    let mut p = RVec::zeros(n);
    let mut q = RVec::zeros(n);
    for _ in 0..opts.max_iter {
        let y = project_affine(&(&x + &p));
        let p_new = &x + &p - &y;
        let xn = project_cone(&(&y + &q));
        let q_new = &y + &q - &xn;
        x = xn;
        p = p_new;
        q = q_new;

        let rp = (&prog.a * &x - &prog.b).amax();
        if rp <= opts.tol && min_block_eig(&x) >= -opts.tol {
            return Some(x);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svec;

    #[test]
    fn finds_density_matrix() {
        // {X ⪰ 0, tr X = 1} on S³
        let n = 3;
        let mut a = RMat::zeros(1, svec_len(n));
        a.set_row(0, &svec(&RMat::identity(n, n)).transpose());
        let prog = ConeProgram {
            sym_dims: vec![n],
            n_free: 0,
            a,
            b: RVec::from_vec(vec![1.0]),
            c: RVec::zeros(svec_len(n)),
        };
        let x = dykstra_feasible(&prog, &DykstraOpts::default()).expect("feasible");
        let xm = smat(&x, n);
        assert!((xm.trace() - 1.0).abs() < 1e-8);
        let se = xm.symmetric_eigen();
        assert!(se.eigenvalues.iter().all(|&e| e >= -1e-8));
    }
}
