//! Primal-dual path-following interior-point core for dense real symmetric
//! cone programs with free variables.
//!
//! Standard form:
//! ```text
//!   min  cᵀx   s.t.  A x = b,   x = (svec(X₁),…,svec(X_L), f),  X_l ⪰ 0, f free
//! ```
//! Directions use Nesterov–Todd scaling with a Mehrotra-style adaptive
//! centering parameter; the reduced KKT system is solved densely with static
//! regularization and iterative refinement. Problems here are tiny (a few
//! hundred variables), so robustness is preferred over sparsity tricks.

use crate::linalg::{smat, svec, svec_len, RMat, RVec};

#[derive(Debug, Clone)]
pub(crate) struct ConeProgram {
    /// Real symmetric PSD block orders.
    pub sym_dims: Vec<usize>,
    pub n_free: usize,
    pub a: RMat,
    pub b: RVec,
    pub c: RVec,
}

impl ConeProgram {
    pub fn n_cone(&self) -> usize {
        self.sym_dims.iter().map(|&n| svec_len(n)).sum()
    }

    pub fn n_total(&self) -> usize {
        self.n_cone() + self.n_free
    }

    /// svec of the identity on every cone block (zeros on free coordinates).
    pub fn cone_identity(&self) -> RVec {
        let mut v = RVec::zeros(self.n_total());
        let mut off = 0;
        for &n in &self.sym_dims {
            let id = svec(&RMat::identity(n, n));
            v.rows_mut(off, id.len()).copy_from(&id);
            off += svec_len(n);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IpmTermination {
    Converged,
    MaxIter,
    Stalled,
    Diverged,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmOut {
    pub term: IpmTermination,
    pub x: RVec,
    pub y: RVec,
    /// Dual cone slack (svec stacked over cone blocks only).
    pub s: RVec,
    pub iters: usize,
    pub rel_primal: f64,
    pub rel_dual: f64,
    pub rel_gap: f64,
    #[allow(dead_code)]
    pub obj_primal: f64,
    #[allow(dead_code)]
    pub obj_dual: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IpmOpts {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
}

impl Default for IpmOpts {
    fn default() -> Self {
        IpmOpts {
            tol_feas: 1e-9,
            tol_gap: 1e-9,
            max_iter: 120,
        }
    }
}

const KKT_REG: f64 = 1e-11;
const STEP_FRACTION: f64 = 0.98;
const REFINE_ROUNDS: usize = 2;

/// Symmetric eigenvalue helper on real matrices.
fn sym_eigvals(m: &RMat) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let se = m.clone().symmetric_eigen();
    let mut evs: Vec<f64> = se.eigenvalues.iter().cloned().collect();
    evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    evs
}

/// PSD square root and inverse square root via eigendecomposition with an
/// eigenvalue floor.
fn sym_sqrt_pair(m: &RMat) -> (RMat, RMat) {
    let n = m.nrows();
    if n == 1 {
        let v = m[(0, 0)].max(1e-300);
        return (
            RMat::from_element(1, 1, v.sqrt()),
            RMat::from_element(1, 1, 1.0 / v.sqrt()),
        );
    }
    let se = m.clone().symmetric_eigen();
    let floor = 1e-14 * se.eigenvalues.iter().cloned().fold(1.0, f64::max);
    let mut d_sqrt = RMat::zeros(n, n);
    let mut d_isqrt = RMat::zeros(n, n);
    for i in 0..n {
        let v = se.eigenvalues[i].max(floor);
        d_sqrt[(i, i)] = v.sqrt();
        d_isqrt[(i, i)] = 1.0 / v.sqrt();
    }
    let q = &se.eigenvectors;
    (q * d_sqrt * q.transpose(), q * d_isqrt * q.transpose())
}

/// Nesterov–Todd scaling point: W with W S W = X.
fn nt_scaling(x: &RMat, s: &RMat) -> RMat {
    let (x_h, _) = sym_sqrt_pair(x);
    let z = &x_h * s * &x_h;
    let (_, z_ih) = sym_sqrt_pair(&z);
    &x_h * z_ih * x_h
}

/// Largest step `α ∈ (0, 1]` keeping `X + α·ΔX` positive definite (with the
/// usual fraction-to-boundary damping).
fn max_step(x: &RMat, dx: &RMat) -> f64 {
    let n = x.nrows();
    if n == 1 {
        let xv = x[(0, 0)];
        let dv = dx[(0, 0)];
        if dv >= 0.0 {
            return 1.0;
        }
        return (STEP_FRACTION * (-xv / dv)).min(1.0);
    }
    // generalized eigenvalue bound via X^{-1/2} ΔX X^{-1/2}
    let (_, x_ih) = sym_sqrt_pair(x);
    let m = &x_ih * dx * x_ih;
    let evs = sym_eigvals(&m);
    let lam_min = evs.first().cloned().unwrap_or(0.0);
    if lam_min >= -1e-14 {
        1.0
    } else {
        (STEP_FRACTION * (-1.0 / lam_min)).min(1.0)
    }
}

struct BlockView {
    off: usize,
    n: usize,
    len: usize,
}

fn blocks_of(prog: &ConeProgram) -> Vec<BlockView> {
    let mut out = Vec::with_capacity(prog.sym_dims.len());
    let mut off = 0usize;
    for &n in &prog.sym_dims {
        let len = svec_len(n);
        out.push(BlockView { off, n, len });
        off += len;
    }
    out
}

pub(crate) fn ipm_solve(prog: &ConeProgram, opts: &IpmOpts) -> IpmOut {
    let m = prog.a.nrows();
    let nsv = prog.n_cone();
    let nf = prog.n_free;
    let n_tot = nsv + nf;
    let nu: usize = prog.sym_dims.iter().sum();
    let views = blocks_of(prog);

    assert_eq!(prog.a.ncols(), n_tot);

    // trivial cases
    if nsv == 0 {
        return solve_linear_only(prog, opts);
    }

    let b_norm = prog.b.amax().max(1.0);
    let c_norm = prog.c.amax().max(1.0);

    let init_p = b_norm.sqrt().max(1.0);
    let init_d = c_norm.sqrt().max(1.0);
    let mut x = RVec::zeros(n_tot);
    let mut s = RVec::zeros(nsv);
    for v in &views {
        let id = svec(&(RMat::identity(v.n, v.n)));
        x.rows_mut(v.off, v.len).copy_from(&(id.clone() * init_p));
        s.rows_mut(v.off, v.len).copy_from(&(id * init_d));
    }
    let mut y = RVec::zeros(m);

    let mut best: Option<IpmOut> = None;
    let mut small_step_count = 0usize;

    for iter in 0..opts.max_iter {
        // residuals
        let rp = &prog.b - &prog.a * &x;
        let mut s_full = RVec::zeros(n_tot);
        s_full.rows_mut(0, nsv).copy_from(&s);
        let rd = &prog.c - prog.a.transpose() * &y - &s_full;

        let x_cone = x.rows(0, nsv).into_owned();
        let gap_inner = x_cone.dot(&s);
        let mu = gap_inner / nu as f64;

        let obj_p = prog.c.dot(&x);
        let obj_d = prog.b.dot(&y);
        let rel_p = rp.norm() / (1.0 + prog.b.norm());
        let rel_d = rd.norm() / (1.0 + prog.c.norm());
        let rel_gap = (obj_p - obj_d).abs() / (1.0 + obj_p.abs().max(obj_d.abs()));

        let out_now = |term: IpmTermination| IpmOut {
            term,
            x: x.clone(),
            y: y.clone(),
            s: s.clone(),
            iters: iter,
            rel_primal: rel_p,
            rel_dual: rel_d,
            rel_gap,
            obj_primal: obj_p,
            obj_dual: obj_d,
        };

        if rel_p <= opts.tol_feas && rel_d <= opts.tol_feas && rel_gap <= opts.tol_gap {
            return out_now(IpmTermination::Converged);
        }
        if !mu.is_finite() || mu > 1e16 || rel_p > 1e12 {
            return best.unwrap_or_else(|| out_now(IpmTermination::Diverged));
        }
        match &mut best {
            Some(prev) => {
                if rel_p + rel_d + rel_gap < prev.rel_primal + prev.rel_dual + prev.rel_gap {
                    *prev = out_now(IpmTermination::MaxIter);
                }
            }
            None => best = Some(out_now(IpmTermination::MaxIter)),
        }

        // NT scalings and per-block H matrices
        let mut x_mats = Vec::with_capacity(views.len());
        let mut s_mats = Vec::with_capacity(views.len());
        let mut h_mats = Vec::with_capacity(views.len());
        for v in &views {
            let xm = smat(&x.rows(v.off, v.len).into_owned(), v.n);
            let sm = smat(&s.rows(v.off, v.len).into_owned(), v.n);
            let w = nt_scaling(&xm, &sm);
            // H = W ⊗_s W as a matrix on svec coordinates
            let mut h = RMat::zeros(v.len, v.len);
            for j in 0..v.len {
                let mut e = RVec::zeros(v.len);
                e[j] = 1.0;
                let bj = smat(&e, v.n);
                let col = svec(&(&w * bj * &w));
                h.set_column(j, &col);
            }
            x_mats.push(xm);
            s_mats.push(sm);
            h_mats.push(h);
        }

        // reduced KKT matrix
        let a_cone = prog.a.columns(0, nsv).into_owned();
        let a_free = if nf > 0 {
            prog.a.columns(nsv, nf).into_owned()
        } else {
            RMat::zeros(m, 0)
        };
        let mut g = RMat::zeros(m, m);
        for (v, h) in views.iter().zip(&h_mats) {
            let a_l = prog.a.columns(v.off, v.len).into_owned();
            g += &a_l * h * a_l.transpose();
        }
        let dim_k = m + nf;
        let mut kkt = RMat::zeros(dim_k, dim_k);
        kkt.view_mut((0, 0), (m, m)).copy_from(&g);
        if nf > 0 {
            kkt.view_mut((0, m), (m, nf)).copy_from(&a_free);
            kkt.view_mut((m, 0), (nf, m)).copy_from(&a_free.transpose());
        }
        for i in 0..m {
            kkt[(i, i)] += KKT_REG;
        }
        for i in m..dim_k {
            kkt[(i, i)] -= KKT_REG;
        }
        let lu = kkt.clone().lu();

        let h_apply = |vsub: &RVec| -> RVec {
            let mut out = RVec::zeros(nsv);
            for (v, h) in views.iter().zip(&h_mats) {
                let seg = vsub.rows(v.off, v.len).into_owned();
                out.rows_mut(v.off, v.len).copy_from(&(h * seg));
            }
            out
        };

        let rd_cone = rd.rows(0, nsv).into_owned();
        let rd_free = if nf > 0 {
            rd.rows(nsv, nf).into_owned()
        } else {
            RVec::zeros(0)
        };

        // Solves the Newton system for a given centrality rhs `rc`.
        let solve_dir = |rc: &RVec| -> (RVec, RVec, RVec, RVec) {
            let v = rc - h_apply(&rd_cone);
            let rhs_top = &rp - &a_cone * &v;
            let mut rhs = RVec::zeros(dim_k);
            rhs.rows_mut(0, m).copy_from(&rhs_top);
            if nf > 0 {
                rhs.rows_mut(m, nf).copy_from(&rd_free);
            }
            let mut sol = lu.solve(&rhs).unwrap_or_else(|| RVec::zeros(dim_k));
            // iterative refinement against the unregularized system
            for _ in 0..REFINE_ROUNDS {
                let dy = sol.rows(0, m).into_owned();
                let df = if nf > 0 {
                    sol.rows(m, nf).into_owned()
                } else {
                    RVec::zeros(0)
                };
                let mut resid = RVec::zeros(dim_k);
                let top = &rhs_top - (&g * &dy + &a_free * &df);
                resid.rows_mut(0, m).copy_from(&top);
                if nf > 0 {
                    let bot = &rd_free - a_free.transpose() * &dy;
                    resid.rows_mut(m, nf).copy_from(&bot);
                }
                if let Some(corr) = lu.solve(&resid) {
                    sol += corr;
                } else {
                    break;
                }
            }
            let dy = sol.rows(0, m).into_owned();
            let df = if nf > 0 {
                sol.rows(m, nf).into_owned()
            } else {
                RVec::zeros(0)
            };
            let ds = &rd_cone - a_cone.transpose() * &dy;
            let dx_cone = rc - h_apply(&ds);
            (dy, df, ds, dx_cone)
        };

        let step_for = |dx_cone: &RVec, ds: &RVec| -> (f64, f64) {
            let mut ap = 1.0f64;
            let mut ad = 1.0f64;
            for (v, (xm, sm)) in views.iter().zip(x_mats.iter().zip(&s_mats)) {
                let dxm = smat(&dx_cone.rows(v.off, v.len).into_owned(), v.n);
                let dsm = smat(&ds.rows(v.off, v.len).into_owned(), v.n);
                ap = ap.min(max_step(xm, &dxm));
                ad = ad.min(max_step(sm, &dsm));
            }
            (ap, ad)
        };

        // predictor (affine direction)
        let rc_aff = -x_cone.clone();
        let (_dy_a, _df_a, ds_a, dx_a) = solve_dir(&rc_aff);
        let (ap_a, ad_a) = step_for(&dx_a, &ds_a);
        let gap_aff = (&x_cone + dx_a.clone() * ap_a).dot(&(&s + ds_a.clone() * ad_a));
        let mu_aff = (gap_aff / nu as f64).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(1e-4, 0.9);

        // corrector with centering target σμ
        let mut rc = RVec::zeros(nsv);
        for (v, (xm, sm)) in views.iter().zip(x_mats.iter().zip(&s_mats)) {
            let (_, s_ih) = sym_sqrt_pair(sm);
            let s_inv = &s_ih * &s_ih;
            let target = s_inv * (sigma * mu) - xm;
            rc.rows_mut(v.off, v.len).copy_from(&svec(&target));
        }
        let (dy, df, ds, dx_cone) = solve_dir(&rc);
        let (ap, ad) = step_for(&dx_cone, &ds);

        if ap < 1e-10 && ad < 1e-10 {
            small_step_count += 1;
            if small_step_count >= 3 {
                let mut out = best.unwrap_or_else(|| out_now(IpmTermination::Stalled));
                out.term = IpmTermination::Stalled;
                return out;
            }
        } else {
            small_step_count = 0;
        }

        // update
        {
            let mut xc = x.rows(0, nsv).into_owned();
            xc += dx_cone * ap;
            x.rows_mut(0, nsv).copy_from(&xc);
        }
        if nf > 0 {
            let mut xf = x.rows(nsv, nf).into_owned();
            xf += df * ap;
            x.rows_mut(nsv, nf).copy_from(&xf);
        }
        y += dy * ad;
        s += ds * ad;
    }

    let mut out = best.expect("at least one iterate recorded");
    out.term = IpmTermination::MaxIter;
    out
}

/// Degenerate case with no cone blocks: plain linear algebra.
fn solve_linear_only(prog: &ConeProgram, _opts: &IpmOpts) -> IpmOut {
    let svd = prog.a.clone().svd(true, true);
    let x = svd
        .solve(&prog.b, 1e-12)
        .unwrap_or_else(|_| RVec::zeros(prog.n_total()));
    let rp = &prog.b - &prog.a * &x;
    // dual for cᵀx over the affine set: least squares Aᵀy ≈ c
    let svd_t = prog.a.transpose().svd(true, true);
    let y = svd_t
        .solve(&prog.c, 1e-12)
        .unwrap_or_else(|_| RVec::zeros(prog.a.nrows()));
    let rd = &prog.c - prog.a.transpose() * &y;
    let rel_p = rp.norm() / (1.0 + prog.b.norm());
    let rel_d = rd.norm() / (1.0 + prog.c.norm());
    let obj_p = prog.c.dot(&x);
    let obj_d = prog.b.dot(&y);
    let term = if rel_p <= 1e-9 && rel_d <= 1e-9 {
        IpmTermination::Converged
    } else {
        IpmTermination::Stalled
    };
    IpmOut {
        term,
        x,
        y,
        s: RVec::zeros(0),
        iters: 0,
        rel_primal: rel_p,
        rel_dual: rel_d,
        rel_gap: (obj_p - obj_d).abs() / (1.0 + obj_p.abs().max(obj_d.abs())),
        obj_primal: obj_p,
        obj_dual: obj_d,
    }
}
