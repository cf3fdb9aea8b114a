//! Self-contained solver for block-structured Hermitian semidefinite
//! feasibility and linear-objective minimization.
//!
//! Feasibility runs through a margin reformulation `max t s.t. A(Y + tI) = b,
//! Y ⪰ 0`: its optimum is the best attainable smallest eigenvalue over the
//! affine set, so a nonnegative optimum yields a maximum-margin feasible
//! point while a strictly negative one yields a Farkas certificate from the
//! dual. Objective problems run the interior-point core directly and fall
//! back to the margin phase (and to alternating projections) when it cannot
//! converge. Statuses are decided with hysteresis so tolerance tightening
//! can only move an answer to `Unknown`, never flip it.

mod dykstra;
mod problem;
mod solver;

pub use problem::{
    assemble_dual, BlockId, HermExpr, HermVar, SdpError, SdpObjective, SdpProblem, SdpRow,
};

use crate::linalg::{self, CMat, RVec};
use dykstra::{dykstra_feasible, DykstraOpts};
use problem::{affine_inconsistency, lower, margin_augment, unpack_herm_blocks, Lowered};
use solver::{ipm_solve, IpmOpts, IpmOut, IpmTermination};

/// Solver options. Defaults: primal residual `1e-8`, duality gap `1e-7`,
/// PSD slack `1e-8`.
#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    pub tol_primal: f64,
    pub tol_gap: f64,
    pub psd_tol: f64,
    pub max_iter: usize,
    /// Try alternating projections when the interior-point core stalls on a
    /// feasibility question.
    pub dykstra_fallback: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tol_primal: 1e-8,
            tol_gap: 1e-7,
            psd_tol: 1e-8,
            max_iter: 150,
            dykstra_fallback: true,
        }
    }
}

impl SdpOptions {
    /// The same options with every tolerance tightened by the given factor.
    pub fn tightened(&self, factor: f64) -> Self {
        SdpOptions {
            tol_primal: self.tol_primal / factor,
            tol_gap: self.tol_gap / factor,
            psd_tol: self.psd_tol / factor,
            max_iter: self.max_iter + 50,
            dykstra_fallback: self.dykstra_fallback,
        }
    }

    fn ipm(&self) -> IpmOpts {
        IpmOpts {
            tol_feas: (self.tol_primal * 0.1).max(1e-12),
            tol_gap: (self.tol_gap * 0.1).max(1e-12),
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
}

/// Primal assignment: one Hermitian matrix per declared block plus the free
/// scalars.
#[derive(Debug, Clone)]
pub struct SdpPrimal {
    pub blocks: Vec<CMat>,
    pub free: Vec<f64>,
}

/// Dual information of a converged solve: multipliers on the original rows
/// and the complex dual slack of every cone block.
#[derive(Debug, Clone)]
pub struct SdpDual {
    pub y: Vec<f64>,
    pub slacks: Vec<CMat>,
}

/// Farkas-style infeasibility certificate: `Z_l = Σ_r y_r C_{r,l} ⪰ 0`,
/// `Σ_r y_r w_r = 0` on the free coordinates, and `Σ_r y_r rhs_r = −margin`.
/// Any feasible point would give `0 ≤ Σ_l⟨Z_l, X_l⟩ = Σ_r y_r rhs_r < 0`.
#[derive(Debug, Clone)]
pub struct FarkasCertificate {
    pub y: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct CertificateCheck {
    /// Smallest eigenvalue over the assembled dual blocks.
    pub min_eig: f64,
    /// Largest free-coordinate violation.
    pub free_violation: f64,
    /// Recomputed `Σ_r y_r rhs_r` (should be ≤ −margin up to slack).
    pub value: f64,
    pub ok: bool,
}

impl FarkasCertificate {
    /// Re-verifies the certificate against the problem data from scratch.
    pub fn verify(&self, problem: &SdpProblem, tol: f64) -> CertificateCheck {
        let (blocks, free) = assemble_dual(problem, &self.y);
        let min_eig = blocks
            .iter()
            .map(|z| linalg::min_eig(&linalg::hermitian_part(z)))
            .fold(f64::INFINITY, f64::min);
        let free_violation = free.iter().cloned().map(f64::abs).fold(0.0, f64::max);
        let value: f64 = problem
            .rows
            .iter()
            .zip(&self.y)
            .map(|(r, &y)| r.rhs * y)
            .sum();
        let ok = min_eig >= -tol && free_violation <= tol && value <= -(self.margin - 1e-9);
        CertificateCheck {
            min_eig,
            free_violation,
            value,
            ok,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Achieved {
    pub rel_primal: f64,
    pub rel_dual: f64,
    pub rel_gap: f64,
    pub min_block_eig: f64,
}

/// Outcome of a solve; `status` is authoritative and the optional fields are
/// populated when meaningful.
#[derive(Debug, Clone)]
pub struct SdpResult {
    pub status: SdpStatus,
    pub primal: Option<SdpPrimal>,
    pub dual: Option<SdpDual>,
    pub certificate: Option<FarkasCertificate>,
    pub objective: Option<f64>,
    /// Best attainable smallest eigenvalue over the affine set (margin mode).
    pub margin: Option<f64>,
    pub achieved: Achieved,
    pub iters: usize,
}

impl SdpResult {
    fn unknown(reason_iters: usize) -> Self {
        SdpResult {
            status: SdpStatus::Unknown,
            primal: None,
            dual: None,
            certificate: None,
            objective: None,
            margin: None,
            achieved: Achieved::default(),
            iters: reason_iters,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.status, SdpStatus::Optimal | SdpStatus::Feasible)
    }
}

fn min_block_eig(blocks: &[CMat]) -> f64 {
    blocks
        .iter()
        .map(|b| linalg::min_eig(&linalg::hermitian_part(b)))
        .fold(f64::INFINITY, f64::min)
}

fn primal_from(problem: &SdpProblem, lowered: &Lowered, x: &RVec) -> SdpPrimal {
    let blocks = unpack_herm_blocks(problem, x);
    let n_cone = lowered.prog.n_cone();
    let free = (0..problem.n_free).map(|j| x[n_cone + j]).collect();
    SdpPrimal { blocks, free }
}

fn objective_value(problem: &SdpProblem, primal: &SdpPrimal) -> f64 {
    match &problem.objective {
        None => 0.0,
        Some(obj) => {
            let mut v = obj.constant;
            for (l, c) in &obj.cone {
                v += linalg::frob_inner(c, &primal.blocks[*l]).re;
            }
            for (j, w) in &obj.free {
                v += w * primal.free[*j];
            }
            v
        }
    }
}

impl SdpProblem {
    /// Margin-mode feasibility: returns a maximum-margin interior point or an
    /// infeasibility certificate.
    pub fn check_feasible(&self, opts: &SdpOptions) -> Result<SdpResult, SdpError> {
        self.validate()?;
        if let Some(y) = affine_inconsistency(self)? {
            return Ok(self.infeasible_from_cert(y));
        }
        let lowered = lower(self)?;
        if self.herm_blocks.is_empty() {
            // pure linear system, already consistent
            let out = ipm_solve(&lowered.prog, &opts.ipm());
            let primal = primal_from(self, &lowered, &out.x);
            return Ok(SdpResult {
                status: SdpStatus::Feasible,
                objective: Some(objective_value(self, &primal)),
                primal: Some(primal),
                dual: None,
                certificate: None,
                margin: None,
                achieved: Achieved {
                    rel_primal: out.rel_primal,
                    rel_dual: out.rel_dual,
                    rel_gap: out.rel_gap,
                    min_block_eig: 0.0,
                },
                iters: out.iters,
            });
        }

        let aug = margin_augment(&lowered);
        let out = ipm_solve(&aug.prog, &IpmOpts {
            max_iter: opts.max_iter,
            ..opts.ipm()
        });
        if out.term != IpmTermination::Converged {
            // boundary instances (margin exactly 0, strict complementarity
            // failing) stall just short of the tightened targets; a
            // near-feasible iterate with a small gap still pins the margin
            // well enough to answer on the feasible side
            let t = out.x[aug.prog.n_cone() + aug.t_index];
            if t.is_finite()
                && t >= -opts.psd_tol
                && out.rel_primal <= opts.tol_primal
                && out.rel_dual <= 1e-6
                && out.rel_gap <= 1e-6
            {
                return Ok(self.interpret_margin(&lowered, &aug.prog, &out, t, opts));
            }
            if opts.dykstra_fallback {
                if let Some(x) = dykstra_feasible(&lowered.prog, &DykstraOpts {
                    tol: opts.tol_primal,
                    max_iter: 20_000,
                }) {
                    let primal = primal_from(self, &lowered, &x);
                    let me = min_block_eig(&primal.blocks);
                    return Ok(SdpResult {
                        status: SdpStatus::Feasible,
                        objective: Some(objective_value(self, &primal)),
                        primal: Some(primal),
                        dual: None,
                        certificate: None,
                        margin: Some(me),
                        achieved: Achieved {
                            rel_primal: opts.tol_primal,
                            rel_dual: f64::NAN,
                            rel_gap: f64::NAN,
                            min_block_eig: me,
                        },
                        iters: out.iters,
                    });
                }
            }
            return Ok(SdpResult::unknown(out.iters));
        }

        let t = out.x[aug.prog.n_cone() + aug.t_index];
        Ok(self.interpret_margin(&lowered, &aug.prog, &out, t, opts))
    }

    fn interpret_margin(
        &self,
        lowered: &Lowered,
        aug_prog: &solver::ConeProgram,
        out: &IpmOut,
        t: f64,
        opts: &SdpOptions,
    ) -> SdpResult {
        let achieved = Achieved {
            rel_primal: out.rel_primal,
            rel_dual: out.rel_dual,
            rel_gap: out.rel_gap,
            min_block_eig: t,
        };
        if t >= -opts.psd_tol {
            // shift the cone part by t to recover the original primal point
            let mut x = RVec::zeros(lowered.prog.n_total());
            let base_cone = lowered.prog.n_cone();
            for j in 0..base_cone {
                x[j] = out.x[j];
            }
            for j in 0..lowered.prog.n_free {
                x[base_cone + j] = out.x[aug_prog.n_cone() + j];
            }
            let shift = lowered.prog.cone_identity() * t;
            x += shift;
            let primal = primal_from(self, lowered, &x);
            let me = min_block_eig(&primal.blocks);
            return SdpResult {
                status: SdpStatus::Feasible,
                objective: Some(objective_value(self, &primal)),
                primal: Some(primal),
                dual: None,
                certificate: None,
                margin: Some(t),
                achieved: Achieved {
                    min_block_eig: me,
                    ..achieved
                },
                iters: out.iters,
            };
        }
        if t <= -100.0 * opts.psd_tol {
            // Farkas certificate from the margin dual (flip sign, drop the
            // cap row, restore row scaling, renormalize the trace pairing).
            let m_kept = lowered.kept.len();
            let y_kept: RVec = RVec::from_iterator(m_kept, (0..m_kept).map(|r| -out.y[r]));
            let mut y = lowered.unscale_duals(&y_kept);
            let (blocks, _) = assemble_dual(self, &y);
            let trace_sum: f64 = blocks.iter().map(|z| linalg::trace(z).re).sum();
            if trace_sum.abs() > 1e-12 {
                for v in &mut y {
                    *v /= trace_sum;
                }
            }
            let value: f64 = self.rows.iter().zip(&y).map(|(r, &yv)| r.rhs * yv).sum();
            let cert = FarkasCertificate {
                y,
                margin: -value,
            };
            let check = cert.verify(self, 10.0 * opts.psd_tol);
            if check.ok && value < 0.0 {
                return SdpResult {
                    status: SdpStatus::Infeasible,
                    primal: None,
                    dual: None,
                    certificate: Some(cert),
                    objective: None,
                    margin: Some(t),
                    achieved,
                    iters: out.iters,
                };
            }
            // certificate failed to re-verify: stay honest
            return SdpResult {
                status: SdpStatus::Unknown,
                primal: None,
                dual: None,
                certificate: None,
                objective: None,
                margin: Some(t),
                achieved,
                iters: out.iters,
            };
        }
        SdpResult {
            status: SdpStatus::Unknown,
            primal: None,
            dual: None,
            certificate: None,
            objective: None,
            margin: Some(t),
            achieved,
            iters: out.iters,
        }
    }

    fn infeasible_from_cert(&self, y: Vec<f64>) -> SdpResult {
        let value: f64 = self.rows.iter().zip(&y).map(|(r, &yv)| r.rhs * yv).sum();
        let cert = FarkasCertificate { y, margin: -value };
        SdpResult {
            status: SdpStatus::Infeasible,
            primal: None,
            dual: None,
            certificate: Some(cert),
            objective: None,
            margin: None,
            achieved: Achieved::default(),
            iters: 0,
        }
    }

    /// Full solve: minimizes the declared objective (or decides feasibility
    /// when there is none). Never reports a wrong status: exhaustion yields
    /// `Unknown`.
    pub fn solve(&self, opts: &SdpOptions) -> Result<SdpResult, SdpError> {
        self.validate()?;
        if self.objective.is_none() {
            return self.check_feasible(opts);
        }
        if let Some(y) = affine_inconsistency(self)? {
            return Ok(self.infeasible_from_cert(y));
        }
        let lowered = lower(self)?;
        let out = ipm_solve(&lowered.prog, &opts.ipm());
        if out.term == IpmTermination::Converged {
            let primal = primal_from(self, &lowered, &out.x);
            let me = min_block_eig(&primal.blocks);
            let m_kept = lowered.kept.len();
            let y_kept: RVec = RVec::from_iterator(m_kept, (0..m_kept).map(|r| out.y[r]));
            let y = lowered.unscale_duals(&y_kept);
            let slacks = {
                let mut off = 0usize;
                let mut v = Vec::with_capacity(self.herm_blocks.len());
                for &n in &self.herm_blocks {
                    let d = 2 * n;
                    let len = linalg::svec_len(d);
                    let s = linalg::smat(&out.s.rows(off, len).into_owned(), d);
                    v.push(linalg::unembed_sym(&s));
                    off += len;
                }
                v
            };
            return Ok(SdpResult {
                status: SdpStatus::Optimal,
                objective: Some(objective_value(self, &primal)),
                primal: Some(primal),
                dual: Some(SdpDual { y, slacks }),
                certificate: None,
                margin: None,
                achieved: Achieved {
                    rel_primal: out.rel_primal,
                    rel_dual: out.rel_dual,
                    rel_gap: out.rel_gap,
                    min_block_eig: me,
                },
                iters: out.iters,
            });
        }
        // degenerate optima stall short of the tight targets; a near-converged
        // iterate is still a feasible point whose objective error is bounded
        // by the (small) reported gap
        if out.rel_primal <= 10.0 * opts.tol_primal
            && out.rel_dual <= 1e-6
            && out.rel_gap <= 1e-6
        {
            let primal = primal_from(self, &lowered, &out.x);
            let me = min_block_eig(&primal.blocks);
            return Ok(SdpResult {
                status: SdpStatus::Feasible,
                objective: Some(objective_value(self, &primal)),
                primal: Some(primal),
                dual: None,
                certificate: None,
                margin: None,
                achieved: Achieved {
                    rel_primal: out.rel_primal,
                    rel_dual: out.rel_dual,
                    rel_gap: out.rel_gap,
                    min_block_eig: me,
                },
                iters: out.iters,
            });
        }
        // otherwise consult the margin phase for a status
        let feas = self.check_feasible(opts)?;
        match feas.status {
            SdpStatus::Infeasible => Ok(feas),
            SdpStatus::Feasible => {
                let mut r = feas;
                r.status = SdpStatus::Feasible;
                Ok(r)
            }
            _ => Ok(SdpResult::unknown(out.iters)),
        }
    }
}
