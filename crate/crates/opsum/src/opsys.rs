//! The operator system structures on `A ⊕₁ B`: cone membership in the
//! tensor-product and coproduct structures, compatible and jointly-extendable
//! pairs of states, monogamy witnesses, and the induced norms.
//!
//! An element is a gauge class of pairs `(a, b)` with `a ∈ M_k(A)`,
//! `b ∈ M_k(B)`; shifting a scalar matrix between the two components leaves
//! every predicate and norm here unchanged.
//!
//! Membership tests:
//! - tensor structure: `a⊗1 + 1⊗b ⪰ 0` inside `M_k(A⊗B)`, a blockwise
//!   eigenvalue test (finite-dimensional algebras carry a unique C*-tensor
//!   norm, so this single test covers the minimal and maximal structures);
//! - coproduct structure: existence of a scalar shift `λ ∈ M_k` with
//!   `a − λ⊗1 ⪰ 0` and `b + λ⊗1 ⪰ 0`, decided by a margin SDP
//!   `max t s.t. a − λ⊗1 ⪰ t, b + λ⊗1 ⪰ t` whose dual optimum is half the
//!   worst value `α(a) + β(b)` over compatible pairs, so a negative answer
//!   comes with its own witness pair.

use crate::algebra::{
    embed_left, embed_right, embed_sum, AlgElement, AlgebraError, FdAlgebra, Grading,
};
use crate::linalg::{self, herm_basis, herm_coords, herm_dim, CMat};
use crate::sample;
use crate::sdp::{
    assemble_dual, HermExpr, SdpError, SdpOptions, SdpProblem, SdpStatus,
};
use crate::states::{bell_level2_state, State, StateError};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpsysError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("solver could not decide: {0}")]
    Indeterminate(String),
    #[error("separation failed: optimal value {objective:.3e} is not negative")]
    SeparationFailed { objective: f64 },
    #[error("a noncommutative block of size >= 2 is required: {0}")]
    NoncommutativityRequired(String),
}

/// Positivity tolerance for the spectral (tensor-structure) test.
pub const MIN_POS_TOL: f64 = 1e-8;
/// Margin below which an element counts as strictly non-positive; keeps
/// open-condition claims clear of solver tolerance.
pub const STRICT_NEG_MARGIN: f64 = 1e-3;

/// Solver options for the membership and norm SDPs: tighter than the solver
/// defaults so that margins and norms carry ~1e-9 absolute accuracy (gauge
/// invariance and grading symmetry are asserted at 1e-8).
fn opsys_sdp_options() -> SdpOptions {
    SdpOptions {
        tol_primal: 1e-9,
        tol_gap: 1e-9,
        psd_tol: 1e-8,
        max_iter: 300,
        dykstra_fallback: true,
    }
}

/// A gauge-classed pair `(a, b)` representing `a + b ∈ M_k(A ⊕₁ B)`.
#[derive(Debug, Clone)]
pub struct SumElement {
    a: AlgElement,
    b: AlgElement,
}

impl SumElement {
    pub fn new(a: AlgElement, b: AlgElement) -> Result<Self, OpsysError> {
        if a.level() != b.level() {
            return Err(OpsysError::InvalidArgument(format!(
                "components must share a level: {} vs {}",
                a.level(),
                b.level()
            )));
        }
        Ok(SumElement { a, b })
    }

    pub fn a(&self) -> &AlgElement {
        &self.a
    }

    pub fn b(&self) -> &AlgElement {
        &self.b
    }

    pub fn level(&self) -> usize {
        self.a.level()
    }

    pub fn adjoint(&self) -> Self {
        SumElement {
            a: self.a.adjoint(),
            b: self.b.adjoint(),
        }
    }

    /// `(−a, b)`, used by the grading symmetry checks.
    pub fn flip_a(&self) -> Self {
        SumElement {
            a: self.a.neg(),
            b: self.b.clone(),
        }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.a.is_self_adjoint(tol) && self.b.is_self_adjoint(tol)
    }
}

/// Moves a scalar-level matrix between the components:
/// `(a, b) ↦ (a + μ⊗1_A, b − μ⊗1_B)`. Every predicate and norm below is
/// invariant under this.
pub fn gauge_shift(x: &SumElement, mu: &CMat) -> Result<SumElement, OpsysError> {
    let k = x.level();
    if mu.nrows() != k || mu.ncols() != k {
        return Err(OpsysError::InvalidArgument(format!(
            "gauge matrix must be {k}x{k}"
        )));
    }
    let shift = |elem: &AlgElement, sign: f64| -> AlgElement {
        let blocks = elem
            .blocks()
            .iter()
            .zip(elem.algebra().block_sizes())
            .map(|(blk, &n)| blk + linalg::kron(mu, &linalg::identity(n)).map(|z| z * sign))
            .collect();
        AlgElement::from_blocks(elem.algebra(), k, blocks).expect("shapes unchanged")
    };
    Ok(SumElement {
        a: shift(&x.a, 1.0),
        b: shift(&x.b, -1.0),
    })
}

/// Compression by a scalar `k×l` matrix: `(γ*aγ, γ*bγ)` at level `l`.
pub fn compress(x: &SumElement, gamma: &CMat) -> Result<SumElement, OpsysError> {
    let k = x.level();
    if gamma.nrows() != k {
        return Err(OpsysError::InvalidArgument(format!(
            "compression must have {k} rows"
        )));
    }
    let l = gamma.ncols();
    let comp = |elem: &AlgElement| -> AlgElement {
        let blocks = elem
            .blocks()
            .iter()
            .zip(elem.algebra().block_sizes())
            .map(|(blk, &n)| {
                let lift = linalg::kron(gamma, &linalg::identity(n));
                lift.adjoint() * blk * lift
            })
            .collect();
        AlgElement::from_blocks(elem.algebra(), l, blocks).expect("compressed shapes")
    };
    Ok(SumElement {
        a: comp(&x.a),
        b: comp(&x.b),
    })
}

/// Positivity of `a⊗1 + 1⊗b` in `M_k(A⊗B)` by blockwise eigenvalues.
pub fn is_positive_min(x: &SumElement) -> Result<bool, OpsysError> {
    is_positive_min_tol(x, MIN_POS_TOL)
}

pub fn is_positive_min_tol(x: &SumElement, tol: f64) -> Result<bool, OpsysError> {
    if !x.is_self_adjoint(tol.max(1e-9)) {
        return Err(OpsysError::InvalidArgument(
            "tensor-structure positivity needs self-adjoint components".into(),
        ));
    }
    let s = embed_sum(&x.a, &x.b)?;
    Ok(crate::algebra::is_positive_alg(&s.hermitian_part(), tol)?)
}

/// Smallest eigenvalue of the embedded sum (the tensor-structure margin).
pub fn min_structure_margin(x: &SumElement) -> Result<f64, OpsysError> {
    let s = embed_sum(&x.a, &x.b)?;
    Ok(s.hermitian_part().min_eig())
}

/// A pair of states on `M_k(A)`, `M_k(B)` with (near-)equal level marginals.
#[derive(Debug, Clone)]
pub struct CompatiblePair {
    pub alpha: State,
    pub beta: State,
    pub marginal_gap: f64,
}

impl CompatiblePair {
    pub fn new(alpha: State, beta: State) -> Result<Self, OpsysError> {
        if alpha.level() != beta.level() {
            return Err(OpsysError::InvalidArgument(
                "pair must share the ancilla level".into(),
            ));
        }
        let gap = linalg::trace_norm(&(alpha.level_marginal() - beta.level_marginal()));
        Ok(CompatiblePair {
            alpha,
            beta,
            marginal_gap: gap,
        })
    }

    /// Compatible iff the level marginals agree within `tol`. At level 1 the
    /// marginals are both the scalar 1, so every pair is compatible.
    pub fn is_compatible(&self, tol: f64) -> bool {
        self.marginal_gap <= tol
    }

    /// `α(a) + β(b)`, the pairing against a sum element.
    pub fn value(&self, x: &SumElement) -> Result<f64, OpsysError> {
        let va = self.alpha.expectation(x.a())?;
        let vb = self.beta.expectation(x.b())?;
        Ok(va.re + vb.re)
    }
}

/// Forces exact marginal equality by transporting β's level marginal onto
/// α's with the explicit coupling `μ_α^{1/2} μ_β^{-1/2}` (pseudo-inverse on a
/// singular marginal), then renormalizing.
pub fn exactify_pair(alpha: &State, beta: &State) -> Result<CompatiblePair, OpsysError> {
    let mu_a = alpha.level_marginal();
    let mu_b = beta.level_marginal();
    let x = sample::herm_sqrt(&mu_a) * sample::herm_pinv_sqrt(&mu_b);
    let factors = beta.factors().to_vec();
    let blocks: Vec<CMat> = beta
        .blocks()
        .iter()
        .map(|blk| {
            let alg_dim = blk.nrows() / beta.level();
            let lift = linalg::kron(&x, &linalg::identity(alg_dim));
            linalg::hermitian_part(&(&lift * blk * lift.adjoint()))
        })
        .collect();
    let total: f64 = blocks.iter().map(|b| linalg::trace(b).re).sum();
    let blocks: Vec<CMat> = blocks.into_iter().map(|b| b.scale(1.0 / total)).collect();
    let beta2 = State::from_solver_blocks(&factors, beta.level(), blocks)?;
    CompatiblePair::new(alpha.clone(), beta2)
}

/// Result of the coproduct-structure membership test.
#[derive(Debug, Clone)]
pub struct CoproductCheck {
    pub positive: bool,
    /// Best uniform slack `t*`: the largest `t` with `a − λ⊗1 ⪰ t` and
    /// `b + λ⊗1 ⪰ t` for some scalar `λ`. Equals half the worst compatible
    /// pair value.
    pub margin: f64,
    /// A feasible scalar shift when positive.
    pub lambda: Option<CMat>,
    /// A compatible pair with `α(a) + β(b) ≈ 2·margin` when negative.
    pub witness: Option<CompatiblePair>,
}

struct CoproductSdp {
    problem: SdpProblem,
    lambda: crate::sdp::HermVar,
    a_slacks: Vec<usize>,
    b_slacks: Vec<usize>,
}

fn coproduct_margin_problem(x: &SumElement) -> CoproductSdp {
    let k = x.level();
    let mut p = SdpProblem::new();
    let lam = p.free_herm(k);
    let lam_expr = HermExpr::var(lam);
    let mut a_slacks = Vec::new();
    let mut b_slacks = Vec::new();
    for (blk, &n) in x.a().blocks().iter().zip(x.a().algebra().block_sizes()) {
        let lifted = lam_expr.map(|c| linalg::kron(c, &linalg::identity(n)));
        let expr = HermExpr::constant(linalg::hermitian_part(blk)).sub(&lifted);
        a_slacks.push(p.psd_constraint(&expr).0);
    }
    for (blk, &m) in x.b().blocks().iter().zip(x.b().algebra().block_sizes()) {
        let lifted = lam_expr.map(|c| linalg::kron(c, &linalg::identity(m)));
        let expr = HermExpr::constant(linalg::hermitian_part(blk)).add(&lifted);
        b_slacks.push(p.psd_constraint(&expr).0);
    }
    CoproductSdp {
        problem: p,
        lambda: lam,
        a_slacks,
        b_slacks,
    }
}

/// Coproduct-structure positivity via the scalar-shift characterization.
///
/// `tol` is the decision band on the margin: the element counts positive when
/// the best uniform slack is at least `−tol`. A strictly negative answer
/// (margin below `−tol`) carries a compatible-pair witness extracted from
/// the dual.
pub fn is_positive_coproduct(x: &SumElement, tol: f64) -> Result<CoproductCheck, OpsysError> {
    if !x.is_self_adjoint(tol.max(1e-9)) {
        return Err(OpsysError::InvalidArgument(
            "coproduct positivity needs self-adjoint components".into(),
        ));
    }
    let built = coproduct_margin_problem(x);
    let opts = opsys_sdp_options();
    let res = built.problem.check_feasible(&opts)?;
    // `Infeasible` here means no scalar shift exists: the element is
    // coproduct-negative, with the witness pair encoded in the certificate.
    let margin = match res.margin {
        Some(t) if t.is_finite() => t,
        _ => {
            return Err(OpsysError::Indeterminate(
                "coproduct membership undecided: solver returned no margin".into(),
            ))
        }
    };
    let lambda = res.primal.as_ref().map(|primal| {
        let k = x.level();
        let coords = linalg::RVec::from_iterator(
            herm_dim(k),
            (0..herm_dim(k)).map(|p| primal.free[built.lambda.start + p]),
        );
        linalg::herm_from_coords(&coords, k)
    });
    let witness = match (&res.status, &res.certificate) {
        (SdpStatus::Infeasible, Some(cert)) => {
            Some(coproduct_witness_pair(x, &built, &cert.y)?)
        }
        _ => None,
    };
    Ok(CoproductCheck {
        positive: margin >= -tol,
        margin,
        lambda,
        witness,
    })
}

/// Dual extraction: the compatible pair attaining (half) the negative margin.
fn coproduct_witness_pair(
    x: &SumElement,
    built: &CoproductSdp,
    cert_y: &[f64],
) -> Result<CompatiblePair, OpsysError> {
    let (dual_blocks, _) = assemble_dual(&built.problem, cert_y);
    let k = x.level();
    let collect = |slacks: &[usize], alg: &FdAlgebra| -> Result<State, OpsysError> {
        let blocks: Vec<CMat> = slacks.iter().map(|&l| dual_blocks[l].clone()).collect();
        let total: f64 = blocks.iter().map(|b| linalg::trace(b).re).sum();
        if total <= 1e-14 {
            return Err(OpsysError::Indeterminate(
                "degenerate dual: zero trace on one side".into(),
            ));
        }
        let blocks: Vec<CMat> = blocks.into_iter().map(|b| b.scale(1.0 / total)).collect();
        Ok(State::from_solver_blocks(
            std::slice::from_ref(alg),
            k,
            blocks,
        )?)
    };
    let alpha = collect(&built.a_slacks, x.a().algebra())?;
    let beta = collect(&built.b_slacks, x.b().algebra())?;
    exactify_pair(&alpha, &beta)
}

/// Witness of `WitnessedPair::value ≈ 2·margin < 0` for a coproduct-negative
/// element.
#[derive(Debug, Clone)]
pub struct WitnessedPair {
    pub pair: CompatiblePair,
    /// `α(a) + β(b)`, re-evaluated directly from the densities.
    pub value: f64,
}

/// For an element that failed [`is_positive_coproduct`] with margin, returns
/// a compatible pair on which the element is strictly negative.
pub fn compatible_witness(x: &SumElement) -> Result<WitnessedPair, OpsysError> {
    let built = coproduct_margin_problem(x);
    let opts = opsys_sdp_options();
    let res = built.problem.check_feasible(&opts)?;
    let margin = res.margin.unwrap_or(f64::NAN);
    if res.status != SdpStatus::Infeasible {
        return Err(OpsysError::Precondition(format!(
            "element is not strictly coproduct-negative (margin {margin:.3e})"
        )));
    }
    let cert = res.certificate.as_ref().ok_or_else(|| {
        OpsysError::Indeterminate("negative margin but no certificate returned".into())
    })?;
    let pair = coproduct_witness_pair(x, &built, &cert.y)?;
    let value = pair.value(x)?;
    if value >= 0.0 {
        return Err(OpsysError::Indeterminate(format!(
            "extracted pair fails to witness negativity (value {value:.3e})"
        )));
    }
    Ok(WitnessedPair { pair, value })
}

/// Certificate that a compatible pair admits no joint state: an observable
/// `Z₁ ∈ M_k(A)`, `Z₂ ∈ M_k(B)` whose lift `Z₁⊗1 + 1-lift(Z₂)` is PSD on
/// `M_k(A⊗B)` while `α(Z₁) + β(Z₂) = −violation < 0`.
#[derive(Debug, Clone)]
pub struct MarginalCertificate {
    pub z_alpha: AlgElement,
    pub z_beta: AlgElement,
    pub violation: f64,
}

#[derive(Debug, Clone)]
pub struct MarginalCertificateCheck {
    pub joint_min_eig: f64,
    pub recomputed_violation: f64,
    pub ok: bool,
}

impl MarginalCertificate {
    /// Recomputes everything from scratch: lifts the observables, checks
    /// joint positivity, and re-evaluates the violation on the pair.
    pub fn verify(
        &self,
        alpha: &State,
        beta: &State,
        tol: f64,
    ) -> Result<MarginalCertificateCheck, OpsysError> {
        let joint = embed_left(&self.z_alpha, self.z_beta.algebra())
            .add(&embed_right(&self.z_beta, self.z_alpha.algebra()))?;
        let joint_min_eig = joint.hermitian_part().min_eig();
        let va = alpha.expectation(&self.z_alpha)?.re;
        let vb = beta.expectation(&self.z_beta)?.re;
        let recomputed = -(va + vb);
        let ok = joint_min_eig >= -tol && recomputed >= self.violation - 1e-9;
        Ok(MarginalCertificateCheck {
            joint_min_eig,
            recomputed_violation: recomputed,
            ok,
        })
    }
}

/// Answer of the quantum marginal problem for a pair.
#[derive(Debug, Clone)]
pub enum TensorCompat {
    /// A joint state on `M_k(A⊗B)` with the prescribed marginals.
    Yes(State),
    No(MarginalCertificate),
    Unknown,
}

struct MarginalRows {
    problem: SdpProblem,
    /// (A-block index, coordinate) per row, in row order after the γ blocks.
    a_rows: Vec<(usize, usize)>,
    b_rows: Vec<(usize, usize)>,
}

fn marginal_problem(alpha: &State, beta: &State) -> Result<MarginalRows, OpsysError> {
    let k = alpha.level();
    let a_alg = &alpha.factors()[0];
    let b_alg = &beta.factors()[0];
    let na = a_alg.num_blocks();
    let nb = b_alg.num_blocks();
    let mut p = SdpProblem::new();
    // γ blocks, lexicographic (i, j)
    let mut gamma = vec![vec![0usize; nb]; na];
    for (i, &n) in a_alg.block_sizes().iter().enumerate() {
        for (j, &m) in b_alg.block_sizes().iter().enumerate() {
            gamma[i][j] = p.psd_block(k * n * m).0;
        }
    }
    let mut a_rows = Vec::new();
    for (i, &n) in a_alg.block_sizes().iter().enumerate() {
        let target = herm_coords(&linalg::hermitian_part(&alpha.blocks()[i]));
        for q in 0..herm_dim(k * n) {
            let hq = herm_basis(k * n, q);
            let cone: Vec<(usize, CMat)> = b_alg
                .block_sizes()
                .iter()
                .enumerate()
                .map(|(j, &m)| (gamma[i][j], linalg::kron(&hq, &linalg::identity(m))))
                .collect();
            a_rows.push((i, q));
            p.add_row(cone, Vec::new(), target[q]);
        }
    }
    let mut b_rows = Vec::new();
    for (j, &m) in b_alg.block_sizes().iter().enumerate() {
        let target = herm_coords(&linalg::hermitian_part(&beta.blocks()[j]));
        for q in 0..herm_dim(k * m) {
            let hq = herm_basis(k * m, q);
            let cone: Vec<(usize, CMat)> = a_alg
                .block_sizes()
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    (
                        gamma[i][j],
                        linalg::insert_identity_slot(&hq, &[k, m], 1, n),
                    )
                })
                .collect();
            b_rows.push((j, q));
            p.add_row(cone, Vec::new(), target[q]);
        }
    }
    Ok(MarginalRows {
        problem: p,
        a_rows,
        b_rows,
    })
}

/// Decides whether `(α, β)` extend to a joint state on `M_k(A⊗B)`.
///
/// A marginal gap beyond `tol` is answered `No` immediately with the exact
/// projector certificate on the level ancilla; otherwise the joint-state
/// feasibility SDP decides, returning either the joint state or the dual
/// observable certificate.
pub fn is_tensor_compatible(
    alpha: &State,
    beta: &State,
    tol: f64,
) -> Result<TensorCompat, OpsysError> {
    if alpha.factors().len() != 1 || beta.factors().len() != 1 {
        return Err(OpsysError::InvalidArgument(
            "marginal problem expects single-algebra states (level-k over A and B)".into(),
        ));
    }
    if alpha.level() != beta.level() {
        return Err(OpsysError::InvalidArgument(
            "states must share the ancilla level".into(),
        ));
    }
    let k = alpha.level();
    let a_alg = alpha.factors()[0].clone();
    let b_alg = beta.factors()[0].clone();

    let d = alpha.level_marginal() - beta.level_marginal();
    let gap = linalg::trace_norm(&d);
    if gap > tol {
        // exact level-ancilla certificate: ±(P⊗1) for the positive-part
        // projector P of the marginal difference
        let (evs, vecs) = linalg::herm_eig(&d);
        let mut proj = CMat::zeros(k, k);
        let mut violation = 0.0;
        for (idx, &ev) in evs.iter().enumerate() {
            if ev > 0.0 {
                let v = vecs.column(idx);
                for r in 0..k {
                    for c in 0..k {
                        proj[(r, c)] += v[r] * v[c].conj();
                    }
                }
                violation += ev;
            }
        }
        let z_alpha = AlgElement::from_blocks(
            &a_alg,
            k,
            a_alg
                .block_sizes()
                .iter()
                .map(|&n| linalg::kron(&proj, &linalg::identity(n)).map(|z| -z))
                .collect(),
        )?;
        let z_beta = AlgElement::from_blocks(
            &b_alg,
            k,
            b_alg
                .block_sizes()
                .iter()
                .map(|&m| linalg::kron(&proj, &linalg::identity(m)))
                .collect(),
        )?;
        return Ok(TensorCompat::No(MarginalCertificate {
            z_alpha,
            z_beta,
            violation,
        }));
    }

    let built = marginal_problem(alpha, beta)?;
    let opts = opsys_sdp_options();
    let res = built.problem.check_feasible(&opts)?;
    match res.status {
        SdpStatus::Feasible | SdpStatus::Optimal => {
            let primal = res.primal.as_ref().expect("feasible point");
            let gamma = State::from_solver_blocks(
                &[a_alg, b_alg],
                k,
                primal.blocks.clone(),
            )?;
            Ok(TensorCompat::Yes(gamma))
        }
        SdpStatus::Infeasible => {
            let cert = res
                .certificate
                .as_ref()
                .ok_or_else(|| OpsysError::Indeterminate("missing certificate".into()))?;
            // reassemble the marginal observables from the marginal-row duals
            let mut za_blocks: Vec<CMat> = a_alg
                .block_sizes()
                .iter()
                .map(|&n| CMat::zeros(k * n, k * n))
                .collect();
            let mut zb_blocks: Vec<CMat> = b_alg
                .block_sizes()
                .iter()
                .map(|&m| CMat::zeros(k * m, k * m))
                .collect();
            let na_rows = built.a_rows.len();
            for (r, &(i, q)) in built.a_rows.iter().enumerate() {
                let y = cert.y[r];
                if y != 0.0 {
                    let n = a_alg.block_sizes()[i];
                    za_blocks[i] += herm_basis(k * n, q).map(|z| z * y);
                }
            }
            for (r, &(j, q)) in built.b_rows.iter().enumerate() {
                let y = cert.y[na_rows + r];
                if y != 0.0 {
                    let m = b_alg.block_sizes()[j];
                    zb_blocks[j] += herm_basis(k * m, q).map(|z| z * y);
                }
            }
            let z_alpha = AlgElement::from_blocks(&a_alg, k, za_blocks)?;
            let z_beta = AlgElement::from_blocks(&b_alg, k, zb_blocks)?;
            let va = alpha.expectation(&z_alpha)?.re;
            let vb = beta.expectation(&z_beta)?.re;
            Ok(TensorCompat::No(MarginalCertificate {
                z_alpha,
                z_beta,
                violation: -(va + vb),
            }))
        }
        SdpStatus::Unknown => Ok(TensorCompat::Unknown),
    }
}

/// A compatible-but-not-jointly-extendable pair with all its certificates.
#[derive(Debug, Clone)]
pub struct MonogamyWitness {
    pub alpha: State,
    pub beta: State,
    pub marginal_gap: f64,
    pub certificate: MarginalCertificate,
    pub separating: SumElement,
    /// `α(a) + β(b)` on the separating element (strictly negative).
    pub value: f64,
    /// Margin reported by the coproduct test on the separating element.
    pub coproduct_margin: f64,
    /// Compatible pair witnessing coproduct negativity of the separating
    /// element, with its directly evaluated pairing value.
    pub witness_pair: CompatiblePair,
    pub pair_value: f64,
}

/// Constructs the canonical monogamy instance on two noncommutative
/// algebras: an entangled level-2 state on `A` and a pure level-2 state on
/// `B`, both with normalized-trace ancilla marginal, hence compatible but
/// admitting no joint state; then extracts a separating element that is
/// positive in the tensor structure yet negative on the pair.
pub fn monogamy_witness(
    a_alg: &FdAlgebra,
    b_alg: &FdAlgebra,
) -> Result<MonogamyWitness, OpsysError> {
    let pick_block = |alg: &FdAlgebra| -> Result<usize, OpsysError> {
        alg.block_sizes()
            .iter()
            .position(|&n| n >= 2)
            .ok_or_else(|| OpsysError::NoncommutativityRequired(alg.label().to_string()))
    };
    let blk_a = pick_block(a_alg)?;
    let blk_b = pick_block(b_alg)?;
    let alpha = bell_level2_state(a_alg, blk_a)?;
    let beta = bell_level2_state(b_alg, blk_b)?;
    let marginal_gap =
        linalg::trace_norm(&(alpha.level_marginal() - beta.level_marginal()));

    let certificate = match is_tensor_compatible(&alpha, &beta, 1e-8)? {
        TensorCompat::No(cert) => cert,
        TensorCompat::Yes(_) => {
            return Err(OpsysError::Indeterminate(
                "expected marginal infeasibility but a joint state was found".into(),
            ))
        }
        TensorCompat::Unknown => {
            return Err(OpsysError::Indeterminate(
                "marginal problem undecided".into(),
            ))
        }
    };

    let separation = separating_element(&alpha, &beta, 1.0)?;
    let coprod = is_positive_coproduct(&separation.element, MIN_POS_TOL)?;
    let witness_pair = coprod.witness.clone().ok_or_else(|| {
        OpsysError::Indeterminate("separating element lacks a coproduct witness pair".into())
    })?;
    let pair_value = witness_pair.value(&separation.element)?;
    Ok(MonogamyWitness {
        alpha,
        beta,
        marginal_gap,
        certificate,
        value: separation.objective,
        separating: separation.element,
        coproduct_margin: coprod.margin,
        witness_pair,
        pair_value,
    })
}

/// Result of [`separating_element`].
#[derive(Debug, Clone)]
pub struct Separation {
    pub element: SumElement,
    /// Optimal `α(a) + β(b)` (strictly negative on success).
    pub objective: f64,
}

/// Minimizes `α(a) + β(b)` over norm-bounded self-adjoint pairs with
/// `a⊗1 + 1⊗b ⪰ 0`. For a pair with no joint state the optimum is strictly
/// negative, producing an element positive in the tensor structure but not
/// in the coproduct structure.
pub fn separating_element(
    alpha: &State,
    beta: &State,
    bound: f64,
) -> Result<Separation, OpsysError> {
    if bound <= 0.0 {
        return Err(OpsysError::InvalidArgument("bound must be positive".into()));
    }
    let k = alpha.level();
    if beta.level() != k {
        return Err(OpsysError::InvalidArgument(
            "states must share the ancilla level".into(),
        ));
    }
    let a_alg = alpha.factors()[0].clone();
    let b_alg = beta.factors()[0].clone();
    let mut p = SdpProblem::new();
    let a_vars: Vec<crate::sdp::HermVar> = a_alg
        .block_sizes()
        .iter()
        .map(|&n| p.free_herm(k * n))
        .collect();
    let b_vars: Vec<crate::sdp::HermVar> = b_alg
        .block_sizes()
        .iter()
        .map(|&m| p.free_herm(k * m))
        .collect();

    // embedded-sum positivity per tensor block (i, j)
    for (i, &n) in a_alg.block_sizes().iter().enumerate() {
        for (j, &m) in b_alg.block_sizes().iter().enumerate() {
            let a_lift = HermExpr::var(a_vars[i]).map(|c| linalg::kron(c, &linalg::identity(m)));
            let b_lift = HermExpr::var(b_vars[j])
                .map(|c| linalg::insert_identity_slot(c, &[k, m], 1, n));
            p.psd_constraint(&a_lift.add(&b_lift));
        }
    }
    // operator-norm box: ±a_i ⪯ bound, ±b_j ⪯ bound
    let mut add_box = |var: crate::sdp::HermVar| {
        let dim = var.n;
        let up = HermExpr::constant(linalg::identity(dim).scale(bound)).sub(&HermExpr::var(var));
        let dn = HermExpr::constant(linalg::identity(dim).scale(bound)).add(&HermExpr::var(var));
        p.psd_constraint(&up);
        p.psd_constraint(&dn);
    };
    for v in &a_vars {
        add_box(*v);
    }
    for v in &b_vars {
        add_box(*v);
    }

    // objective α(a) + β(b) in free coordinates
    let mut obj = Vec::new();
    for (i, var) in a_vars.iter().enumerate() {
        let coords = herm_coords(&linalg::hermitian_part(&alpha.blocks()[i]));
        for pidx in 0..herm_dim(var.n) {
            obj.push((var.start + pidx, coords[pidx]));
        }
    }
    for (j, var) in b_vars.iter().enumerate() {
        let coords = herm_coords(&linalg::hermitian_part(&beta.blocks()[j]));
        for pidx in 0..herm_dim(var.n) {
            obj.push((var.start + pidx, coords[pidx]));
        }
    }
    p.minimize_free(obj, 0.0);

    let res = p.solve(&opsys_sdp_options())?;
    if res.status != SdpStatus::Optimal {
        return Err(OpsysError::Indeterminate(format!(
            "separation SDP ended with status {:?}",
            res.status
        )));
    }
    let primal = res.primal.as_ref().expect("optimal point");
    let unpack = |vars: &[crate::sdp::HermVar], alg: &FdAlgebra| -> AlgElement {
        let blocks: Vec<CMat> = vars
            .iter()
            .map(|v| {
                let coords = linalg::RVec::from_iterator(
                    herm_dim(v.n),
                    (0..herm_dim(v.n)).map(|pi| primal.free[v.start + pi]),
                );
                linalg::herm_from_coords(&coords, v.n)
            })
            .collect();
        AlgElement::from_blocks(alg, k, blocks).expect("declared shapes")
    };
    let a = unpack(&a_vars, &a_alg);
    let b = unpack(&b_vars, &b_alg);
    let element = SumElement::new(a, b)?;
    let objective = res.objective.expect("optimal objective");
    if objective >= -1e-8 {
        return Err(OpsysError::SeparationFailed { objective });
    }
    Ok(Separation { element, objective })
}

/// Operator norm induced by the tensor-product embedding: largest singular
/// value of `a⊗1 + 1⊗b` over the blocks.
pub fn norm_min(x: &SumElement) -> f64 {
    embed_sum(&x.a, &x.b)
        .expect("levels match by construction")
        .opnorm()
}

/// Norm induced by the coproduct structure, via the standard 2×2 reduction:
/// the least `t` for which the doubled-level element with components
/// `[[t·1, a],[a*, 0]]` and `[[0, b],[b*, t·1]]` is coproduct-positive,
/// solved as a single SDP over `(t, λ ∈ M_{2k})`.
pub fn norm_coproduct(x: &SumElement, _tol: f64) -> Result<f64, OpsysError> {
    let k = x.level();
    let mut p = SdpProblem::new();
    let lam = p.free_herm(2 * k);
    let t = p.free_scalar();
    let lam_expr = HermExpr::var(lam);
    let e01 = CMat::from_fn(2, 2, |r, c| {
        if r == 0 && c == 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let e10 = e01.adjoint();
    let p_top = linalg::kron(
        &CMat::from_fn(2, 2, |r, c| {
            if r == 0 && c == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        &linalg::identity(k),
    );
    let p_bot = linalg::identity(2 * k) - &p_top;

    for (blk, &n) in x.a().blocks().iter().zip(x.a().algebra().block_sizes()) {
        let corner = linalg::kron(&e01, blk) + linalg::kron(&e10, &blk.adjoint());
        let expr = HermExpr::constant(corner)
            .add(&HermExpr::scalar_times(
                t,
                linalg::kron(&p_top, &linalg::identity(n)),
            ))
            .sub(&lam_expr.map(|c| linalg::kron(c, &linalg::identity(n))));
        p.psd_constraint(&expr);
    }
    for (blk, &m) in x.b().blocks().iter().zip(x.b().algebra().block_sizes()) {
        let corner = linalg::kron(&e01, blk) + linalg::kron(&e10, &blk.adjoint());
        let expr = HermExpr::constant(corner)
            .add(&HermExpr::scalar_times(
                t,
                linalg::kron(&p_bot, &linalg::identity(m)),
            ))
            .add(&lam_expr.map(|c| linalg::kron(c, &linalg::identity(m))));
        p.psd_constraint(&expr);
    }
    p.minimize_free(vec![(t, 1.0)], 0.0);
    let res = p.solve(&opsys_sdp_options())?;
    match res.status {
        SdpStatus::Optimal => Ok(res.objective.expect("optimal value").max(0.0)),
        // degenerate spectra stall the solver at a near-optimal point whose
        // objective error is bounded by the reported gap
        SdpStatus::Feasible
            if res.achieved.rel_gap <= 1e-6 && res.objective.is_some() && res.margin.is_none() =>
        {
            Ok(res.objective.unwrap().max(0.0))
        }
        other => Err(OpsysError::Indeterminate(format!(
            "norm SDP ended with status {other:?}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Min,
    Coproduct,
}

pub fn norm_of(x: &SumElement, kind: NormKind) -> Result<f64, OpsysError> {
    match kind {
        NormKind::Min => Ok(norm_min(x)),
        NormKind::Coproduct => norm_coproduct(x, 1e-8),
    }
}

/// Checks the grading symmetry `‖a + b‖ = ‖−a + b‖` for an odd `a`.
pub fn symmetry_check(
    x: &SumElement,
    g: &Grading,
    kind: NormKind,
) -> Result<bool, OpsysError> {
    let scale = 1.0 + x.a().opnorm();
    if !g.is_odd(x.a(), 1e-8 * scale)? {
        return Err(OpsysError::InvalidArgument(
            "component a must be odd for the grading".into(),
        ));
    }
    let n1 = norm_of(x, kind)?;
    let n2 = norm_of(&x.flip_a(), kind)?;
    Ok((n1 - n2).abs() <= 1e-8)
}

/// Sampled necessary condition from pairs of unital representations on a
/// common space: a coproduct-positive element must act as a positive
/// operator under every such pair. Returns false if any sampled pair
/// witnesses negativity below `-1e-7`.
pub fn rep_pair_probe(
    x: &SumElement,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<bool, OpsysError> {
    let k = x.level();
    let a_alg = x.a().algebra();
    let b_alg = x.b().algebra();
    let da: usize = a_alg.block_sizes().iter().sum();
    let db: usize = b_alg.block_sizes().iter().sum();

    // blockdiag on [k, d] from level-k blocks on [k, n_i]
    let direct_sum_level = |elem: &AlgElement, d: usize| -> CMat {
        let mut out = CMat::zeros(k * d, k * d);
        let mut off = 0usize;
        for (blk, &n) in elem.blocks().iter().zip(elem.algebra().block_sizes()) {
            for u in 0..k {
                for v in 0..k {
                    for r in 0..n {
                        for c in 0..n {
                            out[(u * d + off + r, v * d + off + c)] = blk[(u * n + r, v * n + c)];
                        }
                    }
                }
            }
            off += n;
        }
        out
    };

    let a_sum = direct_sum_level(x.a(), da); // on [k, da]
    let b_sum = direct_sum_level(x.b(), db); // on [k, db]
    for _ in 0..samples {
        let u = sample::haar_unitary(da * db, rng);
        let v = sample::haar_unitary(da * db, rng);
        let a_rep = linalg::kron(&a_sum, &linalg::identity(db)); // [k, da, db]
        let b_full = linalg::kron(&b_sum, &linalg::identity(da)); // [k, db, da]
        let b_rep = linalg::permute_slots(&b_full, &[k, db, da], &[0, 2, 1]);
        let lift_u = linalg::kron(&linalg::identity(k), &u);
        let lift_v = linalg::kron(&linalg::identity(k), &v);
        let total = &lift_u * a_rep * lift_u.adjoint() + &lift_v * b_rep * lift_v.adjoint();
        if linalg::min_eig(&linalg::hermitian_part(&total)) < -1e-7 {
            return Ok(false);
        }
    }
    Ok(true)
}
