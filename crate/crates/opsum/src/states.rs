//! States as trace-pairing densities, product/reduced states, Bell-type
//! constructions, and small-dimension separability classification.
//!
//! A [`State`] on `M_k(A₁⊗…⊗A_r)` stores one PSD density block per
//! multi-index of factor blocks, with the level `M_k` as the leftmost tensor
//! slot of every block; the evaluation contract is `φ(x) = Σ_i tr(ρ_i x_i)`.

use crate::algebra::{AlgElement, FdAlgebra, TensorAlgebra};
use crate::linalg::{self, CMat, CVec};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("density block {index} has eigenvalue {min_eig:.3e} below -{tol:.3e}")]
    NotPositive {
        index: usize,
        min_eig: f64,
        tol: f64,
    },
    #[error("total trace is {trace}, not 1 within {tol:.3e}")]
    NotNormalized { trace: f64, tol: f64 },
    #[error("a noncommutative block of size >= 2 is required: {0}")]
    NoncommutativityRequired(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// PSD tolerance for validating density blocks.
pub const STATE_PSD_TOL: f64 = 1e-9;
/// Trace-normalization tolerance.
pub const STATE_TRACE_TOL: f64 = 1e-9;
/// Second-eigenvalue threshold under which a density counts as pure.
pub const PURITY_TOL: f64 = 1e-8;
/// A partial-transpose eigenvalue below `-PPT_TOL` certifies entanglement.
pub const PPT_TOL: f64 = 1e-7;

/// A state on `M_k(⊗ factors)` given by density blocks under the trace pairing.
#[derive(Debug, Clone)]
pub struct State {
    factors: Vec<FdAlgebra>,
    level: usize,
    blocks: Vec<CMat>,
}

/// Bipartition of the tensor factors into left/right groups.
#[derive(Debug, Clone)]
pub struct Cut {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Cut {
    pub fn new(left: Vec<usize>, right: Vec<usize>, num_factors: usize) -> Result<Self, StateError> {
        if left.is_empty() || right.is_empty() {
            return Err(StateError::InvalidArgument("cut groups must be nonempty".into()));
        }
        let mut seen = vec![false; num_factors];
        for &i in left.iter().chain(right.iter()) {
            if i >= num_factors || seen[i] {
                return Err(StateError::InvalidArgument(
                    "cut groups must be disjoint subsets of the factors".into(),
                ));
            }
            seen[i] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(StateError::InvalidArgument("cut must exhaust the factors".into()));
        }
        Ok(Cut { left, right })
    }

    /// The `A | B` cut of a bipartite state.
    pub fn bipartite() -> Self {
        Cut { left: vec![0], right: vec![1] }
    }

    /// The `A | [rest]` cut of an n-partite state.
    pub fn first_vs_rest(num_factors: usize) -> Self {
        Cut { left: vec![0], right: (1..num_factors).collect() }
    }
}

/// Either side of a cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl State {
    /// Block dimensions of `M_level(⊗ factors)`, lexicographic multi-index.
    pub fn block_dims(factors: &[FdAlgebra], level: usize) -> Vec<usize> {
        let mut sizes = vec![level];
        for f in factors {
            let mut next = Vec::with_capacity(sizes.len() * f.num_blocks());
            for &s in &sizes {
                for &n in f.block_sizes() {
                    next.push(s * n);
                }
            }
            sizes = next;
        }
        sizes
    }

    pub fn new(factors: &[FdAlgebra], level: usize, blocks: Vec<CMat>) -> Result<Self, StateError> {
        if factors.is_empty() {
            return Err(StateError::InvalidArgument("need at least one factor".into()));
        }
        if level == 0 {
            return Err(StateError::InvalidArgument("level must be >= 1".into()));
        }
        let dims = Self::block_dims(factors, level);
        if blocks.len() != dims.len() {
            return Err(StateError::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                dims.len(),
                blocks.len()
            )));
        }
        for (i, (blk, &d)) in blocks.iter().zip(&dims).enumerate() {
            if blk.nrows() != d || blk.ncols() != d {
                return Err(StateError::ShapeMismatch(format!(
                    "block {} must be {}x{}",
                    i, d, d
                )));
            }
            let me = linalg::min_eig(&linalg::hermitian_part(blk));
            if me < -STATE_PSD_TOL || linalg::herm_deviation(blk) > STATE_PSD_TOL {
                return Err(StateError::NotPositive {
                    index: i,
                    min_eig: me,
                    tol: STATE_PSD_TOL,
                });
            }
        }
        let trace: f64 = blocks.iter().map(|b| linalg::trace(b).re).sum();
        if (trace - 1.0).abs() > STATE_TRACE_TOL {
            return Err(StateError::NotNormalized {
                trace,
                tol: STATE_TRACE_TOL,
            });
        }
        Ok(State {
            factors: factors.to_vec(),
            level,
            blocks,
        })
    }

    /// The maximally mixed (normalized trace) state.
    pub fn max_mixed(factors: &[FdAlgebra], level: usize) -> Self {
        let dims = Self::block_dims(factors, level);
        let total: usize = dims.iter().sum();
        let blocks = dims
            .iter()
            .map(|&d| linalg::identity(d).scale(1.0 / total as f64))
            .collect();
        State {
            factors: factors.to_vec(),
            level,
            blocks,
        }
    }

    /// The normalized trace `tr_k` on a full matrix block, as a level-1 state.
    pub fn normalized_trace(alg: &FdAlgebra) -> Self {
        Self::max_mixed(std::slice::from_ref(alg), 1)
    }

    pub fn factors(&self) -> &[FdAlgebra] {
        &self.factors
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| linalg::trace(b).re).sum()
    }

    /// Flattened algebra this state pairs with.
    pub fn flattened_algebra(&self) -> FdAlgebra {
        if self.factors.len() == 1 {
            self.factors[0].clone()
        } else {
            TensorAlgebra::nary(&self.factors).expect("len >= 2").flattened()
        }
    }

    /// `φ(x) = Σ_i tr(ρ_i x_i)` against an element of the flattened algebra.
    pub fn expectation(&self, x: &AlgElement) -> Result<Complex64, StateError> {
        if x.level() != self.level {
            return Err(StateError::ShapeMismatch(format!(
                "level mismatch: state {}, element {}",
                self.level,
                x.level()
            )));
        }
        if x.algebra().block_sizes() != Self::block_dims(&self.factors, 1) {
            return Err(StateError::ShapeMismatch(format!(
                "algebra mismatch: state on {}, element on {}",
                self.flattened_algebra().label(),
                x.algebra().label()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (rho, blk) in self.blocks.iter().zip(x.blocks()) {
            acc += linalg::trace(&(rho * blk));
        }
        Ok(acc)
    }

    /// Density of the level ancilla: traces out every algebra slot.
    pub fn level_marginal(&self) -> CMat {
        let mut out = CMat::zeros(self.level, self.level);
        let factor_blocks: Vec<Vec<usize>> = self
            .factors
            .iter()
            .map(|f| f.block_sizes().to_vec())
            .collect();
        for (flat, blk) in self.blocks.iter().enumerate() {
            let multi = self.multi_index(flat);
            let mut dims = vec![self.level];
            for (f, &bi) in multi.iter().enumerate() {
                dims.push(factor_blocks[f][bi]);
            }
            let traced: Vec<usize> = (1..dims.len()).collect();
            out += linalg::partial_trace(blk, &dims, &traced);
        }
        out
    }

    /// Multi-index of factor blocks for a flat block index.
    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let counts: Vec<usize> = self.factors.iter().map(|f| f.num_blocks()).collect();
        let mut multi = vec![0usize; counts.len()];
        for i in (0..counts.len()).rev() {
            multi[i] = flat % counts[i];
            flat /= counts[i];
        }
        multi
    }

    fn flat_index(counts: &[usize], multi: &[usize]) -> usize {
        let mut flat = 0usize;
        for (i, &m) in multi.iter().enumerate() {
            flat = flat * counts[i] + m;
        }
        flat
    }

    /// Eigenvalues of the whole density, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut evs: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| linalg::herm_eigvals(&linalg::hermitian_part(b)))
            .collect();
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        evs
    }

    /// Pure iff the second-largest eigenvalue is below [`PURITY_TOL`] and the
    /// support sits in a single block.
    pub fn is_pure(&self) -> bool {
        let evs = self.eigenvalues();
        let n = evs.len();
        if n == 0 {
            return false;
        }
        if n >= 2 && evs[n - 2] > PURITY_TOL {
            return false;
        }
        let supported: usize = self
            .blocks
            .iter()
            .filter(|b| linalg::trace(b).re > PURITY_TOL)
            .count();
        supported == 1
    }

    /// Reinterprets a state whose first factor is a single full block `M_d`
    /// as a level-`k·d` state over the remaining factors. Block data is
    /// unchanged.
    pub fn absorb_first_factor_into_level(&self) -> Result<State, StateError> {
        if self.factors.len() < 2 {
            return Err(StateError::InvalidArgument(
                "need at least two factors to absorb one".into(),
            ));
        }
        if self.factors[0].num_blocks() != 1 {
            return Err(StateError::InvalidArgument(
                "first factor must be a single full matrix block".into(),
            ));
        }
        let d = self.factors[0].block_sizes()[0];
        Ok(State {
            factors: self.factors[1..].to_vec(),
            level: self.level * d,
            blocks: self.blocks.clone(),
        })
    }

    /// Inverse of [`State::absorb_first_factor_into_level`]: turns the level
    /// ancilla into an explicit `M_k` tensor factor.
    pub fn level_as_first_factor(&self) -> State {
        if self.level == 1 {
            return self.clone();
        }
        let mut factors = vec![FdAlgebra::full(self.level)];
        factors.extend_from_slice(&self.factors);
        State {
            factors,
            level: 1,
            blocks: self.blocks.clone(),
        }
    }

    /// Builds a state from solver-produced blocks: hermitizes, clips tiny
    /// negative eigenvalues, and renormalizes the trace before validating.
    pub fn from_solver_blocks(
        factors: &[FdAlgebra],
        level: usize,
        blocks: Vec<CMat>,
    ) -> Result<Self, StateError> {
        let cleaned: Vec<CMat> = blocks
            .iter()
            .map(|b| {
                let h = linalg::hermitian_part(b);
                let (evs, vecs) = linalg::herm_eig(&h);
                let d = CMat::from_diagonal(&CVec::from_iterator(
                    evs.len(),
                    evs.iter().map(|&x| Complex64::new(x.max(0.0), 0.0)),
                ));
                &vecs * d * vecs.adjoint()
            })
            .collect();
        let total: f64 = cleaned.iter().map(|b| linalg::trace(b).re).sum();
        if total <= 0.0 {
            return Err(StateError::NotNormalized {
                trace: total,
                tol: STATE_TRACE_TOL,
            });
        }
        let blocks = cleaned.into_iter().map(|b| b.scale(1.0 / total)).collect();
        State::new(factors, level, blocks)
    }

    /// Trace distance-inducing norm `‖ρ − σ‖₁` between equally shaped states.
    pub fn trace_distance(&self, other: &State) -> Result<f64, StateError> {
        if self.blocks.len() != other.blocks.len() || self.level != other.level {
            return Err(StateError::ShapeMismatch("states have different shapes".into()));
        }
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::trace_norm(&(a - b)))
            .sum())
    }
}

/// Product state `(φ⊗ψ)(a⊗b) = φ(a)ψ(b)`; inputs must be level 1.
pub fn product_state(phi: &State, psi: &State) -> Result<State, StateError> {
    if phi.level() != 1 || psi.level() != 1 {
        return Err(StateError::InvalidArgument(
            "product states act on level-1 inputs; convert the level to a factor first".into(),
        ));
    }
    let mut factors = phi.factors().to_vec();
    factors.extend_from_slice(psi.factors());
    let mut blocks = Vec::with_capacity(phi.blocks().len() * psi.blocks().len());
    for a in phi.blocks() {
        for b in psi.blocks() {
            blocks.push(linalg::kron(a, b));
        }
    }
    State::new(&factors, 1, blocks)
}

/// Partial trace onto the `keep` factors (original order, level retained).
pub fn reduce(gamma: &State, keep: &[usize]) -> Result<State, StateError> {
    let r = gamma.factors().len();
    if keep.is_empty() || keep.iter().any(|&i| i >= r) {
        return Err(StateError::InvalidArgument("kept factor set invalid".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..r).filter(|i| !keep_sorted.contains(i)).collect();
    if traced.is_empty() {
        return Ok(gamma.clone());
    }
    let kept_factors: Vec<FdAlgebra> = keep_sorted.iter().map(|&i| gamma.factors()[i].clone()).collect();
    let kept_counts: Vec<usize> = kept_factors.iter().map(|f| f.num_blocks()).collect();
    let out_dims = State::block_dims(&kept_factors, gamma.level());
    let mut out_blocks: Vec<CMat> = out_dims.iter().map(|&d| CMat::zeros(d, d)).collect();

    let total_blocks = gamma.blocks().len();
    for flat in 0..total_blocks {
        let multi = gamma.multi_index(flat);
        // tensor slot dims of this block: [level, factor sizes...]
        let mut dims = vec![gamma.level()];
        for (f, &bi) in multi.iter().enumerate() {
            dims.push(gamma.factors()[f].block_sizes()[bi]);
        }
        let traced_slots: Vec<usize> = traced.iter().map(|&f| f + 1).collect();
        let reduced = linalg::partial_trace(&gamma.blocks()[flat], &dims, &traced_slots);
        let kept_multi: Vec<usize> = keep_sorted.iter().map(|&f| multi[f]).collect();
        let out_flat = State::flat_index(&kept_counts, &kept_multi);
        out_blocks[out_flat] += reduced;
    }
    State::new(&kept_factors, gamma.level(), out_blocks)
}

/// Reduction at one side of a cut (the complement is traced out).
pub fn reduce_side(gamma: &State, cut: &Cut, side: Side) -> Result<State, StateError> {
    match side {
        Side::Left => reduce(gamma, &cut.left),
        Side::Right => reduce(gamma, &cut.right),
    }
}

/// Pure state `(ξ₁⊗ζ₁ + ξ₂⊗ζ₂)/√2` supported on block `(blk_a, blk_b)` of
/// `A⊗B`. Both reductions are rank-2 with eigenvalues `½, ½`; with `M₂` and
/// the standard basis, the reduction is the normalized trace.
pub fn bell_state(
    a_alg: &FdAlgebra,
    b_alg: &FdAlgebra,
    blk_a: usize,
    blk_b: usize,
    pair_a: (&CVec, &CVec),
    pair_b: (&CVec, &CVec),
) -> Result<State, StateError> {
    let check_block = |alg: &FdAlgebra, blk: usize| -> Result<usize, StateError> {
        let n = *alg
            .block_sizes()
            .get(blk)
            .ok_or_else(|| StateError::InvalidArgument(format!("block index {blk} out of range")))?;
        if n < 2 {
            return Err(StateError::NoncommutativityRequired(format!(
                "block {} of {} has size {} < 2",
                blk,
                alg.label(),
                n
            )));
        }
        Ok(n)
    };
    let na = check_block(a_alg, blk_a)?;
    let nb = check_block(b_alg, blk_b)?;
    let check_pair = |p: (&CVec, &CVec), n: usize| -> Result<(), StateError> {
        if p.0.len() != n || p.1.len() != n {
            return Err(StateError::ShapeMismatch(format!(
                "vectors must have length {n}"
            )));
        }
        let orth = p.0.dotc(p.1).norm();
        let n0 = (p.0.norm() - 1.0).abs();
        let n1 = (p.1.norm() - 1.0).abs();
        if orth > 1e-9 || n0 > 1e-9 || n1 > 1e-9 {
            return Err(StateError::InvalidArgument(
                "vector pairs must be orthonormal".into(),
            ));
        }
        Ok(())
    };
    check_pair(pair_a, na)?;
    check_pair(pair_b, nb)?;

    let mut omega = CVec::zeros(na * nb);
    for i in 0..na {
        for j in 0..nb {
            omega[i * nb + j] = (pair_a.0[i] * pair_b.0[j] + pair_a.1[i] * pair_b.1[j])
                * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    let factors = vec![a_alg.clone(), b_alg.clone()];
    let dims = State::block_dims(&factors, 1);
    let counts = [a_alg.num_blocks(), b_alg.num_blocks()];
    let target = State::flat_index(&counts, &[blk_a, blk_b]);
    let blocks: Vec<CMat> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if i == target {
                let mut b = CMat::zeros(d, d);
                for r in 0..d {
                    for c in 0..d {
                        b[(r, c)] = omega[r] * omega[c].conj();
                    }
                }
                b
            } else {
                CMat::zeros(d, d)
            }
        })
        .collect();
    State::new(&factors, 1, blocks)
}

/// Bell state on `M₂ ⊗ A` using the standard `M₂` basis and the first two
/// basis vectors of the chosen `A`-block, returned as a level-2 state on `A`.
pub fn bell_level2_state(a_alg: &FdAlgebra, blk_a: usize) -> Result<State, StateError> {
    let m2 = FdAlgebra::full(2);
    let n = *a_alg
        .block_sizes()
        .get(blk_a)
        .ok_or_else(|| StateError::InvalidArgument(format!("block index {blk_a} out of range")))?;
    if n < 2 {
        return Err(StateError::NoncommutativityRequired(format!(
            "block {} of {} has size {} < 2",
            blk_a,
            a_alg.label(),
            n
        )));
    }
    let e = |i: usize, d: usize| {
        let mut v = CVec::zeros(d);
        v[i] = Complex64::new(1.0, 0.0);
        v
    };
    let s = bell_state(
        &m2,
        a_alg,
        0,
        blk_a,
        (&e(0, 2), &e(1, 2)),
        (&e(0, n), &e(1, n)),
    )?;
    s.absorb_first_factor_into_level()
}

/// Outcome of the pure/mixed marginal classification of a bipartite state.
#[derive(Debug, Clone)]
pub enum PuresepClass {
    /// The state is pure with a mixed left marginal.
    Entangled,
    /// The left marginal is pure; the state factorizes as the product of its
    /// marginals, and the reconstruction is returned.
    Product {
        reconstruction: State,
        trace_error: f64,
    },
    /// Neither hypothesis applies.
    Inconclusive,
}

/// Classifies a level-1 bipartite state by purity of the state and of its
/// left marginal. A pure state with mixed left marginal is entangled; a pure
/// left marginal forces the product form, which is verified in trace norm.
pub fn classify_puresep(gamma: &State) -> Result<PuresepClass, StateError> {
    if gamma.factors().len() != 2 || gamma.level() != 1 {
        return Err(StateError::InvalidArgument(
            "classification needs a level-1 bipartite state".into(),
        ));
    }
    let left = reduce(gamma, &[0])?;
    if left.is_pure() {
        let right = reduce(gamma, &[1])?;
        let recon = product_state(&left, &right)?;
        let err = gamma.trace_distance(&recon)?;
        if err > 1e-8 {
            return Err(StateError::InvalidArgument(format!(
                "pure left marginal but product reconstruction fails at {err:.3e}"
            )));
        }
        return Ok(PuresepClass::Product {
            reconstruction: recon,
            trace_error: err,
        });
    }
    if gamma.is_pure() {
        return Ok(PuresepClass::Entangled);
    }
    Ok(PuresepClass::Inconclusive)
}

/// A separable decomposition `Σ p_i φ_i ⊗ ψ_i` across a cut.
#[derive(Debug, Clone)]
pub struct SepDecomposition {
    pub terms: Vec<(f64, State, State)>,
}

impl SepDecomposition {
    /// Rebuilds the decomposed state (left factors ⊗ right factors, in the
    /// left-then-right factor order used by the decomposition).
    pub fn reassemble(&self) -> Result<State, StateError> {
        let mut acc: Option<Vec<CMat>> = None;
        let mut factors = Vec::new();
        for (p, l, r) in &self.terms {
            let prod = product_state(l, r)?;
            factors = prod.factors().to_vec();
            let scaled: Vec<CMat> = prod.blocks().iter().map(|b| b.scale(*p)).collect();
            acc = Some(match acc {
                None => scaled,
                Some(mut a) => {
                    for (x, y) in a.iter_mut().zip(&scaled) {
                        *x += y;
                    }
                    a
                }
            });
        }
        let blocks = acc.ok_or_else(|| StateError::InvalidArgument("empty decomposition".into()))?;
        State::new(&factors, 1, blocks)
    }
}

/// Tri-valued separability answer across a cut.
#[derive(Debug, Clone)]
pub enum SepStatus {
    Separable(Option<SepDecomposition>),
    Entangled { min_pt_eig: f64 },
    PptUnknown { min_pt_eig: f64 },
}

impl SepStatus {
    pub fn is_separable(&self) -> bool {
        matches!(self, SepStatus::Separable(_))
    }
    pub fn is_entangled(&self) -> bool {
        matches!(self, SepStatus::Entangled { .. })
    }
}

fn min_pt_eigenvalue(gamma: &State, cut: &Cut) -> f64 {
    let mut min_ev = f64::INFINITY;
    for (flat, blk) in gamma.blocks().iter().enumerate() {
        let multi = gamma.multi_index(flat);
        let mut dims = vec![gamma.level()];
        for (f, &bi) in multi.iter().enumerate() {
            dims.push(gamma.factors()[f].block_sizes()[bi]);
        }
        let t_slots: Vec<usize> = cut.left.iter().map(|&f| f + 1).collect();
        let pt = linalg::partial_transpose(&linalg::hermitian_part(blk), &dims, &t_slots);
        min_ev = min_ev.min(linalg::min_eig(&pt));
    }
    min_ev
}

/// Explicit separable decomposition when one side of the cut is commutative:
/// conditioning on the classical side's block index yields `Σ p_i δ_i ⊗ ρ_i`.
fn commutative_decomposition(gamma: &State, cut: &Cut, left_comm: bool) -> Result<SepDecomposition, StateError> {
    let (class_side, quant_side) = if left_comm {
        (&cut.left, &cut.right)
    } else {
        (&cut.right, &cut.left)
    };
    let class_factors: Vec<FdAlgebra> = class_side.iter().map(|&i| gamma.factors()[i].clone()).collect();
    let class_counts: Vec<usize> = class_factors.iter().map(|f| f.num_blocks()).collect();
    let num_class: usize = class_counts.iter().product();

    let mut terms = Vec::new();
    for ci in 0..num_class {
        // classical multi-index -> conditional state on the quantum side
        let mut cm = vec![0usize; class_counts.len()];
        let mut rem = ci;
        for i in (0..class_counts.len()).rev() {
            cm[i] = rem % class_counts[i];
            rem /= class_counts[i];
        }
        // sum the conditional (traced) density over the quantum side blocks
        let quant_factors: Vec<FdAlgebra> = quant_side.iter().map(|&i| gamma.factors()[i].clone()).collect();
        let quant_counts: Vec<usize> = quant_factors.iter().map(|f| f.num_blocks()).collect();
        let qdims = State::block_dims(&quant_factors, 1);
        let mut qblocks: Vec<CMat> = qdims.iter().map(|&d| CMat::zeros(d, d)).collect();
        let mut weight = 0.0;
        for (flat, blk) in gamma.blocks().iter().enumerate() {
            let multi = gamma.multi_index(flat);
            let matches_class = class_side.iter().zip(&cm).all(|(&f, &want)| multi[f] == want);
            if !matches_class {
                continue;
            }
            // trace out the classical slots (they are 1-dimensional only if
            // the factor block sizes are 1, which commutativity guarantees)
            let mut dims = vec![gamma.level()];
            for (f, &bi) in multi.iter().enumerate() {
                dims.push(gamma.factors()[f].block_sizes()[bi]);
            }
            let t_slots: Vec<usize> = class_side.iter().map(|&f| f + 1).collect();
            let cond = linalg::partial_trace(blk, &dims, &t_slots);
            let qmulti: Vec<usize> = quant_side.iter().map(|&f| multi[f]).collect();
            let qflat = State::flat_index(&quant_counts, &qmulti);
            qblocks[qflat] += cond;
            weight += linalg::trace(blk).re;
        }
        if weight <= 1e-15 {
            continue;
        }
        let qblocks: Vec<CMat> = qblocks
            .into_iter()
            .map(|b| linalg::hermitian_part(&b).scale(1.0 / weight))
            .collect();
        let quant_state = State::new(&quant_factors, 1, qblocks)?;
        // point mass on classical block ci
        let cdims = State::block_dims(&class_factors, 1);
        let cblocks: Vec<CMat> = (0..cdims.len())
            .map(|i| {
                if i == ci {
                    linalg::identity(1)
                } else {
                    CMat::zeros(1, 1)
                }
            })
            .collect();
        let class_state = State::new(&class_factors, 1, cblocks)?;
        if left_comm {
            terms.push((weight, class_state, quant_state));
        } else {
            terms.push((weight, quant_state, class_state));
        }
    }
    Ok(SepDecomposition { terms })
}

/// Partial-transpose based separability status across a cut.
///
/// A partial-transpose eigenvalue below `-PPT_TOL` certifies entanglement.
/// With a commutative side, separability always holds and an explicit
/// decomposition is returned. Single-block sides with product dimension at
/// most 6 are the regime where a positive partial transpose already implies
/// separability; everything else stays tri-valued.
pub fn separability_status(gamma: &State, cut: &Cut) -> Result<SepStatus, StateError> {
    if gamma.level() != 1 {
        return Err(StateError::InvalidArgument(
            "separability is assessed on level-1 states".into(),
        ));
    }
    Cut::new(cut.left.clone(), cut.right.clone(), gamma.factors().len())?;
    let min_pt = min_pt_eigenvalue(gamma, cut);
    if min_pt < -PPT_TOL {
        return Ok(SepStatus::Entangled { min_pt_eig: min_pt });
    }
    let side_comm = |side: &[usize]| side.iter().all(|&i| gamma.factors()[i].is_commutative());
    if side_comm(&cut.left) {
        let dec = commutative_decomposition(gamma, cut, true)?;
        return Ok(SepStatus::Separable(Some(dec)));
    }
    if side_comm(&cut.right) {
        let dec = commutative_decomposition(gamma, cut, false)?;
        return Ok(SepStatus::Separable(Some(dec)));
    }
    let side_dim = |side: &[usize]| -> Option<usize> {
        let mut d = 1usize;
        for &i in side {
            if gamma.factors()[i].num_blocks() != 1 {
                return None;
            }
            d *= gamma.factors()[i].block_sizes()[0];
        }
        Some(d)
    };
    if let (Some(dl), Some(dr)) = (side_dim(&cut.left), side_dim(&cut.right)) {
        if dl.min(dr) <= 2 && dl * dr <= 6 {
            return Ok(SepStatus::Separable(None));
        }
    }
    Ok(SepStatus::PptUnknown { min_pt_eig: min_pt })
}

/// Checks the marginal-entanglement implication on a tripartite instance:
/// if the `A⊗B` marginal is entangled, the `A | [B⊗C]` cut must not be
/// classified separable. Returns whether the implication holds here.
pub fn tritobi_check(gamma: &State) -> Result<bool, StateError> {
    if gamma.factors().len() != 3 || gamma.level() != 1 {
        return Err(StateError::InvalidArgument(
            "need a level-1 tripartite state".into(),
        ));
    }
    let ab = reduce(gamma, &[0, 1])?;
    let ab_status = separability_status(&ab, &Cut::bipartite())?;
    if !ab_status.is_entangled() {
        return Ok(true); // hypothesis empty: implication vacuous
    }
    let full = separability_status(gamma, &Cut::first_vs_rest(3))?;
    Ok(!full.is_separable())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn basis(i: usize, d: usize) -> CVec {
        let mut v = CVec::zeros(d);
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    fn std_bell() -> State {
        let m2 = FdAlgebra::full(2);
        bell_state(
            &m2,
            &m2,
            0,
            0,
            (&basis(0, 2), &basis(1, 2)),
            (&basis(0, 2), &basis(1, 2)),
        )
        .unwrap()
    }

    #[test]
    fn product_state_basics() {
        let m2 = FdAlgebra::full(2);
        let tr2 = State::normalized_trace(&m2);
        let prod = product_state(&tr2, &tr2).unwrap();
        assert!((prod.blocks()[0].clone() - linalg::identity(4).scale(0.25)).norm() < 1e-14);

        // pure ⊗ pure is pure
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let p1 = crate::sample::random_pure_state(&[m2.clone()], 1, &mut rng);
        let p2 = crate::sample::random_pure_state(&[m2.clone()], 1, &mut rng);
        assert!(product_state(&p1, &p2).unwrap().is_pure());

        // reduce ∘ product recovers the factor
        let phi = crate::sample::random_state(&[m2.clone()], 1, &mut rng);
        let psi = crate::sample::random_state(&[m2.clone()], 1, &mut rng);
        let left = reduce(&product_state(&phi, &psi).unwrap(), &[0]).unwrap();
        assert!(left.trace_distance(&phi).unwrap() < 1e-12);
    }

    #[test]
    fn reduce_preserves_trace_on_random_states() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = FdAlgebra::new(&[2, 1]).unwrap();
        let b = FdAlgebra::full(2);
        for _ in 0..100 {
            let gamma = crate::sample::random_state(&[a.clone(), b.clone()], 1, &mut rng);
            let left = reduce(&gamma, &[0]).unwrap();
            assert!((left.total_trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_state_reductions() {
        let bell = std_bell();
        assert!(bell.is_pure());
        // the density is the rank-1 projector onto (|00⟩ + |11⟩)/√2: value
        // 1/2 at the four corners indexed by 00 and 11, zero elsewhere
        let d = &bell.blocks()[0];
        for r in 0..4 {
            for c in 0..4 {
                let expect = if (r == 0 || r == 3) && (c == 0 || c == 3) {
                    0.5
                } else {
                    0.0
                };
                assert!((d[(r, c)].re - expect).abs() < 1e-14 && d[(r, c)].im.abs() < 1e-14);
            }
        }
        let left = reduce(&bell, &[0]).unwrap();
        assert!((left.blocks()[0].clone() - linalg::identity(2).scale(0.5)).norm() < 1e-12);

        // purity: top eigenvalue 1
        let evs = bell.eigenvalues();
        assert!((evs.last().unwrap() - 1.0).abs() < 1e-10);

        // block of M3 inside M2⊕M3: marginal eigenvalues {1/2, 1/2, 0}
        let m23 = FdAlgebra::new(&[2, 3]).unwrap();
        let m2 = FdAlgebra::full(2);
        let s = bell_state(
            &m23,
            &m2,
            1,
            0,
            (&basis(0, 3), &basis(1, 3)),
            (&basis(0, 2), &basis(1, 2)),
        )
        .unwrap();
        let left = reduce(&s, &[0]).unwrap();
        // the M3 block carries eigenvalues {1/2, 1/2, 0}; the untouched M2
        // block contributes two more zeros
        let evs = left.eigenvalues();
        assert_eq!(evs.len(), 5);
        assert!(evs[..3].iter().all(|e| e.abs() < 1e-12));
        assert!((evs[3] - 0.5).abs() < 1e-12 && (evs[4] - 0.5).abs() < 1e-12);

        // too-small block errors
        let c2 = FdAlgebra::new(&[1, 1]).unwrap();
        assert!(matches!(
            bell_state(
                &c2,
                &m2,
                0,
                0,
                (&basis(0, 1), &basis(0, 1)),
                (&basis(0, 2), &basis(1, 2))
            ),
            Err(StateError::NoncommutativityRequired(_))
        ));
    }

    #[test]
    fn bell_level2_marginal_is_normalized_trace() {
        let m2 = FdAlgebra::full(2);
        let alpha = bell_level2_state(&m2, 0).unwrap();
        assert_eq!(alpha.level(), 2);
        let mu = alpha.level_marginal();
        assert!((mu - linalg::identity(2).scale(0.5)).norm() < 1e-12);
    }

    #[test]
    fn puresep_classification() {
        let bell = std_bell();
        assert!(matches!(classify_puresep(&bell).unwrap(), PuresepClass::Entangled));

        let m2 = FdAlgebra::full(2);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let pure = crate::sample::random_pure_state(&[m2.clone()], 1, &mut rng);
        let psi = crate::sample::random_state(&[m2.clone()], 1, &mut rng);
        let prod = product_state(&pure, &psi).unwrap();
        match classify_puresep(&prod).unwrap() {
            PuresepClass::Product { trace_error, .. } => assert!(trace_error < 1e-10),
            other => panic!("expected product, got {:?}", other),
        }

        let mixed = State::max_mixed(&[m2.clone(), m2.clone()], 1);
        assert!(matches!(
            classify_puresep(&mixed).unwrap(),
            PuresepClass::Inconclusive
        ));
    }

    #[test]
    fn ppt_detects_bell_entanglement() {
        let bell = std_bell();
        let min_pt = min_pt_eigenvalue(&bell, &Cut::bipartite());
        assert!((min_pt + 0.5).abs() < 1e-12, "min PT eigenvalue {min_pt}");
        assert!(separability_status(&bell, &Cut::bipartite())
            .unwrap()
            .is_entangled());
    }

    #[test]
    fn product_states_are_separable() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let m2 = FdAlgebra::full(2);
        for _ in 0..20 {
            let phi = crate::sample::random_state(&[m2.clone()], 1, &mut rng);
            let psi = crate::sample::random_state(&[m2.clone()], 1, &mut rng);
            let prod = product_state(&phi, &psi).unwrap();
            assert!(separability_status(&prod, &Cut::bipartite())
                .unwrap()
                .is_separable());
        }
    }

    #[test]
    fn commutative_side_gives_explicit_decomposition() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let c2 = FdAlgebra::new(&[1, 1]).unwrap();
        let m2 = FdAlgebra::full(2);
        for _ in 0..20 {
            let gamma = crate::sample::random_state(&[c2.clone(), m2.clone()], 1, &mut rng);
            match separability_status(&gamma, &Cut::bipartite()).unwrap() {
                SepStatus::Separable(Some(dec)) => {
                    let back = dec.reassemble().unwrap();
                    assert!(back.trace_distance(&gamma).unwrap() < 1e-10);
                    let wsum: f64 = dec.terms.iter().map(|t| t.0).sum();
                    assert!((wsum - 1.0).abs() < 1e-10);
                }
                other => panic!("expected separable with decomposition, got {:?}", other),
            }
        }
    }

    #[test]
    fn invalid_cuts_are_rejected() {
        let m2 = FdAlgebra::full(2);
        let gamma = State::max_mixed(&[m2.clone(), m2.clone()], 1);
        let bad = Cut {
            left: vec![0, 1],
            right: vec![1],
        };
        assert!(matches!(
            separability_status(&gamma, &bad),
            Err(StateError::InvalidArgument(_))
        ));
        assert!(Cut::new(vec![0], vec![], 2).is_err());
        assert!(Cut::new(vec![0], vec![2], 2).is_err());
    }

    #[test]
    fn tritobi_bell_and_random() {
        let m2 = FdAlgebra::full(2);
        let c2 = FdAlgebra::new(&[1, 1]).unwrap();
        let bell = std_bell();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let psi = crate::sample::random_state(&[c2.clone()], 1, &mut rng);
        let gamma = product_state(&bell, &psi).unwrap();
        assert!(tritobi_check(&gamma).unwrap());

        // fully product state: vacuous
        let p = product_state(
            &product_state(
                &crate::sample::random_state(&[m2.clone()], 1, &mut rng),
                &crate::sample::random_state(&[m2.clone()], 1, &mut rng),
            )
            .unwrap(),
            &psi,
        )
        .unwrap();
        assert!(tritobi_check(&p).unwrap());

        for _ in 0..50 {
            let g = crate::sample::random_state(&[m2.clone(), m2.clone(), c2.clone()], 1, &mut rng);
            assert!(tritobi_check(&g).unwrap());
        }
    }

    #[test]
    fn level_factor_conversions_roundtrip() {
        let m2 = FdAlgebra::full(2);
        let alpha = bell_level2_state(&m2, 0).unwrap();
        let as_factor = alpha.level_as_first_factor();
        assert_eq!(as_factor.level(), 1);
        assert_eq!(as_factor.factors().len(), 2);
        let back = as_factor.absorb_first_factor_into_level().unwrap();
        assert_eq!(back.level(), 2);
        assert!(back.trace_distance(&alpha).unwrap() < 1e-15);
    }
}
