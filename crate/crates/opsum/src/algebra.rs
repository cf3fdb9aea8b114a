//! Finite-dimensional C*-algebras in canonical block form and their matrix
//! levels.
//!
//! An algebra is a direct sum of full matrix blocks `⊕_i M_{n_i}`; every
//! finite-dimensional C*-algebra is *-isomorphic to one of these, which makes
//! positivity an eigenvalue computation. An element of `M_k(A)` is stored as
//! one `(k·n_i)×(k·n_i)` complex matrix per block, with the level factor `M_k`
//! as the leftmost tensor slot.

use crate::linalg::{self, CMat, CVec};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("algebra mismatch: expected {expected}, got {got}")]
    AlgebraMismatch { expected: String, got: String },
    #[error("element is not self-adjoint: deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotSelfAdjoint { deviation: f64, tol: f64 },
    #[error("Gram matrices differ by {deviation:.3e}, beyond tolerance {tol:.3e}")]
    GramMismatch { deviation: f64, tol: f64 },
    #[error("vector set is rank deficient: {0}")]
    RankDeficient(String),
    #[error("invalid grading: {0}")]
    InvalidGrading(String),
}

/// A finite-dimensional C*-algebra `⊕_i M_{n_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FdAlgebra {
    block_sizes: Vec<usize>,
    label: String,
}

fn default_label(sizes: &[usize]) -> String {
    if sizes.iter().all(|&n| n == 1) {
        return format!("C{}", sizes.len());
    }
    sizes
        .iter()
        .map(|&n| if n == 1 { "C".to_string() } else { format!("M{}", n) })
        .collect::<Vec<_>>()
        .join("+")
}

impl FdAlgebra {
    /// Builds the algebra `⊕_i M_{n_i}` with a deterministic label.
    pub fn new(block_sizes: &[usize]) -> Result<Self, AlgebraError> {
        if block_sizes.is_empty() {
            return Err(AlgebraError::InvalidArgument(
                "block size list must be nonempty".into(),
            ));
        }
        if block_sizes.iter().any(|&n| n == 0) {
            return Err(AlgebraError::InvalidArgument(
                "block sizes must be at least 1".into(),
            ));
        }
        Ok(FdAlgebra {
            block_sizes: block_sizes.to_vec(),
            label: default_label(block_sizes),
        })
    }

    pub fn with_label(block_sizes: &[usize], label: &str) -> Result<Self, AlgebraError> {
        let mut a = Self::new(block_sizes)?;
        a.label = label.to_string();
        Ok(a)
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Self {
        Self::new(&[n]).expect("n >= 1")
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Complex dimension `Σ n_i²`.
    pub fn total_dim(&self) -> usize {
        self.block_sizes.iter().map(|&n| n * n).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.block_sizes.iter().all(|&n| n == 1)
    }

    pub fn has_noncommutative_block(&self) -> bool {
        self.block_sizes.iter().any(|&n| n >= 2)
    }

    fn mismatch(&self, other: &FdAlgebra) -> AlgebraError {
        AlgebraError::AlgebraMismatch {
            expected: self.label.clone(),
            got: other.label.clone(),
        }
    }
}

/// Tensor product of finitely many algebras, blocks in lexicographic factor
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorAlgebra {
    factors: Vec<FdAlgebra>,
}

impl TensorAlgebra {
    pub fn new(a: &FdAlgebra, b: &FdAlgebra) -> Self {
        TensorAlgebra {
            factors: vec![a.clone(), b.clone()],
        }
    }

    pub fn nary(factors: &[FdAlgebra]) -> Result<Self, AlgebraError> {
        if factors.len() < 2 {
            return Err(AlgebraError::InvalidArgument(
                "tensor product needs at least two factors".into(),
            ));
        }
        Ok(TensorAlgebra {
            factors: factors.to_vec(),
        })
    }

    pub fn factors(&self) -> &[FdAlgebra] {
        &self.factors
    }

    /// Multi-index block sizes, lexicographic in the factor blocks.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![1usize];
        for f in &self.factors {
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

    /// The same algebra flattened to canonical block form.
    pub fn flattened(&self) -> FdAlgebra {
        let label = self
            .factors
            .iter()
            .map(|f| f.label().to_string())
            .collect::<Vec<_>>()
            .join("⊗");
        FdAlgebra {
            block_sizes: self.block_sizes(),
            label,
        }
    }
}

/// An element of `M_k(A)`, one matrix per block of `A`.
#[derive(Debug, Clone)]
pub struct AlgElement {
    algebra: FdAlgebra,
    level: usize,
    blocks: Vec<CMat>,
}

impl AlgElement {
    pub fn from_blocks(
        algebra: &FdAlgebra,
        level: usize,
        blocks: Vec<CMat>,
    ) -> Result<Self, AlgebraError> {
        if level == 0 {
            return Err(AlgebraError::InvalidArgument("level must be >= 1".into()));
        }
        if blocks.len() != algebra.num_blocks() {
            return Err(AlgebraError::InvalidArgument(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (i, (blk, &n)) in blocks.iter().zip(algebra.block_sizes()).enumerate() {
            let want = level * n;
            if blk.nrows() != want || blk.ncols() != want {
                return Err(AlgebraError::InvalidArgument(format!(
                    "block {} must be {}x{}, got {}x{}",
                    i,
                    want,
                    want,
                    blk.nrows(),
                    blk.ncols()
                )));
            }
        }
        Ok(AlgElement {
            algebra: algebra.clone(),
            level,
            blocks,
        })
    }

    pub fn zero(algebra: &FdAlgebra, level: usize) -> Self {
        let blocks = algebra
            .block_sizes()
            .iter()
            .map(|&n| CMat::zeros(level * n, level * n))
            .collect();
        AlgElement {
            algebra: algebra.clone(),
            level,
            blocks,
        }
    }

    pub fn unit(algebra: &FdAlgebra, level: usize) -> Self {
        let blocks = algebra
            .block_sizes()
            .iter()
            .map(|&n| linalg::identity(level * n))
            .collect();
        AlgElement {
            algebra: algebra.clone(),
            level,
            blocks,
        }
    }

    pub fn algebra(&self) -> &FdAlgebra {
        &self.algebra
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn adjoint(&self) -> Self {
        AlgElement {
            algebra: self.algebra.clone(),
            level: self.level,
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        AlgElement {
            algebra: self.algebra.clone(),
            level: self.level,
            blocks: self.blocks.iter().map(|b| b.map(|x| x * z)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same_shape(other)?;
        Ok(AlgElement {
            algebra: self.algebra.clone(),
            level: self.level,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Blockwise product.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same_shape(other)?;
        Ok(AlgElement {
            algebra: self.algebra.clone(),
            level: self.level,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn herm_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::herm_deviation)
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.herm_deviation() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        AlgElement {
            algebra: self.algebra.clone(),
            level: self.level,
            blocks: self.blocks.iter().map(linalg::hermitian_part).collect(),
        }
    }

    /// Smallest eigenvalue over all blocks (element must be self-adjoint).
    pub fn min_eig(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::min_eig)
            .fold(f64::INFINITY, f64::min)
    }

    /// Operator norm: largest singular value over blocks.
    pub fn opnorm(&self) -> f64 {
        self.blocks.iter().map(linalg::opnorm).fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.algebra != other.algebra {
            return Err(self.algebra.mismatch(&other.algebra));
        }
        if self.level != other.level {
            return Err(AlgebraError::InvalidArgument(format!(
                "level mismatch: {} vs {}",
                self.level, other.level
            )));
        }
        Ok(())
    }
}

/// Builds the algebra `⊕_i M_{n_i}`; errors on an empty list or a zero size.
pub fn build_algebra(block_sizes: &[usize]) -> Result<FdAlgebra, AlgebraError> {
    FdAlgebra::new(block_sizes)
}

/// Default absolute tolerance for self-adjointness checks (operator norm).
pub const SELF_ADJOINT_TOL: f64 = 1e-9;

/// Spectral positivity test: true iff the smallest eigenvalue over all blocks
/// is at least `-tol`. Errors if the element is not self-adjoint within `tol`.
pub fn is_positive_alg(x: &AlgElement, tol: f64) -> Result<bool, AlgebraError> {
    if tol < 0.0 {
        return Err(AlgebraError::InvalidArgument(
            "tolerance must be nonnegative".into(),
        ));
    }
    let dev = x.herm_deviation();
    let sa_tol = tol.max(SELF_ADJOINT_TOL);
    if dev > sa_tol {
        return Err(AlgebraError::NotSelfAdjoint {
            deviation: dev,
            tol: sa_tol,
        });
    }
    Ok(x.hermitian_part().min_eig() >= -tol)
}

/// Embeds `a ∈ M_k(A)` into `M_k(A⊗B)` as `a⊗1`.
pub fn embed_left(a: &AlgElement, b_alg: &FdAlgebra) -> AlgElement {
    let tensor = TensorAlgebra::new(a.algebra(), b_alg);
    let mut blocks = Vec::with_capacity(a.algebra().num_blocks() * b_alg.num_blocks());
    for blk in a.blocks() {
        for &m in b_alg.block_sizes() {
            blocks.push(linalg::kron(blk, &linalg::identity(m)));
        }
    }
    AlgElement {
        algebra: tensor.flattened(),
        level: a.level(),
        blocks,
    }
}

/// Embeds `b ∈ M_k(B)` into `M_k(A⊗B)` as `1⊗b`.
pub fn embed_right(b: &AlgElement, a_alg: &FdAlgebra) -> AlgElement {
    let tensor = TensorAlgebra::new(a_alg, b.algebra());
    let k = b.level();
    let mut blocks = Vec::with_capacity(a_alg.num_blocks() * b.algebra().num_blocks());
    for &n in a_alg.block_sizes() {
        for (blk, &m) in b.blocks().iter().zip(b.algebra().block_sizes()) {
            // blk lives on [k, m]; insert the identity slot for A in the middle.
            blocks.push(linalg::insert_identity_slot(blk, &[k, m], 1, n));
        }
    }
    AlgElement {
        algebra: tensor.flattened(),
        level: k,
        blocks,
    }
}

/// Sum `a⊗1 + 1⊗b` inside `M_k(A⊗B)`.
pub fn embed_sum(a: &AlgElement, b: &AlgElement) -> Result<AlgElement, AlgebraError> {
    if a.level() != b.level() {
        return Err(AlgebraError::InvalidArgument(format!(
            "level mismatch: {} vs {}",
            a.level(),
            b.level()
        )));
    }
    embed_left(a, b.algebra()).add(&embed_right(b, a.algebra()))
}

/// An inner Z₂-grading `σ(x) = u x u*` given by one self-adjoint unitary per
/// block. Even and odd parts are the ±1 eigenspaces of σ.
#[derive(Debug, Clone)]
pub struct Grading {
    algebra: FdAlgebra,
    sign_unitaries: Vec<CMat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Grading {
    pub fn new(algebra: &FdAlgebra, sign_unitaries: Vec<CMat>) -> Result<Self, AlgebraError> {
        if sign_unitaries.len() != algebra.num_blocks() {
            return Err(AlgebraError::InvalidGrading(format!(
                "expected {} sign unitaries, got {}",
                algebra.num_blocks(),
                sign_unitaries.len()
            )));
        }
        for (u, &n) in sign_unitaries.iter().zip(algebra.block_sizes()) {
            if u.nrows() != n || u.ncols() != n {
                return Err(AlgebraError::InvalidGrading(format!(
                    "sign unitary must be {n}x{n}"
                )));
            }
            if linalg::herm_deviation(u) > 1e-9 {
                return Err(AlgebraError::InvalidGrading(
                    "sign unitary must be self-adjoint".into(),
                ));
            }
            let sq = u * u;
            if (&sq - linalg::identity(n)).norm() > 1e-9 {
                return Err(AlgebraError::InvalidGrading(
                    "sign unitary must square to the identity".into(),
                ));
            }
        }
        Ok(Grading {
            algebra: algebra.clone(),
            sign_unitaries,
        })
    }

    /// Grading by diagonal sign patterns, one `±1` sequence per block.
    pub fn diagonal(algebra: &FdAlgebra, signs: &[Vec<f64>]) -> Result<Self, AlgebraError> {
        let us = signs
            .iter()
            .map(|s| {
                CMat::from_diagonal(&CVec::from_iterator(
                    s.len(),
                    s.iter().map(|&x| Complex64::new(x, 0.0)),
                ))
            })
            .collect();
        Self::new(algebra, us)
    }

    /// The standard grading of `M₂` by `u = diag(1, −1)`.
    pub fn qubit_standard() -> (FdAlgebra, Self) {
        let alg = FdAlgebra::full(2);
        let g = Self::diagonal(&alg, &[vec![1.0, -1.0]]).expect("valid grading");
        (alg, g)
    }

    pub fn algebra(&self) -> &FdAlgebra {
        &self.algebra
    }

    pub fn sign_unitaries(&self) -> &[CMat] {
        &self.sign_unitaries
    }

    /// Applies the grading automorphism at any level: conjugation by `1_k ⊗ u_i`.
    pub fn apply(&self, x: &AlgElement) -> Result<AlgElement, AlgebraError> {
        if x.algebra() != &self.algebra {
            return Err(self.algebra.mismatch(x.algebra()));
        }
        let k = x.level();
        let blocks = x
            .blocks()
            .iter()
            .zip(&self.sign_unitaries)
            .map(|(blk, u)| {
                let lift = linalg::kron(&linalg::identity(k), u);
                &lift * blk * lift.adjoint()
            })
            .collect();
        Ok(AlgElement {
            algebra: self.algebra.clone(),
            level: k,
            blocks,
        })
    }

    pub fn project(&self, x: &AlgElement, parity: Parity) -> Result<AlgElement, AlgebraError> {
        let sx = self.apply(x)?;
        let half = Complex64::new(0.5, 0.0);
        match parity {
            Parity::Even => Ok(x.add(&sx)?.scale(half)),
            Parity::Odd => Ok(x.sub(&sx)?.scale(half)),
        }
    }

    pub fn is_odd(&self, x: &AlgElement, tol: f64) -> Result<bool, AlgebraError> {
        let even = self.project(x, Parity::Even)?;
        Ok(even.opnorm() <= tol)
    }
}

/// Projects onto the even or odd part of an inner grading.
pub fn grading_project(
    x: &AlgElement,
    g: &Grading,
    parity: Parity,
) -> Result<AlgElement, AlgebraError> {
    g.project(x, parity)
}

/// From two linearly independent tuples with equal Gram matrices, produces a
/// unitary `U` with `U ξ_i = η_i`.
///
/// The remaining freedom is pinned deterministically: Gram–Schmidt in index
/// order on both tuples, then completion by orthonormalizing the standard
/// basis vectors against the span, again in index order.
pub fn gram_intertwiner(xs: &[CVec], ys: &[CVec], tol: f64) -> Result<CMat, AlgebraError> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(AlgebraError::InvalidArgument(
            "need equally many (and at least one) vectors on both sides".into(),
        ));
    }
    let dim = xs
        .iter()
        .chain(ys.iter())
        .map(|v| v.len())
        .max()
        .unwrap()
        .max(xs.len());
    let pad = |v: &CVec| -> CVec {
        let mut w = CVec::zeros(dim);
        w.rows_mut(0, v.len()).copy_from(v);
        w
    };
    let xs: Vec<CVec> = xs.iter().map(pad).collect();
    let ys: Vec<CVec> = ys.iter().map(pad).collect();

    let gx = linalg::gram(&xs);
    let gy = linalg::gram(&ys);
    let gdev = linalg::opnorm(&(&gx - &gy));
    if gdev > tol {
        return Err(AlgebraError::GramMismatch {
            deviation: gdev,
            tol,
        });
    }

    // Gram–Schmidt on xs, recording the coefficient matrix, then reuse the
    // same coefficients on ys; equal Grams make the images orthonormal too.
    let k = xs.len();
    let mut xo: Vec<CVec> = Vec::with_capacity(k);
    let mut yo: Vec<CVec> = Vec::with_capacity(k);
    for i in 0..k {
        let mut xv = xs[i].clone();
        let mut yv = ys[i].clone();
        for j in 0..xo.len() {
            let c = xo[j].dotc(&xs[i]);
            xv -= xo[j].map(|z| z * c);
            yv -= yo[j].map(|z| z * c);
        }
        let nx = xv.norm();
        if nx <= 1e3 * f64::EPSILON * (1.0 + xs[i].norm()) {
            return Err(AlgebraError::RankDeficient(format!(
                "vector {} lies in the span of its predecessors",
                i
            )));
        }
        xo.push(xv.map(|z| z / Complex64::new(nx, 0.0)));
        yo.push(yv.map(|z| z / Complex64::new(nx, 0.0)));
    }

    // Deterministic completion: orthonormalize standard basis vectors against
    // the span, in index order.
    let complete = |basis: &mut Vec<CVec>| {
        let mut e_idx = 0usize;
        while basis.len() < dim && e_idx < dim {
            let mut v = CVec::zeros(dim);
            v[e_idx] = Complex64::new(1.0, 0.0);
            for b in basis.iter() {
                let c = b.dotc(&v);
                v -= b.map(|z| z * c);
            }
            let n = v.norm();
            if n > 1e-8 {
                basis.push(v.map(|z| z / Complex64::new(n, 0.0)));
            }
            e_idx += 1;
        }
    };
    complete(&mut xo);
    complete(&mut yo);
    if xo.len() != dim || yo.len() != dim {
        return Err(AlgebraError::RankDeficient(
            "failed to complete orthonormal bases".into(),
        ));
    }

    // U = Σ_i |yo_i⟩⟨xo_i|
    let mut u = CMat::zeros(dim, dim);
    for i in 0..dim {
        for r in 0..dim {
            for c in 0..dim {
                u[(r, c)] += yo[i][r] * xo[i][c].conj();
            }
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cplx, re};

    #[test]
    fn build_algebra_examples() {
        let m2 = FdAlgebra::new(&[2]).unwrap();
        assert_eq!(m2.total_dim(), 4);
        assert_eq!(m2.label(), "M2");
        assert!(!m2.is_commutative());

        let c2 = FdAlgebra::new(&[1, 1]).unwrap();
        assert!(c2.is_commutative());
        assert_eq!(c2.label(), "C2");

        let m23 = FdAlgebra::new(&[2, 3]).unwrap();
        assert_eq!(m23.total_dim(), 13);
        assert_eq!(m23.label(), "M2+M3");

        assert!(FdAlgebra::new(&[]).is_err());
        assert!(FdAlgebra::new(&[2, 0]).is_err());
    }

    #[test]
    fn positivity_basics() {
        let m2 = FdAlgebra::full(2);
        let one = AlgElement::unit(&m2, 3);
        assert!(is_positive_alg(&one, 1e-9).unwrap());

        let diag = AlgElement::from_blocks(
            &m2,
            1,
            vec![CMat::from_row_slice(
                2,
                2,
                &[re(1.0), re(0.0), re(0.0), re(-1.0)],
            )],
        )
        .unwrap();
        assert!(!is_positive_alg(&diag, 1e-9).unwrap());

        let skew = AlgElement::from_blocks(
            &m2,
            1,
            vec![CMat::from_row_slice(
                2,
                2,
                &[re(0.0), re(1.0), re(-1.0), re(0.0)],
            )],
        )
        .unwrap();
        assert!(matches!(
            is_positive_alg(&skew, 1e-9),
            Err(AlgebraError::NotSelfAdjoint { .. })
        ));
    }

    #[test]
    fn squares_are_positive() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let alg = FdAlgebra::new(&[2, 3]).unwrap();
        for _ in 0..20 {
            let x = crate::sample::ginibre_element(&alg, 2, &mut rng);
            let sq = x.adjoint().mul(&x).unwrap();
            assert!(is_positive_alg(&sq, 1e-9).unwrap());
        }
    }

    #[test]
    fn embed_left_matches_kron_example() {
        let m2 = FdAlgebra::full(2);
        let a = AlgElement::from_blocks(
            &m2,
            1,
            vec![CMat::from_row_slice(
                2,
                2,
                &[re(1.0), re(0.0), re(0.0), re(0.0)],
            )],
        )
        .unwrap();
        let e = embed_left(&a, &m2);
        let expect = CMat::from_diagonal(&CVec::from_vec(vec![re(1.0), re(1.0), re(0.0), re(0.0)]));
        assert!((e.block(0) - expect).norm() < 1e-14);

        let one = AlgElement::unit(&m2, 1);
        let e1 = embed_left(&one, &m2);
        assert!((e1.block(0) - linalg::identity(4)).norm() < 1e-14);
    }

    #[test]
    fn embedded_sum_spectrum_is_pair_sums() {
        // commuting diagonal a, b: spectrum of a⊗1 + 1⊗b is all pairwise sums.
        let m2 = FdAlgebra::full(2);
        let m3 = FdAlgebra::full(3);
        let a_diag = [0.3, -1.2];
        let b_diag = [0.9, 0.1, -0.5];
        let a = AlgElement::from_blocks(
            &m2,
            1,
            vec![CMat::from_diagonal(&CVec::from_iterator(
                2,
                a_diag.iter().map(|&x| re(x)),
            ))],
        )
        .unwrap();
        let b = AlgElement::from_blocks(
            &m3,
            1,
            vec![CMat::from_diagonal(&CVec::from_iterator(
                3,
                b_diag.iter().map(|&x| re(x)),
            ))],
        )
        .unwrap();
        let s = embed_sum(&a, &b).unwrap();
        let got = linalg::herm_eigvals(s.block(0));
        let mut expect: Vec<f64> = a_diag
            .iter()
            .flat_map(|&x| b_diag.iter().map(move |&y| x + y))
            .collect();
        expect.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn embeddings_are_unital_multiplicative() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let a_alg = FdAlgebra::new(&[2, 1]).unwrap();
        let b_alg = FdAlgebra::full(2);
        let one = AlgElement::unit(&a_alg, 1);
        let flat = TensorAlgebra::new(&a_alg, &b_alg).flattened();
        assert!(
            (embed_left(&one, &b_alg)
                .sub(&AlgElement::unit(&flat, 1))
                .unwrap())
            .opnorm()
                < 1e-14
        );
        for _ in 0..100 {
            let x = crate::sample::ginibre_element(&a_alg, 1, &mut rng);
            let y = crate::sample::ginibre_element(&a_alg, 1, &mut rng);
            let lhs = embed_left(&x.mul(&y).unwrap(), &b_alg);
            let rhs = embed_left(&x, &b_alg).mul(&embed_left(&y, &b_alg)).unwrap();
            assert!(lhs.sub(&rhs).unwrap().opnorm() < 1e-10);
            let xr = crate::sample::ginibre_element(&b_alg, 1, &mut rng);
            let yr = crate::sample::ginibre_element(&b_alg, 1, &mut rng);
            let lhs = embed_right(&xr.mul(&yr).unwrap(), &a_alg);
            let rhs = embed_right(&xr, &a_alg)
                .mul(&embed_right(&yr, &a_alg))
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().opnorm() < 1e-10);
        }
    }

    #[test]
    fn grading_projections() {
        let (m2, g) = Grading::qubit_standard();
        // off-diagonal x is odd: u x u* = −x
        let x = AlgElement::from_blocks(
            &m2,
            1,
            vec![CMat::from_row_slice(
                2,
                2,
                &[re(0.0), re(1.0), re(1.0), re(0.0)],
            )],
        )
        .unwrap();
        let odd = g.project(&x, Parity::Odd).unwrap();
        assert!(odd.sub(&x).unwrap().opnorm() < 1e-14);
        let even = g.project(&x, Parity::Even).unwrap();
        assert!(even.opnorm() < 1e-14);

        // diagonal commutes with u: odd part vanishes
        let d = AlgElement::from_blocks(
            &m2,
            1,
            vec![CMat::from_row_slice(
                2,
                2,
                &[re(2.0), re(0.0), re(0.0), re(-3.0)],
            )],
        )
        .unwrap();
        assert!(g.project(&d, Parity::Odd).unwrap().opnorm() < 1e-14);

        // invalid grading: u² ≠ 1
        let bad = Grading::diagonal(&m2, &[vec![1.0, 0.5]]);
        assert!(bad.is_err());
    }

    #[test]
    fn grading_is_star_automorphism_and_reassembles() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let alg = FdAlgebra::new(&[2, 3]).unwrap();
        let g = Grading::diagonal(&alg, &[vec![1.0, -1.0], vec![1.0, 1.0, -1.0]]).unwrap();
        for _ in 0..30 {
            let x = crate::sample::ginibre_element(&alg, 2, &mut rng);
            let y = crate::sample::ginibre_element(&alg, 2, &mut rng);
            let lhs = g.apply(&x.mul(&y).unwrap()).unwrap();
            let rhs = g.apply(&x).unwrap().mul(&g.apply(&y).unwrap()).unwrap();
            assert!(lhs.sub(&rhs).unwrap().opnorm() < 1e-10);
            let star = g.apply(&x.adjoint()).unwrap();
            assert!(star.sub(&g.apply(&x).unwrap().adjoint()).unwrap().opnorm() < 1e-12);
            // even + odd reassembles
            let e = g.project(&x, Parity::Even).unwrap();
            let o = g.project(&x, Parity::Odd).unwrap();
            assert!(e.add(&o).unwrap().sub(&x).unwrap().opnorm() < 1e-12);
            // odd·odd is even
            let oo = o.mul(&o).unwrap();
            assert!(g.project(&oo, Parity::Odd).unwrap().opnorm() < 1e-10);
            // grading preserves positivity both ways
            let sq = x.adjoint().mul(&x).unwrap();
            assert!(is_positive_alg(&g.apply(&sq).unwrap(), 1e-9).unwrap());
        }
    }

    #[test]
    fn gram_intertwiner_identity_and_permutation() {
        let e1 = CVec::from_vec(vec![re(1.0), re(0.0)]);
        let e2 = CVec::from_vec(vec![re(0.0), re(1.0)]);
        let u = gram_intertwiner(&[e1.clone(), e2.clone()], &[e1.clone(), e2.clone()], 1e-10)
            .unwrap();
        assert!((&u - linalg::identity(2)).norm() < 1e-12);

        let p = gram_intertwiner(&[e1.clone(), e2.clone()], &[e2.clone(), e1.clone()], 1e-10)
            .unwrap();
        let expect = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        assert!((&p - expect).norm() < 1e-12);
    }

    #[test]
    fn gram_intertwiner_recovers_unitary_images() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for dim in [3usize, 5, 8] {
            let v = crate::sample::haar_unitary(dim, &mut rng);
            let xs: Vec<CVec> = (0..3)
                .map(|_| crate::sample::ginibre_vector(dim, &mut rng))
                .collect();
            let ys: Vec<CVec> = xs.iter().map(|x| &v * x).collect();
            let u = gram_intertwiner(&xs, &ys, 1e-8).unwrap();
            assert!(linalg::opnorm(&(u.adjoint() * &u - linalg::identity(dim))) < 1e-8);
            for (x, y) in xs.iter().zip(&ys) {
                assert!((&u * x - y).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn gram_intertwiner_rejects_bad_inputs() {
        let e1 = CVec::from_vec(vec![re(1.0), re(0.0)]);
        let e2 = CVec::from_vec(vec![re(0.0), re(1.0)]);
        let long = CVec::from_vec(vec![re(0.0), re(2.0)]);
        assert!(matches!(
            gram_intertwiner(&[e1.clone(), e2.clone()], &[e1.clone(), long], 1e-10),
            Err(AlgebraError::GramMismatch { .. })
        ));
        let dep = CVec::from_vec(vec![re(2.0), re(0.0)]);
        assert!(matches!(
            gram_intertwiner(&[e1.clone(), dep.clone()], &[e1.clone(), dep], 1e-10),
            Err(AlgebraError::RankDeficient(_))
        ));
    }

    #[test]
    fn gram_intertwiner_pads_mixed_dimensions() {
        let x1 = CVec::from_vec(vec![re(1.0)]);
        let y1 = CVec::from_vec(vec![re(0.0), cplx(0.0, 1.0)]);
        let u = gram_intertwiner(&[x1], &[y1.clone()], 1e-10).unwrap();
        assert_eq!(u.nrows(), 2);
        let padded = CVec::from_vec(vec![re(1.0), re(0.0)]);
        assert!((&u * padded - y1).norm() < 1e-12);
        assert!(linalg::opnorm(&(u.adjoint() * &u - linalg::identity(2))) < 1e-12);
    }
}
