//! Seeded random generators for elements, states, and compatible pairs.
//!
//! All experiment-facing sampling goes through these so runs are reproducible
//! from a single `u64` seed.

use crate::algebra::{AlgElement, FdAlgebra, Grading, Parity};
use crate::linalg::{self, CMat, CVec};
use crate::states::State;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn ginibre_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn ginibre_vector(dim: usize, rng: &mut impl Rng) -> CVec {
    CVec::from_fn(dim, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Gaussian Hermitian (GUE-normalized) matrix.
pub fn gue_matrix(n: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre_matrix(n, n, rng);
    (&g + g.adjoint()).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre_matrix(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / Complex64::new(d.norm(), 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random element of `M_k(A)` with iid complex Gaussian entries per block.
pub fn ginibre_element(alg: &FdAlgebra, level: usize, rng: &mut impl Rng) -> AlgElement {
    let blocks = alg
        .block_sizes()
        .iter()
        .map(|&n| ginibre_matrix(level * n, level * n, rng))
        .collect();
    AlgElement::from_blocks(alg, level, blocks).expect("shapes match")
}

/// Random self-adjoint element of `M_k(A)`, normalized to unit operator norm.
pub fn random_herm_element(alg: &FdAlgebra, level: usize, rng: &mut impl Rng) -> AlgElement {
    let blocks: Vec<CMat> = alg
        .block_sizes()
        .iter()
        .map(|&n| gue_matrix(level * n, rng))
        .collect();
    let x = AlgElement::from_blocks(alg, level, blocks).expect("shapes match");
    let norm = x.opnorm();
    if norm > 0.0 {
        x.scale(Complex64::new(1.0 / norm, 0.0))
    } else {
        x
    }
}

/// Random odd self-adjoint element for a grading, unit operator norm.
pub fn random_odd_element(g: &Grading, level: usize, rng: &mut impl Rng) -> AlgElement {
    let x = random_herm_element(g.algebra(), level, rng);
    let odd = g.project(&x, Parity::Odd).expect("grading matches algebra");
    let norm = odd.opnorm();
    if norm > 1e-12 {
        odd.scale(Complex64::new(1.0 / norm, 0.0))
    } else {
        odd
    }
}

/// Hilbert–Schmidt-ensemble density on `M_k(⊗ factors)`: blockwise `G G†`
/// normalized by the total trace.
pub fn random_state(factors: &[FdAlgebra], level: usize, rng: &mut impl Rng) -> State {
    let sizes = State::block_dims(factors, level);
    let mut blocks: Vec<CMat> = sizes
        .iter()
        .map(|&d| {
            let g = ginibre_matrix(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    let total: f64 = blocks.iter().map(|b| linalg::trace(b).re).sum();
    for b in &mut blocks {
        *b = b.scale(1.0 / total);
    }
    State::new(factors, level, blocks).expect("normalized PSD blocks")
}

/// Random pure state (rank-1 density) supported across all blocks.
pub fn random_pure_state(factors: &[FdAlgebra], level: usize, rng: &mut impl Rng) -> State {
    let sizes = State::block_dims(factors, level);
    let total: usize = sizes.iter().sum();
    let v = ginibre_vector(total, rng);
    let v = v.map(|z| z / Complex64::new(v.norm(), 0.0));
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut off = 0usize;
    for &d in &sizes {
        let part = v.rows(off, d).into_owned();
        let mut b = CMat::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                b[(r, c)] = part[r] * part[c].conj();
            }
        }
        blocks.push(b);
        off += d;
    }
    State::new(factors, level, blocks).expect("pure density")
}

/// Draws `(α, β)` on `M_k(A)`, `M_k(B)` with exactly matching `M_k` marginals.
///
/// Both densities are Hilbert–Schmidt samples; the level marginal of the
/// second is then transported onto the first one's by conjugating with
/// `μ_α^{1/2} μ_β^{-1/2} ⊗ 1` (pseudo-inverted square root when singular),
/// which preserves the trace exactly.
pub fn random_compatible_pair(
    a_alg: &FdAlgebra,
    b_alg: &FdAlgebra,
    level: usize,
    rng: &mut impl Rng,
) -> (State, State) {
    let alpha = random_state(std::slice::from_ref(a_alg), level, rng);
    let beta0 = random_state(std::slice::from_ref(b_alg), level, rng);
    let mu_a = alpha.level_marginal();
    let mu_b = beta0.level_marginal();
    let x = herm_sqrt(&mu_a) * herm_pinv_sqrt(&mu_b);
    let blocks: Vec<CMat> = beta0
        .blocks()
        .iter()
        .zip(b_alg.block_sizes())
        .map(|(blk, &m)| {
            let lift = linalg::kron(&x, &linalg::identity(m));
            let moved = &lift * blk * lift.adjoint();
            linalg::hermitian_part(&moved)
        })
        .collect();
    let total: f64 = blocks.iter().map(|b| linalg::trace(b).re).sum();
    let blocks: Vec<CMat> = blocks.into_iter().map(|b| b.scale(1.0 / total)).collect();
    let beta = State::new(std::slice::from_ref(b_alg), level, blocks).expect("corrected density");
    (alpha, beta)
}

/// Coproduct-positive sum element by construction: `(p + λ⊗1, q − λ⊗1)`
/// with random PSD `p`, `q` and a random scalar shift `λ`.
pub fn coproduct_positive_element(
    a_alg: &FdAlgebra,
    b_alg: &FdAlgebra,
    level: usize,
    rng: &mut impl Rng,
) -> crate::opsys::SumElement {
    fn psd_elem(alg: &FdAlgebra, level: usize, rng: &mut impl Rng) -> AlgElement {
        let blocks: Vec<CMat> = alg
            .block_sizes()
            .iter()
            .map(|&n| {
                let g = ginibre_matrix(level * n, level * n, rng);
                (&g * g.adjoint()).scale(1.0 / (level * n) as f64)
            })
            .collect();
        AlgElement::from_blocks(alg, level, blocks).expect("shapes")
    }
    let p = psd_elem(a_alg, level, rng);
    let q = psd_elem(b_alg, level, rng);
    let lam = gue_matrix(level, rng).scale(0.3);
    let shift = |elem: &AlgElement, sign: f64| -> AlgElement {
        let blocks = elem
            .blocks()
            .iter()
            .zip(elem.algebra().block_sizes())
            .map(|(blk, &n)| blk + linalg::kron(&lam, &linalg::identity(n)).map(|z| z * sign))
            .collect();
        AlgElement::from_blocks(elem.algebra(), level, blocks).expect("shapes")
    };
    crate::opsys::SumElement::new(shift(&p, 1.0), shift(&q, -1.0)).expect("levels match")
}

pub fn herm_sqrt(m: &CMat) -> CMat {
    let (evs, vecs) = linalg::herm_eig(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        evs.len(),
        evs.iter().map(|&x| Complex64::new(x.max(0.0).sqrt(), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

pub fn herm_pinv_sqrt(m: &CMat) -> CMat {
    let (evs, vecs) = linalg::herm_eig(m);
    let top = evs.iter().cloned().fold(0.0, f64::max);
    let cutoff = 1e-12 * top.max(1.0);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        evs.len(),
        evs.iter().map(|&x| {
            if x > cutoff {
                Complex64::new(1.0 / x.sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
    ));
    &vecs * d * vecs.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let u = haar_unitary(4, &mut rng);
        assert!(linalg::opnorm(&(u.adjoint() * &u - linalg::identity(4))) < 1e-12);
        let mut rng2 = ChaCha12Rng::seed_from_u64(1);
        let u2 = haar_unitary(4, &mut rng2);
        assert!((u - u2).norm() == 0.0);
    }

    #[test]
    fn compatible_pair_marginals_match_exactly() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let a = FdAlgebra::new(&[2, 1]).unwrap();
        let b = FdAlgebra::full(2);
        for _ in 0..20 {
            let (alpha, beta) = random_compatible_pair(&a, &b, 2, &mut rng);
            let gap = linalg::trace_norm(&(alpha.level_marginal() - beta.level_marginal()));
            assert!(gap < 1e-12, "gap {}", gap);
            assert!((alpha.total_trace() - 1.0).abs() < 1e-12);
            assert!((beta.total_trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_samples_are_odd_and_normalized() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let (_, g) = Grading::qubit_standard();
        for _ in 0..10 {
            let a = random_odd_element(&g, 2, &mut rng);
            assert!(g.is_odd(&a, 1e-10).unwrap());
            assert!((a.opnorm() - 1.0).abs() < 1e-10);
            assert!(a.is_self_adjoint(1e-10));
        }
    }
}
