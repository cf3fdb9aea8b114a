//! Tour of the algebra layer: building block algebras, positivity by
//! eigenvalues, tensor embeddings, Z₂-gradings, and the Gram intertwiner.
//!
//! Run with `cargo run --example algebra_tour`.

use nalgebra::DVector;
use num_complex::Complex64;
use opsum::algebra::{
    build_algebra, embed_sum, gram_intertwiner, is_positive_alg, AlgElement, FdAlgebra, Grading,
    Parity,
};
use opsum::linalg::{self, CMat, CVec};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let re = |x: f64| Complex64::new(x, 0.0);

    // Algebras are direct sums of full matrix blocks.
    let m2 = build_algebra(&[2]).unwrap();
    let m23 = build_algebra(&[2, 3]).unwrap();
    println!("{}: dim {}", m2.label(), m2.total_dim());
    println!(
        "{}: dim {}, commutative: {}",
        m23.label(),
        m23.total_dim(),
        m23.is_commutative()
    );

    // Positivity is a blockwise eigenvalue test.
    let x = AlgElement::from_blocks(
        &m2,
        1,
        vec![CMat::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])],
    )
    .unwrap();
    println!(
        "diag(1,−1) positive: {}",
        is_positive_alg(&x, 1e-9).unwrap()
    );

    // Embedded sums of commuting diagonals have pair-sum spectra.
    let a = AlgElement::from_blocks(
        &m2,
        1,
        vec![CMat::from_diagonal(&DVector::from_vec(vec![re(0.5), re(-0.25)]))],
    )
    .unwrap();
    let b = AlgElement::from_blocks(
        &m2,
        1,
        vec![CMat::from_diagonal(&DVector::from_vec(vec![re(1.0), re(0.0)]))],
    )
    .unwrap();
    let s = embed_sum(&a, &b).unwrap();
    println!(
        "spectrum of a⊗1 + 1⊗b: {:?}",
        linalg::herm_eigvals(s.block(0))
    );

    // Gradings split elements into even and odd parts.
    let (alg, g) = Grading::qubit_standard();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let y = opsum::sample::random_herm_element(&alg, 1, &mut rng);
    let even = g.project(&y, Parity::Even).unwrap();
    let odd = g.project(&y, Parity::Odd).unwrap();
    println!(
        "random Hermitian splits: ‖even‖ = {:.4}, ‖odd‖ = {:.4}, reassembly error {:.2e}",
        even.opnorm(),
        odd.opnorm(),
        even.add(&odd).unwrap().sub(&y).unwrap().opnorm()
    );

    // Two tuples with equal Gram matrices are related by a unitary.
    let v = opsum::sample::haar_unitary(4, &mut rng);
    let xs: Vec<CVec> = (0..2)
        .map(|_| opsum::sample::ginibre_vector(4, &mut rng))
        .collect();
    let ys: Vec<CVec> = xs.iter().map(|x| &v * x).collect();
    let u = gram_intertwiner(&xs, &ys, 1e-8).unwrap();
    let worst = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (&u * x - y).norm())
        .fold(0.0, f64::max);
    println!(
        "gram intertwiner: max ‖Uξ − η‖ = {:.2e}, unitarity defect {:.2e}",
        worst,
        linalg::opnorm(&(u.adjoint() * &u - linalg::identity(4)))
    );

    let _ = FdAlgebra::new(&[1, 1]).unwrap();
}
