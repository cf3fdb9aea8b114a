//! The states layer: Bell states and their marginals, purity-based
//! entanglement classification, partial-transpose separability with exact
//! regimes, and the bipartite-marginal implication on tripartite states.
//!
//! Run with `cargo run --example entanglement_toolbox`.

use opsum::sample;
use opsum::states::{
    bell_state, classify_puresep, product_state, reduce, separability_status, tritobi_check,
    Cut, PuresepClass, SepStatus, State,
};
use opsum::FdAlgebra;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn basis(i: usize, d: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d);
    v[i] = Complex64::new(1.0, 0.0);
    v
}

fn main() {
    let m2 = FdAlgebra::full(2);
    let c2 = FdAlgebra::new(&[1, 1]).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(3);

    // Bell state: pure, maximally mixed marginal, hence entangled; the
    // partial transpose confirms it with eigenvalue −1/2.
    let bell = bell_state(
        &m2,
        &m2,
        0,
        0,
        (&basis(0, 2), &basis(1, 2)),
        (&basis(0, 2), &basis(1, 2)),
    )
    .unwrap();
    println!("Bell state on M₂⊗M₂:");
    println!("  pure: {}", bell.is_pure());
    println!(
        "  left marginal eigenvalues: {:?}",
        reduce(&bell, &[0]).unwrap().eigenvalues()
    );
    println!("  purity classification: {:?}", discr(&classify_puresep(&bell).unwrap()));
    match separability_status(&bell, &Cut::bipartite()).unwrap() {
        SepStatus::Entangled { min_pt_eig } => {
            println!("  partial transpose: entangled, min eigenvalue {min_pt_eig:+.4}")
        }
        other => println!("  partial transpose: {other:?}"),
    }

    // A state with pure left marginal is automatically a product.
    let pure = sample::random_pure_state(&[m2.clone()], 1, &mut rng);
    let noisy = sample::random_state(&[m2.clone()], 1, &mut rng);
    let gamma = product_state(&pure, &noisy).unwrap();
    if let PuresepClass::Product { trace_error, .. } = classify_puresep(&gamma).unwrap() {
        println!("\npure-marginal state reconstructs as a product, trace error {trace_error:.1e}");
    }

    // With a commutative factor every state is separable, with an explicit
    // decomposition read off the block structure.
    let mixed = sample::random_state(&[c2.clone(), m2.clone()], 1, &mut rng);
    if let SepStatus::Separable(Some(dec)) = separability_status(&mixed, &Cut::bipartite()).unwrap()
    {
        let back = dec.reassemble().unwrap();
        println!(
            "random state on ℂ²⊗M₂: separable as {} explicit product terms, reassembly error {:.1e}",
            dec.terms.len(),
            back.trace_distance(&mixed).unwrap()
        );
    }

    // Tripartite: an entangled A⊗B marginal forces entanglement across
    // A | [B⊗C].
    let psi: State = sample::random_state(&[c2.clone()], 1, &mut rng);
    let tri = product_state(&bell, &psi).unwrap();
    println!(
        "\nBell ⊗ ψ: marginal-entanglement implication holds: {}",
        tritobi_check(&tri).unwrap()
    );
    let mut all = true;
    for _ in 0..100 {
        let g = sample::random_state(&[m2.clone(), m2.clone(), c2.clone()], 1, &mut rng);
        all &= tritobi_check(&g).unwrap();
    }
    println!("implication on 100 random tripartite states: {all}");
}

fn discr(c: &PuresepClass) -> &'static str {
    match c {
        PuresepClass::Entangled => "entangled",
        PuresepClass::Product { .. } => "product",
        PuresepClass::Inconclusive => "inconclusive",
    }
}
