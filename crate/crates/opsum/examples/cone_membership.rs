//! Cone membership in the two structures on `A ⊕₁ B`: the tensor-product
//! test with its eigenvalue margin, the coproduct test with its scalar
//! shift `λ`, and the compatible-pair witness on a negative element.
//!
//! At level 1 the two tests always agree; this demo sweeps random
//! self-adjoint pairs and reports the agreement count.
//!
//! Run with `cargo run --example cone_membership`.

use opsum::opsys::{
    is_positive_coproduct, is_positive_min, min_structure_margin, SumElement,
};
use opsum::sample;
use opsum::FdAlgebra;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let m2 = FdAlgebra::full(2);
    let mut rng = ChaCha12Rng::seed_from_u64(42);

    // one detailed instance
    let a = sample::random_herm_element(&m2, 1, &mut rng);
    let b = sample::random_herm_element(&m2, 1, &mut rng);
    let x = SumElement::new(a, b).unwrap();
    let tensor_margin = min_structure_margin(&x).unwrap();
    let chk = is_positive_coproduct(&x, 1e-8).unwrap();
    println!("random self-adjoint pair on M₂ ⊕₁ M₂ at level 1:");
    println!("  tensor-structure margin (smallest eigenvalue): {tensor_margin:+.6}");
    println!("  coproduct margin (best uniform slack):         {:+.6}", chk.margin);
    match (&chk.lambda, &chk.witness) {
        (Some(lam), _) if chk.positive => {
            println!("  positive; feasible scalar shift λ = {lam:.4}");
        }
        (_, Some(w)) => {
            println!(
                "  negative; compatible pair witnesses value {:.6} (marginal gap {:.1e})",
                w.value(&x).unwrap(),
                w.marginal_gap
            );
        }
        _ => {}
    }

    // agreement sweep
    let mut agree = 0usize;
    let total = 200usize;
    for _ in 0..total {
        let a = sample::random_herm_element(&m2, 1, &mut rng);
        let b = sample::random_herm_element(&m2, 1, &mut rng);
        let x = SumElement::new(a, b).unwrap();
        let min_pos = is_positive_min(&x).unwrap();
        let cop = is_positive_coproduct(&x, 1e-8).unwrap();
        if min_pos == cop.positive {
            agree += 1;
        }
    }
    println!("level-1 agreement over {total} random pairs: {agree}/{total}");
}
