//! The quantum marginal problem for a pair of states sharing an ancilla:
//! does a joint state with both prescribed marginals exist?
//!
//! Compatible random pairs at level 1 always extend (a product works);
//! the Bell-derived pair at level 2 cannot (entanglement monogamy), and the
//! refusal comes with a dual observable certificate.
//!
//! Run with `cargo run --example quantum_marginal`.

use opsum::opsys::{is_tensor_compatible, TensorCompat};
use opsum::sample;
use opsum::states::{bell_level2_state, reduce};
use opsum::FdAlgebra;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let m2 = FdAlgebra::full(2);
    let mut rng = ChaCha12Rng::seed_from_u64(7);

    // exactly-compatible random pair at level 1: always extendable
    let (alpha, beta) = sample::random_compatible_pair(&m2, &m2, 1, &mut rng);
    match is_tensor_compatible(&alpha, &beta, 1e-8).unwrap() {
        TensorCompat::Yes(gamma) => {
            let ra = reduce(&gamma, &[0]).unwrap();
            let rb = reduce(&gamma, &[1]).unwrap();
            println!(
                "level-1 random pair: joint state found; marginal errors {:.1e} / {:.1e}",
                ra.trace_distance(&alpha).unwrap(),
                rb.trace_distance(&beta).unwrap()
            );
        }
        other => panic!("unexpected answer {other:?}"),
    }

    // Bell-derived pair at level 2: α is maximally entangled with the
    // ancilla, β is pure with the same ancilla marginal: no joint state
    let alpha = bell_level2_state(&m2, 0).unwrap();
    let beta = bell_level2_state(&m2, 0).unwrap();
    println!(
        "Bell pair marginal gap: {:.1e}",
        opsum::linalg::trace_norm(&(alpha.level_marginal() - beta.level_marginal()))
    );
    match is_tensor_compatible(&alpha, &beta, 1e-8).unwrap() {
        TensorCompat::No(cert) => {
            let chk = cert.verify(&alpha, &beta, 1e-7).unwrap();
            println!("level-2 Bell pair: no joint state exists");
            println!(
                "  certificate: lifted observable min eigenvalue {:+.2e}, violation {:.4}",
                chk.joint_min_eig, chk.recomputed_violation
            );
        }
        other => panic!("unexpected answer {other:?}"),
    }
}
