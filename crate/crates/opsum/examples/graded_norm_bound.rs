//! Factor-2 comparison of the induced norms on graded sums: for odd `a`
//! (with respect to a Z₂-grading of A) and arbitrary `b`, the coproduct norm
//! is sandwiched between the tensor norm and twice the tensor norm. The
//! mechanism is the sign symmetry ‖a + b‖ = ‖−a + b‖ of both norms.
//!
//! Run with `cargo run --example graded_norm_bound`.

use opsum::algebra::Grading;
use opsum::opsys::{norm_coproduct, norm_min, symmetry_check, NormKind, SumElement};
use opsum::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let (alg, grading) = Grading::qubit_standard();
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let samples = 25usize;
    println!("graded M₂ (u = diag(1,−1)), {samples} samples per level\n");
    println!("{:>5} {:>6} {:>10} {:>10} {:>8}", "idx", "level", "‖·‖_min", "‖·‖_coprod", "ratio");
    let mut max_ratio: f64 = 0.0;
    for level in [1usize, 2] {
        for idx in 0..samples {
            let a = sample::random_odd_element(&grading, level, &mut rng);
            let b = sample::random_herm_element(&alg, level, &mut rng);
            let x = SumElement::new(a, b).unwrap();
            let nm = norm_min(&x);
            let nc = norm_coproduct(&x, 1e-8).unwrap();
            let ratio = nc / nm;
            max_ratio = max_ratio.max(ratio);
            assert!(nm <= nc + 1e-7 && nc <= 2.0 * nm + 1e-6);
            assert!(symmetry_check(&x, &grading, NormKind::Min).unwrap());
            assert!(symmetry_check(&x, &grading, NormKind::Coproduct).unwrap());
            if idx < 5 {
                println!("{idx:>5} {level:>6} {nm:>10.6} {nc:>10.6} {ratio:>8.4}");
            }
        }
    }
    println!("…");
    println!("\nmax observed ratio: {max_ratio:.4} (bound: 2; both symmetry checks passed)");
}
