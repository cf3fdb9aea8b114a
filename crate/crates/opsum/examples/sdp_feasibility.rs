//! The SDP engine on its own: eigenvalue optimization, maximum-margin
//! feasibility, verifiable infeasibility certificates, and the JSON
//! dump/load used to reproduce solver instances.
//!
//! Run with `cargo run --example sdp_feasibility`.

use opsum::linalg;
use opsum::sample;
use opsum::sdp::{HermExpr, SdpOptions, SdpProblem, SdpStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let opts = SdpOptions::default();
    let mut rng = ChaCha12Rng::seed_from_u64(5);

    // min t s.t. tI − M ⪰ 0 computes the largest eigenvalue
    let m = sample::gue_matrix(5, &mut rng);
    let lam = *linalg::herm_eigvals(&m).last().unwrap();
    let mut p = SdpProblem::new();
    let t = p.free_scalar();
    let expr =
        HermExpr::scalar_times(t, linalg::identity(5)).add(&HermExpr::constant(-m.clone()));
    p.psd_constraint(&expr);
    p.minimize_free(vec![(t, 1.0)], 0.0);
    let r = p.solve(&opts).unwrap();
    println!(
        "λ_max SDP: status {:?}, t* = {:.9}, eigenvalue = {:.9}, |error| = {:.1e}",
        r.status,
        r.objective.unwrap(),
        lam,
        (r.objective.unwrap() - lam).abs()
    );

    // feasibility with the maximum-margin semantics: the density constraint
    // {ρ ⪰ 0, tr ρ = 1} returns the maximally mixed point
    let mut p = SdpProblem::new();
    let blk = p.psd_block(3);
    p.add_row(vec![(blk.0, linalg::identity(3))], vec![], 1.0);
    let r = p.check_feasible(&opts).unwrap();
    println!(
        "density feasibility: status {:?}, margin {:.6} (best attainable smallest eigenvalue)",
        r.status,
        r.margin.unwrap()
    );

    // infeasibility comes with a Farkas certificate that re-verifies from
    // the problem data alone
    let mut p = SdpProblem::new();
    let blk = p.psd_block(2);
    p.add_row(vec![(blk.0, linalg::identity(2))], vec![], -1.0);
    let r = p.solve(&opts).unwrap();
    assert_eq!(r.status, SdpStatus::Infeasible);
    let cert = r.certificate.unwrap();
    let chk = cert.verify(&p, 1e-8);
    println!(
        "negative-trace density: infeasible; certificate margin {:.4}, re-verified: {}",
        cert.margin, chk.ok
    );

    // dump/load round trip for reproducing instances
    let json = p.to_json();
    let p2 = SdpProblem::from_json(&json).unwrap();
    let r2 = p2.solve(&opts).unwrap();
    println!(
        "round-tripped instance solves to the same status: {:?}",
        r2.status
    );
}
