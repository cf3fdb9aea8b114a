//! Operator system structures on the unital direct sum of two
//! finite-dimensional C*-algebras.
//!
//! For unital C*-algebras `A`, `B`, the sum `A + B` sits inside the unital
//! free product and inside the tensor product, and each inclusion induces a
//! different family of positive matrix cones on the same vector space
//! `(A ⊕ B)/ℂ(1_A − 1_B)`. This crate turns those structures into decision
//! procedures for finite-dimensional algebras `⊕_i M_{n_i}`:
//!
//! - [`opsys::is_positive_min`] tests positivity in the tensor-product
//!   structure by an eigenvalue computation (finite-dimensional algebras are
//!   nuclear, so the minimal and maximal tensor norms coincide and a single
//!   test covers both);
//! - [`opsys::is_positive_coproduct`] tests positivity in the free-product
//!   (coproduct) structure by semidefinite feasibility over a scalar shift,
//!   and produces a compatible pair of states as a witness when the answer
//!   is negative;
//! - [`opsys::is_tensor_compatible`] decides the quantum marginal problem
//!   for a compatible pair, with a monogamy-style certificate on failure;
//! - [`opsys::norm_min`] / [`opsys::norm_coproduct`] compute the induced
//!   operator-space norms, which for odd elements of a Z₂-graded algebra
//!   differ by at most a factor of 2.
//!
//! At level 1 the two cone tests always agree; from level 2 on they separate
//! as soon as both algebras are noncommutative, and the separation is
//! exhibited constructively ([`opsys::monogamy_witness`],
//! [`opsys::separating_element`]).
//!
//! The [`sdp`] module is a self-contained dense interior-point solver for
//! block-structured Hermitian SDPs with verifiable infeasibility
//! certificates; [`states`] covers densities, marginals, Bell-type
//! constructions, and small-dimension separability; [`experiments`] runs the
//! seeded end-to-end sweeps behind the `opsum` CLI.

pub mod algebra;
pub mod experiments;
pub mod linalg;
pub mod opsys;
pub mod sample;
pub mod sdp;
pub mod states;
pub mod wire;

pub use algebra::{
    build_algebra, embed_left, embed_right, embed_sum, gram_intertwiner, grading_project,
    is_positive_alg, AlgElement, AlgebraError, FdAlgebra, Grading, Parity, TensorAlgebra,
};
pub use opsys::{
    compatible_witness, gauge_shift, is_positive_coproduct, is_positive_min,
    is_tensor_compatible, monogamy_witness, norm_coproduct, norm_min, separating_element,
    symmetry_check, CompatiblePair, CoproductCheck, MarginalCertificate, MonogamyWitness,
    NormKind, OpsysError, SumElement, TensorCompat,
};
pub use sdp::{SdpError, SdpOptions, SdpProblem, SdpResult, SdpStatus};
pub use states::{
    bell_state, classify_puresep, product_state, reduce, reduce_side, separability_status,
    tritobi_check, Cut, PuresepClass, SepStatus, Side, State, StateError,
};
