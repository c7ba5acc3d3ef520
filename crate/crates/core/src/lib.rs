//! Scale analysis for quasi-diffusive perturbations of one-dimensional
//! dynamical systems, and the Monte Carlo machinery to check it.
//!
//! The pipeline runs bottom-up:
//!
//! * [`poset`]: exact combinatorics on finite subsets of ℕ² (minimal
//!   elements, envelopes, pivots, supporting lines).
//! * [`asymptotics`]: ε-power sequences, the subpartition induced by a
//!   slope set, dominant terms and scale functions.
//! * [`analysis`]: drift/diffusion characteristic pairs: strong
//!   stochasticity, the drift–diffusion ratio and curve, limit
//!   classification around `x = 0` and around an equilibrium branch.
//! * [`bifurcation`]: the saddle-node / transcritical / pitchfork catalog
//!   and the space/time scale profile across the critical window.
//! * [`simulate`]: density-dependent Markov chains (exact SSA), path
//!   rescaling and Euler–Maruyama integration of limit SDEs.
//! * [`validate`]: KS and moment comparisons of rescaled chain ensembles
//!   against limit-SDE ensembles.

pub mod analysis;
pub mod asymptotics;
pub mod bifurcation;
pub mod error;
pub mod poly;
pub mod poset;
pub mod rational;
pub mod report;
pub mod simulate;
pub mod validate;

pub use analysis::{
    check_strong_stochasticity, classify_branch, classify_isotropic, classify_parametrized,
    dd_curve, dd_ratio, equilibrium_branch, BranchData, CharacteristicPair, DdCurve,
    LimitClassification, LimitRange, Stochasticity,
};
pub use asymptotics::{classify_region, compare, EpsPower, RegionIndex};
pub use bifurcation::{canonical_noise, detect_bifurcation, scale_profile, BifurcationKind, ScaleProfile};
pub use error::{Error, Result};
pub use poset::{Power, PowerSet, Slope};
pub use rational::{Exponent, Rational};
