//! Simulator of a controlled-SWAP photonic interferometer that measures
//! nonlinear state functionals from two-photon interference.
//!
//! The device interferes two photons (or photon pairs) and records
//! coincidence counts while a relative phase `phi` is scanned. For an input
//! state `rho` the coincidence rate follows
//!
//! ```text
//! r(phi) = 1 + epsilon * v * cos(phi),    v = tr(rho S),
//! ```
//!
//! where `S` is the two-qubit SWAP operator and `epsilon` is the
//! interferometric mode overlap. Because `tr((rho_a (x) rho_b) S) =
//! tr(rho_a rho_b)`, the fringe visibility `v` reads out functionals that
//! are nonlinear in the state: overlap, purity, fidelity against a pure
//! target, Hilbert-Schmidt distance, and an entanglement witness.
//!
//! The crate is layered bottom-up:
//!
//! - [`qmath`]: dense complex matrices, Kronecker products, partial
//!   transpose/trace, and a Hermitian eigensolver.
//! - [`states`]: physical state constructors (waveplates, dephasers, Werner
//!   and partially entangled families) behind validated [`states::PureState`]
//!   and [`states::DensityOp`] types.
//! - [`network`]: the optical model itself, with two independent backends
//!   (closed-form rate and postselected conditional state) that must agree.
//! - [`counting`]: Poisson photon counting with optional phase drift, on
//!   deterministic per-point RNG substreams.
//! - [`estimate`]: fringe fitting, sign calibration against a reference run,
//!   functional estimators with exact matrix oracles, and the locked-run
//!   entanglement verdict.

pub mod counting;
pub mod estimate;
pub mod experiment;
pub mod network;
pub mod qmath;
pub mod states;

pub use counting::{CountRecord, LockedRunPlan, SweepPlan};
pub use estimate::{
    FitResult, FunctionalKind, FunctionalReport, Verdict, WitnessVerdict,
};
pub use network::{OpticalConfig, PostselectResult};
pub use qmath::{C64, CMatrix, Subsystem};
pub use states::{DensityOp, PureState};
