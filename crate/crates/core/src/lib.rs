//! Simulation and verification toolkit for a flowing photonic cluster-state
//! architecture.
//!
//! The crate is organised around the life cycle of the machine:
//!
//! * [`lattice`] describes the doubled-coordinate geometry of the 3D cluster
//!   and the stabilizer generators the hardware must prepare.
//! * [`pauli`] is a dense GF(2) stabilizer tableau used to verify that a
//!   measurement schedule really prepares the target state.
//! * [`prepnet`] lays out the photonic chip network, generates the per-chip
//!   switching programs, and replays the photon stream against them.
//! * [`decoder`] samples errors on a measured block, matches syndromes and
//!   estimates logical failure rates and thresholds.
//! * [`resources`] reproduces the closed-form resource arithmetic (chip
//!   counts, code distances, distillation yields, per-gate costs).

pub mod decoder;
pub mod lattice;
pub mod pauli;
pub mod prepnet;
pub mod resources;
