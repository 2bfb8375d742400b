//! Hybridizable discontinuous Galerkin solver for the two-dimensional Biot
//! poroelastic wave equations in first-order stress / velocity / pressure
//! form.
//!
//! Interior unknowns per triangle are the symmetric stress and the fluid
//! velocity and pressure in `P_k`, and the solid velocity in `P_{k+1}`. Only
//! the face traces of the solid velocity and the pressure (`P_k` on every
//! edge) are globally coupled; everything else is eliminated element by
//! element before the sparse trace system is factorized. Time integration is
//! Crank-Nicolson.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dense;
pub mod fe;
pub mod global;
pub mod hdg;
pub mod materials;
pub mod mesh;
pub mod timestep;
pub mod verification;
