//! Discrete carpet modulus and square-carpet uniformization.
//!
//! A finite carpet (outer polygon, four marked sides, polygonal peripheral
//! disks) is reduced to a contact graph; the extremal metric of the
//! left-to-right chain family gives the oscillations of the energy-minimizing
//! potential `u`; walking level interfaces of `u` gives the conjugate `v`; and
//! the pair places every disk as a square in `[0,1] x [0,D]`.

pub mod conjugate;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod layout;
pub mod modulus;
pub mod passage;
pub mod pipeline;
pub mod potential;
pub mod seed;

pub use error::{Error, Result};
