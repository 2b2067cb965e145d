//! Exact enumeration, bijective coding, random sampling and continuum
//! scaling functions for planar quadrangulations with a boundary.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coding;
mod faddeeva;
pub mod quad;
pub mod combin;
pub mod genfun;
pub mod sampler;
pub mod scaling;
pub mod series;
