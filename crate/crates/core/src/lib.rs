//! Simulation and decision core for cooperating wireless sensor networks
//! joined through enhanced gateways on a one-hop overlay.
//!
//! `no_std` with `alloc`; file formats and the command line live in the
//! `wsncoop` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cooperation;
pub mod engine;
pub mod environment;
pub mod geo;
pub mod overlay;
pub mod reasoning;
pub mod time;
pub mod wsn;
