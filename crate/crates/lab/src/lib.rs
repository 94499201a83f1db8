//! Std companion to `stokes-core`: JSON and CSV IO, named state families,
//! profile meshes, invariant suites and the `stokes-lab` command line.

pub mod cli;
pub mod io;
pub mod mesh;
pub mod states;
pub mod verify;
