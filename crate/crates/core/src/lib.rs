//! Adiabatic transfer of an excitation across topological tight-binding chains.
//!
//! The numerical layers are [`lattice`], [`eigen`], [`topostates`],
//! [`protocols`], [`evolution`], [`spectra`] and [`reduced`]. The
//! [`harness`] turns TOML configs into CSV tables and backs the `topopump`
//! binary.
//!
//! ```
//! use topopump::evolution::transfer_probability;
//! use topopump::lattice::ChainSpec;
//! use topopump::protocols::Schedule;
//!
//! let chain = ChainSpec::interfaced_ssh(4)?;
//! let schedule = Schedule::ctap_scaled(400.0, 0.9, 1.0)?;
//! assert!(transfer_probability(&chain, &schedule, None)? > 0.9);
//! # Ok::<(), topopump::error::Error>(())
//! ```

pub mod eigen;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod lattice;
pub mod protocols;
pub mod reduced;
pub mod spectra;
pub mod topostates;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/topostates.md")]
    mod topostates {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    mod protocols {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/reduced.md")]
    mod reduced {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
