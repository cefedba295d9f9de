//! Bayesian identification of acoustic point sources.
//!
//! The crate couples three pieces:
//!
//! * a P1 finite element discretization of the Helmholtz equation with an
//!   impedance boundary on a structured triangulation ([`mesh`], [`helmholtz`]),
//! * a sparse-source prior and complex Gaussian likelihood ([`model`], [`prior`]),
//! * a tempered sequential Monte Carlo sampler whose move kernel is reversible
//!   with respect to the prior ([`smc`]),
//!
//! plus the posterior summaries used by the experiment drivers ([`analysis`]).
//!
//! The crate is `no_std` compatible (with `alloc`). The default `std` and
//! `parallel` features only add `std::error::Error` integration and rayon
//! parallel particle sweeps; results do not depend on either.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod band;
pub mod error;
pub mod geom;
pub mod helmholtz;
pub mod math;
pub mod mesh;
pub mod model;
pub mod prior;
pub mod rng;
pub mod smc;
pub mod sparse;

pub use error::{Error, Result};
pub use geom::{Point2, Rect};
pub use num_complex::Complex64;
