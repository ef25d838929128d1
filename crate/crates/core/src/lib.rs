//! Exact arithmetic for multivariable (φ, Γ)-modules over imperfect residue
//! fields at desk scale.
//!
//! Layers, bottom up: the coefficient algebra `k_Δ` ([`coeff`]), truncated
//! Laurent series `E_Δ` ([`series`]), the partial Frobenii and group actions
//! ([`endo`]), free modules with operator matrices ([`module`]), the
//! fixed-point solver and explicit finite extensions ([`descent`]), and
//! naive reference implementations used by the tests ([`oracles`]).

// Index loops over several parallel arrays read better than zipped iterators here.
#![allow(clippy::needless_range_loop, clippy::type_complexity, clippy::too_many_arguments)]

pub mod catalog;
pub mod coeff;
pub mod config;
pub mod descent;
pub mod endo;
pub mod error;
pub mod fp;
pub mod linalg;
pub mod matrix;
pub mod module;
pub mod oracles;
pub mod padic;
pub mod random;
pub mod series;

pub use coeff::{CoefficientAlgebra, CoefficientElement, FiniteFieldSpec, TensorAlgebra};
pub use config::{FactorSpec, RingSpec, SCHEMA_VERSION};
pub use descent::{
    functor_d_rank1, roundtrip_v_of_d, Character, CharacterJson, FiniteExtension, FixedOperator,
    FrobFixedSystem,
};
pub use endo::{Generator, OperatorWord, RingEndo};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use module::{Lattice, Membership, ModuleJson, PhiGammaModule};
pub use padic::PAdicUnitApprox;
pub use series::{LaurentElement, LaurentJson, Ring, SeriesRing};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
