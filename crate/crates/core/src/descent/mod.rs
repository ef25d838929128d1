//! Frobenius fixed points, quotient variants, explicit finite extensions and
//! the rank-one functors between characters and modules.

pub mod extension;
pub mod fixed;
pub mod functor;

pub use extension::{
    ExtElement, ExtMap, ExtensionJson, ExtensionKind, FiniteExtension, SimpleExtension,
};
pub use fixed::{
    galois_invariants, FixedOperator, FixedPointReport, FixedPointSolution, FrobFixedSystem,
    UnknownKey, DEFAULT_DIMENSION_CAP, DEFAULT_T_DEGREE_CAP,
};
pub use functor::{
    functor_d_rank1, roundtrip_v_of_d, splitting_extension, tensor_compatible, Character,
    CharacterJson, RoundTripReport,
};
