//! Calculator for finite groupoids and the bicategory they generate.
//!
//! The crate provides two models of the same structure and the machinery to
//! move between them:
//!
//! * the *bi-set* side: finite groupoids, equivariant sets ([`gset`]),
//!   two-sided equivariant sets composed by a balanced product ([`biset`]),
//!   and the resulting hom groups with a canonical basis ([`burnside`]);
//! * the *correspondence* side: spans of groupoids whose left leg is a
//!   finite weak cover, composed by bicategorical pullback ([`span`]).
//!
//! The [`comparison`] module carries structures back and forth and produces
//! checkable equivalence witnesses. [`format`] defines the plain-text file
//! formats, [`sample`] generates seeded random instances, and [`laws`] runs
//! the coherence-law suites over them.

pub mod biset;
pub mod burnside;
pub mod catalog;
pub mod comparison;
pub mod format;
pub mod functor;
pub mod group;
pub mod groupoid;
pub mod gset;
pub mod laws;
pub mod sample;
pub mod span;
pub(crate) mod util;

pub use groupoid::{Groupoid, GroupoidError, RawGroupoid};
