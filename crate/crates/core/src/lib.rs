//! Matching of regular patterns with bounded repetition.
//!
//! The pipeline: [`syntax`] parses and normalizes patterns, [`nca`] builds
//! counter automata, [`analysis`] classifies each repetition as
//! counter-ambiguous or not, [`placement`] picks a storage cell per
//! repetition, [`engine`] runs automata over byte streams, [`ir`] lowers
//! them to a hardware automaton network and [`cost`] estimates the energy
//! and area of that network. [`ruleset`] and [`bench`] handle rule files.

pub mod analysis;
pub mod bench;
pub mod charclass;
pub mod cost;
pub mod engine;
pub mod ir;
pub mod nca;
pub mod placement;
pub mod ruleset;
pub mod syntax;

pub use charclass::CharClass;
