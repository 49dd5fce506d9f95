//! Bounded symbolic engine for globular operads.
//!
//! Batanin trees and their pasting schemes, the free strict ω-category monad on
//! finite globular sets, coloured collections and the coglobular complex of
//! higher transformations, presented operads under five contractibility
//! regimes, contraction search, and coendomorphism cells built from tree-indexed
//! pushouts.

pub mod cli;
pub mod coend;
pub mod collections;
pub mod contraction;
pub mod globular;
pub mod operads;
pub mod pasting;
pub mod trees;

pub use globular::Side;
