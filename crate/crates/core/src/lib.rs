//! Pattern counting, entropy bounds and product-system checks for
//! multidimensional shifts of finite type on `Z^d`.
//!
//! The modules build on each other:
//!
//! * [`lattice`]: points, windows, subgroups and coset transversals;
//! * [`shiftspace`]: systems, patterns and margin languages;
//! * [`entropy`]: window, strip and exact entropy values;
//! * [`projection`]: projected languages and product systems;
//! * [`irreducibility`]: finite-scale gluing checks;
//! * [`spec`] and [`report`]: JSON input and deterministic reports.
//!
//! The guide in `book/` walks through each of these with runnable examples.

pub mod corpus;
pub mod entropy;
pub mod error;
pub mod irreducibility;
pub mod lattice;
pub mod projection;
pub mod report;
pub mod shiftspace;
pub mod spec;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/languages.md")]
    mod languages {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/projection.md")]
    mod projection {}
    #[doc = include_str!("../../../book/src/irreducibility.md")]
    mod irreducibility {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
