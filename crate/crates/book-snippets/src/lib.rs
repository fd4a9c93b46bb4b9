//! Runs the guide's Rust snippets as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/loops.md")]
pub mod loops {}

#[doc = include_str!("../../../book/src/multiplicity.md")]
pub mod multiplicity {}

#[doc = include_str!("../../../book/src/equivalence.md")]
pub mod equivalence {}

#[doc = include_str!("../../../book/src/symmetry.md")]
pub mod symmetry {}

#[doc = include_str!("../../../book/src/slices.md")]
pub mod slices {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
