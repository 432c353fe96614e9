//! Runs the guide chapters as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/binarisation.md")]
pub mod binarisation {}
#[doc = include_str!("../../../book/src/solvers.md")]
pub mod solvers {}
#[doc = include_str!("../../../book/src/optimisers.md")]
pub mod optimisers {}
#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}
#[doc = include_str!("../../../book/src/biogas.md")]
pub mod biogas {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
