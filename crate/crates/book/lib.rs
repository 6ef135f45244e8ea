//! Compiles the guide in `book/src` so that its examples run as doc-tests.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../book/src/hermitian.md")]
pub mod hermitian {}
#[doc = include_str!("../../book/src/wishart.md")]
pub mod wishart {}
#[doc = include_str!("../../book/src/hellinger.md")]
pub mod hellinger {}
#[doc = include_str!("../../book/src/filter.md")]
pub mod filter {}
#[doc = include_str!("../../book/src/rendering.md")]
pub mod rendering {}
#[doc = include_str!("../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../book/src/files-and-cli.md")]
pub mod files_and_cli {}
#[doc = include_str!("../../README.md")]
pub mod readme {}
