//! The guide's chapters as modules, so `cargo test` runs every listing in
//! `book/src` as a doc-test.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}
#[doc = include_str!("../../../book/src/prompts.md")]
pub mod prompts {}
#[doc = include_str!("../../../book/src/workflows.md")]
pub mod workflows {}
#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("../../../book/src/baseline.md")]
pub mod baseline {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
