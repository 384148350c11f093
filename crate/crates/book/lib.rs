//! The guide's chapters as modules, so `cargo test` compiles and runs every
//! Rust listing in `book/src`.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../book/src/epipolar-homography.md")]
pub mod epipolar_homography {}

#[doc = include_str!("../../book/src/line-matching.md")]
pub mod line_matching {}

#[doc = include_str!("../../book/src/separable-ransac.md")]
pub mod separable_ransac {}

#[doc = include_str!("../../book/src/benchmarks.md")]
pub mod benchmarks {}

#[doc = include_str!("../../book/src/cli.md")]
pub mod cli {}
