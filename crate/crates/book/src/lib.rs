//! Runs the guide's code listings as doctests so the book cannot drift
//! from the library. Build the book itself with `mdbook build book`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/airspace-graph.md")]
pub mod airspace_graph {}
#[doc = include_str!("../../../book/src/routing.md")]
pub mod routing {}
#[doc = include_str!("../../../book/src/daa.md")]
pub mod daa {}
#[doc = include_str!("../../../book/src/links.md")]
pub mod links {}
#[doc = include_str!("../../../book/src/fmcw.md")]
pub mod fmcw {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/scenario-schema.md")]
pub mod scenario_schema {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
