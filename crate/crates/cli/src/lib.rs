//! Command-line front end for `hyptutte`: solver configuration, SVG
//! rendering in the Poincaré disk, and the subcommands themselves.

pub mod config;
pub mod render;
pub mod run;
