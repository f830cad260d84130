//! Command-line front end for the germ/cycle library: input parsing,
//! report rendering, command dispatch, and the built-in acceptance suite.

pub mod parse;
pub mod report;
pub mod run;
pub mod selftest;
