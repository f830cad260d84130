//! Exact arithmetic for the ramification analysis of wildly ramified power
//! series germs over finite fields, together with Newton-polygon
//! certification of periodic cycles of polynomial maps whose coefficients
//! live in an ultrametric ring (truncated Laurent series, truncated p-adic
//! integers, or exact rational functions).
//!
//! Everything here is exact: coefficients are finite-field elements or
//! integer/rational data, valuations are reduced fractions, and any quantity
//! that a truncated computation cannot pin down is reported as a censored
//! value rather than a guess.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod censored;
pub mod coeff;
pub mod cycles;
pub mod ff;
pub mod normal;
pub mod polygon;
pub mod ram;
pub mod series;
pub mod valued;
