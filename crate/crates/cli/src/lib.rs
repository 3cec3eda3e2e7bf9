//! Command-line and HTTP front ends for the `rdot` planner.
//!
//! Both transports go through [`ops`], so a CLI run and an API call on the
//! same input produce byte-identical JSON.

pub mod cli;
pub mod ops;
pub mod service;
