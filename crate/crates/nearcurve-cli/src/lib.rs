//! Grid-scan harness and artifact plumbing around `nearcurve-core`.
//!
//! The core crate stays `no_std`; everything that touches files, threads, or
//! process exit codes lives here. [`config::ScanConfig`] mirrors the JSON
//! config format, [`scan::run_scan`] fans grid cells out over a thread pool
//! and merges them deterministically, and [`report`] serializes results with
//! enough digits that reruns diff byte-for-byte.

pub mod config;
pub mod report;
pub mod scan;
