//! Acceptance gate for the `coopmac` crate; see `tests/acceptance.rs`.
