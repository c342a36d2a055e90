//! Nothing to export; see `tests/acceptance.rs`.
