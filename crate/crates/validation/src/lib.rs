//! Holds the `acceptance` test target, which checks the library and the CLI
//! recipes end to end. Run it with `cargo test -p delaysgd-validation`.
//!
//! It lives in its own package so that `cargo test --workspace` runs every
//! other test target first.
