//! Holds the acceptance gate (`cargo test -p lyap-validation`); no library code.
