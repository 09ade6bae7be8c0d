//! Holds the acceptance suite under `tests/`. Run it with
//! `cargo test -p offload-sim-acceptance`.
