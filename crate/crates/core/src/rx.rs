//! Receiver chain (in progress).
