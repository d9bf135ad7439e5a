//! Suppression (in progress).
