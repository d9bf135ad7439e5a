//! Covariance lab (in progress).
