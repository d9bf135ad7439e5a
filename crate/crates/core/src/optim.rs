//! Transceiver optimization (in progress).
