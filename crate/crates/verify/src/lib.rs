//! Carries the `acceptance` test target only.
