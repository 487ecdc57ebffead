//! Holds the `acceptance` test target, which runs every acceptance
//! criterion against the `ethweyl` crate and prints one line per criterion.
