//! Holds the `acceptance` test target, which runs every acceptance
//! criterion of firey-core and prints one PASS/FAIL line per criterion.
//! Kept in its own package so that it runs after the unit and integration
//! tests of the other workspace members.
