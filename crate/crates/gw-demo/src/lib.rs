//! Browser bindings for the solver: generate point-cloud pairs, solve them
//! with full traces, and compare local search against the certified optimum.
