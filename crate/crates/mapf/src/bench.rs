//! Solver-comparison harness. (under construction)
