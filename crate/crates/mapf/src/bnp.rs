//! Lazy MIP compilation: path pools, restricted master, collision cuts,
//! pricing, and branch-and-bound. (under construction)
