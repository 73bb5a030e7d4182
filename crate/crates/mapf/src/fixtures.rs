//! Small hand-checked instances used throughout the tests and the guide.

use crate::instance::{AgentTask, Instance};

/// Path graph v1 - v2 - v3 with a single agent going v1 -> v3.
/// Optimal sum of costs: 2.
pub fn path3() -> Instance {
    Instance::new(3, vec![(0, 1), (1, 2)], vec![AgentTask { start: 0, goal: 2 }]).unwrap()
}

/// Path graph v1 - v2 - v3 with two agents trying to swap ends.
/// Unsolvable: a path has no room to pass.
pub fn path3_swap() -> Instance {
    Instance::new(
        3,
        vec![(0, 1), (1, 2)],
        vec![AgentTask { start: 0, goal: 2 }, AgentTask { start: 2, goal: 0 }],
    )
    .unwrap()
}

/// Star with center c (vertex 0) and leaves l1, l2, l3 (vertices 1..3).
/// Agents on l1 and l2 swap by parking one of them on the spare leaf.
/// Optimal sum of costs: 7.
pub fn star4_swap() -> Instance {
    Instance::new(
        4,
        vec![(0, 1), (0, 2), (0, 3)],
        vec![AgentTask { start: 1, goal: 2 }, AgentTask { start: 2, goal: 1 }],
    )
    .unwrap()
}

/// Cycle v1 - v2 - v3 - v4 - v1 with adjacent agents swapping by rotating
/// the long way around. Optimal sum of costs: 4.
pub fn cycle4_swap() -> Instance {
    Instance::new(
        4,
        vec![(0, 1), (1, 2), (2, 3), (0, 3)],
        vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 1, goal: 0 }],
    )
    .unwrap()
}
