//! Search for integer solutions of x³ + y³ + z³ = k.
//!
//! The engine covers the Fermat cubic X³ + Y³ = 1 with thin tangent strips
//! ("flagstones"), turns every strip and denominator range into a small 3D
//! lattice problem, reduces the lattice basis and enumerates the integer
//! points of the resulting pyramid. Every candidate is confirmed with exact
//! wide-integer arithmetic. A brute-force oracle certifies completeness at
//! small bounds, and the driver adds checkpointed, deterministic runs and
//! density reports.

pub mod arith;
pub mod driver;
pub mod geometry;
pub mod lattice;
pub mod oracle;
pub mod parametric;
pub mod report;

pub use arith::{canonicalize, cube_sum, mod9_admissible, verify_solution, Solution, TargetSet, I256};
