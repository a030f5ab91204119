//! Solver library for abstract argumentation frameworks under equational
//! semantics.
//!
//! A framework is a finite directed graph of arguments and attacks. Each
//! argument `x` gets a fixed-point equation over the values of its attackers,
//! either `x = 1 - max(y1..yk)` or `x = (1-y1)...(1-yk)`, with unattacked
//! arguments pinned at 1. Solutions over the crisp grid {0, 1/2, 1}
//! correspond to the classical labelling-based semantics; real-valued
//! solutions are found by damped fixed-point iteration.
//!
//! On top of the equation layer sits a perturbation protocol: clamping a set
//! of arguments to 0 (a "loop buster") breaks cycles, after which grounded
//! value propagation decides further arguments, and the procedure recurses on
//! the undecided residual. Four buster-selection policies (LB1-LB4) give four
//! semantics; LB2 provably coincides with the SCC-recursive CF2 semantics,
//! which is also implemented directly for cross-checking.
//!
//! Joint attacks, where a group of arguments attacks a target collectively,
//! are supported through generalized equations and through an encoding into
//! ordinary frameworks with auxiliary nodes.
//!
//! Modules:
//! - [`af`]: framework data model, TGF/APX parsing and serialization,
//!   restriction, conflict-free machinery.
//! - [`equations`]: equation systems, clamping, evaluation, and recovery of a
//!   framework from a system.
//! - [`solver`]: damped fixed-point iteration, crisp solution enumeration,
//!   grounded propagation.
//! - [`loops`]: strongly connected components, top classes, loop-buster
//!   recognition and enumeration (feedback vertex set search).
//! - [`semantics`]: classical Dung semantics, CF2, the LB protocol, and
//!   extension-set comparison.
//! - [`joint`]: joint-attack frameworks, their equations, and the
//!   standard-framework encoding.

pub mod af;
pub mod equations;
pub mod joint;
pub mod loops;
pub mod semantics;
pub mod solver;
