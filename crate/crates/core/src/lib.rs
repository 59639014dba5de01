//! PageRank optimization with fragile-edge selection.
//!
//! Given a directed graph with a target node and a set of optional
//! ("fragile") edges, find a feasible subset of the fragile edges that
//! minimizes the target's expected first return time under the damped random
//! walk, which is the same as maximizing its PageRank.
//!
//! The crate provides
//!
//! * [`chain`]: the walk, hitting times, return time and stationary vector;
//! * [`oracle`]: the minimum return time with edges forced on/off;
//! * [`cuts`]: L-shaped, single-edge and sequentially lifted valid
//!   inequalities built from oracle calls;
//! * [`master`] and [`solver`]: an exact cutting-plane method;
//! * [`bruteforce`]: enumeration twins for checking all of the above.

pub mod bruteforce;
pub mod chain;
pub mod cuts;
pub mod error;
pub mod instance;
pub mod linalg;
pub mod master;
pub mod oracle;
pub mod solver;

pub use chain::{first_return_time, hitting_times, stationary, HittingProfile};
pub use cuts::{eval_cut, l_shaped_cut, lifted_cut, new_cut, Cut, CutFamily, LiftOrdering, OrderingStrategy};
pub use error::{Error, InvalidInstance, Result, Violation};
pub use instance::{
    enumerate_feasible, generate_random, is_feasible, read_instance, validate, write_instance, ConstraintSet,
    ConstraintSpec, FragileEdgeId, GeneratorSpec, Instance, Problem, Selection, Sense,
};
pub use master::{solve_master, MasterResult, MasterStatus};
pub use oracle::{gamma, min_unconstrained, GammaQuery, GammaResult};
pub use solver::{solve, SolveOptions, SolveReport, SolveStatus};
