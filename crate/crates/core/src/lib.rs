//! Solvers for the prize-collecting rural postman problem.

pub mod bench;
pub mod candidates;
pub mod error;
pub mod flow;
pub mod generate;
pub mod instance;
pub mod lp;
pub mod multigraph;
pub mod paths;
pub mod preprocess;
pub mod ratiocheck;
pub mod solvers;
pub mod splitoff;
pub mod treedecomp;

pub use error::{Error, ParseError, Result};
pub use instance::{objective, parse_instance, Edge, Instance, Walk};
pub use multigraph::{euler_tour, odd_vertices, Multigraph};
