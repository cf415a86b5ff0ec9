//! Answer-set counting for ground disjunctive programs by subtracting the
//! completion models that are not answer sets from the completion count.

pub mod cnf;
pub mod completion;
pub mod copy;
pub mod counter;
pub mod depgraph;
pub mod generate;
pub mod oracle;
pub mod par;
pub mod program;
pub mod sat;

pub use counter::{
    enumerate_count, hybrid_count, subtractive_count, BackendConfig, CountOptions, CountReport,
    Mode,
};
pub use par::Execution;
pub use program::{parse_program, GroundProgram, Interpretation};
