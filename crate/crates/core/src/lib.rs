pub mod benchmarks;
pub mod chc;
pub mod frontend;
pub mod logic;
pub mod oracle;
pub mod par;
pub mod pipeline;
pub mod qe;
pub mod solver;
pub mod spec;
