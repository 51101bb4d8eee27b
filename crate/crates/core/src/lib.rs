//! Chart specifications, workflow derivation, columnar execution, SQL
//! compilation and rendering for exploratory visual analysis.

pub mod compute_link;
pub mod exec_engine;
pub mod pipeline;
pub mod renderer;
pub mod spec_model;
pub mod sql_compiler;
pub mod table_store;
pub mod value;
