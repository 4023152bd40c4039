//! Library surface of the CLI: report rendering and schema validation,
//! shared between the binary and its integration tests.

pub mod output;
pub mod schema;
