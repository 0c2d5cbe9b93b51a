//! Library half of the `cbd` command-line tool: the `.sys` document
//! format, report documents with human and machine renderings, and the
//! bundled demonstration systems. The binary in `main.rs` is a thin
//! argument-parsing layer over these modules.

pub mod demo;
pub mod format;
pub mod report;
