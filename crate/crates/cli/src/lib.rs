//! Spec-file front end for the igusa engines: a small declarative language
//! for sets, regions, weights and maps, and the commands that evaluate them.

pub mod ast;
pub mod error;
pub mod parse;
pub mod resolve;
pub mod run;

pub use ast::SpecDocument;
pub use error::{CliError, Diagnostic};
pub use parse::{parse_document, parse_formula};
pub use run::{run, Command, CommandOutput, Options};

/// Reads and parses a spec file.
pub fn load(path: &std::path::Path) -> Result<SpecDocument, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_document(&src)
}

/// Renders an output the way the binary prints it.
pub fn render(out: &CommandOutput, json: bool) -> String {
    if json {
        serde_json::to_string_pretty(&out.envelope()).expect("json values serialize")
    } else {
        out.text.clone()
    }
}
