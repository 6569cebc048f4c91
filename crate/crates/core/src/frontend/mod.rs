//! Domain language, builtin domains and the command-line driver.

mod builtins;
mod cli;
mod lexer;
mod parser;
mod printer;


use crate::solver::{Diagnostic, HmdpModel};

pub use builtins::{builtin, builtin_by_spec, INVENTORY_BOX, MARS1D_BOX, MARS1D_MOVE, MARS2D_BOX, NAMES};
pub use cli::cli_run;
pub use parser::{is_keyword, parse};
pub use printer::{cond as print_cond, expr as print_expr, print};

/// Parse a builtin domain. Builtins always parse.
pub fn builtin_model(spec: &str) -> Result<HmdpModel, Vec<Diagnostic>> {
    let text = builtin_by_spec(spec).map_err(|d| vec![d])?;
    parse(&text)
}
