mod args;
mod commands;
mod config;
mod error;
mod report;
mod target;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 2 on usage errors and 0 for --help / --version
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Check(a) => commands::cmd_check(a),
        Command::Derive(a) => commands::cmd_derive(a),
        Command::Enumerate(a) => commands::cmd_enumerate(a),
        Command::Catalog(a) => commands::cmd_catalog(a),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 2 {
                eprintln!("run `ouro --help` for usage");
            }
            e.exit_code()
        }
    };
    std::process::exit(code);
}
