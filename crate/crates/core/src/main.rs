use clap::error::ErrorKind;
use clap::Parser;

use frontline::cli::{run, Cli};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli, &argv[1..]));
}
