use std::io;
use std::process;

fn main() {
    let code = ncgg_cli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    process::exit(code);
}
