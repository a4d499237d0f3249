use std::io::Write;

fn main() {
    let result = elo_cli::run(std::env::args());
    print!("{}", result.stdout);
    eprint!("{}", result.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(result.code);
}
