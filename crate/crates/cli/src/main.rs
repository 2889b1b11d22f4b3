use std::io::Write;

fn main() {
    let (code, output) = fuzzy_des_cli::run(std::env::args_os());
    let mut stream: Box<dyn Write> = if code == fuzzy_des_cli::EXIT_USAGE {
        Box::new(std::io::stderr())
    } else {
        Box::new(std::io::stdout())
    };
    let _ = stream.write_all(output.as_bytes());
    std::process::exit(code);
}
