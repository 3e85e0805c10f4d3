use clap::Parser;
use mpscmi_cli::{emit, error::exit, run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli).and_then(|out| emit(&out)) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
