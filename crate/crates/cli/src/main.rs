use clap::Parser;
use polarlet_cli::commands::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            std::process::exit(2);
        }
        Err(e) => {
            let _ = e.print();
            return;
        }
    };
    if let Err(f) = run(cli) {
        eprintln!("{f}");
        std::process::exit(f.exit_code());
    }
}
