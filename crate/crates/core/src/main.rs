use clap::Parser;

fn main() {
    let cli = hgc_core::cli::Cli::parse();
    match hgc_core::cli::run(cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
