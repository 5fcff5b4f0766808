use clap::Parser;

fn main() {
    let args = ergolab_cli::Args::parse();
    match ergolab_cli::run(args) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("ergolab: {} error: {e:#}", ergolab_cli::tasks::error_kind(&e));
            std::process::exit(2);
        }
    }
}
