use clap::Parser;

fn main() {
    let cli = pwt_lab::cli::Cli::parse();
    std::process::exit(pwt_lab::cli::main_with(cli));
}
