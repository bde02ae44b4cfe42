fn main() {
    std::process::exit(betacnmf::cli::main_with_args(std::env::args_os()));
}
