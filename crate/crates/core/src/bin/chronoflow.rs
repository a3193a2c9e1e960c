fn main() {
    std::process::exit(chronoflow::cli::main(std::env::args_os()));
}
