fn main() {
    std::process::exit(eqlab_cli::main_with(std::env::args_os().collect()));
}
