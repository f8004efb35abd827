fn main() {
    std::process::exit(tailfrac::cli::main_from_env());
}
