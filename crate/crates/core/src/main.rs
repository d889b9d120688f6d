fn main() {
    std::process::exit(symx::cli::main());
}
