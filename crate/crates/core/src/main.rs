fn main() {
    std::process::exit(interacting_ca::cli::main());
}
