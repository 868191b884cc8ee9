fn main() {
    std::process::exit(mnlfit::cli::main());
}
