fn main() {
    std::process::exit(flagrock::cli::main());
}
