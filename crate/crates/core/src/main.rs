fn main() {
    std::process::exit(kmoments::cli::main());
}
