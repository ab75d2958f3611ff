fn main() {
    std::process::exit(netconc::cli::main());
}
