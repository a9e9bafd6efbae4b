fn main() {
    std::process::exit(broodsim::cli::main());
}
