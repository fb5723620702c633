fn main() {
    std::process::exit(axicyl::cli_main());
}
