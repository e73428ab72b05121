fn main() {
    std::process::exit(atr_lab::cli::run());
}
