fn main() {
    std::process::exit(statesum::cli::main_entry());
}
