fn main() {
    std::process::exit(windrs::cli::main_entry());
}
