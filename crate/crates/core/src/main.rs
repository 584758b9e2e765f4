fn main() {
    std::process::exit(energy_bounds::cli::main_with_args(std::env::args_os()));
}
