fn main() {
    std::process::exit(tumor_thermo::cli::main_with_args(std::env::args_os()));
}
