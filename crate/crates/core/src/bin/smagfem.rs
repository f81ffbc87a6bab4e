fn main() {
    std::process::exit(smagfem::cli::main_with_args(std::env::args_os()));
}
