fn main() {
    std::process::exit(torsion_noise::cli::main_with_args(std::env::args_os()));
}
