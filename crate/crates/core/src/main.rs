fn main() {
    std::process::exit(godunov_seis::cli::cli_main(std::env::args_os()));
}
