fn main() {
    std::process::exit(apsm_sic::harness::cli::run_cli(std::env::args_os()));
}
