fn main() {
    env_logger::init();
    std::process::exit(pm25_core::cli::run_command(std::env::args_os()));
}
