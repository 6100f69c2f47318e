use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or(dentobox::cli::LOG_ENV, "warn")).init();
    std::process::exit(dentobox::cli::run(std::env::args_os()));
}
