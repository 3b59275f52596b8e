fn main() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let code = cfinsler_cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
