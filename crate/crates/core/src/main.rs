use std::process::ExitCode;

fn main() -> ExitCode {
    let quiet = std::env::args().any(|a| a == "--quiet");
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet { "warn" } else { "info" }))
        .format_timestamp(None)
        .init();
    let code = bpe_delay::harness::cli_main(std::env::args_os(), &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}
