use std::io;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let stdin = io::stdin();
    let code = privcheck::cli::run(
        std::env::args_os(),
        privcheck::cli::Io {
            input: &mut stdin.lock(),
            out: &mut io::stdout(),
            err: &mut io::stderr(),
        },
    );
    std::process::exit(code);
}
